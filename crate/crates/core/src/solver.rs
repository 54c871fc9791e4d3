//! Newton solver for central configurations and a multistart driver.
//!
//! Iterates are kept at the normalization `λ = M` (rescaled so that
//! `U/I = M`) and recentered. The rotation and translation gauge is removed
//! by solving the Newton system on the orthogonal complement of the
//! infinitesimal symmetries.

use std::f64::consts::PI;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{self, CentralConfiguration, ConfigurationMatrix, MassVector};
use crate::error::{Error, Result};
use crate::hessian::{self, flatten, unflatten};
use crate::linalg;
use crate::wintner_conley;

pub const DEFAULT_TOL: f64 = 1e-12;
pub const MAX_ITERS: usize = 200;
/// Sorted-distance signatures closer than this are the same similarity class.
pub const DEDUPE_TOL: f64 = 1e-6;
/// A single step may move a body by at most this fraction of the closest approach.
const STEP_CAP: f64 = 0.25;
const POLISH_STEPS: usize = 2;

#[derive(Debug, Clone, Copy)]
pub struct SolveOptions {
    pub tol: f64,
    pub max_iters: usize,
    /// Restrict the search to configurations of at most this dimension.
    pub dimension: Option<usize>,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self { tol: DEFAULT_TOL, max_iters: MAX_ITERS, dimension: None }
    }
}

#[derive(Debug, Clone)]
pub struct SolveOutcome {
    /// Final iterate, recentered and normalized to `λ = M`.
    pub config: ConfigurationMatrix,
    pub converged: bool,
    pub iterations: usize,
    /// Relative residual `max|qŽ| / max|qZ|` after each iterate.
    pub history: Vec<f64>,
}

impl SolveOutcome {
    pub fn residual(&self) -> f64 {
        self.history.last().copied().unwrap_or(f64::INFINITY)
    }

    pub fn certify(&self, masses: &MassVector) -> Result<CentralConfiguration> {
        CentralConfiguration::certify(&self.config, masses, masses.total(), self.residual().max(DEFAULT_TOL))
    }
}

fn normalized(q: DMatrix<f64>, masses: &MassVector) -> Result<ConfigurationMatrix> {
    let c = ConfigurationMatrix::new(q)?;
    Ok(config::recenter(&config::normalize_multiplier(&c, masses), masses))
}

fn relative_residual(c: &ConfigurationMatrix, masses: &MassVector) -> f64 {
    wintner_conley::is_central(c, masses, masses.total(), 0.0).relative_residual
}

/// Scale-invariant merit `Σ m_i |F_i|² / (U²/I)` with `F_i = γ_i − λ̂(q_i − q_G)`.
fn merit(c: &ConfigurationMatrix, masses: &MassVector) -> f64 {
    let u = config::force_function(c, masses);
    let inertia = config::moment_of_inertia(c, masses);
    let lambda = u / inertia;
    let w = wintner_conley::shifted_matrix(c, masses, lambda);
    let f = c.matrix() * w.zhat();
    let mut acc = 0.0;
    for i in 0..c.len() {
        acc += masses[i] * f.column(i).norm_squared();
    }
    acc * inertia / (u * u)
}

fn min_distance(c: &ConfigurationMatrix) -> f64 {
    let r = config::mutual_distances(c);
    let n = c.len();
    let mut best = f64::INFINITY;
    for i in 0..n {
        for j in (i + 1)..n {
            best = best.min(r[(i, j)]);
        }
    }
    best
}

fn cap_step(step: &DMatrix<f64>, c: &ConfigurationMatrix) -> DMatrix<f64> {
    let largest = step.column_iter().fold(0.0_f64, |a, col| a.max(col.norm()));
    let cap = STEP_CAP * min_distance(c);
    if largest > cap {
        step * (cap / largest)
    } else {
        step.clone()
    }
}

/// Newton direction on the gauge-reduced system, plus the descent fallback.
fn directions(c: &ConfigurationMatrix, masses: &MassVector) -> (DMatrix<f64>, DMatrix<f64>) {
    let lambda = masses.total();
    let p = c.dim();
    let g = flatten(&config::amended_gradient(c, masses, lambda));
    let h = hessian::hessian(c, masses, lambda);
    let gauge = DMatrix::from_columns(&hessian::gauge_generators(c));
    let span = linalg::orthonormal_span(&gauge, 1e-10);
    let basis = linalg::orthogonal_complement(&span);
    let hr = basis.transpose() * h.matrix() * &basis;
    let rhs = -(basis.transpose() * &g);
    let y = linalg::pinv_solve(&hr, &rhs, 1e-13);
    let newton = unflatten(&(&basis * y), p);
    let winv_g = DVector::from_fn(g.len(), |k, _| g[k] / masses[k / p]);
    let descent = unflatten(&-(h.matrix() * winv_g), p);
    (newton, descent)
}

/// Try `c + α·dir` for halving `α`; return the first iterate that lowers the merit.
fn line_search(
    c: &ConfigurationMatrix,
    dir: &DMatrix<f64>,
    masses: &MassVector,
    current: f64,
) -> Option<(ConfigurationMatrix, f64)> {
    let dir = cap_step(dir, c);
    let mut alpha = 1.0;
    for _ in 0..30 {
        if let Ok(next) = normalized(c.matrix() + &dir * alpha, masses) {
            let m = merit(&next, masses);
            if m.is_finite() && m < current {
                return Some((next, m));
            }
        }
        alpha *= 0.5;
    }
    None
}

fn newton_loop(seed: &ConfigurationMatrix, masses: &MassVector, opts: &SolveOptions) -> Result<SolveOutcome> {
    let mut c = normalized(seed.matrix().clone(), masses)?;
    let mut m = merit(&c, masses);
    let mut history = vec![relative_residual(&c, masses)];
    let mut iterations = 0;
    let mut polished = 0;
    while iterations < opts.max_iters {
        let res = *history.last().unwrap();
        if res <= opts.tol {
            if polished >= POLISH_STEPS {
                break;
            }
            polished += 1;
        }
        iterations += 1;
        let (newton, descent) = directions(&c, masses);
        let accepted = line_search(&c, &newton, masses, m).or_else(|| line_search(&c, &descent, masses, m));
        match accepted {
            Some((next, next_m)) => {
                c = next;
                m = next_m;
                history.push(relative_residual(&c, masses));
            }
            None => break,
        }
        let r = config::mutual_distances(&c);
        let tolerance = config::COLLISION_REL_TOL * c.diameter();
        if min_distance(&c) <= tolerance.max(1e-7 * linalg::max_abs(&r)) {
            let (i, j) = closest_pair(&r);
            return Err(Error::Collision { i, j, distance: r[(i, j)], tolerance });
        }
    }
    let converged = history.iter().any(|&r| r <= opts.tol) && *history.last().unwrap() <= opts.tol.max(1e-13);
    Ok(SolveOutcome { config: c, converged, iterations, history })
}

fn closest_pair(r: &DMatrix<f64>) -> (usize, usize) {
    let n = r.nrows();
    let mut best = (0, 1);
    for i in 0..n {
        for j in (i + 1)..n {
            if r[(i, j)] < r[best] {
                best = (i, j);
            }
        }
    }
    best
}

/// Project onto the top-`d` principal subspace of the recentered seed,
/// returning the `d × n` coordinates.
fn principal_coordinates(seed: &ConfigurationMatrix, masses: &MassVector, d: usize) -> Result<DMatrix<f64>> {
    let centered = config::recenter(seed, masses);
    let q = centered.matrix();
    let svd = q.clone().svd(true, false);
    let u = svd.u.expect("left singular vectors requested");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let d = d.min(order.len());
    let basis = DMatrix::from_columns(&order[..d].iter().map(|&k| u.column(k).into_owned()).collect::<Vec<_>>());
    Ok(basis.transpose() * q)
}

/// Solve for a central configuration starting from `seed`.
///
/// Returns `Err(Collision)` if iterates approach a collision and an outcome
/// with `converged = false` if the iteration budget runs out.
pub fn solve(seed: &ConfigurationMatrix, masses: &MassVector, opts: &SolveOptions) -> Result<SolveOutcome> {
    if seed.len() != masses.len() {
        return Err(Error::Shape(format!("{} bodies but {} masses", seed.len(), masses.len())));
    }
    match opts.dimension {
        Some(d) if d < seed.dim() => {
            let reduced = ConfigurationMatrix::new(principal_coordinates(seed, masses, d)?)?;
            let mut out = newton_loop(&reduced, masses, opts)?;
            out.config = out.config.embed(seed.dim())?;
            Ok(out)
        }
        _ => newton_loop(seed, masses, opts),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SeedShape {
    SquareCenter,
    RegularPolygon,
    Collinear,
    Trapezoid,
}

impl FromStr for SeedShape {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.replace('-', "_").as_str() {
            "square_center" => Ok(Self::SquareCenter),
            "regular_polygon" => Ok(Self::RegularPolygon),
            "collinear" => Ok(Self::Collinear),
            "trapezoid" | "cocircular_trapezoid" => Ok(Self::Trapezoid),
            _ => Err(Error::UnknownSeed(s.to_string())),
        }
    }
}

/// Isosceles trapezoid inscribed in the unit circle: bodies 1, 2 at polar
/// half-angle `a` from the top, bodies 3, 4 at half-angle `b` from the bottom.
pub fn trapezoid_seed(a: f64, b: f64) -> Result<ConfigurationMatrix> {
    ConfigurationMatrix::from_positions(&[
        vec![a.sin(), a.cos()],
        vec![-a.sin(), a.cos()],
        vec![-b.sin(), -b.cos()],
        vec![b.sin(), -b.cos()],
    ])
}

/// Planar seed of the given shape, zero-padded into ℝ^p.
pub fn seed_catalog(shape: SeedShape, n: usize, p: usize) -> Result<ConfigurationMatrix> {
    if p < 1 || (p < 2 && shape != SeedShape::Collinear) {
        return Err(Error::Shape(format!("seed shape {shape:?} needs dimension ≥ 2")));
    }
    let planar = match shape {
        SeedShape::SquareCenter => {
            if n != 5 {
                return Err(Error::Shape("square_center needs n = 5".into()));
            }
            let s = 0.5f64.sqrt();
            ConfigurationMatrix::from_positions(&[
                vec![s, s],
                vec![-s, s],
                vec![-s, -s],
                vec![s, -s],
                vec![0.0, 0.0],
            ])?
        }
        SeedShape::RegularPolygon => {
            let pts: Vec<Vec<f64>> = (0..n)
                .map(|k| {
                    let t = 2.0 * PI * k as f64 / n as f64;
                    vec![t.cos(), t.sin()]
                })
                .collect();
            ConfigurationMatrix::from_positions(&pts)?
        }
        SeedShape::Collinear => {
            if n < 2 {
                return Err(Error::Shape("need at least two bodies".into()));
            }
            let pts: Vec<Vec<f64>> =
                (0..n).map(|k| vec![-1.0 + 2.0 * k as f64 / (n - 1) as f64]).collect();
            ConfigurationMatrix::from_positions(&pts)?
        }
        SeedShape::Trapezoid => {
            if n != 4 {
                return Err(Error::Shape("trapezoid needs n = 4".into()));
            }
            trapezoid_seed(0.6, 0.9)?
        }
    };
    planar.embed(p)
}

#[derive(Debug, Clone, Copy)]
pub struct MultistartOptions {
    pub starts: usize,
    pub seed: u64,
    /// Ambient dimension of the random starts.
    pub ambient_dim: usize,
    pub solve: SolveOptions,
}

impl Default for MultistartOptions {
    fn default() -> Self {
        Self { starts: 100, seed: 0, ambient_dim: 2, solve: SolveOptions::default() }
    }
}

#[derive(Debug, Clone)]
pub struct SimilarityClass {
    pub representative: CentralConfiguration,
    /// Sorted mutual distances, normalized by the largest.
    pub signature: Vec<f64>,
    /// Number of starts that landed in this class.
    pub hits: usize,
    pub dimension: usize,
}

#[derive(Debug, Clone, Default)]
pub struct MultistartReport {
    pub classes: Vec<SimilarityClass>,
    pub collisions: usize,
    pub nonconverged: usize,
}

/// Sorted mutual distances divided by the largest; invariant under
/// similarities and relabelings.
pub fn similarity_signature(c: &ConfigurationMatrix) -> Vec<f64> {
    let r = config::mutual_distances(c);
    let n = c.len();
    let mut d: Vec<f64> = (0..n).flat_map(|i| ((i + 1)..n).map(move |j| (i, j))).map(|(i, j)| r[(i, j)]).collect();
    d.sort_by(f64::total_cmp);
    let top = *d.last().unwrap();
    d.iter().map(|x| x / top).collect()
}

/// The random start used for index `k` of a multistart run.
pub fn random_start(n: usize, p: usize, seed: u64, k: usize) -> Result<ConfigurationMatrix> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(k as u64);
    ConfigurationMatrix::new(DMatrix::from_fn(p, n, |_, _| rng.random_range(-1.0..1.0)))
}

/// Solve from `opts.starts` uniform random starts in `[-1, 1]^p` and group
/// the results into similarity classes. Results depend only on the seed.
pub fn multistart(masses: &MassVector, opts: &MultistartOptions) -> MultistartReport {
    let n = masses.len();
    let outcomes: Vec<Result<SolveOutcome>> = (0..opts.starts)
        .into_par_iter()
        .map(|k| {
            let start = random_start(n, opts.ambient_dim, opts.seed, k)?;
            solve(&start, masses, &opts.solve)
        })
        .collect();
    let mut report = MultistartReport::default();
    for outcome in outcomes {
        match outcome {
            Err(Error::Collision { .. }) => report.collisions += 1,
            Err(_) => report.nonconverged += 1,
            Ok(out) if !out.converged => report.nonconverged += 1,
            Ok(out) => {
                let Ok(cc) = out.certify(masses) else {
                    report.nonconverged += 1;
                    continue;
                };
                add_to_classes(&mut report.classes, cc);
            }
        }
    }
    report.classes.sort_by(|a, b| {
        a.signature.iter().zip(&b.signature).map(|(x, y)| x.total_cmp(y)).find(|o| o.is_ne()).unwrap_or(std::cmp::Ordering::Equal)
    });
    report
}

fn add_to_classes(classes: &mut Vec<SimilarityClass>, cc: CentralConfiguration) {
    let signature = similarity_signature(&cc.config);
    for class in classes.iter_mut() {
        let gap = class.signature.iter().zip(&signature).fold(0.0_f64, |a, (x, y)| a.max((x - y).abs()));
        if gap <= DEDUPE_TOL {
            class.hits += 1;
            return;
        }
    }
    let dimension = cc.dimension();
    classes.push(SimilarityClass { representative: cc, signature, hits: 1, dimension });
}

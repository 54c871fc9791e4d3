//! Rank-one structure of the shifted Wintner–Conley matrix.
//!
//! When `rank Ž = 1`, the symmetric matrix `Žμ` factors as `ΔΔᵀ`, where `Δ`
//! spans the affine dependencies of the bodies (`ΣΔ_i = 0`, `ΣΔ_i q_i = 0`)
//! and `m_i m_j (S_ij − λ/M) = −Δ_i Δ_j`.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::config::{self, CentralConfiguration, ConfigurationMatrix, MassVector};
use crate::error::{Error, Result};
use crate::linalg;
use crate::wintner_conley;

/// Radial deviation allowed by the cocircularity test, relative to the radius.
pub const COCIRCULAR_REL_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Serialize)]
pub struct DziobekVector {
    /// Homogeneous barycentric coordinates `Δ_i`.
    #[serde(rename = "Delta")]
    pub big_delta: Vec<f64>,
    /// `δ_i = Δ_i / m_i`.
    pub delta: Vec<f64>,
    /// Normalized multiplier `z = λ/M`.
    pub z: f64,
    /// Ratio of the second-largest to the largest eigenvalue magnitude of `Žμ`.
    pub spectral_gap: f64,
}

impl DziobekVector {
    pub fn from_big_delta(big_delta: Vec<f64>, masses: &MassVector, z: f64) -> Self {
        let delta = big_delta.iter().zip(masses.as_slice()).map(|(d, m)| d / m).collect();
        Self { big_delta, delta, z, spectral_gap: 0.0 }
    }

    pub fn len(&self) -> usize {
        self.big_delta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.big_delta.is_empty()
    }

    /// Indices with `|Δ_k| ≤ tol · max|Δ|`.
    pub fn vanishing_bodies(&self, tol: f64) -> Vec<usize> {
        let top = self.big_delta.iter().fold(0.0_f64, |a, d| a.max(d.abs()));
        (0..self.len()).filter(|&k| self.big_delta[k].abs() <= tol * top).collect()
    }
}

/// Extract `Δ` from the dominant eigenpair of `Žμ`.
///
/// The rank of `Žμ` is measured against `tol` times the larger of the
/// spectral norms of `Žμ` and `Zμ`, so that `Ž ≈ 0` reports rank zero.
/// Both signs of `Δ` satisfy the Dziobek relations equally well; the
/// returned vector has its first entry of significant size positive.
pub fn extract_dziobek(cc: &CentralConfiguration, tol: f64) -> Result<DziobekVector> {
    let w = wintner_conley::shifted_matrix(&cc.config, &cc.masses, cc.lambda);
    let mu = cc.masses.mass_matrix();
    let zmu = w.zhat() * &mu;
    let (vals, vecs) = linalg::sym_eigen_sorted(&zmu);
    let scale = linalg::singular_values(&zmu)[0].max(linalg::singular_values(&(w.z() * &mu))[0]);
    let threshold = tol * scale;
    let rank = vals.iter().filter(|v| v.abs() > threshold).count();
    if rank != 1 {
        return Err(Error::RankFailure { rank });
    }
    let k = (0..vals.len()).max_by(|&a, &b| vals[a].abs().total_cmp(&vals[b].abs())).unwrap();
    let kappa = vals[k];
    if kappa < 0.0 {
        return Err(Error::NegativeFactor { eigenvalue: kappa });
    }
    let mut big_delta: Vec<f64> = vecs.column(k).iter().map(|v| v * kappa.sqrt()).collect();
    let top = big_delta.iter().fold(0.0_f64, |a, d| a.max(d.abs()));
    let pivot = big_delta.iter().copied().find(|d| d.abs() > 1e-6 * top).unwrap_or(1.0);
    if pivot < 0.0 {
        big_delta.iter_mut().for_each(|d| *d = -*d);
    }
    let second = vals
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != k)
        .fold(0.0_f64, |a, (_, v)| a.max(v.abs()));
    let mut dv = DziobekVector::from_big_delta(big_delta, &cc.masses, cc.normalized_multiplier());
    dv.spectral_gap = second / kappa;
    Ok(dv)
}

#[derive(Debug, Clone, Serialize)]
pub struct DziobekResidual {
    /// `max_{i<j} |m_i m_j (S_ij − z) + Δ_i Δ_j|`.
    pub relation: f64,
    /// `relation` divided by `max_{i<j} m_i m_j S_ij`.
    pub relative: f64,
    /// `|Σ Δ_i|`.
    pub sum: f64,
    /// `‖Σ Δ_i q_i‖`.
    pub moment: f64,
}

impl DziobekResidual {
    pub fn within(&self, tol: f64) -> bool {
        self.relation <= tol
    }
}

pub fn verify_dziobek_relations(
    config: &ConfigurationMatrix,
    masses: &MassVector,
    dv: &DziobekVector,
) -> DziobekResidual {
    let s = config::s_matrix(config);
    let n = config.len();
    let d = &dv.big_delta;
    let mut relation = 0.0_f64;
    let mut scale = 0.0_f64;
    for i in 0..n {
        for j in (i + 1)..n {
            let mm = masses[i] * masses[j];
            relation = relation.max((mm * (s[(i, j)] - dv.z) + d[i] * d[j]).abs());
            scale = scale.max(mm * s[(i, j)]);
        }
    }
    let sum = d.iter().sum::<f64>().abs();
    let moment = (config.matrix() * DVector::from_column_slice(d)).norm();
    DziobekResidual { relation, relative: relation / scale, sum, moment }
}

#[derive(Debug, Clone, Serialize)]
pub struct VanishingDeltaReport {
    pub body: usize,
    /// `(λ/M)^{−1/3}`.
    pub expected_distance: f64,
    /// `max_i |r_ik − (λ/M)^{−1/3}|` relative to the expected distance.
    pub distance_deviation: f64,
    /// Normalized multiplier of the remaining bodies (equal to `λ/M`).
    pub reduced_z: f64,
    pub reduced_rank_zhat: usize,
    #[serde(skip)]
    pub reduced: CentralConfiguration,
}

/// Consequences of `Δ_k = 0`: body `k` is at distance `(λ/M)^{−1/3}` from every
/// other body, and the others form a central configuration with the same `λ/M`.
pub fn vanishing_delta_consequences(
    cc: &CentralConfiguration,
    dv: &DziobekVector,
    k: usize,
    tol: f64,
) -> Result<VanishingDeltaReport> {
    let top = dv.big_delta.iter().fold(0.0_f64, |a, d| a.max(d.abs()));
    if dv.big_delta[k].abs() > tol * top {
        return Err(Error::DeltaNotVanishing { body: k, value: dv.big_delta[k] });
    }
    let z = cc.normalized_multiplier();
    let expected_distance = z.powf(-1.0 / 3.0);
    let r = config::mutual_distances(&cc.config);
    let distance_deviation = (0..cc.len())
        .filter(|&i| i != k)
        .fold(0.0_f64, |a, i| a.max((r[(i, k)] - expected_distance).abs()))
        / expected_distance;
    let masses = cc.masses.without(k)?;
    let reduced_lambda = z * masses.total();
    let reduced = CentralConfiguration::certify(
        &cc.config.without(k)?,
        &masses,
        reduced_lambda,
        (100.0 * cc.residual).max(1e-9),
    )?;
    let w = wintner_conley::shifted_matrix(&reduced.config, &reduced.masses, reduced.lambda);
    let reduced_rank_zhat = wintner_conley::rank_report(&w, &reduced.config, config::DEFAULT_RANK_TOL).rank_zhat;
    Ok(VanishingDeltaReport {
        body: k,
        expected_distance,
        distance_deviation,
        reduced_z: reduced.normalized_multiplier(),
        reduced_rank_zhat,
        reduced,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct Circle {
    /// Center in the ambient space.
    pub center: Vec<f64>,
    pub radius: f64,
    /// Largest radial deviation over all bodies, relative to the radius.
    pub deviation: f64,
}

/// Circumscribed circle of a planar configuration, fitted through bodies 1–3.
pub fn cocircularity(config: &ConfigurationMatrix) -> Result<Circle> {
    let dim = config::configuration_dimension(config, config::DEFAULT_RANK_TOL);
    if dim != 2 {
        return Err(Error::Shape(format!("cocircularity needs a planar configuration, got dimension {dim}")));
    }
    let q = config.matrix();
    let origin = config.position(0);
    let shifted = DMatrix::from_fn(q.nrows(), q.ncols(), |a, i| q[(a, i)] - origin[a]);
    let frame = linalg::orthonormal_span(&shifted, config::DEFAULT_RANK_TOL);
    let local = frame.transpose() * &shifted;
    let (b, c) = (local.column(1), local.column(2));
    let det = 2.0 * (b[0] * c[1] - b[1] * c[0]);
    if det.abs() <= 1e-12 * (b.norm_squared() + c.norm_squared()) {
        return Err(Error::CollinearTriple(0, 1, 2));
    }
    let (bb, cc) = (b.norm_squared(), c.norm_squared());
    let center_local = DVector::from_vec(vec![(c[1] * bb - b[1] * cc) / det, (b[0] * cc - c[0] * bb) / det]);
    let radius = center_local.norm();
    let deviation = (0..config.len())
        .map(|i| ((local.column(i) - &center_local).norm() - radius).abs())
        .fold(0.0_f64, f64::max)
        / radius;
    let center = origin + &frame * center_local;
    if deviation > COCIRCULAR_REL_TOL {
        return Err(Error::NotCocircular { deviation });
    }
    Ok(Circle { center: center.iter().copied().collect(), radius, deviation })
}

#[derive(Debug, Clone)]
pub struct BrehmPyramid {
    pub cc: CentralConfiguration,
    pub height: f64,
    pub apex_distance: f64,
    pub circumradius: f64,
}

impl BrehmPyramid {
    /// Margins `h − r√2/2` and `r√3/2 − h` for apex distance `r`; both positive
    /// when the height lies strictly inside its admissible interval.
    pub fn height_margins(&self) -> (f64, f64) {
        let r = self.apex_distance;
        (self.height - r * 0.5f64.sqrt(), r * 0.75f64.sqrt() - self.height)
    }
}

/// Vertical apex residual: with all base bodies at horizontal distance `radius`
/// and `λ/M = 1`, the apex is balanced iff `(radius² + h²)^{−3/2} = 1`.
fn apex_residual(radius: f64, h: f64) -> (f64, f64) {
    let r2 = radius * radius + h * h;
    (r2.powf(-1.5) - 1.0, -3.0 * h * r2.powf(-2.5))
}

/// Safeguarded Newton iteration for the apex height, seeded in the middle of
/// the admissible interval and kept inside a shrinking bisection bracket.
fn solve_height(radius: f64) -> Result<f64> {
    let (at_zero, _) = apex_residual(radius, 0.0);
    if at_zero <= 0.0 {
        return Err(Error::InfeasibleHeight(format!("circumradius {radius} is not below the apex distance 1")));
    }
    let (mut lo, mut hi) = (0.0, 1.0);
    let mut h = 0.5 * (0.5f64.sqrt() + 0.75f64.sqrt());
    for _ in 0..200 {
        let (f, df) = apex_residual(radius, h);
        if f == 0.0 {
            return Ok(h);
        }
        if f > 0.0 {
            lo = h;
        } else {
            hi = h;
        }
        let newton = h - f / df;
        let next = if newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
        if (next - h).abs() <= 4.0 * f64::EPSILON * next.max(1.0) {
            return Ok(next);
        }
        h = next;
    }
    Ok(h)
}

/// Place a fifth body on the axis of a cocircular planar 4-body central
/// configuration so that the five bodies form a central configuration in ℝ³.
///
/// The base is rescaled to `λ/M = 1`; the apex then sits at distance 1 from
/// every base body whatever its mass.
pub fn brehm_pyramid(base: &CentralConfiguration, m5: f64) -> Result<BrehmPyramid> {
    if base.len() != 4 {
        return Err(Error::Shape(format!("pyramid base needs 4 bodies, got {}", base.len())));
    }
    if !(m5 > 0.0 && m5.is_finite()) {
        return Err(Error::InvalidMasses(format!("apex mass {m5} must be positive")));
    }
    let scale = base.normalized_multiplier().cbrt();
    let rescaled = base.config.scaled(scale)?;
    let circle = cocircularity(&rescaled)?;

    // base in the horizontal plane of ℝ³, circle center at the origin
    let q = rescaled.matrix();
    let center = DVector::from_column_slice(&circle.center);
    let shifted = DMatrix::from_fn(q.nrows(), 4, |a, i| q[(a, i)] - center[a]);
    let frame = linalg::orthonormal_span(&shifted, config::DEFAULT_RANK_TOL);
    let local = frame.transpose() * &shifted;

    let height = solve_height(circle.radius)?;
    let mut joint = DMatrix::zeros(3, 5);
    for i in 0..4 {
        joint[(0, i)] = local[(0, i)];
        joint[(1, i)] = local[(1, i)];
    }
    joint[(2, 4)] = height;
    let mut m = base.masses.as_slice().to_vec();
    m.push(m5);
    let masses = MassVector::new(m)?;
    let config = ConfigurationMatrix::new(joint)?;
    let cc = CentralConfiguration::certify(&config, &masses, masses.total(), (100.0 * base.residual).max(1e-9))?;
    let apex_distance = (circle.radius * circle.radius + height * height).sqrt();
    Ok(BrehmPyramid { cc, height, apex_distance, circumradius: circle.radius })
}

#[derive(Debug, Clone, Serialize)]
pub struct FlatProbe {
    /// Dimension 2 together with `rank Ž = 1` for a 5-body configuration.
    pub flat_dziobek: bool,
    pub dimension: usize,
    pub rank_zhat: usize,
    pub singular_values: Vec<f64>,
    pub smallest_nonzero_sv: Option<f64>,
}

/// Detect a planar 5-body central configuration with `rank Ž = 1`.
pub fn flat_dziobek_probe(cc: &CentralConfiguration, tol: f64) -> FlatProbe {
    let w = wintner_conley::shifted_matrix(&cc.config, &cc.masses, cc.lambda);
    let ranks = wintner_conley::rank_report(&w, &cc.config, tol);
    let dimension = cc.dimension();
    FlatProbe {
        flat_dziobek: cc.len() == 5 && dimension == 2 && ranks.rank_zhat == 1,
        dimension,
        rank_zhat: ranks.rank_zhat,
        singular_values: ranks.singular_values.clone(),
        smallest_nonzero_sv: ranks.smallest_nonzero_sv,
    }
}

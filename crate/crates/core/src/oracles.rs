//! Sampling oracles for planar distance sets of Dziobek type.
//!
//! A sample is a vector `δ` with a prescribed sign pattern and a number `z`;
//! it prescribes mutual distances through `r_ij^{-3} = z − δ_i δ_j`. Four
//! such distances embed in the plane only on a codimension-one set of `z`,
//! which is located by root finding on the Cayley–Menger determinant. Five
//! distances need one more condition, located by a scan and bisection in `z`.
//! Every embedding is rebuilt from scratch and checked against all prescribed
//! distances before it is used.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{self, SignPattern};

/// Relative distance error allowed for an accepted embedding.
pub const EMBED_REL_TOL: f64 = 1e-9;
/// Orientation tolerance separating interior/convex cases from boundary ones.
pub const BOUNDARY_TOL: f64 = 1e-9;
/// `δ` magnitudes are drawn log-uniform in `[10^-MAG, 10^MAG]`.
const LOG_MAGNITUDE: f64 = 2.0;
/// Grid in `u` for `z = z_floor + w·10^u` when scanning for planar roots.
const SCAN_U: (f64, f64) = (-12.0, 6.0);
const SCAN_POINTS: usize = 240;

#[derive(Debug, Clone, Serialize)]
pub struct DziobekSample {
    pub delta: Vec<f64>,
    pub z: f64,
}

impl DziobekSample {
    pub fn new(delta: Vec<f64>, z: f64) -> Result<Self> {
        if delta.len() < 2 || delta.iter().any(|d| !d.is_finite()) || z.is_nan() || z <= 0.0 {
            return Err(Error::InvalidSample(format!("need ≥ 2 finite δ and z > 0 (z = {z})")));
        }
        for i in 0..delta.len() {
            for j in (i + 1)..delta.len() {
                if z - delta[i] * delta[j] <= 0.0 {
                    return Err(Error::InvalidSample(format!(
                        "z − δ_{}δ_{} = {:e} is not positive",
                        i + 1,
                        j + 1,
                        z - delta[i] * delta[j]
                    )));
                }
            }
        }
        Ok(Self { delta, z })
    }

    pub fn len(&self) -> usize {
        self.delta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.delta.is_empty()
    }

    /// Distances `r_ij = (z − δ_i δ_j)^{-1/3}`.
    pub fn distances(&self) -> DMatrix<f64> {
        distances(&self.delta, self.z)
    }

    /// `δ → cδ`, `z → c²z`; distances scale by `c^{-2/3}`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        Self::new(self.delta.iter().map(|d| d * c).collect(), self.z * c * c)
    }
}

fn distances(delta: &[f64], z: f64) -> DMatrix<f64> {
    let n = delta.len();
    DMatrix::from_fn(n, n, |i, j| if i == j { 0.0 } else { (z - delta[i] * delta[j]).powf(-1.0 / 3.0) })
}

#[derive(Debug, Clone, Serialize)]
pub struct Embedding {
    pub points: Vec<[f64; 2]>,
    /// Largest relative distance error over all pairs.
    pub max_rel_error: f64,
}

impl Embedding {
    pub fn dist(&self, i: usize, j: usize) -> f64 {
        let (a, b) = (self.points[i], self.points[j]);
        (a[0] - b[0]).hypot(a[1] - b[1])
    }
}

/// Build planar coordinates from a distance matrix: body 1 at the origin,
/// body 2 on the positive x-axis, body 3 in the upper half plane, every later
/// body by intersecting the circles around bodies 1 and 2 and picking the
/// side that best matches its distance to body 3. Returns `None` when a
/// circle intersection is empty or any prescribed distance is missed by more
/// than `EMBED_REL_TOL`.
pub fn embed_distances(r: &DMatrix<f64>) -> Option<Embedding> {
    let n = r.nrows();
    if n < 2 || r.iter().any(|x| !x.is_finite()) {
        return None;
    }
    let d01 = r[(0, 1)];
    let mut pts = vec![[0.0, 0.0], [d01, 0.0]];
    for k in 2..n {
        let (a, b) = (r[(0, k)], r[(1, k)]);
        let x = (a * a - b * b + d01 * d01) / (2.0 * d01);
        let y2 = a * a - x * x;
        if y2 < -EMBED_REL_TOL * a * a {
            return None;
        }
        let y = y2.max(0.0).sqrt();
        let point = if k == 2 {
            [x, y]
        } else {
            let p2 = pts[2];
            let miss = |p: [f64; 2]| ((p[0] - p2[0]).hypot(p[1] - p2[1]) - r[(2, k)]).abs();
            if miss([x, y]) <= miss([x, -y]) { [x, y] } else { [x, -y] }
        };
        pts.push(point);
    }
    let mut emb = Embedding { points: pts, max_rel_error: 0.0 };
    for i in 0..n {
        for j in (i + 1)..n {
            emb.max_rel_error = emb.max_rel_error.max((emb.dist(i, j) - r[(i, j)]).abs() / r[(i, j)]);
        }
    }
    (emb.max_rel_error <= EMBED_REL_TOL).then_some(emb)
}

/// Planar embedding of the distances prescribed by a sample, or `None` if
/// they do not embed in the plane.
pub fn embed_from_dziobek(sample: &DziobekSample) -> Result<Option<Embedding>> {
    let checked = DziobekSample::new(sample.delta.clone(), sample.z)?;
    Ok(embed_distances(&checked.distances()))
}

/// Cayley–Menger determinant of four points from their distances, after
/// normalizing by the largest distance. Positive for a proper tetrahedron,
/// zero for planar sets.
pub fn cayley_menger4(r: &DMatrix<f64>) -> f64 {
    let top = r.amax();
    let mut m = DMatrix::from_element(5, 5, 1.0);
    m[(0, 0)] = 0.0;
    for i in 0..4 {
        for j in 0..4 {
            let d = r[(i, j)] / top;
            m[(i + 1, j + 1)] = d * d;
        }
    }
    m.determinant()
}

fn z_floor(delta: &[f64]) -> f64 {
    let mut floor = 0.0_f64;
    for i in 0..delta.len() {
        for j in (i + 1)..delta.len() {
            floor = floor.max(delta[i] * delta[j]);
        }
    }
    floor
}

/// All `z` (found on a logarithmic scan plus bisection) at which the four
/// prescribed distances are coplanar.
pub fn planar_roots_z(delta: &[f64]) -> Vec<f64> {
    assert_eq!(delta.len(), 4);
    let floor = z_floor(delta);
    let w = delta.iter().fold(0.0_f64, |a, d| a.max(d * d));
    let z_at = |u: f64| floor + w * 10f64.powf(u);
    let d = [delta[0], delta[1], delta[2], delta[3]];
    let f = |u: f64| cm4_delta(d, z_at(u));
    let step = (SCAN_U.1 - SCAN_U.0) / (SCAN_POINTS - 1) as f64;
    let mut roots = Vec::new();
    let mut prev_u = SCAN_U.0;
    let mut prev_f = f(prev_u);
    for k in 1..SCAN_POINTS {
        let u = SCAN_U.0 + step * k as f64;
        let fu = f(u);
        if prev_f == 0.0 {
            roots.push(z_at(prev_u));
        } else if prev_f.signum() != fu.signum() && fu != 0.0 {
            let (mut lo, mut hi, mut flo) = (prev_u, u, prev_f);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                let fm = f(mid);
                if fm == 0.0 {
                    lo = mid;
                    hi = mid;
                    break;
                }
                if fm.signum() == flo.signum() {
                    lo = mid;
                    flo = fm;
                } else {
                    hi = mid;
                }
            }
            roots.push(z_at(0.5 * (lo + hi)));
        }
        prev_u = u;
        prev_f = fu;
    }
    roots
}

/// Validated planar embeddings over all planar roots `z` for `δ`.
pub fn planar_instances(delta: &[f64]) -> Vec<(DziobekSample, Embedding)> {
    planar_roots_z(delta)
        .into_iter()
        .filter_map(|z| {
            let sample = DziobekSample::new(delta.to_vec(), z).ok()?;
            let emb = embed_distances(&sample.distances())?;
            Some((sample, emb))
        })
        .collect()
}

fn stream(seed: u64, k: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(k as u64);
    rng
}

fn magnitude(rng: &mut ChaCha8Rng) -> f64 {
    10f64.powf(rng.random_range(-LOG_MAGNITUDE..LOG_MAGNITUDE))
}

/// `δ` with the given signs and log-uniform magnitudes.
pub fn draw_delta(signs: &[i8], rng: &mut ChaCha8Rng) -> Vec<f64> {
    signs.iter().map(|&s| f64::from(s) * magnitude(rng)).collect()
}

/// Arrangement of four planar points.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum QuadShape {
    /// Convex; the pair of diagonals is given by body indices.
    Convex { diagonals: [(usize, usize); 2] },
    /// Concave with the given body inside the triangle of the others.
    Concave { interior: usize },
    /// Three points collinear within tolerance.
    Boundary,
}

pub fn quad_shape(pts: &[[f64; 2]]) -> QuadShape {
    if geometry::collinear_triple(pts, BOUNDARY_TOL).is_some() {
        return QuadShape::Boundary;
    }
    let hull = geometry::convex_hull(pts);
    if hull.len() == 4 {
        let d = |a: usize, b: usize| (a.min(b), a.max(b));
        let mut diagonals = [d(hull[0], hull[2]), d(hull[1], hull[3])];
        diagonals.sort();
        QuadShape::Convex { diagonals }
    } else {
        let interior = (0..4).find(|i| !hull.contains(i)).unwrap();
        QuadShape::Concave { interior }
    }
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct Companion {
    pub pattern: String,
    pub samples: usize,
    pub feasible: usize,
    /// Feasible instances in the arrangement the main run forbids.
    pub allowed_instances: usize,
    pub violations: usize,
    pub closest_miss: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CaseBounds {
    pub order: String,
    pub count: usize,
    pub max_ratio: f64,
    pub bound: f64,
    pub bound_violations: usize,
    pub angle_violations: usize,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct OracleReport {
    pub oracle: String,
    pub pattern: String,
    pub seed: u64,
    /// `δ` draws (root-finding attempts for the five-point oracle).
    pub samples: usize,
    pub feasible: usize,
    pub counterexamples: usize,
    pub boundary: usize,
    /// Failed per-instance assertions (distance orderings and inequalities).
    pub violations: usize,
    pub companion: Option<Companion>,
    pub cases: Vec<CaseBounds>,
    /// Allowed feasible instances per thousand samples.
    pub non_vacuity_per_1000: f64,
    /// Five-point oracle only: smallest relative miss of the last distance
    /// over all candidate placements, a measure of how close the search came
    /// to a planar root.
    pub closest_miss: Option<f64>,
}

impl OracleReport {
    pub fn passed(&self) -> bool {
        self.counterexamples == 0
            && self.violations == 0
            && self.companion.as_ref().is_none_or(|c| c.violations == 0)
            && self.cases.iter().all(|c| c.bound_violations == 0 && c.angle_violations == 0)
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct Tally {
    feasible: usize,
    hits: usize,
    boundary: usize,
    violations: usize,
}

impl std::ops::Add for Tally {
    type Output = Tally;
    fn add(self, o: Tally) -> Tally {
        Tally {
            feasible: self.feasible + o.feasible,
            hits: self.hits + o.hits,
            boundary: self.boundary + o.boundary,
            violations: self.violations + o.violations,
        }
    }
}

/// Run `classify` on every validated planar instance of `samples` draws.
fn four_point_run<F>(signs: &[i8], samples: usize, seed: u64, classify: F) -> Tally
where
    F: Fn(&DziobekSample, &Embedding) -> Tally + Sync,
{
    (0..samples)
        .into_par_iter()
        .map(|k| {
            let mut rng = stream(seed, k);
            let delta = draw_delta(signs, &mut rng);
            planar_instances(&delta)
                .iter()
                .map(|(s, e)| Tally { feasible: 1, ..classify(s, e) })
                .fold(Tally::default(), |a, b| a + b)
        })
        .reduce(Tally::default, |a, b| a + b)
}

fn rate(instances: usize, samples: usize) -> f64 {
    if samples == 0 { 0.0 } else { 1000.0 * instances as f64 / samples as f64 }
}

const CONVEX_1234: QuadShape = QuadShape::Convex { diagonals: [(0, 2), (1, 3)] };

/// Four points with `δ` signs `++−−` never form a convex quadrilateral in
/// cyclic order 1234. The companion run with `+−+−` must find such quadrilaterals.
pub fn oracle_51(samples: usize, seed: u64) -> OracleReport {
    let convex_1234 = |_: &DziobekSample, e: &Embedding| match quad_shape(&e.points) {
        QuadShape::Boundary => Tally { boundary: 1, ..Default::default() },
        shape if shape == CONVEX_1234 => Tally { hits: 1, ..Default::default() },
        _ => Tally::default(),
    };
    let main = four_point_run(&[1, 1, -1, -1], samples, seed, convex_1234);
    let comp = four_point_run(&[1, -1, 1, -1], samples, seed.wrapping_add(1), convex_1234);
    OracleReport {
        oracle: "5.1".into(),
        pattern: "++--".into(),
        seed,
        samples,
        feasible: main.feasible,
        counterexamples: main.hits,
        boundary: main.boundary,
        violations: 0,
        companion: Some(Companion {
            pattern: "+-+-".into(),
            samples,
            feasible: comp.feasible,
            allowed_instances: comp.hits,
            violations: 0,
            closest_miss: None,
        }),
        cases: Vec::new(),
        non_vacuity_per_1000: rate(comp.hits, samples),
        closest_miss: None,
    }
}

/// Four points with `δ` signs `−+++` never have body 4 inside triangle 123.
/// On every instance the orderings `r_12 < r_24`, `r_13 < r_34` are checked,
/// and the inequality `r_24 + r_34 < r_12 + r_13` (which an interior body 4
/// would force) must never hold. The companion run with `+++−` finds interior
/// instances and checks that the inequality does hold on them.
pub fn oracle_52(samples: usize, seed: u64) -> OracleReport {
    let interior = |e: &Embedding| match quad_shape(&e.points) {
        QuadShape::Boundary => None,
        QuadShape::Concave { interior: 3 } => Some(true),
        _ => Some(false),
    };
    let ellipse = |e: &Embedding| e.dist(1, 3) + e.dist(2, 3) < e.dist(0, 1) + e.dist(0, 2);
    let main = four_point_run(&[-1, 1, 1, 1], samples, seed, |_, e| {
        let ordering_ok = e.dist(0, 1) < e.dist(1, 3) && e.dist(0, 2) < e.dist(2, 3);
        let violations = usize::from(!ordering_ok) + usize::from(ellipse(e));
        match interior(e) {
            None => Tally { boundary: 1, violations, ..Default::default() },
            Some(inside) => Tally { hits: usize::from(inside), violations, ..Default::default() },
        }
    });
    let comp = four_point_run(&[1, 1, 1, -1], samples, seed.wrapping_add(1), |_, e| match interior(e) {
        Some(true) => Tally { hits: 1, violations: usize::from(!ellipse(e)), ..Default::default() },
        _ => Tally::default(),
    });
    OracleReport {
        oracle: "5.2".into(),
        pattern: "-+++".into(),
        seed,
        samples,
        feasible: main.feasible,
        counterexamples: main.hits,
        boundary: main.boundary,
        violations: main.violations,
        companion: Some(Companion {
            pattern: "+++-".into(),
            samples,
            feasible: comp.feasible,
            allowed_instances: comp.hits,
            violations: comp.violations,
            closest_miss: None,
        }),
        cases: Vec::new(),
        non_vacuity_per_1000: rate(comp.hits, samples),
        closest_miss: None,
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct CaseTally {
    count: usize,
    max_ratio: f64,
    bound_violations: usize,
    angle_violations: usize,
}

impl CaseTally {
    fn merge(self, o: CaseTally) -> CaseTally {
        CaseTally {
            count: self.count + o.count,
            max_ratio: self.max_ratio.max(o.max_ratio),
            bound_violations: self.bound_violations + o.bound_violations,
            angle_violations: self.angle_violations + o.angle_violations,
        }
    }
}

/// Sorted positive `δ_1 ≥ δ_2 ≥ δ_3 ≥ δ_4 > 0`: every convex instance has
/// cyclic order 1432 (acute angle 132, `2 r_34 < r_12`) or 1324 (obtuse angle
/// 132, `√3 r_34 ≤ r_12`). Instances in cyclic order 1243 are counterexamples.
pub fn oracle_53(samples: usize, seed: u64) -> OracleReport {
    let per_sample: Vec<(CaseTally, CaseTally, usize, usize, usize)> = (0..samples)
        .into_par_iter()
        .map(|k| {
            let mut rng = stream(seed, k);
            let mut delta = draw_delta(&[1, 1, 1, 1], &mut rng);
            delta.sort_by(|a, b| b.total_cmp(a));
            let (mut c1432, mut c1324, mut other, mut boundary, mut feasible) =
                (CaseTally::default(), CaseTally::default(), 0, 0, 0);
            for (_, e) in planar_instances(&delta) {
                feasible += 1;
                let ratio = e.dist(2, 3) / e.dist(0, 1);
                let p = &e.points;
                let angle_132 = (p[0][0] - p[2][0]) * (p[1][0] - p[2][0]) + (p[0][1] - p[2][1]) * (p[1][1] - p[2][1]);
                match quad_shape(p) {
                    QuadShape::Boundary => boundary += 1,
                    QuadShape::Convex { diagonals: [(0, 2), (1, 3)] } => {
                        c1432 = c1432.merge(CaseTally {
                            count: 1,
                            max_ratio: ratio,
                            bound_violations: usize::from(2.0 * ratio >= 1.0),
                            angle_violations: usize::from(angle_132 <= 0.0),
                        })
                    }
                    QuadShape::Convex { diagonals: [(0, 1), (2, 3)] } => {
                        c1324 = c1324.merge(CaseTally {
                            count: 1,
                            max_ratio: ratio,
                            bound_violations: usize::from(3f64.sqrt() * ratio > 1.0 + 1e-12),
                            angle_violations: usize::from(angle_132 >= 0.0),
                        })
                    }
                    QuadShape::Convex { .. } => other += 1,
                    QuadShape::Concave { .. } => {}
                }
            }
            (c1432, c1324, other, boundary, feasible)
        })
        .collect();
    let (mut c1432, mut c1324, mut other, mut boundary, mut feasible) =
        (CaseTally::default(), CaseTally::default(), 0, 0, 0);
    for (a, b, o, bd, f) in per_sample {
        c1432 = c1432.merge(a);
        c1324 = c1324.merge(b);
        other += o;
        boundary += bd;
        feasible += f;
    }
    let case = |order: &str, t: CaseTally, bound: f64| CaseBounds {
        order: order.into(),
        count: t.count,
        max_ratio: t.max_ratio,
        bound,
        bound_violations: t.bound_violations,
        angle_violations: t.angle_violations,
    };
    OracleReport {
        oracle: "5.3".into(),
        pattern: "++++".into(),
        seed,
        samples,
        feasible,
        counterexamples: other,
        boundary,
        violations: 0,
        companion: None,
        cases: vec![case("1432", c1432, 0.5), case("1324", c1324, 1.0 / 3f64.sqrt())],
        non_vacuity_per_1000: rate(c1432.count + c1324.count, samples),
        closest_miss: None,
    }
}

/// Admissible values for one of the two bodies added to a fixed triple:
/// a sign and a magnitude range.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Branch {
    pub sign: f64,
    pub lo: f64,
    pub hi: f64,
}

const LEVEL_POINTS: usize = 120;
const Z_SCAN_U: (f64, f64) = (-10.0, 5.0);
const Z_POINTS: usize = 150;
const BISECTIONS: usize = 64;

/// Cayley–Menger determinant for the four distances `(z − δ_iδ_j)^{-1/3}`,
/// normalized by the largest distance. `NaN` if some distance is undefined.
fn cm4_delta(delta: [f64; 4], z: f64) -> f64 {
    let mut r = [[0.0; 4]; 4];
    let mut top = 0.0_f64;
    for i in 0..4 {
        for j in (i + 1)..4 {
            let s = z - delta[i] * delta[j];
            if s <= 0.0 {
                return f64::NAN;
            }
            r[i][j] = s.powf(-1.0 / 3.0);
            r[j][i] = r[i][j];
            top = top.max(r[i][j]);
        }
    }
    let mut m = nalgebra::Matrix5::from_element(1.0);
    m[(0, 0)] = 0.0;
    for i in 0..4 {
        for j in 0..4 {
            let d = r[i][j] / top;
            m[(i + 1, j + 1)] = d * d;
        }
    }
    m.determinant()
}

/// Bisection on a bracket `[lo, hi]` with `f(lo)` of sign `flo`.
fn bisect<F: FnMut(f64) -> Option<f64>>(mut lo: f64, mut hi: f64, flo: f64, mut f: F) -> Option<f64> {
    for _ in 0..BISECTIONS {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid)?;
        if fm == 0.0 {
            return Some(mid);
        }
        if fm.signum() == flo.signum() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some(0.5 * (lo + hi))
}

/// Values `δ` on the branch for which a fourth body with `δ` is coplanar with
/// the triple at this `z`, in increasing magnitude.
fn level_set(d: &[f64; 3], z: f64, b: Branch) -> Vec<f64> {
    let same: f64 = d.iter().filter(|x| x.signum() == b.sign).fold(0.0, |a, x| a.max(x.abs()));
    let hi = if same > 0.0 { b.hi.min(z / same * (1.0 - 1e-12)) } else { b.hi };
    if hi <= b.lo {
        return Vec::new();
    }
    let (t0, t1) = (b.lo.ln(), hi.ln());
    let f = |t: f64| {
        let v = cm4_delta([d[0], d[1], d[2], b.sign * t.exp()], z);
        v.is_finite().then_some(v)
    };
    let step = (t1 - t0) / (LEVEL_POINTS - 1) as f64;
    let mut out = Vec::new();
    let mut prev: Option<(f64, f64)> = None;
    for k in 0..LEVEL_POINTS {
        let t = t0 + step * k as f64;
        let cur = f(t).map(|v| (t, v));
        if let (Some((tp, fp)), Some((_, fc))) = (prev, cur) {
            if fp.signum() != fc.signum() {
                if let Some(root) = bisect(tp, t, fp, f) {
                    out.push(b.sign * root.exp());
                }
            }
        }
        prev = cur;
    }
    out
}

/// Planar position of a body at distances `a`, `b`, `c` from the first three
/// placed points (first two on the x-axis), or `None` if the circles around
/// the first two miss each other.
fn place(pts: &[[f64; 2]; 3], a: f64, b: f64, c: f64) -> Option<[f64; 2]> {
    let d01 = pts[1][0];
    let x = (a * a - b * b + d01 * d01) / (2.0 * d01);
    let y2 = a * a - x * x;
    if y2 < 0.0 {
        return None;
    }
    let y = y2.sqrt();
    let miss = |p: [f64; 2]| ((p[0] - pts[2][0]).hypot(p[1] - pts[2][1]) - c).abs();
    Some(if miss([x, y]) <= miss([x, -y]) { [x, y] } else { [x, -y] })
}

/// Relative miss of the 4–5 distance when bodies 4 and 5 are placed from
/// their distances to the triple.
fn pair_residual(d: &[f64; 3], z: f64, a: f64, b: f64) -> Option<f64> {
    let r = |x: f64, y: f64| {
        let s = z - x * y;
        (s > 0.0).then(|| s.powf(-1.0 / 3.0))
    };
    let (r01, r02, r12) = (r(d[0], d[1])?, r(d[0], d[2])?, r(d[1], d[2])?);
    let x = (r02 * r02 - r12 * r12 + r01 * r01) / (2.0 * r01);
    let y2 = r02 * r02 - x * x;
    if y2 < 0.0 {
        return None;
    }
    let tri = [[0.0, 0.0], [r01, 0.0], [x, y2.sqrt()]];
    let p4 = place(&tri, r(d[0], a)?, r(d[1], a)?, r(d[2], a)?)?;
    let p5 = place(&tri, r(d[0], b)?, r(d[1], b)?, r(d[2], b)?)?;
    Some(((p4[0] - p5[0]).hypot(p4[1] - p5[1]) - r(a, b)?) / r01)
}

/// Candidate pairs `(δ_4, δ_5)` at one `z`: every level value on the first
/// branch against every one on the second, unordered when the branches agree.
fn level_pairs(d: &[f64; 3], z: f64, b4: Branch, b5: Branch) -> (usize, usize, Vec<(f64, f64)>) {
    let l4 = level_set(d, z, b4);
    let l5 = if b4 == b5 { l4.clone() } else { level_set(d, z, b5) };
    let mut pairs = Vec::new();
    for (i, &a) in l4.iter().enumerate() {
        for (j, &b) in l5.iter().enumerate() {
            if b4 != b5 || i < j {
                pairs.push((a, b));
            }
        }
    }
    (l4.len(), l5.len(), pairs)
}

/// Outcome of a five-point search over one triple.
#[derive(Debug, Clone, Default)]
pub struct FiveSearch {
    pub roots: Vec<(DziobekSample, Embedding)>,
    /// Smallest relative 4–5 distance miss seen on the scan (`∞` if no
    /// candidate pair was ever formed).
    pub closest_miss: f64,
}

/// Planar five-point Dziobek distance sets extending the triple `d` with one
/// body on each branch. The parameter is `z`: for each `z` the coplanarity of
/// 1234 and of 1235 fixes `δ_4` and `δ_5` on their branches, and the roots of
/// the remaining 4–5 distance miss are bracketed on a scan and bisected.
pub fn five_point_search(d: [f64; 3], b4: Branch, b5: Branch) -> FiveSearch {
    let floor = z_floor(&d).max(0.0);
    let w = d.iter().fold(0.0_f64, |a, x| a.max(x * x));
    let z_at = |u: f64| floor + w * 10f64.powf(u);
    let residuals = |u: f64| {
        let z = z_at(u);
        let (n4, n5, pairs) = level_pairs(&d, z, b4, b5);
        let e: Vec<Option<f64>> = pairs.iter().map(|&(a, b)| pair_residual(&d, z, a, b)).collect();
        (n4, n5, e)
    };
    let step = (Z_SCAN_U.1 - Z_SCAN_U.0) / (Z_POINTS - 1) as f64;
    let mut out = FiveSearch { roots: Vec::new(), closest_miss: f64::INFINITY };
    let mut prev = residuals(Z_SCAN_U.0);
    for k in 1..Z_POINTS {
        let (u0, u1) = (Z_SCAN_U.0 + step * (k - 1) as f64, Z_SCAN_U.0 + step * k as f64);
        let cur = residuals(u1);
        for e in cur.2.iter().flatten() {
            out.closest_miss = out.closest_miss.min(e.abs());
        }
        if (prev.0, prev.1) == (cur.0, cur.1) {
            for (idx, (ep, ec)) in prev.2.iter().zip(&cur.2).enumerate() {
                let (Some(ep), Some(ec)) = (*ep, *ec) else { continue };
                if ep.signum() == ec.signum() {
                    continue;
                }
                let shape = (prev.0, prev.1);
                let f = |u: f64| {
                    let (n4, n5, e) = residuals(u);
                    if (n4, n5) == shape { e[idx] } else { None }
                };
                let Some(u) = bisect(u0, u1, ep, f) else { continue };
                let z = z_at(u);
                let (_, _, pairs) = level_pairs(&d, z, b4, b5);
                let Some(&(a, b)) = pairs.get(idx) else { continue };
                let Ok(sample) = DziobekSample::new(vec![d[0], d[1], d[2], a, b], z) else { continue };
                if let Some(emb) = embed_distances(&sample.distances()) {
                    out.closest_miss = 0.0;
                    out.roots.push((sample, emb));
                }
            }
        }
        prev = cur;
    }
    out
}

#[derive(Debug, Clone, Copy, Default)]
struct FiveTally {
    roots: usize,
    counterexamples: usize,
    boundary: usize,
    violations: usize,
    closest_miss: Option<f64>,
}

impl std::ops::Add for FiveTally {
    type Output = FiveTally;
    fn add(self, o: FiveTally) -> FiveTally {
        FiveTally {
            roots: self.roots + o.roots,
            counterexamples: self.counterexamples + o.counterexamples,
            boundary: self.boundary + o.boundary,
            violations: self.violations + o.violations,
            closest_miss: match (self.closest_miss, o.closest_miss) {
                (Some(a), Some(b)) => Some(a.min(b)),
                (a, b) => a.or(b),
            },
        }
    }
}

/// The distance chain for `δ_5 < 0 < δ_4 ≤ δ_3 ≤ δ_2 ≤ δ_1` (0-based indices).
pub fn five_point_chain_holds(e: &Embedding) -> bool {
    let r = |i: usize, j: usize| e.dist(i, j);
    let slack = 1.0 + 1e-9;
    let le = |a: f64, b: f64| a <= b * slack;
    le(r(0, 4).max(r(0, 1) / 2.0), r(1, 4))
        && le(r(1, 4), r(2, 4))
        && le(r(2, 4), r(3, 4))
        && r(3, 4) < r(2, 3) * slack
        && le(r(2, 3), r(1, 3))
        && le(r(1, 3), r(0, 3).min(r(1, 2)))
        && le(r(0, 3).max(r(1, 2)), r(0, 2))
        && le(r(0, 2), r(0, 1))
}

/// Body 5 strictly inside the convex quadrilateral formed by bodies 1–4.
fn fifth_inside_convex_quad(e: &Embedding) -> bool {
    let quad: Vec<[f64; 2]> = e.points[..4].to_vec();
    let hull = geometry::convex_hull(&quad);
    hull.len() == 4 && {
        let poly: Vec<[f64; 2]> = hull.iter().map(|&i| quad[i]).collect();
        geometry::strictly_inside(e.points[4], &poly, BOUNDARY_TOL)
    }
}

fn sorted_triple(rng: &mut ChaCha8Rng) -> [f64; 3] {
    let mut d = [magnitude(rng), magnitude(rng), magnitude(rng)];
    d.sort_by(|a, b| b.total_cmp(a));
    d
}

/// Width of the magnitude ranges searched on each branch, in decades.
const BRANCH_DECADES: f64 = 8.0;

fn five_point_run<F>(samples: usize, seed: u64, branches: fn(&[f64; 3]) -> (Branch, Branch), classify: F) -> FiveTally
where
    F: Fn(&Embedding) -> FiveTally + Sync,
{
    (0..samples)
        .into_par_iter()
        .map(|k| {
            let mut rng = stream(seed, k);
            let d = sorted_triple(&mut rng);
            let (b4, b5) = branches(&d);
            let search = five_point_search(d, b4, b5);
            let start = FiveTally { closest_miss: search.closest_miss.is_finite().then_some(search.closest_miss), ..Default::default() };
            search.roots.iter().map(|(_, e)| FiveTally { roots: 1, ..classify(e) }).fold(start, |a, b| a + b)
        })
        .reduce(FiveTally::default, |a, b| a + b)
}

fn main_branches(d: &[f64; 3]) -> (Branch, Branch) {
    let span = 10f64.powf(BRANCH_DECADES);
    (Branch { sign: 1.0, lo: d[2] / span, hi: d[2] }, Branch { sign: -1.0, lo: d[2] / span, hi: d[0] * span })
}

fn companion_branches(d: &[f64; 3]) -> (Branch, Branch) {
    let span = 10f64.powf(BRANCH_DECADES);
    let b = Branch { sign: 1.0, lo: d[2] / span, hi: d[0] * span };
    (b, b)
}

/// Five planar points with `δ` signs `++++−` never form a convex quadrilateral
/// 1234 with body 5 inside. Each sample draws `δ_1 ≥ δ_2 ≥ δ_3 > 0` and finds
/// every planar root with `δ_4 ∈ (0, δ_3]` and `δ_5 < 0`; the distance chain
/// is asserted on each root. The companion searches all-positive extensions
/// of the same triples with the same finder; its root count and closest miss
/// show whether the finder reaches planar roots at all.
pub fn oracle_54(samples: usize, seed: u64) -> OracleReport {
    let main = five_point_run(samples, seed, main_branches, |e| {
        if geometry::collinear_triple(&e.points, BOUNDARY_TOL).is_some() {
            FiveTally { boundary: 1, ..Default::default() }
        } else {
            FiveTally {
                counterexamples: usize::from(fifth_inside_convex_quad(e)),
                violations: usize::from(!five_point_chain_holds(e)),
                ..Default::default()
            }
        }
    });
    let comp = five_point_run(samples, seed, companion_branches, |_| FiveTally::default());
    OracleReport {
        oracle: "5.4".into(),
        pattern: "++++-".into(),
        seed,
        samples,
        feasible: main.roots,
        counterexamples: main.counterexamples,
        boundary: main.boundary,
        violations: main.violations,
        companion: Some(Companion {
            pattern: "+++++".into(),
            samples,
            feasible: comp.roots,
            allowed_instances: comp.roots,
            violations: 0,
            closest_miss: comp.closest_miss,
        }),
        cases: Vec::new(),
        non_vacuity_per_1000: rate(comp.roots, samples),
        closest_miss: main.closest_miss,
    }
}

/// Dispatch by name (`5.1` … `5.4`, with or without the leading `oracle_`).
pub fn run_oracle(name: &str, samples: usize, seed: u64) -> Result<OracleReport> {
    match name.trim_start_matches("oracle_").replace('_', ".").as_str() {
        "5.1" | "51" => Ok(oracle_51(samples, seed)),
        "5.2" | "52" => Ok(oracle_52(samples, seed)),
        "5.3" | "53" => Ok(oracle_53(samples, seed)),
        "5.4" | "54" => Ok(oracle_54(samples, seed)),
        _ => Err(Error::UnknownOracle(name.to_string())),
    }
}

/// Sign pattern of `δ` for a sample, as used in reports.
pub fn sample_pattern(sample: &DziobekSample) -> SignPattern {
    SignPattern::of(&sample.delta, 0.0)
}

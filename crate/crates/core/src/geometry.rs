//! Planar sign geometry of homogeneous barycentric coordinates.
//!
//! For five points in the plane the vectors `Δ ∈ ℝ⁵` with `ΣΔ_i = 0` and
//! `ΣΔ_i q_i = 0` form a plane `Π`. The lines `Δ_i = 0` cut `Π` into sectors;
//! a half-turn sweep lists the sign patterns met on the way.

use std::f64::consts::PI;
use std::fmt;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::config::{self, ConfigurationMatrix};
use crate::error::{Error, Result};
use crate::linalg;

/// Angular tolerance for coinciding zero lines in `Π`.
pub const LINE_COINCIDENCE_TOL: f64 = 1e-9;
/// Relative tolerance below which three points count as collinear.
pub const COLLINEAR_TOL: f64 = 1e-9;

/// Signs in `{-1, 0, +1}`, one per body.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
#[serde(into = "String")]
pub struct SignPattern(pub Vec<i8>);

impl SignPattern {
    pub fn parse(s: &str) -> Result<Self> {
        s.chars()
            .map(|c| match c {
                '+' => Ok(1),
                '-' | '−' => Ok(-1),
                '0' => Ok(0),
                _ => Err(Error::Parse(format!("bad sign character `{c}` in `{s}`"))),
            })
            .collect::<Result<Vec<i8>>>()
            .map(SignPattern)
    }

    pub fn of(values: &[f64], zero_tol: f64) -> Self {
        SignPattern(
            values
                .iter()
                .map(|&v| if v.abs() <= zero_tol { 0 } else if v > 0.0 { 1 } else { -1 })
                .collect(),
        )
    }

    pub fn negated(&self) -> Self {
        SignPattern(self.0.iter().map(|s| -s).collect())
    }

    pub fn zeros(&self) -> usize {
        self.0.iter().filter(|&&s| s == 0).count()
    }

    /// Same pattern up to a global sign.
    pub fn equivalent(&self, other: &Self) -> bool {
        self == other || *self == other.negated()
    }
}

impl fmt::Display for SignPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.0 {
            f.write_str(match s {
                1 => "+",
                -1 => "-",
                _ => "0",
            })?;
        }
        Ok(())
    }
}

impl From<SignPattern> for String {
    fn from(p: SignPattern) -> String {
        p.to_string()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SignTable {
    pub name: &'static str,
    pub rows: Vec<SignPattern>,
}

const TABLES: [(&str, [&str; 11]); 3] = [
    ("A1", ["0+-+-", "++-+-", "+0-+-", "+--+-", "+-0+-", "+-++-", "+-+0-", "+-+--", "+-+-0", "+-+-+", "0-+-+"]),
    ("A2", ["0+-+-", "++-+-", "+0-+-", "+--+-", "+-0+-", "+-++-", "+-++0", "+-+++", "+-+0+", "+-+-+", "0-+-+"]),
    ("A3", ["0+-+-", "++-+-", "++0+-", "++++-", "+0++-", "+-++-", "+-++0", "+-+++", "+-+0+", "+-+-+", "0-+-+"]),
];

const DOUBLE_ZERO_TABLES: [(&str, [&str; 9]); 2] = [
    ("B1", ["0+-+-", "++-+-", "+0-+-", "+--+-", "+-0+-", "+-++-", "+-+00", "+-+-+", "0-+-+"]),
    ("B2", ["0+-+-", "++-+-", "+00+-", "+-++-", "+-++0", "+-+++", "+-+0+", "+-+-+", "0-+-+"]),
];

/// Reference sweep tables: A1–A3 for generic configurations (convex pentagon,
/// quadrilateral with one point inside, triangle with two inside) and B1–B2
/// for configurations where two zero lines coincide.
pub fn table_catalog() -> Vec<SignTable> {
    let parse = |rows: &[&str]| rows.iter().map(|r| SignPattern::parse(r).expect("catalog rows are valid")).collect();
    TABLES
        .iter()
        .map(|(name, rows)| SignTable { name, rows: parse(rows) })
        .chain(DOUBLE_ZERO_TABLES.iter().map(|(name, rows)| SignTable { name, rows: parse(rows) }))
        .collect()
}

/// One configuration per catalog table whose sweep reproduces it.
///
/// A1: regular pentagon. A2: body 2 pushed inside the chord 13. A3: hull
/// triangle 134 with 2 and 5 inside and 2345 convex. B1: bodies 1, 2, 3
/// collinear in that order. B2: the A2 shape with body 5 on the side 14.
pub fn table_representatives() -> Vec<(&'static str, ConfigurationMatrix)> {
    let pentagon: Vec<[f64; 2]> = (0..5)
        .map(|k| {
            let t = 2.0 * PI * k as f64 / 5.0;
            [t.cos(), t.sin()]
        })
        .collect();
    let mid = |a: [f64; 2], b: [f64; 2]| [(a[0] + b[0]) / 2.0, (a[1] + b[1]) / 2.0];
    let t = 2.0 * PI / 5.0;
    let mut a2 = pentagon.clone();
    a2[1] = [0.25 * t.cos(), 0.25 * t.sin()];
    let a3 = vec![[0.0, 3.0], [-0.8, 0.3], [-3.0, -2.0], [3.0, -2.0], [0.8, 0.3]];
    let mut b1 = pentagon.clone();
    b1[1] = mid(pentagon[0], pentagon[2]);
    let mut b2 = a2.clone();
    b2[4] = mid(pentagon[0], pentagon[3]);
    [("A1", pentagon), ("A2", a2), ("A3", a3), ("B1", b1), ("B2", b2)]
        .into_iter()
        .map(|(name, pts)| {
            let rows: Vec<Vec<f64>> = pts.iter().map(|p| p.to_vec()).collect();
            (name, ConfigurationMatrix::from_positions(&rows).expect("representatives have no collisions"))
        })
        .collect()
}

/// Planar coordinates of a configuration of dimension at most 2.
pub fn planar_coordinates(config: &ConfigurationMatrix) -> Result<Vec<[f64; 2]>> {
    let q = config.matrix();
    match q.nrows() {
        1 => return Ok((0..config.len()).map(|i| [q[(0, i)], 0.0]).collect()),
        2 => return Ok((0..config.len()).map(|i| [q[(0, i)], q[(1, i)]]).collect()),
        _ => {}
    }
    let dim = config::configuration_dimension(config, config::DEFAULT_RANK_TOL);
    if dim > 2 {
        return Err(Error::Shape(format!("configuration has dimension {dim}, expected a planar one")));
    }
    let origin = config.position(0);
    let shifted = DMatrix::from_fn(q.nrows(), q.ncols(), |a, i| q[(a, i)] - origin[a]);
    let frame = linalg::orthonormal_span(&shifted, config::DEFAULT_RANK_TOL);
    let local = frame.transpose() * &shifted;
    Ok((0..config.len())
        .map(|i| {
            let x = if local.nrows() > 0 { local[(0, i)] } else { 0.0 };
            let y = if local.nrows() > 1 { local[(1, i)] } else { 0.0 };
            [x, y]
        })
        .collect())
}

pub fn orient(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> f64 {
    (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
}

fn dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

/// Signed orientation of `abc` normalized by the squared longest side.
pub fn relative_orient(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> f64 {
    let scale = dist(a, b).max(dist(b, c)).max(dist(a, c));
    orient(a, b, c) / (scale * scale)
}

/// First collinear triple among the points, if any.
pub fn collinear_triple(pts: &[[f64; 2]], tol: f64) -> Option<(usize, usize, usize)> {
    let n = pts.len();
    for i in 0..n {
        for j in (i + 1)..n {
            for k in (j + 1)..n {
                if relative_orient(pts[i], pts[j], pts[k]).abs() <= tol {
                    return Some((i, j, k));
                }
            }
        }
    }
    None
}

/// Indices of the strict convex hull in counterclockwise order; points on
/// hull edges are left out.
pub fn convex_hull(pts: &[[f64; 2]]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..pts.len()).collect();
    idx.sort_by(|&a, &b| pts[a][0].total_cmp(&pts[b][0]).then(pts[a][1].total_cmp(&pts[b][1])));
    if idx.len() < 3 {
        return idx;
    }
    let mut hull: Vec<usize> = Vec::with_capacity(2 * idx.len());
    for pass in 0..2 {
        let start = hull.len();
        let iter: Box<dyn Iterator<Item = &usize>> =
            if pass == 0 { Box::new(idx.iter()) } else { Box::new(idx.iter().rev()) };
        for &p in iter {
            while hull.len() >= start + 2
                && orient(pts[hull[hull.len() - 2]], pts[hull[hull.len() - 1]], pts[p]) <= 0.0
            {
                hull.pop();
            }
            hull.push(p);
        }
        hull.pop();
    }
    hull
}

/// Whether `p` lies strictly inside the convex polygon `poly` (counterclockwise),
/// with a relative margin `tol`.
pub fn strictly_inside(p: [f64; 2], poly: &[[f64; 2]], tol: f64) -> bool {
    (0..poly.len()).all(|k| relative_orient(poly[k], poly[(k + 1) % poly.len()], p) > tol)
}

/// The affine dependencies of five planar points: an orthonormal basis of `Π`.
fn dependency_plane(pts: &[[f64; 2]]) -> Result<DMatrix<f64>> {
    let n = pts.len();
    let scale = pts.iter().fold(0.0_f64, |a, p| a.max(p[0].abs()).max(p[1].abs())).max(f64::MIN_POSITIVE);
    let a = DMatrix::from_fn(3, n, |r, i| match r {
        0 => 1.0,
        1 => pts[i][0] / scale,
        _ => pts[i][1] / scale,
    });
    let (vals, vecs) = linalg::sym_eigen_sorted(&(a.transpose() * &a));
    let top = vals[n - 1];
    let kernel: Vec<usize> = (0..n).filter(|&k| vals[k] <= 1e-12 * top).collect();
    if kernel.len() != n - 3 {
        return Err(Error::DegeneratePlane(kernel.len()));
    }
    Ok(DMatrix::from_columns(&kernel.iter().map(|&k| vecs.column(k).into_owned()).collect::<Vec<_>>()))
}

#[derive(Debug, Clone, Serialize)]
pub struct SignSweep {
    pub positions: Vec<[f64; 2]>,
    /// Orthonormal basis of `Π` as two vectors in ℝ⁵.
    pub basis: [Vec<f64>; 2],
    /// Zero-line angles of each body in `Π`, measured from the start of the sweep.
    pub crossings: Vec<f64>,
    pub rows: Vec<SignPattern>,
}

impl SignSweep {
    pub fn render(&self) -> String {
        self.rows.iter().map(|r| format!("{r}\n")).collect()
    }

    /// Name of the catalog table reproduced row for row, if any.
    pub fn matching_table(&self) -> Option<&'static str> {
        table_catalog().into_iter().find(|t| t.rows == self.rows).map(|t| t.name)
    }
}

/// Sweep the plane of barycentric coordinates of five planar points.
///
/// The sweep starts on the zero line of body 1, with the overall sign chosen
/// so that the first nonzero entry is positive and the direction chosen so
/// that `Δ_1` turns positive; it ends half a turn later on the negated row.
pub fn sign_sweep(config: &ConfigurationMatrix) -> Result<SignSweep> {
    if config.len() != 5 {
        return Err(Error::Shape(format!("sign sweep needs 5 bodies, got {}", config.len())));
    }
    let pts = planar_coordinates(config)?;
    let basis = dependency_plane(&pts)?;
    let (e1, e2) = (basis.column(0).into_owned(), basis.column(1).into_owned());
    let n = 5;

    // Δ(θ) = cos θ e1 + sin θ e2 vanishes in coordinate i at θ_i ∈ [0, π)
    let mut theta = vec![0.0; n];
    for i in 0..n {
        if e1[i].hypot(e2[i]) <= 1e-10 {
            return Err(Error::VanishingLine(i));
        }
        theta[i] = (-e1[i]).atan2(e2[i]).rem_euclid(PI);
    }
    let at = |t: f64| -> DVector<f64> { &e1 * t.cos() + &e2 * t.sin() };
    let v0 = at(theta[0]);
    let top = v0.amax();
    let first = v0.iter().copied().find(|v| v.abs() > 1e-9 * top).unwrap_or(1.0);
    let sigma = first.signum();
    let w = &e2 * theta[0].cos() - &e1 * theta[0].sin();
    let s = (sigma * w[0]).signum();

    // sweep parameter t ∈ [0, π): Δ = σ·Δ(θ_1 + s t)
    let mut offsets: Vec<(f64, usize)> = (0..n)
        .map(|i| {
            let mut t = (s * (theta[i] - theta[0])).rem_euclid(PI);
            if PI - t <= LINE_COINCIDENCE_TOL {
                t = 0.0;
            }
            (t, i)
        })
        .collect();
    offsets.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut groups: Vec<(f64, Vec<usize>)> = Vec::new();
    for (t, i) in offsets {
        match groups.last_mut() {
            Some((t0, members)) if t - *t0 <= LINE_COINCIDENCE_TOL => members.push(i),
            _ => groups.push((t, vec![i])),
        }
    }
    if let Some((_, members)) = groups.iter().find(|(_, m)| m.len() >= 3) {
        return Err(Error::TripleCoincidence(members.clone()));
    }

    let pattern_at = |t: f64, zeros: &[usize]| -> SignPattern {
        let v = at(theta[0] + s * t) * sigma;
        SignPattern((0..n).map(|i| if zeros.contains(&i) { 0 } else { v[i].signum() as i8 }).collect())
    };
    let mut rows = Vec::new();
    for (g, (t, members)) in groups.iter().enumerate() {
        rows.push(pattern_at(*t, members));
        let next = groups.get(g + 1).map_or(PI, |x| x.0);
        rows.push(pattern_at(0.5 * (t + next), &[]));
    }
    rows.push(rows[0].negated());

    let mut crossings = vec![0.0; n];
    for (t, members) in &groups {
        for &i in members {
            crossings[i] = *t;
        }
    }
    Ok(SignSweep {
        positions: pts,
        basis: [e1.iter().copied().collect(), e2.iter().copied().collect()],
        crossings,
        rows,
    })
}

/// Sweep every relabeling of the bodies and return the first catalog table
/// reproduced, with the permutation used (`perm[k]` is the original index of
/// the body relabeled `k`).
pub fn match_up_to_relabeling(config: &ConfigurationMatrix) -> Result<Option<(&'static str, Vec<usize>)>> {
    let catalog = table_catalog();
    for perm in permutations(config.len()) {
        let q = config.matrix();
        let permuted = ConfigurationMatrix::new(DMatrix::from_fn(q.nrows(), q.ncols(), |a, k| q[(a, perm[k])]))?;
        let sweep = sign_sweep(&permuted)?;
        if let Some(t) = catalog.iter().find(|t| t.rows == sweep.rows) {
            return Ok(Some((t.name, perm)));
        }
    }
    Ok(None)
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            out.push(q);
        }
    }
    out.sort();
    out
}

/// Whether a sign pattern on four planar points agrees with their shape:
/// signs alternate around a convex quadrilateral, and for a concave one the
/// three hull vertices share a sign opposite to the interior point's.
pub fn sign_consistency_check(quad: &ConfigurationMatrix, signs: &[i8]) -> Result<bool> {
    if quad.len() != 4 || signs.len() != 4 {
        return Err(Error::Shape("sign consistency needs 4 bodies and 4 signs".into()));
    }
    let pts = planar_coordinates(quad)?;
    if let Some((i, j, k)) = collinear_triple(&pts, COLLINEAR_TOL) {
        return Err(Error::CollinearTriple(i, j, k));
    }
    if signs.contains(&0) {
        return Ok(false);
    }
    let hull = convex_hull(&pts);
    Ok(match hull.len() {
        4 => (0..4).all(|k| signs[hull[k]] != signs[hull[(k + 1) % 4]]),
        3 => {
            let inner = (0..4).find(|i| !hull.contains(i)).unwrap();
            hull.iter().all(|&h| signs[h] == signs[hull[0]]) && signs[inner] != signs[hull[0]]
        }
        _ => false,
    })
}

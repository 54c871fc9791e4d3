//! Hessian of the amended force function and its vertical spectrum.
//!
//! Vectors `u = (u_1, …, u_n) ∈ (ℝ^p)^n` are stored as `p × n` matrices and
//! flattened body-major: entry `(a, i)` goes to index `i·p + a`.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::config::{self, CentralConfiguration, ConfigurationMatrix, MassVector};
use crate::error::{Error, Result};
use crate::linalg;
use crate::wintner_conley::{self, ShiftedWCMatrix};

/// Eigenvalues within this fraction of `‖Ž‖∞` count as zero.
pub const ZERO_BAND_REL: f64 = 1e-8;
/// Eigenvalues beyond the zero band but within this fraction are flagged ambiguous.
pub const AMBIGUOUS_BAND_REL: f64 = 1e-6;
/// Trivial kernels whose conditioning falls below this are reported, not classified.
pub const CONDITIONING_TOL: f64 = 1e-6;

pub fn flatten(u: &DMatrix<f64>) -> DVector<f64> {
    let (p, n) = u.shape();
    DVector::from_fn(p * n, |k, _| u[(k % p, k / p)])
}

pub fn unflatten(v: &DVector<f64>, p: usize) -> DMatrix<f64> {
    let n = v.len() / p;
    DMatrix::from_fn(p, n, |a, i| v[i * p + a])
}

/// The Hessian bilinear form `Σ_i m_i ⟨g_i, v_i⟩` as a dense symmetric matrix.
#[derive(Debug, Clone)]
pub struct HessianForm {
    matrix: DMatrix<f64>,
    config: ConfigurationMatrix,
    masses: MassVector,
    lambda: f64,
}

pub fn hessian(config: &ConfigurationMatrix, masses: &MassVector, lambda: f64) -> HessianForm {
    assert_eq!(config.len(), masses.len());
    let q = config.matrix();
    let (p, n) = q.shape();
    let r = config::mutual_distances(config);
    let z = lambda / masses.total();
    let mut h = DMatrix::zeros(p * n, p * n);
    for i in 0..n {
        for j in (i + 1)..n {
            let mm = masses[i] * masses[j];
            let s_check = r[(i, j)].powi(-3) - z;
            let c5 = 3.0 * r[(i, j)].powi(-5);
            let d: Vec<f64> = (0..p).map(|a| q[(a, i)] - q[(a, j)]).collect();
            for a in 0..p {
                for b in 0..p {
                    // off-diagonal block: m_i m_j (Š δ_ab − 3 r^{-5} d_a d_b)
                    let delta = if a == b { s_check } else { 0.0 };
                    let off = mm * (delta - c5 * d[a] * d[b]);
                    h[(i * p + a, j * p + b)] += off;
                    h[(j * p + a, i * p + b)] += off;
                    h[(i * p + a, i * p + b)] -= off;
                    h[(j * p + a, j * p + b)] -= off;
                }
            }
        }
    }
    HessianForm { matrix: h, config: config.clone(), masses: masses.clone(), lambda }
}

impl HessianForm {
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn config(&self) -> &ConfigurationMatrix {
        &self.config
    }

    pub fn masses(&self) -> &MassVector {
        &self.masses
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn dim(&self) -> usize {
        self.config.dim()
    }

    /// `⟨H u, v⟩`.
    pub fn bilinear(&self, u: &DMatrix<f64>, v: &DMatrix<f64>) -> f64 {
        flatten(v).dot(&(&self.matrix * flatten(u)))
    }

    pub fn apply(&self, u: &DMatrix<f64>) -> DMatrix<f64> {
        unflatten(&(&self.matrix * flatten(u)), self.dim())
    }

    /// The `n × n` block `e_uᵀ H_ij e_v` for directions `e_u`, `e_v` in ℝ^p.
    pub fn block(&self, e_u: &DVector<f64>, e_v: &DVector<f64>) -> DMatrix<f64> {
        let p = self.dim();
        let n = self.config.len();
        DMatrix::from_fn(n, n, |i, j| {
            let mut acc = 0.0;
            for a in 0..p {
                for b in 0..p {
                    acc += e_u[a] * self.matrix[(i * p + a, j * p + b)] * e_v[b];
                }
            }
            acc
        })
    }

    /// Spectral norm, as the largest absolute eigenvalue.
    pub fn spectral_norm(&self) -> f64 {
        let (vals, _) = linalg::sym_eigen_sorted(&self.matrix);
        vals.iter().fold(0.0_f64, |a, v| a.max(v.abs()))
    }
}

/// Infinitesimal translations and rotations of `config`, flattened.
pub fn gauge_generators(config: &ConfigurationMatrix) -> Vec<DVector<f64>> {
    let q = config.matrix();
    let (p, n) = q.shape();
    let mut out = Vec::new();
    for a in 0..p {
        let mut t = DMatrix::zeros(p, n);
        t.row_mut(a).fill(1.0);
        out.push(flatten(&t));
    }
    for a in 0..p {
        for b in (a + 1)..p {
            let mut rot = DMatrix::zeros(p, n);
            for i in 0..n {
                rot[(a, i)] = q[(b, i)];
                rot[(b, i)] = -q[(a, i)];
            }
            out.push(flatten(&rot));
        }
    }
    out
}

/// Orthonormal basis (columns, in ℝ^p) of the directions orthogonal to the
/// affine span of the configuration.
pub fn vertical_directions(config: &ConfigurationMatrix, masses: &MassVector, tol: f64) -> DMatrix<f64> {
    let centered = config::recenter(config, masses);
    let span = linalg::orthonormal_span(centered.matrix(), tol);
    linalg::orthogonal_complement(&span)
}

#[derive(Debug, Clone, Serialize)]
pub struct VerticalSpectrum {
    /// Eigenvalues of the vertical Hessian form in the mass metric on
    /// dispositions, ascending; `n − 1` of them.
    pub eigenvalues: Vec<f64>,
    pub negative: usize,
    pub zero: usize,
    pub positive: usize,
    /// Eigenvalues outside the zero band but within the ambiguity band.
    pub ambiguous: usize,
    pub zero_threshold: f64,
    /// Nontrivial kernel vectors `ζ`, mass-orthogonal to `(1,…,1)` and the rows of `q`.
    pub kernel_basis: Vec<Vec<f64>>,
}

fn sqrt_masses(masses: &MassVector) -> DVector<f64> {
    DVector::from_iterator(masses.len(), masses.as_slice().iter().map(|m| m.sqrt()))
}

/// Zero-band threshold for spectral quantities of `Ž`.
pub fn zero_threshold(w: &ShiftedWCMatrix) -> f64 {
    ZERO_BAND_REL * w.norm() + w.noise_floor()
}

/// Orthonormal basis (in `w = μ^{1/2}ζ` coordinates) of the trivial vertical
/// kernel: the all-ones vector and the rows of the recentered configuration.
/// Also returns the conditioning of the column-normalized generators.
fn trivial_basis(cc: &CentralConfiguration) -> (DMatrix<f64>, f64) {
    let n = cc.len();
    let sm = sqrt_masses(&cc.masses);
    let centered = config::recenter(&cc.config, &cc.masses);
    let q = centered.matrix();
    let rank_q = linalg::relative_rank(q, config::DEFAULT_RANK_TOL);
    let mut cols = vec![sm.clone()];
    for a in 0..q.nrows() {
        cols.push(DVector::from_fn(n, |i, _| q[(a, i)] * sm[i]));
    }
    let raw = DMatrix::from_columns(&cols);
    let basis = linalg::orthonormal_span(&raw, config::DEFAULT_RANK_TOL);
    // conditioning of the 1 + rank q generators, each normalized
    let mut normalized = raw.clone();
    for mut c in normalized.column_iter_mut() {
        let nrm = c.norm();
        if nrm > 0.0 {
            c /= nrm;
        }
    }
    let sv = linalg::singular_values(&normalized);
    let k = (1 + rank_q).min(sv.len());
    let conditioning = if k == 0 || sv[0] == 0.0 { 0.0 } else { sv[k - 1] / sv[0] };
    (basis, conditioning)
}

/// Kernel vectors `ζ` of the vertical form that are not translations or rotations.
fn nontrivial_kernel(
    sym: &DMatrix<f64>,
    sm: &DVector<f64>,
    trivial: &DMatrix<f64>,
    threshold: f64,
    dim: usize,
) -> Vec<Vec<f64>> {
    if dim == 0 {
        return Vec::new();
    }
    let (vals, vecs) = linalg::sym_eigen_sorted(sym);
    let kernel: Vec<DVector<f64>> = (0..vals.len())
        .filter(|&k| vals[k].abs() <= threshold)
        .map(|k| linalg::project_out(&vecs.column(k).into_owned(), trivial))
        .collect();
    if kernel.is_empty() {
        return Vec::new();
    }
    let span = linalg::orthonormal_span(&DMatrix::from_columns(&kernel), 1e-6);
    (0..span.ncols().min(dim))
        .map(|c| (0..sm.len()).map(|i| span[(i, c)] / sm[i]).collect())
        .collect()
}

pub fn vertical_spectrum(cc: &CentralConfiguration, vertical_axis: &DVector<f64>) -> Result<VerticalSpectrum> {
    let p = cc.config.dim();
    if vertical_axis.len() != p {
        return Err(Error::Shape(format!("axis has dimension {}, expected {p}", vertical_axis.len())));
    }
    let axis = vertical_axis.normalize();
    let centered = config::recenter(&cc.config, &cc.masses);
    let span = linalg::orthonormal_span(centered.matrix(), config::DEFAULT_RANK_TOL);
    let component = (span.transpose() * &axis).norm();
    if component > config::DEFAULT_RANK_TOL {
        return Err(Error::AxisNotVertical { component });
    }

    let n = cc.len();
    let h = hessian(&cc.config, &cc.masses, cc.lambda);
    let vblock = h.block(&axis, &axis);
    let sm = sqrt_masses(&cc.masses);
    let sym = DMatrix::from_fn(n, n, |i, j| vblock[(i, j)] / (sm[i] * sm[j]));

    // restrict to dispositions: remove the mass-weighted all-ones direction
    let ones = DMatrix::from_columns(&[sm.normalize()]);
    let comp = linalg::orthogonal_complement(&ones);
    let reduced = comp.transpose() * &sym * &comp;
    let (eigenvalues, _) = linalg::sym_eigen_sorted(&reduced);

    let w = wintner_conley::shifted_matrix(&cc.config, &cc.masses, cc.lambda);
    let zero_threshold = zero_threshold(&w);
    let ambiguous_threshold = AMBIGUOUS_BAND_REL * w.norm() + w.noise_floor();
    let zero = eigenvalues.iter().filter(|e| e.abs() <= zero_threshold).count();
    let negative = eigenvalues.iter().filter(|&&e| e < -zero_threshold).count();
    let positive = eigenvalues.iter().filter(|&&e| e > zero_threshold).count();
    let ambiguous = eigenvalues
        .iter()
        .filter(|e| e.abs() > zero_threshold && e.abs() <= ambiguous_threshold)
        .count();

    let (trivial, _) = trivial_basis(cc);
    let nontrivial_dim = zero.saturating_sub(trivial.ncols() - 1);
    let kernel_basis = nontrivial_kernel(&sym, &sm, &trivial, zero_threshold, nontrivial_dim);

    Ok(VerticalSpectrum { eigenvalues, negative, zero, positive, ambiguous, zero_threshold, kernel_basis })
}

#[derive(Debug, Clone, Serialize)]
pub struct DegeneracyReport {
    pub rank_zhat: usize,
    pub rank_q: usize,
    /// `1 + rank q`: translations plus rotations into a vertical direction.
    pub trivial_dim: usize,
    /// `(n − 1) − rank Ž − rank q`.
    pub nontrivial_dim: usize,
    pub basis: Vec<Vec<f64>>,
    /// Smallest-to-largest singular value ratio of the normalized trivial generators.
    pub conditioning: f64,
    pub well_conditioned: bool,
}

/// Nontrivial vertical degeneracies through the left kernel of `Ž`.
pub fn degeneracy_detect(cc: &CentralConfiguration, tol: f64) -> DegeneracyReport {
    let n = cc.len();
    let w = wintner_conley::shifted_matrix(&cc.config, &cc.masses, cc.lambda);
    let ranks = wintner_conley::rank_report(&w, &cc.config, tol);
    let nontrivial_dim = (n - 1).saturating_sub(ranks.rank_zhat + ranks.rank_q);
    let sm = sqrt_masses(&cc.masses);
    let zmu = w.zhat_mu();
    let sym = DMatrix::from_fn(n, n, |i, j| (zmu[(i, j)] + zmu[(j, i)]) / (2.0 * sm[i] * sm[j]));
    let (trivial, conditioning) = trivial_basis(cc);
    let basis = nontrivial_kernel(&sym, &sm, &trivial, w.rank_threshold(tol), nontrivial_dim);
    DegeneracyReport {
        rank_zhat: ranks.rank_zhat,
        rank_q: ranks.rank_q,
        trivial_dim: 1 + ranks.rank_q,
        nontrivial_dim,
        basis,
        conditioning,
        well_conditioned: conditioning >= CONDITIONING_TOL,
    }
}

/// Kernel of the full Hessian: eigenvectors whose eigenvalue is within
/// `tol` times the spectral norm, as `p × n` matrices.
pub fn hessian_kernel(h: &HessianForm, tol: f64) -> Vec<DMatrix<f64>> {
    let (vals, vecs) = linalg::sym_eigen_sorted(h.matrix());
    let top = vals.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
    (0..vals.len())
        .filter(|&k| vals[k].abs() <= tol * top)
        .map(|k| unflatten(&vecs.column(k).into_owned(), h.dim()))
        .collect()
}

/// Project each `u_i` on the vertical directions of `cc`.
pub fn vertical_projection(cc: &CentralConfiguration, u: &DMatrix<f64>) -> DMatrix<f64> {
    let vert = vertical_directions(&cc.config, &cc.masses, config::DEFAULT_RANK_TOL);
    &vert * (vert.transpose() * u)
}

/// Check that the vertical projection of a Hessian-kernel vector stays in the kernel.
/// Residuals are measured as `‖H·v‖ / (‖H‖·‖u‖)`.
pub fn kernel_projection_check(cc: &CentralConfiguration, u: &DMatrix<f64>, tol: f64) -> Result<bool> {
    let h = hessian(&cc.config, &cc.masses, cc.lambda);
    let scale = h.spectral_norm() * u.norm();
    if scale == 0.0 {
        return Ok(true);
    }
    let residual = h.apply(u).norm() / scale;
    if residual > tol {
        return Err(Error::NotInKernel { residual });
    }
    let projected = vertical_projection(cc, u);
    Ok(h.apply(&projected).norm() / scale <= tol)
}

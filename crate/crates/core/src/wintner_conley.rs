//! The Wintner-Conley matrix `Z`, the projector `𝓘` acting as the identity on
//! dispositions, and the shifted matrix `Ž = Z − λ𝓘`.
//!
//! A recentered configuration `q` is central with multiplier `λ` exactly when
//! `q·Ž = 0`. Since `(1,…,1)·Ž = 0`, the product `q·Ž` does not see
//! translations, so no recentering is needed before testing it.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::config::{self, ConfigurationMatrix, MassVector};
use crate::error::{Error, Result};
use crate::linalg;

/// Quantities derived from `Ž` that vanish in exact arithmetic are compared
/// against this fraction of `‖Z‖∞` in addition to their relative thresholds.
pub const NOISE_FLOOR_REL: f64 = 1e-10;

/// Relative slack threshold for flagging an equidistant pair.
pub const EQUIDISTANT_REL_TOL: f64 = 1e-9;

/// The Wintner-Conley matrix. Diagonal `Σ_i = Σ_{j≠i} m_j S_ij`, off-diagonal
/// entry `(i, j)` equal to `−m_i S_ij`, so that `(γ_1,…,γ_n) = q·Z`.
pub fn z_matrix(config: &ConfigurationMatrix, masses: &MassVector) -> DMatrix<f64> {
    assert_eq!(config.len(), masses.len());
    let s = config::s_matrix(config);
    let n = config.len();
    let mut z = DMatrix::zeros(n, n);
    for i in 0..n {
        let mut sigma = 0.0;
        for j in 0..n {
            if i != j {
                z[(i, j)] = -masses[i] * s[(i, j)];
                sigma += masses[j] * s[(i, j)];
            }
        }
        z[(i, i)] = sigma;
    }
    z
}

/// `𝓘_ij = δ_ij − m_i/M`.
pub fn identity_on_dispositions(masses: &MassVector) -> DMatrix<f64> {
    let n = masses.len();
    let total = masses.total();
    DMatrix::from_fn(n, n, |i, j| if i == j { 1.0 } else { 0.0 } - masses[i] / total)
}

#[derive(Debug, Clone)]
pub struct ShiftedWCMatrix {
    zhat: DMatrix<f64>,
    z: DMatrix<f64>,
    lambda: f64,
    masses: MassVector,
}

impl ShiftedWCMatrix {
    pub fn zhat(&self) -> &DMatrix<f64> {
        &self.zhat
    }

    pub fn z(&self) -> &DMatrix<f64> {
        &self.z
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn masses(&self) -> &MassVector {
        &self.masses
    }

    pub fn len(&self) -> usize {
        self.zhat.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.zhat.nrows() == 0
    }

    /// `Ž·μ`, symmetric.
    pub fn zhat_mu(&self) -> DMatrix<f64> {
        &self.zhat * self.masses.mass_matrix()
    }

    pub fn trace(&self) -> f64 {
        self.zhat.trace()
    }

    /// `‖Ž‖∞` as the largest absolute entry.
    pub fn norm(&self) -> f64 {
        linalg::max_abs(&self.zhat)
    }

    /// Absolute noise floor for quantities that vanish in exact arithmetic.
    pub fn noise_floor(&self) -> f64 {
        NOISE_FLOOR_REL * linalg::max_abs(&self.z)
    }

    /// `Š_ij = S_ij − λ/M`, recovered from the off-diagonal entries of `Z`.
    pub fn s_check(&self, i: usize, j: usize) -> f64 {
        -self.z[(i, j)] / self.masses[i] - self.lambda / self.masses.total()
    }

    /// Singular-value threshold used for `rank Ž` at relative tolerance `tol`.
    pub fn rank_threshold(&self, tol: f64) -> f64 {
        let top_zhat = linalg::singular_values(&self.zhat).first().copied().unwrap_or(0.0);
        let top_z = linalg::singular_values(&self.z).first().copied().unwrap_or(0.0);
        tol * top_zhat.max(top_z)
    }
}

pub fn shifted_matrix(config: &ConfigurationMatrix, masses: &MassVector, lambda: f64) -> ShiftedWCMatrix {
    let z = z_matrix(config, masses);
    let zhat = &z - identity_on_dispositions(masses) * lambda;
    ShiftedWCMatrix { zhat, z, lambda, masses: masses.clone() }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct CentralityVerdict {
    pub central: bool,
    /// `max |q·Ž|`.
    pub residual: f64,
    /// `max |q·Ž| / max |q·Z|`.
    pub relative_residual: f64,
}

/// Certify `q·Ž = 0` relative to the size of the attractions `q·Z`.
pub fn is_central(config: &ConfigurationMatrix, masses: &MassVector, lambda: f64, tol: f64) -> CentralityVerdict {
    let w = shifted_matrix(config, masses, lambda);
    let q = config.matrix();
    let residual = linalg::max_abs(&(q * &w.zhat));
    let scale = linalg::max_abs(&(q * &w.z));
    let relative_residual = if scale > 0.0 { residual / scale } else { f64::INFINITY };
    CentralityVerdict { central: relative_residual <= tol, residual, relative_residual }
}

#[derive(Debug, Clone, Serialize)]
pub struct PairSlack {
    pub i: usize,
    pub j: usize,
    /// `Ž_ii + Ž_jj − Ž_ij − Ž_ji`.
    pub slack: f64,
    /// The same quantity as `2(m_i+m_j)Š_ij + Σ_{k≠i,j} m_k(Š_ik + Š_jk)`.
    pub alt_slack: f64,
    pub equidistant: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct PairwiseReport {
    pub pairs: Vec<PairSlack>,
    pub min_slack: f64,
    /// Sum of all slacks; equals `n · trace Ž`.
    pub sum: f64,
    /// Largest disagreement between the two slack expressions.
    pub max_route_gap: f64,
}

/// Pairwise inequality `Ž_ij + Ž_ji ≤ Ž_ii + Ž_jj`. A slack below `−tol·‖Z‖∞`
/// is reported as a violation.
pub fn pairwise_inequality_check(w: &ShiftedWCMatrix, tol: f64) -> Result<PairwiseReport> {
    let n = w.len();
    let zh = &w.zhat;
    let m = &w.masses;
    let equidistant_tol = EQUIDISTANT_REL_TOL * w.norm() + w.noise_floor();
    let mut pairs = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in (i + 1)..n {
            let slack = zh[(i, i)] + zh[(j, j)] - zh[(i, j)] - zh[(j, i)];
            let mut alt = 2.0 * (m[i] + m[j]) * w.s_check(i, j);
            for k in (0..n).filter(|&k| k != i && k != j) {
                alt += m[k] * (w.s_check(i, k) + w.s_check(j, k));
            }
            pairs.push(PairSlack { i, j, slack, alt_slack: alt, equidistant: slack.abs() <= equidistant_tol });
        }
    }
    let min_slack = pairs.iter().map(|p| p.slack).fold(f64::INFINITY, f64::min);
    let sum = pairs.iter().map(|p| p.slack).sum();
    let max_route_gap = pairs.iter().map(|p| (p.slack - p.alt_slack).abs()).fold(0.0, f64::max);
    let bound = -tol * linalg::max_abs(&w.z);
    if let Some(bad) = pairs.iter().find(|p| p.slack < bound) {
        return Err(Error::InequalityViolation(format!(
            "pair ({}, {}) has slack {:e} < {:e}",
            bad.i, bad.j, bad.slack, bound
        )));
    }
    Ok(PairwiseReport { pairs, min_slack, sum, max_route_gap })
}

/// `trace Ž ≥ 0`; returns the trace, or a violation below `−tol·‖Z‖∞`.
pub fn trace_inequality_check(w: &ShiftedWCMatrix, tol: f64) -> Result<f64> {
    let t = w.trace();
    let bound = -tol * linalg::max_abs(&w.z);
    if t < bound {
        return Err(Error::InequalityViolation(format!("trace Ž = {t:e} < {bound:e}")));
    }
    Ok(t)
}

#[derive(Debug, Clone, Serialize)]
pub struct RankReport {
    pub rank_zhat: usize,
    pub rank_q: usize,
    pub n: usize,
    /// Set iff `rank Ž + rank q ≤ n − 2`.
    pub degenerate: bool,
    /// Smallest singular value of `Ž` counted as nonzero.
    pub smallest_nonzero_sv: Option<f64>,
    /// Largest singular value of `Ž` counted as zero.
    pub largest_zero_sv: Option<f64>,
    pub singular_values: Vec<f64>,
}

pub fn rank_report(w: &ShiftedWCMatrix, config: &ConfigurationMatrix, tol: f64) -> RankReport {
    let n = w.len();
    let sv = linalg::singular_values(&w.zhat);
    let threshold = w.rank_threshold(tol);
    let rank_zhat = linalg::count_above(&sv, threshold);
    let centered = config::recenter(config, &w.masses);
    let rank_q = linalg::relative_rank(centered.matrix(), tol);
    RankReport {
        rank_zhat,
        rank_q,
        n,
        degenerate: rank_zhat + rank_q + 2 <= n,
        smallest_nonzero_sv: sv.iter().copied().rfind(|&s| s > threshold),
        largest_zero_sv: sv.iter().copied().find(|&s| s <= threshold),
        singular_values: sv,
    }
}

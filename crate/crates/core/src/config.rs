//! Configurations, masses and the scalar potential-theory functions.
//!
//! Positions are stored as a `p × n` matrix whose column `i` is the position
//! of body `i`, so that attractions read as the matrix product `q·Z`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg;

/// Two bodies closer than this fraction of the configuration diameter collide.
pub const COLLISION_REL_TOL: f64 = 1e-9;

/// Default relative singular-value threshold for numerical ranks.
pub const DEFAULT_RANK_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct MassVector {
    m: Vec<f64>,
    total: f64,
}

impl MassVector {
    pub fn new(m: Vec<f64>) -> Result<Self> {
        if m.len() < 2 {
            return Err(Error::InvalidMasses(format!("need at least 2 bodies, got {}", m.len())));
        }
        if let Some((i, &bad)) = m.iter().enumerate().find(|(_, x)| !(x.is_finite() && **x > 0.0)) {
            return Err(Error::InvalidMasses(format!("mass {i} is {bad}, must be positive")));
        }
        let total = m.iter().sum();
        Ok(Self { m, total })
    }

    pub fn equal(n: usize) -> Self {
        Self::new(vec![1.0; n]).expect("n >= 2 unit masses")
    }

    pub fn len(&self) -> usize {
        self.m.len()
    }

    pub fn is_empty(&self) -> bool {
        self.m.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.m
    }

    pub fn total(&self) -> f64 {
        self.total
    }

    /// The diagonal mass matrix μ.
    pub fn mass_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_diagonal(&DVector::from_column_slice(&self.m))
    }

    pub fn scaled(&self, c: f64) -> Result<Self> {
        Self::new(self.m.iter().map(|x| x * c).collect())
    }

    /// Masses with body `k` removed.
    pub fn without(&self, k: usize) -> Result<Self> {
        Self::new(self.m.iter().enumerate().filter(|&(i, _)| i != k).map(|(_, &x)| x).collect())
    }
}

impl std::ops::Index<usize> for MassVector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.m[i]
    }
}

/// Body positions, one column per body. Construction rejects collisions.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigurationMatrix {
    q: DMatrix<f64>,
}

impl ConfigurationMatrix {
    pub fn new(q: DMatrix<f64>) -> Result<Self> {
        if q.ncols() < 2 || q.nrows() == 0 {
            return Err(Error::Shape(format!(
                "configuration must be p×n with p ≥ 1, n ≥ 2 (got {}×{})",
                q.nrows(),
                q.ncols()
            )));
        }
        if q.iter().any(|x| !x.is_finite()) {
            return Err(Error::Shape("non-finite coordinate".into()));
        }
        let config = Self { q };
        config.check_collisions()?;
        Ok(config)
    }

    /// Build from a list of positions, each of the same dimension.
    pub fn from_positions(positions: &[Vec<f64>]) -> Result<Self> {
        let n = positions.len();
        let p = positions.first().map_or(0, Vec::len);
        if positions.iter().any(|x| x.len() != p) {
            return Err(Error::Shape("positions have inconsistent dimensions".into()));
        }
        let q = DMatrix::from_fn(p, n, |a, i| positions[i][a]);
        Self::new(q)
    }

    fn check_collisions(&self) -> Result<()> {
        let r = pairwise(&self.q);
        let n = self.len();
        let diameter = linalg::max_abs(&r);
        let tolerance = COLLISION_REL_TOL * diameter;
        for i in 0..n {
            for j in (i + 1)..n {
                if r[(i, j)] <= tolerance {
                    return Err(Error::Collision { i, j, distance: r[(i, j)], tolerance });
                }
            }
        }
        Ok(())
    }

    /// Ambient dimension p.
    pub fn dim(&self) -> usize {
        self.q.nrows()
    }

    /// Number of bodies n.
    pub fn len(&self) -> usize {
        self.q.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.q.ncols() == 0
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.q
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.q
    }

    pub fn position(&self, i: usize) -> DVector<f64> {
        self.q.column(i).into_owned()
    }

    pub fn positions(&self) -> Vec<Vec<f64>> {
        (0..self.len()).map(|i| self.q.column(i).iter().copied().collect()).collect()
    }

    pub fn diameter(&self) -> f64 {
        linalg::max_abs(&pairwise(&self.q))
    }

    pub fn scaled(&self, c: f64) -> Result<Self> {
        Self::new(&self.q * c)
    }

    /// Embed into a higher-dimensional space by zero padding.
    pub fn embed(&self, p: usize) -> Result<Self> {
        if p < self.dim() {
            return Err(Error::Shape(format!("cannot embed dimension {} into {p}", self.dim())));
        }
        let mut q = DMatrix::zeros(p, self.len());
        q.rows_mut(0, self.dim()).copy_from(&self.q);
        Ok(Self { q })
    }

    /// Remove body `k`.
    pub fn without(&self, k: usize) -> Result<Self> {
        Self::new(self.q.clone().remove_column(k))
    }
}

fn pairwise(q: &DMatrix<f64>) -> DMatrix<f64> {
    let n = q.ncols();
    let mut r = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in (i + 1)..n {
            let d = (q.column(i) - q.column(j)).norm();
            r[(i, j)] = d;
            r[(j, i)] = d;
        }
    }
    r
}

fn check_len(config: &ConfigurationMatrix, masses: &MassVector) {
    assert_eq!(config.len(), masses.len(), "configuration and mass vector disagree on n");
}

/// Symmetric matrix of mutual distances `r_ij`, zero diagonal.
pub fn mutual_distances(config: &ConfigurationMatrix) -> DMatrix<f64> {
    pairwise(&config.q)
}

/// `S_ij = r_ij^{-3}` off the diagonal, zero on it.
pub fn s_matrix(config: &ConfigurationMatrix) -> DMatrix<f64> {
    let mut s = mutual_distances(config);
    let n = s.nrows();
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s[(i, j)] = s[(i, j)].powi(-3);
            }
        }
    }
    s
}

/// Newtonian force function `U = Σ_{i<j} m_i m_j / r_ij`.
pub fn force_function(config: &ConfigurationMatrix, masses: &MassVector) -> f64 {
    check_len(config, masses);
    let r = mutual_distances(config);
    let n = config.len();
    let mut u = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            u += masses[i] * masses[j] / r[(i, j)];
        }
    }
    u
}

/// Moment of inertia in mutual-distance form, `I = (1/M) Σ_{i<j} m_i m_j r_ij²`.
pub fn moment_of_inertia(config: &ConfigurationMatrix, masses: &MassVector) -> f64 {
    check_len(config, masses);
    let r = mutual_distances(config);
    let n = config.len();
    let mut acc = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            acc += masses[i] * masses[j] * r[(i, j)].powi(2);
        }
    }
    acc / masses.total()
}

/// Amended force function `U + λI/2`.
pub fn amended_potential(config: &ConfigurationMatrix, masses: &MassVector, lambda: f64) -> f64 {
    force_function(config, masses) + 0.5 * lambda * moment_of_inertia(config, masses)
}

/// Gradient of `U + λI/2`: column `i` is
/// `-Σ_{j≠i} m_i m_j (S_ij - λ/M)(q_i - q_j)`.
pub fn amended_gradient(config: &ConfigurationMatrix, masses: &MassVector, lambda: f64) -> DMatrix<f64> {
    check_len(config, masses);
    let q = &config.q;
    let s = s_matrix(config);
    let z = lambda / masses.total();
    let (p, n) = q.shape();
    let mut g = DMatrix::zeros(p, n);
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let coeff = -masses[i] * masses[j] * (s[(i, j)] - z);
            for a in 0..p {
                g[(a, i)] += coeff * (q[(a, i)] - q[(a, j)]);
            }
        }
    }
    g
}

/// Attraction vectors `γ_i = Σ_{j≠i} m_j S_ij (q_i - q_j)`, one per column.
pub fn attraction_vectors(config: &ConfigurationMatrix, masses: &MassVector) -> DMatrix<f64> {
    check_len(config, masses);
    let q = &config.q;
    let s = s_matrix(config);
    let (p, n) = q.shape();
    let mut gamma = DMatrix::zeros(p, n);
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let coeff = masses[j] * s[(i, j)];
            for a in 0..p {
                gamma[(a, i)] += coeff * (q[(a, i)] - q[(a, j)]);
            }
        }
    }
    gamma
}

pub fn center_of_mass(config: &ConfigurationMatrix, masses: &MassVector) -> DVector<f64> {
    check_len(config, masses);
    let mut g = DVector::zeros(config.dim());
    for i in 0..config.len() {
        g += config.q.column(i) * masses[i];
    }
    g / masses.total()
}

/// Translate so that the center of mass sits at the origin.
pub fn recenter(config: &ConfigurationMatrix, masses: &MassVector) -> ConfigurationMatrix {
    let g = center_of_mass(config, masses);
    let mut q = config.q.clone();
    for mut col in q.column_iter_mut() {
        col -= &g;
    }
    ConfigurationMatrix { q }
}

/// Dimension of the affine span, as the numerical rank of `(q_2-q_1, …, q_n-q_1)`.
pub fn configuration_dimension(config: &ConfigurationMatrix, tol: f64) -> usize {
    let q = &config.q;
    let n = q.ncols();
    let diffs = DMatrix::from_fn(q.nrows(), n - 1, |a, k| q[(a, k + 1)] - q[(a, 0)]);
    linalg::relative_rank(&diffs, tol)
}

/// The multiplier a central configuration must have, `λ = U/I`.
///
/// For any configuration this is the least-squares multiplier of the
/// central-configuration equation in the mass metric.
pub fn natural_multiplier(config: &ConfigurationMatrix, masses: &MassVector) -> f64 {
    force_function(config, masses) / moment_of_inertia(config, masses)
}

/// Rescale so that `U/I = M`, i.e. the normalization `λ = M`.
pub fn normalize_multiplier(config: &ConfigurationMatrix, masses: &MassVector) -> ConfigurationMatrix {
    let lambda = natural_multiplier(config, masses);
    let c = (lambda / masses.total()).cbrt();
    ConfigurationMatrix { q: &config.q * c }
}

/// A configuration certified to satisfy `q·Ž = 0` within tolerance.
#[derive(Debug, Clone)]
pub struct CentralConfiguration {
    pub config: ConfigurationMatrix,
    pub masses: MassVector,
    pub lambda: f64,
    pub residual: f64,
}

impl CentralConfiguration {
    /// Recenter and certify. Fails when the relative residual exceeds `tol`
    /// or the multiplier is not positive.
    pub fn certify(
        config: &ConfigurationMatrix,
        masses: &MassVector,
        lambda: f64,
        tol: f64,
    ) -> Result<Self> {
        check_len(config, masses);
        let centered = recenter(config, masses);
        let verdict = crate::wintner_conley::is_central(&centered, masses, lambda, tol);
        if lambda.is_nan() || lambda <= 0.0 || !verdict.central {
            return Err(Error::NotCentral { residual: verdict.relative_residual });
        }
        Ok(Self { config: centered, masses: masses.clone(), lambda, residual: verdict.relative_residual })
    }

    /// Certify with the multiplier recomputed as `U/I`.
    pub fn certify_natural(config: &ConfigurationMatrix, masses: &MassVector, tol: f64) -> Result<Self> {
        let lambda = natural_multiplier(config, masses);
        Self::certify(config, masses, lambda, tol)
    }

    pub fn len(&self) -> usize {
        self.config.len()
    }

    pub fn is_empty(&self) -> bool {
        self.config.is_empty()
    }

    pub fn dimension(&self) -> usize {
        configuration_dimension(&self.config, DEFAULT_RANK_TOL)
    }

    /// Normalized multiplier `λ/M`.
    pub fn normalized_multiplier(&self) -> f64 {
        self.lambda / self.masses.total()
    }

    pub fn embed(&self, p: usize) -> Result<Self> {
        Ok(Self { config: self.config.embed(p)?, ..self.clone() })
    }
}

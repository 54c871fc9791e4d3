//! Shared helpers for the integration tests: independent reference
//! computations (finite differences, plain double sums) and corpora of
//! solved central configurations.

#![allow(dead_code)]

use central_configs::config::{CentralConfiguration, ConfigurationMatrix, MassVector};
use central_configs::solver::{self, MultistartOptions, SolveOptions};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Masses log-uniform in `[0.1, 10]`.
pub fn random_masses(rng: &mut ChaCha8Rng, n: usize) -> MassVector {
    MassVector::new((0..n).map(|_| 10f64.powf(rng.random_range(-1.0..1.0))).collect()).unwrap()
}

/// Uniform points in `[-1, 1]^p` with no two closer than `0.15`.
pub fn random_config(rng: &mut ChaCha8Rng, n: usize, p: usize) -> ConfigurationMatrix {
    loop {
        let q = DMatrix::from_fn(p, n, |_, _| rng.random_range(-1.0..1.0));
        let far = (0..n).all(|i| ((i + 1)..n).all(|j| (q.column(i) - q.column(j)).norm() > 0.15));
        if far {
            return ConfigurationMatrix::new(q).unwrap();
        }
    }
}

pub fn pair_distance(q: &DMatrix<f64>, i: usize, j: usize) -> f64 {
    (q.column(i) - q.column(j)).norm()
}

/// `U` as a plain sum over ordered pairs, halved.
pub fn force_function_reference(q: &DMatrix<f64>, m: &[f64]) -> f64 {
    let n = m.len();
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                acc += m[i] * m[j] / pair_distance(q, i, j);
            }
        }
    }
    acc / 2.0
}

/// `I` in its center-of-mass form `Σ m_i |q_i − q_G|²`.
pub fn inertia_reference(q: &DMatrix<f64>, m: &[f64]) -> f64 {
    let total: f64 = m.iter().sum();
    let g = (0..m.len()).fold(DVector::zeros(q.nrows()), |acc, i| acc + q.column(i) * m[i]) / total;
    (0..m.len()).map(|i| m[i] * (q.column(i) - &g).norm_squared()).sum()
}

pub fn amended_reference(q: &DMatrix<f64>, m: &[f64], lambda: f64) -> f64 {
    force_function_reference(q, m) + 0.5 * lambda * inertia_reference(q, m)
}

/// Central-difference gradient of the amended potential, shaped like `q`.
pub fn fd_gradient(q: &DMatrix<f64>, m: &[f64], lambda: f64, h: f64) -> DMatrix<f64> {
    let mut g = DMatrix::zeros(q.nrows(), q.ncols());
    for i in 0..q.ncols() {
        for a in 0..q.nrows() {
            let (mut qp, mut qm) = (q.clone(), q.clone());
            qp[(a, i)] += h;
            qm[(a, i)] -= h;
            g[(a, i)] = (amended_reference(&qp, m, lambda) - amended_reference(&qm, m, lambda)) / (2.0 * h);
        }
    }
    g
}

/// Central-difference Hessian of the amended potential from second
/// differences of the potential itself, in the index order `i·p + a`.
pub fn fd_hessian(q: &DMatrix<f64>, m: &[f64], lambda: f64, h: f64) -> DMatrix<f64> {
    let (p, n) = q.shape();
    let f = |q: &DMatrix<f64>| amended_reference(q, m, lambda);
    let bump = |k: usize, s: f64, q: &mut DMatrix<f64>| q[(k % p, k / p)] += s;
    let mut out = DMatrix::zeros(p * n, p * n);
    for k in 0..p * n {
        for l in k..p * n {
            let mut v = [0.0; 4];
            for (slot, (sk, sl)) in [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)].iter().enumerate() {
                let mut x = q.clone();
                bump(k, sk * h, &mut x);
                bump(l, sl * h, &mut x);
                v[slot] = f(&x);
            }
            let d = (v[0] - v[1] - v[2] + v[3]) / (4.0 * h * h);
            out[(k, l)] = d;
            out[(l, k)] = d;
        }
    }
    out
}

/// Planar classes found by a short multistart for these masses.
pub fn planar_classes(masses: &MassVector, starts: usize, seed: u64) -> Vec<CentralConfiguration> {
    let opts = MultistartOptions {
        starts,
        seed,
        ambient_dim: 2,
        solve: SolveOptions { dimension: Some(2), ..SolveOptions::default() },
    };
    solver::multistart(masses, &opts)
        .classes
        .into_iter()
        .filter(|c| c.dimension == 2)
        .map(|c| c.representative)
        .collect()
}

/// Planar central configurations with `n` bodies and random masses, at least
/// `count` of them, drawn from as many mass vectors as needed.
pub fn planar_corpus(n: usize, count: usize, seed: u64) -> Vec<CentralConfiguration> {
    let mut rng = rng(seed);
    let mut out = Vec::new();
    while out.len() < count {
        let masses = random_masses(&mut rng, n);
        out.extend(planar_classes(&masses, 8, rng.random()));
    }
    out
}

/// Affine dependency of four planar points: `Σ Δ_i = 0`, `Σ Δ_i q_i = 0`,
/// with `Δ_i` the signed area of the triangle formed by the other three.
pub fn affine_dependency4(pts: &[[f64; 2]]) -> [f64; 4] {
    let area = |a: [f64; 2], b: [f64; 2], c: [f64; 2]| (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]);
    let [p0, p1, p2, p3] = [pts[0], pts[1], pts[2], pts[3]];
    [area(p1, p2, p3), -area(p0, p2, p3), area(p0, p1, p3), -area(p0, p1, p2)]
}

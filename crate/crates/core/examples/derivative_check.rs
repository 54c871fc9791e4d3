//! Compare the analytic gradient and Hessian of `U + λI/2` with central
//! finite differences on a random configuration.
//!
//! cargo run --example derivative_check

use central_configs::config::{amended_gradient, amended_potential, ConfigurationMatrix, MassVector};
use central_configs::hessian::{flatten, hessian, unflatten};
use central_configs::solver::random_start;
use nalgebra::DMatrix;

fn main() -> central_configs::Result<()> {
    let masses = MassVector::new(vec![1.0, 0.4, 2.5, 1.7, 0.9])?;
    let q = random_start(5, 3, 11, 0)?;
    let lambda = masses.total();
    let x = flatten(q.matrix());
    let at = |v: &nalgebra::DVector<f64>| ConfigurationMatrix::new(unflatten(v, 3)).unwrap();
    let h = 1e-5;

    let g = flatten(&amended_gradient(&q, &masses, lambda));
    let mut worst_g = 0.0_f64;
    for k in 0..x.len() {
        let (mut xp, mut xm) = (x.clone(), x.clone());
        xp[k] += h;
        xm[k] -= h;
        let fd = (amended_potential(&at(&xp), &masses, lambda) - amended_potential(&at(&xm), &masses, lambda)) / (2.0 * h);
        worst_g = worst_g.max((fd - g[k]).abs() / g.amax());
    }

    let hm = hessian(&q, &masses, lambda);
    let mut fd_h = DMatrix::zeros(x.len(), x.len());
    for k in 0..x.len() {
        let (mut xp, mut xm) = (x.clone(), x.clone());
        xp[k] += h;
        xm[k] -= h;
        let col = (flatten(&amended_gradient(&at(&xp), &masses, lambda)) - flatten(&amended_gradient(&at(&xm), &masses, lambda))) / (2.0 * h);
        fd_h.set_column(k, &col);
    }
    let worst_h = (&fd_h - hm.matrix()).amax() / hm.matrix().amax();
    println!("gradient: max relative error {worst_g:.2e}");
    println!("Hessian:  max relative error {worst_h:.2e}");
    Ok(())
}

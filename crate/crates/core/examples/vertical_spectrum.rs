//! Vertical Hessian spectrum of planar central configurations lifted to ℝ³.
//!
//! The Hessian of `U + λI/2` splits into a horizontal and a vertical block;
//! the vertical block is `−Ž` in the mass metric. Every planar configuration
//! with at least four bodies found here has a negative vertical eigenvalue.
//!
//! cargo run --release --example vertical_spectrum

use central_configs::config::MassVector;
use central_configs::hessian::{hessian, vertical_spectrum};
use central_configs::solver::{multistart, MultistartOptions};
use nalgebra::DVector;

fn main() -> central_configs::Result<()> {
    for n in 4..=7 {
        let masses = MassVector::new((1..=n).map(|k| 1.0 + 0.25 * k as f64).collect())?;
        let report = multistart(&masses, &MultistartOptions { starts: 40, seed: 7, ..MultistartOptions::default() });
        for class in report.classes.iter().filter(|c| c.dimension == 2).take(3) {
            let cc = class.representative.embed(3)?;
            let h = hessian(&cc.config, &cc.masses, cc.lambda);
            let up = DVector::from_vec(vec![0.0, 0.0, 1.0]);
            let flat = DVector::from_vec(vec![1.0, 0.0, 0.0]);
            let cross = h.block(&flat, &up).amax() / h.spectral_norm();
            let spec = vertical_spectrum(&cc, &up)?;
            let shown: Vec<String> = spec.eigenvalues.iter().map(|e| format!("{e:+.4}")).collect();
            println!("n={n} negative {} cross block {cross:.1e}  [{}]", spec.negative, shown.join(", "));
        }
    }
    Ok(())
}

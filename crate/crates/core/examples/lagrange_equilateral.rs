//! Three bodies with arbitrary masses settle into an equilateral triangle,
//! four into a regular tetrahedron. At the normalization `λ = M` every side
//! has length 1 and the shifted Wintner–Conley matrix vanishes.
//!
//! cargo run --example lagrange_equilateral

use central_configs::config::{mutual_distances, ConfigurationMatrix, MassVector};
use central_configs::solver::{solve, SolveOptions};
use central_configs::wintner_conley::shifted_matrix;

fn main() -> central_configs::Result<()> {
    // rough simplices; the solver corrects both shape and scale
    let triangle = vec![vec![0.0, 0.0], vec![1.3, 0.1], vec![0.4, 0.9]];
    let tetrahedron = vec![vec![0.0, 0.0, 0.0], vec![1.2, 0.0, 0.1], vec![0.5, 0.8, 0.0], vec![0.4, 0.3, 0.9]];
    for (masses, seed) in [(vec![1.0, 2.0, 7.5], triangle), (vec![0.3, 1.0, 4.0, 2.2], tetrahedron)] {
        let m = MassVector::new(masses)?;
        let start = ConfigurationMatrix::from_positions(&seed)?;
        let out = solve(&start, &m, &SolveOptions::default())?;
        let cc = out.certify(&m)?;
        let r = mutual_distances(&cc.config);
        let w = shifted_matrix(&cc.config, &cc.masses, cc.lambda);
        println!("masses {:?}", m.as_slice());
        println!("  converged in {} iterations, residual {:.2e}", out.iterations, out.residual());
        for i in 0..m.len() {
            for j in (i + 1)..m.len() {
                println!("  r_{}{} = {:.15}", i + 1, j + 1, r[(i, j)]);
            }
        }
        println!("  max |Ž| = {:.2e}", w.norm());
    }
    Ok(())
}

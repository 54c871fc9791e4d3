//! Four-body planar central configurations have `rank Ž = 1`. The factor
//! `Žμ = ΔΔᵀ` gives the barycentric coordinates `Δ`, and the mutual distances
//! satisfy `m_i m_j (S_ij − λ/M) = −Δ_i Δ_j`. Convex shapes alternate in sign,
//! concave ones put the interior body alone.
//!
//! cargo run --example dziobek_coordinates

use central_configs::config::{ConfigurationMatrix, MassVector, DEFAULT_RANK_TOL};
use central_configs::dziobek::{extract_dziobek, verify_dziobek_relations};
use central_configs::solver::{solve, trapezoid_seed, SolveOptions};

fn main() -> central_configs::Result<()> {
    let h = 3f64.sqrt() / 2.0;
    let cases = [
        ("square", ConfigurationMatrix::from_positions(&[vec![1.0, 0.0], vec![0.0, 1.0], vec![-1.0, 0.0], vec![0.0, -1.0]])?, vec![1.0; 4]),
        ("trapezoid", trapezoid_seed(0.5, 1.0)?, vec![1.0, 1.0, 3.0, 3.0]),
        ("triangle + center", ConfigurationMatrix::from_positions(&[vec![0.0, 1.0], vec![-h, -0.5], vec![h, -0.5], vec![0.0, 0.0]])?, vec![1.0, 1.0, 1.0, 0.5]),
    ];
    for (name, seed, m) in cases {
        let masses = MassVector::new(m)?;
        let cc = solve(&seed, &masses, &SolveOptions::default())?.certify(&masses)?;
        let dv = extract_dziobek(&cc, DEFAULT_RANK_TOL)?;
        let res = verify_dziobek_relations(&cc.config, &cc.masses, &dv);
        let signs: String = dv.big_delta.iter().map(|d| if *d > 0.0 { '+' } else { '-' }).collect();
        println!("{name:18} Δ = {:?}", dv.big_delta.iter().map(|d| format!("{d:+.5}")).collect::<Vec<_>>());
        println!("{:18} signs {signs}, relation residual {:.1e}, z = λ/M = {:.6}", "", res.relative, dv.z);
    }
    Ok(())
}

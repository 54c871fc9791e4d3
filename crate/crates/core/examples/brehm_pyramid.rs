//! A cocircular four-body central configuration carries a fifth body on its
//! axis: the resulting pyramid is a spatial central configuration whatever
//! the fifth mass, with the apex at the same distance from every base body.
//!
//! cargo run --example brehm_pyramid

use central_configs::config::{MassVector, DEFAULT_RANK_TOL};
use central_configs::dziobek::{brehm_pyramid, extract_dziobek};
use central_configs::solver::{solve, trapezoid_seed, SolveOptions};

fn main() -> central_configs::Result<()> {
    for (a, b, masses) in [(0.785, 0.785, [1.0, 1.0, 1.0, 1.0]), (0.5, 1.0, [1.0, 1.0, 2.0, 2.0])] {
        let m = MassVector::new(masses.to_vec())?;
        let base = solve(&trapezoid_seed(a, b)?, &m, &SolveOptions::default())?.certify(&m)?;
        println!("base masses {masses:?}");
        for m5 in [0.1, 1.0, 10.0] {
            let pyr = brehm_pyramid(&base, m5)?;
            let (lo, hi) = pyr.height_margins();
            let dv = extract_dziobek(&pyr.cc, DEFAULT_RANK_TOL)?;
            println!(
                "  m5 = {m5:5}: apex distance {:.12}, height {:.9}, margins ({lo:.3e}, {hi:.3e}), |Δ_5| {:.1e}",
                pyr.apex_distance,
                pyr.height,
                dv.big_delta[4].abs()
            );
        }
    }
    Ok(())
}

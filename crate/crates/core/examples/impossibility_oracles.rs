//! Sampling oracles for sign patterns of planar Dziobek-type distance sets
//! `r_ij^{-3} = z − δ_i δ_j`. Each run reports its counterexamples (expected
//! zero), its companion run with an allowed pattern, and bounds where relevant.
//!
//! cargo run --release --example impossibility_oracles -- [samples] [seed]

use central_configs::oracles::run_oracle;

fn main() -> central_configs::Result<()> {
    let mut args = std::env::args().skip(1);
    let samples: usize = args.next().and_then(|a| a.parse().ok()).unwrap_or(5_000);
    let seed: u64 = args.next().and_then(|a| a.parse().ok()).unwrap_or(0);
    for name in ["5.1", "5.2", "5.3", "5.4"] {
        let r = run_oracle(name, samples, seed)?;
        println!(
            "{name} {}: {} samples, {} feasible, {} counterexamples, {} boundary, {} failed assertions",
            r.pattern, r.samples, r.feasible, r.counterexamples, r.boundary, r.violations
        );
        if let Some(c) = &r.companion {
            println!("    companion {}: {} feasible, {} in the forbidden arrangement", c.pattern, c.feasible, c.allowed_instances);
        }
        for case in &r.cases {
            println!("    case {}: {} instances, max r34/r12 = {:.6} (bound {:.6})", case.order, case.count, case.max_ratio, case.bound);
        }
        if let Some(miss) = r.closest_miss.or(r.companion.as_ref().and_then(|c| c.closest_miss)) {
            println!("    closest relative miss of a five-point closure: {miss:.3}");
        }
    }
    Ok(())
}

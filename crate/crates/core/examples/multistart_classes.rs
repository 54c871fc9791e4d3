//! Multistart search for planar central configurations of five bodies,
//! grouped into similarity classes. Each class is reported with its rank of
//! `Ž` and the signs of its vertical spectrum.
//!
//! cargo run --release --example multistart_classes -- [masses...]

use central_configs::config::{MassVector, DEFAULT_RANK_TOL};
use central_configs::hessian::vertical_spectrum;
use central_configs::solver::{multistart, MultistartOptions};
use central_configs::wintner_conley::{rank_report, shifted_matrix};
use nalgebra::DVector;

fn main() -> central_configs::Result<()> {
    let args: Vec<f64> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let masses = if args.is_empty() { MassVector::equal(5) } else { MassVector::new(args)? };
    let opts = MultistartOptions { starts: 200, seed: 1, ..MultistartOptions::default() };
    let report = multistart(&masses, &opts);
    println!(
        "{} classes from {} starts ({} collisions, {} not converged)",
        report.classes.len(),
        opts.starts,
        report.collisions,
        report.nonconverged
    );
    for (k, class) in report.classes.iter().enumerate() {
        let cc = class.representative.embed(3)?;
        let w = shifted_matrix(&cc.config, &cc.masses, cc.lambda);
        let ranks = rank_report(&w, &cc.config, DEFAULT_RANK_TOL);
        let axis = DVector::from_vec(vec![0.0, 0.0, 1.0]);
        let spec = vertical_spectrum(&cc, &axis)?;
        println!(
            "class {k:2}: hits {:3}  dim {}  rank Ž {}  vertical (−,0,+) = ({}, {}, {})",
            class.hits, class.dimension, ranks.rank_zhat, spec.negative, spec.zero, spec.positive
        );
    }
    Ok(())
}

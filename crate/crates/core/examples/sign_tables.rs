//! Barycentric sign tables of planar five-body configurations. Sweeping the
//! plane of affine dependencies through half a turn lists every sign pattern
//! a configuration admits; representatives of each shape class reproduce the
//! reference tables.
//!
//! cargo run --example sign_tables

use central_configs::geometry::{sign_sweep, table_representatives};

fn main() -> central_configs::Result<()> {
    for (name, config) in table_representatives() {
        let sweep = sign_sweep(&config)?;
        println!("{name} (matches {:?})", sweep.matching_table());
        for row in &sweep.rows {
            println!("    {row}");
        }
    }
    Ok(())
}

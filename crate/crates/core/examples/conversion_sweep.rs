//! Optimised S along the second-pulse area for several pair parameters.
//!
//! cargo run --release --example conversion_sweep

use bellmag::optimizer::{sweep_g2tau, GridAxis, DEFAULT_P_LIST};
use bellmag::OptimizerBudget;

pub fn run_example() -> bellmag::Result<()> {
    let grid = GridAxis::new("g2tau", 0.25, 3.0, 0.25)?;
    let rows = sweep_g2tau(&DEFAULT_P_LIST, &grid, 1.0, &OptimizerBudget::default())?;
    print!("G2~ tau2     T    ");
    for p in DEFAULT_P_LIST {
        print!("  p = {p:<5}");
    }
    println!();
    let n = grid.values().len();
    for i in 0..n {
        print!("{:>8.2}  {:.4}", rows[i].area, rows[i].derived);
        for curve in 0..DEFAULT_P_LIST.len() {
            print!("  {:>9.4}", rows[curve * n + i].s);
        }
        println!();
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> bellmag::Result<()> {
    run_example()
}

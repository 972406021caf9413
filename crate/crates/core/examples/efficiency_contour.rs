//! Optimised S over first-pulse area and detector efficiency, and the lowest
//! efficiency that still violates the inequality.
//!
//! cargo run --release --example efficiency_contour

use bellmag::optimizer::{contour_eta, eta_threshold, GridAxis};
use bellmag::OptimizerBudget;

pub fn run_example() -> bellmag::Result<()> {
    let g1 = GridAxis::new("g1tau", 0.05, 1.0, 0.05)?;
    let eta = GridAxis::new("eta", 0.6, 1.0, 0.05)?;
    let rows = contour_eta(&g1, &eta, &OptimizerBudget::default())?;

    print!("eta \\ G1~tau1");
    for g in g1.values().iter().step_by(3) {
        print!(" {g:>6.2}");
    }
    println!();
    for chunk in rows.chunks(g1.values().len()) {
        print!("{:>13.2}", chunk[0].eta);
        for row in chunk.iter().step_by(3) {
            print!(" {:>6.3}", row.s);
        }
        println!();
    }
    match eta_threshold(&rows) {
        Some(eta) => println!("lowest violating efficiency on this grid: {eta:.2}"),
        None => println!("no violation on this grid"),
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> bellmag::Result<()> {
    run_example()
}

//! Optimised S along the first-pulse area for perfect conversion and
//! detection, and the location of the peak.
//!
//! cargo run --release --example peak_violation

use bellmag::core_model::SqueezeParam;
use bellmag::optimizer::{peak, sweep_g1tau, GridAxis};
use bellmag::OptimizerBudget;

pub fn run_example() -> bellmag::Result<()> {
    let rows = sweep_g1tau(&[1.0], &GridAxis::g1tau_default(), 1.0, &OptimizerBudget::default())?;
    for row in rows.iter().step_by(10) {
        println!("G1~ tau1 = {:.2}  p = {:.4}  S = {:.4}", row.area, row.derived, row.s);
    }
    let best = peak(&rows, |r| r.s).expect("non-empty sweep");
    let squeeze = SqueezeParam::from_pulse_area(best.area)?;
    println!(
        "peak: S = {:.4} at G1~ tau1 = {:.2} (p = {:.4}, r = {:.4})",
        best.s,
        best.area,
        best.derived,
        squeeze.squeezing_r()
    );
    let s = best.settings;
    println!(
        "settings: alpha1 = {:.4}, alpha2 = {:.4}, beta1 = {:.4}, beta2 = {:.4}",
        s.alpha1.re, s.alpha2.re, s.beta1.re, s.beta2.re
    );
    Ok(())
}

#[allow(dead_code)]
fn main() -> bellmag::Result<()> {
    run_example()
}

//! Laboratory parameters mapped onto the protocol, with the condition checks.
//!
//! cargo run --release --example feasibility_report

use std::path::Path;

use bellmag::feasibility::{analyze, compare_thermal, effective_couplings, load_config, ExperimentParams};
use bellmag::OptimizerBudget;

pub fn run_example() -> bellmag::Result<()> {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("data/reference_preset.json");
    let params = load_config(&path)?;
    let report = analyze(&params)?.with_optimized_s(&OptimizerBudget::default())?;
    print!("{}", report.to_text());

    let omega_m = params.omega_m.unwrap_or(7.95e9);
    let thermal = compare_thermal(omega_m, 0.01, 0.026)?;
    println!(
        "n_th at 10 mK: {:.3e} (rad/s reading), {:.3e} (Hz reading); config uses {}",
        thermal.angular, thermal.ordinary, thermal.quoted
    );

    // a drive strong enough for G = 73 kHz with g = 10.4 Hz
    let mut driven = ExperimentParams::reference_preset();
    driven.effective_couplings = None;
    driven.eps1 = 73e3 / driven.g * driven.kappa_ex1 / 2.0;
    driven.eps2 = driven.eps1;
    let (g1, _) = effective_couplings(&driven)?;
    println!("pump amplitude {:.0} gives G = {:.1} kHz", g1 / driven.g, g1 / 1e3);
    Ok(())
}

#[allow(dead_code)]
fn main() -> bellmag::Result<()> {
    run_example()
}

//! Both pulses integrated without adiabatic elimination, against the
//! adiabatic closed forms, and the deviation across coupling strengths.
//!
//! cargo run --release --example langevin_dynamics

use bellmag::dynamics::{closed_form, integrate_first_pulse, integrate_second_pulse, LangevinParams, PulseKind};

pub fn run_example() -> bellmag::Result<()> {
    let squeezer = LangevinParams::dimensionless(PulseKind::Squeezer, 0.02);
    let tau1 = squeezer.duration_for_area(0.25);
    let end = integrate_first_pulse(&squeezer, tau1, squeezer.default_step(tau1))?;
    let target = closed_form(&squeezer, 0.25, 0.0);
    println!("first pulse, G/kappa = 0.02, G~ tau = 0.25");
    println!("  magnon  {:.5} (adiabatic {:.5})", end.magnon_occupation, target.magnon_occupation);
    println!("  output  {:.5} (adiabatic {:.5})", end.output_occupation, target.output_occupation);
    println!("  cavity  {:.3e} (adiabatic {:.3e})", end.cavity_occupation, target.cavity_occupation);

    let splitter = LangevinParams::dimensionless(PulseKind::BeamSplitter, 0.02);
    let tau2 = splitter.duration_for_area(1.5);
    let m0 = end.magnon_occupation;
    let end = integrate_second_pulse(&splitter, tau2, splitter.default_step(tau2), m0)?;
    let target = closed_form(&splitter, 1.5, m0);
    println!("second pulse, G~ tau = 1.5, starting from {m0:.5}");
    println!("  magnon  {:.5} (adiabatic {:.5})", end.magnon_occupation, target.magnon_occupation);
    println!("  output  {:.5} (adiabatic {:.5})", end.output_occupation, target.output_occupation);

    // thermal magnon bath on the first pulse
    let noisy = squeezer.with_magnon_bath(1e-4, 1.0);
    let warm = integrate_first_pulse(&noisy, tau1, noisy.default_step(tau1))?;
    println!("with gamma n_th tau = {:.3}: magnon {:.5}", 1e-4 * tau1, warm.magnon_occupation);

    for ratio in [0.01, 0.02, 0.05, 0.1] {
        let params = LangevinParams::dimensionless(PulseKind::Squeezer, ratio);
        let tau = params.duration_for_area(0.25);
        let end = integrate_first_pulse(&params, tau, params.default_step(tau))?;
        let dev = (end.magnon_occupation - target_squeezed()) / target_squeezed();
        println!("G/kappa = {ratio:<5} relative deviation {dev:+.4}");
    }
    Ok(())
}

fn target_squeezed() -> f64 {
    0.5f64.exp() - 1.0
}

#[allow(dead_code)]
fn main() -> bellmag::Result<()> {
    run_example()
}

//! Click probabilities, correlations and S for a fixed set of displacements.
//!
//! cargo run --example closed_forms

use bellmag::core_model::{chsh_terms, p_from_g1tau, SqueezeParam};
use bellmag::{chsh_s, chsh_s_eta, joint_click_prob, marginal_click_prob, Complex64, MeasurementSettings};

pub fn run_example() -> bellmag::Result<()> {
    let squeeze = SqueezeParam::from_pulse_area(0.25)?;
    let p = squeeze.p();
    let t = 0.95;
    println!("G1~ tau1 = 0.25 -> p = {p:.4}, squeezing r = {:.4}", squeeze.squeezing_r());

    let alpha = Complex64::new(0.16, 0.0);
    let beta = Complex64::new(-0.52, 0.0);
    println!("no-click (alpha, beta)   {:.6}", joint_click_prob(p, t, alpha, beta)?);
    println!("no-click alpha only      {:.6}", marginal_click_prob(p, t, alpha)?);

    let settings = MeasurementSettings::real(0.156, -0.523, 0.156, -0.523);
    let terms = chsh_terms(p, t, &settings)?;
    println!("E11 E12 E21 E22          {:.4} {:.4} {:.4} {:.4}", terms[0], terms[1], terms[2], terms[3]);
    println!("S (T = {t})              {:.4}", chsh_s(p, t, &settings)?);
    println!("S (T = 1)                {:.4}", chsh_s(p, 1.0, &settings)?);
    for eta in [1.0, 0.9, 0.8] {
        println!("S (T = 1, eta = {eta})      {:.4}", chsh_s_eta(p_from_g1tau(0.25)?, eta, &settings)?);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> bellmag::Result<()> {
    run_example()
}

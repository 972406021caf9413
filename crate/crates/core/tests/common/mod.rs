#![allow(dead_code)]

use bellmag::core_model::MeasurementSettings;
use bellmag::Complex64;
use rand::Rng;

/// Exact first-pulse magnon occupation with vacuum inputs and no magnon
/// damping, from the analytic 2x2 propagator of `(a, m^dag)`.
///
/// `m^dag(t) = Phi_mm m^dag(0) + Phi_ma a(0) + sqrt(k) int Phi_ma(t-s) a_in(s) ds`
/// gives `<m^dag m> = |Phi_ma(t)|^2 + k int_0^t |Phi_ma|^2` with
/// `Phi_ma = iG (e^{l+ t} - e^{l- t}) / (l+ - l-)`, `l = -k/4 +- sqrt(k^2/16 + G^2)`.
pub fn exact_squeezer_magnon(coupling: f64, kappa: f64, tau: f64) -> f64 {
    let root = (kappa * kappa / 16.0 + coupling * coupling).sqrt();
    let (lp, lm) = (-kappa / 4.0 + root, -kappa / 4.0 - root);
    let scale = coupling * coupling / (lp - lm).powi(2);
    let phi2 = scale * ((lp * tau).exp() - (lm * tau).exp()).powi(2);
    let integral = (2.0 * lp * tau).exp_m1() / (2.0 * lp) - 2.0 * ((lp + lm) * tau).exp_m1() / (lp + lm)
        + (2.0 * lm * tau).exp_m1() / (2.0 * lm);
    phi2 + kappa * scale * integral
}

/// Exact beam-splitter magnon occupation `|Phi_mm(t)|^2 m0` (vacuum input
/// adds nothing to the normally ordered moment), for `G < k/4`.
pub fn exact_splitter_magnon(coupling: f64, kappa: f64, tau: f64, m0: f64) -> f64 {
    let root = (kappa * kappa / 16.0 - coupling * coupling).sqrt();
    let (l1, l2) = (-kappa / 4.0 + root, -kappa / 4.0 - root);
    let phi = (-l2 * (l1 * tau).exp() + l1 * (l2 * tau).exp()) / (l1 - l2);
    phi * phi * m0
}

pub fn disc_point(rng: &mut impl Rng, radius: f64) -> Complex64 {
    let r = radius * rng.gen::<f64>().sqrt();
    Complex64::from_polar(r, rng.gen_range(0.0..std::f64::consts::TAU))
}

pub fn random_settings(rng: &mut impl Rng, radius: f64) -> MeasurementSettings {
    MeasurementSettings::new(
        disc_point(rng, radius),
        disc_point(rng, radius),
        disc_point(rng, radius),
        disc_point(rng, radius),
    )
}

/// Parsed CSV: header and numeric rows.
pub fn read_csv(text: &str) -> (Vec<String>, Vec<Vec<f64>>) {
    let mut lines = text.lines();
    let header = lines
        .next()
        .expect("header")
        .split(',')
        .map(str::to_string)
        .collect();
    let rows = lines
        .map(|l| l.split(',').map(|v| v.parse().expect("numeric field")).collect())
        .collect();
    (header, rows)
}

pub fn column(header: &[String], name: &str) -> usize {
    header.iter().position(|h| h == name).unwrap_or_else(|| panic!("no column {name}"))
}

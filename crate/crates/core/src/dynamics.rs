//! Second-moment dynamics of the linearised Langevin equations, without
//! adiabatic elimination of the cavity.
//!
//! The equations are linear, so the normally-ordered moments
//! `S_ij = <x_i^dag x_j>` of a three-component vector obey a closed ODE:
//!
//! ```text
//! dS/dt = conj(M) S + S M^T + D(t)
//! ```
//!
//! * squeezer pulse, `x = (a, m^dag, b)`:
//!   `da = (-k/2 a - iG m^dag) dt + sqrt(k) dA_in`,
//!   `dm^dag = (iG a - g/2 m^dag) dt + sqrt(g) dM_in^dag`
//! * beam-splitter pulse, `x = (a, m, b)`:
//!   `da = (-k/2 a - iG m) dt + sqrt(k) dA_in`,
//!   `dm = (-iG a - g/2 m) dt + sqrt(g) dM_in`
//!
//! `b(t) = int_0^t w(s) a_out(s) ds` accumulates the output field
//! `a_out = -a_in + sqrt(k) a` with the temporal-mode weight `w` (`e^{+Gt}` for
//! the squeezer, `e^{-Gt}` for the beam splitter, `G = 2G^2/k`), so
//! `db = w sqrt(k) a dt - w dA_in`.
//!
//! The diffusion matrix collects `<dxi_i^dag dxi_j>/dt`. For an optical input
//! with occupation `n_opt` the optical part is
//!
//! ```text
//! D_aa = k n_opt,   D_ab = D_ba = -sqrt(k) w n_opt,   D_bb = w^2 n_opt
//! ```
//!
//! and the optical input is vacuum here (`n_opt = 0`), so the direct
//! feedthrough of `a_in` into the output mode leaves normally-ordered moments
//! untouched. The magnon bath contributes `D_mm = g (n_th + 1)` in the squeezer
//! frame (the moment tracked is `<m m^dag>`) and `g n_th` in the beam-splitter
//! frame.
//!
//! Time integration is classical fixed-step RK4.

use nalgebra::Matrix3;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{check_domain, Error, Result};

/// Occupation of the optical input noise. Optical thermal noise is negligible
/// even at room temperature.
const OPTICAL_INPUT_OCCUPATION: f64 = 0.0;

/// Largest step accepted, in units of `1/kappa`.
pub const MAX_STEP_KAPPA: f64 = 0.01;

/// Slack on the Gram-matrix (Cauchy-Schwarz) checks.
const GRAM_TOL: f64 = 1e-8;

const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PulseKind {
    /// First pulse: two-mode squeezing between cavity mode 1 and the magnon.
    Squeezer,
    /// Second pulse: beam-splitter exchange between the magnon and cavity mode 2.
    BeamSplitter,
}

/// Rates of one pulse, all in rad/s (or any common angular unit).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LangevinParams {
    /// Linearised coupling `G`.
    pub coupling: f64,
    /// Cavity linewidth, taken as fully external.
    pub kappa: f64,
    pub gamma: f64,
    /// Thermal occupation of the magnon bath.
    pub n_th: f64,
    pub kind: PulseKind,
}

impl LangevinParams {
    pub fn new(kind: PulseKind, coupling: f64, kappa: f64) -> Self {
        Self {
            coupling,
            kappa,
            gamma: 0.0,
            n_th: 0.0,
            kind,
        }
    }

    pub fn with_magnon_bath(mut self, gamma: f64, n_th: f64) -> Self {
        self.gamma = gamma;
        self.n_th = n_th;
        self
    }

    /// Parameters with `kappa = 1` for a given ratio `G/kappa`.
    pub fn dimensionless(kind: PulseKind, coupling_ratio: f64) -> Self {
        Self::new(kind, coupling_ratio, 1.0)
    }

    /// Adiabatic rate `2 G^2 / kappa`.
    pub fn effective_rate(&self) -> f64 {
        2.0 * self.coupling * self.coupling / self.kappa
    }

    /// Pulse duration giving the dimensionless area `G~ tau`.
    pub fn duration_for_area(&self, area: f64) -> f64 {
        area / self.effective_rate()
    }

    /// `min(0.005/kappa, tau/2000)`.
    pub fn default_step(&self, tau: f64) -> f64 {
        (0.005 / self.kappa).min(tau / 2000.0)
    }

    fn validate(&self) -> Result<()> {
        check_domain("G", self.coupling, self.coupling >= 0.0, ">= 0")?;
        check_domain("kappa", self.kappa, self.kappa > 0.0, "> 0")?;
        check_domain("gamma", self.gamma, self.gamma >= 0.0, ">= 0")?;
        check_domain("n_th", self.n_th, self.n_th >= 0.0, ">= 0")
    }
}

/// Normally-ordered moments at one instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentState {
    pub time: f64,
    /// `<a^dag a>`.
    pub cavity_occupation: f64,
    /// `<m^dag m>`.
    pub magnon_occupation: f64,
    /// `<a m>` for the squeezer, `<a^dag m>` for the beam splitter.
    pub cavity_magnon: Complex64,
    /// `<B^dag B>` of the normalised output temporal mode accumulated so far.
    pub output_occupation: f64,
    /// `<B m>` for the squeezer, `<B^dag m>` for the beam splitter.
    pub output_magnon: Complex64,
    /// `<B^dag a>`.
    pub output_cavity: Complex64,
}

impl MomentState {
    /// Cauchy-Schwarz defect of the cavity-magnon correlation; positive means
    /// violated.
    pub fn cauchy_schwarz_defect(&self, kind: PulseKind) -> f64 {
        let bound = match kind {
            PulseKind::Squeezer => (self.cavity_occupation + 1.0) * self.magnon_occupation,
            PulseKind::BeamSplitter => self.cavity_occupation * self.magnon_occupation,
        };
        self.cavity_magnon.norm_sqr() - bound
    }
}

/// Sampled integration result.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub kind: PulseKind,
    pub samples: Vec<MomentState>,
}

impl Trajectory {
    pub fn last(&self) -> MomentState {
        *self.samples.last().expect("trajectory always holds the initial state")
    }
}

struct MomentSystem {
    params: LangevinParams,
    rate: f64,
    /// `+1` squeezer, `-1` beam splitter.
    weight_sign: f64,
    /// Squared normalisation of the output temporal mode over the whole pulse.
    norm_sq: f64,
    drift_const: Matrix3<Complex64>,
    magnon_diffusion: f64,
}

impl MomentSystem {
    fn new(params: LangevinParams, tau: f64) -> Self {
        let (g, k, gm) = (params.coupling, params.kappa, params.gamma);
        let rate = params.effective_rate();
        let (weight_sign, magnon_row, magnon_diffusion) = match params.kind {
            PulseKind::Squeezer => (1.0, I * g, gm * (params.n_th + 1.0)),
            PulseKind::BeamSplitter => (-1.0, -I * g, gm * params.n_th),
        };
        let zero = Complex64::new(0.0, 0.0);
        let drift_const = Matrix3::new(
            Complex64::new(-k / 2.0, 0.0),
            -I * g,
            zero,
            magnon_row,
            Complex64::new(-gm / 2.0, 0.0),
            zero,
            zero,
            zero,
            zero,
        );
        let area = rate * tau;
        let norm_sq = if area == 0.0 {
            1.0 / tau
        } else {
            2.0 * rate / (weight_sign * (2.0 * weight_sign * area).exp_m1())
        };
        Self {
            params,
            rate,
            weight_sign,
            norm_sq,
            drift_const,
            magnon_diffusion,
        }
    }

    fn weight(&self, t: f64) -> f64 {
        (self.weight_sign * self.rate * t).exp()
    }

    fn derivative(&self, t: f64, s: &Matrix3<Complex64>) -> Matrix3<Complex64> {
        let w = self.weight(t);
        let k = self.params.kappa;
        let mut m = self.drift_const;
        m[(2, 0)] = Complex64::new(w * k.sqrt(), 0.0);

        let mut d = Matrix3::zeros();
        let n_opt = OPTICAL_INPUT_OCCUPATION;
        d[(0, 0)] = Complex64::new(k * n_opt, 0.0);
        d[(0, 2)] = Complex64::new(-k.sqrt() * w * n_opt, 0.0);
        d[(2, 0)] = d[(0, 2)];
        d[(2, 2)] = Complex64::new(w * w * n_opt, 0.0);
        d[(1, 1)] = Complex64::new(self.magnon_diffusion, 0.0);

        // S stays Hermitian, so S m^T = (conj(m) S)^dag; conj(m) has five
        // non-zero entries, all in the first two columns
        let (r0, r1) = (s.row(0), s.row(1));
        let x = Matrix3::from_rows(&[
            r0 * m[(0, 0)].conj() + r1 * m[(0, 1)].conj(),
            r0 * m[(1, 0)].conj() + r1 * m[(1, 1)].conj(),
            r0 * m[(2, 0)].conj(),
        ]);
        x + x.adjoint() + d
    }

    fn moments(&self, t: f64, s: &Matrix3<Complex64>) -> MomentState {
        let (magnon_occupation, cavity_magnon, output_magnon) = match self.params.kind {
            // x_1 = m^dag: S_11 = <m m^dag>, S_10 = <m a>, S_12 = <m b>
            PulseKind::Squeezer => (s[(1, 1)].re - 1.0, s[(1, 0)], s[(1, 2)]),
            // x_1 = m: S_01 = <a^dag m>, S_21 = <b^dag m>
            PulseKind::BeamSplitter => (s[(1, 1)].re, s[(0, 1)], s[(2, 1)]),
        };
        let c = self.norm_sq.sqrt();
        MomentState {
            time: t,
            cavity_occupation: s[(0, 0)].re,
            magnon_occupation,
            cavity_magnon,
            output_occupation: self.norm_sq * s[(2, 2)].re,
            output_magnon: output_magnon * c,
            output_cavity: s[(2, 0)] * c,
        }
    }

    /// Linear-theory ceiling on `tr S` restricted to the cavity and magnon.
    fn growth_bound(&self, t: f64, initial_trace: f64) -> f64 {
        let injected = t * (self.magnon_diffusion + self.params.kappa * OPTICAL_INPUT_OCCUPATION);
        (initial_trace + injected) * (2.0 * self.params.coupling * t).exp() * (1.0 + 1e-6) + 1e-9
    }
}

/// Integrates one pulse of duration `tau` with step at most `dt`, starting from
/// cavity vacuum and a thermal magnon of occupation `magnon_occupation0`.
/// Every `record_every` steps (and at the end) a sample is stored.
pub fn integrate(
    params: &LangevinParams,
    magnon_occupation0: f64,
    tau: f64,
    dt: f64,
    record_every: Option<usize>,
) -> Result<Trajectory> {
    params.validate()?;
    check_domain("tau", tau, tau > 0.0, "> 0")?;
    check_domain(
        "dt",
        dt,
        dt > 0.0 && dt <= MAX_STEP_KAPPA / params.kappa * (1.0 + 1e-12),
        "0 < dt <= 0.01/kappa",
    )?;
    check_domain("m_occ0", magnon_occupation0, magnon_occupation0 >= 0.0, ">= 0")?;

    let system = MomentSystem::new(*params, tau);
    let steps = (tau / dt).ceil().max(1.0) as usize;
    let h = tau / steps as f64;

    let mut s: Matrix3<Complex64> = Matrix3::zeros();
    s[(1, 1)] = Complex64::new(
        match params.kind {
            PulseKind::Squeezer => magnon_occupation0 + 1.0,
            PulseKind::BeamSplitter => magnon_occupation0,
        },
        0.0,
    );
    let initial_trace = s[(1, 1)].re;

    let mut samples = vec![system.moments(0.0, &s)];
    for step in 0..steps {
        let t = step as f64 * h;
        let k1 = system.derivative(t, &s);
        let k2 = system.derivative(t + h / 2.0, &(s + k1 * Complex64::new(h / 2.0, 0.0)));
        let k3 = system.derivative(t + h / 2.0, &(s + k2 * Complex64::new(h / 2.0, 0.0)));
        let k4 = system.derivative(t + h, &(s + k3 * Complex64::new(h, 0.0)));
        s += (k1 + (k2 + k3) * Complex64::new(2.0, 0.0) + k4) * Complex64::new(h / 6.0, 0.0);

        let t_next = (step + 1) as f64 * h;
        check_step(&system, &s, t_next, initial_trace)?;
        let last = step + 1 == steps;
        if last || record_every.is_some_and(|every| (step + 1) % every.max(1) == 0) {
            samples.push(system.moments(t_next, &s));
        }
    }
    Ok(Trajectory {
        kind: params.kind,
        samples,
    })
}

fn check_step(system: &MomentSystem, s: &Matrix3<Complex64>, t: f64, initial_trace: f64) -> Result<()> {
    if s.iter().any(|z| !z.is_finite()) {
        return Err(Error::Unstable {
            time: t,
            reason: "non-finite moment".into(),
        });
    }
    let trace = s[(0, 0)].re + s[(1, 1)].re;
    if trace > system.growth_bound(t, initial_trace) {
        return Err(Error::Unstable {
            time: t,
            reason: format!("moment trace {trace:.3e} exceeds the linear-theory bound"),
        });
    }
    let scale = 1.0 + trace;
    for i in 0..2 {
        if s[(i, i)].re < -GRAM_TOL * scale {
            return Err(Error::Unstable {
                time: t,
                reason: "negative occupation".into(),
            });
        }
    }
    let gram = s[(0, 1)].norm_sqr() - s[(0, 0)].re * s[(1, 1)].re;
    if gram > GRAM_TOL * scale * scale {
        return Err(Error::Unstable {
            time: t,
            reason: "Cauchy-Schwarz violated".into(),
        });
    }
    Ok(())
}

/// First pulse from the joint vacuum; returns the final moments.
pub fn integrate_first_pulse(params: &LangevinParams, tau1: f64, dt: f64) -> Result<MomentState> {
    let params = LangevinParams {
        kind: PulseKind::Squeezer,
        ..*params
    };
    Ok(integrate(&params, 0.0, tau1, dt, None)?.last())
}

/// Second pulse with the magnon starting at occupation `m_occ0`.
pub fn integrate_second_pulse(
    params: &LangevinParams,
    tau2: f64,
    dt: f64,
    m_occ0: f64,
) -> Result<MomentState> {
    let params = LangevinParams {
        kind: PulseKind::BeamSplitter,
        ..*params
    };
    Ok(integrate(&params, m_occ0, tau2, dt, None)?.last())
}

/// `<B^dag B>` of the output temporal mode at the end of the pulse. The
/// magnon starts in vacuum for the squeezer and at `m_occ0` for the beam
/// splitter.
pub fn output_mode_moment(params: &LangevinParams, tau: f64, dt: f64, m_occ0: f64) -> Result<f64> {
    let start = match params.kind {
        PulseKind::Squeezer => 0.0,
        PulseKind::BeamSplitter => m_occ0,
    };
    Ok(integrate(params, start, tau, dt, None)?.last().output_occupation)
}

/// Adiabatic-elimination predictions for the end of a pulse of area `area`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClosedForm {
    pub magnon_occupation: f64,
    pub output_occupation: f64,
    /// Slaved cavity occupation `(2G/kappa)^2 <m m^dag>` or `(2G/kappa)^2 <m^dag m>`.
    pub cavity_occupation: f64,
}

pub fn closed_form(params: &LangevinParams, area: f64, m_occ0: f64) -> ClosedForm {
    let slave = (2.0 * params.coupling / params.kappa).powi(2);
    match params.kind {
        PulseKind::Squeezer => {
            let grown = (2.0 * area).exp_m1();
            ClosedForm {
                magnon_occupation: grown,
                output_occupation: grown,
                cavity_occupation: slave * (grown + 1.0),
            }
        }
        PulseKind::BeamSplitter => {
            let left = (-2.0 * area).exp() * m_occ0;
            ClosedForm {
                magnon_occupation: left,
                output_occupation: -(-2.0 * area).exp_m1() * m_occ0,
                cavity_occupation: slave * left,
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdiabaticScanRow {
    pub coupling_ratio: f64,
    pub magnon_occupation: f64,
    pub target: f64,
    pub relative_deviation: f64,
}

/// First-pulse magnon occupation across `G/kappa` at fixed pulse area,
/// compared with the adiabatic result `e^{2 G~ tau} - 1`.
pub fn adiabatic_error_scan(ratios: &[f64], area: f64) -> Result<Vec<AdiabaticScanRow>> {
    ratios
        .par_iter()
        .map(|&ratio| {
            let params = LangevinParams::dimensionless(PulseKind::Squeezer, ratio);
            let tau = params.duration_for_area(area);
            let dt = params.default_step(tau);
            let end = integrate_first_pulse(&params, tau, dt)?;
            let target = (2.0 * area).exp_m1();
            Ok(AdiabaticScanRow {
                coupling_ratio: ratio,
                magnon_occupation: end.magnon_occupation,
                target,
                relative_deviation: (end.magnon_occupation - target).abs() / target,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_coupling_keeps_vacuum() {
        let params = LangevinParams::new(PulseKind::Squeezer, 0.0, 1.0);
        let end = integrate_first_pulse(&params, 50.0, 0.005).unwrap();
        assert_eq!(end.magnon_occupation, 0.0);
        assert_eq!(end.cavity_occupation, 0.0);
        assert_eq!(end.output_occupation, 0.0);
        assert_eq!(output_mode_moment(&params, 50.0, 0.005, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn zero_coupling_keeps_magnon_population() {
        let params = LangevinParams::new(PulseKind::BeamSplitter, 0.0, 1.0);
        let end = integrate_second_pulse(&params, 20.0, 0.005, 0.6487).unwrap();
        assert!((end.magnon_occupation - 0.6487).abs() < 1e-15);
        assert_eq!(end.output_occupation, 0.0);
    }

    #[test]
    fn rejects_coarse_steps() {
        let params = LangevinParams::dimensionless(PulseKind::Squeezer, 0.02);
        assert!(integrate_first_pulse(&params, 10.0, 0.05).is_err());
        assert!(integrate_first_pulse(&params, -1.0, 0.005).is_err());
    }

    #[test]
    fn cauchy_schwarz_along_trajectory() {
        let params = LangevinParams::dimensionless(PulseKind::Squeezer, 0.1).with_magnon_bath(1e-3, 0.5);
        let tau = params.duration_for_area(0.25);
        let traj = integrate(&params, 0.0, tau, params.default_step(tau), Some(10)).unwrap();
        for s in &traj.samples {
            assert!(s.cauchy_schwarz_defect(PulseKind::Squeezer) <= 1e-10 * (1.0 + s.magnon_occupation));
            assert!(s.cavity_occupation >= -1e-10 && s.magnon_occupation >= -1e-10);
        }
    }

    #[test]
    fn closed_forms() {
        let sq = closed_form(&LangevinParams::dimensionless(PulseKind::Squeezer, 0.02), 0.25, 0.0);
        assert!((sq.magnon_occupation - 0.6487).abs() < 1e-4);
        let bs = closed_form(&LangevinParams::dimensionless(PulseKind::BeamSplitter, 0.02), 1.5, 0.6487);
        assert!((bs.magnon_occupation - 0.0323).abs() < 1e-4);
        assert!((bs.output_occupation - 0.9502 * 0.6487).abs() < 1e-4);
    }
}

//! Closed-form CHSH kernel for the photon pair emitted by the two pump pulses.
//!
//! Everything here is a pure function of its arguments. The two-mode state is
//! characterised by the pair-generation parameter `p` (first pulse) and the
//! magnon-to-photon conversion efficiency `T` (second pulse); measurements are
//! displaced on-off detections projecting onto coherent states `|alpha>`.
//!
//! For `T < 1` the joint and marginal probabilities are evaluated on the
//! magnon-vacuum block of the emitted state, whose trace is `(1-p)/(1-pT)`.
//! No renormalisation is applied; the missing weight enters the correlation
//! function as a deterministic `(-1, -1)` outcome pair, so CHSH values stay
//! between the local and Tsirelson bounds.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{check_domain, Result};

/// Slack used when deciding whether a raw probability left `[0, 1]`.
pub const PROBABILITY_SLACK: f64 = 1e-12;

/// Squeezing produced by the first (two-mode squeezing) pulse.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SqueezeParam {
    g1tau: f64,
    p: f64,
}

impl SqueezeParam {
    pub fn from_pulse_area(g1tau: f64) -> Result<Self> {
        let p = p_from_g1tau(g1tau)?;
        Ok(Self { g1tau, p })
    }

    /// Builds the parameter from `p` directly; the pulse area is recovered as
    /// `-ln(1-p)/2`.
    pub fn from_p(p: f64) -> Result<Self> {
        check_p(p)?;
        Ok(Self {
            g1tau: -(-p).ln_1p() / 2.0,
            p,
        })
    }

    pub fn g1tau(&self) -> f64 {
        self.g1tau
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    /// Equivalent two-mode squeezing parameter `r` with `p = tanh^2 r`.
    pub fn squeezing_r(&self) -> f64 {
        self.p.sqrt().atanh()
    }
}

/// Magnon-to-photon conversion of the second (beam-splitter) pulse.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConversionParam {
    /// `f64::INFINITY` when `T = 1` was entered directly.
    g2tau: f64,
    t: f64,
}

impl ConversionParam {
    pub fn from_pulse_area(g2tau: f64) -> Result<Self> {
        let t = t_from_g2tau(g2tau)?;
        Ok(Self { g2tau, t })
    }

    pub fn from_efficiency(t: f64) -> Result<Self> {
        check_t(t)?;
        let g2tau = if t == 1.0 {
            f64::INFINITY
        } else {
            -(-t).ln_1p() / 2.0
        };
        Ok(Self { g2tau, t })
    }

    pub fn g2tau(&self) -> f64 {
        self.g2tau
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    /// `T' = e^{2 G2 tau2} T = e^{2 G2 tau2} - 1`, the coefficient appearing in
    /// the normal-ordered beam-splitter propagator. Infinite for `T = 1`.
    pub fn t_prime(&self) -> f64 {
        (2.0 * self.g2tau).exp_m1()
    }
}

/// Overall detection efficiency `eta = eta_d * lambda_t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Efficiency {
    eta: f64,
    components: Option<(f64, f64)>,
}

impl Efficiency {
    pub fn new(eta: f64) -> Result<Self> {
        check_eta(eta)?;
        Ok(Self {
            eta,
            components: None,
        })
    }

    /// Detector efficiency times transmissivity of the displacement beam splitter.
    pub fn from_components(detector: f64, transmissivity: f64) -> Result<Self> {
        check_eta(detector)?;
        check_eta(transmissivity)?;
        Ok(Self {
            eta: detector * transmissivity,
            components: Some((detector, transmissivity)),
        })
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    /// `(eta_d, lambda_t)` when the efficiency was built from its factors.
    pub fn components(&self) -> Option<(f64, f64)> {
        self.components
    }
}

/// The four displacement amplitudes of one CHSH setting quadruple.
///
/// These are phase-space displacements of the on-off POVM, unrelated to the
/// intracavity pump amplitudes handled in [`crate::feasibility`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasurementSettings {
    pub alpha1: Complex64,
    pub alpha2: Complex64,
    pub beta1: Complex64,
    pub beta2: Complex64,
}

impl MeasurementSettings {
    pub fn new(alpha1: Complex64, alpha2: Complex64, beta1: Complex64, beta2: Complex64) -> Self {
        Self {
            alpha1,
            alpha2,
            beta1,
            beta2,
        }
    }

    pub fn real(alpha1: f64, alpha2: f64, beta1: f64, beta2: f64) -> Self {
        Self::new(
            Complex64::new(alpha1, 0.0),
            Complex64::new(alpha2, 0.0),
            Complex64::new(beta1, 0.0),
            Complex64::new(beta2, 0.0),
        )
    }

    pub fn zero() -> Self {
        Self::real(0.0, 0.0, 0.0, 0.0)
    }

    pub fn as_array(&self) -> [Complex64; 4] {
        [self.alpha1, self.alpha2, self.beta1, self.beta2]
    }

    pub fn from_array(a: [Complex64; 4]) -> Self {
        Self::new(a[0], a[1], a[2], a[3])
    }

    pub fn is_finite(&self) -> bool {
        self.as_array().iter().all(|z| z.is_finite())
    }

    pub fn negated(&self) -> Self {
        Self::from_array(self.as_array().map(|z| -z))
    }

    /// Euclidean norm of the eight real components.
    pub fn norm(&self) -> f64 {
        self.as_array().iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Representative with the first nonzero component of
    /// `(Re a1, Im a1, Re a2, ...)` positive. The CHSH functionals are even
    /// under a global sign flip.
    pub fn canonical(&self) -> Self {
        let first = self
            .as_array()
            .iter()
            .flat_map(|z| [z.re, z.im])
            .find(|x| *x != 0.0);
        match first {
            Some(x) if x < 0.0 => self.negated(),
            _ => *self,
        }
    }
}

fn check_p(p: f64) -> Result<()> {
    check_domain("p", p, (0.0..1.0).contains(&p), "0 <= p < 1")
}

fn check_t(t: f64) -> Result<()> {
    check_domain("T", t, (0.0..=1.0).contains(&t), "0 <= T <= 1")
}

fn check_eta(eta: f64) -> Result<()> {
    check_domain("eta", eta, eta > 0.0 && eta <= 1.0, "0 < eta <= 1")
}

/// `p = 1 - exp(-2 G1 tau1)`.
pub fn p_from_g1tau(g1tau: f64) -> Result<f64> {
    check_domain("g1tau", g1tau, g1tau >= 0.0, "finite and >= 0")?;
    Ok(-(-2.0 * g1tau).exp_m1())
}

/// `T = 1 - exp(-2 G2 tau2)`; an infinite pulse area gives `T = 1`.
pub fn t_from_g2tau(g2tau: f64) -> Result<f64> {
    if g2tau == f64::INFINITY {
        return Ok(1.0);
    }
    check_domain("g2tau", g2tau, g2tau >= 0.0, ">= 0")?;
    Ok(-(-2.0 * g2tau).exp_m1())
}

/// Whether a raw probability-like value lies in `[0, 1]` up to
/// [`PROBABILITY_SLACK`].
pub fn is_valid_probability(x: f64) -> bool {
    x >= -PROBABILITY_SLACK && x <= 1.0 + PROBABILITY_SLACK
}

/// Probability that both displaced detectors report no click.
pub fn joint_click_prob(p: f64, t: f64, alpha: Complex64, beta: Complex64) -> Result<f64> {
    check_p(p)?;
    check_t(t)?;
    Ok(joint_unchecked(p, t, alpha, beta))
}

#[inline]
fn joint_unchecked(p: f64, t: f64, alpha: Complex64, beta: Complex64) -> f64 {
    // alpha* beta* + alpha beta = 2 Re(alpha beta)
    let cross = 2.0 * (alpha * beta).re;
    (1.0 - p) * (-alpha.norm_sqr() - beta.norm_sqr() - (p * t).sqrt() * cross).exp()
}

/// Single-arm no-click probability; identical for either arm.
pub fn marginal_click_prob(p: f64, t: f64, alpha: Complex64) -> Result<f64> {
    check_p(p)?;
    check_t(t)?;
    Ok(marginal_unchecked(p, t, alpha))
}

#[inline]
fn marginal_unchecked(p: f64, t: f64, alpha: Complex64) -> f64 {
    (1.0 - p) * (-(1.0 - p * t) * alpha.norm_sqr()).exp()
}

/// Correlation of the `±1` observables `2|a><a| - 1` on both arms.
pub fn correlation(p: f64, t: f64, alpha: Complex64, beta: Complex64) -> Result<f64> {
    check_p(p)?;
    check_t(t)?;
    Ok(correlation_unchecked(p, t, alpha, beta))
}

#[inline]
pub(crate) fn correlation_unchecked(p: f64, t: f64, alpha: Complex64, beta: Complex64) -> f64 {
    4.0 * joint_unchecked(p, t, alpha, beta)
        - 2.0 * (marginal_unchecked(p, t, alpha) + marginal_unchecked(p, t, beta))
        + 1.0
}

/// `|E(a1,b1) + E(a1,b2) + E(a2,b1) - E(a2,b2)|` from any correlation function.
#[inline]
pub fn chsh_combination<F>(settings: &MeasurementSettings, mut corr: F) -> f64
where
    F: FnMut(Complex64, Complex64) -> f64,
{
    let s = settings;
    (corr(s.alpha1, s.beta1) + corr(s.alpha1, s.beta2) + corr(s.alpha2, s.beta1)
        - corr(s.alpha2, s.beta2))
    .abs()
}

/// CHSH value for ideal detection.
pub fn chsh_s(p: f64, t: f64, settings: &MeasurementSettings) -> Result<f64> {
    check_p(p)?;
    check_t(t)?;
    Ok(chsh_combination(settings, |a, b| {
        correlation_unchecked(p, t, a, b)
    }))
}

/// Each of the four correlations entering [`chsh_s`], in the order
/// `(a1,b1), (a1,b2), (a2,b1), (a2,b2)`.
pub fn chsh_terms(p: f64, t: f64, settings: &MeasurementSettings) -> Result<[f64; 4]> {
    check_p(p)?;
    check_t(t)?;
    let s = settings;
    Ok([
        correlation_unchecked(p, t, s.alpha1, s.beta1),
        correlation_unchecked(p, t, s.alpha1, s.beta2),
        correlation_unchecked(p, t, s.alpha2, s.beta1),
        correlation_unchecked(p, t, s.alpha2, s.beta2),
    ])
}

/// `R(eta) = (1 - 2/eta)^2 - 2 (1 - 2/eta)(1+p)/(1-p) + 1`.
pub fn r_of_eta(p: f64, eta: f64) -> Result<f64> {
    check_p(p)?;
    check_eta(eta)?;
    Ok(r_unchecked(p, eta))
}

/// `S(eta) = (1+p)/(1-p) + 2/eta - 1`.
pub fn s_of_eta(p: f64, eta: f64) -> Result<f64> {
    check_p(p)?;
    check_eta(eta)?;
    Ok(s_unchecked(p, eta))
}

#[inline]
fn r_unchecked(p: f64, eta: f64) -> f64 {
    let u = 1.0 - 2.0 / eta;
    u * u - 2.0 * u * (1.0 + p) / (1.0 - p) + 1.0
}

#[inline]
fn s_unchecked(p: f64, eta: f64) -> f64 {
    (1.0 + p) / (1.0 - p) + 2.0 / eta - 1.0
}

/// Two-mode phase-space function seen through detectors of overall
/// efficiency `eta` (conversion efficiency fixed to one).
pub fn q2_eta(p: f64, eta: f64, alpha: Complex64, beta: Complex64) -> Result<f64> {
    check_p(p)?;
    check_eta(eta)?;
    Ok(LossyKernel::new(p, eta).q2(alpha, beta))
}

/// Single-mode counterpart of [`q2_eta`].
pub fn q1_eta(p: f64, eta: f64, alpha: Complex64) -> Result<f64> {
    check_p(p)?;
    check_eta(eta)?;
    Ok(LossyKernel::new(p, eta).q1(alpha))
}

/// CHSH functional written in terms of the efficiency-dependent Q functions.
pub fn chsh_s_eta(p: f64, eta: f64, settings: &MeasurementSettings) -> Result<f64> {
    check_p(p)?;
    check_eta(eta)?;
    Ok(LossyKernel::new(p, eta).chsh(settings))
}

/// Precomputed coefficients of the `eta`-dependent Q functions for one `(p, eta)`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct LossyKernel {
    eta: f64,
    q2_prefactor: f64,
    q2_diag: f64,
    q2_cross: f64,
    q1_prefactor: f64,
    q1_rate: f64,
}

impl LossyKernel {
    pub(crate) fn new(p: f64, eta: f64) -> Self {
        let r = r_unchecked(p, eta);
        let s = s_unchecked(p, eta);
        Self {
            eta,
            q2_prefactor: 4.0 / (PI * PI * r),
            q2_diag: 2.0 * s / r,
            q2_cross: 4.0 * p.sqrt() / (r * (1.0 - p)),
            q1_prefactor: 2.0 / (PI * s),
            q1_rate: 2.0 / s,
        }
    }

    #[inline]
    pub(crate) fn q2(&self, alpha: Complex64, beta: Complex64) -> f64 {
        // both exponentials merged so that large settings cannot produce inf * 0
        let cross = 2.0 * (alpha * beta).re;
        self.q2_prefactor
            * (-self.q2_diag * (alpha.norm_sqr() + beta.norm_sqr()) - self.q2_cross * cross).exp()
    }

    #[inline]
    pub(crate) fn q1(&self, alpha: Complex64) -> f64 {
        self.q1_prefactor * (-self.q1_rate * alpha.norm_sqr()).exp()
    }

    /// Correlation whose CHSH combination reproduces the Q-function functional.
    #[inline]
    pub(crate) fn correlation(&self, alpha: Complex64, beta: Complex64) -> f64 {
        let eta = self.eta;
        4.0 * PI * PI / (eta * eta) * self.q2(alpha, beta)
            - 2.0 * PI / eta * (self.q1(alpha) + self.q1(beta))
            + 1.0
    }

    pub(crate) fn chsh(&self, s: &MeasurementSettings) -> f64 {
        let eta = self.eta;
        let two_mode = self.q2(s.alpha1, s.beta1) + self.q2(s.alpha1, s.beta2)
            + self.q2(s.alpha2, s.beta1)
            - self.q2(s.alpha2, s.beta2);
        let single = self.q1(s.alpha1) + self.q1(s.beta1);
        (4.0 * PI * PI / (eta * eta) * two_mode - 4.0 * PI / eta * single + 2.0).abs()
    }
}

/// Correlation function with detection efficiency (conversion efficiency one).
pub fn correlation_eta(p: f64, eta: f64, alpha: Complex64, beta: Complex64) -> Result<f64> {
    check_p(p)?;
    check_eta(eta)?;
    Ok(LossyKernel::new(p, eta).correlation(alpha, beta))
}

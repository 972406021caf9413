//! Maps laboratory parameters onto the dimensionless protocol parameters and
//! checks the approximations the protocol relies on.
//!
//! All rates are angular (rad/s) once inside [`ExperimentParams`]. The JSON
//! config quotes rates as strings with a unit suffix (`"1 GHz"`); its
//! `angular` flag says whether those numbers already are angular rates
//! (`true`) or ordinary frequencies to be multiplied by `2 pi` (`false`, the
//! default). Durations are given in nanoseconds.

use std::f64::consts::PI;
use std::path::Path;

use num_complex::Complex64;
use serde::Serialize;
use serde_json::{Map, Value};

use crate::core_model::{p_from_g1tau, t_from_g2tau};
use crate::error::{check_domain, Error, Result};
use crate::optimizer::{optimize_settings, Objective, OptimizerBudget};

/// Reduced Planck constant, J s.
pub const HBAR: f64 = 1.054_571_817e-34;
/// Boltzmann constant, J/K.
pub const K_B: f64 = 1.380_649e-23;

/// First-pulse area at which the ideal CHSH violation peaks.
pub const OPTIMAL_G1TAU: f64 = 0.25;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum FrequencyConvention {
    /// The number is an angular frequency in rad/s.
    Angular,
    /// The number is an ordinary frequency in Hz; `omega = 2 pi f`.
    Ordinary,
}

impl FrequencyConvention {
    pub fn to_angular(self, value: f64) -> f64 {
        match self {
            Self::Angular => value,
            Self::Ordinary => 2.0 * PI * value,
        }
    }
}

/// Pass thresholds for the "much smaller than" conditions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Thresholds {
    /// Largest accepted `G / kappa`.
    pub weak_coupling: f64,
    /// Largest accepted `(tau1 + tau2) gamma n_th`.
    pub decoherence: f64,
    /// Largest accepted `kappa_i / kappa_ex`.
    pub over_coupling: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self {
            weak_coupling: 0.1,
            decoherence: 0.1,
            over_coupling: 0.1,
        }
    }
}

/// Magnon bath occupation, either given or derived from a temperature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum ThermalSpec {
    Occupation(f64),
    /// Kelvin; converted with the magnon frequency.
    Temperature(f64),
}

/// Physical parameters of one protocol run; rates in rad/s, times in s.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentParams {
    /// Single-photon optomagnonic coupling.
    pub g: f64,
    pub kappa_ex1: f64,
    pub kappa_i1: f64,
    pub kappa_ex2: f64,
    pub kappa_i2: f64,
    pub gamma: f64,
    pub omega_m: Option<f64>,
    pub thermal: ThermalSpec,
    /// Drive of cavity mode 1 (second pulse).
    pub eps1: f64,
    /// Drive of cavity mode 2 (first pulse).
    pub eps2: f64,
    pub delta1: f64,
    pub delta2: f64,
    pub tau1: f64,
    pub tau2: f64,
    /// Linearised couplings `(G1, G2)` quoted directly, bypassing the drives.
    pub effective_couplings: Option<(f64, f64)>,
    pub thresholds: Thresholds,
}

impl ExperimentParams {
    pub fn kappa1(&self) -> f64 {
        self.kappa_ex1 + self.kappa_i1
    }

    pub fn kappa2(&self) -> f64 {
        self.kappa_ex2 + self.kappa_i2
    }

    /// Reference parameters of the weak-coupling YIG proposal, quoted rates
    /// taken as angular.
    pub fn reference_preset() -> Self {
        Self {
            g: 10.4,
            kappa_ex1: 1e9,
            kappa_i1: 0.0,
            kappa_ex2: 1e9,
            kappa_i2: 0.0,
            gamma: 1e6,
            omega_m: Some(7.95e9),
            thermal: ThermalSpec::Occupation(0.026),
            eps1: 0.0,
            eps2: 0.0,
            delta1: 0.0,
            delta2: 0.0,
            tau1: 31e-9,
            tau2: 75e-9,
            effective_couplings: Some((20e6, 100e6)),
            thresholds: Thresholds::default(),
        }
    }

    /// Multiplies every rate by `s` and divides both durations by `s`.
    pub fn rescaled(&self, s: f64) -> Self {
        Self {
            g: self.g * s,
            kappa_ex1: self.kappa_ex1 * s,
            kappa_i1: self.kappa_i1 * s,
            kappa_ex2: self.kappa_ex2 * s,
            kappa_i2: self.kappa_i2 * s,
            gamma: self.gamma * s,
            omega_m: self.omega_m.map(|w| w * s),
            eps1: self.eps1 * s,
            eps2: self.eps2 * s,
            delta1: self.delta1 * s,
            delta2: self.delta2 * s,
            tau1: self.tau1 / s,
            tau2: self.tau2 / s,
            effective_couplings: self.effective_couplings.map(|(a, b)| (a * s, b * s)),
            ..self.clone()
        }
    }

    fn validate(&self) -> Result<()> {
        let rates = [
            ("g", self.g),
            ("kappa_ex1", self.kappa_ex1),
            ("kappa_i1", self.kappa_i1),
            ("kappa_ex2", self.kappa_ex2),
            ("kappa_i2", self.kappa_i2),
            ("gamma", self.gamma),
            ("tau1", self.tau1),
            ("tau2", self.tau2),
        ];
        for (name, v) in rates {
            check_domain(name, v, v >= 0.0, ">= 0")?;
        }
        check_domain("kappa1", self.kappa1(), self.kappa1() > 0.0, "> 0")?;
        check_domain("kappa2", self.kappa2(), self.kappa2() > 0.0, "> 0")
    }
}

/// Mean intracavity amplitude `eps / (i kappa_ex/2 - delta)`.
pub fn pump_amplitude(eps: f64, kappa_ex: f64, delta: f64) -> Result<Complex64> {
    check_domain("kappa_ex", kappa_ex, kappa_ex >= 0.0, ">= 0")?;
    let denom = Complex64::new(-delta, kappa_ex / 2.0);
    if denom.norm() == 0.0 {
        return Err(Error::SingularDrive);
    }
    Ok(Complex64::new(eps, 0.0) / denom)
}

/// `(G1, G2) = (g |alpha2|, g |alpha1|)`: the first pulse drives mode 2 and
/// couples mode 1 to the magnon, the second pulse does the opposite.
pub fn effective_couplings(params: &ExperimentParams) -> Result<(f64, f64)> {
    if let Some(quoted) = params.effective_couplings {
        return Ok(quoted);
    }
    let alpha2 = pump_amplitude(params.eps2, params.kappa_ex2, params.delta2)?;
    let alpha1 = pump_amplitude(params.eps1, params.kappa_ex1, params.delta1)?;
    Ok((params.g * alpha2.norm(), params.g * alpha1.norm()))
}

/// Bose-Einstein occupation `1/(exp(hbar w / k_B T) - 1)`; `omega` is read in
/// the given convention.
pub fn thermal_occupation(omega: f64, temperature: f64, convention: FrequencyConvention) -> Result<f64> {
    check_domain("temperature", temperature, temperature >= 0.0, ">= 0")?;
    check_domain("omega", omega, omega > 0.0, "> 0")?;
    if temperature == 0.0 {
        return Ok(0.0);
    }
    let x = HBAR * convention.to_angular(omega) / (K_B * temperature);
    Ok(1.0 / x.exp_m1())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionFlags {
    pub weak_coupling: bool,
    pub decoherence: bool,
    pub over_coupling: bool,
    /// Both pulses drive their cavity mode on resonance.
    pub resonant_drive: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FeasibilityReport {
    /// `|alpha1|`, `|alpha2|`; back-computed from quoted couplings if needed.
    pub alpha1: Option<f64>,
    pub alpha2: Option<f64>,
    pub coupling1: f64,
    pub coupling2: f64,
    /// `2 G^2 / kappa` for each pulse.
    pub effective_rate1: f64,
    pub effective_rate2: f64,
    pub g1tau: f64,
    pub g2tau: f64,
    pub p: f64,
    pub t: f64,
    pub weak_coupling_ratio1: f64,
    pub weak_coupling_ratio2: f64,
    pub n_th: f64,
    /// `(tau1 + tau2) gamma n_th`.
    pub decoherence_margin: f64,
    pub over_coupling_ratio1: f64,
    pub over_coupling_ratio2: f64,
    pub flags: ConditionFlags,
    pub thresholds: Thresholds,
    pub warnings: Vec<String>,
    /// Optimised ideal-detection S for `(p, T)`, when requested.
    pub optimized_s: Option<f64>,
}

impl FeasibilityReport {
    pub fn all_pass(&self) -> bool {
        let f = &self.flags;
        f.weak_coupling && f.decoherence && f.over_coupling
    }

    /// Runs the optimiser for the report's `(p, T)`.
    pub fn with_optimized_s(mut self, budget: &OptimizerBudget) -> Result<Self> {
        let res = optimize_settings(&Objective::ideal(self.p, self.t)?, budget)?;
        self.optimized_s = Some(res.best_s);
        Ok(self)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let pass = |ok: bool| if ok { "pass" } else { "FAIL" };
        let f = &self.flags;
        out.push_str(&format!(
            "couplings        G1 = {:.4e} rad/s, G2 = {:.4e} rad/s\n",
            self.coupling1, self.coupling2
        ));
        if let (Some(a1), Some(a2)) = (self.alpha1, self.alpha2) {
            out.push_str(&format!("pump amplitudes  |alpha1| = {a1:.4e}, |alpha2| = {a2:.4e}\n"));
        }
        out.push_str(&format!(
            "pulse areas      G1~ tau1 = {:.4}, G2~ tau2 = {:.4}\n",
            self.g1tau, self.g2tau
        ));
        out.push_str(&format!("protocol         p = {:.4}, T = {:.4}\n", self.p, self.t));
        out.push_str(&format!(
            "weak coupling    G1/k1 = {:.3e}, G2/k2 = {:.3e} (<= {}) {}\n",
            self.weak_coupling_ratio1,
            self.weak_coupling_ratio2,
            self.thresholds.weak_coupling,
            pass(f.weak_coupling)
        ));
        out.push_str(&format!(
            "decoherence      (tau1+tau2) gamma n_th = {:.3e} (<= {}) {}\n",
            self.decoherence_margin,
            self.thresholds.decoherence,
            pass(f.decoherence)
        ));
        out.push_str(&format!(
            "over-coupling    ki/kex = {:.3e}, {:.3e} (<= {}) {}\n",
            self.over_coupling_ratio1,
            self.over_coupling_ratio2,
            self.thresholds.over_coupling,
            pass(f.over_coupling)
        ));
        out.push_str(&format!("resonant drive   {}\n", pass(f.resonant_drive)));
        if let Some(s) = self.optimized_s {
            out.push_str(&format!("optimised S      {s:.4}\n"));
        }
        for w in &self.warnings {
            out.push_str(&format!("warning: {w}\n"));
        }
        out
    }
}

/// Derives every report field from `params`.
pub fn analyze(params: &ExperimentParams) -> Result<FeasibilityReport> {
    params.validate()?;
    let (coupling1, coupling2) = effective_couplings(params)?;
    let (kappa1, kappa2) = (params.kappa1(), params.kappa2());
    let effective_rate1 = 2.0 * coupling1 * coupling1 / kappa1;
    let effective_rate2 = 2.0 * coupling2 * coupling2 / kappa2;
    let g1tau = effective_rate1 * params.tau1;
    let g2tau = effective_rate2 * params.tau2;
    let p = p_from_g1tau(g1tau)?;
    let t = t_from_g2tau(g2tau)?;

    let (alpha1, alpha2) = if params.effective_couplings.is_some() {
        if params.g > 0.0 {
            (Some(coupling2 / params.g), Some(coupling1 / params.g))
        } else {
            (None, None)
        }
    } else {
        (
            Some(pump_amplitude(params.eps1, params.kappa_ex1, params.delta1)?.norm()),
            Some(pump_amplitude(params.eps2, params.kappa_ex2, params.delta2)?.norm()),
        )
    };

    let mut warnings = Vec::new();
    let n_th = match params.thermal {
        ThermalSpec::Occupation(n) => n,
        ThermalSpec::Temperature(temp) => {
            let omega = params.omega_m.ok_or(Error::Schema {
                keys: vec!["omega_m (needed with temperature)".into()],
            })?;
            thermal_occupation(omega, temp, FrequencyConvention::Angular)?
        }
    };
    check_domain("n_th", n_th, n_th >= 0.0, ">= 0")?;

    let decoherence_margin = (params.tau1 + params.tau2) * params.gamma * n_th;
    let ratio = |num: f64, den: f64| if den > 0.0 { num / den } else { f64::INFINITY };
    let over_coupling_ratio1 = ratio(params.kappa_i1, params.kappa_ex1);
    let over_coupling_ratio2 = ratio(params.kappa_i2, params.kappa_ex2);
    let th = params.thresholds;
    let flags = ConditionFlags {
        weak_coupling: coupling1 / kappa1 <= th.weak_coupling && coupling2 / kappa2 <= th.weak_coupling,
        decoherence: decoherence_margin <= th.decoherence,
        over_coupling: over_coupling_ratio1 <= th.over_coupling && over_coupling_ratio2 <= th.over_coupling,
        resonant_drive: params.delta1 == 0.0 && params.delta2 == 0.0,
    };

    if (g1tau - OPTIMAL_G1TAU).abs() > 0.2 * OPTIMAL_G1TAU {
        warnings.push(format!(
            "G1~ tau1 = 2 G1^2 tau1 / kappa1 = {g1tau:.4} is far from the violation optimum ~{OPTIMAL_G1TAU} \
             (p = {p:.4} instead of ~0.39)"
        ));
    }
    if !flags.resonant_drive {
        warnings.push("pulses are detuned; the interaction pictures assume resonant driving".into());
    }

    Ok(FeasibilityReport {
        alpha1,
        alpha2,
        coupling1,
        coupling2,
        effective_rate1,
        effective_rate2,
        g1tau,
        g2tau,
        p,
        t,
        weak_coupling_ratio1: coupling1 / kappa1,
        weak_coupling_ratio2: coupling2 / kappa2,
        n_th,
        decoherence_margin,
        over_coupling_ratio1,
        over_coupling_ratio2,
        flags,
        thresholds: th,
        warnings,
        optimized_s: None,
    })
}

/// Bose-Einstein occupation of the magnon under both frequency conventions,
/// next to a quoted value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ThermalComparison {
    pub omega_m: f64,
    pub temperature: f64,
    pub angular: f64,
    pub ordinary: f64,
    pub quoted: f64,
}

pub fn compare_thermal(omega_m: f64, temperature: f64, quoted: f64) -> Result<ThermalComparison> {
    Ok(ThermalComparison {
        omega_m,
        temperature,
        angular: thermal_occupation(omega_m, temperature, FrequencyConvention::Angular)?,
        ordinary: thermal_occupation(omega_m, temperature, FrequencyConvention::Ordinary)?,
        quoted,
    })
}

const RATE_KEYS: [&str; 15] = [
    "g", "kappa1", "kappa2", "kappa_ex1", "kappa_ex2", "kappa_i1", "kappa_i2", "gamma", "omega_m", "eps1",
    "eps2", "delta1", "delta2", "G1", "G2",
];
const OTHER_KEYS: [&str; 7] = ["name", "angular", "n_th", "temperature", "tau1_ns", "tau2_ns", "thresholds"];

/// Parses the experiment config. Every problem found is reported at once.
pub fn parse_config(text: &str) -> Result<ExperimentParams> {
    let value: Value = serde_json::from_str(text).map_err(|e| Error::Schema {
        keys: vec![format!("<document>: {e}")],
    })?;
    let Value::Object(map) = value else {
        return Err(Error::Schema {
            keys: vec!["<document>: expected a JSON object".into()],
        });
    };
    ConfigReader::new(&map).read()
}

pub fn load_config(path: &Path) -> Result<ExperimentParams> {
    let text = std::fs::read_to_string(path)?;
    parse_config(&text)
}

struct ConfigReader<'a> {
    map: &'a Map<String, Value>,
    convention: FrequencyConvention,
    problems: Vec<String>,
}

impl<'a> ConfigReader<'a> {
    fn new(map: &'a Map<String, Value>) -> Self {
        Self {
            map,
            convention: FrequencyConvention::Ordinary,
            problems: Vec::new(),
        }
    }

    fn read(mut self) -> Result<ExperimentParams> {
        for key in self.map.keys() {
            if !RATE_KEYS.contains(&key.as_str()) && !OTHER_KEYS.contains(&key.as_str()) {
                self.problems.push(format!("{key}: unknown key"));
            }
        }
        match self.map.get("angular") {
            None => {}
            Some(Value::Bool(true)) => self.convention = FrequencyConvention::Angular,
            Some(Value::Bool(false)) => {}
            Some(_) => self.problems.push("angular: expected true or false".into()),
        }

        let g = self.rate("g", false);
        let kappa1 = self.rate("kappa1", false);
        let kappa2 = self.rate("kappa2", false);
        let kappa_i1 = self.rate("kappa_i1", false).unwrap_or(0.0);
        let kappa_i2 = self.rate("kappa_i2", false).unwrap_or(0.0);
        let kappa_ex1 = self.external("1", kappa1, kappa_i1);
        let kappa_ex2 = self.external("2", kappa2, kappa_i2);
        let gamma = self.rate("gamma", false).unwrap_or(0.0);
        let omega_m = self.rate("omega_m", false);
        let eps1 = self.rate("eps1", false);
        let eps2 = self.rate("eps2", false);
        let delta1 = self.rate("delta1", true).unwrap_or(0.0);
        let delta2 = self.rate("delta2", true).unwrap_or(0.0);
        let quoted1 = self.rate("G1", false);
        let quoted2 = self.rate("G2", false);
        let tau1 = self.duration("tau1_ns");
        let tau2 = self.duration("tau2_ns");
        let thermal = self.thermal();
        let thresholds = self.thresholds();

        let effective_couplings = match (quoted1, quoted2) {
            (Some(a), Some(b)) => Some((a, b)),
            (None, None) => {
                for (key, v) in [("g", g), ("eps1", eps1), ("eps2", eps2)] {
                    if v.is_none() {
                        self.problems.push(format!("{key}: required unless G1 and G2 are given"));
                    }
                }
                None
            }
            _ => {
                self.problems.push("G1, G2: give both or neither".into());
                None
            }
        };

        if !self.problems.is_empty() {
            return Err(Error::Schema { keys: self.problems });
        }
        Ok(ExperimentParams {
            g: g.unwrap_or(0.0),
            kappa_ex1: kappa_ex1.unwrap_or(0.0),
            kappa_i1,
            kappa_ex2: kappa_ex2.unwrap_or(0.0),
            kappa_i2,
            gamma,
            omega_m,
            thermal: thermal.unwrap_or(ThermalSpec::Occupation(0.0)),
            eps1: eps1.unwrap_or(0.0),
            eps2: eps2.unwrap_or(0.0),
            delta1,
            delta2,
            tau1: tau1.unwrap_or(0.0),
            tau2: tau2.unwrap_or(0.0),
            effective_couplings,
            thresholds,
        })
    }

    fn rate(&mut self, key: &str, signed: bool) -> Option<f64> {
        let raw = self.map.get(key)?;
        let Some(text) = raw.as_str() else {
            self.problems.push(format!("{key}: expected a string such as \"1 GHz\""));
            return None;
        };
        match parse_rate(text) {
            Some(v) if signed || v >= 0.0 => Some(self.convention.to_angular(v)),
            Some(_) => {
                self.problems.push(format!("{key}: must be non-negative"));
                None
            }
            None => {
                self.problems.push(format!("{key}: cannot parse \"{text}\" (units Hz, kHz, MHz, GHz, THz)"));
                None
            }
        }
    }

    fn external(&mut self, mode: &str, total: Option<f64>, intrinsic: f64) -> Option<f64> {
        let key = format!("kappa_ex{mode}");
        let ex = self.rate(&key, false);
        match (ex, total) {
            (Some(ex), Some(total)) => {
                if (ex + intrinsic - total).abs() > 1e-9 * total.abs().max(1.0) {
                    self.problems.push(format!("kappa{mode}: must equal kappa_ex{mode} + kappa_i{mode}"));
                }
                Some(ex)
            }
            (Some(ex), None) => Some(ex),
            (None, Some(total)) if total >= intrinsic => Some(total - intrinsic),
            (None, Some(_)) => {
                self.problems.push(format!("kappa_i{mode}: exceeds kappa{mode}"));
                None
            }
            (None, None) if self.map.contains_key(&format!("kappa{mode}")) => None,
            (None, None) => {
                self.problems.push(format!("kappa{mode}: required (or {key})"));
                None
            }
        }
    }

    fn duration(&mut self, key: &str) -> Option<f64> {
        match self.map.get(key) {
            None => {
                self.problems.push(format!("{key}: required"));
                None
            }
            Some(v) => match v.as_f64() {
                Some(ns) if ns >= 0.0 => Some(ns * 1e-9),
                _ => {
                    self.problems.push(format!("{key}: expected a non-negative number of nanoseconds"));
                    None
                }
            },
        }
    }

    fn thermal(&mut self) -> Option<ThermalSpec> {
        if let Some(v) = self.map.get("n_th") {
            return match v.as_f64() {
                Some(n) if n >= 0.0 => Some(ThermalSpec::Occupation(n)),
                _ => {
                    self.problems.push("n_th: expected a non-negative number".into());
                    None
                }
            };
        }
        let v = self.map.get("temperature")?;
        match v.as_str().and_then(parse_temperature) {
            Some(t) => {
                if !self.map.contains_key("omega_m") {
                    self.problems.push("omega_m: required when only a temperature is given".into());
                }
                Some(ThermalSpec::Temperature(t))
            }
            None => {
                self.problems.push("temperature: expected a string such as \"10 mK\"".into());
                None
            }
        }
    }

    fn thresholds(&mut self) -> Thresholds {
        let mut th = Thresholds::default();
        let Some(v) = self.map.get("thresholds") else {
            return th;
        };
        let Some(obj) = v.as_object() else {
            self.problems.push("thresholds: expected an object".into());
            return th;
        };
        for (key, val) in obj {
            let slot = match key.as_str() {
                "weak_coupling" => &mut th.weak_coupling,
                "decoherence" => &mut th.decoherence,
                "over_coupling" => &mut th.over_coupling,
                _ => {
                    self.problems.push(format!("thresholds.{key}: unknown key"));
                    continue;
                }
            };
            match val.as_f64() {
                Some(x) if x > 0.0 => *slot = x,
                _ => self.problems.push(format!("thresholds.{key}: expected a positive number")),
            }
        }
        th
    }
}

/// `"<number> <unit>"` with unit Hz/kHz/MHz/GHz/THz, returned in Hz.
pub fn parse_rate(text: &str) -> Option<f64> {
    let (num, unit) = split_quantity(text)?;
    let scale = match unit {
        "Hz" => 1.0,
        "kHz" => 1e3,
        "MHz" => 1e6,
        "GHz" => 1e9,
        "THz" => 1e12,
        _ => return None,
    };
    Some(num * scale)
}

/// `"<number> <unit>"` with unit K or mK, returned in kelvin.
pub fn parse_temperature(text: &str) -> Option<f64> {
    let (num, unit) = split_quantity(text)?;
    let scale = match unit {
        "K" => 1.0,
        "mK" => 1e-3,
        _ => return None,
    };
    (num >= 0.0).then_some(num * scale)
}

fn split_quantity(text: &str) -> Option<(f64, &str)> {
    let text = text.trim();
    let split = text.find(|c: char| c.is_ascii_alphabetic() && c != 'e' && c != 'E')?;
    let (num, unit) = text.split_at(split);
    let num: f64 = num.trim().parse().ok()?;
    num.is_finite().then_some((num, unit.trim()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn pump_amplitude_examples() {
        let a = pump_amplitude(3.0, 2.0, 0.0).unwrap();
        assert_relative_eq!(a.norm(), 3.0, epsilon = 1e-15);
        assert_eq!(pump_amplitude(0.0, 2.0, 0.7).unwrap().norm(), 0.0);
        assert_relative_eq!(pump_amplitude(0.5, 1.0, 0.0).unwrap().norm(), 1.0, epsilon = 1e-15);
        assert!(matches!(pump_amplitude(1.0, 0.0, 0.0), Err(Error::SingularDrive)));
    }

    #[test]
    fn couplings_scale_with_drive() {
        let mut params = ExperimentParams::reference_preset();
        params.effective_couplings = None;
        params.eps1 = 1e12;
        params.eps2 = 2e12;
        let (g1, g2) = effective_couplings(&params).unwrap();
        params.eps1 *= 2.0;
        params.eps2 *= 2.0;
        let (h1, h2) = effective_couplings(&params).unwrap();
        assert_relative_eq!(h1, 2.0 * g1, max_relative = 1e-15);
        assert_relative_eq!(h2, 2.0 * g2, max_relative = 1e-15);
        params.g = 0.0;
        assert_eq!(effective_couplings(&params).unwrap(), (0.0, 0.0));
    }

    #[test]
    fn thermal_occupation_examples() {
        assert_eq!(thermal_occupation(1e10, 0.0, FrequencyConvention::Angular).unwrap(), 0.0);
        // hbar w / k T = ln 2 gives n = 1
        let temp = 1.0;
        let omega = 2f64.ln() * K_B * temp / HBAR;
        assert_relative_eq!(
            thermal_occupation(omega, temp, FrequencyConvention::Angular).unwrap(),
            1.0,
            max_relative = 1e-12
        );
        assert!(thermal_occupation(1e10, -1.0, FrequencyConvention::Angular).is_err());
    }

    #[test]
    fn rate_strings() {
        assert_eq!(parse_rate("1 GHz"), Some(1e9));
        assert_eq!(parse_rate("10.4 Hz"), Some(10.4));
        assert_eq!(parse_rate("2.5e3 kHz"), Some(2.5e6));
        assert_eq!(parse_rate("-3 MHz"), Some(-3e6));
        assert_eq!(parse_rate("3 furlongs"), None);
        assert_eq!(parse_rate("GHz"), None);
        assert_eq!(parse_temperature("10 mK"), Some(0.01));
    }

    #[test]
    fn schema_errors_list_every_key() {
        match parse_config("{}") {
            Err(Error::Schema { keys }) => {
                assert!(keys.iter().any(|k| k.starts_with("kappa1")));
                assert!(keys.iter().any(|k| k.starts_with("tau1_ns")));
                assert!(keys.iter().any(|k| k.starts_with("eps2")));
            }
            other => panic!("expected schema error, got {other:?}"),
        }
        match parse_config(r#"{"kappa1": 5, "bogus": 1, "tau1_ns": 1, "tau2_ns": 1, "kappa2": "1 GHz", "G1": "1 MHz", "G2": "1 MHz"}"#) {
            Err(Error::Schema { keys }) => {
                assert_eq!(keys.len(), 2, "{keys:?}");
            }
            other => panic!("expected schema error, got {other:?}"),
        }
    }

    #[test]
    fn convention_flag_applies_two_pi() {
        let base = r#""kappa1": "1 GHz", "kappa2": "1 GHz", "G1": "20 MHz", "G2": "100 MHz", "tau1_ns": 31, "tau2_ns": 75"#;
        let ordinary = parse_config(&format!("{{{base}}}")).unwrap();
        let angular = parse_config(&format!("{{\"angular\": true, {base}}}")).unwrap();
        assert_relative_eq!(ordinary.kappa1(), 2.0 * PI * angular.kappa1(), max_relative = 1e-15);
    }
}

//! Maximisation of the CHSH functionals over displacement settings and the
//! parameter sweeps built on it.
//!
//! Each optimisation is a coarse grid over real settings in `[-2, 2]^4`
//! followed by Nelder-Mead refinement from the best grid points. The grid
//! stage tabulates the correlation function once per `(alpha, beta)` pair, so
//! scanning the 17^4 quadruples costs only table lookups.

use std::fmt;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::core_model::{self, chsh_combination, LossyKernel, MeasurementSettings};
use crate::error::{check_domain, Error, Result};

/// `2 sqrt 2`.
pub const TSIRELSON: f64 = 2.0 * std::f64::consts::SQRT_2;

/// An optimised value counts as a violation only above `2 + VIOLATION_MARGIN`;
/// flat directions of the functional otherwise report `2 + ulp`.
pub const VIOLATION_MARGIN: f64 = 1e-9;

/// Position of the extra start, in units of the grid half-width.
const FAR_START: f64 = 2.0;

/// Default seed for the randomised complex restarts and sampling.
pub const DEFAULT_SEED: u64 = 20_221_017;

const WARM_REL_TOL: f64 = 1e-12;

/// Which CHSH functional is maximised.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Objective {
    /// Ideal detection on the pair state with parameters `(p, T)`.
    Ideal { p: f64, t: f64 },
    /// Q-function functional with overall efficiency `eta` (conversion one).
    Lossy { p: f64, eta: f64 },
}

impl Objective {
    pub fn ideal(p: f64, t: f64) -> Result<Self> {
        core_model::chsh_s(p, t, &MeasurementSettings::zero())?;
        Ok(Self::Ideal { p, t })
    }

    pub fn lossy(p: f64, eta: f64) -> Result<Self> {
        core_model::chsh_s_eta(p, eta, &MeasurementSettings::zero())?;
        Ok(Self::Lossy { p, eta })
    }

    /// Picks the lossy functional only when `eta < 1`; it needs `T = 1`.
    pub fn for_params(p: f64, t: f64, eta: f64) -> Result<Self> {
        if eta == 1.0 {
            Self::ideal(p, t)
        } else if t == 1.0 {
            Self::lossy(p, eta)
        } else {
            Err(Error::Unsupported(
                "finite detection efficiency is only modelled for unit conversion efficiency",
            ))
        }
    }

    pub fn p(&self) -> f64 {
        match *self {
            Self::Ideal { p, .. } | Self::Lossy { p, .. } => p,
        }
    }

    fn evaluator(&self) -> Evaluator {
        match *self {
            Self::Ideal { p, t } => Evaluator::Ideal { p, t },
            Self::Lossy { p, eta } => Evaluator::Lossy(LossyKernel::new(p, eta)),
        }
    }

    /// Value of the functional at `settings`.
    pub fn value(&self, settings: &MeasurementSettings) -> f64 {
        self.evaluator().chsh(settings)
    }
}

impl fmt::Display for Objective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Ideal { p, t } => write!(f, "chsh_s(p={p}, T={t})"),
            Self::Lossy { p, eta } => write!(f, "chsh_s_eta(p={p}, eta={eta})"),
        }
    }
}

#[derive(Clone, Copy)]
enum Evaluator {
    Ideal { p: f64, t: f64 },
    Lossy(LossyKernel),
}

impl Evaluator {
    #[inline]
    fn correlation(&self, a: Complex64, b: Complex64) -> f64 {
        match self {
            Self::Ideal { p, t } => core_model::correlation_unchecked(*p, *t, a, b),
            Self::Lossy(kernel) => kernel.correlation(a, b),
        }
    }

    #[inline]
    fn chsh(&self, s: &MeasurementSettings) -> f64 {
        match self {
            Self::Ideal { .. } => chsh_combination(s, |a, b| self.correlation(a, b)),
            Self::Lossy(kernel) => kernel.chsh(s),
        }
    }
}

/// Search effort for one optimisation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimizerBudget {
    /// Half-width of the real grid.
    pub grid_bound: f64,
    pub grid_step: f64,
    /// Number of best grid points refined.
    pub restarts: usize,
    /// Function evaluations allowed per refinement.
    pub max_evals: usize,
    /// Relative spread of simplex values at which refinement stops.
    pub rel_tol: f64,
}

impl Default for OptimizerBudget {
    fn default() -> Self {
        Self {
            grid_bound: 2.0,
            grid_step: 0.25,
            restarts: 5,
            max_evals: 20_000,
            rel_tol: 1e-8,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizationResult {
    pub best_s: f64,
    /// Canonical sign, `Re(alpha1) >= 0`.
    pub settings: MeasurementSettings,
    pub starts_used: usize,
    pub converged: bool,
    pub objective: Objective,
    /// Refined value reached from each start, in grid-rank order.
    pub start_values: Vec<f64>,
    pub evaluations: usize,
}

impl OptimizationResult {
    pub fn violates(&self) -> bool {
        self.best_s > 2.0 + VIOLATION_MARGIN
    }
}

struct SimplexOutcome {
    point: Vec<f64>,
    value: f64,
    evaluations: usize,
    converged: bool,
}

/// Maximises `f` with Nelder-Mead from `start`, initial edge `scale`.
/// After convergence the simplex is rebuilt around the optimum (up to three
/// rounds in total) to guard against premature collapse.
fn nelder_mead<F>(f: F, start: &[f64], scale: f64, max_evals: usize, rel_tol: f64) -> SimplexOutcome
where
    F: Fn(&[f64]) -> f64,
{
    let mut evals = 0usize;
    let mut point = start.to_vec();
    let mut value = f64::NEG_INFINITY;
    let mut edge = scale;
    let mut converged = false;
    for _round in 0..3 {
        let (p, v, ok) = simplex_round(&f, &point, edge, max_evals.saturating_sub(evals), rel_tol, &mut evals);
        let improved = v - value;
        point = p;
        value = v;
        converged = ok;
        if !ok || improved.abs() <= rel_tol * v.abs().max(1e-300) {
            break;
        }
        edge = (edge * 0.1).max(1e-4);
    }
    SimplexOutcome {
        point,
        value,
        evaluations: evals,
        converged,
    }
}

fn simplex_round<F>(
    f: &F,
    start: &[f64],
    edge: f64,
    max_evals: usize,
    rel_tol: f64,
    evals: &mut usize,
) -> (Vec<f64>, f64, bool)
where
    F: Fn(&[f64]) -> f64,
{
    let n = start.len();
    // minimise the negated objective
    let eval = |x: &[f64], evals: &mut usize| -> f64 {
        *evals += 1;
        let v = -f(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };
    let budget_start = *evals;
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    let v0 = eval(start, evals);
    simplex.push((start.to_vec(), v0));
    for i in 0..n {
        let mut x = start.to_vec();
        x[i] += edge;
        let v = eval(&x, evals);
        simplex.push((x, v));
    }

    let (alpha, gamma, rho, sigma) = (1.0, 2.0, 0.5, 0.5);
    loop {
        // stable sort keeps the older vertex first among equal values
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let best = simplex[0].1;
        let worst = simplex[n].1;
        if (worst - best).abs() <= rel_tol * best.abs() + 1e-300 {
            let (x, v) = simplex.swap_remove(0);
            return (x, -v, true);
        }
        if *evals - budget_start >= max_evals {
            let (x, v) = simplex.swap_remove(0);
            return (x, -v, false);
        }

        let centroid: Vec<f64> = (0..n)
            .map(|j| simplex[..n].iter().map(|(x, _)| x[j]).sum::<f64>() / n as f64)
            .collect();
        let along = |t: f64| -> Vec<f64> {
            centroid
                .iter()
                .zip(&simplex[n].0)
                .map(|(c, w)| c + t * (c - w))
                .collect()
        };

        let reflected = along(alpha);
        let fr = eval(&reflected, evals);
        if fr < simplex[0].1 {
            let expanded = along(gamma);
            let fe = eval(&expanded, evals);
            simplex[n] = if fe < fr { (expanded, fe) } else { (reflected, fr) };
            continue;
        }
        if fr < simplex[n - 1].1 {
            simplex[n] = (reflected, fr);
            continue;
        }
        let (contracted, fc) = if fr < simplex[n].1 {
            let x = along(rho);
            let v = eval(&x, evals);
            (x, v)
        } else {
            let x = along(-rho);
            let v = eval(&x, evals);
            (x, v)
        };
        if fc < fr.min(simplex[n].1) {
            simplex[n] = (contracted, fc);
            continue;
        }
        let anchor = simplex[0].0.clone();
        for vertex in simplex.iter_mut().skip(1) {
            let x: Vec<f64> = anchor
                .iter()
                .zip(&vertex.0)
                .map(|(b, v)| b + sigma * (v - b))
                .collect();
            let v = eval(&x, evals);
            *vertex = (x, v);
        }
    }
}

fn real_settings(x: &[f64]) -> MeasurementSettings {
    MeasurementSettings::real(x[0], x[1], x[2], x[3])
}

fn complex_settings(x: &[f64]) -> MeasurementSettings {
    MeasurementSettings::new(
        Complex64::new(x[0], x[1]),
        Complex64::new(x[2], x[3]),
        Complex64::new(x[4], x[5]),
        Complex64::new(x[6], x[7]),
    )
}

fn grid_values(bound: f64, step: f64) -> Vec<f64> {
    let n = (2.0 * bound / step).round() as usize;
    (0..=n).map(|i| -bound + i as f64 * step).collect()
}

/// Best `count` real grid quadruples, highest value first; ties are ordered by
/// smaller setting norm.
fn grid_candidates(eval: &Evaluator, bound: f64, step: f64, count: usize) -> Vec<(f64, [f64; 4])> {
    let g = grid_values(bound, step);
    let n = g.len();
    let mut table = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            table[i * n + j] = eval.correlation(Complex64::new(g[i], 0.0), Complex64::new(g[j], 0.0));
        }
    }
    let norm = |x: &[f64; 4]| x.iter().map(|v| v * v).sum::<f64>();
    let better = |a: &(f64, [f64; 4]), b: &(f64, [f64; 4])| a.0 > b.0 || (a.0 == b.0 && norm(&a.1) < norm(&b.1));

    let mut top: Vec<(f64, [f64; 4])> = Vec::with_capacity(count + 1);
    for a1 in 0..n {
        for a2 in 0..n {
            for b1 in 0..n {
                let partial = table[a1 * n + b1] + table[a2 * n + b1];
                for b2 in 0..n {
                    let s = (partial + table[a1 * n + b2] - table[a2 * n + b2]).abs();
                    if top.len() == count && s < top[count - 1].0 {
                        continue;
                    }
                    let cand = (s, [g[a1], g[a2], g[b1], g[b2]]);
                    if top.len() == count && !better(&cand, &top[count - 1]) {
                        continue;
                    }
                    let pos = top.iter().position(|t| better(&cand, t)).unwrap_or(top.len());
                    top.insert(pos, cand);
                    top.truncate(count);
                }
            }
        }
    }
    top
}

/// Best value on a dense real grid (no refinement), for cross-checks.
pub fn dense_grid_max(objective: &Objective, bound: f64, step: f64) -> (f64, MeasurementSettings) {
    let eval = objective.evaluator();
    let top = grid_candidates(&eval, bound, step, 1);
    let (s, x) = top[0];
    (s, real_settings(&x).canonical())
}

fn pick_better(best: &mut Option<(f64, MeasurementSettings)>, value: f64, settings: MeasurementSettings) {
    let replace = match best {
        None => true,
        Some((v, s)) => value > *v || (value == *v && settings.norm() < s.norm()),
    };
    if replace {
        *best = Some((value, settings));
    }
}

/// Grid search followed by simplex refinement from the best `restarts` grid
/// points.
pub fn optimize_settings(objective: &Objective, budget: &OptimizerBudget) -> Result<OptimizationResult> {
    check_budget(budget)?;
    let eval = objective.evaluator();
    let mut candidates = grid_candidates(&eval, budget.grid_bound, budget.grid_step, budget.restarts);
    // With lossy detectors S only approaches the local bound 2 at large
    // displacements, outside the grid; one far start lets the simplex get there.
    let far = [FAR_START * budget.grid_bound; 4];
    candidates.push((eval.chsh(&real_settings(&far)), far));
    let f = |x: &[f64]| eval.chsh(&real_settings(x));

    let mut best = None;
    let mut start_values = Vec::with_capacity(candidates.len());
    let mut evaluations = 0;
    let mut best_converged = false;
    for (grid_value, start) in &candidates {
        let out = nelder_mead(f, start, budget.grid_step / 2.0, budget.max_evals, budget.rel_tol);
        evaluations += out.evaluations;
        // never report less than the grid point itself
        let (value, point) = if out.value >= *grid_value {
            (out.value, out.point)
        } else {
            (*grid_value, start.to_vec())
        };
        start_values.push(value);
        let settings = real_settings(&point).canonical();
        let before = best.map(|(v, _)| v);
        pick_better(&mut best, value, settings);
        if best.map(|(v, _)| v) != before {
            best_converged = out.converged;
        }
    }
    let (best_s, settings) = best.expect("at least one grid candidate");
    Ok(OptimizationResult {
        best_s,
        settings,
        starts_used: candidates.len(),
        converged: best_converged,
        objective: *objective,
        start_values,
        evaluations,
    })
}

/// Simplex refinement over real settings from a given starting quadruple.
pub fn optimize_from(
    objective: &Objective,
    start: &MeasurementSettings,
    budget: &OptimizerBudget,
) -> Result<OptimizationResult> {
    check_budget(budget)?;
    let eval = objective.evaluator();
    let x0 = [start.alpha1.re, start.alpha2.re, start.beta1.re, start.beta2.re];
    let out = nelder_mead(
        |x| eval.chsh(&real_settings(x)),
        &x0,
        budget.grid_step / 2.0,
        budget.max_evals,
        budget.rel_tol,
    );
    Ok(OptimizationResult {
        best_s: out.value,
        settings: real_settings(&out.point).canonical(),
        starts_used: 1,
        converged: out.converged,
        objective: *objective,
        start_values: vec![out.value],
        evaluations: out.evaluations,
    })
}

/// Refines over all eight real components of complex settings, starting from
/// `start` and from `extra_starts` seeded random phase perturbations of it.
pub fn refine_complex(
    objective: &Objective,
    start: &MeasurementSettings,
    budget: &OptimizerBudget,
    extra_starts: usize,
    seed: u64,
) -> Result<OptimizationResult> {
    check_budget(budget)?;
    let eval = objective.evaluator();
    let f = |x: &[f64]| eval.chsh(&complex_settings(x));
    let base: Vec<f64> = start.as_array().iter().flat_map(|z| [z.re, z.im]).collect();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut starts = vec![base.clone()];
    for _ in 0..extra_starts {
        let rotated: Vec<f64> = start
            .as_array()
            .iter()
            .flat_map(|z| {
                let w = *z * Complex64::from_polar(1.0, rng.gen_range(-0.5..0.5));
                [w.re, w.im]
            })
            .collect();
        starts.push(rotated);
    }

    let mut best = None;
    let mut start_values = Vec::new();
    let mut evaluations = 0;
    let mut converged = true;
    for x0 in &starts {
        let out = nelder_mead(f, x0, budget.grid_step / 2.0, budget.max_evals, budget.rel_tol);
        evaluations += out.evaluations;
        converged &= out.converged;
        start_values.push(out.value);
        pick_better(&mut best, out.value, complex_settings(&out.point).canonical());
    }
    let (best_s, settings) = best.expect("at least one start");
    Ok(OptimizationResult {
        best_s,
        settings,
        starts_used: starts.len(),
        converged,
        objective: *objective,
        start_values,
        evaluations,
    })
}

fn check_budget(budget: &OptimizerBudget) -> Result<()> {
    check_domain("grid_step", budget.grid_step, budget.grid_step > 0.0, "> 0")?;
    check_domain("grid_bound", budget.grid_bound, budget.grid_bound > 0.0, "> 0")?;
    check_domain("restarts", budget.restarts as f64, budget.restarts > 0, ">= 1")?;
    check_domain("max_evals", budget.max_evals as f64, budget.max_evals > 8, "> 8")
}

/// One swept axis, inclusive of both ends.
#[derive(Debug, Clone, PartialEq)]
pub struct GridAxis {
    pub name: String,
    pub min: f64,
    pub max: f64,
    pub step: f64,
}

impl GridAxis {
    pub fn new(name: impl Into<String>, min: f64, max: f64, step: f64) -> Result<Self> {
        let axis = Self {
            name: name.into(),
            min,
            max,
            step,
        };
        if !(step > 0.0 && step.is_finite()) {
            return Err(Error::Sweep(format!("{}: step must be positive", axis.name)));
        }
        if !(min < max && min.is_finite() && max.is_finite()) {
            return Err(Error::Sweep(format!("{}: min must be below max", axis.name)));
        }
        Ok(axis)
    }

    pub fn g1tau_default() -> Self {
        Self::new("g1tau", 0.01, 1.0, 0.01).expect("valid default")
    }

    pub fn g2tau_default() -> Self {
        Self::new("g2tau", 0.05, 3.0, 0.05).expect("valid default")
    }

    pub fn eta_default() -> Self {
        Self::new("eta", 0.5, 1.0, 0.01).expect("valid default")
    }

    /// Grid points `min + i*step <= max`, rounded to 10 decimals so that
    /// printed values are stable.
    pub fn values(&self) -> Vec<f64> {
        let n = ((self.max - self.min) / self.step + 1e-9).floor() as usize;
        (0..=n)
            .map(|i| ((self.min + i as f64 * self.step) * 1e10).round() / 1e10)
            .collect()
    }
}

/// Conversion efficiencies drawn in the `G1 tau1` sweep.
pub const DEFAULT_T_LIST: [f64; 5] = [1.0, 0.99, 0.95, 0.9, 0.8];

/// Pair-generation parameters drawn in the `G2 tau2` sweep.
pub const DEFAULT_P_LIST: [f64; 4] = [0.39, 0.3, 0.2, 0.1];

/// A sweep over one pulse area for a list of curve parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub axis: GridAxis,
    pub curves: Vec<f64>,
    pub eta: f64,
    pub budget: OptimizerBudget,
}

/// One optimised point of a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    /// Swept pulse area.
    pub area: f64,
    /// Curve parameter (`T` for the first-pulse sweep, `p` for the second).
    pub curve: f64,
    /// Derived parameter (`p` for the first-pulse sweep, `T` for the second).
    pub derived: f64,
    pub s: f64,
    pub settings: MeasurementSettings,
    pub converged: bool,
}

/// Optimised S versus `G1 tau1` for each conversion efficiency in `t_list`.
/// Rows are grouped by curve, then ordered along the axis.
pub fn sweep_g1tau(t_list: &[f64], grid: &GridAxis, eta: f64, budget: &OptimizerBudget) -> Result<Vec<SweepRow>> {
    let points: Vec<(f64, f64)> = t_list
        .iter()
        .flat_map(|&t| grid.values().into_iter().map(move |x| (t, x)))
        .collect();
    points
        .par_iter()
        .map(|&(t, g1tau)| {
            let p = core_model::p_from_g1tau(g1tau)?;
            let res = optimize_settings(&Objective::for_params(p, t, eta)?, budget)?;
            Ok(SweepRow {
                area: g1tau,
                curve: t,
                derived: p,
                s: res.best_s,
                settings: res.settings,
                converged: res.converged,
            })
        })
        .collect()
}

/// Optimised S versus `G2 tau2` for each pair parameter in `p_list`.
pub fn sweep_g2tau(p_list: &[f64], grid: &GridAxis, eta: f64, budget: &OptimizerBudget) -> Result<Vec<SweepRow>> {
    let points: Vec<(f64, f64)> = p_list
        .iter()
        .flat_map(|&p| grid.values().into_iter().map(move |x| (p, x)))
        .collect();
    points
        .par_iter()
        .map(|&(p, g2tau)| {
            let t = core_model::t_from_g2tau(g2tau)?;
            let res = optimize_settings(&Objective::for_params(p, t, eta)?, budget)?;
            Ok(SweepRow {
                area: g2tau,
                curve: p,
                derived: t,
                s: res.best_s,
                settings: res.settings,
                converged: res.converged,
            })
        })
        .collect()
}

/// Sequential variant of [`sweep_g1tau`] for a single curve where each point
/// is refined from its predecessor's optimum instead of a fresh grid search.
pub fn sweep_g1tau_warm(t: f64, grid: &GridAxis, budget: &OptimizerBudget) -> Result<Vec<SweepRow>> {
    // a single start per point can afford a tighter stop than the cold search
    let tight = OptimizerBudget {
        rel_tol: budget.rel_tol.min(WARM_REL_TOL),
        ..*budget
    };
    let mut rows = Vec::new();
    let mut previous: Option<MeasurementSettings> = None;
    for g1tau in grid.values() {
        let p = core_model::p_from_g1tau(g1tau)?;
        let objective = Objective::ideal(p, t)?;
        let res = match previous {
            None => optimize_settings(&objective, budget)?,
            Some(start) => optimize_from(&objective, &start, &tight)?,
        };
        previous = Some(res.settings);
        rows.push(SweepRow {
            area: g1tau,
            curve: t,
            derived: p,
            s: res.best_s,
            settings: res.settings,
            converged: res.converged,
        });
    }
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContourRow {
    pub g1tau: f64,
    pub eta: f64,
    pub p: f64,
    pub s: f64,
    pub settings: MeasurementSettings,
    pub converged: bool,
}

/// Optimised efficiency-dependent S over the `(G1 tau1, eta)` grid; rows are
/// ordered by `eta`, then `G1 tau1`.
pub fn contour_eta(g1tau_grid: &GridAxis, eta_grid: &GridAxis, budget: &OptimizerBudget) -> Result<Vec<ContourRow>> {
    let points: Vec<(f64, f64)> = eta_grid
        .values()
        .into_iter()
        .flat_map(|eta| g1tau_grid.values().into_iter().map(move |g| (eta, g)))
        .collect();
    points
        .par_iter()
        .map(|&(eta, g1tau)| {
            let p = core_model::p_from_g1tau(g1tau)?;
            let res = optimize_settings(&Objective::for_params(p, 1.0, eta)?, budget)?;
            Ok(ContourRow {
                g1tau,
                eta,
                p,
                s: res.best_s,
                settings: res.settings,
                converged: res.converged,
            })
        })
        .collect()
}

/// Smallest `eta` at which some grid point violates the inequality.
pub fn eta_threshold(rows: &[ContourRow]) -> Option<f64> {
    rows.iter()
        .filter(|r| r.s > 2.0 + VIOLATION_MARGIN)
        .map(|r| r.eta)
        .min_by(f64::total_cmp)
}

/// Row with the largest S (first one on ties).
pub fn peak<'a, T, F: Fn(&T) -> f64>(rows: &'a [T], value: F) -> Option<&'a T> {
    rows.iter().fold(None, |best: Option<&T>, r| match best {
        Some(b) if value(b) >= value(r) => Some(b),
        _ => Some(r),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn product_state_cannot_violate() {
        let res = optimize_settings(&Objective::ideal(0.0, 1.0).unwrap(), &OptimizerBudget::default()).unwrap();
        assert!((res.best_s - 2.0).abs() < 1e-6);
        assert!(res.settings.norm() < 1e-6);
        assert!(!res.violates());
    }

    #[test]
    fn best_is_at_least_every_start() {
        let res = optimize_settings(&Objective::ideal(0.3, 0.9).unwrap(), &OptimizerBudget::default()).unwrap();
        assert_eq!(res.start_values.len(), res.starts_used);
        assert!(res.start_values.iter().all(|v| res.best_s >= *v));
        assert!(res.best_s <= TSIRELSON + 1e-9);
        assert!(res.settings.alpha1.re >= 0.0);
    }

    #[test]
    fn lossy_objective_needs_unit_conversion() {
        assert!(Objective::for_params(0.3, 0.9, 0.8).is_err());
        assert!(matches!(Objective::for_params(0.3, 1.0, 0.8).unwrap(), Objective::Lossy { .. }));
        assert!(matches!(Objective::for_params(0.3, 0.9, 1.0).unwrap(), Objective::Ideal { .. }));
    }

    #[test]
    fn axis_values() {
        assert_eq!(GridAxis::g1tau_default().values().len(), 100);
        assert_eq!(GridAxis::g2tau_default().values().len(), 60);
        let eta = GridAxis::eta_default().values();
        assert_eq!(eta.len(), 51);
        assert_eq!(eta[30], 0.8);
        assert!(GridAxis::new("x", 1.0, 0.5, 0.1).is_err());
        assert!(GridAxis::new("x", 0.0, 0.5, 0.0).is_err());
    }

    #[test]
    fn nelder_mead_finds_quadratic_peak() {
        let out = nelder_mead(
            |x| -((x[0] - 1.0).powi(2) + 2.0 * (x[1] + 0.5).powi(2)),
            &[0.0, 0.0],
            0.5,
            5000,
            1e-12,
        );
        assert!(out.converged);
        assert!((out.point[0] - 1.0).abs() < 1e-4 && (out.point[1] + 0.5).abs() < 1e-4);
    }

    #[test]
    fn exhausted_budget_is_reported() {
        let budget = OptimizerBudget {
            max_evals: 10,
            ..OptimizerBudget::default()
        };
        let res = optimize_settings(&Objective::ideal(0.39, 1.0).unwrap(), &budget).unwrap();
        assert!(!res.converged);
        assert!(res.best_s > 2.0);
    }
}

//! Command-line front end. [`run`] parses arguments, executes one subcommand
//! and returns the process exit code.
//!
//! Exit codes: 0 success, 1 I/O failure, 2 usage or config error,
//! 3 verification failure.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::core_model::MeasurementSettings;
use crate::dynamics::{self, LangevinParams, PulseKind};
use crate::error::{Error, Result};
use crate::feasibility::{self, compare_thermal, ThermalSpec};
use crate::fock_oracle::suite::{self, SuiteConfig};
use crate::optimizer::{self, GridAxis, OptimizerBudget, DEFAULT_P_LIST, DEFAULT_SEED, DEFAULT_T_LIST};

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_VERIFY: i32 = 3;

/// Environment variable overriding the default seed.
pub const SEED_ENV: &str = "BELLMAG_SEED";

const SETTINGS_HEADER: &str = "alpha1_re,alpha1_im,alpha2_re,alpha2_im,beta1_re,beta1_im,beta2_re,beta2_im";

#[derive(Debug, Parser)]
#[command(name = "bellmag", version, about = "CHSH Bell-test calculator for pulsed cavity optomagnonics")]
struct Cli {
    /// Worker threads for grid points (default: logical core count).
    #[arg(long, global = true, value_name = "N")]
    parallel: Option<usize>,

    /// Random seed (default: $BELLMAG_SEED, then a fixed built-in value).
    #[arg(long, global = true)]
    seed: Option<u64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Optimised S versus the first-pulse area for several conversion efficiencies.
    SweepG1tau(SweepG1Args),
    /// Optimised S versus the second-pulse area for several pair parameters.
    SweepG2tau(SweepG2Args),
    /// Optimised S over first-pulse area and detector efficiency.
    ContourEta(ContourArgs),
    /// Compare closed forms with brute-force Fock-space summation.
    OracleCheck(OracleArgs),
    /// Integrate the Langevin moment equations for one pulse.
    Dynamics(DynamicsArgs),
    /// Map an experiment config onto protocol parameters and check its conditions.
    Feasibility(FeasibilityArgs),
}

#[derive(Debug, Args)]
struct BudgetArgs {
    /// Best grid points refined by the simplex search.
    #[arg(long, default_value_t = 5)]
    restarts: usize,
    /// Spacing of the real settings grid.
    #[arg(long, default_value_t = 0.25)]
    settings_step: f64,
}

impl BudgetArgs {
    fn budget(&self) -> OptimizerBudget {
        OptimizerBudget {
            restarts: self.restarts,
            grid_step: self.settings_step,
            ..OptimizerBudget::default()
        }
    }
}

#[derive(Debug, Args)]
struct SweepG1Args {
    /// Comma-separated conversion efficiencies, one curve each.
    #[arg(long, value_delimiter = ',')]
    t_list: Option<Vec<f64>>,
    #[arg(long, default_value_t = 0.01)]
    g1tau_min: f64,
    #[arg(long, default_value_t = 1.0)]
    g1tau_max: f64,
    #[arg(long, default_value_t = 0.01)]
    g1tau_step: f64,
    /// Detector efficiency (only with T = 1).
    #[arg(long, default_value_t = 1.0)]
    eta: f64,
    /// Output CSV (default: stdout).
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    budget: BudgetArgs,
}

#[derive(Debug, Args)]
struct SweepG2Args {
    /// Comma-separated pair parameters, one curve each.
    #[arg(long, value_delimiter = ',')]
    p_list: Option<Vec<f64>>,
    #[arg(long, default_value_t = 0.05)]
    g2tau_min: f64,
    #[arg(long, default_value_t = 3.0)]
    g2tau_max: f64,
    #[arg(long, default_value_t = 0.05)]
    g2tau_step: f64,
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    budget: BudgetArgs,
}

#[derive(Debug, Args)]
struct ContourArgs {
    #[arg(long, default_value_t = 0.01)]
    g1tau_min: f64,
    #[arg(long, default_value_t = 1.0)]
    g1tau_max: f64,
    #[arg(long, default_value_t = 0.01)]
    g1tau_step: f64,
    #[arg(long, default_value_t = 0.5)]
    eta_min: f64,
    #[arg(long, default_value_t = 1.0)]
    eta_max: f64,
    #[arg(long, default_value_t = 0.01)]
    eta_step: f64,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write the threshold summary to this file.
    #[arg(long)]
    summary: Option<PathBuf>,
    #[command(flatten)]
    budget: BudgetArgs,
}

#[derive(Debug, Args)]
struct OracleArgs {
    /// Random (p, T, settings) draws for the probability checks.
    #[arg(long, default_value_t = 200)]
    samples: usize,
    /// Absolute tolerance for probabilities, correlations, S and the propagator chain.
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    /// Absolute tolerance for the loss-channel Q functions.
    #[arg(long, default_value_t = 1e-8)]
    loss_tol: f64,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum PulseArg {
    Squeezer,
    BeamSplitter,
}

#[derive(Debug, Args)]
struct DynamicsArgs {
    #[arg(long, value_enum, default_value_t = PulseArg::Squeezer)]
    pulse: PulseArg,
    /// Coupling in units of the cavity linewidth, G/kappa.
    #[arg(long, default_value_t = 0.02)]
    coupling_ratio: f64,
    /// Pulse area 2 G^2 tau / kappa (default 0.25 squeezer, 1.5 beam splitter).
    #[arg(long)]
    area: Option<f64>,
    /// Pulse duration in units of 1/kappa; required when the coupling is zero.
    #[arg(long)]
    tau: Option<f64>,
    /// Magnon decay rate in units of kappa.
    #[arg(long, default_value_t = 0.0)]
    gamma: f64,
    #[arg(long, default_value_t = 0.0)]
    n_th: f64,
    /// Initial magnon occupation for the beam-splitter pulse.
    #[arg(long, default_value_t = 1.0)]
    m_occ0: f64,
    /// Time step in units of 1/kappa (at most 0.01).
    #[arg(long)]
    dt: Option<f64>,
    /// Approximate number of rows in the time series.
    #[arg(long, default_value_t = 200)]
    rows: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct FeasibilityArgs {
    /// Experiment config (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Print the report as JSON instead of text.
    #[arg(long)]
    json: bool,
    /// Also run the optimiser for the resulting (p, T).
    #[arg(long)]
    optimize: bool,
}

/// Runs the command line given in `args` (including the program name).
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let threads = match cli.parallel {
        Some(0) => {
            eprintln!("error: --parallel must be at least 1");
            return EXIT_USAGE;
        }
        Some(n) => n,
        None => 0,
    };
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(threads).build() {
        Ok(pool) => pool,
        Err(e) => {
            eprintln!("error: cannot start worker pool: {e}");
            return EXIT_IO;
        }
    };
    let seed = match resolve_seed(cli.seed) {
        Ok(seed) => seed,
        Err(msg) => {
            eprintln!("error: {msg}");
            return EXIT_USAGE;
        }
    };
    match pool.install(|| dispatch(&cli.command, seed)) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn resolve_seed(flag: Option<u64>) -> std::result::Result<u64, String> {
    if let Some(seed) = flag {
        return Ok(seed);
    }
    match std::env::var(SEED_ENV) {
        Ok(v) => v.trim().parse().map_err(|_| format!("{SEED_ENV}={v:?} is not an unsigned integer")),
        Err(_) => Ok(DEFAULT_SEED),
    }
}

/// Exit code for a library error.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Io(_) => EXIT_IO,
        Error::Truncation { .. } | Error::Unstable { .. } => EXIT_VERIFY,
        Error::Domain { .. }
        | Error::SingularDrive
        | Error::Schema { .. }
        | Error::Unsupported(_)
        | Error::Sweep(_)
        | Error::Json(_) => EXIT_USAGE,
    }
}

fn dispatch(command: &Command, seed: u64) -> Result<i32> {
    match command {
        Command::SweepG1tau(a) => sweep_g1tau(a),
        Command::SweepG2tau(a) => sweep_g2tau(a),
        Command::ContourEta(a) => contour_eta(a),
        Command::OracleCheck(a) => oracle_check(a, seed),
        Command::Dynamics(a) => run_dynamics(a),
        Command::Feasibility(a) => run_feasibility(a),
    }
}

fn open_output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

/// Maps `-0.0` to `0.0` so that printed zeros carry no sign.
fn unsigned_zero(x: f64) -> f64 {
    x + 0.0
}

fn settings_fields(s: &MeasurementSettings) -> String {
    s.as_array()
        .iter()
        .map(|z| format!("{:.12},{:.12}", unsigned_zero(z.re), unsigned_zero(z.im)))
        .collect::<Vec<_>>()
        .join(",")
}

fn sweep_g1tau(a: &SweepG1Args) -> Result<i32> {
    let grid = GridAxis::new("g1tau", a.g1tau_min, a.g1tau_max, a.g1tau_step)?;
    let t_list = a.t_list.clone().unwrap_or_else(|| DEFAULT_T_LIST.to_vec());
    let rows = optimizer::sweep_g1tau(&t_list, &grid, a.eta, &a.budget.budget())?;
    let mut out = open_output(a.out.as_deref())?;
    writeln!(out, "g1tau,T,p,S,{SETTINGS_HEADER}")?;
    for r in &rows {
        writeln!(
            out,
            "{},{},{:.12},{:.12},{}",
            r.area,
            r.curve,
            r.derived,
            r.s,
            settings_fields(&r.settings)
        )?;
    }
    out.flush()?;
    Ok(EXIT_OK)
}

fn sweep_g2tau(a: &SweepG2Args) -> Result<i32> {
    let grid = GridAxis::new("g2tau", a.g2tau_min, a.g2tau_max, a.g2tau_step)?;
    let p_list = a.p_list.clone().unwrap_or_else(|| DEFAULT_P_LIST.to_vec());
    let rows = optimizer::sweep_g2tau(&p_list, &grid, 1.0, &a.budget.budget())?;
    let mut out = open_output(a.out.as_deref())?;
    writeln!(out, "g2tau,p,T,S,{SETTINGS_HEADER}")?;
    for r in &rows {
        writeln!(
            out,
            "{},{},{:.12},{:.12},{}",
            r.area,
            r.curve,
            r.derived,
            r.s,
            settings_fields(&r.settings)
        )?;
    }
    out.flush()?;
    Ok(EXIT_OK)
}

fn contour_eta(a: &ContourArgs) -> Result<i32> {
    let g1 = GridAxis::new("g1tau", a.g1tau_min, a.g1tau_max, a.g1tau_step)?;
    let eta = GridAxis::new("eta", a.eta_min, a.eta_max, a.eta_step)?;
    let rows = optimizer::contour_eta(&g1, &eta, &a.budget.budget())?;
    let mut out = open_output(a.out.as_deref())?;
    writeln!(out, "g1tau,eta,S,{SETTINGS_HEADER}")?;
    for r in &rows {
        writeln!(out, "{},{},{:.12},{}", r.g1tau, r.eta, r.s, settings_fields(&r.settings))?;
    }
    out.flush()?;
    drop(out);

    let summary = match optimizer::eta_threshold(&rows) {
        Some(eta) => {
            let at = rows
                .iter()
                .filter(|r| r.eta == eta)
                .max_by(|x, y| x.s.total_cmp(&y.s))
                .expect("threshold row exists");
            format!("eta_threshold={eta} g1tau={} S={:.12}", at.g1tau, at.s)
        }
        None => "eta_threshold=none".to_string(),
    };
    // keep stdout clean when it carries the CSV
    if a.out.is_some() {
        println!("{summary}");
    } else {
        eprintln!("{summary}");
    }
    if let Some(path) = &a.summary {
        std::fs::write(path, format!("{summary}\n"))?;
    }
    Ok(EXIT_OK)
}

fn oracle_check(a: &OracleArgs, seed: u64) -> Result<i32> {
    let mut config = SuiteConfig::new(a.samples, seed);
    config.tol = a.tol;
    config.loss_tol = a.loss_tol;
    let report = suite::run(&config)?;
    println!("seed {seed}");
    for check in &report.checks {
        println!("{check}");
    }
    if report.passed() {
        return Ok(EXIT_OK);
    }
    for check in report.failures() {
        println!("failing {}: {}", check.name, check.worst_case);
    }
    Ok(EXIT_VERIFY)
}

fn run_dynamics(a: &DynamicsArgs) -> Result<i32> {
    let kind = match a.pulse {
        PulseArg::Squeezer => PulseKind::Squeezer,
        PulseArg::BeamSplitter => PulseKind::BeamSplitter,
    };
    let params = LangevinParams::dimensionless(kind, a.coupling_ratio).with_magnon_bath(a.gamma, a.n_th);
    let area = a.area.unwrap_or(match kind {
        PulseKind::Squeezer => 0.25,
        PulseKind::BeamSplitter => 1.5,
    });
    let tau = match a.tau {
        Some(tau) => tau,
        None if a.coupling_ratio > 0.0 => params.duration_for_area(area),
        None => return Err(Error::Sweep("zero coupling needs an explicit --tau".into())),
    };
    let area = params.effective_rate() * tau;
    let dt = a.dt.unwrap_or_else(|| params.default_step(tau));
    let steps = (tau / dt).ceil().max(1.0) as usize;
    let every = (steps / a.rows.max(1)).max(1);
    let m_occ0 = match kind {
        PulseKind::Squeezer => 0.0,
        PulseKind::BeamSplitter => a.m_occ0,
    };
    let traj = dynamics::integrate(&params, m_occ0, tau, dt, Some(every))?;

    let mut out = open_output(a.out.as_deref())?;
    writeln!(out, "t,occ_cav,occ_mag,out_mode_occ")?;
    for s in &traj.samples {
        writeln!(
            out,
            "{:.9},{:.12e},{:.12e},{:.12e}",
            s.time, s.cavity_occupation, s.magnon_occupation, s.output_occupation
        )?;
    }
    out.flush()?;
    drop(out);

    let end = traj.last();
    let closed = dynamics::closed_form(&params, area, m_occ0);
    let mut summary = format!(
        "pulse={kind:?} G/kappa={} area={area:.6} tau={tau:.6} dt={dt:.3e}\n",
        a.coupling_ratio
    );
    for (name, sim, target) in [
        ("magnon", end.magnon_occupation, closed.magnon_occupation),
        ("output", end.output_occupation, closed.output_occupation),
        ("cavity", end.cavity_occupation, closed.cavity_occupation),
    ] {
        let dev = if target != 0.0 {
            format!("rel_dev={:.3e}", (sim - target).abs() / target.abs())
        } else {
            format!("abs_dev={:.3e}", (sim - target).abs())
        };
        summary.push_str(&format!("{name}: integrated={sim:.9e} closed_form={target:.9e} {dev}\n"));
    }
    if a.gamma > 0.0 {
        summary.push_str("note: closed forms neglect magnon damping\n");
    }
    if a.out.is_some() {
        print!("{summary}");
    } else {
        eprint!("{summary}");
    }
    Ok(EXIT_OK)
}

fn run_feasibility(a: &FeasibilityArgs) -> Result<i32> {
    let params = feasibility::load_config(&a.config)?;
    let mut report = feasibility::analyze(&params)?;
    if a.optimize {
        report = report.with_optimized_s(&OptimizerBudget::default())?;
    }
    let thermal = match (params.omega_m, temperature_of(&a.config)?) {
        (Some(omega), Some(temp)) => {
            let quoted = match params.thermal {
                ThermalSpec::Occupation(n) => n,
                ThermalSpec::Temperature(_) => report.n_th,
            };
            Some(compare_thermal(omega, temp, quoted)?)
        }
        _ => None,
    };
    if a.json {
        let block = serde_json::json!({ "report": report, "thermal": thermal });
        println!("{}", serde_json::to_string_pretty(&block)?);
    } else {
        print!("{}", report.to_text());
        if let Some(t) = thermal {
            println!(
                "thermal          n_th used = {}; Bose-Einstein at {} K: {:.3e} (omega as rad/s), {:.3e} (omega as Hz)",
                t.quoted, t.temperature, t.angular, t.ordinary
            );
            if (t.angular - t.quoted).abs() > 0.1 * t.quoted && (t.ordinary - t.quoted).abs() > 0.1 * t.quoted {
                println!("warning: the n_th used does not follow from the temperature under either convention");
            }
        }
    }
    Ok(EXIT_OK)
}

/// The config's temperature, also when `n_th` is given and takes precedence.
fn temperature_of(path: &Path) -> Result<Option<f64>> {
    let value: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(path)?)?;
    Ok(value
        .get("temperature")
        .and_then(|v| v.as_str())
        .and_then(feasibility::parse_temperature))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn usage_errors_exit_two() {
        assert_eq!(run(["bellmag", "no-such-command"]), EXIT_USAGE);
        assert_eq!(run(["bellmag", "sweep-g1tau", "--g1tau-step", "abc"]), EXIT_USAGE);
        assert_eq!(run(["bellmag", "--parallel", "0", "oracle-check", "--samples", "1"]), EXIT_USAGE);
    }

    #[test]
    fn help_exits_zero() {
        assert_eq!(run(["bellmag", "--help"]), EXIT_OK);
    }

    #[test]
    fn error_classes() {
        assert_eq!(exit_code(&Error::Io(io::Error::other("x"))), EXIT_IO);
        assert_eq!(exit_code(&Error::Schema { keys: vec![] }), EXIT_USAGE);
        assert_eq!(
            exit_code(&Error::Unstable {
                time: 0.0,
                reason: String::new()
            }),
            EXIT_VERIFY
        );
    }

    #[test]
    fn seed_flag_wins() {
        assert_eq!(resolve_seed(Some(5)), Ok(5));
    }
}

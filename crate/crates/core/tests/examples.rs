// Each example doubles as a smoke test of the public API.

#[path = "../examples/closed_forms.rs"]
mod closed_forms;
#[path = "../examples/conversion_sweep.rs"]
mod conversion_sweep;
#[path = "../examples/efficiency_contour.rs"]
mod efficiency_contour;
#[path = "../examples/feasibility_report.rs"]
mod feasibility_report;
#[path = "../examples/langevin_dynamics.rs"]
mod langevin_dynamics;
#[path = "../examples/oracle_check.rs"]
mod oracle_check;
#[path = "../examples/peak_violation.rs"]
mod peak_violation;

#[test]
fn closed_forms_runs() {
    closed_forms::run_example().unwrap();
}

#[test]
fn conversion_sweep_runs() {
    conversion_sweep::run_example().unwrap();
}

#[test]
fn efficiency_contour_runs() {
    efficiency_contour::run_example().unwrap();
}

#[test]
fn feasibility_report_runs() {
    feasibility_report::run_example().unwrap();
}

#[test]
fn langevin_dynamics_runs() {
    langevin_dynamics::run_example().unwrap();
}

#[test]
fn oracle_check_runs() {
    oracle_check::run_example().unwrap();
}

#[test]
fn peak_violation_runs() {
    peak_violation::run_example().unwrap();
}

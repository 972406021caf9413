//! One line per acceptance criterion, with the pinned tolerances. Exits
//! non-zero if any criterion fails.

use std::time::Instant;

use bellmag_acceptance::*;

fn report(index: usize, title: &str, started: Instant, result: bellmag::Result<Outcome>) -> bool {
    let secs = started.elapsed().as_secs_f64();
    let (pass, detail) = match result {
        Ok(o) => (o.pass, o.detail),
        Err(e) => (false, format!("error: {e}")),
    };
    println!(
        "[{}] {index}. {title}: {detail} ({secs:.1} s)",
        if pass { "PASS" } else { "FAIL" }
    );
    pass
}

fn main() {
    let mut passed = Vec::new();

    let start = Instant::now();
    let (first, p_opt) = match peak_violation() {
        Ok((o, p)) => (Ok(o), p),
        Err(e) => (Err(e), f64::NAN),
    };
    passed.push(report(1, "peak violation", start, first));
    let start = Instant::now();
    passed.push(report(2, "squeezing anchor", start, squeezing_anchor(p_opt)));
    let start = Instant::now();
    passed.push(report(3, "efficiency threshold", start, efficiency_threshold()));
    let start = Instant::now();
    passed.push(report(4, "conversion figure", start, conversion_figure()));
    let start = Instant::now();
    passed.push(report(5, "conversion asymptote", start, asymptote()));
    let start = Instant::now();
    passed.push(report(6, "oracle equivalence", start, oracle_equivalence()));
    let start = Instant::now();
    passed.push(report(7, "Q-function reduction", start, q_reduction()));
    let start = Instant::now();
    passed.push(report(8, "dynamics convergence", start, dynamics_convergence()));
    let start = Instant::now();
    passed.push(report(9, "property suite", start, property_suite()));

    let failed = passed.iter().filter(|p| !**p).count();
    println!("{} of {} criteria passed", passed.len() - failed, passed.len());
    if failed > 0 {
        std::process::exit(1);
    }
}

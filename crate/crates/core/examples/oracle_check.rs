//! Closed forms against brute-force Fock-space summation, the pulse
//! propagators and the loss channel.
//!
//! cargo run --release --example oracle_check

use bellmag::fock_oracle::suite::{run, SuiteConfig};
use bellmag::fock_oracle::{apply_u1_vacuum, apply_u2, build_rho_pair};

pub fn run_example() -> bellmag::Result<()> {
    let report = run(&SuiteConfig::new(40, 1))?;
    for check in &report.checks {
        println!("{check}");
    }

    // the magnon keeps what the second pulse did not convert
    let (p, g2tau) = (0.39, 1.5);
    let psi = apply_u2(&apply_u1_vacuum(p, 30)?, g2tau)?;
    let t = bellmag::core_model::t_from_g2tau(g2tau)?;
    println!("three-mode norm              {:.12}", psi.trace());
    println!("magnon-vacuum block weight   {:.12}", psi.magnon_vacuum_block()?.trace());
    println!("pair state trace             {:.12}", build_rho_pair(p, t, 30)?.trace());
    Ok(())
}

#[allow(dead_code)]
fn main() -> bellmag::Result<()> {
    run_example()
}

//! CHSH Bell tests with photon pairs from a pulsed cavity-optomagnonic source.
//!
//! A first pump pulse creates a two-mode squeezed state between an optical
//! whispering-gallery mode and a magnon (pair parameter `p`); a second pulse
//! converts the magnon into a second optical mode with efficiency `T`. Both
//! photons are measured with displaced on-off detectors.
//!
//! * [`core_model`]: closed-form click probabilities, correlations and S, with
//!   and without detector loss.
//! * [`fock_oracle`]: independent truncated Fock-space reconstruction of the
//!   same quantities, plus the pulse propagators and the loss channel.
//! * [`dynamics`]: second-moment integration of the Langevin equations without
//!   adiabatic elimination.
//! * [`optimizer`]: maximisation of S over measurement settings and the
//!   parameter sweeps built on it.
//! * [`feasibility`]: mapping of laboratory numbers onto `(p, T)` and checks of
//!   the approximations involved.
//! * [`cli`]: the `bellmag` command line.

pub mod cli;
pub mod core_model;
pub mod dynamics;
pub mod error;
pub mod feasibility;
pub mod fock_oracle;
pub mod optimizer;

pub use core_model::{
    chsh_s, chsh_s_eta, correlation, correlation_eta, joint_click_prob, marginal_click_prob, MeasurementSettings,
};
pub use error::{Error, Result};
pub use num_complex::Complex64;
pub use optimizer::{optimize_settings, Objective, OptimizationResult, OptimizerBudget};

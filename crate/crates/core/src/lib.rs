//! Master–slave synchronization of chaotic Colpitts oscillators.
//!
//! The crate provides the oscillator model, a backstepping controller that
//! drives a slave oscillator onto a free-running master, a fixed-step
//! simulator that scores a gain choice by its total sum of squared errors,
//! and two population optimizers (shark smell and particle swarm) that tune
//! the controller gains.
//!
//! ```
//! use colpitts_sync::{evaluate_gains, OscillatorParams, SimConfig};
//!
//! let cfg = SimConfig { dt: 1e-2, t_final: 5.0, t_activate: 1.0, ..SimConfig::default() };
//! let cost = evaluate_gains(0.0, 2.5, &OscillatorParams::TYPICAL, &cfg);
//! assert!(cost.is_finite() && cost > 0.0);
//! ```

pub mod control;
pub mod error;
pub mod model;
pub mod optim;
pub mod pso;
pub mod sim;
pub mod sso;

pub use control::{
    characteristic_polynomial, closed_loop_matrix, control_law, control_law_with, is_hurwitz,
    lyapunov_values, transform_error, ControlLaw, Gains, LyapunovValues, TransformedError,
};
pub use error::{Error, Result};
pub use model::{
    error_derivative, master_derivative, nonlinearity, slave_derivative, ControlSignal,
    ErrorState, OscillatorParams, State3,
};
pub use optim::{argmin, is_sentinel, Algorithm, Bounds, ConvergencePoint, Execution, OptResult};
pub use pso::{pso_optimize, PsoConfig};
pub use sim::{
    evaluate_gains, rk4_step, simulate_pair, simulate_single, tss_cost, CostResult, GainObjective,
    SimConfig, Trajectory, DIVERGED_COST,
};
pub use sso::{
    fd_gradient, sso_optimize, sso_stage, sso_velocity, FdGradient, Schedule, SharkPopulation,
    SsoConfig, StageCoefficients, StageOutcome,
};

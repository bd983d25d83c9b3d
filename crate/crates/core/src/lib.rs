//! Heston stochastic-volatility option pricing by exact and discretised
//! Monte Carlo simulation, with pathwise Greeks.

// `!(x > 0)` style checks are deliberate: they reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod engine;
pub mod error;
pub mod exact_sim;
pub mod model;
pub mod num;
pub mod products;
pub mod random;
pub mod schemes;

pub use engine::{
    gamma_fd, greeks, price, run_experiment, validate_inputs, ExperimentRow, Greeks, McSummary,
    Parallelism, Scheme, SimConfig,
};
pub use error::{HestonError, Result};
pub use model::HestonParams;
pub use num::Real;
pub use products::{OptionSpec, PathObservables, Right, Style};
pub use random::SamplerKind;

pub type HestonParamsF64 = HestonParams<f64>;
pub type HestonParamsF32 = HestonParams<f32>;
pub type OptionSpecF64 = OptionSpec<f64>;
pub type OptionSpecF32 = OptionSpec<f32>;

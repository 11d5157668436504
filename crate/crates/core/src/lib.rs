//! Short-term wind-speed forecasting with stacked LSTM and GRU networks.
//!
//! The crate is organized bottom-up:
//!
//! - [`numerics`]: dense `f64` tensors, activations, seeded sampling and
//!   multiply-add counting.
//! - [`cells`]: single-step LSTM/GRU forward and backward passes.
//! - [`network`]: stacked models with stateful or stateless state handling,
//!   full-window BPTT and checkpoints.
//! - [`optim`]: Adam, global-norm clipping and the finite-difference gradient check.
//! - [`data`]: NOAA LCD hourly CSV ingestion, cleaning, scaling and windowing.
//! - [`experiment`]: the training loop, metrics and the model/site/month grid.

pub mod cells;
pub mod error;
pub mod exec;
pub mod numerics;

pub use error::{Error, Result};
pub use exec::Execution;
pub mod network;
pub mod optim;
pub mod data;
pub mod experiment;

//! Hidden-vector adaptive optimization with first-order baselines, toy
//! objectives and a deterministic benchmark harness.
//!
//! The crate is organized bottom-up:
//!
//! * [`vector`]: dense `f64` vectors and the inner-product helpers.
//! * [`optim`], [`baselines`]: the optimizer trait, EMA helpers, SGDM, Adam, AdaBelief.
//! * [`hvadam`]: the hidden-vector optimizer and its restart controller.
//! * [`objectives`]: toy functions, the logistic task and finite-difference checks.
//! * [`harness`]: runs, races and sweeps; [`output`] and [`plot`] serialize them.
//! * [`verify`]: executable property suites over the hidden-vector machinery.
//!
//! Batch work (races, sweeps, randomized trials) runs on rayon when the
//! default `parallel` feature is enabled and sequentially otherwise.

pub mod baselines;
pub mod config;
pub mod error;
pub mod harness;
pub mod hvadam;
pub mod objectives;
pub mod optim;
pub mod output;
pub mod par;
pub mod plot;
pub mod projection;
pub mod vector;
pub mod verify;

pub use baselines::{AdaBelief, Adam, BaselineState, OptimizerConfig, Sgdm};
pub use error::{OptError, Result};
pub use harness::{apply_overrides, race, run, sweep, OptimizerSpec, RaceTable, RunRecord, RunSpec, RunSummary};
pub use hvadam::{HVAdam, HVAdamConfig, HVAdamState, LrSchedule, StepDiagnostics};
pub use objectives::{fd_check, objective_by_id, LogisticTask, Objective, ToyFunction};
pub use optim::Optimizer;
pub use projection::{project, BoxConstraint};
pub use vector::{cosine, dot, norm2, ParamVector};

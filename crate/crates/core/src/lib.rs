//! Federated data-driven evolutionary optimization.
//!
//! Simulated clients each hold a private archive of expensive objective
//! evaluations and a radial-basis-function surrogate trained on it. A
//! server aggregates uploaded surrogates by sorted averaging, minimizes a
//! federated lower-confidence-bound acquisition with a real-coded genetic
//! algorithm, and broadcasts the winner for the clients to evaluate.
//!
//! ```no_run
//! use fedsurr::{run_optimization, ExperimentConfig, ProblemId};
//!
//! let cfg = ExperimentConfig::new(ProblemId::Ellipsoid, 10);
//! let trace = run_optimization(&cfg, 42).unwrap();
//! println!("best after {} FEs: {}", trace.records.last().unwrap().fe, trace.final_best());
//! ```

// `!(x > 0.0)` is used deliberately so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod acquisition;
pub mod aggregation;
pub mod benchmarks;
pub mod config;
pub mod error;
pub mod evolution;
pub mod exec;
pub mod federation;
pub mod harness;
pub mod sampling;
pub mod surrogate;

pub use acquisition::{AcquisitionContext, AcquisitionKind};
pub use aggregation::{client_weights, index_average, sorted_average, Aggregator, ClientWeights};
pub use benchmarks::{evaluate, evaluate_noisy, is_feasible, Bounds, NoiseSpec, ProblemId};
pub use config::{ExperimentConfig, Settings};
pub use error::{Error, Result};
pub use evolution::{minimize, GaConfig};
pub use exec::Execution;
pub use federation::{run_optimization, run_optimization_with, RoundRecord, RunTrace, Simulation};
pub use harness::{run_experiment, ExperimentSummary};
pub use sampling::{latin_hypercube, spawn_stream, Stream};
pub use surrogate::{predict, train, train_in, Dataset, RbfnParams, TrainingSpace};

//! Benchmarking toolkit for quantum-inspired combinatorial optimization.
//!
//! Problems (knapsack, independent set, quadratic assignment, market split)
//! are lowered to QUBO form and solved with Pauli correlation encoding or
//! small variational circuits on an exact statevector simulator. Results are
//! scored against exhaustive classical oracles.

pub mod baselines;
pub mod error;
pub mod formulation;
pub mod harness;
pub mod metrics;
pub mod pce;
pub mod problems;
pub mod simulator;
pub mod variational;

pub use error::{Error, Result};
pub use formulation::{IlpModel, IsingModel, PenaltyConfig, QuboModel, Sense, VariableMap};
pub use metrics::BenchmarkRecord;

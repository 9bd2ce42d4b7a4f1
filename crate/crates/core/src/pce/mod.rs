//! Pauli correlation encoding: `m` binary variables carried by the signs of
//! `m` two-body correlators on `O(sqrt(m))` qubits.

pub mod ansatz;
pub mod bitswap;
pub mod encoding;
pub mod loss;
pub mod multistep;
pub mod optimizer;

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::formulation::{qubo_to_ising, spins_to_bits, QuboModel};
use crate::metrics::{RunStatus, SolverOutput};
use crate::simulator::{pauli_expectation, resource_summary, run_circuit_with_cap, Circuit, DEFAULT_QUBIT_CAP};

pub use ansatz::{build_brickwork, BrickworkConfig};
pub use bitswap::{bit_swap_search, BitSwapResult};
pub use encoding::{build_encoding, decode_bits, required_qubits, PceEncoding};
pub use loss::{maxcut_pce_loss, poljak_turzik_bound, qubo_pce_loss, LossConfig, LossMode, QuboLoss, WeightedGraph};
pub use multistep::{multi_step_optimize, Branch, MultiStepConfig, MultiStepResult, RoundRecord};
pub use optimizer::{local_optimize, LocalResult, NelderMeadOptions, StopReason};

/// A QUBO bound to its encoding, ansatz and loss.
#[derive(Debug, Clone)]
pub struct PceModel {
    qubo: QuboModel,
    encoding: PceEncoding,
    circuit: Circuit,
    loss: QuboLoss,
    qubit_cap: usize,
}

impl PceModel {
    pub fn new(qubo: &QuboModel, loss: LossConfig, ansatz: &BrickworkConfig, qubit_cap: usize) -> Result<Self> {
        let m = qubo.dimension();
        if m == 0 {
            return Err(Error::EmptyInput);
        }
        let n = required_qubits(m);
        if n > qubit_cap {
            return Err(Error::QubitCapExceeded {
                requested: n,
                cap: qubit_cap,
            });
        }
        let encoding = build_encoding(m, n)?;
        let circuit = build_brickwork(&BrickworkConfig {
            num_qubits: n,
            ..ansatz.clone()
        })?;
        Ok(Self {
            qubo: qubo.clone(),
            encoding,
            circuit,
            loss: QuboLoss::new(&qubo_to_ising(qubo), loss)?,
            qubit_cap,
        })
    }

    pub fn qubo(&self) -> &QuboModel {
        &self.qubo
    }

    pub fn encoding(&self) -> &PceEncoding {
        &self.encoding
    }

    pub fn circuit(&self) -> &Circuit {
        &self.circuit
    }

    pub fn num_params(&self) -> usize {
        self.circuit.num_params()
    }

    pub fn correlators(&self, theta: &[f64]) -> Result<Vec<f64>> {
        let state = run_circuit_with_cap(&self.circuit, theta, self.qubit_cap)?;
        self.encoding
            .strings()
            .iter()
            .map(|p| pauli_expectation(&state, p))
            .collect()
    }

    /// Loss at `theta`; parameter-count errors surface as `NaN`.
    pub fn loss(&self, theta: &[f64]) -> f64 {
        match self.correlators(theta) {
            Ok(c) => self.loss.value(&c),
            Err(_) => f64::NAN,
        }
    }

    /// Bitstring decoded from the correlator signs at `theta`.
    pub fn decode(&self, theta: &[f64]) -> Vec<u8> {
        match self.correlators(theta) {
            Ok(c) => spins_to_bits(&decode_bits(&c)),
            Err(_) => vec![1; self.qubo.dimension()],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PceOptions {
    pub loss: LossConfig,
    /// Ansatz template; the qubit count is filled in from the QUBO size.
    pub ansatz: BrickworkConfig,
    pub multistep: MultiStepConfig,
    /// Widest flip considered by the post-processing search (1 or 2).
    pub swap_width: usize,
    pub swap_budget: usize,
    pub qubit_cap: usize,
}

impl Default for PceOptions {
    fn default() -> Self {
        Self {
            loss: LossConfig::default(),
            ansatz: BrickworkConfig::default(),
            multistep: MultiStepConfig::default(),
            swap_width: 2,
            swap_budget: 50_000_000,
            qubit_cap: DEFAULT_QUBIT_CAP,
        }
    }
}

/// Encode, optimise, decode and polish one QUBO.
pub fn solve_pce(qubo: &QuboModel, opts: &PceOptions, seed: u64) -> Result<SolverOutput> {
    if qubo.dimension() == 0 {
        return Ok(SolverOutput::trivial("pce", qubo));
    }
    let model = PceModel::new(qubo, opts.loss, &opts.ansatz, opts.qubit_cap)?;
    let t0 = Instant::now();
    let ms = multi_step_optimize(&model, &opts.multistep, seed);
    let t1 = Instant::now();
    let polished = bit_swap_search(&ms.bits, qubo, opts.swap_width, opts.swap_budget)?;
    let t2 = Instant::now();
    let status = match (ms.status, polished.status) {
        (StopReason::Deadline, _) => RunStatus::TimedOut,
        (_, StopReason::BudgetExhausted) => RunStatus::BudgetExhausted,
        _ => RunStatus::Completed,
    };
    Ok(SolverOutput {
        method: "pce".into(),
        bits: polished.bits,
        qubo_value: polished.value,
        raw_value: Some(ms.objective),
        qubits: model.encoding.num_qubits(),
        resources: Some(resource_summary(&model.circuit)),
        evaluations: ms.evals,
        status,
        optimize_secs: (t1 - t0).as_secs_f64(),
        postprocess_secs: (t2 - t1).as_secs_f64(),
        log: ms.log_lines(),
    })
}

//! Sampling-based VQE and QAOA (with optional CVaR aggregation).

use std::f64::consts::{FRAC_PI_2, PI};
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::formulation::{qubo_to_ising, IsingModel, QuboModel};
use crate::metrics::{RunStatus, SolverOutput};
use crate::pce::ansatz::random_parameters;
use crate::pce::optimizer::{local_optimize, NelderMeadOptions, StopReason};
use crate::simulator::{
    index_to_bits, resource_summary, run_circuit_with_cap, sample_with, Angle, Circuit, Gate, ResourceSummary,
    StateVector,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Vqe,
    Qaoa,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "kind", content = "alpha")]
pub enum Aggregator {
    Mean,
    Cvar(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct VariationalConfig {
    pub method: Method,
    pub aggregator: Aggregator,
    /// Hardware-efficient ansatz repetitions.
    pub reps: usize,
    /// QAOA depth `p`.
    pub depth: usize,
    pub max_evals: usize,
    pub shots: usize,
    pub qubit_cap: usize,
    #[serde(skip)]
    pub deadline: Option<Instant>,
}

impl Default for VariationalConfig {
    fn default() -> Self {
        Self {
            method: Method::Vqe,
            aggregator: Aggregator::Mean,
            reps: 1,
            depth: 1,
            max_evals: 5000,
            shots: 4000,
            qubit_cap: 20,
            deadline: None,
        }
    }
}

impl VariationalConfig {
    pub fn validate(&self) -> Result<()> {
        if let Aggregator::Cvar(a) = self.aggregator {
            if !(a > 0.0 && a <= 1.0) {
                return Err(Error::Invalid(format!("CVaR alpha {a} outside (0, 1]")));
            }
        }
        if self.reps == 0 || self.depth == 0 || self.shots == 0 {
            return Err(Error::Invalid("reps, depth and shots must be positive".into()));
        }
        Ok(())
    }

    pub fn method_name(&self) -> &'static str {
        match (self.method, self.aggregator) {
            (Method::Vqe, Aggregator::Mean) => "vqe",
            (Method::Vqe, Aggregator::Cvar(_)) => "cvar-vqe",
            (Method::Qaoa, Aggregator::Mean) => "qaoa",
            (Method::Qaoa, Aggregator::Cvar(_)) => "cvar-qaoa",
        }
    }
}

/// Mean, or the mean of the `ceil(alpha N)` smallest values.
pub fn aggregate_energies(energies: &[f64], aggregator: Aggregator) -> Result<f64> {
    if energies.is_empty() {
        return Err(Error::EmptySample);
    }
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    match aggregator {
        Aggregator::Mean => Ok(mean(energies)),
        Aggregator::Cvar(alpha) => {
            if !(alpha > 0.0 && alpha <= 1.0) {
                return Err(Error::Invalid(format!("CVaR alpha {alpha} outside (0, 1]")));
            }
            let n = energies.len();
            let k = ((alpha * n as f64).ceil() as usize).clamp(1, n);
            if k == n {
                return Ok(mean(energies));
            }
            let mut sorted = energies.to_vec();
            sorted.sort_by(f64::total_cmp);
            Ok(mean(&sorted[..k]))
        }
    }
}

/// `reps` blocks of RY and RZ layers separated by a linear chain of
/// RXX(pi/2) entanglers, then a final RY/RZ layer.
pub fn build_hardware_efficient(n: usize, reps: usize) -> Result<Circuit> {
    if n == 0 {
        return Err(Error::Invalid("ansatz needs at least one qubit".into()));
    }
    let mut c = Circuit::new(n);
    let layer = |c: &mut Circuit| {
        for q in 0..n {
            let t = c.new_param();
            c.add(Gate::Ry(q, t));
        }
        for q in 0..n {
            let t = c.new_param();
            c.add(Gate::Rz(q, t));
        }
    };
    for _ in 0..reps {
        layer(&mut c);
        for q in 0..n.saturating_sub(1) {
            c.add(Gate::Rxx(q, q + 1, Angle::Fixed(FRAC_PI_2)));
        }
    }
    layer(&mut c);
    Ok(c)
}

/// Fixed-angle QAOA circuit for `ising` (spin `+1` read out as bit `1`).
pub fn qaoa_circuit(ising: &IsingModel, gammas: &[f64], betas: &[f64]) -> Result<Circuit> {
    if gammas.len() != betas.len() || gammas.is_empty() {
        return Err(Error::ParamCountMismatch {
            expected: gammas.len().max(1),
            got: betas.len(),
        });
    }
    let n = ising.num_spins();
    if n == 0 {
        return Err(Error::EmptyInput);
    }
    let mut c = Circuit::new(n);
    for q in 0..n {
        c.add(Gate::Ry(q, Angle::Fixed(FRAC_PI_2)));
    }
    let edges: Vec<_> = ising.edges().collect();
    for (&gamma, &beta) in gammas.iter().zip(betas) {
        // with z = 1 - 2x and s = 2x - 1 the cost operator is sum J Z Z - sum h Z
        for (q, &h) in ising.fields.iter().enumerate() {
            if h != 0.0 {
                c.add(Gate::Rz(q, Angle::Fixed(-2.0 * gamma * h)));
            }
        }
        for &(i, j, w) in &edges {
            // RY(pi/2) maps Z to X, so this conjugation turns RXX into RZZ
            c.add(Gate::Ry(i, Angle::Fixed(FRAC_PI_2)));
            c.add(Gate::Ry(j, Angle::Fixed(FRAC_PI_2)));
            c.add(Gate::Rxx(i, j, Angle::Fixed(2.0 * gamma * w)));
            c.add(Gate::Ry(i, Angle::Fixed(-FRAC_PI_2)));
            c.add(Gate::Ry(j, Angle::Fixed(-FRAC_PI_2)));
        }
        for q in 0..n {
            c.add(Gate::Rx(q, Angle::Fixed(2.0 * beta)));
        }
    }
    Ok(c)
}

/// QUBO value of every basis state, indexed like the statevector.
pub fn energy_table(qubo: &QuboModel) -> Vec<f64> {
    let n = qubo.dimension();
    let mut table = vec![0.0; 1 << n];
    let mut x = vec![0u8; n];
    let mut g = qubo.linear.clone();
    let mut e = qubo.offset;
    let mut index = 0usize;
    table[0] = e;
    for t in 1..1usize << n {
        let i = t.trailing_zeros() as usize;
        let d = 1.0 - 2.0 * x[i] as f64;
        e += d * g[i];
        x[i] ^= 1;
        index ^= 1 << i;
        for (gj, q) in g.iter_mut().zip(qubo.quad_row(i)) {
            *gj += 2.0 * q * d;
        }
        table[index] = e;
    }
    table
}

#[derive(Debug, Clone, Serialize)]
struct IterationRecord {
    iteration: usize,
    aggregate: f64,
    best: f64,
}

pub fn solve_variational(qubo: &QuboModel, cfg: &VariationalConfig, seed: u64) -> Result<SolverOutput> {
    cfg.validate()?;
    let method = cfg.method_name();
    let n = qubo.dimension();
    if n == 0 {
        return Ok(SolverOutput::trivial(method, qubo));
    }
    if n > cfg.qubit_cap {
        return Err(Error::QubitCapExceeded {
            requested: n,
            cap: cfg.qubit_cap,
        });
    }
    let table = energy_table(qubo);
    let ising = qubo_to_ising(qubo);
    let hea = match cfg.method {
        Method::Vqe => Some(build_hardware_efficient(n, cfg.reps)?),
        Method::Qaoa => None,
    };
    let dim = match &hea {
        Some(c) => c.num_params(),
        None => 2 * cfg.depth,
    };
    let state_at = |theta: &[f64]| -> Result<StateVector> {
        match &hea {
            Some(c) => run_circuit_with_cap(c, theta, cfg.qubit_cap),
            None => {
                let (g, b) = theta.split_at(cfg.depth);
                run_circuit_with_cap(&qaoa_circuit(&ising, g, b)?, &[], cfg.qubit_cap)
            }
        }
    };

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let theta0 = random_parameters(dim, PI, &mut rng);
    let mut best: Option<(f64, usize)> = None;
    let mut log = Vec::new();
    let mut failure = None;
    let t0 = Instant::now();
    let nm = NelderMeadOptions {
        max_evals: cfg.max_evals,
        deadline: cfg.deadline,
        ..NelderMeadOptions::default()
    };
    let result = local_optimize(
        |theta| {
            let state = match state_at(theta) {
                Ok(s) => s,
                Err(e) => {
                    failure.get_or_insert(e);
                    return f64::INFINITY;
                }
            };
            let samples = sample_with(&state, cfg.shots, &mut rng);
            let energies: Vec<f64> = samples.iter().map(|&s| table[s]).collect();
            for &s in &samples {
                let e = table[s];
                let better = match best {
                    None => true,
                    Some((be, bs)) => e < be || (e == be && index_to_bits(s, n) < index_to_bits(bs, n)),
                };
                if better {
                    best = Some((e, s));
                }
            }
            let agg = aggregate_energies(&energies, cfg.aggregator).unwrap_or(f64::INFINITY);
            let rec = IterationRecord {
                iteration: log.len() + 1,
                aggregate: agg,
                best: best.map_or(f64::INFINITY, |b| b.0),
            };
            log.push(serde_json::to_string(&rec).expect("iteration records serialise"));
            agg
        },
        &theta0,
        &nm,
    );
    if let Some(e) = failure {
        return Err(e);
    }
    let optimize_secs = t0.elapsed().as_secs_f64();
    let (value, index) = best.ok_or(Error::EmptySample)?;
    let resources = match &hea {
        Some(c) => resource_summary(c),
        None => {
            let (g, b) = result.theta.split_at(cfg.depth);
            ResourceSummary {
                parameters: 2 * cfg.depth,
                ..resource_summary(&qaoa_circuit(&ising, g, b)?)
            }
        }
    };
    Ok(SolverOutput {
        method: method.into(),
        bits: index_to_bits(index, n),
        qubo_value: value,
        raw_value: Some(value),
        qubits: n,
        resources: Some(resources),
        evaluations: result.evals,
        status: match result.status {
            StopReason::Deadline => RunStatus::TimedOut,
            StopReason::BudgetExhausted => RunStatus::BudgetExhausted,
            StopReason::Converged => RunStatus::Completed,
        },
        optimize_secs,
        postprocess_secs: 0.0,
        log,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simulator::run_circuit;

    #[test]
    fn cvar_examples() {
        let v = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(aggregate_energies(&v, Aggregator::Cvar(1.0)).unwrap(), 2.5);
        assert_eq!(aggregate_energies(&v, Aggregator::Cvar(0.25)).unwrap(), 1.0);
        assert_eq!(aggregate_energies(&[5.0; 3], Aggregator::Cvar(0.4)).unwrap(), 5.0);
        assert!(matches!(
            aggregate_energies(&[], Aggregator::Mean),
            Err(Error::EmptySample)
        ));
    }

    #[test]
    fn hardware_efficient_counts() {
        assert_eq!(build_hardware_efficient(4, 1).unwrap().num_params(), 16);
        let single = build_hardware_efficient(1, 2).unwrap();
        assert_eq!(single.num_params(), 6);
        assert!(single.gates().iter().all(|g| !g.is_two_qubit()));
    }

    #[test]
    fn zero_ising_gives_uniform_state() {
        let ising = IsingModel::zeros(3);
        let state = run_circuit(&qaoa_circuit(&ising, &[0.7], &[0.3]).unwrap(), &[]).unwrap();
        for p in state.probabilities() {
            assert!((p - 0.125).abs() < 1e-10);
        }
    }

    #[test]
    fn energy_table_matches_direct_evaluation() {
        let mut q = QuboModel::zeros(4);
        q.linear = vec![1.0, -2.0, 0.5, 3.0];
        q.add_quadratic(0, 2, -1.5);
        q.add_quadratic(1, 3, 2.0);
        q.offset = 0.25;
        let t = energy_table(&q);
        for (i, &e) in t.iter().enumerate() {
            assert!((e - q.energy(&index_to_bits(i, 4))).abs() < 1e-12);
        }
    }
}

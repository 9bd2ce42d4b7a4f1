//! Multi-round perturb-and-optimize loop around Nelder–Mead.

use std::f64::consts::PI;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::ansatz::random_parameters;
use super::optimizer::{local_optimize, NelderMeadOptions, StopReason};
use super::PceModel;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MultiStepConfig {
    /// Initial perturbation factor `P`.
    pub perturbation: f64,
    /// Exploration factor `E` applied every `amplify_every` rounds.
    pub exploration: f64,
    /// Decay `delta` applied to `P` after an improving round.
    pub decay: f64,
    /// Failure count at which parameters are re-drawn uniformly.
    pub restart_after: usize,
    /// Stop once this many consecutive rounds fail to improve.
    pub max_no_improvement_rounds: usize,
    /// Hard cap on rounds; `Some(1)` gives a single optimisation step.
    pub max_rounds: Option<usize>,
    pub amplify_every: usize,
    /// Stop after this many consecutive improving rounds whose relative
    /// gain is below `stall_threshold`.
    pub stall_rounds: usize,
    pub stall_threshold: f64,
    /// Step along the trend used when blending back to the incumbent.
    pub blend_weight: f64,
    pub local: NelderMeadOptions,
    #[serde(skip)]
    pub deadline: Option<Instant>,
}

impl Default for MultiStepConfig {
    fn default() -> Self {
        Self {
            perturbation: 0.1,
            exploration: 2.0,
            decay: 0.9,
            restart_after: 6,
            max_no_improvement_rounds: 10,
            max_rounds: Some(30),
            amplify_every: 3,
            stall_rounds: 5,
            stall_threshold: 1e-6,
            blend_weight: 0.5,
            local: NelderMeadOptions::default(),
            deadline: None,
        }
    }
}

impl MultiStepConfig {
    pub fn single_step() -> Self {
        Self {
            max_rounds: Some(1),
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    Improved,
    Restart,
    Blend,
    Perturb,
}

/// One line of the round log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundRecord {
    pub round: usize,
    /// `P` at the start of the round.
    pub perturbation: f64,
    /// `P'` used for this round's perturbation.
    pub effective: f64,
    /// `P` after the round's update.
    pub next_perturbation: f64,
    /// Failure count after the round.
    pub failures: usize,
    /// Loss at the locally optimised parameters.
    pub loss: f64,
    /// Incumbent loss after the round.
    pub best_loss: f64,
    pub branch: Branch,
    /// QUBO value of the bitstring decoded at the optimised parameters.
    pub objective: f64,
    pub evals: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MultiStepResult {
    /// Incumbent parameters and loss.
    pub theta: Vec<f64>,
    pub best_loss: f64,
    /// Best decoded bitstring seen in any round, by QUBO value.
    pub bits: Vec<u8>,
    pub objective: f64,
    pub rounds: Vec<RoundRecord>,
    pub evals: usize,
    pub status: StopReason,
}

impl MultiStepResult {
    /// Round log as line-delimited JSON.
    pub fn log_lines(&self) -> Vec<String> {
        self.rounds
            .iter()
            .map(|r| serde_json::to_string(r).expect("round records serialise"))
            .collect()
    }
}

fn sign(v: f64) -> f64 {
    if v > 0.0 {
        1.0
    } else if v < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// `theta + N(0, [p (1 + f/5)]^2) + p * sgn(trend)`.
pub fn adaptive_perturbation(theta: &[f64], p: f64, failures: usize, trend: &[f64], rng: &mut impl Rng) -> Vec<f64> {
    let sd = p * (1.0 + failures as f64 / 5.0);
    let noise = Normal::new(0.0, sd.max(0.0)).expect("finite standard deviation");
    theta
        .iter()
        .zip(trend)
        .map(|(&t, &tr)| t + noise.sample(rng) + p * sign(tr))
        .collect()
}

/// `theta* + w * P * sgn(trend)`.
pub fn weighted_blend(best: &[f64], trend: &[f64], p: f64, weight: f64) -> Vec<f64> {
    best.iter()
        .zip(trend)
        .map(|(&b, &t)| b + weight * p * sign(t))
        .collect()
}

pub fn multi_step_optimize(model: &PceModel, cfg: &MultiStepConfig, seed: u64) -> MultiStepResult {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dim = model.num_params();
    let mut theta = random_parameters(dim, PI, &mut rng);
    let mut best_theta = theta.clone();
    let mut best_loss = f64::INFINITY;
    let mut best_bits: Option<(Vec<u8>, f64)> = None;
    let mut p = cfg.perturbation;
    let mut failures = 0usize;
    let mut trend = vec![0.0; dim];
    let mut stalled = 0usize;
    let mut rounds = Vec::new();
    let mut evals = 0usize;
    let mut local = cfg.local;
    if local.deadline.is_none() {
        local.deadline = cfg.deadline;
    }

    let mut status = StopReason::Converged;
    let mut r = 0usize;
    while failures < cfg.max_no_improvement_rounds {
        if cfg.max_rounds.is_some_and(|m| r >= m) {
            break;
        }
        if cfg.deadline.is_some_and(|d| Instant::now() >= d) {
            status = StopReason::Deadline;
            break;
        }
        r += 1;
        let p_eff = if cfg.amplify_every > 0 && r.is_multiple_of(cfg.amplify_every) {
            cfg.exploration * p
        } else {
            p
        };
        let start = adaptive_perturbation(&theta, p_eff, failures, &trend, &mut rng);
        let opt = local_optimize(|t| model.loss(t), &start, &local);
        evals += opt.evals;
        let q = opt.value;
        let bits = model.decode(&opt.theta);
        let objective = model.qubo().energy(&bits);
        if best_bits.as_ref().is_none_or(|(_, v)| objective < *v) {
            best_bits = Some((bits, objective));
        }

        let p_start = p;
        let branch;
        let round_start = theta.clone();
        if q < best_loss {
            let gain = if best_loss.is_finite() {
                (best_loss - q) / best_loss.abs().max(f64::MIN_POSITIVE)
            } else {
                f64::INFINITY
            };
            if gain < cfg.stall_threshold {
                stalled += 1;
            } else {
                stalled = 0;
            }
            best_theta = opt.theta.clone();
            best_loss = q;
            failures = 0;
            p *= cfg.decay;
            branch = Branch::Improved;
            theta = opt.theta.clone();
        } else {
            failures += 1;
            if failures >= cfg.restart_after {
                theta = random_parameters(dim, PI, &mut rng);
                branch = Branch::Restart;
            } else if failures.is_multiple_of(2) {
                theta = weighted_blend(&best_theta, &trend, p, cfg.blend_weight);
                branch = Branch::Blend;
            } else {
                theta = adaptive_perturbation(&best_theta, 2.0 * p, failures, &trend, &mut rng);
                branch = Branch::Perturb;
            }
        }
        let scale = (best_loss - q).abs();
        for ((t, &o), &s) in trend.iter_mut().zip(&opt.theta).zip(&round_start) {
            *t = sign(o - s) * scale;
        }
        rounds.push(RoundRecord {
            round: r,
            perturbation: p_start,
            effective: p_eff,
            next_perturbation: p,
            failures,
            loss: q,
            best_loss,
            branch,
            objective,
            evals: opt.evals,
        });
        if opt.status == StopReason::Deadline {
            status = StopReason::Deadline;
            break;
        }
        if stalled >= cfg.stall_rounds {
            break;
        }
    }

    let (bits, objective) = best_bits.unwrap_or_else(|| {
        let bits = model.decode(&best_theta);
        let v = model.qubo().energy(&bits);
        (bits, v)
    });
    MultiStepResult {
        theta: best_theta,
        best_loss,
        bits,
        objective,
        rounds,
        evals,
        status,
    }
}

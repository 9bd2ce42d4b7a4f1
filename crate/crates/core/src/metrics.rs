//! Solution quality metrics and benchmark records.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::formulation::{QuboModel, Sense};
use crate::problems::{Evaluation, Feasibility, Formulation, Instance};
use crate::simulator::ResourceSummary;

/// Percentage shortfall of `obtained` against `best_known`. Non-negative
/// when `obtained` is no better than `best_known`.
pub fn optimality_gap(best_known: f64, obtained: f64, sense: Sense) -> Result<f64> {
    if best_known == 0.0 {
        return Err(Error::ZeroBaseline);
    }
    let diff = match sense {
        Sense::Maximize => best_known - obtained,
        Sense::Minimize => obtained - best_known,
    };
    Ok(diff / best_known.abs() * 100.0)
}

/// Relative solution quality, `obtained / best_known * 100`.
pub fn rsq(obtained: f64, best_known: f64) -> Result<f64> {
    if best_known == 0.0 {
        return Err(Error::ZeroBaseline);
    }
    Ok(obtained / best_known * 100.0)
}

/// Per-family violation check on a problem-level solution vector: item
/// selection (MDKP), vertex selection (MIS), row-major assignment bits
/// (QAP), or products then `s+`/`s-` pairs (market split).
pub fn check_feasibility(instance: &Instance, x: &[i64]) -> Result<Feasibility> {
    match instance {
        Instance::Mdkp(i) => i.check_feasibility(x),
        Instance::Mis(g) => g.check_feasibility(x),
        Instance::Qap(q) => q.check_feasibility(x),
        Instance::Msp(m) => m.check_feasibility(x),
        Instance::Qubo(q) => {
            if x.len() != q.qubo.dimension() {
                return Err(Error::dims(format!(
                    "{} values for {} variables",
                    x.len(),
                    q.qubo.dimension()
                )));
            }
            Ok(Feasibility::from_residuals(x.iter().map(|&v| {
                if (0..=1).contains(&v) {
                    0.0
                } else {
                    1.0
                }
            })))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Completed,
    BudgetExhausted,
    TimedOut,
    /// Instance is beyond what the dense simulator can hold.
    OutOfScale,
    Failed,
}

impl RunStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            RunStatus::Completed => "completed",
            RunStatus::BudgetExhausted => "budget_exhausted",
            RunStatus::TimedOut => "timed_out",
            RunStatus::OutOfScale => "out_of_scale",
            RunStatus::Failed => "failed",
        }
    }
}

/// What a solver hands back before problem-level scoring.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverOutput {
    pub method: String,
    pub bits: Vec<u8>,
    pub qubo_value: f64,
    /// QUBO value before classical post-processing.
    pub raw_value: Option<f64>,
    pub qubits: usize,
    pub resources: Option<ResourceSummary>,
    pub evaluations: usize,
    pub status: RunStatus,
    pub optimize_secs: f64,
    pub postprocess_secs: f64,
    /// Line-delimited JSON iteration log.
    pub log: Vec<String>,
}

impl SolverOutput {
    /// Output for a QUBO with no variables.
    pub fn trivial(method: &str, qubo: &QuboModel) -> Self {
        Self {
            method: method.into(),
            bits: Vec::new(),
            qubo_value: qubo.offset,
            raw_value: Some(qubo.offset),
            qubits: 0,
            resources: None,
            evaluations: 0,
            status: RunStatus::Completed,
            optimize_secs: 0.0,
            postprocess_secs: 0.0,
            log: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkRecord {
    pub instance: String,
    pub method: String,
    pub seed: u64,
    pub status: RunStatus,
    pub feasible: bool,
    pub objective: Option<f64>,
    pub best_known: Option<f64>,
    pub gap_percent: Option<f64>,
    pub rsq_percent: Option<f64>,
    pub violations: usize,
    pub violation_magnitude: f64,
    pub qubits: usize,
    pub resources: Option<ResourceSummary>,
    pub qubo_value: Option<f64>,
    pub raw_qubo_value: Option<f64>,
    pub optimize_secs: Option<f64>,
    pub postprocess_secs: Option<f64>,
    pub error: Option<String>,
}

impl BenchmarkRecord {
    /// Score a problem-level evaluation (no solver metadata).
    pub fn from_evaluation(instance: &Instance, method: &str, seed: u64, eval: &Evaluation) -> Self {
        let mut rec = Self {
            instance: instance.name().to_string(),
            method: method.to_string(),
            seed,
            status: RunStatus::Completed,
            feasible: eval.feasibility.feasible,
            objective: Some(eval.objective),
            best_known: instance.best_known(),
            gap_percent: None,
            rsq_percent: None,
            violations: eval.feasibility.violated,
            violation_magnitude: eval.feasibility.magnitude,
            qubits: 0,
            resources: None,
            qubo_value: None,
            raw_qubo_value: None,
            optimize_secs: None,
            postprocess_secs: None,
            error: None,
        };
        rec.score(instance.sense());
        rec
    }

    /// Score a solver output against its instance.
    pub fn from_output(instance: &Instance, formulation: &Formulation, out: &SolverOutput, seed: u64) -> Result<Self> {
        let eval = instance.evaluate(formulation, &out.bits)?;
        let mut rec = Self::from_evaluation(instance, &out.method, seed, &eval);
        rec.status = out.status;
        rec.qubits = out.qubits;
        rec.resources = out.resources;
        rec.qubo_value = Some(out.qubo_value);
        rec.raw_qubo_value = out.raw_value;
        rec.optimize_secs = Some(out.optimize_secs);
        rec.postprocess_secs = Some(out.postprocess_secs);
        Ok(rec)
    }

    /// Record for a run that produced no solution.
    pub fn failure(instance: &Instance, method: &str, seed: u64, status: RunStatus, message: String) -> Self {
        Self {
            instance: instance.name().to_string(),
            method: method.to_string(),
            seed,
            status,
            feasible: false,
            objective: None,
            best_known: instance.best_known(),
            gap_percent: None,
            rsq_percent: None,
            violations: 0,
            violation_magnitude: 0.0,
            qubits: 0,
            resources: None,
            qubo_value: None,
            raw_qubo_value: None,
            optimize_secs: None,
            postprocess_secs: None,
            error: Some(message),
        }
    }

    /// Fill gap and RSQ from `best_known`; infeasible or unscored runs keep
    /// them empty.
    pub fn score(&mut self, sense: Sense) {
        self.gap_percent = None;
        self.rsq_percent = None;
        let (Some(best), Some(obj)) = (self.best_known, self.objective) else {
            return;
        };
        if !self.feasible {
            return;
        }
        self.gap_percent = optimality_gap(best, obj, sense).ok();
        if sense == Sense::Maximize && best > 0.0 {
            self.rsq_percent = rsq(obj, best).ok();
        }
    }

    pub fn csv_header() -> &'static str {
        "instance,method,seed,status,qubits,feasible,objective,best_known,gap_percent,rsq_percent,violations,violation_magnitude,depth,gates,two_qubit_gates,parameters,optimize_secs,postprocess_secs"
    }

    pub fn to_csv_row(&self) -> String {
        let opt = |v: Option<f64>| v.map_or(String::new(), fmt_num);
        let res = self.resources;
        let ri = |f: fn(&ResourceSummary) -> usize| res.as_ref().map_or(String::new(), |r| f(r).to_string());
        [
            csv_field(&self.instance),
            csv_field(&self.method),
            self.seed.to_string(),
            self.status.as_str().to_string(),
            self.qubits.to_string(),
            if self.objective.is_none() {
                String::new()
            } else if self.feasible {
                "yes".into()
            } else {
                "no".into()
            },
            opt(self.objective),
            opt(self.best_known),
            opt(self.gap_percent),
            opt(self.rsq_percent),
            self.violations.to_string(),
            fmt_num(self.violation_magnitude),
            ri(|r| r.depth),
            ri(|r| r.gate_count),
            ri(|r| r.two_qubit_gates),
            ri(|r| r.parameters),
            opt(self.optimize_secs),
            opt(self.postprocess_secs),
        ]
        .join(",")
    }
}

pub(crate) fn fmt_num(v: f64) -> String {
    if v.fract() == 0.0 && v.abs() < 1e15 {
        format!("{v:.0}")
    } else {
        format!("{v:.6}").trim_end_matches('0').to_string()
    }
}

pub(crate) fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gap_examples() {
        assert_eq!(optimality_gap(3418.0, 3418.0, Sense::Maximize).unwrap(), 0.0);
        assert_eq!(optimality_gap(100.0, 80.0, Sense::Maximize).unwrap(), 20.0);
        let g = optimality_gap(9552.0, 31975.0, Sense::Minimize).unwrap();
        assert!((g - 234.76).abs() < 0.02, "{g}");
        assert!(matches!(
            optimality_gap(0.0, 3.0, Sense::Minimize),
            Err(Error::ZeroBaseline)
        ));
    }

    #[test]
    fn rsq_examples() {
        assert_eq!(rsq(4.0, 4.0).unwrap(), 100.0);
        assert_eq!(rsq(19.0, 20.0).unwrap(), 95.0);
        assert_eq!(rsq(0.0, 7.0).unwrap(), 0.0);
        assert!(rsq(1.0, 0.0).is_err());
    }

    #[test]
    fn number_formatting() {
        assert_eq!(fmt_num(4.0), "4");
        assert_eq!(fmt_num(234.7571), "234.7571");
        assert_eq!(fmt_num(0.5), "0.5");
        assert_eq!(csv_field("a,b"), "\"a,b\"");
    }
}

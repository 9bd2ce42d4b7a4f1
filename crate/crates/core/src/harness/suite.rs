//! Suite configuration and execution.

use std::collections::BTreeMap;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baselines::{exact_solve, DEFAULT_MIS_BUDGET};
use crate::error::{Error, Result};
use crate::metrics::{BenchmarkRecord, RunStatus};
use crate::pce::{solve_pce, PceOptions};
use crate::problems::mdkp::MdkpGenerator;
use crate::problems::mis::CodeFamily;
use crate::problems::msp::{generate_msp, TargetMode, DEFAULT_SPREAD};
use crate::problems::{Family, FormulationOptions, Instance, MisGraph};
use crate::variational::{solve_variational, Aggregator, Method, VariationalConfig};

use super::{derive_seed, load_instance};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuiteConfig {
    pub seed: u64,
    /// Wall-clock budget for each run, in seconds.
    #[serde(default)]
    pub time_budget_secs: Option<f64>,
    /// Worker threads; 0 uses the rayon default.
    #[serde(default)]
    pub threads: usize,
    /// Record timings. Turn off for byte-identical reports across runs.
    #[serde(default = "default_true")]
    pub timing: bool,
    pub instances: Vec<InstanceSpec>,
    pub methods: Vec<MethodSpec>,
}

fn default_true() -> bool {
    true
}

impl SuiteConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Invalid(format!("suite config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text).map_err(|e| match e {
            Error::Invalid(m) => Error::Invalid(format!("{}: {m}", path.display())),
            other => other,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "lowercase", deny_unknown_fields)]
pub enum InstanceSpec {
    File {
        path: PathBuf,
        family: Family,
        #[serde(default)]
        penalty: Option<f64>,
        #[serde(default)]
        preprocess: bool,
        #[serde(default)]
        best_known: Option<f64>,
    },
    /// Market split instance from the built-in generator.
    Msp {
        retailers: usize,
        #[serde(default)]
        spread: Option<u64>,
        seed: u64,
        #[serde(default)]
        interval: bool,
        #[serde(default)]
        penalty: Option<f64>,
    },
    Mdkp {
        items: usize,
        dimensions: usize,
        tightness: f64,
        seed: u64,
        #[serde(default)]
        penalty: Option<f64>,
    },
    /// Conflict graph of a single-error code on binary words.
    Code {
        code: String,
        bits: u32,
        #[serde(default)]
        penalty: Option<f64>,
        #[serde(default)]
        preprocess: bool,
    },
}

impl InstanceSpec {
    pub fn load(&self, base: &Path) -> Result<(Instance, FormulationOptions)> {
        match self {
            InstanceSpec::File {
                path,
                family,
                penalty,
                preprocess,
                best_known,
            } => {
                let full = if path.is_absolute() {
                    path.clone()
                } else {
                    base.join(path)
                };
                let mut inst = load_instance(&full, *family)?;
                if let Some(b) = best_known {
                    inst.set_best_known(*b);
                }
                Ok((inst, options(*penalty, *preprocess)))
            }
            InstanceSpec::Msp {
                retailers,
                spread,
                seed,
                interval,
                penalty,
            } => {
                let mode = if *interval {
                    TargetMode::Interval
                } else {
                    TargetMode::Half
                };
                let inst = generate_msp(*retailers, spread.unwrap_or(DEFAULT_SPREAD), *seed, mode)?;
                Ok((Instance::Msp(inst), options(*penalty, false)))
            }
            InstanceSpec::Mdkp {
                items,
                dimensions,
                tightness,
                seed,
                penalty,
            } => {
                let inst = MdkpGenerator::new(*items, *dimensions, *tightness).generate(*seed)?;
                Ok((Instance::Mdkp(inst), options(*penalty, false)))
            }
            InstanceSpec::Code {
                code,
                bits,
                penalty,
                preprocess,
            } => {
                let g = MisGraph::code_graph(CodeFamily::from_tag(code)?, *bits)?;
                Ok((Instance::Mis(g), options(*penalty, *preprocess)))
            }
        }
    }
}

fn options(penalty: Option<f64>, preprocess_mis: bool) -> FormulationOptions {
    FormulationOptions {
        penalty,
        preprocess_mis,
    }
}

/// Settings shared by the four variational baselines.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VariationalSpec {
    pub reps: usize,
    pub depth: usize,
    pub max_evals: usize,
    pub shots: usize,
    /// Tail fraction for the CVaR variants.
    pub alpha: f64,
    pub qubit_cap: usize,
}

impl Default for VariationalSpec {
    fn default() -> Self {
        let d = VariationalConfig::default();
        Self {
            reps: d.reps,
            depth: d.depth,
            max_evals: d.max_evals,
            shots: d.shots,
            alpha: 0.25,
            qubit_cap: d.qubit_cap,
        }
    }
}

impl VariationalSpec {
    fn config(&self, method: Method, cvar: bool) -> VariationalConfig {
        VariationalConfig {
            method,
            aggregator: if cvar {
                Aggregator::Cvar(self.alpha)
            } else {
                Aggregator::Mean
            },
            reps: self.reps,
            depth: self.depth,
            max_evals: self.max_evals,
            shots: self.shots,
            qubit_cap: self.qubit_cap,
            deadline: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "kebab-case")]
#[allow(clippy::large_enum_variant)]
pub enum MethodSpec {
    Pce(PceOptions),
    Vqe(VariationalSpec),
    CvarVqe(VariationalSpec),
    Qaoa(VariationalSpec),
    CvarQaoa(VariationalSpec),
    Exact {
        #[serde(default = "default_mis_budget")]
        mis_budget: u64,
    },
}

fn default_mis_budget() -> u64 {
    DEFAULT_MIS_BUDGET
}

impl MethodSpec {
    pub fn name(&self) -> &'static str {
        match self {
            MethodSpec::Pce(_) => "pce",
            MethodSpec::Vqe(_) => "vqe",
            MethodSpec::CvarVqe(_) => "cvar-vqe",
            MethodSpec::Qaoa(_) => "qaoa",
            MethodSpec::CvarQaoa(_) => "cvar-qaoa",
            MethodSpec::Exact { .. } => "exact",
        }
    }

    pub fn from_name(name: &str) -> Result<Self> {
        let v = VariationalSpec::default();
        Ok(match name {
            "pce" => MethodSpec::Pce(PceOptions::default()),
            "vqe" => MethodSpec::Vqe(v),
            "cvar-vqe" => MethodSpec::CvarVqe(v),
            "qaoa" => MethodSpec::Qaoa(v),
            "cvar-qaoa" => MethodSpec::CvarQaoa(v),
            "exact" => MethodSpec::Exact {
                mis_budget: DEFAULT_MIS_BUDGET,
            },
            other => return Err(Error::Invalid(format!("unknown method `{other}`"))),
        })
    }
}

/// Run one method on one instance and score it. Solver errors become
/// failure records; `OutOfScale` marks instances beyond the qubit cap.
pub fn run_method(
    instance: &Instance,
    opts: &FormulationOptions,
    method: &MethodSpec,
    seed: u64,
    deadline: Option<Instant>,
) -> BenchmarkRecord {
    let name = method.name();
    let attempt = || -> Result<BenchmarkRecord> {
        if let MethodSpec::Exact { mis_budget } = method {
            let t0 = Instant::now();
            let sol = exact_solve(instance, *mis_budget)?;
            let mut rec = BenchmarkRecord::from_evaluation(instance, name, seed, &sol.evaluation);
            if !sol.optimal {
                rec.status = RunStatus::BudgetExhausted;
            }
            rec.optimize_secs = Some(t0.elapsed().as_secs_f64());
            rec.postprocess_secs = Some(0.0);
            return Ok(rec);
        }
        let formulation = instance.formulate(opts)?;
        let out = match method {
            MethodSpec::Pce(p) => {
                let mut p = p.clone();
                p.multistep.deadline = deadline;
                solve_pce(&formulation.qubo, &p, seed)?
            }
            MethodSpec::Vqe(v) | MethodSpec::CvarVqe(v) | MethodSpec::Qaoa(v) | MethodSpec::CvarQaoa(v) => {
                let qaoa = matches!(method, MethodSpec::Qaoa(_) | MethodSpec::CvarQaoa(_));
                let cvar = matches!(method, MethodSpec::CvarVqe(_) | MethodSpec::CvarQaoa(_));
                let mut cfg = v.config(if qaoa { Method::Qaoa } else { Method::Vqe }, cvar);
                cfg.deadline = deadline;
                solve_variational(&formulation.qubo, &cfg, seed)?
            }
            MethodSpec::Exact { .. } => unreachable!(),
        };
        BenchmarkRecord::from_output(instance, &formulation, &out, seed)
    };
    match catch_unwind(AssertUnwindSafe(attempt)) {
        Ok(Ok(rec)) => rec,
        Ok(Err(e @ Error::QubitCapExceeded { .. })) => {
            BenchmarkRecord::failure(instance, name, seed, RunStatus::OutOfScale, e.to_string())
        }
        Ok(Err(e)) => BenchmarkRecord::failure(instance, name, seed, RunStatus::Failed, e.to_string()),
        Err(panic) => {
            let msg = panic
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| panic.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "solver panicked".into());
            BenchmarkRecord::failure(instance, name, seed, RunStatus::Failed, msg)
        }
    }
}

/// Run every method on every instance. Exact runs go first so that their
/// certified optima score the remaining methods. Records come back sorted
/// by instance then method.
pub fn run_suite(config: &SuiteConfig, base: &Path) -> Result<Vec<BenchmarkRecord>> {
    let mut loaded = config
        .instances
        .iter()
        .map(|s| s.load(base))
        .collect::<Result<Vec<_>>>()?;
    let mut seen = BTreeMap::new();
    for (inst, _) in &loaded {
        if seen.insert(inst.name().to_string(), ()).is_some() {
            return Err(Error::Invalid(format!("duplicate instance name `{}`", inst.name())));
        }
    }

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.threads)
        .build()
        .map_err(|e| Error::Invalid(format!("thread pool: {e}")))?;
    let budget = config.time_budget_secs.map(Duration::from_secs_f64);

    let run = |jobs: Vec<(usize, &MethodSpec)>, loaded: &[(Instance, FormulationOptions)]| {
        pool.install(|| {
            jobs.into_par_iter()
                .map(|(i, m)| {
                    let (inst, opts) = &loaded[i];
                    let seed = derive_seed(config.seed, inst.name(), m.name());
                    let deadline = budget.map(|b| Instant::now() + b);
                    log::info!("running {} on {}", m.name(), inst.name());
                    (i, run_method(inst, opts, m, seed, deadline))
                })
                .collect::<Vec<_>>()
        })
    };

    let exact: Vec<_> = config
        .methods
        .iter()
        .filter(|m| matches!(m, MethodSpec::Exact { .. }))
        .collect();
    let rest: Vec<_> = config
        .methods
        .iter()
        .filter(|m| !matches!(m, MethodSpec::Exact { .. }))
        .collect();

    let mut records = Vec::new();
    let jobs = (0..loaded.len())
        .flat_map(|i| exact.iter().map(move |m| (i, *m)))
        .collect();
    for (i, rec) in run(jobs, &loaded) {
        if rec.status == RunStatus::Completed && rec.feasible {
            if let (Some(obj), None) = (rec.objective, loaded[i].0.best_known()) {
                loaded[i].0.set_best_known(obj);
            }
        }
        records.push(rec);
    }
    // Exact records were scored before their own value was installed.
    for rec in &mut records {
        if let Some((inst, _)) = loaded.iter().find(|(inst, _)| inst.name() == rec.instance) {
            rec.best_known = inst.best_known();
            rec.score(inst.sense());
        }
    }

    let jobs = (0..loaded.len())
        .flat_map(|i| rest.iter().map(move |m| (i, *m)))
        .collect();
    records.extend(run(jobs, &loaded).into_iter().map(|(_, r)| r));

    if !config.timing {
        for r in &mut records {
            r.optimize_secs = None;
            r.postprocess_secs = None;
        }
    }
    records.sort_by(|a, b| (&a.instance, &a.method, a.seed).cmp(&(&b.instance, &b.method, b.seed)));
    Ok(records)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_suite() {
        let cfg = SuiteConfig::from_toml(
            r#"
seed = 3
timing = false

[[instances]]
source = "code"
code = "1tc"
bits = 3

[[instances]]
source = "msp"
retailers = 2
seed = 5

[[methods]]
method = "exact"

[[methods]]
method = "pce"
swap_width = 1

[[methods]]
method = "cvar-vqe"
alpha = 0.1
"#,
        )
        .unwrap();
        assert_eq!(cfg.instances.len(), 2);
        assert_eq!(cfg.methods[0].name(), "exact");
        match &cfg.methods[1] {
            MethodSpec::Pce(p) => assert_eq!(p.swap_width, 1),
            other => panic!("{other:?}"),
        }
        match &cfg.methods[2] {
            MethodSpec::CvarVqe(v) => assert_eq!(v.alpha, 0.1),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn rejects_unknown_keys() {
        assert!(SuiteConfig::from_toml("seed = 1\ninstances = []\nmethods = []\nbogus = 2\n").is_err());
    }
}

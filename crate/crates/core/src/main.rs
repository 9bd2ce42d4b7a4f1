use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use clap::{Parser, Subcommand, ValueEnum};

use qubobench::harness::{
    instance_to_text, load_instance, parse_records, render_report, run_method, run_suite, write_report, MethodSpec,
    ReportFormat, SuiteConfig,
};
use qubobench::pce::{solve_pce, PceOptions};
use qubobench::problems::mdkp::MdkpGenerator;
use qubobench::problems::mis::{preprocess_mis, CodeFamily};
use qubobench::problems::msp::{generate_msp, TargetMode, DEFAULT_SPREAD};
use qubobench::problems::{Family, FormulationOptions, Instance, MisGraph};
use qubobench::{BenchmarkRecord, Error};

#[derive(Parser)]
#[command(
    name = "qubobench",
    version,
    about = "QUBO benchmarks with correlation-encoded and variational solvers"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Lower an instance to QUBO text.
    Convert {
        input: PathBuf,
        #[arg(long)]
        family: Family,
        #[arg(long)]
        penalty: Option<f64>,
        /// Apply simplicial preprocessing (MIS only).
        #[arg(long)]
        preprocess: bool,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Generate a synthetic instance.
    Generate {
        #[command(subcommand)]
        kind: GenerateKind,
    },
    /// Apply reductions to an instance.
    Preprocess {
        #[command(subcommand)]
        kind: PreprocessKind,
    },
    /// Solve one instance with one method and print its record as JSON.
    Solve {
        input: PathBuf,
        #[arg(long)]
        family: Family,
        #[arg(long, value_enum)]
        method: MethodArg,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Wall-clock budget in seconds.
        #[arg(long)]
        budget: Option<f64>,
        #[arg(long)]
        penalty: Option<f64>,
        #[arg(long)]
        preprocess: bool,
        /// CVaR tail fraction.
        #[arg(long)]
        alpha: Option<f64>,
        /// Multi-step round cap for PCE (1 disables multi-step).
        #[arg(long)]
        rounds: Option<usize>,
        /// Known optimum used for gap and RSQ.
        #[arg(long)]
        best_known: Option<f64>,
        /// Write the per-round JSON log here (PCE only).
        #[arg(long)]
        log: Option<PathBuf>,
    },
    /// Run a TOML benchmark suite.
    Bench {
        config: PathBuf,
        /// Output directory for records.jsonl, results.csv and summary.md.
        #[arg(short, long, default_value = "bench-out")]
        out: PathBuf,
    },
    /// Render stored records.
    Report {
        records: PathBuf,
        #[arg(long, value_enum, default_value_t = FormatArg::Table)]
        format: FormatArg,
    },
}

#[derive(Subcommand)]
enum GenerateKind {
    /// Market split instance.
    Msp {
        #[arg(long)]
        retailers: usize,
        #[arg(long, default_value_t = DEFAULT_SPREAD)]
        spread: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Draw targets from an interval instead of half the row sums.
        #[arg(long)]
        interval: bool,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Multidimensional knapsack instance.
    Mdkp {
        #[arg(long)]
        items: usize,
        #[arg(long)]
        dimensions: usize,
        #[arg(long, default_value_t = 0.5)]
        tightness: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Conflict graph of a single-error code.
    Mis {
        /// One of 1tc, 1et, 1dc.
        #[arg(long)]
        code: String,
        /// Word length in bits.
        #[arg(long)]
        length: u32,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum PreprocessKind {
    /// Remove simplicial vertices and print the reduction.
    Mis {
        input: PathBuf,
        /// Write the reduced graph here.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Pce,
    Vqe,
    CvarVqe,
    Qaoa,
    CvarQaoa,
    Exact,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Table,
    Json,
}

enum Failure {
    Usage(Error),
    Internal(Error),
    Infeasible,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Parse { .. }
            | Error::UnknownFamily(_)
            | Error::Io { .. }
            | Error::Invalid(_)
            | Error::DimensionMismatch(_)
            | Error::IndexOutOfRange { .. } => Failure::Usage(e),
            other => Failure::Internal(other),
        }
    }
}

fn emit(text: &str, output: Option<&Path>) -> Result<(), Failure> {
    match output {
        Some(p) => fs::write(p, text).map_err(|e| Error::Io {
            path: p.to_path_buf(),
            source: e,
        })?,
        None => {
            let _ = std::io::stdout().write_all(text.as_bytes());
        }
    }
    Ok(())
}

fn method_spec(method: MethodArg, alpha: Option<f64>, rounds: Option<usize>) -> Result<MethodSpec, Error> {
    let name = match method {
        MethodArg::Pce => "pce",
        MethodArg::Vqe => "vqe",
        MethodArg::CvarVqe => "cvar-vqe",
        MethodArg::Qaoa => "qaoa",
        MethodArg::CvarQaoa => "cvar-qaoa",
        MethodArg::Exact => "exact",
    };
    let mut spec = MethodSpec::from_name(name)?;
    match &mut spec {
        MethodSpec::CvarVqe(v) | MethodSpec::CvarQaoa(v) => {
            if let Some(a) = alpha {
                v.alpha = a;
            }
        }
        MethodSpec::Pce(p) => {
            if let Some(r) = rounds {
                p.multistep.max_rounds = Some(r);
            }
        }
        _ => {}
    }
    Ok(spec)
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Convert {
            input,
            family,
            penalty,
            preprocess,
            output,
        } => {
            let inst = load_instance(&input, family)?;
            let f = inst.formulate(&FormulationOptions {
                penalty,
                preprocess_mis: preprocess,
            })?;
            emit(&f.qubo.to_text(), output.as_deref())
        }
        Command::Generate { kind } => {
            let (inst, output) = match kind {
                GenerateKind::Msp {
                    retailers,
                    spread,
                    seed,
                    interval,
                    output,
                } => {
                    let mode = if interval {
                        TargetMode::Interval
                    } else {
                        TargetMode::Half
                    };
                    (Instance::Msp(generate_msp(retailers, spread, seed, mode)?), output)
                }
                GenerateKind::Mdkp {
                    items,
                    dimensions,
                    tightness,
                    seed,
                    output,
                } => (
                    Instance::Mdkp(MdkpGenerator::new(items, dimensions, tightness).generate(seed)?),
                    output,
                ),
                GenerateKind::Mis { code, length, output } => {
                    let family = CodeFamily::from_tag(&code)?;
                    (Instance::Mis(MisGraph::code_graph(family, length)?), output)
                }
            };
            emit(&instance_to_text(&inst), output.as_deref())
        }
        Command::Preprocess {
            kind: PreprocessKind::Mis { input, output },
        } => {
            let Instance::Mis(g) = load_instance(&input, Family::Mis)? else {
                unreachable!()
            };
            let red = preprocess_mis(&g);
            let one_based = |v: &[usize]| v.iter().map(|x| (x + 1).to_string()).collect::<Vec<_>>().join(" ");
            println!("vertices {} -> {}", g.num_vertices(), red.reduced.num_vertices());
            for (i, s) in red.sweeps.iter().enumerate() {
                println!(
                    "sweep {}: added [{}] removed [{}]",
                    i + 1,
                    one_based(&s.added),
                    one_based(&s.removed)
                );
            }
            println!("fixed [{}]", one_based(&red.fixed));
            println!("kept [{}]", one_based(&red.vertex_ids));
            if let Some(p) = output {
                emit(&red.reduced.to_text(), Some(&p))?;
            }
            Ok(())
        }
        Command::Solve {
            input,
            family,
            method,
            seed,
            budget,
            penalty,
            preprocess,
            alpha,
            rounds,
            best_known,
            log,
        } => {
            let mut inst = load_instance(&input, family)?;
            if let Some(b) = best_known {
                inst.set_best_known(b);
            }
            let spec = method_spec(method, alpha, rounds)?;
            let opts = FormulationOptions {
                penalty,
                preprocess_mis: preprocess,
            };
            let deadline = budget.map(|b| Instant::now() + Duration::from_secs_f64(b));
            let record = match (&spec, log) {
                (MethodSpec::Pce(p), Some(log_path)) => solve_pce_logged(&inst, &opts, p, seed, deadline, &log_path)?,
                _ => run_method(&inst, &opts, &spec, seed, deadline),
            };
            println!("{}", serde_json::to_string_pretty(&record).expect("records serialise"));
            if let Some(e) = &record.error {
                log::error!("{e}");
            }
            if record.feasible {
                Ok(())
            } else {
                Err(Failure::Infeasible)
            }
        }
        Command::Bench { config, out } => {
            let cfg = SuiteConfig::load(&config)?;
            let base = config.parent().unwrap_or(Path::new("."));
            let records = run_suite(&cfg, base)?;
            write_report(&records, &out)?;
            print!("{}", render_report(&records, ReportFormat::Table));
            if !records.is_empty() && records.iter().all(|r| !r.feasible) {
                Err(Failure::Infeasible)
            } else {
                Ok(())
            }
        }
        Command::Report { records, format } => {
            let text = fs::read_to_string(&records).map_err(|e| Error::Io {
                path: records.clone(),
                source: e,
            })?;
            let recs = parse_records(&text, &records.display().to_string())?;
            let format = match format {
                FormatArg::Csv => ReportFormat::Csv,
                FormatArg::Table => ReportFormat::Table,
                FormatArg::Json => ReportFormat::Json,
            };
            print!("{}", render_report(&recs, format));
            Ok(())
        }
    }
}

fn solve_pce_logged(
    inst: &Instance,
    opts: &FormulationOptions,
    pce: &PceOptions,
    seed: u64,
    deadline: Option<Instant>,
    log_path: &Path,
) -> Result<BenchmarkRecord, Failure> {
    let f = inst.formulate(opts)?;
    let mut p = pce.clone();
    p.multistep.deadline = deadline;
    let out = solve_pce(&f.qubo, &p, seed)?;
    let mut text = out.log.join("\n");
    text.push('\n');
    emit(&text, Some(log_path))?;
    Ok(BenchmarkRecord::from_output(inst, &f, &out, seed)?)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(2)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Infeasible) => ExitCode::from(1),
        Err(Failure::Usage(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(Failure::Internal(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(3)
        }
    }
}

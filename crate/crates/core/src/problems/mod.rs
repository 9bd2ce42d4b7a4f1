//! Benchmark problem families and their lowering to QUBO.

pub mod mdkp;
pub mod mis;
pub mod msp;
pub mod qap;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::formulation::{default_penalties, ilp_to_qubo, IlpModel, QuboModel, Sense};

pub use mdkp::MdkpInstance;
pub use mis::MisGraph;
pub use msp::MspInstance;
pub use qap::QapInstance;

/// Whitespace-separated tokens with their 1-based character columns.
pub(crate) fn line_tokens(line: &str) -> Vec<(&str, usize)> {
    let mut out = Vec::new();
    let mut start = None;
    for (col, (i, ch)) in line.char_indices().enumerate() {
        match (ch.is_whitespace(), start) {
            (false, None) => start = Some((i, col + 1)),
            (true, Some((s, c))) => {
                out.push((&line[s..i], c));
                start = None;
            }
            _ => {}
        }
    }
    if let Some((s, c)) = start {
        out.push((&line[s..], c));
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Mdkp,
    Mis,
    Qap,
    Msp,
    /// A raw QUBO in the canonical text format.
    Qubo,
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "mdkp" => Ok(Family::Mdkp),
            "mis" => Ok(Family::Mis),
            "qap" => Ok(Family::Qap),
            "msp" => Ok(Family::Msp),
            "qubo" => Ok(Family::Qubo),
            other => Err(Error::UnknownFamily(other.to_string())),
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Family::Mdkp => "mdkp",
            Family::Mis => "mis",
            Family::Qap => "qap",
            Family::Msp => "msp",
            Family::Qubo => "qubo",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NamedQubo {
    pub name: String,
    pub qubo: QuboModel,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Instance {
    Mdkp(MdkpInstance),
    Mis(MisGraph),
    Qap(QapInstance),
    Msp(MspInstance),
    Qubo(NamedQubo),
}

/// Violation summary for a candidate solution.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Feasibility {
    pub feasible: bool,
    pub violated: usize,
    pub magnitude: f64,
}

impl Feasibility {
    pub(crate) fn from_residuals(residuals: impl IntoIterator<Item = f64>) -> Self {
        let mut violated = 0;
        let mut magnitude = 0.0;
        for r in residuals {
            if r.abs() > 1e-9 {
                violated += 1;
                magnitude += r.abs();
            }
        }
        Self {
            feasible: violated == 0,
            violated,
            magnitude,
        }
    }
}

/// A decoded QUBO bitstring in problem terms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub objective: f64,
    pub feasibility: Feasibility,
    /// Problem-level solution vector (selection, assignment bits, or
    /// variables followed by slacks for market split).
    pub solution: Vec<i64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct FormulationOptions {
    /// Penalty multiplier override (families that use one).
    pub penalty: Option<f64>,
    /// Run simplicial preprocessing before building an MIS QUBO.
    pub preprocess_mis: bool,
}

#[derive(Debug, Clone)]
enum Lowering {
    Ilp(IlpModel),
    Mis(mis::MisLowering),
    Qap,
    Raw,
}

/// A QUBO together with the information needed to map its bitstrings back
/// to the source instance.
#[derive(Debug, Clone)]
pub struct Formulation {
    pub qubo: QuboModel,
    lowering: Lowering,
}

impl Instance {
    pub fn name(&self) -> &str {
        match self {
            Instance::Mdkp(i) => &i.name,
            Instance::Mis(g) => &g.name,
            Instance::Qap(i) => &i.name,
            Instance::Msp(i) => &i.name,
            Instance::Qubo(q) => &q.name,
        }
    }

    pub fn family(&self) -> Family {
        match self {
            Instance::Mdkp(_) => Family::Mdkp,
            Instance::Mis(_) => Family::Mis,
            Instance::Qap(_) => Family::Qap,
            Instance::Msp(_) => Family::Msp,
            Instance::Qubo(_) => Family::Qubo,
        }
    }

    pub fn sense(&self) -> Sense {
        match self {
            Instance::Mdkp(_) | Instance::Mis(_) => Sense::Maximize,
            _ => Sense::Minimize,
        }
    }

    /// Known optimum carried as metadata, if any.
    pub fn best_known(&self) -> Option<f64> {
        match self {
            Instance::Mdkp(i) => i.known_optimum,
            Instance::Mis(g) => g.known_mis.map(|v| v as f64),
            Instance::Qap(i) => i.known_optimum,
            Instance::Msp(i) => i.known_optimum,
            Instance::Qubo(_) => None,
        }
    }

    pub fn set_best_known(&mut self, value: f64) {
        match self {
            Instance::Mdkp(i) => i.known_optimum = Some(value),
            Instance::Mis(g) => g.known_mis = Some(value.round() as usize),
            Instance::Qap(i) => i.known_optimum = Some(value),
            Instance::Msp(i) => i.known_optimum = Some(value),
            Instance::Qubo(_) => {}
        }
    }

    pub fn formulate(&self, opts: &FormulationOptions) -> Result<Formulation> {
        let via_ilp = |ilp: IlpModel| -> Result<Formulation> {
            let mut pen = default_penalties(&ilp);
            if let Some(eta) = opts.penalty {
                pen = crate::formulation::default_penalties_with(&ilp, eta);
            }
            Ok(Formulation {
                qubo: ilp_to_qubo(&ilp, &pen)?,
                lowering: Lowering::Ilp(ilp),
            })
        };
        match self {
            Instance::Mdkp(i) => via_ilp(i.to_ilp()),
            Instance::Msp(i) => via_ilp(i.to_ilp()),
            Instance::Mis(g) => {
                let lowering = mis::MisLowering::new(g, opts.preprocess_mis);
                let penalty = opts.penalty.unwrap_or(mis::DEFAULT_EDGE_PENALTY);
                Ok(Formulation {
                    qubo: mis::mis_to_qubo(lowering.solve_graph(), penalty)?,
                    lowering: Lowering::Mis(lowering),
                })
            }
            Instance::Qap(i) => {
                let penalty = opts.penalty.unwrap_or_else(|| i.default_penalty());
                Ok(Formulation {
                    qubo: qap::qap_to_qubo(i, penalty)?,
                    lowering: Lowering::Qap,
                })
            }
            Instance::Qubo(q) => Ok(Formulation {
                qubo: q.qubo.clone(),
                lowering: Lowering::Raw,
            }),
        }
    }

    /// Objective and feasibility of a QUBO bitstring produced by `formulation`.
    pub fn evaluate(&self, formulation: &Formulation, bits: &[u8]) -> Result<Evaluation> {
        crate::formulation::evaluate(&formulation.qubo, bits)?;
        match (&formulation.lowering, self) {
            (Lowering::Ilp(ilp), _) => {
                let (x, _slack) = formulation.qubo.var_map.decode(bits)?;
                let feasibility = match self {
                    Instance::Msp(m) => m.check_feasibility(&x)?,
                    Instance::Mdkp(m) => m.check_feasibility(&x)?,
                    _ => {
                        let (violated, magnitude) = ilp.violations(&x);
                        Feasibility {
                            feasible: violated == 0,
                            violated,
                            magnitude,
                        }
                    }
                };
                Ok(Evaluation {
                    objective: ilp.objective_value(&x),
                    feasibility,
                    solution: x,
                })
            }
            (Lowering::Mis(low), Instance::Mis(g)) => {
                let set = low.lift(bits);
                let mut sel = vec![0i64; g.num_vertices()];
                for &v in &set {
                    sel[v] = 1;
                }
                Ok(Evaluation {
                    objective: set.len() as f64,
                    feasibility: g.check_feasibility(&sel)?,
                    solution: sel,
                })
            }
            (Lowering::Qap, Instance::Qap(q)) => {
                let x: Vec<i64> = bits.iter().map(|&b| b as i64).collect();
                Ok(Evaluation {
                    objective: q.assignment_cost(&x),
                    feasibility: q.check_feasibility(&x)?,
                    solution: x,
                })
            }
            (Lowering::Raw, _) => Ok(Evaluation {
                objective: formulation.qubo.energy(bits),
                feasibility: Feasibility {
                    feasible: true,
                    ..Default::default()
                },
                solution: bits.iter().map(|&b| b as i64).collect(),
            }),
            _ => Err(Error::Invalid("formulation does not belong to instance".into())),
        }
    }
}

/// Whitespace tokenizer that remembers where each token came from.
pub(crate) struct Scanner<'a> {
    origin: &'a str,
    tokens: Vec<(&'a str, usize, usize)>,
    pos: usize,
    end: (usize, usize),
}

impl<'a> Scanner<'a> {
    pub(crate) fn new(text: &'a str, origin: &'a str) -> Self {
        let mut tokens = Vec::new();
        let mut end = (1, 1);
        for (ln, line) in text.lines().enumerate() {
            let content = line.split('#').next().unwrap_or("");
            let mut col = 0;
            for tok in content.split_whitespace() {
                let at = content[col..].find(tok).map_or(col, |p| p + col);
                tokens.push((tok, ln + 1, at + 1));
                col = at + tok.len();
            }
            end = (ln + 1, line.len() + 1);
        }
        Self {
            origin,
            tokens,
            pos: 0,
            end,
        }
    }

    pub(crate) fn error_at(&self, line: usize, column: usize, message: String) -> Error {
        Error::Parse {
            path: self.origin.to_string(),
            line,
            column,
            message,
        }
    }

    pub(crate) fn next_token(&mut self, section: &str) -> Result<(&'a str, usize, usize)> {
        match self.tokens.get(self.pos) {
            Some(&t) => {
                self.pos += 1;
                Ok(t)
            }
            None => Err(self.error_at(
                self.end.0,
                self.end.1,
                format!("unexpected end of input while reading {section}"),
            )),
        }
    }

    pub(crate) fn number<T: FromStr>(&mut self, section: &str) -> Result<T> {
        let (tok, line, col) = self.next_token(section)?;
        tok.parse()
            .map_err(|_| self.error_at(line, col, format!("invalid number `{tok}` in {section}")))
    }

    pub(crate) fn numbers<T: FromStr>(&mut self, count: usize, section: &str) -> Result<Vec<T>> {
        (0..count).map(|_| self.number(section)).collect()
    }

    pub(crate) fn expect_end(&self) -> Result<()> {
        match self.tokens.get(self.pos) {
            None => Ok(()),
            Some(&(tok, line, col)) => Err(self.error_at(line, col, format!("unexpected trailing token `{tok}`"))),
        }
    }
}

pub(crate) fn format_row<T: fmt::Display>(row: &[T]) -> String {
    row.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(" ")
}

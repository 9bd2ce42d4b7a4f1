//! Integer linear programs, their QUBO lowering, and the Ising form.
//!
//! Bounded integer variables are binary-encoded with power-of-two weights,
//! inequality rows get binary slack variables, and every constraint enters
//! the objective as a squared residual scaled by a penalty weight. Constant
//! terms collect in the QUBO offset, so for every bit assignment
//! `evaluate(z)` equals the penalised ILP objective exactly.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::problems::line_tokens;

/// Penalty weight is this multiple of the largest objective magnitude.
pub const DEFAULT_PENALTY_MULTIPLIER: f64 = 10.0;

const SYMMETRY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sense {
    Minimize,
    Maximize,
}

/// `opt c^T x` subject to `A_eq x = b_eq`, `A_ineq x <= b_ineq` and
/// `0 <= x_i <= U_i` integral.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IlpModel {
    pub objective: Vec<f64>,
    pub sense: Sense,
    #[serde(default)]
    pub eq_matrix: Vec<Vec<f64>>,
    #[serde(default)]
    pub eq_rhs: Vec<f64>,
    #[serde(default)]
    pub ineq_matrix: Vec<Vec<f64>>,
    #[serde(default)]
    pub ineq_rhs: Vec<f64>,
    pub upper_bounds: Vec<u64>,
    #[serde(default)]
    pub var_names: Vec<String>,
}

impl IlpModel {
    /// Model over `objective.len()` binary variables with no constraints.
    pub fn binary(objective: Vec<f64>, sense: Sense) -> Self {
        let n = objective.len();
        Self::new(objective, sense, vec![1; n])
    }

    pub fn new(objective: Vec<f64>, sense: Sense, upper_bounds: Vec<u64>) -> Self {
        let var_names = (0..objective.len()).map(|i| format!("x{i}")).collect();
        Self {
            objective,
            sense,
            eq_matrix: Vec::new(),
            eq_rhs: Vec::new(),
            ineq_matrix: Vec::new(),
            ineq_rhs: Vec::new(),
            upper_bounds,
            var_names,
        }
    }

    pub fn add_eq(&mut self, row: Vec<f64>, rhs: f64) -> &mut Self {
        self.eq_matrix.push(row);
        self.eq_rhs.push(rhs);
        self
    }

    pub fn add_le(&mut self, row: Vec<f64>, rhs: f64) -> &mut Self {
        self.ineq_matrix.push(row);
        self.ineq_rhs.push(rhs);
        self
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.num_vars();
        if self.upper_bounds.len() != n {
            return Err(Error::dims(format!(
                "{} upper bounds for {n} variables",
                self.upper_bounds.len()
            )));
        }
        if !self.var_names.is_empty() && self.var_names.len() != n {
            return Err(Error::dims("variable name count"));
        }
        for (label, mat, rhs) in [
            ("equality", &self.eq_matrix, &self.eq_rhs),
            ("inequality", &self.ineq_matrix, &self.ineq_rhs),
        ] {
            if mat.len() != rhs.len() {
                return Err(Error::dims(format!(
                    "{} {label} rows but {} right-hand sides",
                    mat.len(),
                    rhs.len()
                )));
            }
            if let Some(row) = mat.iter().position(|r| r.len() != n) {
                return Err(Error::dims(format!("{label} row {row} has wrong width")));
            }
            if rhs.iter().any(|b| !b.is_finite()) {
                return Err(Error::Invalid(format!("non-finite {label} rhs")));
            }
        }
        Ok(())
    }

    pub fn objective_value(&self, x: &[i64]) -> f64 {
        dot(&self.objective, x)
    }

    /// Number of violated rows (bounds included) and total absolute violation.
    pub fn violations(&self, x: &[i64]) -> (usize, f64) {
        let mut count = 0;
        let mut total = 0.0;
        for (row, b) in self.eq_matrix.iter().zip(&self.eq_rhs) {
            let r = (dot(row, x) - b).abs();
            if r > 1e-9 {
                count += 1;
                total += r;
            }
        }
        for (row, b) in self.ineq_matrix.iter().zip(&self.ineq_rhs) {
            let r = dot(row, x) - b;
            if r > 1e-9 {
                count += 1;
                total += r;
            }
        }
        for (&xi, &u) in x.iter().zip(&self.upper_bounds) {
            if xi < 0 || xi as u64 > u {
                count += 1;
                total += if xi < 0 { -xi as f64 } else { (xi as u64 - u) as f64 };
            }
        }
        (count, total)
    }

    pub fn is_feasible(&self, x: &[i64]) -> bool {
        self.violations(x).0 == 0
    }
}

fn dot(row: &[f64], x: &[i64]) -> f64 {
    row.iter().zip(x).map(|(a, &v)| a * v as f64).sum()
}

/// Bit count and power-of-two weights that cover `0..=upper`.
pub fn plan_binary_encoding(upper: u64) -> (usize, Vec<u64>) {
    // ceil(log2(U + 1)) == bit length of U
    let k = (u64::BITS - upper.leading_zeros()) as usize;
    (k, (0..k).map(|i| 1u64 << i).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BitRef {
    pub index: usize,
    pub weight: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlackEncoding {
    pub bits: Vec<BitRef>,
    pub bound: u64,
}

/// Where each original variable and each inequality slack lives in the
/// QUBO bit vector.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct VariableMap {
    pub data: Vec<Vec<BitRef>>,
    pub slack: Vec<SlackEncoding>,
    pub num_bits: usize,
    /// Inequality rows whose slack bound was negative (no slack bits).
    pub infeasible_rows: Vec<usize>,
}

impl VariableMap {
    /// One bit per variable, no slack.
    pub fn identity(n: usize) -> Self {
        Self {
            data: (0..n).map(|i| vec![BitRef { index: i, weight: 1 }]).collect(),
            slack: Vec::new(),
            num_bits: n,
            infeasible_rows: Vec::new(),
        }
    }

    pub fn decode(&self, bits: &[u8]) -> Result<(Vec<i64>, Vec<i64>)> {
        let read = |refs: &[BitRef]| -> Result<i64> {
            refs.iter().try_fold(0i64, |acc, r| {
                let b = bits.get(r.index).ok_or(Error::IndexOutOfRange {
                    index: r.index,
                    len: bits.len(),
                })?;
                Ok(acc + if *b != 0 { r.weight as i64 } else { 0 })
            })
        };
        let x = self.data.iter().map(|r| read(r)).collect::<Result<Vec<_>>>()?;
        let s = self.slack.iter().map(|e| read(&e.bits)).collect::<Result<Vec<_>>>()?;
        Ok((x, s))
    }

    /// Bits representing the given variable and slack values. Values are
    /// truncated to the width of each encoding.
    pub fn encode(&self, x: &[i64], slack: &[i64]) -> Vec<u8> {
        let mut bits = vec![0u8; self.num_bits];
        let mut put = |refs: &[BitRef], v: i64| {
            for r in refs {
                if v as u64 & r.weight != 0 {
                    bits[r.index] = 1;
                }
            }
        };
        for (refs, &v) in self.data.iter().zip(x) {
            put(refs, v);
        }
        for (enc, &v) in self.slack.iter().zip(slack) {
            put(&enc.bits, v);
        }
        bits
    }
}

/// Inverse of the binary encoding on its image.
pub fn decode_solution(map: &VariableMap, bits: &[u8]) -> Result<(Vec<i64>, Vec<i64>)> {
    map.decode(bits)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PenaltyConfig {
    pub lambda_eq: f64,
    pub lambda_ineq: f64,
}

impl PenaltyConfig {
    pub fn uniform(lambda: f64) -> Result<Self> {
        let p = Self {
            lambda_eq: lambda,
            lambda_ineq: lambda,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.lambda_eq > 0.0 && self.lambda_ineq > 0.0 {
            Ok(())
        } else {
            Err(Error::Invalid("penalty weights must be positive".into()))
        }
    }
}

/// `eta * max(1, C_max)` with `C_max` the largest objective magnitude.
pub fn default_penalties_with(ilp: &IlpModel, multiplier: f64) -> PenaltyConfig {
    let c_max = ilp.objective.iter().fold(0.0f64, |m, c| m.max(c.abs()));
    let lambda = multiplier * c_max.max(1.0);
    PenaltyConfig {
        lambda_eq: lambda,
        lambda_ineq: lambda,
    }
}

pub fn default_penalties(ilp: &IlpModel) -> PenaltyConfig {
    default_penalties_with(ilp, DEFAULT_PENALTY_MULTIPLIER)
}

/// `x^T Q x + c^T x + offset` over binary `x`. `Q` is stored symmetric with
/// a zero diagonal; diagonal contributions live in `linear`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuboModel {
    n: usize,
    quad: Vec<f64>,
    pub linear: Vec<f64>,
    pub offset: f64,
    pub var_map: VariableMap,
}

impl QuboModel {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            quad: vec![0.0; n * n],
            linear: vec![0.0; n],
            offset: 0.0,
            var_map: VariableMap::identity(n),
        }
    }

    /// Build from a full matrix (symmetrised, diagonal folded into the
    /// linear part).
    pub fn from_dense(q: &[Vec<f64>], linear: Vec<f64>, offset: f64) -> Result<Self> {
        let n = linear.len();
        if q.len() != n || q.iter().any(|r| r.len() != n) {
            return Err(Error::dims("Q must be n x n"));
        }
        let mut model = Self::zeros(n);
        model.linear = linear;
        model.offset = offset;
        for (i, row) in q.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                model.add_quadratic(i, j, v);
            }
        }
        Ok(model)
    }

    pub fn dimension(&self) -> usize {
        self.n
    }

    /// Symmetric entry `Q_ij` (zero on the diagonal).
    pub fn quad(&self, i: usize, j: usize) -> f64 {
        self.quad[i * self.n + j]
    }

    pub fn quad_row(&self, i: usize) -> &[f64] {
        &self.quad[i * self.n..(i + 1) * self.n]
    }

    /// Add `v * x_i * x_j` to the objective.
    pub fn add_quadratic(&mut self, i: usize, j: usize, v: f64) {
        if i == j {
            self.linear[i] += v;
        } else {
            self.quad[i * self.n + j] += v / 2.0;
            self.quad[j * self.n + i] += v / 2.0;
        }
    }

    pub fn add_linear(&mut self, i: usize, v: f64) {
        self.linear[i] += v;
    }

    /// Add `weight * (sum_k a_k z_k + constant)^2`.
    pub fn add_squared_linear(&mut self, terms: &[(usize, f64)], constant: f64, weight: f64) {
        for (a, &(i, ai)) in terms.iter().enumerate() {
            // z^2 = z for the diagonal
            self.linear[i] += weight * (ai * ai + 2.0 * constant * ai);
            for &(j, aj) in &terms[a + 1..] {
                self.add_quadratic(i, j, weight * 2.0 * ai * aj);
            }
        }
        self.offset += weight * constant * constant;
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.n).all(|i| {
            (0..self.n).all(|j| (self.quad(i, j) - self.quad(j, i)).abs() <= SYMMETRY_TOL) && self.quad(i, i) == 0.0
        })
    }

    /// Objective value without bounds checking on `x`.
    pub fn energy(&self, x: &[u8]) -> f64 {
        let mut e = self.offset;
        for i in 0..self.n {
            if x[i] == 0 {
                continue;
            }
            e += self.linear[i];
            let row = self.quad_row(i);
            for j in 0..self.n {
                if x[j] != 0 {
                    e += row[j];
                }
            }
        }
        e
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.quad.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Canonical text exchange form: `N offset`, then `i j coeff` for every
    /// nonzero term with `i <= j`, ascending. Diagonal rows carry the linear
    /// coefficient; off-diagonal rows the full coefficient of `x_i x_j`.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{} {}", self.n, self.offset);
        for i in 0..self.n {
            if self.linear[i] != 0.0 {
                let _ = writeln!(out, "{i} {i} {}", self.linear[i]);
            }
            for j in i + 1..self.n {
                let v = self.quad(i, j) + self.quad(j, i);
                if v != 0.0 {
                    let _ = writeln!(out, "{i} {j} {v}");
                }
            }
        }
        out
    }

    pub fn from_text(text: &str, origin: &str) -> Result<Self> {
        let perr = |line: usize, column: usize, message: String| Error::Parse {
            path: origin.to_string(),
            line,
            column,
            message,
        };
        let mut lines = text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'));
        let (hl, header) = lines
            .next()
            .ok_or_else(|| perr(1, 1, "missing `N offset` header".into()))?;
        let head = line_tokens(header);
        let n: usize = head
            .first()
            .and_then(|t| t.0.parse().ok())
            .ok_or_else(|| perr(hl + 1, head.first().map_or(1, |t| t.1), "bad dimension".into()))?;
        let offset: f64 = head
            .get(1)
            .and_then(|t| t.0.parse().ok())
            .ok_or_else(|| perr(hl + 1, head.get(1).map_or(1, |t| t.1), "bad offset".into()))?;
        let mut model = Self::zeros(n);
        model.offset = offset;
        for (ln, line) in lines {
            let toks = line_tokens(line);
            if toks.len() != 3 {
                let col = toks.get(3).or(toks.first()).map_or(1, |t| t.1);
                return Err(perr(ln + 1, col, "expected `i j coeff`".into()));
            }
            let index = |k: usize, what: &str| -> Result<usize> {
                let (tok, col) = toks[k];
                let v: usize = tok
                    .parse()
                    .map_err(|_| perr(ln + 1, col, format!("bad {what} index")))?;
                if v >= n {
                    return Err(perr(ln + 1, col, format!("index {v} out of range for N={n}")));
                }
                Ok(v)
            };
            let i = index(0, "row")?;
            let j = index(1, "column")?;
            let v: f64 = toks[2]
                .0
                .parse()
                .map_err(|_| perr(ln + 1, toks[2].1, "bad coefficient".into()))?;
            model.add_quadratic(i, j, v);
        }
        Ok(model)
    }
}

/// `evaluate(x) = x^T Q x + c^T x + offset`.
pub fn evaluate(qubo: &QuboModel, x: &[u8]) -> Result<f64> {
    if x.len() != qubo.dimension() {
        return Err(Error::dims(format!(
            "bitstring of length {} for QUBO of dimension {}",
            x.len(),
            qubo.dimension()
        )));
    }
    Ok(qubo.energy(x))
}

/// Lower `ilp` to a QUBO. Maximisation is handled by negating the
/// objective, so the QUBO value of a decoded point is `-c^T x` plus
/// penalties in that case.
pub fn ilp_to_qubo(ilp: &IlpModel, penalties: &PenaltyConfig) -> Result<QuboModel> {
    ilp.validate()?;
    penalties.validate()?;
    let sign = match ilp.sense {
        Sense::Minimize => 1.0,
        Sense::Maximize => -1.0,
    };

    let mut next = 0usize;
    let mut data = Vec::with_capacity(ilp.num_vars());
    for &u in &ilp.upper_bounds {
        let (k, weights) = plan_binary_encoding(u);
        data.push(
            weights
                .into_iter()
                .enumerate()
                .map(|(b, weight)| BitRef {
                    index: next + b,
                    weight,
                })
                .collect::<Vec<_>>(),
        );
        next += k;
    }

    let integral = |row: &[f64]| row.iter().all(|a| a.fract() == 0.0);
    let mut slack = Vec::with_capacity(ilp.ineq_matrix.len());
    let mut infeasible_rows = Vec::new();
    let mut ineq_rhs = Vec::with_capacity(ilp.ineq_rhs.len());
    for (r, (row, &b)) in ilp.ineq_matrix.iter().zip(&ilp.ineq_rhs).enumerate() {
        // integer LHS: tighten b to floor(b) so an exact zero residual exists
        let b_eff = if integral(row) { (b + 1e-9).floor() } else { b };
        ineq_rhs.push(b_eff);
        let min_lhs: f64 = row
            .iter()
            .zip(&ilp.upper_bounds)
            .map(|(a, &u)| (a * u as f64).min(0.0))
            .sum();
        let room = b_eff - min_lhs;
        if room < 0.0 {
            log::warn!("inequality {r} cannot be satisfied (slack bound {room})");
            infeasible_rows.push(r);
            slack.push(SlackEncoding {
                bits: Vec::new(),
                bound: 0,
            });
            continue;
        }
        let bound = (room + 1e-9).floor() as u64;
        let (k, weights) = plan_binary_encoding(bound);
        slack.push(SlackEncoding {
            bits: weights
                .into_iter()
                .enumerate()
                .map(|(b, weight)| BitRef {
                    index: next + b,
                    weight,
                })
                .collect(),
            bound,
        });
        next += k;
    }

    let map = VariableMap {
        data,
        slack,
        num_bits: next,
        infeasible_rows,
    };
    let mut qubo = QuboModel::zeros(next);

    for (refs, &c) in map.data.iter().zip(&ilp.objective) {
        for r in refs {
            qubo.add_linear(r.index, sign * c * r.weight as f64);
        }
    }

    let expand = |row: &[f64]| -> Vec<(usize, f64)> {
        row.iter()
            .zip(&map.data)
            .flat_map(|(&a, refs)| refs.iter().map(move |r| (r.index, a * r.weight as f64)))
            .filter(|&(_, v)| v != 0.0)
            .collect()
    };

    for (row, &b) in ilp.eq_matrix.iter().zip(&ilp.eq_rhs) {
        qubo.add_squared_linear(&expand(row), -b, penalties.lambda_eq);
    }
    for ((row, &b), enc) in ilp.ineq_matrix.iter().zip(&ineq_rhs).zip(&map.slack) {
        let mut terms = expand(row);
        terms.extend(enc.bits.iter().map(|r| (r.index, r.weight as f64)));
        qubo.add_squared_linear(&terms, -b, penalties.lambda_ineq);
    }

    qubo.var_map = map;
    Ok(qubo)
}

/// Spin form `E(s) = sum_{i<j} J_ij s_i s_j + sum_i h_i s_i + constant`
/// with `x = (1 + s) / 2`. `J` is stored symmetric with zero diagonal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IsingModel {
    n: usize,
    couplings: Vec<f64>,
    pub fields: Vec<f64>,
    pub constant: f64,
}

impl IsingModel {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            couplings: vec![0.0; n * n],
            fields: vec![0.0; n],
            constant: 0.0,
        }
    }

    pub fn num_spins(&self) -> usize {
        self.n
    }

    pub fn coupling(&self, i: usize, j: usize) -> f64 {
        self.couplings[i * self.n + j]
    }

    pub fn set_coupling(&mut self, i: usize, j: usize, v: f64) {
        assert_ne!(i, j, "diagonal couplings belong in the constant");
        self.couplings[i * self.n + j] = v;
        self.couplings[j * self.n + i] = v;
    }

    /// Nonzero `(i, j, J_ij)` with `i < j`.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.n).flat_map(move |i| {
            (i + 1..self.n).filter_map(move |j| {
                let v = self.coupling(i, j);
                (v != 0.0).then_some((i, j, v))
            })
        })
    }

    pub fn energy(&self, spins: &[i8]) -> f64 {
        let mut e = self.constant;
        for (i, &si) in spins.iter().enumerate().take(self.n) {
            let si = si as f64;
            e += self.fields[i] * si;
            for (j, &sj) in spins.iter().enumerate().take(self.n).skip(i + 1) {
                e += self.coupling(i, j) * si * sj as f64;
            }
        }
        e
    }

    /// Frobenius norm of the symmetric coupling matrix.
    pub fn coupling_norm(&self) -> f64 {
        self.couplings.iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

pub fn qubo_to_ising(qubo: &QuboModel) -> IsingModel {
    let n = qubo.dimension();
    let mut ising = IsingModel::zeros(n);
    ising.constant = qubo.offset;
    for i in 0..n {
        let half_lin = qubo.linear[i] / 2.0;
        ising.fields[i] += half_lin;
        ising.constant += half_lin;
        for j in i + 1..n {
            // coefficient of x_i x_j is 2 Q_ij; x_i x_j = (1 + s_i + s_j + s_i s_j) / 4
            let q = qubo.quad(i, j);
            if q != 0.0 {
                let quarter = q / 2.0;
                ising.set_coupling(i, j, quarter);
                ising.fields[i] += quarter;
                ising.fields[j] += quarter;
                ising.constant += quarter;
            }
        }
    }
    ising
}

pub fn bits_to_spins(bits: &[u8]) -> Vec<i8> {
    bits.iter().map(|&b| if b != 0 { 1 } else { -1 }).collect()
}

pub fn spins_to_bits(spins: &[i8]) -> Vec<u8> {
    spins.iter().map(|&s| u8::from(s > 0)).collect()
}

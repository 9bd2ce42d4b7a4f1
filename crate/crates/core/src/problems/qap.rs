//! Quadratic assignment (QAPLIB text format).

use super::{format_row, Feasibility, Scanner};
use crate::error::{Error, Result};
use crate::formulation::QuboModel;

#[derive(Debug, Clone, PartialEq)]
pub struct QapInstance {
    pub name: String,
    pub flow: Vec<Vec<f64>>,
    pub dist: Vec<Vec<f64>>,
    pub known_optimum: Option<f64>,
}

impl QapInstance {
    pub fn new(name: impl Into<String>, flow: Vec<Vec<f64>>, dist: Vec<Vec<f64>>) -> Result<Self> {
        let n = flow.len();
        let square = |m: &[Vec<f64>]| m.len() == n && m.iter().all(|r| r.len() == n);
        if n == 0 || !square(&flow) || !square(&dist) {
            return Err(Error::dims(
                "flow and distance must be square, non-empty and the same size",
            ));
        }
        Ok(Self {
            name: name.into(),
            flow,
            dist,
            known_optimum: None,
        })
    }

    pub fn size(&self) -> usize {
        self.flow.len()
    }

    /// `2 * max|f| * max|d| * n`.
    pub fn default_penalty(&self) -> f64 {
        let max_abs = |m: &[Vec<f64>]| m.iter().flatten().fold(0.0f64, |a, v| a.max(v.abs()));
        let p = 2.0 * max_abs(&self.flow) * max_abs(&self.dist) * self.size() as f64;
        if p > 0.0 {
            p
        } else {
            1.0
        }
    }

    /// `sum f_ij d_{pi(i) pi(j)}` for a permutation `perm[i] = location of i`.
    pub fn permutation_cost(&self, perm: &[usize]) -> f64 {
        let n = self.size();
        let mut cost = 0.0;
        for i in 0..n {
            for j in 0..n {
                cost += self.flow[i][j] * self.dist[perm[i]][perm[j]];
            }
        }
        cost
    }

    /// Objective `sum f_ij d_kl x_ik x_jl` of an assignment bit matrix
    /// (row-major, `x[i*n + k]`), whether or not it is a permutation.
    pub fn assignment_cost(&self, x: &[i64]) -> f64 {
        let n = self.size();
        let on: Vec<(usize, usize)> = (0..n * n).filter(|&v| x[v] != 0).map(|v| (v / n, v % n)).collect();
        let mut cost = 0.0;
        for &(i, k) in &on {
            for &(j, l) in &on {
                cost += self.flow[i][j] * self.dist[k][l];
            }
        }
        cost
    }

    /// Row and column sums that differ from one.
    pub fn check_feasibility(&self, x: &[i64]) -> Result<Feasibility> {
        let n = self.size();
        if x.len() != n * n {
            return Err(Error::dims(format!("assignment of length {} for n={n}", x.len())));
        }
        let rows = (0..n).map(|i| (0..n).map(|k| x[i * n + k]).sum::<i64>() as f64 - 1.0);
        let cols = (0..n).map(|k| (0..n).map(|i| x[i * n + k]).sum::<i64>() as f64 - 1.0);
        Ok(Feasibility::from_residuals(rows.chain(cols)))
    }

    /// Permutation encoded by a feasible assignment matrix.
    pub fn permutation_of(&self, x: &[i64]) -> Option<Vec<usize>> {
        let n = self.size();
        if !self.check_feasibility(x).ok()?.feasible {
            return None;
        }
        Some((0..n).map(|i| (0..n).find(|&k| x[i * n + k] != 0).unwrap()).collect())
    }

    pub fn parse(text: &str, name: &str) -> Result<Self> {
        let mut sc = Scanner::new(text, name);
        let n: usize = sc.number("size")?;
        let mut read = |label: &str| -> Result<Vec<Vec<f64>>> {
            (0..n)
                .map(|r| sc.numbers(n, &format!("{label} row {}", r + 1)))
                .collect()
        };
        let flow = read("flow")?;
        let dist = read("distance")?;
        sc.expect_end()?;
        Self::new(name, flow, dist)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("{}\n\n", self.size());
        for m in [&self.flow, &self.dist] {
            for row in m {
                out.push_str(&format_row(row));
                out.push('\n');
            }
            out.push('\n');
        }
        out
    }
}

/// `n^2` variables `x_{i*n+k}` (facility `i` at location `k`), cost
/// `sum f_ij d_kl x_ik x_jl` plus one-hot penalties on every row and column.
pub fn qap_to_qubo(inst: &QapInstance, penalty: f64) -> Result<QuboModel> {
    if !penalty.is_finite() || penalty <= 0.0 {
        return Err(Error::Invalid(format!("penalty {penalty} must be positive")));
    }
    let n = inst.size();
    let var = |i: usize, k: usize| i * n + k;
    let mut q = QuboModel::zeros(n * n);
    for i in 0..n {
        for j in 0..n {
            let f = inst.flow[i][j];
            if f == 0.0 {
                continue;
            }
            for k in 0..n {
                for l in 0..n {
                    let d = inst.dist[k][l];
                    if d != 0.0 {
                        q.add_quadratic(var(i, k), var(j, l), f * d);
                    }
                }
            }
        }
    }
    for a in 0..n {
        let row: Vec<(usize, f64)> = (0..n).map(|k| (var(a, k), 1.0)).collect();
        let col: Vec<(usize, f64)> = (0..n).map(|i| (var(i, a), 1.0)).collect();
        q.add_squared_linear(&row, -1.0, penalty);
        q.add_squared_linear(&col, -1.0, penalty);
    }
    Ok(q)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_facility_example() {
        let inst = QapInstance::new(
            "t",
            vec![vec![0.0, 1.0], vec![1.0, 0.0]],
            vec![vec![0.0, 3.0], vec![3.0, 0.0]],
        )
        .unwrap();
        let q = qap_to_qubo(&inst, inst.default_penalty()).unwrap();
        let mut best = f64::INFINITY;
        for mask in 0..16usize {
            let x: Vec<u8> = (0..4).map(|i| ((mask >> i) & 1) as u8).collect();
            best = best.min(q.energy(&x));
        }
        assert_eq!(best, 6.0);
        assert_eq!(q.energy(&[1, 0, 0, 1]), 6.0);
        assert_eq!(q.energy(&[0, 1, 1, 0]), 6.0);
    }

    #[test]
    fn parse_round_trip() {
        let inst = QapInstance::new(
            "r",
            vec![vec![0.0, 2.0], vec![5.0, 0.0]],
            vec![vec![0.0, 1.0], vec![7.0, 0.0]],
        )
        .unwrap();
        assert_eq!(QapInstance::parse(&inst.to_text(), "r").unwrap(), inst);
        let err = QapInstance::parse("2\n0 1\n1 0\n0 3\n", "short").unwrap_err();
        assert!(err.to_string().contains("distance row 2"), "{err}");
    }

    #[test]
    fn feasibility_counts_rows_and_columns() {
        let inst = QapInstance::new("t", vec![vec![0.0; 2]; 2], vec![vec![0.0; 2]; 2]).unwrap();
        let f = inst.check_feasibility(&[1, 1, 0, 0]).unwrap();
        assert_eq!((f.feasible, f.violated), (false, 2));
        assert_eq!(inst.permutation_of(&[0, 1, 1, 0]), Some(vec![1, 0]));
    }
}

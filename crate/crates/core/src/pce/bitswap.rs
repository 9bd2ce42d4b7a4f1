//! Steepest-descent single- and pair-flip local search on a QUBO.

use crate::error::{Error, Result};
use crate::formulation::QuboModel;

use super::optimizer::StopReason;

#[derive(Debug, Clone, PartialEq)]
pub struct BitSwapResult {
    pub bits: Vec<u8>,
    pub value: f64,
    pub flips: usize,
    /// Neighbour evaluations spent.
    pub evals: usize,
    pub status: StopReason,
}

struct Fields<'a> {
    qubo: &'a QuboModel,
    /// `c_i + 2 sum_k Q_ik x_k`
    g: Vec<f64>,
}

impl<'a> Fields<'a> {
    fn new(qubo: &'a QuboModel, x: &[u8]) -> Self {
        let n = qubo.dimension();
        let g = (0..n)
            .map(|i| {
                let row = qubo.quad_row(i);
                qubo.linear[i] + 2.0 * (0..n).filter(|&k| x[k] != 0).map(|k| row[k]).sum::<f64>()
            })
            .collect();
        Self { qubo, g }
    }

    fn single(&self, x: &[u8], i: usize) -> f64 {
        (1.0 - 2.0 * x[i] as f64) * self.g[i]
    }

    fn pair(&self, x: &[u8], i: usize, j: usize) -> f64 {
        let di = 1.0 - 2.0 * x[i] as f64;
        let dj = 1.0 - 2.0 * x[j] as f64;
        di * self.g[i] + dj * self.g[j] + 2.0 * self.qubo.quad(i, j) * di * dj
    }

    fn flip(&mut self, x: &mut [u8], i: usize) {
        let d = 1.0 - 2.0 * x[i] as f64;
        x[i] ^= 1;
        let row = self.qubo.quad_row(i);
        for (g, q) in self.g.iter_mut().zip(row) {
            *g += 2.0 * q * d;
        }
    }
}

/// Improvement threshold scaled to the coefficient magnitude so rounding
/// noise in the incremental fields cannot trigger a move.
fn tolerance(qubo: &QuboModel) -> f64 {
    let n = qubo.dimension();
    let mut scale = qubo.linear.iter().fold(1.0f64, |a, v| a.max(v.abs()));
    for i in 0..n {
        scale = qubo.quad_row(i).iter().fold(scale, |a, v| a.max(2.0 * v.abs()));
    }
    1e-9 * scale
}

/// Repeatedly apply the best improving single flip, falling back to the
/// best improving pair flip when `max_k >= 2`, until neither exists or the
/// evaluation budget is spent.
pub fn bit_swap_search(x: &[u8], qubo: &QuboModel, max_k: usize, budget: usize) -> Result<BitSwapResult> {
    let n = qubo.dimension();
    if x.len() != n {
        return Err(Error::dims(format!(
            "bitstring of length {} for QUBO of dimension {n}",
            x.len()
        )));
    }
    if !(1..=2).contains(&max_k) {
        return Err(Error::Invalid(format!("swap width must be 1 or 2, got {max_k}")));
    }
    let tol = tolerance(qubo);
    let mut bits: Vec<u8> = x.iter().map(|&b| u8::from(b != 0)).collect();
    let mut fields = Fields::new(qubo, &bits);
    let (mut evals, mut flips) = (0usize, 0usize);
    let status = 'search: loop {
        let mut best = (-tol, None::<(usize, Option<usize>)>);
        for i in 0..n {
            if evals >= budget {
                break 'search StopReason::BudgetExhausted;
            }
            evals += 1;
            let d = fields.single(&bits, i);
            if d < best.0 {
                best = (d, Some((i, None)));
            }
        }
        if best.1.is_none() && max_k == 2 {
            for i in 0..n {
                for j in i + 1..n {
                    if evals >= budget {
                        break 'search StopReason::BudgetExhausted;
                    }
                    evals += 1;
                    let d = fields.pair(&bits, i, j);
                    if d < best.0 {
                        best = (d, Some((i, Some(j))));
                    }
                }
            }
        }
        match best.1 {
            None => break StopReason::Converged,
            Some((i, j)) => {
                fields.flip(&mut bits, i);
                flips += 1;
                if let Some(j) = j {
                    fields.flip(&mut bits, j);
                    flips += 1;
                }
            }
        }
    };
    Ok(BitSwapResult {
        value: qubo.energy(&bits),
        bits,
        flips,
        evals,
        status,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_ones_penalty_clears() {
        let mut q = QuboModel::zeros(5);
        q.linear = vec![1.0; 5];
        let r = bit_swap_search(&[1; 5], &q, 2, usize::MAX).unwrap();
        assert_eq!(r.bits, vec![0; 5]);
        assert_eq!(r.value, 0.0);
    }

    #[test]
    fn pair_move_escapes_single_flip_optimum() {
        // x0 x1 must flip together: single flips cost, the pair gains.
        let mut q = QuboModel::zeros(2);
        q.linear = vec![1.0, 1.0];
        q.add_quadratic(0, 1, -3.0);
        let r = bit_swap_search(&[0, 0], &q, 2, usize::MAX).unwrap();
        assert_eq!(r.bits, vec![1, 1]);
        let r1 = bit_swap_search(&[0, 0], &q, 1, usize::MAX).unwrap();
        assert_eq!(r1.bits, vec![0, 0]);
    }

    #[test]
    fn budget_reported() {
        let mut q = QuboModel::zeros(4);
        q.linear = vec![1.0; 4];
        let r = bit_swap_search(&[1; 4], &q, 2, 3).unwrap();
        assert_eq!(r.status, StopReason::BudgetExhausted);
        assert!(r.value <= 4.0);
    }
}

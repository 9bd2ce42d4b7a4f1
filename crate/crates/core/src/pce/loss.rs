//! Relaxed losses over correlator values.

use petgraph::algo::min_spanning_tree;
use petgraph::data::Element;
use petgraph::graph::{NodeIndex, UnGraph};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::formulation::IsingModel;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LossMode {
    /// Spin-form couplings and fields with a linear field term.
    #[default]
    IsingConsistent,
    /// QUBO couplings with the linear coefficients multiplying `t_i^2`.
    SquaredLinear,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LossConfig {
    /// tanh steepness.
    pub alpha: f64,
    /// Regularisation weight.
    pub beta: f64,
    /// Multiplier on the Frobenius norm that sets `nu`.
    pub nu_scale: f64,
    pub mode: LossMode,
}

impl Default for LossConfig {
    fn default() -> Self {
        Self {
            alpha: 1.0,
            beta: 0.5,
            nu_scale: 1.0,
            mode: LossMode::IsingConsistent,
        }
    }
}

impl LossConfig {
    pub fn validate(&self) -> Result<()> {
        let negative = |v: f64| v.is_nan() || v < 0.0;
        if negative(self.alpha) || self.alpha == 0.0 || negative(self.beta) || negative(self.nu_scale) {
            return Err(Error::Invalid(format!(
                "loss needs alpha > 0, beta >= 0, nu_scale >= 0 (got {}, {}, {})",
                self.alpha, self.beta, self.nu_scale
            )));
        }
        Ok(())
    }
}

/// `beta * nu * [(1/m) sum t_i^2]^2`.
pub fn regularizer(t: &[f64], beta: f64, nu: f64) -> f64 {
    if t.is_empty() {
        return 0.0;
    }
    let mean_sq = t.iter().map(|v| v * v).sum::<f64>() / t.len() as f64;
    beta * nu * mean_sq * mean_sq
}

/// Precomputed QUBO loss for repeated evaluation.
#[derive(Debug, Clone)]
pub struct QuboLoss {
    cfg: LossConfig,
    /// `(i, j, w)` pair weights in the active mode.
    pairs: Vec<(usize, usize, f64)>,
    linear: Vec<f64>,
    nu: f64,
}

impl QuboLoss {
    pub fn new(ising: &IsingModel, cfg: LossConfig) -> Result<Self> {
        cfg.validate()?;
        let n = ising.num_spins();
        let (pairs, linear, nu) = match cfg.mode {
            LossMode::IsingConsistent => (
                ising.edges().collect(),
                ising.fields.clone(),
                cfg.nu_scale * ising.coupling_norm(),
            ),
            LossMode::SquaredLinear => {
                // Recover the QUBO: x_i x_j carries 4 J_ij, c_i = 2 h_i - 2 sum_j J_ij.
                let pairs = ising.edges().map(|(i, j, v)| (i, j, 4.0 * v)).collect();
                let linear = (0..n)
                    .map(|i| {
                        2.0 * ising.fields[i]
                            - 2.0 * (0..n).filter(|&j| j != i).map(|j| ising.coupling(i, j)).sum::<f64>()
                    })
                    .collect();
                // symmetric Q has entries 2 J_ij
                (pairs, linear, cfg.nu_scale * 2.0 * ising.coupling_norm())
            }
        };
        Ok(Self { cfg, pairs, linear, nu })
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    pub fn config(&self) -> &LossConfig {
        &self.cfg
    }

    pub fn value(&self, correlators: &[f64]) -> f64 {
        let t: Vec<f64> = correlators.iter().map(|&c| (self.cfg.alpha * c).tanh()).collect();
        let mut loss: f64 = self.pairs.iter().map(|&(i, j, w)| w * t[i] * t[j]).sum();
        loss += match self.cfg.mode {
            LossMode::IsingConsistent => self.linear.iter().zip(&t).map(|(h, v)| h * v).sum::<f64>(),
            LossMode::SquaredLinear => self.linear.iter().zip(&t).map(|(c, v)| c * v * v).sum::<f64>(),
        };
        loss + regularizer(&t, self.cfg.beta, self.nu)
    }
}

pub fn qubo_pce_loss(ising: &IsingModel, correlators: &[f64], cfg: &LossConfig) -> Result<f64> {
    if correlators.len() != ising.num_spins() {
        return Err(Error::dims(format!(
            "{} correlators for {} spins",
            correlators.len(),
            ising.num_spins()
        )));
    }
    Ok(QuboLoss::new(ising, *cfg)?.value(correlators))
}

/// Weighted undirected graph for the Max-Cut loss.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedGraph {
    pub num_vertices: usize,
    pub edges: Vec<(usize, usize, f64)>,
}

/// `w(G)/2 + w(T_min)/4`. A disconnected graph uses its minimum spanning
/// forest.
pub fn poljak_turzik_bound(g: &WeightedGraph) -> f64 {
    let total: f64 = g.edges.iter().map(|e| e.2).sum();
    let mut pg = UnGraph::<(), f64>::with_capacity(g.num_vertices, g.edges.len());
    for _ in 0..g.num_vertices {
        pg.add_node(());
    }
    for &(u, v, w) in &g.edges {
        pg.add_edge(NodeIndex::new(u), NodeIndex::new(v), w);
    }
    let tree: f64 = min_spanning_tree(&pg)
        .filter_map(|el| match el {
            Element::Edge { weight, .. } => Some(weight),
            Element::Node { .. } => None,
        })
        .sum();
    total / 2.0 + tree / 4.0
}

pub fn maxcut_pce_loss(g: &WeightedGraph, correlators: &[f64], cfg: &LossConfig) -> Result<f64> {
    cfg.validate()?;
    if correlators.len() != g.num_vertices {
        return Err(Error::dims(format!(
            "{} correlators for {} vertices",
            correlators.len(),
            g.num_vertices
        )));
    }
    let t: Vec<f64> = correlators.iter().map(|&c| (cfg.alpha * c).tanh()).collect();
    let cut: f64 = g.edges.iter().map(|&(i, j, w)| w * t[i] * t[j]).sum();
    Ok(cut + regularizer(&t, cfg.beta, poljak_turzik_bound(g)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit(n: usize, edges: &[(usize, usize)]) -> WeightedGraph {
        WeightedGraph {
            num_vertices: n,
            edges: edges.iter().map(|&(u, v)| (u, v, 1.0)).collect(),
        }
    }

    #[test]
    fn bound_examples() {
        assert_eq!(poljak_turzik_bound(&unit(2, &[(0, 1)])), 0.75);
        assert_eq!(poljak_turzik_bound(&unit(3, &[(0, 1), (1, 2), (0, 2)])), 2.0);
        assert_eq!(poljak_turzik_bound(&unit(4, &[(0, 1), (0, 2), (0, 3)])), 2.25);
        // forest: two disjoint unit edges
        assert_eq!(poljak_turzik_bound(&unit(4, &[(0, 1), (2, 3)])), 1.5);
    }

    #[test]
    fn zero_correlators_give_zero() {
        let mut ising = IsingModel::zeros(3);
        ising.set_coupling(0, 1, 2.0);
        ising.fields = vec![1.0, -1.0, 0.5];
        ising.constant = 7.0;
        for mode in [LossMode::IsingConsistent, LossMode::SquaredLinear] {
            let cfg = LossConfig {
                mode,
                ..Default::default()
            };
            assert_eq!(qubo_pce_loss(&ising, &[0.0; 3], &cfg).unwrap(), 0.0);
        }
        assert_eq!(
            maxcut_pce_loss(&unit(2, &[(0, 1)]), &[0.0, 0.0], &LossConfig::default()).unwrap(),
            0.0
        );
    }

    #[test]
    fn single_coupling_product() {
        let mut ising = IsingModel::zeros(2);
        ising.set_coupling(0, 1, 1.0);
        let cfg = LossConfig {
            beta: 0.0,
            ..Default::default()
        };
        let t = 0.5f64.tanh();
        let got = qubo_pce_loss(&ising, &[0.5, 0.5], &cfg).unwrap();
        assert!((got - t * t).abs() < 1e-15);
    }

    #[test]
    fn regularizer_positive_iff_nonzero() {
        assert_eq!(regularizer(&[0.0, 0.0], 0.5, 2.0), 0.0);
        assert!(regularizer(&[0.0, 0.1], 0.5, 2.0) > 0.0);
    }
}

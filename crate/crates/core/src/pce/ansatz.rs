//! Brickwork ansatz: all-pairs RXX rounds interleaved with rotation layers.

use std::f64::consts::PI;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::simulator::{Circuit, Gate, Pauli};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BrickworkConfig {
    pub num_qubits: usize,
    /// Number of RXX rounds; each round couples every unordered qubit pair.
    pub rxx_rounds: usize,
    /// Axis of each single-qubit rotation layer, in insertion order.
    pub rotation_axes: Vec<Pauli>,
    /// A rotation layer is inserted before every `rotation_stride`-th round.
    pub rotation_stride: usize,
    /// Initial parameters are drawn from `[-init_range, init_range]`.
    pub init_range: f64,
}

impl Default for BrickworkConfig {
    fn default() -> Self {
        Self {
            num_qubits: 2,
            rxx_rounds: 16,
            rotation_axes: vec![Pauli::X, Pauli::Y, Pauli::Z, Pauli::X],
            rotation_stride: 4,
            init_range: PI,
        }
    }
}

impl BrickworkConfig {
    pub fn new(num_qubits: usize) -> Self {
        Self {
            num_qubits,
            ..Self::default()
        }
    }
}

pub fn build_brickwork(cfg: &BrickworkConfig) -> Result<Circuit> {
    let n = cfg.num_qubits;
    if n < 2 {
        return Err(Error::Invalid(format!("brickwork needs at least 2 qubits, got {n}")));
    }
    if cfg.rotation_stride == 0 {
        return Err(Error::Invalid("rotation stride must be positive".into()));
    }
    let mut c = Circuit::new(n);
    let mut axes = cfg.rotation_axes.iter();
    for round in 0..cfg.rxx_rounds {
        if round % cfg.rotation_stride == 0 {
            if let Some(&axis) = axes.next() {
                rotation_layer(&mut c, axis);
            }
        }
        for a in 0..n {
            for b in a + 1..n {
                let t = c.new_param();
                c.add(Gate::Rxx(a, b, t));
            }
        }
    }
    Ok(c)
}

fn rotation_layer(c: &mut Circuit, axis: Pauli) {
    for q in 0..c.num_qubits() {
        let t = c.new_param();
        c.add(match axis {
            Pauli::X => Gate::Rx(q, t),
            Pauli::Y => Gate::Ry(q, t),
            Pauli::Z => Gate::Rz(q, t),
        });
    }
}

pub fn random_parameters(count: usize, range: f64, rng: &mut impl Rng) -> Vec<f64> {
    (0..count).map(|_| rng.random_range(-range..=range)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simulator::resource_summary;

    #[test]
    fn default_counts() {
        for (n, params, rxx) in [(2, 24, 16), (3, 60, 48), (7, 364, 336), (11, 924, 880)] {
            let c = build_brickwork(&BrickworkConfig::new(n)).unwrap();
            let r = resource_summary(&c);
            assert_eq!((r.parameters, r.two_qubit_gates), (params, rxx), "n={n}");
        }
    }

    #[test]
    fn rejects_single_qubit() {
        assert!(build_brickwork(&BrickworkConfig::new(1)).is_err());
    }
}

//! Assignment of binary variables to weight-2 Pauli correlators.

use crate::error::{Error, Result};
use crate::simulator::{Pauli, PauliString};

/// Number of distinct weight-2 strings `X_aX_b`, `Y_aY_b`, `Z_aZ_b` on `n` qubits.
pub fn correlator_capacity(n: usize) -> usize {
    3 * n * n.saturating_sub(1) / 2
}

/// Smallest register (at least two qubits) whose weight-2 capacity covers `m`.
pub fn required_qubits(m: usize) -> usize {
    let mut n = 2;
    while correlator_capacity(n) < m {
        n += 1;
    }
    n
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PceEncoding {
    num_qubits: usize,
    strings: Vec<PauliString>,
}

impl PceEncoding {
    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn num_vars(&self) -> usize {
        self.strings.len()
    }

    /// Correlator weight; always 2.
    pub fn weight(&self) -> usize {
        2
    }

    pub fn strings(&self) -> &[PauliString] {
        &self.strings
    }
}

/// Qubit pairs `(a, b)`, `a < b`, in lexicographic order, each emitting
/// `XX`, `YY`, `ZZ`; the first `m` strings are kept.
pub fn build_encoding(m: usize, n: usize) -> Result<PceEncoding> {
    let available = correlator_capacity(n);
    if m > available {
        return Err(Error::CapacityExceeded { m, available });
    }
    let mut strings = Vec::with_capacity(m);
    'outer: for a in 0..n {
        for b in a + 1..n {
            for p in [Pauli::X, Pauli::Y, Pauli::Z] {
                if strings.len() == m {
                    break 'outer;
                }
                strings.push(PauliString::new(vec![(a, p), (b, p)])?);
            }
        }
    }
    Ok(PceEncoding { num_qubits: n, strings })
}

/// Sign decoding with zero mapped to `+1`.
pub fn decode_bits(correlators: &[f64]) -> Vec<i8> {
    correlators.iter().map(|&c| if c < 0.0 { -1 } else { 1 }).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn qubit_counts() {
        assert_eq!(required_qubits(144), 11);
        assert_eq!(required_qubits(60), 7);
        assert_eq!(required_qubits(3), 2);
        assert_eq!(required_qubits(8), 3);
        assert_eq!(required_qubits(63), 7);
        assert_eq!(required_qubits(64), 8);
    }

    #[test]
    fn enumeration_order() {
        let enc = build_encoding(4, 3).unwrap();
        let names: Vec<String> = enc.strings().iter().map(|s| s.to_string()).collect();
        assert_eq!(names, ["X0X1", "Y0Y1", "Z0Z1", "X0X2"]);
    }

    #[test]
    fn strings_distinct_and_weight_two() {
        for n in 2..=8 {
            let cap = correlator_capacity(n);
            let enc = build_encoding(cap, n).unwrap();
            let set: HashSet<_> = enc.strings().iter().collect();
            assert_eq!(set.len(), cap);
            assert!(enc.strings().iter().all(|s| s.weight() == 2));
        }
        assert!(matches!(
            build_encoding(10, 3),
            Err(Error::CapacityExceeded { m: 10, available: 9 })
        ));
    }

    #[test]
    fn sign_decoding() {
        assert_eq!(decode_bits(&[0.3, -0.7]), vec![1, -1]);
        assert_eq!(decode_bits(&[0.0, 0.0]), vec![1, 1]);
    }
}

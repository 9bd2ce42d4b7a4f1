//! Dense statevector simulation for parameterised RX/RY/RZ/RXX circuits.
//!
//! Qubit `q` is bit `q` of the basis-state index (qubit 0 is the least
//! significant bit). Rotations use the half-angle convention
//! `R_G(theta) = exp(-i theta G / 2)`.

use std::fmt;
use std::fmt::Write as _;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_QUBIT_CAP: usize = 22;

const IMAG_REJECT: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Angle {
    /// Index into the parameter vector.
    Param(usize),
    Fixed(f64),
}

impl Angle {
    fn resolve(self, params: &[f64]) -> f64 {
        match self {
            Angle::Param(slot) => params[slot],
            Angle::Fixed(v) => v,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Gate {
    Rx(usize, Angle),
    Ry(usize, Angle),
    Rz(usize, Angle),
    Rxx(usize, usize, Angle),
}

impl Gate {
    pub fn angle(&self) -> Angle {
        match *self {
            Gate::Rx(_, a) | Gate::Ry(_, a) | Gate::Rz(_, a) | Gate::Rxx(_, _, a) => a,
        }
    }

    pub fn is_two_qubit(&self) -> bool {
        matches!(self, Gate::Rxx(..))
    }

    fn qubits(&self) -> (usize, Option<usize>) {
        match *self {
            Gate::Rx(q, _) | Gate::Ry(q, _) | Gate::Rz(q, _) => (q, None),
            Gate::Rxx(a, b, _) => (a, Some(b)),
        }
    }

    fn mask(&self) -> u64 {
        let (a, b) = self.qubits();
        (1u64 << a) | b.map_or(0, |b| 1u64 << b)
    }
}

/// Ordered gate list over a fixed register.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Circuit {
    num_qubits: usize,
    gates: Vec<Gate>,
    num_params: usize,
}

impl Circuit {
    pub fn new(num_qubits: usize) -> Self {
        Self {
            num_qubits,
            gates: Vec::new(),
            num_params: 0,
        }
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn num_params(&self) -> usize {
        self.num_params
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    /// Allocate the next parameter slot.
    pub fn new_param(&mut self) -> Angle {
        self.num_params += 1;
        Angle::Param(self.num_params - 1)
    }

    pub fn push(&mut self, gate: Gate) -> Result<()> {
        let (a, b) = gate.qubits();
        for q in std::iter::once(a).chain(b) {
            if q >= self.num_qubits {
                return Err(Error::IndexOutOfRange {
                    index: q,
                    len: self.num_qubits,
                });
            }
        }
        if b == Some(a) {
            return Err(Error::Invalid("RXX needs two distinct qubits".into()));
        }
        if let Angle::Param(slot) = gate.angle() {
            if slot >= self.num_params {
                self.num_params = slot + 1;
            }
        }
        self.gates.push(gate);
        Ok(())
    }

    /// Convenience for builders that generate valid gates by construction.
    pub(crate) fn add(&mut self, gate: Gate) {
        self.push(gate).expect("builder produced an invalid gate");
    }

    /// Parameter slots used by the gates, which must be exactly `0..P`.
    pub fn validate(&self) -> Result<()> {
        let mut used = vec![false; self.num_params];
        for g in &self.gates {
            if let Angle::Param(s) = g.angle() {
                used[s] = true;
            }
        }
        match used.iter().position(|u| !u) {
            Some(s) => Err(Error::Invalid(format!("parameter slot {s} unused"))),
            None => Ok(()),
        }
    }

    /// One line per gate: `kind targets slot|=angle`.
    pub fn to_text(&self) -> String {
        let mut out = format!("qubits {}\n", self.num_qubits);
        for g in &self.gates {
            let (name, (a, b)) = match g {
                Gate::Rx(..) => ("rx", g.qubits()),
                Gate::Ry(..) => ("ry", g.qubits()),
                Gate::Rz(..) => ("rz", g.qubits()),
                Gate::Rxx(..) => ("rxx", g.qubits()),
            };
            let _ = write!(out, "{name} {a}");
            if let Some(b) = b {
                let _ = write!(out, " {b}");
            }
            let _ = match g.angle() {
                Angle::Param(s) => writeln!(out, " p{s}"),
                Angle::Fixed(v) => writeln!(out, " ={v}"),
            };
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let bad = |line: usize, msg: &str| Error::Parse {
            path: "<circuit>".into(),
            line,
            column: 1,
            message: msg.to_string(),
        };
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (_, header) = lines.next().ok_or_else(|| bad(1, "missing header"))?;
        let n = header
            .strip_prefix("qubits ")
            .and_then(|v| v.trim().parse().ok())
            .ok_or_else(|| bad(1, "expected `qubits N`"))?;
        let mut c = Circuit::new(n);
        for (ln, line) in lines {
            let toks: Vec<&str> = line.split_whitespace().collect();
            let parse_q = |t: &str| t.parse::<usize>().map_err(|_| bad(ln + 1, "bad qubit"));
            let parse_angle = |t: &str| -> Result<Angle> {
                if let Some(s) = t.strip_prefix('p') {
                    s.parse().map(Angle::Param).map_err(|_| bad(ln + 1, "bad slot"))
                } else if let Some(v) = t.strip_prefix('=') {
                    v.parse().map(Angle::Fixed).map_err(|_| bad(ln + 1, "bad angle"))
                } else {
                    Err(bad(ln + 1, "angle must be `pN` or `=value`"))
                }
            };
            let gate = match (toks.first().copied(), toks.len()) {
                (Some("rx"), 3) => Gate::Rx(parse_q(toks[1])?, parse_angle(toks[2])?),
                (Some("ry"), 3) => Gate::Ry(parse_q(toks[1])?, parse_angle(toks[2])?),
                (Some("rz"), 3) => Gate::Rz(parse_q(toks[1])?, parse_angle(toks[2])?),
                (Some("rxx"), 4) => Gate::Rxx(parse_q(toks[1])?, parse_q(toks[2])?, parse_angle(toks[3])?),
                _ => return Err(bad(ln + 1, "unknown gate line")),
            };
            c.push(gate)?;
        }
        Ok(c)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    num_qubits: usize,
    amps: Vec<Complex64>,
}

impl StateVector {
    pub fn zero_state(num_qubits: usize) -> Result<Self> {
        Self::zero_state_with_cap(num_qubits, DEFAULT_QUBIT_CAP)
    }

    pub fn zero_state_with_cap(num_qubits: usize, cap: usize) -> Result<Self> {
        if num_qubits > cap {
            return Err(Error::QubitCapExceeded {
                requested: num_qubits,
                cap,
            });
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << num_qubits];
        amps[0] = Complex64::new(1.0, 0.0);
        Ok(Self { num_qubits, amps })
    }

    /// Wrap raw amplitudes; the length must be a power of two.
    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self> {
        if !amps.len().is_power_of_two() {
            return Err(Error::dims("amplitude count must be a power of two"));
        }
        Ok(Self {
            num_qubits: amps.len().trailing_zeros() as usize,
            amps,
        })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }

    /// `sum_x |psi_x|^2 f(x)` over basis indices.
    pub fn expectation_diagonal(&self, mut f: impl FnMut(usize) -> f64) -> f64 {
        self.amps.iter().enumerate().map(|(x, a)| a.norm_sqr() * f(x)).sum()
    }

    pub fn apply(&mut self, gate: &Gate, theta: f64) {
        let (c, s) = ((theta / 2.0).cos(), (theta / 2.0).sin());
        match *gate {
            Gate::Rx(q, _) => {
                // [[c, -is], [-is, c]]
                let m = Complex64::new(0.0, -s);
                self.single(q, |a0, a1| (a0 * c + a1 * m, a0 * m + a1 * c));
            }
            Gate::Ry(q, _) => {
                self.single(q, |a0, a1| (a0 * c - a1 * s, a0 * s + a1 * c));
            }
            Gate::Rz(q, _) => {
                let p0 = Complex64::new(c, -s);
                let p1 = Complex64::new(c, s);
                self.single(q, |a0, a1| (a0 * p0, a1 * p1));
            }
            Gate::Rxx(..) => {
                let m = Complex64::new(0.0, -s);
                let mask = gate.mask() as usize;
                let low = mask & mask.wrapping_neg();
                for x in 0..self.amps.len() {
                    if x & low != 0 {
                        continue;
                    }
                    let y = x ^ mask;
                    let (ax, ay) = (self.amps[x], self.amps[y]);
                    self.amps[x] = ax * c + ay * m;
                    self.amps[y] = ay * c + ax * m;
                }
            }
        }
    }

    fn single(&mut self, q: usize, f: impl Fn(Complex64, Complex64) -> (Complex64, Complex64)) {
        let stride = 1usize << q;
        let dim = self.amps.len();
        let mut base = 0;
        while base < dim {
            for i in base..base + stride {
                let (a0, a1) = f(self.amps[i], self.amps[i + stride]);
                self.amps[i] = a0;
                self.amps[i + stride] = a1;
            }
            base += 2 * stride;
        }
    }
}

/// Apply the circuit's gates to `|0...0>`.
pub fn run_circuit(circuit: &Circuit, params: &[f64]) -> Result<StateVector> {
    run_circuit_with_cap(circuit, params, DEFAULT_QUBIT_CAP)
}

pub fn run_circuit_with_cap(circuit: &Circuit, params: &[f64], cap: usize) -> Result<StateVector> {
    if params.len() != circuit.num_params() {
        return Err(Error::ParamCountMismatch {
            expected: circuit.num_params(),
            got: params.len(),
        });
    }
    let mut state = StateVector::zero_state_with_cap(circuit.num_qubits(), cap)?;
    for g in circuit.gates() {
        state.apply(g, g.angle().resolve(params));
    }
    Ok(state)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Pauli {
    X,
    Y,
    Z,
}

/// Tensor product of single-qubit Paulis; identity on unlisted qubits.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PauliString {
    ops: Vec<(usize, Pauli)>,
}

impl PauliString {
    pub fn new(mut ops: Vec<(usize, Pauli)>) -> Result<Self> {
        if ops.is_empty() {
            return Err(Error::Invalid("identity string is not allowed".into()));
        }
        ops.sort_by_key(|&(q, _)| q);
        if ops.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::Invalid("repeated qubit in Pauli string".into()));
        }
        Ok(Self { ops })
    }

    pub fn ops(&self) -> &[(usize, Pauli)] {
        &self.ops
    }

    pub fn weight(&self) -> usize {
        self.ops.len()
    }

    pub fn max_qubit(&self) -> usize {
        self.ops.last().map_or(0, |&(q, _)| q)
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (q, p) in &self.ops {
            write!(f, "{:?}{q}", p)?;
        }
        Ok(())
    }
}

/// `<psi| P |psi>`. Rejects states whose result has a non-negligible
/// imaginary part.
pub fn pauli_expectation(state: &StateVector, pauli: &PauliString) -> Result<f64> {
    if pauli.max_qubit() >= state.num_qubits() {
        return Err(Error::IndexOutOfRange {
            index: pauli.max_qubit(),
            len: state.num_qubits(),
        });
    }
    let mut flip = 0usize;
    let mut zmask = 0usize;
    let mut ycount = 0u32;
    for &(q, p) in pauli.ops() {
        match p {
            Pauli::X => flip |= 1 << q,
            Pauli::Y => {
                flip |= 1 << q;
                zmask |= 1 << q;
                ycount += 1;
            }
            Pauli::Z => zmask |= 1 << q,
        }
    }
    // P|x> = i^ycount (-1)^{popcount(x & zmask)} |x ^ flip>
    let amps = state.amplitudes();
    let mut acc = Complex64::new(0.0, 0.0);
    for (x, ax) in amps.iter().enumerate() {
        let term = amps[x ^ flip].conj() * ax;
        if (x & zmask).count_ones() % 2 == 1 {
            acc -= term;
        } else {
            acc += term;
        }
    }
    let phase = match ycount % 4 {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    };
    let value = acc * phase;
    if value.im.abs() >= IMAG_REJECT {
        return Err(Error::NonHermitianResidual(value.im));
    }
    Ok(value.re)
}

/// Draw `shots` basis indices i.i.d. from `|amplitude|^2`.
pub fn sample_bitstrings(state: &StateVector, shots: usize, seed: u64) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    sample_with(state, shots, &mut rng)
}

pub fn sample_with(state: &StateVector, shots: usize, rng: &mut impl Rng) -> Vec<usize> {
    let mut cdf = Vec::with_capacity(state.amps.len());
    let mut acc = 0.0;
    for a in &state.amps {
        acc += a.norm_sqr();
        cdf.push(acc);
    }
    let last = cdf.len() - 1;
    (0..shots)
        .map(|_| {
            let u = rng.random::<f64>() * acc;
            // first index with cdf > u, skipping zero-probability states
            cdf.partition_point(|&c| c <= u).min(last)
        })
        .collect()
}

/// Bits of a basis index, qubit 0 first.
pub fn index_to_bits(index: usize, n: usize) -> Vec<u8> {
    (0..n).map(|q| ((index >> q) & 1) as u8).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ResourceSummary {
    pub qubits: usize,
    pub depth: usize,
    pub gate_count: usize,
    pub two_qubit_gates: usize,
    pub parameters: usize,
}

/// Counts plus greedy depth: a gate opens a new layer iff it touches a qubit
/// already used in the current layer.
pub fn resource_summary(circuit: &Circuit) -> ResourceSummary {
    let mut depth = 0;
    let mut layer = 0u64;
    for g in circuit.gates() {
        let m = g.mask();
        if depth == 0 || layer & m != 0 {
            depth += 1;
            layer = 0;
        }
        layer |= m;
    }
    ResourceSummary {
        qubits: circuit.num_qubits(),
        depth,
        gate_count: circuit.gates().len(),
        two_qubit_gates: circuit.gates().iter().filter(|g| g.is_two_qubit()).count(),
        parameters: circuit.num_params(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn rx_pi_flips_with_phase() {
        let mut c = Circuit::new(1);
        c.add(Gate::Rx(0, Angle::Fixed(PI)));
        let s = run_circuit(&c, &[]).unwrap();
        assert!(s.amplitudes()[0].norm() < 1e-15);
        assert!((s.amplitudes()[1] - Complex64::new(0.0, -1.0)).norm() < 1e-15);
    }

    #[test]
    fn empty_circuit_is_zero_state() {
        let s = run_circuit(&Circuit::new(3), &[]).unwrap();
        assert_eq!(s.amplitudes()[0], Complex64::new(1.0, 0.0));
        assert!(s.amplitudes()[1..].iter().all(|a| a.norm() == 0.0));
    }

    #[test]
    fn errors_on_cap_and_param_count() {
        let c = Circuit::new(30);
        assert!(matches!(
            run_circuit(&c, &[]),
            Err(Error::QubitCapExceeded { requested: 30, .. })
        ));
        let mut c = Circuit::new(1);
        let a = c.new_param();
        c.add(Gate::Ry(0, a));
        assert!(matches!(
            run_circuit(&c, &[]),
            Err(Error::ParamCountMismatch { expected: 1, got: 0 })
        ));
    }

    #[test]
    fn invalid_gates_rejected() {
        let mut c = Circuit::new(2);
        assert!(c.push(Gate::Rx(2, Angle::Fixed(0.0))).is_err());
        assert!(c.push(Gate::Rxx(1, 1, Angle::Fixed(0.0))).is_err());
        c.push(Gate::Rz(0, Angle::Param(1))).unwrap();
        assert!(c.validate().is_err());
    }

    #[test]
    fn z_after_rx_is_cosine() {
        let z = PauliString::new(vec![(0, Pauli::Z)]).unwrap();
        for theta in [0.0, PI / 3.0, PI / 2.0, PI] {
            let mut c = Circuit::new(1);
            c.add(Gate::Rx(0, Angle::Fixed(theta)));
            let s = run_circuit(&c, &[]).unwrap();
            assert!((pauli_expectation(&s, &z).unwrap() - theta.cos()).abs() < 1e-12);
        }
    }

    #[test]
    fn rxx_zero_is_identity_and_rz_is_diagonal() {
        let mut c = Circuit::new(2);
        c.add(Gate::Ry(0, Angle::Fixed(0.7)));
        c.add(Gate::Rx(1, Angle::Fixed(1.1)));
        let before = run_circuit(&c, &[]).unwrap();
        let mut after = before.clone();
        after.apply(&Gate::Rxx(0, 1, Angle::Fixed(0.0)), 0.0);
        assert_eq!(before, after);
        after.apply(&Gate::Rz(1, Angle::Fixed(0.9)), 0.9);
        for (a, b) in before.amplitudes().iter().zip(after.amplitudes()) {
            assert!((a.norm() - b.norm()).abs() < 1e-14);
        }
    }

    #[test]
    fn y_expectation_sign() {
        // RX(-pi/2)|0> = (|0> + i|1>)/sqrt2, the +1 eigenstate of Y
        let mut c = Circuit::new(1);
        c.add(Gate::Rx(0, Angle::Fixed(-PI / 2.0)));
        let s = run_circuit(&c, &[]).unwrap();
        let y = PauliString::new(vec![(0, Pauli::Y)]).unwrap();
        assert!((pauli_expectation(&s, &y).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn pauli_string_validation() {
        assert!(PauliString::new(vec![]).is_err());
        assert!(PauliString::new(vec![(1, Pauli::X), (1, Pauli::Z)]).is_err());
        let p = PauliString::new(vec![(2, Pauli::Z), (0, Pauli::X)]).unwrap();
        assert_eq!(p.to_string(), "X0Z2");
        let s = StateVector::zero_state(2).unwrap();
        assert!(pauli_expectation(&s, &p).is_err());
    }

    #[test]
    fn basis_state_samples_are_constant() {
        let mut c = Circuit::new(2);
        c.add(Gate::Rx(0, Angle::Fixed(PI)));
        let s = run_circuit(&c, &[]).unwrap();
        let samples = sample_bitstrings(&s, 500, 9);
        assert!(samples.iter().all(|&x| x == 1));
        assert_eq!(index_to_bits(1, 2), vec![1, 0]);
    }

    #[test]
    fn uniform_samples_are_binomial_and_deterministic() {
        let mut c = Circuit::new(1);
        c.add(Gate::Ry(0, Angle::Fixed(PI / 2.0)));
        let s = run_circuit(&c, &[]).unwrap();
        let a = sample_bitstrings(&s, 4000, 1234);
        let ones = a.iter().filter(|&&x| x == 1).count() as f64;
        let sigma = (4000.0f64 * 0.25).sqrt();
        assert!((ones - 2000.0).abs() < 4.0 * sigma, "{ones}");
        assert_eq!(a, sample_bitstrings(&s, 4000, 1234));
    }

    #[test]
    fn resources_for_small_circuits() {
        let r = resource_summary(&Circuit::new(4));
        assert_eq!(
            r,
            ResourceSummary {
                qubits: 4,
                ..Default::default()
            }
        );
        let mut c = Circuit::new(2);
        let a = c.new_param();
        c.add(Gate::Rxx(0, 1, a));
        let r = resource_summary(&c);
        assert_eq!((r.depth, r.gate_count, r.two_qubit_gates, r.parameters), (1, 1, 1, 1));
    }

    #[test]
    fn circuit_text_round_trip() {
        let mut c = Circuit::new(3);
        let p = c.new_param();
        c.add(Gate::Rx(0, p));
        c.add(Gate::Rxx(1, 2, Angle::Fixed(PI / 2.0)));
        let q = c.new_param();
        c.add(Gate::Rz(2, q));
        assert_eq!(Circuit::from_text(&c.to_text()).unwrap(), c);
    }
}

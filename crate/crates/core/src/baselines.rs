//! Exact classical oracles.

use std::cmp::Ordering;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::formulation::{IlpModel, QuboModel, Sense};
use crate::problems::{mis::MisGraph, Evaluation, Instance, MdkpInstance, MspInstance, QapInstance};

/// Largest QUBO the exhaustive oracle accepts.
pub const BRUTE_FORCE_LIMIT: usize = 26;
/// Largest QAP solved by permutation enumeration.
pub const QAP_ENUM_LIMIT: usize = 10;
/// Default node budget for [`exact_mis`].
pub const DEFAULT_MIS_BUDGET: u64 = 50_000_000;

fn lex_less(a: &[u8], b: &[u8]) -> bool {
    a.cmp(b) == Ordering::Less
}

fn tie_tolerance(qubo: &QuboModel) -> f64 {
    let n = qubo.dimension();
    let mut scale = qubo.linear.iter().map(|v| v.abs()).sum::<f64>() + qubo.offset.abs();
    for i in 0..n {
        scale += qubo.quad_row(i).iter().map(|v| v.abs()).sum::<f64>();
    }
    1e-9 * scale.max(1.0)
}

/// Keep the better of two candidates: lower energy, then lexicographically
/// smaller bitstring among near-equal energies.
fn better(a: (f64, Vec<u8>), b: (f64, Vec<u8>), tol: f64) -> (f64, Vec<u8>) {
    if b.0 < a.0 - tol || ((b.0 - a.0).abs() <= tol && lex_less(&b.1, &a.1)) {
        b
    } else {
        a
    }
}

/// Global minimum over all `2^N` assignments; ties go to the
/// lexicographically smallest bitstring (`x_0` most significant).
pub fn brute_force_qubo(qubo: &QuboModel) -> Result<(Vec<u8>, f64)> {
    let n = qubo.dimension();
    if n > BRUTE_FORCE_LIMIT {
        return Err(Error::TooLarge {
            size: n,
            limit: BRUTE_FORCE_LIMIT,
        });
    }
    if n == 0 {
        return Ok((Vec::new(), qubo.offset));
    }
    let tol = tie_tolerance(qubo);
    // the top `k` variables are fixed per task; the rest follow a Gray code
    let k = n.min(8).min(n.saturating_sub(4));
    let low = n - k;
    let best = (0..1usize << k)
        .into_par_iter()
        .map(|prefix| {
            let mut x = vec![0u8; n];
            for b in 0..k {
                x[low + b] = ((prefix >> b) & 1) as u8;
            }
            let mut g: Vec<f64> = (0..n)
                .map(|i| {
                    let row = qubo.quad_row(i);
                    qubo.linear[i] + 2.0 * (0..n).filter(|&j| x[j] != 0).map(|j| row[j]).sum::<f64>()
                })
                .collect();
            let mut e = qubo.energy(&x);
            let mut best = (e, x.clone());
            for t in 1..1usize << low {
                let i = t.trailing_zeros() as usize;
                let d = 1.0 - 2.0 * x[i] as f64;
                e += d * g[i];
                x[i] ^= 1;
                for (gj, q) in g.iter_mut().zip(qubo.quad_row(i)) {
                    *gj += 2.0 * q * d;
                }
                if e < best.0 - tol || ((e - best.0).abs() <= tol && lex_less(&x, &best.1)) {
                    best = (e, x.clone());
                }
            }
            best
        })
        .reduce_with(|a, b| better(a, b, tol))
        .expect("at least one prefix");
    let value = qubo.energy(&best.1);
    Ok((best.1, value))
}

/// Exhaustive ILP optimum over the integer box; `None` if infeasible.
pub fn brute_force_ilp(ilp: &IlpModel) -> Result<Option<(Vec<i64>, f64)>> {
    ilp.validate()?;
    let mut states: u128 = 1;
    for &u in &ilp.upper_bounds {
        states = states.saturating_mul(u as u128 + 1);
    }
    let limit = 1u128 << BRUTE_FORCE_LIMIT;
    if states > limit {
        return Err(Error::TooLarge {
            size: states.min(usize::MAX as u128) as usize,
            limit: limit as usize,
        });
    }
    let n = ilp.num_vars();
    let mut x = vec![0i64; n];
    let mut best: Option<(Vec<i64>, f64)> = None;
    loop {
        if ilp.is_feasible(&x) {
            let v = ilp.objective_value(&x);
            let improves = match &best {
                None => true,
                Some((_, b)) => match ilp.sense {
                    Sense::Maximize => v > *b,
                    Sense::Minimize => v < *b,
                },
            };
            if improves {
                best = Some((x.clone(), v));
            }
        }
        // odometer with x_{n-1} fastest so the first optimum found is lexicographically smallest
        let mut k = n;
        loop {
            if k == 0 {
                return Ok(best);
            }
            k -= 1;
            if (x[k] as u64) < ilp.upper_bounds[k] {
                x[k] += 1;
                break;
            }
            x[k] = 0;
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MisSolution {
    pub set: Vec<usize>,
    pub size: usize,
    /// False when the node budget ran out before optimality was proven.
    pub optimal: bool,
    pub nodes: u64,
}

#[derive(Clone, PartialEq, Eq)]
struct Bits(Vec<u64>);

impl Bits {
    fn empty(n: usize) -> Self {
        Bits(vec![0; n.div_ceil(64)])
    }
    fn full(n: usize) -> Self {
        let mut b = Self::empty(n);
        for v in 0..n {
            b.insert(v);
        }
        b
    }
    fn insert(&mut self, v: usize) {
        self.0[v / 64] |= 1 << (v % 64);
    }
    fn remove(&mut self, v: usize) {
        self.0[v / 64] &= !(1 << (v % 64));
    }
    fn contains(&self, v: usize) -> bool {
        self.0[v / 64] >> (v % 64) & 1 == 1
    }
    fn is_empty(&self) -> bool {
        self.0.iter().all(|&w| w == 0)
    }
    fn count(&self) -> usize {
        self.0.iter().map(|w| w.count_ones() as usize).sum()
    }
    fn and_count(&self, other: &Bits) -> usize {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a & b).count_ones() as usize)
            .sum()
    }
    fn minus(&self, other: &Bits) -> Bits {
        Bits(self.0.iter().zip(&other.0).map(|(a, b)| a & !b).collect())
    }
    fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().enumerate().flat_map(|(w, &word)| {
            let mut rest = word;
            std::iter::from_fn(move || {
                if rest == 0 {
                    return None;
                }
                let b = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                Some(w * 64 + b)
            })
        })
    }
}

struct MisSearch {
    adj: Vec<Bits>,
    closed: Vec<Bits>,
    best: Vec<usize>,
    nodes: u64,
    budget: u64,
    exhausted: bool,
}

impl MisSearch {
    /// Greedy clique cover of `cand`; its size bounds any independent subset.
    fn clique_cover(&self, cand: &Bits) -> usize {
        let mut cliques: Vec<Bits> = Vec::new();
        for v in cand.iter() {
            // a vertex joins the first clique whose members are all neighbours
            match cliques.iter_mut().find(|c| c.and_count(&self.adj[v]) == c.count()) {
                Some(c) => c.insert(v),
                None => {
                    let mut c = Bits::empty(self.adj.len());
                    c.insert(v);
                    cliques.push(c);
                }
            }
        }
        cliques.len()
    }

    fn search(&mut self, mut cand: Bits, current: &mut Vec<usize>) {
        self.nodes += 1;
        if self.nodes > self.budget {
            self.exhausted = true;
            return;
        }
        let depth = current.len();
        // take vertices of degree <= 1 without branching
        loop {
            let low = cand.iter().find(|&v| cand.and_count(&self.adj[v]) <= 1);
            match low {
                Some(v) => {
                    current.push(v);
                    cand = cand.minus(&self.closed[v]);
                }
                None => break,
            }
        }
        if cand.is_empty() {
            if current.len() > self.best.len() {
                self.best = current.clone();
            }
        } else if current.len() + self.clique_cover(&cand) > self.best.len() {
            let u = cand
                .iter()
                .max_by_key(|&v| (cand.and_count(&self.adj[v]), std::cmp::Reverse(v)))
                .expect("non-empty");
            current.push(u);
            self.search(cand.minus(&self.closed[u]), current);
            current.pop();
            if !self.exhausted {
                let mut without = cand.clone();
                without.remove(u);
                self.search(without, current);
            }
        }
        current.truncate(depth);
    }
}

/// Maximum independent set by branch and bound with a greedy clique-cover
/// bound. On budget exhaustion the best set found is returned with
/// `optimal = false`.
pub fn exact_mis(g: &MisGraph, budget: u64) -> MisSolution {
    let n = g.num_vertices();
    let adj: Vec<Bits> = (0..n)
        .map(|v| {
            let mut b = Bits::empty(n);
            for &w in g.neighbors(v) {
                b.insert(w);
            }
            b
        })
        .collect();
    let closed = adj
        .iter()
        .enumerate()
        .map(|(v, a)| {
            let mut c = a.clone();
            c.insert(v);
            c
        })
        .collect();
    let mut s = MisSearch {
        adj,
        closed,
        best: Vec::new(),
        nodes: 0,
        budget,
        exhausted: false,
    };
    s.search(Bits::full(n), &mut Vec::new());
    let mut set = s.best;
    set.sort_unstable();
    debug_assert!(set.iter().all(|&v| !set.iter().any(|&w| Bits::contains(&s.adj[v], w))));
    MisSolution {
        size: set.len(),
        set,
        optimal: !s.exhausted,
        nodes: s.nodes,
    }
}

fn mdkp_exact(inst: &MdkpInstance) -> Result<Evaluation> {
    let n = inst.num_items();
    if n > BRUTE_FORCE_LIMIT {
        return Err(Error::TooLarge {
            size: n,
            limit: BRUTE_FORCE_LIMIT,
        });
    }
    let m = inst.num_dimensions();
    let mut load = vec![0.0; m];
    let mut x = vec![0u8; n];
    let mut profit = 0.0;
    let mut best = (0.0, x.clone());
    for t in 1..1usize << n {
        let i = t.trailing_zeros() as usize;
        let d = if x[i] == 0 { 1.0 } else { -1.0 };
        x[i] ^= 1;
        profit += d * inst.profits[i];
        for (l, row) in load.iter_mut().zip(&inst.weights) {
            *l += d * row[i];
        }
        let fits = load.iter().zip(&inst.capacities).all(|(l, c)| *l <= c + 1e-9);
        if fits && (profit > best.0 + 1e-9 || ((profit - best.0).abs() <= 1e-9 && x < best.1)) {
            best = (profit, x.clone());
        }
    }
    let sol: Vec<i64> = best.1.iter().map(|&b| b as i64).collect();
    Ok(Evaluation {
        objective: inst.profit(&sol),
        feasibility: inst.check_feasibility(&sol)?,
        solution: sol,
    })
}

fn msp_exact(inst: &MspInstance) -> Result<Evaluation> {
    let n = inst.num_products();
    if n > BRUTE_FORCE_LIMIT {
        return Err(Error::TooLarge {
            size: n,
            limit: BRUTE_FORCE_LIMIT,
        });
    }
    let mut x = vec![0u8; n];
    let mut res: Vec<i64> = inst.residuals(&x);
    let dev = |r: &[i64]| r.iter().map(|v| v.abs()).sum::<i64>();
    let mut best = (dev(&res), x.clone());
    for t in 1..1usize << n {
        let i = t.trailing_zeros() as usize;
        let d = if x[i] == 0 { 1 } else { -1 };
        x[i] ^= 1;
        for (r, row) in res.iter_mut().zip(&inst.a) {
            *r += d * row[i] as i64;
        }
        let v = dev(&res);
        if v < best.0 || (v == best.0 && x < best.1) {
            best = (v, x.clone());
            if v == 0 && x.iter().all(|&b| b == 0) {
                break;
            }
        }
    }
    let x = best.1;
    let mut sol: Vec<i64> = x.iter().map(|&b| b as i64).collect();
    for r in inst.residuals(&x) {
        // load + s+ - s- = b, so s+ = -r when r < 0 and s- = r when r > 0
        sol.push((-r).max(0));
        sol.push(r.max(0));
    }
    Ok(Evaluation {
        objective: best.0 as f64,
        feasibility: inst.check_feasibility(&sol)?,
        solution: sol,
    })
}

fn qap_exact(inst: &QapInstance) -> Result<Evaluation> {
    let n = inst.size();
    if n > QAP_ENUM_LIMIT {
        return Err(Error::TooLarge {
            size: n,
            limit: QAP_ENUM_LIMIT,
        });
    }
    let mut perm: Vec<usize> = (0..n).collect();
    let mut best = (inst.permutation_cost(&perm), perm.clone());
    // Heap's algorithm
    let mut c = vec![0usize; n];
    let mut i = 1;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                perm.swap(0, i);
            } else {
                perm.swap(c[i], i);
            }
            let cost = inst.permutation_cost(&perm);
            if cost < best.0 || (cost == best.0 && perm < best.1) {
                best = (cost, perm.clone());
            }
            c[i] += 1;
            i = 1;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    let mut sol = vec![0i64; n * n];
    for (f, &l) in best.1.iter().enumerate() {
        sol[f * n + l] = 1;
    }
    Ok(Evaluation {
        objective: best.0,
        feasibility: inst.check_feasibility(&sol)?,
        solution: sol,
    })
}

/// Certified optimum of an instance in problem terms.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactSolution {
    pub evaluation: Evaluation,
    pub optimal: bool,
}

pub fn exact_solve(instance: &Instance, mis_budget: u64) -> Result<ExactSolution> {
    let (evaluation, optimal) = match instance {
        Instance::Mdkp(i) => (mdkp_exact(i)?, true),
        Instance::Msp(i) => (msp_exact(i)?, true),
        Instance::Qap(i) => (qap_exact(i)?, true),
        Instance::Mis(g) => {
            let s = exact_mis(g, mis_budget);
            let mut sel = vec![0i64; g.num_vertices()];
            for &v in &s.set {
                sel[v] = 1;
            }
            let ev = Evaluation {
                objective: s.size as f64,
                feasibility: g.check_feasibility(&sel)?,
                solution: sel,
            };
            (ev, s.optimal)
        }
        Instance::Qubo(q) => {
            let (bits, value) = brute_force_qubo(&q.qubo)?;
            let ev = Evaluation {
                objective: value,
                feasibility: crate::problems::Feasibility {
                    feasible: true,
                    ..Default::default()
                },
                solution: bits.iter().map(|&b| b as i64).collect(),
            };
            (ev, true)
        }
    };
    Ok(ExactSolution { evaluation, optimal })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_variable() {
        let mut q = QuboModel::zeros(1);
        q.linear[0] = -1.0;
        assert_eq!(brute_force_qubo(&q).unwrap(), (vec![1], -1.0));
    }

    #[test]
    fn zero_qubo_prefers_all_zeros() {
        let mut q = QuboModel::zeros(6);
        q.offset = 2.5;
        assert_eq!(brute_force_qubo(&q).unwrap(), (vec![0; 6], 2.5));
    }

    #[test]
    fn tie_goes_to_lexicographically_smallest() {
        // x0 + x1 = 1 exactly: (0,1) and (1,0) tie
        let mut q = QuboModel::zeros(2);
        q.add_squared_linear(&[(0, 1.0), (1, 1.0)], -1.0, 1.0);
        assert_eq!(brute_force_qubo(&q).unwrap().0, vec![0, 1]);
    }

    #[test]
    fn too_large() {
        assert!(matches!(
            brute_force_qubo(&QuboModel::zeros(27)),
            Err(Error::TooLarge { size: 27, limit: 26 })
        ));
    }

    #[test]
    fn cycle_mis() {
        let g = MisGraph::new("c5", 5, &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 0)]).unwrap();
        let s = exact_mis(&g, DEFAULT_MIS_BUDGET);
        assert_eq!(s.size, 2);
        assert!(s.optimal);
        assert!(g.is_independent(&s.set));
    }

    #[test]
    fn tiny_mis_budget_is_flagged() {
        let g = MisGraph::random(30, 0.3, 1);
        assert!(!exact_mis(&g, 3).optimal);
    }

    #[test]
    fn ilp_box_enumeration() {
        let mut ilp = IlpModel::binary(vec![3.0, 4.0], Sense::Maximize);
        ilp.add_le(vec![1.0, 2.0], 2.0);
        assert_eq!(brute_force_ilp(&ilp).unwrap(), Some((vec![0, 1], 4.0)));
        let mut bad = IlpModel::binary(vec![1.0], Sense::Minimize);
        bad.add_eq(vec![1.0], 2.0);
        assert_eq!(brute_force_ilp(&bad).unwrap(), None);
    }

    #[test]
    fn qap_enumeration() {
        let inst = QapInstance::new(
            "t",
            vec![vec![0.0, 1.0], vec![1.0, 0.0]],
            vec![vec![0.0, 3.0], vec![3.0, 0.0]],
        )
        .unwrap();
        let e = qap_exact(&inst).unwrap();
        assert_eq!(e.objective, 6.0);
        assert!(e.feasibility.feasible);
    }

    #[test]
    fn msp_slacks_close_rows() {
        let inst = MspInstance::new("t", vec![vec![3, 5], vec![2, 2]], vec![4, 3]).unwrap();
        let e = msp_exact(&inst).unwrap();
        assert!(e.feasibility.feasible, "{e:?}");
        assert_eq!(e.objective, 2.0);
    }
}

//! Maximum independent set: graphs, simplicial preprocessing and QUBO form.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{line_tokens, Feasibility};
use crate::error::{Error, Result};
use crate::formulation::{IlpModel, QuboModel, Sense};

/// Edge penalty used by [`mis_to_qubo`] unless overridden.
pub const DEFAULT_EDGE_PENALTY: f64 = 2.0;

/// Undirected simple graph with 0-based vertices. Text files use 1-based ids.
#[derive(Debug, Clone, PartialEq)]
pub struct MisGraph {
    pub name: String,
    adj: Vec<BTreeSet<usize>>,
    pub known_mis: Option<usize>,
}

impl MisGraph {
    /// Duplicate edges are merged; self-loops are rejected.
    pub fn new(name: impl Into<String>, n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut adj = vec![BTreeSet::new(); n];
        for &(u, v) in edges {
            for w in [u, v] {
                if w >= n {
                    return Err(Error::IndexOutOfRange { index: w, len: n });
                }
            }
            if u == v {
                return Err(Error::Invalid(format!("self-loop on vertex {u}")));
            }
            adj[u].insert(v);
            adj[v].insert(u);
        }
        Ok(Self {
            name: name.into(),
            adj,
            known_mis: None,
        })
    }

    pub fn num_vertices(&self) -> usize {
        self.adj.len()
    }

    pub fn num_edges(&self) -> usize {
        self.adj.iter().map(BTreeSet::len).sum::<usize>() / 2
    }

    pub fn neighbors(&self, v: usize) -> &BTreeSet<usize> {
        &self.adj[v]
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.adj[u].contains(&v)
    }

    /// Edges as `(u, v)` with `u < v`, ascending.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(self.num_edges());
        for (u, nb) in self.adj.iter().enumerate() {
            out.extend(nb.range(u + 1..).map(|&v| (u, v)));
        }
        out
    }

    pub fn is_independent(&self, set: &[usize]) -> bool {
        self.first_conflict(set).is_none()
    }

    fn first_conflict(&self, set: &[usize]) -> Option<(usize, usize)> {
        for (a, &u) in set.iter().enumerate() {
            for &v in &set[a + 1..] {
                if self.has_edge(u, v) {
                    return Some((u.min(v), u.max(v)));
                }
            }
        }
        None
    }

    /// Adjacent selected pairs for a 0/1 selection vector.
    pub fn check_feasibility(&self, x: &[i64]) -> Result<Feasibility> {
        if x.len() != self.num_vertices() {
            return Err(Error::dims(format!(
                "selection of length {} for {} vertices",
                x.len(),
                self.num_vertices()
            )));
        }
        let conflicts = self
            .edges()
            .into_iter()
            .filter(|&(u, v)| x[u] != 0 && x[v] != 0)
            .map(|_| 1.0);
        let bounds = x.iter().map(|&v| if (0..=1).contains(&v) { 0.0 } else { 1.0 });
        Ok(Feasibility::from_residuals(conflicts.chain(bounds)))
    }

    pub fn induced(&self, vertices: &[usize]) -> MisGraph {
        let mut index = vec![usize::MAX; self.num_vertices()];
        for (k, &v) in vertices.iter().enumerate() {
            index[v] = k;
        }
        let adj = vertices
            .iter()
            .map(|&v| {
                self.adj[v]
                    .iter()
                    .filter(|&&w| index[w] != usize::MAX)
                    .map(|&w| index[w])
                    .collect()
            })
            .collect();
        MisGraph {
            name: self.name.clone(),
            adj,
            known_mis: None,
        }
    }

    /// Parse an edge list (`u v` per line, 1-based, optional `p <n>` header).
    /// DIMACS `p edge n m` / `e u v` / `c ...` lines are accepted as well.
    pub fn parse(text: &str, name: &str) -> Result<Self> {
        let perr = |line: usize, column: usize, message: String| Error::Parse {
            path: name.to_string(),
            line,
            column,
            message,
        };
        let mut declared = None;
        let mut edges = Vec::new();
        for (ln, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("");
            let mut toks = line_tokens(line);
            match toks.first().map(|t| t.0) {
                None | Some("c") => continue,
                Some("p") => {
                    let count = toks.iter().skip(1).find(|t| t.0.parse::<usize>().is_ok());
                    let n = count
                        .and_then(|t| t.0.parse().ok())
                        .ok_or_else(|| perr(ln + 1, 1, "header needs a vertex count".into()))?;
                    declared = Some(n);
                    continue;
                }
                Some("e") => {
                    toks.remove(0);
                }
                _ => {}
            }
            if toks.len() != 2 {
                let col = toks.get(2).or(toks.first()).map_or(1, |t| t.1);
                return Err(perr(ln + 1, col, "expected `u v`".into()));
            }
            let mut ends = [0usize; 2];
            for (k, &(tok, col)) in toks.iter().enumerate() {
                let v: usize = tok
                    .parse()
                    .map_err(|_| perr(ln + 1, col, format!("bad vertex id `{tok}`")))?;
                if v == 0 {
                    return Err(perr(ln + 1, col, "vertex ids are 1-based".into()));
                }
                if let Some(n) = declared.filter(|&n| v > n) {
                    return Err(perr(ln + 1, col, format!("vertex {v} exceeds declared count {n}")));
                }
                ends[k] = v - 1;
            }
            if ends[0] == ends[1] {
                return Err(perr(ln + 1, toks[0].1, format!("self-loop on vertex {}", ends[0] + 1)));
            }
            edges.push((ends[0], ends[1]));
        }
        let max_id = edges.iter().map(|&(u, v)| u.max(v) + 1).max().unwrap_or(0);
        let n = match declared {
            Some(n) if n < max_id => {
                return Err(perr(
                    1,
                    1,
                    format!("header declares {n} vertices but vertex {max_id} is used"),
                ))
            }
            Some(n) => n,
            None => max_id,
        };
        let g = Self::new(name, n, &edges)?;
        if g.num_edges() < edges.len() {
            log::warn!("{name}: merged {} duplicate edges", edges.len() - g.num_edges());
        }
        Ok(g)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("p {}\n", self.num_vertices());
        for (u, v) in self.edges() {
            let _ = writeln!(out, "{} {}", u + 1, v + 1);
        }
        out
    }

    /// Erdős–Rényi graph `G(n, p)`.
    pub fn random(n: usize, p: f64, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut edges = Vec::new();
        for u in 0..n {
            for v in u + 1..n {
                if rng.random::<f64>() < p {
                    edges.push((u, v));
                }
            }
        }
        Self::new(format!("gnp-{n}-s{seed}"), n, &edges).expect("generated edges are valid")
    }

    /// Conflict graph of a single-error-correcting code family over binary
    /// words of length `bits`: two words are adjacent when their error balls
    /// intersect.
    pub fn code_graph(code: CodeFamily, bits: u32) -> Result<Self> {
        if !(2..=12).contains(&bits) {
            return Err(Error::Invalid(format!("word length {bits} outside 2..=12")));
        }
        let n = 1usize << bits;
        let balls: Vec<BTreeSet<usize>> = (0..n).map(|w| code.ball(w, bits)).collect();
        let mut edges = Vec::new();
        for u in 0..n {
            for v in u + 1..n {
                if !balls[u].is_disjoint(&balls[v]) {
                    edges.push((u, v));
                }
            }
        }
        Self::new(format!("{}.{n}", code.tag()), n, &edges)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CodeFamily {
    /// Single adjacent transposition.
    Transposition,
    /// Adjacent transposition including the end-around swap.
    EndAroundTransposition,
    /// Single deletion.
    Deletion,
}

impl CodeFamily {
    pub fn tag(self) -> &'static str {
        match self {
            CodeFamily::Transposition => "1tc",
            CodeFamily::EndAroundTransposition => "1et",
            CodeFamily::Deletion => "1dc",
        }
    }

    pub fn from_tag(tag: &str) -> Result<Self> {
        match tag {
            "1tc" => Ok(CodeFamily::Transposition),
            "1et" => Ok(CodeFamily::EndAroundTransposition),
            "1dc" => Ok(CodeFamily::Deletion),
            other => Err(Error::Invalid(format!("unknown code family `{other}`"))),
        }
    }

    fn ball(self, w: usize, bits: u32) -> BTreeSet<usize> {
        let bit = |i: u32| (w >> i) & 1;
        let swap = |i: u32, j: u32| {
            if bit(i) == bit(j) {
                w
            } else {
                w ^ (1 << i) ^ (1 << j)
            }
        };
        let mut ball = BTreeSet::new();
        match self {
            CodeFamily::Transposition | CodeFamily::EndAroundTransposition => {
                ball.insert(w);
                for i in 0..bits - 1 {
                    ball.insert(swap(i, i + 1));
                }
                if self == CodeFamily::EndAroundTransposition && bits > 2 {
                    ball.insert(swap(bits - 1, 0));
                }
            }
            CodeFamily::Deletion => {
                for i in 0..bits {
                    let low = w & ((1 << i) - 1);
                    let high = w >> (i + 1);
                    ball.insert((high << i) | low);
                }
            }
        }
        ball
    }
}

/// Maximise `sum x_i` subject to `x_u + x_v <= 1` per edge.
pub fn mis_to_ilp(g: &MisGraph) -> IlpModel {
    let n = g.num_vertices();
    let mut ilp = IlpModel::binary(vec![1.0; n], Sense::Maximize);
    for (u, v) in g.edges() {
        let mut row = vec![0.0; n];
        row[u] = 1.0;
        row[v] = 1.0;
        ilp.add_le(row, 1.0);
    }
    ilp
}

/// Slack-free QUBO `-sum x_i + penalty * sum_{(u,v) in E} x_u x_v`. Any
/// `penalty > 1` makes every minimiser an independent set.
pub fn mis_to_qubo(g: &MisGraph, penalty: f64) -> Result<QuboModel> {
    if !penalty.is_finite() || penalty <= 0.0 {
        return Err(Error::Invalid(format!("edge penalty {penalty} must be positive")));
    }
    let mut q = QuboModel::zeros(g.num_vertices());
    for v in 0..g.num_vertices() {
        q.add_linear(v, -1.0);
    }
    for (u, v) in g.edges() {
        q.add_quadratic(u, v, penalty);
    }
    Ok(q)
}

fn is_clique(g: &MisGraph, alive: &[bool], v: usize) -> bool {
    let nb: Vec<usize> = g.adj[v].iter().copied().filter(|&w| alive[w]).collect();
    nb.iter()
        .enumerate()
        .all(|(a, &u)| nb[a + 1..].iter().all(|&w| g.has_edge(u, w)))
}

/// Vertices whose neighbourhood is a clique (isolated vertices included).
pub fn find_simplicial(g: &MisGraph) -> Vec<usize> {
    let alive = vec![true; g.num_vertices()];
    (0..g.num_vertices()).filter(|&v| is_clique(g, &alive, v)).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sweep {
    /// Vertices added to the independent set in this sweep.
    pub added: Vec<usize>,
    /// Neighbours deleted alongside them.
    pub removed: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MisReduction {
    pub reduced: MisGraph,
    /// Original id of each reduced-graph vertex.
    pub vertex_ids: Vec<usize>,
    pub fixed: Vec<usize>,
    pub sweeps: Vec<Sweep>,
}

/// Repeatedly fix simplicial vertices and delete their neighbourhoods until
/// none remain. Within a sweep vertices are taken in ascending id and any
/// vertex already deleted during the sweep is skipped.
pub fn preprocess_mis(g: &MisGraph) -> MisReduction {
    let n = g.num_vertices();
    let mut alive = vec![true; n];
    let mut fixed = Vec::new();
    let mut sweeps = Vec::new();
    loop {
        let simplicial: Vec<usize> = (0..n).filter(|&v| alive[v] && is_clique(g, &alive, v)).collect();
        if simplicial.is_empty() {
            break;
        }
        let mut sweep = Sweep {
            added: Vec::new(),
            removed: Vec::new(),
        };
        for v in simplicial {
            if !alive[v] {
                continue;
            }
            alive[v] = false;
            sweep.added.push(v);
            for &w in &g.adj[v] {
                if alive[w] {
                    alive[w] = false;
                    sweep.removed.push(w);
                }
            }
        }
        sweep.removed.sort_unstable();
        fixed.extend_from_slice(&sweep.added);
        sweeps.push(sweep);
    }
    fixed.sort_unstable();
    let vertex_ids: Vec<usize> = (0..n).filter(|&v| alive[v]).collect();
    let mut reduced = g.induced(&vertex_ids);
    reduced.name = format!("{}-reduced", g.name);
    MisReduction {
        reduced,
        vertex_ids,
        fixed,
        sweeps,
    }
}

/// Union of the fixed vertices and a reduced-graph solution (both in
/// original ids), checked for independence in `g`.
pub fn reconstruct_mis(g: &MisGraph, fixed: &[usize], reduced_solution: &[usize]) -> Result<Vec<usize>> {
    let mut set: Vec<usize> = fixed.iter().chain(reduced_solution).copied().collect();
    set.sort_unstable();
    set.dedup();
    if let Some(&v) = set.iter().find(|&&v| v >= g.num_vertices()) {
        return Err(Error::IndexOutOfRange {
            index: v,
            len: g.num_vertices(),
        });
    }
    match g.first_conflict(&set) {
        Some((u, v)) => Err(Error::IndependenceViolation(u, v)),
        None => Ok(set),
    }
}

/// Bookkeeping for solving an MIS instance through a (possibly reduced) QUBO.
#[derive(Debug, Clone)]
pub(crate) struct MisLowering {
    graph: MisGraph,
    reduction: Option<MisReduction>,
}

impl MisLowering {
    pub(crate) fn new(g: &MisGraph, preprocess: bool) -> Self {
        Self {
            graph: g.clone(),
            reduction: preprocess.then(|| preprocess_mis(g)),
        }
    }

    pub(crate) fn solve_graph(&self) -> &MisGraph {
        self.reduction.as_ref().map_or(&self.graph, |r| &r.reduced)
    }

    /// Original vertex ids selected by a QUBO bitstring.
    pub(crate) fn lift(&self, bits: &[u8]) -> Vec<usize> {
        let chosen = bits.iter().enumerate().filter(|(_, &b)| b != 0).map(|(i, _)| i);
        match &self.reduction {
            None => chosen.collect(),
            Some(r) => {
                let mut set: Vec<usize> = chosen.map(|i| r.vertex_ids[i]).chain(r.fixed.iter().copied()).collect();
                set.sort_unstable();
                set
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seven_vertex() -> MisGraph {
        let e = [(1, 2), (1, 3), (2, 3), (2, 4), (3, 5), (4, 6), (5, 6), (6, 7)];
        let edges: Vec<_> = e.iter().map(|&(u, v)| (u - 1, v - 1)).collect();
        MisGraph::new("seven_vertex", 7, &edges).unwrap()
    }

    #[test]
    fn simplicial_examples() {
        assert_eq!(find_simplicial(&seven_vertex()), vec![0, 6]);
        let k3 = MisGraph::new("k3", 3, &[(0, 1), (1, 2), (0, 2)]).unwrap();
        assert_eq!(find_simplicial(&k3), vec![0, 1, 2]);
        let path = MisGraph::new("p3", 3, &[(0, 1), (1, 2)]).unwrap();
        assert_eq!(find_simplicial(&path), vec![0, 2]);
    }

    #[test]
    fn preprocess_seven_vertex_graph() {
        let r = preprocess_mis(&seven_vertex());
        assert!(r.sweeps[0].added.contains(&0));
        assert!(r.sweeps[0].removed.contains(&1) && r.sweeps[0].removed.contains(&2));
        assert_eq!(r.reduced.num_vertices(), 0);
        assert_eq!(r.fixed, vec![0, 3, 4, 6]);
    }

    #[test]
    fn adjacent_simplicials_are_not_both_fixed() {
        let k3 = MisGraph::new("k3", 3, &[(0, 1), (1, 2), (0, 2)]).unwrap();
        let r = preprocess_mis(&k3);
        assert_eq!(r.fixed, vec![0]);
    }

    #[test]
    fn edgeless_graph() {
        let g = MisGraph::new("e", 5, &[]).unwrap();
        let r = preprocess_mis(&g);
        assert_eq!(r.fixed, vec![0, 1, 2, 3, 4]);
        assert_eq!(r.reduced.num_vertices(), 0);
    }

    #[test]
    fn reconstruct_checks_independence() {
        let g = seven_vertex();
        assert_eq!(reconstruct_mis(&g, &[0, 6], &[3, 4]).unwrap(), vec![0, 3, 4, 6]);
        assert_eq!(reconstruct_mis(&g, &[], &[3, 4]).unwrap(), vec![3, 4]);
        assert_eq!(reconstruct_mis(&g, &[0, 6], &[]).unwrap(), vec![0, 6]);
        assert!(matches!(
            reconstruct_mis(&g, &[0], &[1]),
            Err(Error::IndependenceViolation(0, 1))
        ));
    }

    #[test]
    fn parse_formats() {
        let g = MisGraph::parse("p 4\n1 2\n2 3\n2 1\n", "g").unwrap();
        assert_eq!((g.num_vertices(), g.num_edges()), (4, 2));
        let d = MisGraph::parse("c demo\np edge 3 2\ne 1 2\ne 2 3\n", "d").unwrap();
        assert_eq!(d.edges(), vec![(0, 1), (1, 2)]);
        let err = MisGraph::parse("1 2\n3 x\n", "bad").unwrap_err();
        assert!(err.to_string().starts_with("bad:2:3"), "{err}");
        assert_eq!(MisGraph::parse(&g.to_text(), "g").unwrap(), g);
    }

    #[test]
    fn code_graph_sizes() {
        let g = MisGraph::code_graph(CodeFamily::Transposition, 3).unwrap();
        assert_eq!((g.num_vertices(), g.num_edges()), (8, 6));
        let counts: Vec<usize> = [
            CodeFamily::Transposition,
            CodeFamily::EndAroundTransposition,
            CodeFamily::Deletion,
        ]
        .iter()
        .map(|&c| MisGraph::code_graph(c, 6).unwrap().num_edges())
        .collect();
        assert_eq!(counts, vec![192, 264, 543]);
    }

    #[test]
    fn qubo_minimum_is_independent() {
        let g = seven_vertex();
        let q = mis_to_qubo(&g, DEFAULT_EDGE_PENALTY).unwrap();
        let mut best = (f64::INFINITY, 0usize);
        for mask in 0..1usize << 7 {
            let x: Vec<u8> = (0..7).map(|i| ((mask >> i) & 1) as u8).collect();
            let e = q.energy(&x);
            if e < best.0 {
                best = (e, mask);
            }
        }
        assert_eq!(best.0, -4.0);
        let set: Vec<usize> = (0..7).filter(|i| (best.1 >> i) & 1 == 1).collect();
        assert!(g.is_independent(&set));
    }
}

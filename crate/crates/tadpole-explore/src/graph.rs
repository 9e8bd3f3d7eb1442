//! Exact-weight undirected graphs, tadpole/cycle constructors, tadpole
//! decomposition, and the on-disk edge-list format.
//!
//! A *tadpole* is a cycle with a path (the *stem*) attached at one vertex:
//! exactly one vertex of degree 1 (the stem end), one of degree 3 (the
//! junction), and degree 2 everywhere else. Edge weights are strictly
//! positive rationals and all arithmetic on them is exact.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

/// Total cost of a walk: an exact rational sum of edge weights.
pub type Cost = BigRational;

/// Vertex identifier, unique within a graph. Any non-negative integer is
/// allowed; constructors assign dense ids but parsed graphs may use sparse
/// ones.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VertexId(pub u32);

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// A strictly positive exact rational edge weight.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Weight(BigRational);

impl Weight {
    /// Builds a weight from a reduced or unreduced fraction.
    pub fn new(numer: i64, denom: i64) -> Result<Weight, GraphError> {
        if denom == 0 {
            return Err(GraphError::NonPositiveWeight);
        }
        Weight::from_ratio(BigRational::new(BigInt::from(numer), BigInt::from(denom)))
    }

    pub fn from_ratio(value: BigRational) -> Result<Weight, GraphError> {
        if value.is_positive() {
            Ok(Weight(value))
        } else {
            Err(GraphError::NonPositiveWeight)
        }
    }

    /// Unit weight, the common case for lower-bound constructions.
    pub fn one() -> Weight {
        Weight(BigRational::one())
    }

    pub fn as_ratio(&self) -> &BigRational {
        &self.0
    }

    pub fn to_cost(&self) -> Cost {
        self.0.clone()
    }
}

impl fmt::Display for Weight {
    /// Always renders as `p/q`, even for integers, to match the file format.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.0.numer(), self.0.denom())
    }
}

/// Renders an arbitrary cost as `p/q`.
pub fn cost_to_string(c: &Cost) -> String {
    format!("{}/{}", c.numer(), c.denom())
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GraphError {
    #[error("edge weights must be strictly positive")]
    NonPositiveWeight,
    #[error("self-loops are not allowed (vertex {0})")]
    SelfLoop(VertexId),
    #[error("duplicate edge ({0}, {1})")]
    DuplicateEdge(VertexId, VertexId),
    #[error("graph is not connected")]
    Disconnected,
    #[error("graph must contain at least one edge")]
    Empty,
    #[error("cycle part needs at least 3 vertices, got {0}")]
    CycleTooSmall(usize),
    #[error("stem needs at least 1 vertex, got {0}")]
    StemTooSmall(usize),
    #[error("expected {expected} weights, got {got}")]
    WrongWeightCount { expected: usize, got: usize },
    #[error("graph is not a tadpole: {0}")]
    NotATadpole(String),
    #[error("line {line}: malformed record: {reason}")]
    MalformedLine { line: usize, reason: String },
    #[error("line {line}: duplicate edge")]
    DuplicateEdgeLine { line: usize },
    #[error("line {line}: non-positive weight")]
    NonPositiveWeightLine { line: usize },
    #[error("line {line}: self-loop")]
    SelfLoopLine { line: usize },
    #[error("missing `v <n>` header")]
    MissingHeader,
    #[error("header declares {declared} vertices but edges span {actual}")]
    VertexCountMismatch { declared: usize, actual: usize },
}

/// Connected undirected graph with exact positive rational edge weights,
/// no self-loops and no parallel edges. Immutable after construction, so
/// it can be shared freely across threads.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    /// Adjacency lists sorted by neighbor id.
    adj: BTreeMap<VertexId, Vec<(VertexId, Weight)>>,
    edge_count: usize,
}

impl Graph {
    /// Builds a graph from an edge list, validating all structural
    /// invariants. Vertex ids may be arbitrary.
    pub fn from_edges<I>(edges: I) -> Result<Graph, GraphError>
    where
        I: IntoIterator<Item = (VertexId, VertexId, Weight)>,
    {
        let mut adj: BTreeMap<VertexId, Vec<(VertexId, Weight)>> = BTreeMap::new();
        let mut seen: BTreeSet<(VertexId, VertexId)> = BTreeSet::new();
        let mut edge_count = 0;
        for (u, v, w) in edges {
            if u == v {
                return Err(GraphError::SelfLoop(u));
            }
            let key = if u < v { (u, v) } else { (v, u) };
            if !seen.insert(key) {
                return Err(GraphError::DuplicateEdge(key.0, key.1));
            }
            adj.entry(u).or_default().push((v, w.clone()));
            adj.entry(v).or_default().push((u, w));
            edge_count += 1;
        }
        if edge_count == 0 {
            return Err(GraphError::Empty);
        }
        for list in adj.values_mut() {
            list.sort_by_key(|(v, _)| *v);
        }
        let g = Graph { adj, edge_count };
        if !g.is_connected() {
            return Err(GraphError::Disconnected);
        }
        Ok(g)
    }

    pub fn vertex_count(&self) -> usize {
        self.adj.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn contains(&self, v: VertexId) -> bool {
        self.adj.contains_key(&v)
    }

    pub fn vertices(&self) -> impl Iterator<Item = VertexId> + '_ {
        self.adj.keys().copied()
    }

    /// Neighbors of `v` with edge weights, sorted by neighbor id.
    pub fn neighbors(&self, v: VertexId) -> &[(VertexId, Weight)] {
        self.adj.get(&v).map(|l| l.as_slice()).unwrap_or(&[])
    }

    pub fn degree(&self, v: VertexId) -> usize {
        self.neighbors(v).len()
    }

    pub fn edge_weight(&self, u: VertexId, v: VertexId) -> Option<&Weight> {
        self.neighbors(u)
            .iter()
            .find(|(x, _)| *x == v)
            .map(|(_, w)| w)
    }

    /// Edges in canonical form: `u < v`, sorted.
    pub fn edges(&self) -> Vec<(VertexId, VertexId, Weight)> {
        let mut out = Vec::with_capacity(self.edge_count);
        for (&u, list) in &self.adj {
            for (v, w) in list {
                if u < *v {
                    out.push((u, *v, w.clone()));
                }
            }
        }
        out
    }

    pub fn total_weight(&self) -> Cost {
        self.edges()
            .iter()
            .fold(Cost::zero(), |acc, (_, _, w)| acc + w.as_ratio())
    }

    fn is_connected(&self) -> bool {
        let start = match self.adj.keys().next() {
            Some(&v) => v,
            None => return false,
        };
        let mut seen = BTreeSet::new();
        let mut stack = vec![start];
        seen.insert(start);
        while let Some(v) = stack.pop() {
            for (u, _) in self.neighbors(v) {
                if seen.insert(*u) {
                    stack.push(*u);
                }
            }
        }
        seen.len() == self.adj.len()
    }

    /// True iff every vertex has degree 2: a simple cycle, given
    /// connectivity.
    pub fn is_cycle(&self) -> bool {
        self.adj.values().all(|l| l.len() == 2)
    }
}

/// The structural split of a tadpole: the cycle walked edge-by-edge from
/// the junction, and the stem walked from the junction out to its end.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TadpoleDecomposition {
    /// Cycle edges in cycle order, starting and ending at the junction.
    /// `cycle_edges[k] = (a, b, w)` with consecutive edges sharing a vertex.
    pub cycle_edges: Vec<(VertexId, VertexId, Weight)>,
    /// Stem edges ordered from the junction out to the stem end.
    pub stem_edges: Vec<(VertexId, VertexId, Weight)>,
    /// The unique degree-3 vertex.
    pub junction: VertexId,
    /// The unique degree-1 vertex.
    pub stem_end: VertexId,
    /// Number of cycle vertices.
    pub cycle_len: usize,
    /// Number of stem vertices (excluding the junction).
    pub stem_len: usize,
}

impl TadpoleDecomposition {
    pub fn cycle_weight(&self) -> Cost {
        self.cycle_edges
            .iter()
            .fold(Cost::zero(), |acc, (_, _, w)| acc + w.as_ratio())
    }

    pub fn stem_weight(&self) -> Cost {
        self.stem_edges
            .iter()
            .fold(Cost::zero(), |acc, (_, _, w)| acc + w.as_ratio())
    }

    /// A maximum-weight cycle edge; ties broken by the lexicographically
    /// smallest canonical endpoint pair, for determinism.
    pub fn max_cycle_edge(&self) -> (VertexId, VertexId, Weight) {
        let mut best: Option<(VertexId, VertexId, &Weight)> = None;
        for (a, b, w) in &self.cycle_edges {
            let (lo, hi) = if a < b { (*a, *b) } else { (*b, *a) };
            best = match best {
                None => Some((lo, hi, w)),
                Some((bl, bh, bw)) => {
                    if w.as_ratio() > bw.as_ratio()
                        || (w.as_ratio() == bw.as_ratio() && (lo, hi) < (bl, bh))
                    {
                        Some((lo, hi, w))
                    } else {
                        Some((bl, bh, bw))
                    }
                }
            };
        }
        let (a, b, w) = best.expect("tadpole cycle is nonempty");
        (a, b, w.clone())
    }

    /// True if `(u, v)` (in either order) lies on the stem.
    pub fn is_stem_edge(&self, u: VertexId, v: VertexId) -> bool {
        self.stem_edges
            .iter()
            .any(|(a, b, _)| (*a == u && *b == v) || (*a == v && *b == u))
    }

    /// Vertices of the stem, junction excluded.
    pub fn stem_vertices(&self) -> BTreeSet<VertexId> {
        let mut out = BTreeSet::new();
        for (a, b, _) in &self.stem_edges {
            if *a != self.junction {
                out.insert(*a);
            }
            if *b != self.junction {
                out.insert(*b);
            }
        }
        out
    }
}

/// Builds the tadpole `T(cycle_len, stem_len)` with dense ids: the cycle is
/// `0..cycle_len` in order with the junction at 0, the stem continues
/// `0, cycle_len, cycle_len+1, ...`. `weights` lists cycle edges in cycle
/// order starting at the junction, then stem edges from the junction
/// outward.
pub fn make_tadpole(
    cycle_len: usize,
    stem_len: usize,
    weights: Vec<Weight>,
) -> Result<Graph, GraphError> {
    if cycle_len < 3 {
        return Err(GraphError::CycleTooSmall(cycle_len));
    }
    if stem_len < 1 {
        return Err(GraphError::StemTooSmall(stem_len));
    }
    let m = cycle_len + stem_len;
    if weights.len() != m {
        return Err(GraphError::WrongWeightCount {
            expected: m,
            got: weights.len(),
        });
    }
    let mut edges = Vec::with_capacity(m);
    let mut it = weights.into_iter();
    for k in 0..cycle_len {
        let u = VertexId(k as u32);
        let v = VertexId(((k + 1) % cycle_len) as u32);
        edges.push((u, v, it.next().unwrap()));
    }
    let mut prev = VertexId(0);
    for k in 0..stem_len {
        let v = VertexId((cycle_len + k) as u32);
        edges.push((prev, v, it.next().unwrap()));
        prev = v;
    }
    Graph::from_edges(edges)
}

/// Builds a simple cycle on ids `0..n` in id order.
pub fn make_cycle(n: usize, weights: Vec<Weight>) -> Result<Graph, GraphError> {
    if n < 3 {
        return Err(GraphError::CycleTooSmall(n));
    }
    if weights.len() != n {
        return Err(GraphError::WrongWeightCount {
            expected: n,
            got: weights.len(),
        });
    }
    let edges = weights
        .into_iter()
        .enumerate()
        .map(|(k, w)| (VertexId(k as u32), VertexId(((k + 1) % n) as u32), w))
        .collect::<Vec<_>>();
    Graph::from_edges(edges)
}

/// Splits a connected graph into cycle and stem if it is a tadpole.
///
/// The degree test (exactly one vertex of degree 1, one of degree 3, the
/// rest of degree 2) is both necessary and sufficient given connectivity.
/// The cycle is reported starting from the junction toward its
/// smaller-id cycle neighbor, which makes `make_tadpole` round-trip:
/// decomposing a constructed tadpole recovers the weights in input order.
pub fn decompose_tadpole(g: &Graph) -> Result<TadpoleDecomposition, GraphError> {
    let mut deg1 = Vec::new();
    let mut deg3 = Vec::new();
    for v in g.vertices() {
        match g.degree(v) {
            1 => deg1.push(v),
            2 => {}
            3 => deg3.push(v),
            d => {
                return Err(GraphError::NotATadpole(format!(
                    "vertex {v} has degree {d}"
                )))
            }
        }
    }
    if deg1.len() != 1 || deg3.len() != 1 {
        return Err(GraphError::NotATadpole(format!(
            "degree sequence has {} leaves and {} branch vertices",
            deg1.len(),
            deg3.len()
        )));
    }
    let stem_end = deg1[0];
    let junction = deg3[0];

    // Stem: walk from the leaf back to the junction, then reverse.
    let mut stem_rev = Vec::new();
    let mut prev = stem_end;
    let mut cur = stem_end;
    loop {
        let next = g
            .neighbors(cur)
            .iter()
            .map(|(v, _)| *v)
            .find(|v| *v != prev)
            .unwrap_or_else(|| g.neighbors(cur)[0].0);
        let w = g.edge_weight(cur, next).unwrap().clone();
        stem_rev.push((next, cur, w));
        if next == junction {
            break;
        }
        prev = cur;
        cur = next;
    }
    stem_rev.reverse();
    let stem_vertices: BTreeSet<VertexId> = stem_rev.iter().map(|(_, b, _)| *b).collect();

    // Cycle: from the junction toward its smaller-id cycle neighbor.
    let cycle_nbrs: Vec<VertexId> = g
        .neighbors(junction)
        .iter()
        .map(|(v, _)| *v)
        .filter(|v| !stem_vertices.contains(v))
        .collect();
    if cycle_nbrs.len() != 2 {
        return Err(GraphError::NotATadpole(
            "junction does not close a cycle".into(),
        ));
    }
    let mut cycle_edges = Vec::new();
    let mut prev = junction;
    let mut cur = cycle_nbrs[0]; // neighbors() is id-sorted
    cycle_edges.push((junction, cur, g.edge_weight(junction, cur).unwrap().clone()));
    while cur != junction {
        let next = g
            .neighbors(cur)
            .iter()
            .map(|(v, _)| *v)
            .find(|v| *v != prev)
            .ok_or_else(|| GraphError::NotATadpole("cycle walk dead-ends".into()))?;
        cycle_edges.push((cur, next, g.edge_weight(cur, next).unwrap().clone()));
        prev = cur;
        cur = next;
    }
    let cycle_len = cycle_edges.len();
    let stem_len = stem_rev.len();
    if cycle_len + stem_len != g.edge_count() {
        return Err(GraphError::NotATadpole(
            "cycle and stem do not cover the graph".into(),
        ));
    }
    Ok(TadpoleDecomposition {
        cycle_edges,
        stem_edges: stem_rev,
        junction,
        stem_end,
        cycle_len,
        stem_len,
    })
}

/// Parses the edge-list format: a `v <n>` header, then one `e <u> <v> <p>/<q>`
/// record per edge. `#` starts a comment; blank lines are ignored.
pub fn parse_graph(text: &str) -> Result<Graph, GraphError> {
    let mut declared: Option<usize> = None;
    let mut edges: Vec<(VertexId, VertexId, Weight)> = Vec::new();
    let mut seen: BTreeSet<(VertexId, VertexId)> = BTreeSet::new();
    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut parts = line.split_whitespace();
        match parts.next() {
            Some("v") => {
                let n = parts
                    .next()
                    .and_then(|s| s.parse::<usize>().ok())
                    .ok_or_else(|| GraphError::MalformedLine {
                        line: lineno,
                        reason: "expected `v <n>`".into(),
                    })?;
                if parts.next().is_some() {
                    return Err(GraphError::MalformedLine {
                        line: lineno,
                        reason: "trailing tokens after header".into(),
                    });
                }
                declared = Some(n);
            }
            Some("e") => {
                let toks: Vec<&str> = parts.collect();
                if toks.len() != 3 {
                    return Err(GraphError::MalformedLine {
                        line: lineno,
                        reason: "expected `e <u> <v> <p>/<q>`".into(),
                    });
                }
                let u: u32 = toks[0].parse().map_err(|_| GraphError::MalformedLine {
                    line: lineno,
                    reason: format!("bad vertex id `{}`", toks[0]),
                })?;
                let v: u32 = toks[1].parse().map_err(|_| GraphError::MalformedLine {
                    line: lineno,
                    reason: format!("bad vertex id `{}`", toks[1]),
                })?;
                let (p, q) = toks[2].split_once('/').ok_or(GraphError::MalformedLine {
                    line: lineno,
                    reason: format!("weight `{}` is not of the form p/q", toks[2]),
                })?;
                let p: i64 = p.parse().map_err(|_| GraphError::MalformedLine {
                    line: lineno,
                    reason: format!("bad numerator `{p}`"),
                })?;
                let q: i64 = q.parse().map_err(|_| GraphError::MalformedLine {
                    line: lineno,
                    reason: format!("bad denominator `{q}`"),
                })?;
                if q == 0 || p <= 0 {
                    return Err(GraphError::NonPositiveWeightLine { line: lineno });
                }
                let w = Weight::new(p, q)
                    .map_err(|_| GraphError::NonPositiveWeightLine { line: lineno })?;
                let (a, b) = (VertexId(u), VertexId(v));
                if a == b {
                    return Err(GraphError::SelfLoopLine { line: lineno });
                }
                let key = if a < b { (a, b) } else { (b, a) };
                if !seen.insert(key) {
                    return Err(GraphError::DuplicateEdgeLine { line: lineno });
                }
                edges.push((a, b, w));
            }
            Some(tok) => {
                return Err(GraphError::MalformedLine {
                    line: lineno,
                    reason: format!("unknown record `{tok}`"),
                })
            }
            None => unreachable!(),
        }
    }
    let declared = declared.ok_or(GraphError::MissingHeader)?;
    let g = Graph::from_edges(edges)?;
    if g.vertex_count() != declared {
        return Err(GraphError::VertexCountMismatch {
            declared,
            actual: g.vertex_count(),
        });
    }
    Ok(g)
}

/// Serializes to the same edge-list format; `parse_graph` round-trips it.
pub fn serialize_graph(g: &Graph) -> String {
    let mut out = format!("v {}\n", g.vertex_count());
    for (u, v, w) in g.edges() {
        out.push_str(&format!("e {} {} {}\n", u, v, w));
    }
    out
}

//! The online exploration environment: partial information, legal moves,
//! and exact cost accounting.
//!
//! A [`Session`] couples an exploration state with a [`World`] that decides
//! what becomes visible when a vertex is first visited. The common case is
//! [`StaticWorld`], which reveals the incident edges of a fixed hidden
//! [`Graph`]; the lower-bound adversary supplies a world that invents the
//! graph as it goes.
//!
//! The searcher only ever sees an [`Observation`]: the visited set, the
//! known edges (every edge with at least one visited endpoint), its current
//! position, and the exact cost paid so far. Moves are restricted to known
//! edges, and paying an edge again costs its full weight again.

use std::collections::{BTreeMap, BTreeSet};
use std::collections::BinaryHeap;
use std::cmp::Reverse;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::graph::{cost_to_string, Cost, Graph, VertexId, Weight};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FogError {
    #[error("start vertex {0} is not in the graph")]
    UnknownStartVertex(VertexId),
    #[error("illegal move from {from} to {to}: not a known edge")]
    IllegalMove { from: VertexId, to: VertexId },
    #[error("target vertex {0} is not known")]
    UnknownTarget(VertexId),
    #[error("no known path reaches {0}")]
    Unreachable(VertexId),
}

/// One paid edge traversal.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MoveEvent {
    pub from: VertexId,
    pub to: VertexId,
    pub weight: Weight,
}

/// What the searcher knows. Contains no reference to the hidden world;
/// explorers are driven by this type alone.
#[derive(Debug, Clone)]
pub struct Observation {
    start: VertexId,
    current: VertexId,
    visited: BTreeSet<VertexId>,
    /// Canonical (u < v) edge map.
    edges: BTreeMap<(VertexId, VertexId), EdgeInfo>,
    /// Neighbor lists over known edges, sorted by id.
    adj: BTreeMap<VertexId, Vec<VertexId>>,
    /// Common denominator of all known weights; `scaled` weights and the
    /// cost ledger are integers relative to it, so path arithmetic stays
    /// exact without per-operation rational reduction.
    scale: BigInt,
    cost_scaled: BigInt,
}

#[derive(Debug, Clone)]
struct EdgeInfo {
    weight: Weight,
    scaled: BigInt,
}

impl Observation {
    fn new(start: VertexId) -> Observation {
        let mut visited = BTreeSet::new();
        visited.insert(start);
        Observation {
            start,
            current: start,
            visited,
            edges: BTreeMap::new(),
            adj: BTreeMap::new(),
            scale: BigInt::one(),
            cost_scaled: BigInt::zero(),
        }
    }

    pub fn start(&self) -> VertexId {
        self.start
    }

    pub fn current(&self) -> VertexId {
        self.current
    }

    pub fn visited(&self) -> &BTreeSet<VertexId> {
        &self.visited
    }

    pub fn is_visited(&self, v: VertexId) -> bool {
        self.visited.contains(&v)
    }

    /// All vertices that appear in some known edge (visited or frontier).
    pub fn known_vertices(&self) -> impl Iterator<Item = VertexId> + '_ {
        self.adj.keys().copied()
    }

    pub fn is_known(&self, v: VertexId) -> bool {
        self.adj.contains_key(&v)
    }

    /// Known but unvisited vertices, ascending.
    pub fn frontier(&self) -> Vec<VertexId> {
        self.adj
            .keys()
            .copied()
            .filter(|v| !self.visited.contains(v))
            .collect()
    }

    pub fn frontier_is_empty(&self) -> bool {
        self.adj.keys().all(|v| self.visited.contains(v))
    }

    /// Neighbors of `v` over known edges, sorted by id.
    pub fn neighbors(&self, v: VertexId) -> &[VertexId] {
        self.adj.get(&v).map(|l| l.as_slice()).unwrap_or(&[])
    }

    pub fn edge_weight(&self, u: VertexId, v: VertexId) -> Option<&Weight> {
        let key = if u < v { (u, v) } else { (v, u) };
        self.edges.get(&key).map(|e| &e.weight)
    }

    pub fn known_edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn known_edge_keys(&self) -> impl Iterator<Item = (VertexId, VertexId)> + '_ {
        self.edges.keys().copied()
    }

    pub fn cost_so_far(&self) -> Cost {
        BigRational::new(self.cost_scaled.clone(), self.scale.clone())
    }

    fn scaled_weight(&self, u: VertexId, v: VertexId) -> Option<&BigInt> {
        let key = if u < v { (u, v) } else { (v, u) };
        self.edges.get(&key).map(|e| &e.scaled)
    }

    /// Merges newly revealed edges, rescaling the integer ledger if a new
    /// denominator appears. Unknown endpoints become known vertices.
    fn add_edges(&mut self, new_edges: &[(VertexId, VertexId, Weight)]) {
        let mut new_scale = self.scale.clone();
        for (_, _, w) in new_edges {
            new_scale = new_scale.lcm(w.as_ratio().denom());
        }
        if new_scale != self.scale {
            let factor = &new_scale / &self.scale;
            for info in self.edges.values_mut() {
                info.scaled *= &factor;
            }
            self.cost_scaled *= &factor;
            self.scale = new_scale;
        }
        for (u, v, w) in new_edges {
            let key = if u < v { (*u, *v) } else { (*v, *u) };
            if self.edges.contains_key(&key) {
                continue;
            }
            let scaled = w.as_ratio().numer() * (&self.scale / w.as_ratio().denom());
            self.edges.insert(
                key,
                EdgeInfo {
                    weight: w.clone(),
                    scaled,
                },
            );
            for (a, b) in [(*u, *v), (*v, *u)] {
                let list = self.adj.entry(a).or_default();
                if let Err(pos) = list.binary_search(&b) {
                    list.insert(pos, b);
                }
            }
        }
    }

    fn apply_move(&mut self, next: VertexId) -> Result<(Weight, bool), FogError> {
        let from = self.current;
        let info = {
            let key = if from < next { (from, next) } else { (next, from) };
            self.edges.get(&key).ok_or(FogError::IllegalMove { from, to: next })?
        };
        let weight = info.weight.clone();
        let scaled = info.scaled.clone();
        self.cost_scaled += scaled;
        self.current = next;
        let first_visit = self.visited.insert(next);
        Ok((weight, first_visit))
    }

    /// A copy of this observation with `hide` removed from sight and the
    /// start relabeled — used to present a sub-walk (e.g. only the cycle of
    /// a tadpole) to a nested explorer as if it were the whole instance.
    pub fn restricted(&self, hide: &BTreeSet<VertexId>, start: VertexId) -> Observation {
        let mut out = Observation::new(start);
        out.current = self.current;
        out.visited = self
            .visited
            .iter()
            .copied()
            .filter(|v| !hide.contains(v))
            .collect();
        let kept: Vec<(VertexId, VertexId, Weight)> = self
            .edges
            .iter()
            .filter(|((u, v), _)| !hide.contains(u) && !hide.contains(v))
            .map(|((u, v), info)| (*u, *v, info.weight.clone()))
            .collect();
        out.add_edges(&kept);
        out
    }
}

/// The hidden side of a session: decides what a first visit reveals and
/// when the vertex set is exhausted. Revealed edges must never be
/// retracted, and every edge incident to a visited vertex must have been
/// revealed no later than that visit.
pub trait World {
    fn contains(&self, v: VertexId) -> bool;
    /// Called exactly once per vertex, on its first visit (including the
    /// start). Returns every edge that becomes known as a consequence; it
    /// is fine to include already-known edges.
    fn on_visit(&mut self, v: VertexId) -> Vec<(VertexId, VertexId, Weight)>;
    fn fully_visited(&self, visited: &BTreeSet<VertexId>) -> bool;
}

/// A fixed hidden graph.
#[derive(Debug, Clone)]
pub struct StaticWorld {
    graph: Graph,
}

impl StaticWorld {
    pub fn new(graph: Graph) -> StaticWorld {
        StaticWorld { graph }
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }
}

impl World for StaticWorld {
    fn contains(&self, v: VertexId) -> bool {
        self.graph.contains(v)
    }

    fn on_visit(&mut self, v: VertexId) -> Vec<(VertexId, VertexId, Weight)> {
        self.graph
            .neighbors(v)
            .iter()
            .map(|(u, w)| (v, *u, w.clone()))
            .collect()
    }

    fn fully_visited(&self, visited: &BTreeSet<VertexId>) -> bool {
        visited.len() == self.graph.vertex_count()
    }
}

/// A single-owner exploration state machine. Independent sessions may run
/// in parallel; one session must not be shared.
#[derive(Debug)]
pub struct Session<W: World = StaticWorld> {
    world: W,
    obs: Observation,
    trace: Vec<MoveEvent>,
}

impl Session<StaticWorld> {
    pub fn new(graph: Graph, start: VertexId) -> Result<Session<StaticWorld>, FogError> {
        Session::with_world(StaticWorld::new(graph), start)
    }

    pub fn graph(&self) -> &Graph {
        self.world.graph()
    }
}

impl<W: World> Session<W> {
    pub fn with_world(mut world: W, start: VertexId) -> Result<Session<W>, FogError> {
        if !world.contains(start) {
            return Err(FogError::UnknownStartVertex(start));
        }
        let mut obs = Observation::new(start);
        let revealed = world.on_visit(start);
        obs.add_edges(&revealed);
        Ok(Session {
            world,
            obs,
            trace: Vec::new(),
        })
    }

    pub fn observation(&self) -> &Observation {
        &self.obs
    }

    pub fn world(&self) -> &W {
        &self.world
    }

    /// Walks one known edge from the current vertex, paying its weight.
    /// A first visit reveals whatever the world decides.
    pub fn move_to(&mut self, next: VertexId) -> Result<&Observation, FogError> {
        let from = self.obs.current;
        let (weight, first_visit) = self.obs.apply_move(next)?;
        if first_visit {
            let revealed = self.world.on_visit(next);
            self.obs.add_edges(&revealed);
        }
        self.trace.push(MoveEvent {
            from,
            to: next,
            weight,
        });
        Ok(&self.obs)
    }

    /// True iff every vertex has been visited and the searcher is back at
    /// the start — the closed-tour completion condition.
    pub fn is_complete(&self) -> bool {
        self.obs.current == self.obs.start && self.world.fully_visited(&self.obs.visited)
    }

    pub fn trace(&self) -> &[MoveEvent] {
        &self.trace
    }

    pub fn move_count(&self) -> usize {
        self.trace.len()
    }

    pub fn cost(&self) -> Cost {
        self.obs.cost_so_far()
    }
}

/// A closed walk from the start covering every vertex.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Tour {
    /// Visited sequence; first and last entries are the start vertex.
    pub vertices: Vec<VertexId>,
    pub total_cost: Cost,
}

impl Tour {
    pub fn from_trace(start: VertexId, trace: &[MoveEvent]) -> Tour {
        let mut vertices = Vec::with_capacity(trace.len() + 1);
        vertices.push(start);
        let mut total = Cost::zero();
        for ev in trace {
            vertices.push(ev.to);
            total += ev.weight.as_ratio();
        }
        Tour {
            vertices,
            total_cost: total,
        }
    }

    /// Checks the closed-tour contract against the actual graph.
    pub fn validate(&self, graph: &Graph) -> Result<(), String> {
        if self.vertices.len() < 2 && graph.vertex_count() > 1 {
            return Err("tour has no moves".into());
        }
        let first = *self.vertices.first().ok_or("empty tour")?;
        let last = *self.vertices.last().unwrap();
        if first != last {
            return Err(format!("tour is not closed: starts {first}, ends {last}"));
        }
        let mut cost = Cost::zero();
        for pair in self.vertices.windows(2) {
            match graph.edge_weight(pair[0], pair[1]) {
                Some(w) => cost += w.as_ratio(),
                None => return Err(format!("({}, {}) is not an edge", pair[0], pair[1])),
            }
        }
        if cost != self.total_cost {
            return Err("recorded cost does not match edge weights".into());
        }
        let seen: BTreeSet<VertexId> = self.vertices.iter().copied().collect();
        for v in graph.vertices() {
            if !seen.contains(&v) {
                return Err(format!("vertex {v} is never visited"));
            }
        }
        Ok(())
    }
}

/// Trace export: `step,from,to,weight,cumulative_cost`, weights as `p/q`.
pub fn trace_csv(trace: &[MoveEvent]) -> String {
    let mut out = String::from("step,from,to,weight,cumulative_cost\n");
    let mut cum = Cost::zero();
    for (i, ev) in trace.iter().enumerate() {
        cum += ev.weight.as_ratio();
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            i + 1,
            ev.from,
            ev.to,
            ev.weight,
            cost_to_string(&cum)
        ));
    }
    out
}

/// Scaled shortest-path distances from `source` to all reachable known
/// vertices, routing only through visited vertices (frontier vertices can
/// terminate a path but never lie inside one). Distances share the
/// observation's scale.
pub(crate) fn scaled_distances_from(obs: &Observation, source: VertexId) -> BTreeMap<VertexId, BigInt> {
    dijkstra(obs, source, Direction::Forward)
}

fn scaled_distances_to(obs: &Observation, target: VertexId) -> BTreeMap<VertexId, BigInt> {
    dijkstra(obs, target, Direction::Backward)
}

enum Direction {
    Forward,
    Backward,
}

fn dijkstra(obs: &Observation, origin: VertexId, dir: Direction) -> BTreeMap<VertexId, BigInt> {
    let mut dist: BTreeMap<VertexId, BigInt> = BTreeMap::new();
    let mut done: BTreeSet<VertexId> = BTreeSet::new();
    let mut heap: BinaryHeap<Reverse<(BigInt, VertexId)>> = BinaryHeap::new();
    dist.insert(origin, BigInt::zero());
    heap.push(Reverse((BigInt::zero(), origin)));
    while let Some(Reverse((d, v))) = heap.pop() {
        if !done.insert(v) {
            continue;
        }
        // Forward: expand only out of visited vertices (a frontier vertex
        // is a sink). Backward: expand out of anything — predecessors on a
        // legal forward path are necessarily visited, which the neighbor
        // filter below enforces.
        let expand = match dir {
            Direction::Forward => obs.is_visited(v),
            Direction::Backward => true,
        };
        if !expand {
            continue;
        }
        for &u in obs.neighbors(v) {
            if let Direction::Backward = dir {
                // u precedes v on a forward path, so u must be visited.
                if !obs.is_visited(u) {
                    continue;
                }
            }
            let w = obs.scaled_weight(v, u).expect("adjacency implies edge");
            let nd = &d + w;
            let better = match dist.get(&u) {
                None => true,
                Some(old) => nd < *old,
            };
            if better {
                dist.insert(u, nd.clone());
                heap.push(Reverse((nd, u)));
            }
        }
    }
    dist
}

/// Minimum-cost path from the current vertex to `target` over known edges,
/// with every interior vertex visited. Among equal-cost paths the
/// lexicographically smallest vertex-id sequence is returned, which makes
/// every caller deterministic.
pub fn known_shortest_path(
    obs: &Observation,
    target: VertexId,
) -> Result<(Vec<VertexId>, Cost), FogError> {
    if !obs.is_known(target) {
        return Err(FogError::UnknownTarget(target));
    }
    let current = obs.current();
    if target == current {
        return Ok((vec![current], Cost::zero()));
    }
    let dist_to = scaled_distances_to(obs, target);
    let total = dist_to
        .get(&current)
        .cloned()
        .ok_or(FogError::Unreachable(target))?;
    // Greedy forward walk: always the smallest-id neighbor that still
    // completes a minimum-cost path. Positive weights guarantee progress.
    let mut path = vec![current];
    let mut at = current;
    let mut remaining = total.clone();
    while at != target {
        let mut next: Option<(VertexId, BigInt)> = None;
        for &u in obs.neighbors(at) {
            // Interior vertices must be visited; only the final hop may
            // land on the frontier.
            if !obs.is_visited(u) && u != target {
                continue;
            }
            if let Some(du) = dist_to.get(&u) {
                let w = obs.scaled_weight(at, u).expect("adjacency implies edge");
                if du + w == remaining {
                    next = Some((u, du.clone()));
                    break; // neighbors are id-sorted; first hit is smallest
                }
            }
        }
        let (u, du) = next.expect("distance map admits a next hop");
        path.push(u);
        remaining = du;
        at = u;
    }
    Ok((path, BigRational::new(total, obs.scale.clone())))
}

/// Cost of `known_shortest_path` without materializing the path.
pub fn known_distance(obs: &Observation, target: VertexId) -> Result<Cost, FogError> {
    if !obs.is_known(target) {
        return Err(FogError::UnknownTarget(target));
    }
    let dist = scaled_distances_from(obs, obs.current());
    dist.get(&target)
        .map(|d| BigRational::new(d.clone(), obs.scale.clone()))
        .ok_or(FogError::Unreachable(target))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{make_tadpole, GraphError, Weight};

    fn unit_t31() -> Graph {
        make_tadpole(3, 1, vec![Weight::one(); 4]).unwrap()
    }

    fn vid(n: u32) -> VertexId {
        VertexId(n)
    }

    #[test]
    fn start_at_junction_sees_three_edges() {
        let s = Session::new(unit_t31(), vid(0)).unwrap();
        let obs = s.observation();
        assert_eq!(obs.known_edge_count(), 3);
        assert_eq!(obs.frontier(), vec![vid(1), vid(2), vid(3)]);
        assert!(obs.cost_so_far().is_zero());
    }

    #[test]
    fn start_at_stem_end_sees_one_edge() {
        let s = Session::new(unit_t31(), vid(3)).unwrap();
        let obs = s.observation();
        assert_eq!(obs.known_edge_count(), 1);
        assert_eq!(obs.frontier(), vec![vid(0)]);
    }

    #[test]
    fn unknown_start_rejected() {
        assert_eq!(
            Session::new(unit_t31(), vid(9)).unwrap_err(),
            FogError::UnknownStartVertex(vid(9))
        );
    }

    #[test]
    fn moves_reveal_and_pay() {
        let mut s = Session::new(unit_t31(), vid(0)).unwrap();
        s.move_to(vid(1)).unwrap();
        let obs = s.observation();
        assert!(obs.is_visited(vid(1)));
        assert!(obs.edge_weight(vid(1), vid(2)).is_some());
        assert_eq!(obs.cost_so_far(), Cost::one());
        // Traversing the same edge again pays again.
        let mut s2 = Session::new(unit_t31(), vid(0)).unwrap();
        s2.move_to(vid(1)).unwrap();
        s2.move_to(vid(0)).unwrap();
        assert_eq!(s2.cost(), Cost::from_integer(2.into()));
    }

    #[test]
    fn illegal_moves_rejected() {
        let mut s = Session::new(unit_t31(), vid(3)).unwrap();
        // (1,2) exists in the hidden graph but is not yet known.
        assert_eq!(
            s.move_to(vid(1)).unwrap_err(),
            FogError::IllegalMove {
                from: vid(3),
                to: vid(1)
            }
        );
    }

    #[test]
    fn completion_requires_returning_home() {
        let mut s = Session::new(unit_t31(), vid(0)).unwrap();
        assert!(!s.is_complete());
        for v in [1u32, 2, 0, 3] {
            s.move_to(vid(v)).unwrap();
        }
        assert!(!s.is_complete()); // all visited, but current = 3
        s.move_to(vid(0)).unwrap();
        assert!(s.is_complete());
    }

    #[test]
    fn shortest_path_respects_frontier_interiors() {
        let mut s = Session::new(unit_t31(), vid(0)).unwrap();
        s.move_to(vid(1)).unwrap();
        s.move_to(vid(2)).unwrap();
        // Target 3 is frontier; the only legal route goes back through 0.
        let (path, cost) = known_shortest_path(s.observation(), vid(3)).unwrap();
        assert_eq!(path, vec![vid(2), vid(0), vid(3)]);
        assert_eq!(cost, Cost::from_integer(2.into()));
    }

    #[test]
    fn shortest_path_direct_edge() {
        let s = Session::new(unit_t31(), vid(0)).unwrap();
        let (path, cost) = known_shortest_path(s.observation(), vid(2)).unwrap();
        assert_eq!(path, vec![vid(0), vid(2)]);
        assert_eq!(cost, Cost::one());
    }

    #[test]
    fn shortest_path_breaks_ties_lexicographically() {
        // Two equal-cost routes from 0 to 3: 0-1-3 and 0-2-3.
        let g = Graph::from_edges(vec![
            (vid(0), vid(1), Weight::one()),
            (vid(0), vid(2), Weight::one()),
            (vid(1), vid(3), Weight::one()),
            (vid(2), vid(3), Weight::one()),
        ])
        .unwrap();
        let mut s = Session::new(g, vid(0)).unwrap();
        s.move_to(vid(1)).unwrap();
        s.move_to(vid(0)).unwrap();
        s.move_to(vid(2)).unwrap();
        s.move_to(vid(0)).unwrap();
        let (path, cost) = known_shortest_path(s.observation(), vid(3)).unwrap();
        assert_eq!(cost, Cost::from_integer(2.into()));
        assert_eq!(path, vec![vid(0), vid(1), vid(3)]);
    }

    #[test]
    fn mixed_denominators_stay_exact() {
        let g = make_tadpole(
            3,
            1,
            vec![
                Weight::new(1, 3).unwrap(),
                Weight::new(1, 7).unwrap(),
                Weight::new(2, 5).unwrap(),
                Weight::new(5, 2).unwrap(),
            ],
        )
        .unwrap();
        let mut s = Session::new(g, vid(0)).unwrap();
        s.move_to(vid(1)).unwrap();
        s.move_to(vid(2)).unwrap();
        let expected = BigRational::new(1.into(), 3.into()) + BigRational::new(1.into(), 7.into());
        assert_eq!(s.cost(), expected);
    }

    #[test]
    fn trace_csv_format() {
        let mut s = Session::new(unit_t31(), vid(0)).unwrap();
        s.move_to(vid(1)).unwrap();
        s.move_to(vid(2)).unwrap();
        let csv = trace_csv(s.trace());
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "step,from,to,weight,cumulative_cost");
        assert_eq!(lines[1], "1,0,1,1/1,1/1");
        assert_eq!(lines[2], "2,1,2,1/1,2/1");
    }

    #[test]
    fn reveal_completeness_against_hidden_graph() {
        let g = make_tadpole(5, 2, vec![Weight::one(); 7]).unwrap();
        let hidden = g.clone();
        let mut s = Session::new(g, vid(2)).unwrap();
        let mut frontier_stack = s.observation().frontier();
        while let Some(v) = frontier_stack.pop() {
            let (path, _) = known_shortest_path(s.observation(), v).unwrap();
            for step in &path[1..] {
                s.move_to(*step).unwrap();
            }
            for (u, _) in hidden.neighbors(v) {
                assert!(
                    s.observation().edge_weight(v, *u).is_some(),
                    "edge ({v}, {u}) not revealed on visit"
                );
            }
            frontier_stack = s.observation().frontier();
        }
        assert!(s.observation().frontier_is_empty());
    }

    #[test]
    fn two_vertex_graph_is_explorable() {
        let g = Graph::from_edges(vec![(vid(0), vid(1), Weight::new(3, 2).unwrap())]).unwrap();
        let mut s = Session::new(g, vid(0)).unwrap();
        s.move_to(vid(1)).unwrap();
        s.move_to(vid(0)).unwrap();
        assert!(s.is_complete());
        assert_eq!(s.cost(), BigRational::new(3.into(), 1.into()));
    }

    #[test]
    fn graph_invariants_reused() {
        // Graph construction errors surface before any session exists.
        assert_eq!(
            Graph::from_edges(Vec::<(VertexId, VertexId, Weight)>::new()).unwrap_err(),
            GraphError::Empty
        );
    }
}

//! The adaptive lower-bound game.
//!
//! The adversary builds a unit-weight tadpole while the explorer walks,
//! keeping every choice open as long as possible:
//!
//! - From the start (degree 2) it grows two chains lazily, always one
//!   frontier vertex ahead, until the explorer reaches distance `k` on one
//!   of them. That vertex becomes the junction and sprouts two fresh
//!   chains; `t1` records how far the explorer had ventured down the
//!   opposite chain at that moment.
//! - The cycle is fixed to contain exactly `k` further vertices between
//!   the junction and the far chain, so the two post-junction chains and
//!   the far-side extension all remain interchangeable.
//! - The moment the explored span closes the cycle to two remaining
//!   vertices, the adversary commits: the deeper post-junction chain joins
//!   the cycle, the shallower one becomes the stem, and the whole graph is
//!   revealed (which only helps the explorer). Three sub-cases arise from
//!   which chain the explorer pushed last, each with its own exact cost
//!   accounting, all yielding a ratio of at least `2 - 4/(3 + 2k)`.
//!
//! [`verify_case_accounting`] replays those books against a finished game.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_traits::Zero;
use thiserror::Error;

use crate::explorers::{run_explorer, ExploreError, Explorer};
use crate::fog::{FogError, MoveEvent, Session, World};
use crate::graph::{decompose_tadpole, Cost, Graph, VertexId, Weight};
use crate::oracle::opt_cost_tadpole;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum AdversaryError {
    #[error("the distance threshold k must be at least 4, got {0}")]
    KTooSmall(usize),
    #[error("parameter out of range: {0}")]
    ParameterRange(String),
    #[error("explorer exhausted the move budget of {budget} without finishing")]
    NonterminatingExplorer { budget: usize },
    #[error(transparent)]
    Explore(#[from] ExploreError),
    #[error(transparent)]
    Fog(#[from] FogError),
    #[error("game ended before the graph was committed")]
    NeverCommitted,
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("accounting mismatch: {0}")]
pub struct AccountingMismatch(pub String);

/// Which branch of the case analysis the game took.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AdversaryCase {
    /// The explorer pushed a post-junction chain to distance `k - 2`
    /// without ever extending the far side.
    Case1,
    /// The cycle closed from the far-side extension.
    Case2a,
    /// The cycle closed from a post-junction chain after the far side had
    /// been extended.
    Case2b,
}

impl fmt::Display for AdversaryCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AdversaryCase::Case1 => write!(f, "1"),
            AdversaryCase::Case2a => write!(f, "2a"),
            AdversaryCase::Case2b => write!(f, "2b"),
        }
    }
}

/// Transcript and exact outcome of one adversary game.
#[derive(Debug, Clone)]
pub struct GameResult {
    pub explorer_cost: Cost,
    pub opt_cost: Cost,
    pub ratio: Cost,
    pub trace: Vec<MoveEvent>,
    pub case: AdversaryCase,
    /// The distance threshold the game was played at.
    pub k: usize,
    /// Farthest visited distance on the side opposite the junction when
    /// the junction was fixed.
    pub t1: usize,
    /// Farthest visited distance down the chain that became the stem; the
    /// committed stem has `stem_depth + 1` edges.
    pub stem_depth: usize,
    /// Farthest visited distance down the chain that joined the cycle
    /// (relevant to the double-back cases).
    pub cycle_chain_depth: usize,
    pub graph: Graph,
    pub start: VertexId,
}

#[derive(Debug, Clone)]
struct Chain {
    /// Revealed vertices in distance order; `verts[d - 1]` sits at
    /// distance `d` from the chain's anchor.
    verts: Vec<VertexId>,
    /// Visited prefix length. Visits always hit the single frontier
    /// vertex, so the visited vertices are exactly `verts[..visited]`.
    visited: usize,
}

impl Chain {
    fn frontier_or(&self, fresh: &mut impl FnMut() -> VertexId) -> VertexId {
        if self.verts.len() > self.visited {
            self.verts[self.visited]
        } else {
            fresh()
        }
    }
}

#[derive(Debug, Clone, Copy)]
enum Loc {
    Side { side: usize, depth: usize },
    Post { chain: usize, depth: usize },
    Ext { depth: usize },
}

enum Phase {
    Init,
    TwoPaths {
        sides: [Chain; 2],
    },
    Branched {
        junction: VertexId,
        t1: usize,
        /// `[start, u_1, ..., junction]`.
        spine: Vec<VertexId>,
        /// `[start, v_1, ..., v_t1]` — the visited far side.
        far_side: Vec<VertexId>,
        chains: [Chain; 2],
        ext: Chain,
    },
    Revealed {
        graph: Graph,
    },
}

/// The adversary-side reveal oracle: decides each frontier vertex's
/// further neighbors on the fly, consistently and irrevocably.
pub struct AdversaryWorld {
    k: usize,
    start: VertexId,
    next_id: u32,
    loc: BTreeMap<VertexId, Loc>,
    phase: Phase,
    outcome: Option<(AdversaryCase, usize, usize, usize)>, // case, t1, stem_depth, cycle_chain_depth
}

impl AdversaryWorld {
    pub fn new(k: usize) -> AdversaryWorld {
        AdversaryWorld {
            k,
            start: VertexId(0),
            next_id: 1,
            loc: BTreeMap::new(),
            phase: Phase::Init,
            outcome: None,
        }
    }

    pub fn start(&self) -> VertexId {
        self.start
    }

    pub fn committed_graph(&self) -> Option<&Graph> {
        match &self.phase {
            Phase::Revealed { graph } => Some(graph),
            _ => None,
        }
    }

    fn fresh(&mut self) -> VertexId {
        let v = VertexId(self.next_id);
        self.next_id += 1;
        v
    }

    fn unit(u: VertexId, v: VertexId) -> (VertexId, VertexId, Weight) {
        (u, v, Weight::one())
    }

    /// Fixes the whole graph: the chain `p` closes the cycle, the other
    /// chain becomes the stem, and every edge becomes known at once.
    #[allow(clippy::too_many_arguments)]
    fn commit(
        &mut self,
        junction: VertexId,
        t1: usize,
        spine: Vec<VertexId>,
        far_side: Vec<VertexId>,
        chains: [Chain; 2],
        ext: Chain,
        p_idx: usize,
        case: AdversaryCase,
    ) -> Vec<(VertexId, VertexId, Weight)> {
        let k = self.k;
        let mut make = {
            let next_id = &mut self.next_id;
            move || {
                let v = VertexId(*next_id);
                *next_id += 1;
                v
            }
        };
        let p = &chains[p_idx];
        let q = &chains[1 - p_idx];
        debug_assert_eq!(p.visited + ext.visited, k - 2);

        // The k in-between cycle vertices, ordered away from the junction:
        // the visited cycle-chain prefix, the two never-visited gap
        // vertices, then the far-side extension walked backwards.
        let mut between: Vec<VertexId> = p.verts[..p.visited].to_vec();
        between.push(p.frontier_or(&mut make));
        between.push(ext.frontier_or(&mut make));
        between.extend(ext.verts[..ext.visited].iter().rev());
        debug_assert_eq!(between.len(), k);

        let mut ring: Vec<VertexId> = spine; // start .. junction
        ring.extend(between);
        ring.extend(far_side[1..].iter().rev()); // v_t1 .. v_1
        debug_assert_eq!(ring.len(), 2 * k + t1 + 1);

        let mut edges: Vec<(VertexId, VertexId, Weight)> = Vec::new();
        for pair in ring.windows(2) {
            edges.push(Self::unit(pair[0], pair[1]));
        }
        edges.push(Self::unit(*ring.last().unwrap(), ring[0]));

        let stem_depth = q.visited;
        let mut prev = junction;
        for &v in &q.verts[..stem_depth] {
            edges.push(Self::unit(prev, v));
            prev = v;
        }
        let stem_end = q.verts[stem_depth]; // the stem chain is never the trigger
        edges.push(Self::unit(prev, stem_end));

        let graph = Graph::from_edges(edges.clone()).expect("committed graph is a valid tadpole");
        self.outcome = Some((case, t1, stem_depth, p.visited));
        self.phase = Phase::Revealed { graph };
        edges
    }
}

impl World for AdversaryWorld {
    fn contains(&self, v: VertexId) -> bool {
        match &self.phase {
            Phase::Init => v == self.start,
            Phase::Revealed { graph } => graph.contains(v),
            _ => v == self.start || self.loc.contains_key(&v),
        }
    }

    fn on_visit(&mut self, v: VertexId) -> Vec<(VertexId, VertexId, Weight)> {
        let phase = std::mem::replace(&mut self.phase, Phase::Init);
        match phase {
            Phase::Init => {
                debug_assert_eq!(v, self.start);
                let a = self.fresh();
                let b = self.fresh();
                self.loc.insert(a, Loc::Side { side: 0, depth: 1 });
                self.loc.insert(b, Loc::Side { side: 1, depth: 1 });
                self.phase = Phase::TwoPaths {
                    sides: [
                        Chain {
                            verts: vec![a],
                            visited: 0,
                        },
                        Chain {
                            verts: vec![b],
                            visited: 0,
                        },
                    ],
                };
                vec![Self::unit(self.start, a), Self::unit(self.start, b)]
            }
            Phase::TwoPaths { mut sides } => {
                let Some(Loc::Side { side, depth }) = self.loc.get(&v).copied() else {
                    unreachable!("every unvisited vertex lies on a side chain");
                };
                debug_assert_eq!(depth, sides[side].visited + 1);
                sides[side].visited = depth;
                if depth == self.k {
                    // Junction found. Sprout the two fresh chains and mark
                    // the opposite frontier as the far-side extension.
                    let junction = v;
                    let t1 = sides[1 - side].visited;
                    let spine: Vec<VertexId> = std::iter::once(self.start)
                        .chain(sides[side].verts.iter().copied())
                        .collect();
                    let far_side: Vec<VertexId> = std::iter::once(self.start)
                        .chain(sides[1 - side].verts[..t1].iter().copied())
                        .collect();
                    let ext_seed = sides[1 - side].verts[t1];
                    self.loc.insert(ext_seed, Loc::Ext { depth: 1 });
                    let p1 = self.fresh();
                    let q1 = self.fresh();
                    self.loc.insert(p1, Loc::Post { chain: 0, depth: 1 });
                    self.loc.insert(q1, Loc::Post { chain: 1, depth: 1 });
                    self.phase = Phase::Branched {
                        junction,
                        t1,
                        spine,
                        far_side,
                        chains: [
                            Chain {
                                verts: vec![p1],
                                visited: 0,
                            },
                            Chain {
                                verts: vec![q1],
                                visited: 0,
                            },
                        ],
                        ext: Chain {
                            verts: vec![ext_seed],
                            visited: 0,
                        },
                    };
                    vec![Self::unit(junction, p1), Self::unit(junction, q1)]
                } else {
                    let next = self.fresh();
                    self.loc.insert(
                        next,
                        Loc::Side {
                            side,
                            depth: depth + 1,
                        },
                    );
                    sides[side].verts.push(next);
                    self.phase = Phase::TwoPaths { sides };
                    vec![Self::unit(v, next)]
                }
            }
            Phase::Branched {
                junction,
                t1,
                spine,
                far_side,
                mut chains,
                mut ext,
            } => {
                let loc = self.loc.get(&v).copied();
                match loc {
                    Some(Loc::Post { chain, depth }) => {
                        debug_assert_eq!(depth, chains[chain].visited + 1);
                        chains[chain].visited = depth;
                        let span = chains[0].visited.max(chains[1].visited) + ext.visited;
                        if span == self.k - 2 {
                            // This visit raised the span, so this chain is
                            // the deeper one and joins the cycle.
                            let case = if ext.visited == 0 {
                                AdversaryCase::Case1
                            } else {
                                AdversaryCase::Case2b
                            };
                            self.commit(junction, t1, spine, far_side, chains, ext, chain, case)
                        } else {
                            let next = self.fresh();
                            self.loc.insert(
                                next,
                                Loc::Post {
                                    chain,
                                    depth: depth + 1,
                                },
                            );
                            chains[chain].verts.push(next);
                            self.phase = Phase::Branched {
                                junction,
                                t1,
                                spine,
                                far_side,
                                chains,
                                ext,
                            };
                            vec![Self::unit(v, next)]
                        }
                    }
                    Some(Loc::Ext { depth }) => {
                        debug_assert_eq!(depth, ext.visited + 1);
                        ext.visited = depth;
                        let dmax = chains[0].visited.max(chains[1].visited);
                        if dmax + ext.visited == self.k - 2 {
                            // Deeper chain joins the cycle; ties go to the
                            // first-created chain.
                            let p_idx = if chains[0].visited >= chains[1].visited {
                                0
                            } else {
                                1
                            };
                            self.commit(
                                junction,
                                t1,
                                spine,
                                far_side,
                                chains,
                                ext,
                                p_idx,
                                AdversaryCase::Case2a,
                            )
                        } else {
                            let next = self.fresh();
                            self.loc.insert(next, Loc::Ext { depth: depth + 1 });
                            ext.verts.push(next);
                            self.phase = Phase::Branched {
                                junction,
                                t1,
                                spine,
                                far_side,
                                chains,
                                ext,
                            };
                            vec![Self::unit(v, next)]
                        }
                    }
                    _ => unreachable!("every unvisited vertex lies on a live chain"),
                }
            }
            Phase::Revealed { graph } => {
                self.phase = Phase::Revealed { graph };
                Vec::new()
            }
        }
    }

    fn fully_visited(&self, visited: &BTreeSet<VertexId>) -> bool {
        match &self.phase {
            Phase::Revealed { graph } => visited.len() == graph.vertex_count(),
            _ => false,
        }
    }
}

/// Plays the full game against `explorer` at threshold `k`, letting the
/// explorer finish on the revealed graph, and returns the exact outcome.
pub fn adversary_game(
    explorer: &mut dyn Explorer,
    k: usize,
) -> Result<GameResult, AdversaryError> {
    if k < 4 {
        return Err(AdversaryError::KTooSmall(k));
    }
    let world = AdversaryWorld::new(k);
    let start = world.start();
    let mut session = Session::with_world(world, start)?;
    // Generous sanity cap: any policy that keeps discovering vertices
    // finishes in far fewer moves; only a broken one exceeds this.
    let budget = 100 * k * k;
    match run_explorer(&mut session, explorer, Some(budget)) {
        Ok(_) => {}
        Err(ExploreError::MoveBudgetExceeded { .. }) => {
            return Err(AdversaryError::NonterminatingExplorer { budget })
        }
        Err(other) => return Err(AdversaryError::Explore(other)),
    }
    let world = session.world();
    let graph = world
        .committed_graph()
        .ok_or(AdversaryError::NeverCommitted)?
        .clone();
    let (case, t1, stem_depth, cycle_chain_depth) =
        world.outcome.ok_or(AdversaryError::NeverCommitted)?;
    let decomposition =
        decompose_tadpole(&graph).expect("the committed graph is always a tadpole");
    let opt_cost = opt_cost_tadpole(&decomposition).cost;
    let explorer_cost = session.cost();
    let ratio = &explorer_cost / &opt_cost;
    Ok(GameResult {
        explorer_cost,
        opt_cost,
        ratio,
        trace: session.trace().to_vec(),
        case,
        k,
        t1,
        stem_depth,
        cycle_chain_depth,
        graph,
        start,
    })
}

/// The guaranteed competitive-ratio lower bound
/// `2 - 4 / (3 + 2k + t1 + 2*stem_depth)`, exact.
pub fn lb_ratio_bound(k: usize, t1: usize, stem_depth: usize) -> Result<Cost, AdversaryError> {
    if k < 4 {
        return Err(AdversaryError::KTooSmall(k));
    }
    if t1 >= k {
        return Err(AdversaryError::ParameterRange(format!(
            "t1 = {t1} must be below k = {k}"
        )));
    }
    if stem_depth >= k {
        return Err(AdversaryError::ParameterRange(format!(
            "stem depth = {stem_depth} must be below k = {k}"
        )));
    }
    let denom = Cost::from_integer((3 + 2 * k as i64 + t1 as i64 + 2 * stem_depth as i64).into());
    Ok(Cost::from_integer(2.into()) - Cost::from_integer(4.into()) / denom)
}

/// Smallest admissible `k` whose guaranteed bound exceeds `2 - epsilon`.
pub fn min_k_exceeding(epsilon: &Cost) -> Result<usize, AdversaryError> {
    if !(epsilon > &Cost::zero() && epsilon < &Cost::from_integer(1.into())) {
        return Err(AdversaryError::ParameterRange(
            "epsilon must lie strictly between 0 and 1".into(),
        ));
    }
    let target = Cost::from_integer(2.into()) - epsilon;
    let mut k = 4;
    loop {
        if lb_ratio_bound(k, 0, 0).unwrap() > target {
            return Ok(k);
        }
        k += 1;
    }
}

/// Recomputes the case-specific books from a finished game and checks
/// every inequality exactly.
pub fn verify_case_accounting(result: &GameResult) -> Result<(), AccountingMismatch> {
    let traced: Cost = result
        .trace
        .iter()
        .fold(Cost::zero(), |acc, ev| acc + ev.weight.as_ratio());
    if traced != result.explorer_cost {
        return Err(AccountingMismatch(format!(
            "transcript sums to {traced} but explorer_cost is {}",
            result.explorer_cost
        )));
    }

    let d = decompose_tadpole(&result.graph)
        .map_err(|e| AccountingMismatch(format!("committed graph is not a tadpole: {e}")))?;
    for (_, _, w) in d.cycle_edges.iter().chain(d.stem_edges.iter()) {
        if w != &Weight::one() {
            return Err(AccountingMismatch("committed graph is not unit weight".into()));
        }
    }
    let (k, t1) = (result.k, result.t1);
    if d.cycle_len != 2 * k + t1 + 1 {
        return Err(AccountingMismatch(format!(
            "cycle has {} vertices, expected 2k + t1 + 1 = {}",
            d.cycle_len,
            2 * k + t1 + 1
        )));
    }
    if d.stem_len != result.stem_depth + 1 {
        return Err(AccountingMismatch(format!(
            "stem has {} vertices, expected stem_depth + 1 = {}",
            d.stem_len,
            result.stem_depth + 1
        )));
    }

    let expected_opt =
        Cost::from_integer((2 * k as i64 + t1 as i64 + 2 * result.stem_depth as i64 + 3).into());
    if result.opt_cost != expected_opt {
        return Err(AccountingMismatch(format!(
            "opt_cost is {} but the formula gives {}",
            result.opt_cost, expected_opt
        )));
    }
    let oracle_opt = opt_cost_tadpole(&d).cost;
    if oracle_opt != expected_opt {
        return Err(AccountingMismatch(format!(
            "oracle optimum {oracle_opt} disagrees with the formula {expected_opt}"
        )));
    }

    let (k, t1, s) = (k as i64, t1 as i64, result.stem_depth as i64);
    let k1 = result.cycle_chain_depth as i64;
    let lower = match result.case {
        AdversaryCase::Case1 => 4 * k + 2 * t1 + 4 * s + 2,
        AdversaryCase::Case2a => 4 * k + 3 * t1 + 2 * k1 + 4 * s + 3,
        AdversaryCase::Case2b => 6 * k + 4 * t1 + 4 * s + 2,
    };
    let lower = Cost::from_integer(lower.into());
    if result.explorer_cost < lower {
        return Err(AccountingMismatch(format!(
            "explorer paid {} < case-{} floor {}",
            result.explorer_cost, result.case, lower
        )));
    }

    let ratio = &result.explorer_cost / &result.opt_cost;
    if ratio != result.ratio {
        return Err(AccountingMismatch("recorded ratio is inconsistent".into()));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::explorers::{Dfs, Greedy, RandomWalk};
    use crate::graph::Cost;

    fn ratio(p: i64, q: i64) -> Cost {
        Cost::new(p.into(), q.into())
    }

    #[test]
    fn bound_formula() {
        assert_eq!(lb_ratio_bound(4, 0, 0).unwrap(), ratio(18, 11));
        assert!(lb_ratio_bound(3, 0, 0).is_err());
        assert!(lb_ratio_bound(4, 4, 0).is_err());
        assert!(lb_ratio_bound(4, 0, 4).is_err());
        // Monotone in k.
        assert!(lb_ratio_bound(10, 0, 0).unwrap() > lb_ratio_bound(4, 0, 0).unwrap());
        assert!(lb_ratio_bound(200, 0, 0).unwrap() > lb_ratio_bound(10, 0, 0).unwrap());
    }

    #[test]
    fn epsilon_thresholds() {
        assert_eq!(min_k_exceeding(&ratio(1, 10)).unwrap(), 19);
        assert_eq!(min_k_exceeding(&ratio(1, 100)).unwrap(), 199);
        assert!(min_k_exceeding(&ratio(0, 1)).is_err());
    }

    #[test]
    fn greedy_at_k4_realizes_the_bound_exactly() {
        let result = adversary_game(&mut Greedy::new(), 4).unwrap();
        assert_eq!(result.case, AdversaryCase::Case1);
        assert_eq!(result.t1, 0);
        assert_eq!(result.stem_depth, 0);
        assert_eq!(result.explorer_cost, Cost::from_integer(18.into()));
        assert_eq!(result.opt_cost, Cost::from_integer(11.into()));
        assert_eq!(result.ratio, ratio(18, 11));
        verify_case_accounting(&result).unwrap();
    }

    #[test]
    fn all_explorers_beat_the_bound() {
        for k in [4usize, 10] {
            let bound = lb_ratio_bound(k, 0, 0).unwrap();
            let g = adversary_game(&mut Greedy::new(), k).unwrap();
            assert!(g.ratio >= bound, "greedy at k={k}");
            verify_case_accounting(&g).unwrap();
            let d = adversary_game(&mut Dfs::new(), k).unwrap();
            assert!(d.ratio >= bound, "dfs at k={k}");
            verify_case_accounting(&d).unwrap();
            for seed in 0..5 {
                let r = adversary_game(&mut RandomWalk::new(seed), k).unwrap();
                assert!(r.ratio >= bound, "random:{seed} at k={k}");
                verify_case_accounting(&r).unwrap();
            }
        }
    }

    #[test]
    fn random_explorers_hit_every_case() {
        let mut seen = BTreeSet::new();
        for seed in 0..60 {
            let r = adversary_game(&mut RandomWalk::new(seed), 5).unwrap();
            seen.insert(format!("{}", r.case));
            verify_case_accounting(&r).unwrap();
        }
        assert!(seen.contains("2a"), "cases seen: {seen:?}");
        assert!(seen.contains("2b") || seen.contains("1"), "cases seen: {seen:?}");
    }

    #[test]
    fn measured_ratios_converge_upward() {
        // A game at a large threshold beats the guaranteed bound of a
        // small one: the family approaches ratio 2 from below.
        let small_bound = lb_ratio_bound(10, 0, 0).unwrap();
        let big = adversary_game(&mut Greedy::new(), 200).unwrap();
        assert!(big.ratio > small_bound);
        let big_dfs = adversary_game(&mut Dfs::new(), 200).unwrap();
        assert!(big_dfs.ratio > small_bound);
    }

    #[test]
    fn committed_graph_is_consistent_with_observations() {
        // Replaying the transcript on the committed graph must be legal
        // move for move and end complete.
        let result = adversary_game(&mut RandomWalk::new(3), 6).unwrap();
        let mut replay = Session::new(result.graph.clone(), result.start).unwrap();
        for ev in &result.trace {
            let obs = replay.move_to(ev.to).unwrap();
            assert_eq!(obs.current(), ev.to);
        }
        assert!(replay.is_complete());
        assert_eq!(replay.cost(), result.explorer_cost);
    }

    #[test]
    fn doctored_results_fail_verification() {
        let mut result = adversary_game(&mut Greedy::new(), 4).unwrap();
        result.explorer_cost -= Cost::from_integer(1.into());
        assert!(verify_case_accounting(&result).is_err());
        let mut result2 = adversary_game(&mut Greedy::new(), 4).unwrap();
        result2.trace.pop();
        assert!(verify_case_accounting(&result2).is_err());
    }

    #[test]
    fn small_k_rejected() {
        assert_eq!(
            adversary_game(&mut Greedy::new(), 3).unwrap_err(),
            AdversaryError::KTooSmall(3)
        );
    }
}

//! Advice schemes: an all-knowing oracle encodes a short bit string before
//! the walk starts, and a matching explorer turns it into an optimal (or
//! structurally constrained) tour.
//!
//! Three schemes are implemented:
//!
//! - **cycle** (`ceil(log2 n)` bits): the oracle marks one edge by its
//!   position in the deterministic reveal order — the cheapest edge at the
//!   start when the whole loop should be walked once, or the heavy edge to
//!   skip otherwise. Tours are exactly optimal.
//! - **tadpole** (`ceil(log2 n) + 1` bits): codeword values 0 and 1 say
//!   "walk the cycle once" and carry the direction to take at the
//!   junction; any larger value `x` names the reveal-order position
//!   `x - 2` of the cycle edge to skip. Tours are exactly optimal.
//! - **two-bit**: enough to route the stem optimally (every stem edge
//!   exactly twice) while a pluggable subroutine explores the cycle part.
//!   No ratio is claimed for the plug-in.
//!
//! The oracle learns reveal positions by simulating the explorer's own
//! deterministic walk, which is advice-independent up to the moment the
//! marked edge becomes visible — so the simulation is well defined.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use crate::explorers::Explorer;
use crate::fog::{known_shortest_path, FogError, Observation, Session, Tour, World};
use crate::graph::{decompose_tadpole, Graph, VertexId};
use crate::oracle::{classify_shape, opt_cost_cycle, Shape};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AdviceScheme {
    TwoBit,
    CycleLog,
    TadpoleLogPlusOne,
}

impl fmt::Display for AdviceScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AdviceScheme::TwoBit => write!(f, "2bit"),
            AdviceScheme::CycleLog => write!(f, "cycle"),
            AdviceScheme::TadpoleLogPlusOne => write!(f, "tadpole"),
        }
    }
}

/// An oracle-produced bit string. Serializes as ASCII bits, e.g. `0110`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AdviceString {
    pub bits: Vec<bool>,
    pub scheme: AdviceScheme,
}

impl AdviceString {
    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn parse(text: &str, scheme: AdviceScheme) -> Result<AdviceString, AdviceError> {
        let mut bits = Vec::with_capacity(text.len());
        for c in text.chars() {
            match c {
                '0' => bits.push(false),
                '1' => bits.push(true),
                other => {
                    return Err(AdviceError::AdviceMismatch(format!(
                        "invalid advice character `{other}`"
                    )))
                }
            }
        }
        Ok(AdviceString { bits, scheme })
    }
}

impl fmt::Display for AdviceString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in &self.bits {
            write!(f, "{}", if *b { '1' } else { '0' })?;
        }
        Ok(())
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum AdviceError {
    #[error("graph is not a simple cycle")]
    NotACycle,
    #[error("graph is not a tadpole")]
    NotATadpole,
    #[error("start vertex {0} is not in the graph")]
    UnknownStart(VertexId),
    #[error("advice scheme mismatch: expected {expected}, got {got}")]
    WrongScheme {
        expected: AdviceScheme,
        got: AdviceScheme,
    },
    #[error("advice does not fit this instance: {0}")]
    AdviceMismatch(String),
    #[error(transparent)]
    Fog(#[from] FogError),
    #[error("walk invariant broken: {0}")]
    Internal(String),
}

/// Number of bits needed to address `n` values: smallest `b` with
/// `2^b >= n`.
pub fn log2_ceil(n: usize) -> usize {
    if n <= 1 {
        0
    } else {
        (usize::BITS - (n - 1).leading_zeros()) as usize
    }
}

fn encode_bits(value: usize, width: usize) -> Vec<bool> {
    debug_assert!(width >= usize::BITS as usize - value.leading_zeros() as usize);
    (0..width).rev().map(|i| (value >> i) & 1 == 1).collect()
}

fn decode_bits(bits: &[bool]) -> usize {
    bits.iter().fold(0usize, |acc, b| (acc << 1) | *b as usize)
}

/// A walk result that may have stopped early at its consultation point:
/// the tour (absent for probes) and the junction candidate pair, if any.
type ProbedWalk = (Option<Tour>, Option<(VertexId, VertexId)>);

fn canon(u: VertexId, v: VertexId) -> (VertexId, VertexId) {
    if u < v {
        (u, v)
    } else {
        (v, u)
    }
}

/// Records the deterministic order in which edges become visible. At the
/// start all edges incident to the start vertex appear, ordered by
/// neighbor id; afterwards each first visit appends its newly revealed
/// edges, again ordered by the far endpoint.
#[derive(Debug, Clone)]
pub struct RevealTracker {
    seen: BTreeSet<(VertexId, VertexId)>,
    order: Vec<(VertexId, VertexId)>,
}

impl RevealTracker {
    pub fn new(obs: &Observation) -> RevealTracker {
        let start = obs.start();
        let mut initial: Vec<(VertexId, VertexId)> = obs.known_edge_keys().collect();
        initial.sort_by_key(|&(u, v)| if u == start { v } else { u });
        let seen = initial.iter().copied().collect();
        RevealTracker {
            seen,
            order: initial,
        }
    }

    /// Absorbs whatever became known since the last call. `just_visited`
    /// orders simultaneous reveals by their far endpoint.
    pub fn absorb(&mut self, obs: &Observation, just_visited: VertexId) {
        let mut fresh: Vec<(VertexId, VertexId)> = obs
            .known_edge_keys()
            .filter(|k| !self.seen.contains(k))
            .collect();
        fresh.sort_by_key(|&(u, v)| {
            if u == just_visited {
                v
            } else if v == just_visited {
                u
            } else {
                u.max(v)
            }
        });
        for k in fresh {
            self.seen.insert(k);
            self.order.push(k);
        }
    }

    pub fn count(&self) -> usize {
        self.order.len()
    }

    pub fn index_of(&self, key: (VertexId, VertexId)) -> Option<usize> {
        self.order.iter().position(|k| *k == key)
    }

    pub fn edge_at(&self, idx: usize) -> Option<(VertexId, VertexId)> {
        self.order.get(idx).copied()
    }

    pub fn order(&self) -> &[(VertexId, VertexId)] {
        &self.order
    }
}

/// Low-level walking helper shared by the advice explorers; tracks the
/// previous vertex so degree-2 continuation is well defined.
struct Walk<'a, W: World> {
    session: &'a mut Session<W>,
    prev: Option<VertexId>,
}

impl<'a, W: World> Walk<'a, W> {
    fn new(session: &'a mut Session<W>) -> Walk<'a, W> {
        Walk {
            session,
            prev: None,
        }
    }

    fn obs(&self) -> &Observation {
        self.session.observation()
    }

    fn cur(&self) -> VertexId {
        self.obs().current()
    }

    fn step(&mut self, v: VertexId) -> Result<(), AdviceError> {
        self.prev = Some(self.cur());
        self.session.move_to(v)?;
        Ok(())
    }

    fn unvisited_here(&self) -> Vec<VertexId> {
        let obs = self.obs();
        obs.neighbors(obs.current())
            .iter()
            .copied()
            .filter(|v| !obs.is_visited(*v))
            .collect()
    }

    fn degree_here(&self) -> usize {
        self.obs().neighbors(self.cur()).len()
    }

    /// Moves while exactly one unvisited neighbor exists.
    fn march(&mut self) -> Result<(), AdviceError> {
        loop {
            let u = self.unvisited_here();
            if u.len() != 1 {
                return Ok(());
            }
            self.step(u[0])?;
        }
    }

    /// At a degree-2 vertex with nothing new around: keep going in the
    /// walking direction (the neighbor that is not the predecessor). On a
    /// cycle this crosses the final untraversed edge.
    fn continue_through(&mut self) -> Result<(), AdviceError> {
        let prev = self
            .prev
            .ok_or_else(|| AdviceError::Internal("no direction to continue in".into()))?;
        let nbrs = self.obs().neighbors(self.cur()).to_vec();
        let next = nbrs
            .into_iter()
            .find(|v| *v != prev)
            .ok_or_else(|| AdviceError::Internal("dead end while continuing".into()))?;
        self.step(next)
    }

    /// Walks the canonical known shortest path to `target`.
    fn walk_to(&mut self, target: VertexId) -> Result<(), AdviceError> {
        let (path, _) = known_shortest_path(self.obs(), target)?;
        for v in path.into_iter().skip(1) {
            self.step(v)?;
        }
        Ok(())
    }

    fn frontier_empty(&self) -> bool {
        self.obs().frontier_is_empty()
    }
}

// ---------------------------------------------------------------------------
// Cycle scheme
// ---------------------------------------------------------------------------

/// Encodes `ceil(log2 n)` bits that make the cycle explorer exactly
/// optimal: the reveal-order index of a cheapest start-incident edge when
/// the whole loop should be walked, or of the edge to skip otherwise.
pub fn advise_cycle(g: &Graph, start: VertexId) -> Result<AdviceString, AdviceError> {
    let opt = opt_cost_cycle(g).map_err(|_| AdviceError::NotACycle)?;
    if !g.contains(start) {
        return Err(AdviceError::UnknownStart(start));
    }
    let width = log2_ceil(g.vertex_count());
    let idx = match opt.shape {
        Shape::Shape1 => {
            // Cheapest edge incident to the start; on a tie the one
            // revealed first (toward the lower-id neighbor).
            let nbrs = g.neighbors(start);
            if nbrs[0].1.as_ratio() <= nbrs[1].1.as_ratio() {
                0
            } else {
                1
            }
        }
        Shape::Shape2 { skipped } => {
            let key = canon(skipped.0, skipped.1);
            let mut session = Session::new(g.clone(), start)?;
            let mut tracker = RevealTracker::new(session.observation());
            let mut walk = Walk::new(&mut session);
            loop {
                if let Some(i) = tracker.index_of(key) {
                    break i;
                }
                let u = walk.unvisited_here();
                let next = *u.first().ok_or_else(|| {
                    AdviceError::Internal("skip edge never revealed on the sweep".into())
                })?;
                walk.step(next)?;
                let at = walk.cur();
                tracker.absorb(walk.obs(), at);
            }
        }
    };
    Ok(AdviceString {
        bits: encode_bits(idx, width),
        scheme: AdviceScheme::CycleLog,
    })
}

/// Decodes cycle advice and walks an exactly optimal closed tour.
pub fn explore_cycle_with_advice<W: World>(
    session: &mut Session<W>,
    advice: &AdviceString,
) -> Result<Tour, AdviceError> {
    if advice.scheme != AdviceScheme::CycleLog {
        return Err(AdviceError::WrongScheme {
            expected: AdviceScheme::CycleLog,
            got: advice.scheme,
        });
    }
    let idx = decode_bits(&advice.bits);
    let start = session.observation().start();
    let start_nbrs: Vec<VertexId> = session.observation().neighbors(start).to_vec();
    if start_nbrs.len() != 2 {
        return Err(AdviceError::AdviceMismatch(
            "start vertex does not have degree 2".into(),
        ));
    }
    let mut tracker = RevealTracker::new(session.observation());
    let mut walk = Walk::new(session);

    // The first two reveal positions are the start's own edges; the marked
    // edge sits there exactly when it is start-incident.
    if idx < 2 {
        let (u, v) = tracker.edge_at(idx).expect("two initial reveals");
        let w = walk.obs().edge_weight(u, v).unwrap().clone();
        let min_incident = start_nbrs
            .iter()
            .map(|n| walk.obs().edge_weight(start, *n).unwrap().clone())
            .min()
            .unwrap();
        if w == min_incident {
            // Walk the whole loop once, low-id direction first.
            walk.step(start_nbrs[0])?;
            walk.march()?;
            walk.continue_through()?;
            if walk.cur() != start || !walk.frontier_empty() {
                return Err(AdviceError::Internal("loop walk did not close".into()));
            }
            let tour = Tour::from_trace(start, session.trace());
            return Ok(tour);
        }
    }

    // Skip-edge behavior: sweep forward until the marked edge shows up,
    // double back past the start to its far endpoint, then come home. The
    // marked edge itself is never traversed.
    while tracker.count() <= idx {
        let u = walk.unvisited_here();
        let next = *u.first().ok_or_else(|| {
            AdviceError::AdviceMismatch(format!(
                "advice index {idx} exceeds the {} revealed edges",
                tracker.count()
            ))
        })?;
        walk.step(next)?;
        let at = walk.cur();
        tracker.absorb(walk.obs(), at);
    }
    let (a, b) = tracker.edge_at(idx).expect("index within reveal order");
    let cur = walk.cur();
    let far = if a == cur {
        b
    } else if b == cur {
        a
    } else {
        return Err(AdviceError::AdviceMismatch(
            "marked edge is not incident to the sweep position".into(),
        ));
    };
    // Turn around (or, if the marked edge was visible at the start, walk
    // away from it) until the far endpoint is reached the long way round.
    let away = walk
        .obs()
        .neighbors(cur)
        .iter()
        .copied()
        .find(|v| *v != far)
        .ok_or_else(|| AdviceError::Internal("nowhere to turn".into()))?;
    walk.step(away)?;
    while walk.cur() != far {
        walk.continue_through()?;
    }
    // Home along the side just walked.
    let back = walk.prev.expect("walked at least one edge");
    if walk.cur() != start {
        walk.step(back)?;
        while walk.cur() != start {
            walk.continue_through()?;
        }
    }
    if !walk.frontier_empty() {
        return Err(AdviceError::Internal("skip walk left vertices unseen".into()));
    }
    Ok(Tour::from_trace(start, session.trace()))
}

// ---------------------------------------------------------------------------
// Tadpole scheme
// ---------------------------------------------------------------------------

/// Encodes `ceil(log2 n) + 1` bits for exactly optimal tadpole
/// exploration. Codeword 0 or 1: walk the cycle once, the low bit choosing
/// the branch taken at the junction. Codeword `x >= 2`: skip the cycle
/// edge revealed at position `x - 2` and double every remaining edge.
pub fn advise_tadpole(g: &Graph, start: VertexId) -> Result<AdviceString, AdviceError> {
    let d = decompose_tadpole(g).map_err(|_| AdviceError::NotATadpole)?;
    if !g.contains(start) {
        return Err(AdviceError::UnknownStart(start));
    }
    let width = log2_ceil(g.vertex_count()) + 1;
    let value = match classify_shape(&d) {
        Shape::Shape1 => {
            // Direction bit: replay the walker up to its junction choice
            // (that prefix does not depend on the bit) and point it at the
            // stem when the start lies on the cycle.
            match shape1_probe(g, start)? {
                Some((_, hi)) => {
                    let stem_nbr = d.stem_edges[0].1;
                    if hi == stem_nbr {
                        1
                    } else {
                        0
                    }
                }
                None => 0,
            }
        }
        Shape::Shape2 { skipped } => {
            let mut scratch = Session::new(g.clone(), start)?;
            let (_, tracker) = exclusion_dfs(&mut scratch, None)?;
            let idx = tracker
                .index_of(canon(skipped.0, skipped.1))
                .expect("every edge is revealed by a full walk");
            idx + 2
        }
    };
    debug_assert!(value < (1usize << width), "codeword must fit the budget");
    Ok(AdviceString {
        bits: encode_bits(value, width),
        scheme: AdviceScheme::TadpoleLogPlusOne,
    })
}

/// Decodes tadpole advice and walks an exactly optimal closed tour.
pub fn explore_tadpole_with_advice<W: World>(
    session: &mut Session<W>,
    advice: &AdviceString,
) -> Result<Tour, AdviceError> {
    if advice.scheme != AdviceScheme::TadpoleLogPlusOne {
        return Err(AdviceError::WrongScheme {
            expected: AdviceScheme::TadpoleLogPlusOne,
            got: advice.scheme,
        });
    }
    let value = decode_bits(&advice.bits);
    if value <= 1 {
        shape1_walk(session, value == 1).map(|(tour, _)| tour)
    } else {
        exclusion_dfs(session, Some(value - 2)).map(|(tour, _)| tour)
    }
}

/// Walks a tadpole whose optimum uses every cycle edge once: march until
/// the structure is recognized, take the advised branch at the junction,
/// close the loop, and double only the stem.
fn shape1_walk<W: World>(
    session: &mut Session<W>,
    stem_bit: bool,
) -> Result<(Tour, Option<(VertexId, VertexId)>), AdviceError> {
    match shape1_walk_inner(session, stem_bit, false)? {
        (Some(tour), consulted) => Ok((tour, consulted)),
        (None, _) => Err(AdviceError::Internal("full walk returned no tour".into())),
    }
}

/// Replays the walk only up to the junction consultation (the prefix does
/// not depend on the direction bit) and reports the candidate pair, or
/// `None` when the walk never needs the bit.
fn shape1_probe(g: &Graph, start: VertexId) -> Result<Option<(VertexId, VertexId)>, AdviceError> {
    let mut scratch = Session::new(g.clone(), start)?;
    shape1_walk_inner(&mut scratch, false, true).map(|(_, consulted)| consulted)
}

fn shape1_walk_inner<W: World>(
    session: &mut Session<W>,
    stem_bit: bool,
    stop_at_consult: bool,
) -> Result<ProbedWalk, AdviceError> {
    let start = session.observation().start();
    let start_nbrs: Vec<VertexId> = session.observation().neighbors(start).to_vec();
    let mut consulted: Option<(VertexId, VertexId)> = None;
    let mut walk = Walk::new(session);

    let consult = |walk: &Walk<'_, W>,
                   consulted: &mut Option<(VertexId, VertexId)>|
     -> Result<VertexId, AdviceError> {
        let cands = walk.unvisited_here();
        if cands.len() != 2 {
            return Err(AdviceError::Internal(format!(
                "junction offered {} choices",
                cands.len()
            )));
        }
        *consulted = Some((cands[0], cands[1]));
        Ok(if stem_bit { cands[1] } else { cands[0] })
    };

    macro_rules! consult_or_stop {
        ($walk:expr) => {{
            let first = consult(&$walk, &mut consulted)?;
            if stop_at_consult {
                return Ok((None, consulted));
            }
            first
        }};
    }

    match start_nbrs.len() {
        1 => {
            // Start at the stem end: up the stem, around the loop, home.
            walk.step(start_nbrs[0])?;
            walk.march()?;
            let junction = walk.cur();
            let first = consult_or_stop!(walk);
            walk.step(first)?;
            walk.march()?;
            walk.continue_through()?;
            if walk.cur() != junction {
                return Err(AdviceError::Internal(
                    "loop did not close at the junction".into(),
                ));
            }
            walk.walk_to(start)?;
        }
        3 => {
            // Start at the junction; the first branch taken is arbitrary.
            walk.step(start_nbrs[0])?;
            walk.march()?;
            if walk.degree_here() == 1 {
                // That was the stem. Return and loop the cycle.
                walk.walk_to(start)?;
                let first = consult_or_stop!(walk);
                walk.step(first)?;
                walk.march()?;
                walk.continue_through()?; // closing edge lands at home
            } else {
                // That was the cycle; cross home and finish the stem.
                walk.continue_through()?;
                finish_dangling(&mut walk, start)?;
            }
        }
        2 => {
            walk.step(start_nbrs[0])?;
            walk.march()?;
            if walk.frontier_empty() {
                // The march swallowed junction and stem in one run (the
                // junction kept only one option open); just come home.
                walk.walk_to(start)?;
            } else if walk.degree_here() == 1 {
                // Stem end found: we started on the stem. Turn around,
                // march out the far side to the junction, loop, and come
                // back down.
                walk.walk_to(start)?;
                walk.march()?;
                let junction = walk.cur();
                let first = consult_or_stop!(walk);
                walk.step(first)?;
                walk.march()?;
                walk.continue_through()?;
                if walk.cur() != junction {
                    return Err(AdviceError::Internal(
                        "loop did not close at the junction".into(),
                    ));
                }
                walk.walk_to(start)?;
            } else {
                // First stop is the junction with both branches open.
                let junction = walk.cur();
                let first = consult_or_stop!(walk);
                walk.step(first)?;
                walk.march()?;
                if walk.degree_here() == 1 {
                    // The advised branch was the stem: we started on the
                    // cycle. Back to the junction, sweep the remaining
                    // arc, and the last crossing lands at home.
                    walk.walk_to(junction)?;
                    walk.march()?;
                    walk.continue_through()?;
                    if walk.cur() != start {
                        walk.walk_to(start)?;
                    }
                } else {
                    // The advised branch closed the cycle (we started on
                    // the stem side, or the bit pointed away from the
                    // stem). Cross the final loop edge and clear whatever
                    // dangles.
                    walk.continue_through()?;
                    finish_dangling(&mut walk, start)?;
                }
            }
        }
        d => {
            return Err(AdviceError::Internal(format!(
                "start vertex has degree {d}"
            )))
        }
    }

    if !walk.frontier_empty() || walk.cur() != start {
        return Err(AdviceError::Internal("walk ended incomplete".into()));
    }
    Ok((Some(Tour::from_trace(start, session.trace())), consulted))
}

/// Clears a dangling path remainder (at most one frontier vertex at a
/// time) and returns to the start.
fn finish_dangling<W: World>(walk: &mut Walk<'_, W>, start: VertexId) -> Result<(), AdviceError> {
    while !walk.frontier_empty() {
        let next = walk.obs().frontier()[0];
        walk.walk_to(next)?;
        walk.march()?;
    }
    if walk.cur() != start {
        walk.walk_to(start)?;
    }
    Ok(())
}

/// Depth-first walk that treats one edge as deleted the moment its reveal
/// position is reached. With no exclusion this is the oblivious sweep the
/// oracle simulates against. Every walked edge is paid exactly twice.
fn exclusion_dfs<W: World>(
    session: &mut Session<W>,
    skip_index: Option<usize>,
) -> Result<(Tour, RevealTracker), AdviceError> {
    let start = session.observation().start();
    let mut tracker = RevealTracker::new(session.observation());
    let mut skipped: Option<(VertexId, VertexId)> =
        skip_index.and_then(|i| tracker.edge_at(i));
    let mut stack = vec![start];
    loop {
        if skipped.is_none() {
            if let Some(i) = skip_index {
                skipped = tracker.edge_at(i);
            }
        }
        let cur = *stack.last().unwrap();
        let obs = session.observation();
        debug_assert_eq!(cur, obs.current());
        let child = obs
            .neighbors(cur)
            .iter()
            .copied()
            .filter(|v| !obs.is_visited(*v))
            .find(|v| Some(canon(cur, *v)) != skipped);
        if let Some(c) = child {
            stack.push(c);
            session.move_to(c)?;
            tracker.absorb(session.observation(), c);
            continue;
        }
        if stack.len() > 1 {
            stack.pop();
            let parent = *stack.last().unwrap();
            session.move_to(parent)?;
            continue;
        }
        break;
    }
    if skip_index.is_some() && skipped.is_none() {
        return Err(AdviceError::AdviceMismatch(
            "marked reveal position was never reached".into(),
        ));
    }
    if !session.is_complete() {
        return Err(AdviceError::Internal(
            "depth-first walk ended incomplete".into(),
        ));
    }
    Ok((Tour::from_trace(start, session.trace()), tracker))
}

// ---------------------------------------------------------------------------
// Two-bit scheme
// ---------------------------------------------------------------------------

/// Encodes the 2-bit tadpole advice. When the start is the junction the
/// two bits index which of its three edges begins the stem; otherwise the
/// first bit flags "start lies on the stem" and the second one (used only
/// from the cycle) picks the stem branch at the junction. The oracle
/// simulates the same `subroutine` the explorer will run, so pass a fresh
/// instance of the explorer's subroutine.
pub fn advise_2bit(
    g: &Graph,
    start: VertexId,
    subroutine: &mut dyn Explorer,
) -> Result<AdviceString, AdviceError> {
    let d = decompose_tadpole(g).map_err(|_| AdviceError::NotATadpole)?;
    if !g.contains(start) {
        return Err(AdviceError::UnknownStart(start));
    }
    let stem_nbr = d.stem_edges[0].1;
    let bits = if start == d.junction {
        let idx = g
            .neighbors(start)
            .iter()
            .position(|(v, _)| *v == stem_nbr)
            .expect("stem neighbor is adjacent to the junction");
        encode_bits(idx, 2)
    } else if d.stem_vertices().contains(&start) {
        vec![true, false]
    } else {
        // Start on the cycle: replay the walk up to the junction choice
        // with a dummy second bit (the prefix does not depend on it).
        let mut scratch = Session::new(g.clone(), start)?;
        let probe = AdviceString {
            bits: vec![false, false],
            scheme: AdviceScheme::TwoBit,
        };
        let (_, consulted) = run_2bit_inner(&mut scratch, &probe, subroutine, true)?;
        let (lo, hi) = consulted.ok_or_else(|| {
            AdviceError::Internal("cycle-start walk never consulted the junction bit".into())
        })?;
        let second = if hi == stem_nbr {
            true
        } else if lo == stem_nbr {
            false
        } else {
            return Err(AdviceError::Internal(
                "stem edge missing from the junction candidates".into(),
            ));
        };
        vec![false, second]
    };
    Ok(AdviceString {
        bits,
        scheme: AdviceScheme::TwoBit,
    })
}

/// Runs the 2-bit scheme: the stem is walked out and back (every stem edge
/// exactly twice) and the cycle is delegated to `cycle_subroutine`, which
/// sees a filtered view in which the stem simply does not exist.
pub fn explore_2bit<W: World>(
    session: &mut Session<W>,
    advice: &AdviceString,
    cycle_subroutine: &mut dyn Explorer,
) -> Result<Tour, AdviceError> {
    match run_2bit_inner(session, advice, cycle_subroutine, false)? {
        (Some(tour), _) => Ok(tour),
        (None, _) => Err(AdviceError::Internal("full walk returned no tour".into())),
    }
}

fn run_2bit_inner<W: World>(
    session: &mut Session<W>,
    advice: &AdviceString,
    subroutine: &mut dyn Explorer,
    stop_at_consult: bool,
) -> Result<ProbedWalk, AdviceError> {
    if advice.scheme != AdviceScheme::TwoBit {
        return Err(AdviceError::WrongScheme {
            expected: AdviceScheme::TwoBit,
            got: advice.scheme,
        });
    }
    if advice.bits.len() != 2 {
        return Err(AdviceError::AdviceMismatch(format!(
            "two-bit advice has {} bits",
            advice.bits.len()
        )));
    }
    let start = session.observation().start();
    let start_nbrs: Vec<VertexId> = session.observation().neighbors(start).to_vec();
    let mut consulted = None;

    if start_nbrs.len() == 3 {
        // Junction start: the two bits name the stem edge. Stem first,
        // then the cycle.
        let idx = decode_bits(&advice.bits);
        if idx > 2 {
            return Err(AdviceError::AdviceMismatch(
                "junction advice must index one of three edges".into(),
            ));
        }
        let mut walk = Walk::new(session);
        walk.step(start_nbrs[idx])?;
        walk.march()?;
        if walk.degree_here() != 1 {
            return Err(AdviceError::AdviceMismatch(
                "advised junction edge did not lead to the stem end".into(),
            ));
        }
        walk.walk_to(start)?;
        let hidden: BTreeSet<VertexId> = session
            .observation()
            .visited()
            .iter()
            .copied()
            .filter(|v| *v != start)
            .collect();
        drive_subroutine(session, subroutine, start, &hidden)?;
    } else if advice.bits[0] {
        // Stem start: reach the junction (via the stem end or directly),
        // hand the cycle to the subroutine, then finish the stem.
        let mut walk = Walk::new(session);
        walk.step(start_nbrs[0])?;
        walk.march()?;
        if walk.degree_here() == 1 && walk.unvisited_here().is_empty() {
            // Hit the stem end first; march out the other side.
            walk.walk_to(start)?;
            walk.march()?;
        }
        if walk.unvisited_here().len() != 2 {
            return Err(AdviceError::AdviceMismatch(
                "stem walk did not end at the junction".into(),
            ));
        }
        let junction = walk.cur();
        let mut hidden: BTreeSet<VertexId> = session
            .observation()
            .visited()
            .iter()
            .copied()
            .filter(|v| *v != junction)
            .collect();
        // A still-unvisited stem remainder hangs off the start's far side;
        // hide its frontier too (its only known edges touch hidden
        // vertices).
        let obs = session.observation();
        for v in obs.frontier() {
            if obs.neighbors(v).iter().all(|u| hidden.contains(u)) {
                hidden.insert(v);
            }
        }
        drive_subroutine(session, subroutine, junction, &hidden)?;
        // Back at the junction. Whatever part of the stem is unwalked
        // still needs its out-and-back.
        let mut walk = Walk::new(session);
        if !walk.frontier_empty() {
            walk.walk_to(start)?;
            walk.march()?;
            walk.walk_to(start)?;
        } else {
            walk.walk_to(start)?;
        }
    } else {
        // Cycle start: run the subroutine as if on a cycle, pausing at the
        // first junction arrival to take the advised stem detour.
        let mut hidden: BTreeSet<VertexId> = BTreeSet::new();
        let mut detoured = false;
        loop {
            let view = session.observation().restricted(&hidden, start);
            match subroutine.next_move(&view) {
                None => break,
                Some(v) => {
                    let before = session.observation().current();
                    session.move_to(v)?;
                    if !detoured && session.observation().neighbors(v).len() == 3 {
                        // First arrival at the junction: detour down the
                        // advised stem branch before the subroutine looks
                        // again.
                        detoured = true;
                        let junction = v;
                        let arrived_from = before;
                        let mut cands: Vec<VertexId> = session
                            .observation()
                            .neighbors(junction)
                            .iter()
                            .copied()
                            .filter(|u| *u != arrived_from)
                            .collect();
                        cands.sort();
                        if cands.len() != 2 {
                            return Err(AdviceError::Internal(
                                "junction arrival with unexpected fanout".into(),
                            ));
                        }
                        consulted = Some((cands[0], cands[1]));
                        if stop_at_consult {
                            return Ok((None, consulted));
                        }
                        let stem_first = if advice.bits[1] { cands[1] } else { cands[0] };
                        let mut walk = Walk::new(session);
                        walk.prev = Some(arrived_from);
                        walk.step(stem_first)?;
                        walk.march()?;
                        if walk.degree_here() != 1 {
                            return Err(AdviceError::AdviceMismatch(
                                "advised stem branch did not end in a leaf".into(),
                            ));
                        }
                        walk.walk_to(junction)?;
                        hidden = stem_detour_vertices(session.observation(), junction, stem_first);
                    }
                }
            }
        }
        if !detoured {
            return Err(AdviceError::AdviceMismatch(
                "subroutine finished without ever reaching the junction".into(),
            ));
        }
    }

    if !session.is_complete() {
        return Err(AdviceError::Internal("two-bit walk ended incomplete".into()));
    }
    Ok((Some(Tour::from_trace(start, session.trace())), consulted))
}

/// The stem vertices discovered by a detour that entered the stem at
/// `entry` from `junction`: walk the path from `entry` away from the
/// junction collecting vertices.
fn stem_detour_vertices(
    obs: &Observation,
    junction: VertexId,
    entry: VertexId,
) -> BTreeSet<VertexId> {
    let mut out = BTreeSet::new();
    let mut prev = junction;
    let mut cur = entry;
    loop {
        out.insert(cur);
        let next = obs
            .neighbors(cur)
            .iter()
            .copied()
            .find(|v| *v != prev);
        match next {
            Some(v) => {
                prev = cur;
                cur = v;
            }
            None => break,
        }
    }
    out
}

/// Feeds the subroutine a view with `hidden` removed and `anchor` as its
/// start until it reports completion. Every proposed move must be legal in
/// the real session.
fn drive_subroutine<W: World>(
    session: &mut Session<W>,
    subroutine: &mut dyn Explorer,
    anchor: VertexId,
    hidden: &BTreeSet<VertexId>,
) -> Result<(), AdviceError> {
    loop {
        let view = session.observation().restricted(hidden, anchor);
        match subroutine.next_move(&view) {
            None => {
                if session.observation().current() != anchor {
                    return Err(AdviceError::Internal(
                        "subroutine stopped away from its anchor".into(),
                    ));
                }
                return Ok(());
            }
            Some(v) => {
                session.move_to(v)?;
            }
        }
    }
}

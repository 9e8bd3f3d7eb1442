//! Explorer policies driven purely by observations, and the loop that runs
//! them against a session.
//!
//! A policy returns one move at a time; `None` means it believes the tour
//! is finished (frontier empty, back at the start). Policies that think in
//! whole paths keep a private move queue. Keeping the interface at move
//! granularity lets the same policies run against static graphs and
//! against the adaptive adversary without change.

pub mod audit;

use std::collections::VecDeque;

use num_bigint::BigInt;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::fog::{
    known_shortest_path, scaled_distances_from, FogError, Observation, Session, Tour, World,
};
use crate::graph::VertexId;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ExploreError {
    #[error(transparent)]
    Fog(#[from] FogError),
    #[error("explorer exceeded the move budget of {budget}")]
    MoveBudgetExceeded { budget: usize },
    #[error("explorer stopped before completing the tour")]
    StoppedIncomplete,
}

/// An online exploration policy. Must decide from the observation alone.
pub trait Explorer {
    fn next_move(&mut self, obs: &Observation) -> Option<VertexId>;
}

/// Runs a policy until it declares completion, checking the closed-tour
/// condition. `budget` caps the number of moves; policies that never
/// finish surface as [`ExploreError::MoveBudgetExceeded`].
pub fn run_explorer<W: World>(
    session: &mut Session<W>,
    explorer: &mut dyn Explorer,
    budget: Option<usize>,
) -> Result<Tour, ExploreError> {
    loop {
        match explorer.next_move(session.observation()) {
            Some(v) => {
                session.move_to(v)?;
                if let Some(b) = budget {
                    if session.move_count() > b {
                        return Err(ExploreError::MoveBudgetExceeded { budget: b });
                    }
                }
            }
            None => {
                if session.is_complete() {
                    let start = session.observation().start();
                    return Ok(Tour::from_trace(start, session.trace()));
                }
                return Err(ExploreError::StoppedIncomplete);
            }
        }
    }
}

/// Picks the smallest-id frontier vertex among those with minimum known
/// path cost from the current position, or `None` if the frontier is
/// empty.
fn nearest_frontier(obs: &Observation) -> Option<VertexId> {
    let dist = scaled_distances_from(obs, obs.current());
    let mut best: Option<(BigInt, VertexId)> = None;
    for v in obs.frontier() {
        if let Some(d) = dist.get(&v) {
            match &best {
                Some((bd, _)) if bd <= d => {}
                _ => best = Some((d.clone(), v)),
            }
        }
    }
    best.map(|(_, v)| v)
}

fn plan_path(obs: &Observation, target: VertexId, plan: &mut VecDeque<VertexId>) {
    let (path, _) = known_shortest_path(obs, target)
        .expect("target is known and reachable through visited vertices");
    plan.extend(path.into_iter().skip(1));
}

/// The greedy explorer: repeatedly walks the cheapest known path to an
/// unvisited vertex (ties: smaller vertex id, then the lexicographically
/// smallest path), and finally returns home along a known shortest path.
#[derive(Debug, Default)]
pub struct Greedy {
    plan: VecDeque<VertexId>,
}

impl Greedy {
    pub fn new() -> Greedy {
        Greedy::default()
    }
}

impl Explorer for Greedy {
    fn next_move(&mut self, obs: &Observation) -> Option<VertexId> {
        if let Some(v) = self.plan.pop_front() {
            return Some(v);
        }
        if obs.frontier_is_empty() {
            if obs.current() == obs.start() {
                return None;
            }
            plan_path(obs, obs.start(), &mut self.plan);
            return self.plan.pop_front();
        }
        let target = nearest_frontier(obs).expect("frontier nonempty");
        plan_path(obs, target, &mut self.plan);
        self.plan.pop_front()
    }
}

/// Depth-first exploration: always descend to the smallest-id unvisited
/// neighbor, backtrack along the tree edge otherwise, and return home along
/// a known shortest path once everything is visited.
#[derive(Debug, Default)]
pub struct Dfs {
    stack: Vec<VertexId>,
    plan: VecDeque<VertexId>,
}

impl Dfs {
    pub fn new() -> Dfs {
        Dfs::default()
    }
}

impl Explorer for Dfs {
    fn next_move(&mut self, obs: &Observation) -> Option<VertexId> {
        if let Some(v) = self.plan.pop_front() {
            return Some(v);
        }
        if obs.frontier_is_empty() {
            if obs.current() == obs.start() {
                return None;
            }
            plan_path(obs, obs.start(), &mut self.plan);
            return self.plan.pop_front();
        }
        if self.stack.is_empty() {
            self.stack.push(obs.current());
        }
        debug_assert_eq!(self.stack.last(), Some(&obs.current()));
        let child = obs
            .neighbors(obs.current())
            .iter()
            .copied()
            .find(|v| !obs.is_visited(*v));
        if let Some(c) = child {
            self.stack.push(c);
            return Some(c);
        }
        if self.stack.len() > 1 {
            self.stack.pop();
            return Some(*self.stack.last().unwrap());
        }
        // Root exhausted while unvisited vertices remain: can only happen
        // when edges between unvisited vertices were revealed late. Restart
        // the search from the nearest frontier vertex.
        let target = nearest_frontier(obs).expect("frontier nonempty");
        plan_path(obs, target, &mut self.plan);
        self.stack = vec![target];
        self.plan.pop_front()
    }
}

/// Walks to a uniformly random frontier vertex each step; deterministic
/// for a fixed seed.
#[derive(Debug)]
pub struct RandomWalk {
    rng: ChaCha8Rng,
    plan: VecDeque<VertexId>,
}

impl RandomWalk {
    pub fn new(seed: u64) -> RandomWalk {
        RandomWalk {
            rng: ChaCha8Rng::seed_from_u64(seed),
            plan: VecDeque::new(),
        }
    }
}

impl Explorer for RandomWalk {
    fn next_move(&mut self, obs: &Observation) -> Option<VertexId> {
        if let Some(v) = self.plan.pop_front() {
            return Some(v);
        }
        let frontier = obs.frontier();
        if frontier.is_empty() {
            if obs.current() == obs.start() {
                return None;
            }
            plan_path(obs, obs.start(), &mut self.plan);
            return self.plan.pop_front();
        }
        let target = frontier[self.rng.gen_range(0..frontier.len())];
        plan_path(obs, target, &mut self.plan);
        self.plan.pop_front()
    }
}

/// Explorer lookup by name: `greedy`, `dfs`, or `random:<seed>`. The
/// advice explorers need oracle access and are wired up separately.
pub fn explorer_by_name(name: &str) -> Option<Box<dyn Explorer>> {
    match name {
        "greedy" => Some(Box::new(Greedy::new())),
        "dfs" => Some(Box::new(Dfs::new())),
        _ => {
            let seed = name.strip_prefix("random:")?.parse::<u64>().ok()?;
            Some(Box::new(RandomWalk::new(seed)))
        }
    }
}

pub fn greedy_explore<W: World>(session: &mut Session<W>) -> Result<Tour, ExploreError> {
    run_explorer(session, &mut Greedy::new(), None)
}

pub fn dfs_explore<W: World>(session: &mut Session<W>) -> Result<Tour, ExploreError> {
    run_explorer(session, &mut Dfs::new(), None)
}

pub fn random_explore<W: World>(session: &mut Session<W>, seed: u64) -> Result<Tour, ExploreError> {
    run_explorer(session, &mut RandomWalk::new(seed), None)
}

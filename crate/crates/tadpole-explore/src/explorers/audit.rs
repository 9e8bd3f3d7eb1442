//! Mechanized amortized accounting for greedy traces.
//!
//! A greedy run decomposes into *steps*: each step walks to one previously
//! unvisited vertex, and the final step returns to the start. The auditor
//! re-derives that decomposition from the raw trace (it never trusts
//! explorer-side bookkeeping) and charges each step either to a single
//! incident edge or to the literal path walked:
//!
//! - if the vertex where the step begins still has an unvisited neighbor,
//!   the step is charged to the cheapest such edge, and its whole cost must
//!   not exceed that edge's weight;
//! - otherwise the step is charged to its own path.
//!
//! Over a full greedy run on a tadpole, no edge may be charged twice, path
//! charges may happen at most twice, the second path charge can only be
//! the final return, and the grand total stays within three times the sum
//! of all edge weights.

use std::collections::BTreeSet;

use num_traits::Zero;
use thiserror::Error;

use crate::fog::MoveEvent;
use crate::graph::{cost_to_string, Cost, Graph, VertexId, Weight};

/// How one step's cost is accounted for.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Charge {
    /// Charged to an edge from the step's starting vertex to an unvisited
    /// neighbor (the cheapest one, smaller id on ties).
    Edge {
        from: VertexId,
        to: VertexId,
        weight: Weight,
    },
    /// Charged to the walked path itself.
    Path,
}

#[derive(Debug, Clone)]
pub struct StepRecord {
    pub index: usize,
    /// The vertex the step visits for the first time; the start vertex for
    /// the final return step.
    pub target: VertexId,
    pub path: Vec<VertexId>,
    pub cost: Cost,
    pub charge: Charge,
}

#[derive(Debug, Clone)]
pub struct ChargeReport {
    pub records: Vec<StepRecord>,
    /// Canonical keys of all edge-charged edges, in step order.
    pub edges_charged: Vec<(VertexId, VertexId)>,
    pub path_charges: usize,
    pub total_cost: Cost,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum AuditError {
    #[error("trace is empty")]
    EmptyTrace,
    #[error("trace is not a greedy step sequence: {0}")]
    MalformedTrace(String),
    #[error("step {step}: cost {cost} exceeds charged edge weight {weight}")]
    StepExceedsChargedEdge {
        step: usize,
        cost: String,
        weight: String,
    },
    #[error("edge ({0}, {1}) charged twice")]
    EdgeChargedTwice(VertexId, VertexId),
    #[error("{count} path charges; at most 2 are admissible")]
    TooManyPathCharges { count: usize },
    #[error("step {step} is a non-final path charge following another")]
    SecondPathChargeNotFinal { step: usize },
    #[error("total cost {cost} exceeds three times the edge weights ({bound})")]
    CostBoundExceeded { cost: String, bound: String },
}

/// Splits a trace into steps, recomputes every charge, and checks the
/// amortization properties exactly. The trace must come from a greedy run
/// on `graph`.
pub fn charging_audit(trace: &[MoveEvent], graph: &Graph) -> Result<ChargeReport, AuditError> {
    if trace.is_empty() {
        return Err(AuditError::EmptyTrace);
    }
    let start = trace[0].from;
    let mut visited: BTreeSet<VertexId> = BTreeSet::new();
    visited.insert(start);

    // Step decomposition: a step ends exactly when a vertex is visited for
    // the first time; whatever trails the last first-visit is the return.
    struct RawStep {
        at: VertexId,
        visited_before: BTreeSet<VertexId>,
        path: Vec<VertexId>,
        cost: Cost,
        target: VertexId,
        is_final: bool,
    }
    let mut steps: Vec<RawStep> = Vec::new();
    let mut cur = RawStep {
        at: start,
        visited_before: visited.clone(),
        path: vec![start],
        cost: Cost::zero(),
        target: start,
        is_final: false,
    };
    let mut position = start;
    for ev in trace {
        if ev.from != position {
            return Err(AuditError::MalformedTrace(format!(
                "move from {} while positioned at {}",
                ev.from, position
            )));
        }
        cur.path.push(ev.to);
        cur.cost += ev.weight.as_ratio();
        position = ev.to;
        if visited.insert(ev.to) {
            cur.target = ev.to;
            steps.push(std::mem::replace(
                &mut cur,
                RawStep {
                    at: ev.to,
                    visited_before: visited.clone(),
                    path: vec![ev.to],
                    cost: Cost::zero(),
                    target: ev.to,
                    is_final: false,
                },
            ));
        }
    }
    if cur.path.len() > 1 {
        if position != start {
            return Err(AuditError::MalformedTrace(format!(
                "trailing moves end at {position}, not at the start"
            )));
        }
        cur.target = start;
        cur.is_final = true;
        steps.push(cur);
    }

    // Charge derivation and per-step checks.
    let mut records = Vec::with_capacity(steps.len());
    let mut edges_charged: Vec<(VertexId, VertexId)> = Vec::new();
    let mut charged_set: BTreeSet<(VertexId, VertexId)> = BTreeSet::new();
    let mut path_charges = 0usize;
    let mut last_path_charge: Option<usize> = None;
    let mut total_cost = Cost::zero();
    let step_count = steps.len();
    for (idx, step) in steps.into_iter().enumerate() {
        total_cost += &step.cost;
        let cheapest = graph
            .neighbors(step.at)
            .iter()
            .filter(|(v, _)| !step.visited_before.contains(v))
            .min_by(|(v1, w1), (v2, w2)| {
                w1.as_ratio()
                    .cmp(w2.as_ratio())
                    .then(v1.cmp(v2))
            })
            .map(|(v, w)| (*v, w.clone()));
        let charge = match cheapest {
            Some((to, weight)) => {
                if step.cost > *weight.as_ratio() {
                    return Err(AuditError::StepExceedsChargedEdge {
                        step: idx,
                        cost: cost_to_string(&step.cost),
                        weight: weight.to_string(),
                    });
                }
                let key = if step.at < to {
                    (step.at, to)
                } else {
                    (to, step.at)
                };
                if !charged_set.insert(key) {
                    return Err(AuditError::EdgeChargedTwice(key.0, key.1));
                }
                edges_charged.push(key);
                Charge::Edge {
                    from: step.at,
                    to,
                    weight,
                }
            }
            None => {
                path_charges += 1;
                if path_charges > 2 {
                    return Err(AuditError::TooManyPathCharges { count: path_charges });
                }
                if path_charges == 2 && !(step.is_final && idx == step_count - 1) {
                    return Err(AuditError::SecondPathChargeNotFinal { step: idx });
                }
                last_path_charge = Some(idx);
                Charge::Path
            }
        };
        records.push(StepRecord {
            index: idx,
            target: step.target,
            path: step.path,
            cost: step.cost,
            charge,
        });
    }
    let _ = last_path_charge;

    let bound = graph.total_weight() * Cost::from_integer(3.into());
    if total_cost > bound {
        return Err(AuditError::CostBoundExceeded {
            cost: cost_to_string(&total_cost),
            bound: cost_to_string(&bound),
        });
    }
    Ok(ChargeReport {
        records,
        edges_charged,
        path_charges,
        total_cost,
    })
}

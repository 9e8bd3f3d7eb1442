//! Exact optimal closed-tour costs.
//!
//! For tadpoles and cycles the optimum has one of two shapes:
//!
//! 1. walk every cycle edge once and every stem edge twice, or
//! 2. skip the single heaviest cycle edge and walk everything else twice —
//!    worthwhile only when that edge outweighs the rest of the cycle
//!    combined (strictly; on a tie shape 1 wins).
//!
//! [`brute_force_opt`] is deliberately independent of those closed forms:
//! it builds the metric closure and solves the tour problem exactly by
//! dynamic programming over subsets, and serves as the oracle the closed
//! forms are validated against.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::graph::{Cost, Graph, TadpoleDecomposition, VertexId, Weight};

/// Maximum instance size for the subset dynamic program. 2^13 masks with
/// exact arithmetic stay well under a second; larger oracles are not
/// needed because the closed forms are validated on small instances.
pub const BRUTE_FORCE_MAX_N: usize = 14;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum OracleError {
    #[error("graph is not a simple cycle")]
    NotACycle,
    #[error("brute force supports at most {max} vertices, got {n}")]
    TooLarge { n: usize, max: usize },
    #[error("anchor vertex {0} is not in the graph")]
    UnknownAnchor(VertexId),
}

/// Which of the two optimal-tour structures applies.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Shape {
    /// Cycle once, stem twice.
    Shape1,
    /// Everything twice except the skipped cycle edge.
    Shape2 {
        skipped: (VertexId, VertexId, Weight),
    },
}

impl Shape {
    pub fn label(&self) -> String {
        match self {
            Shape::Shape1 => "shape1".into(),
            Shape::Shape2 { skipped: (u, v, _) } => format!("shape2({u}-{v})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OptCost {
    pub cost: Cost,
    pub shape: Shape,
}

/// Shape classification for a tadpole: shape 2 exactly when the heaviest
/// cycle edge strictly outweighs the rest of the cycle.
pub fn classify_shape(d: &TadpoleDecomposition) -> Shape {
    let (u, v, w) = d.max_cycle_edge();
    let rest = d.cycle_weight() - w.as_ratio();
    if *w.as_ratio() > rest {
        Shape::Shape2 { skipped: (u, v, w) }
    } else {
        Shape::Shape1
    }
}

/// Closed-form optimal cost for a tadpole.
pub fn opt_cost_tadpole(d: &TadpoleDecomposition) -> OptCost {
    let two = Cost::from_integer(2.into());
    match classify_shape(d) {
        Shape::Shape1 => OptCost {
            cost: two * d.stem_weight() + d.cycle_weight(),
            shape: Shape::Shape1,
        },
        Shape::Shape2 { skipped } => {
            let total = d.cycle_weight() + d.stem_weight();
            OptCost {
                cost: two * (total - skipped.2.as_ratio()),
                shape: Shape::Shape2 { skipped },
            }
        }
    }
}

/// Closed-form optimal cost for a simple cycle: the same two-shape rule
/// with an empty stem.
pub fn opt_cost_cycle(g: &Graph) -> Result<OptCost, OracleError> {
    if !g.is_cycle() {
        return Err(OracleError::NotACycle);
    }
    let total = g.total_weight();
    let mut max: Option<(VertexId, VertexId, &Weight)> = None;
    for (u, v, _) in g.edges().iter().map(|(u, v, _)| (*u, *v, ())) {
        let w = g.edge_weight(u, v).unwrap();
        max = match max {
            None => Some((u, v, w)),
            Some((bu, bv, bw)) => {
                if w.as_ratio() > bw.as_ratio() {
                    Some((u, v, w))
                } else {
                    Some((bu, bv, bw))
                }
            }
        };
    }
    let (u, v, w) = max.expect("cycle has edges");
    let rest = &total - w.as_ratio();
    if *w.as_ratio() > rest {
        let skipped = (u, v, w.clone());
        Ok(OptCost {
            cost: Cost::from_integer(2.into()) * rest,
            shape: Shape::Shape2 { skipped },
        })
    } else {
        Ok(OptCost {
            cost: total,
            shape: Shape::Shape1,
        })
    }
}

/// Exact minimum closed-tour cost for any small connected graph, via the
/// metric closure and subset dynamic programming. Independent of the
/// closed forms above.
pub fn brute_force_opt(g: &Graph) -> Result<Cost, OracleError> {
    let anchor = g.vertices().next().expect("graph is nonempty");
    brute_force_opt_anchored(g, anchor)
}

/// Same as [`brute_force_opt`] with an explicit anchor vertex; the result
/// is anchor-independent (closed tours can be rotated freely).
pub fn brute_force_opt_anchored(g: &Graph, anchor: VertexId) -> Result<Cost, OracleError> {
    let n = g.vertex_count();
    if n > BRUTE_FORCE_MAX_N {
        return Err(OracleError::TooLarge {
            n,
            max: BRUTE_FORCE_MAX_N,
        });
    }
    if !g.contains(anchor) {
        return Err(OracleError::UnknownAnchor(anchor));
    }
    let ids: Vec<VertexId> = g.vertices().collect();
    let slot: BTreeMap<VertexId, usize> = ids.iter().enumerate().map(|(i, v)| (*v, i)).collect();
    if n == 1 {
        return Ok(Cost::zero());
    }

    // Scale all weights to a common denominator so the DP runs on
    // integers; the result divides back exactly.
    let mut scale = BigInt::one();
    for (_, _, w) in g.edges() {
        scale = scale.lcm(w.as_ratio().denom());
    }
    let scaled = |w: &Weight| -> BigInt { w.as_ratio().numer() * (&scale / w.as_ratio().denom()) };

    // Metric closure via Floyd-Warshall on scaled integers.
    let mut dist: Vec<Vec<Option<BigInt>>> = vec![vec![None; n]; n];
    for (i, d) in dist.iter_mut().enumerate() {
        d[i] = Some(BigInt::zero());
    }
    for (u, v, w) in g.edges() {
        let (i, j) = (slot[&u], slot[&v]);
        let s = scaled(&w);
        dist[i][j] = Some(s.clone());
        dist[j][i] = Some(s);
    }
    for k in 0..n {
        for i in 0..n {
            let dik = match &dist[i][k] {
                Some(d) => d.clone(),
                None => continue,
            };
            let row_k = dist[k].clone();
            for (j, dkj) in row_k.iter().enumerate() {
                if let Some(dkj) = dkj {
                    let via = &dik + dkj;
                    let better = match &dist[i][j] {
                        None => true,
                        Some(cur) => via < *cur,
                    };
                    if better {
                        dist[i][j] = Some(via);
                    }
                }
            }
        }
    }
    let dist: Vec<Vec<BigInt>> = dist
        .into_iter()
        .map(|row| {
            row.into_iter()
                .map(|d| d.expect("graph is connected"))
                .collect()
        })
        .collect();
    // The closure must satisfy the triangle inequality by construction.
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                assert!(
                    dist[i][j] <= &dist[i][k] + &dist[k][j],
                    "metric closure violates the triangle inequality"
                );
            }
        }
    }

    // Subset DP anchored at `anchor`: best[mask][e] = cheapest walk from
    // the anchor through exactly the closure vertices in `mask`, ending at
    // `e`. Optimal closed walks in the graph correspond to tours of the
    // closure.
    let a = slot[&anchor];
    let rest: Vec<usize> = (0..n).filter(|&i| i != a).collect();
    let r = rest.len();
    let full: usize = (1 << r) - 1;
    let mut best: Vec<Vec<Option<BigInt>>> = vec![vec![None; r]; full + 1];
    for (ri, &i) in rest.iter().enumerate() {
        best[1 << ri][ri] = Some(dist[a][i].clone());
    }
    for mask in 1..=full {
        for last in 0..r {
            if mask & (1 << last) == 0 {
                continue;
            }
            let cur = match &best[mask][last] {
                Some(c) => c.clone(),
                None => continue,
            };
            for next in 0..r {
                if mask & (1 << next) != 0 {
                    continue;
                }
                let cand = &cur + &dist[rest[last]][rest[next]];
                let cell = &mut best[mask | (1 << next)][next];
                let better = match cell {
                    None => true,
                    Some(old) => cand < *old,
                };
                if better {
                    *cell = Some(cand);
                }
            }
        }
    }
    let mut answer: Option<BigInt> = None;
    for last in 0..r {
        if let Some(c) = &best[full][last] {
            let total = c + &dist[rest[last]][a];
            answer = match answer {
                None => Some(total),
                Some(old) => Some(old.min(total)),
            };
        }
    }
    let answer = answer.expect("full mask reachable on a connected graph");
    Ok(BigRational::new(answer, scale))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{decompose_tadpole, make_cycle, make_tadpole, Graph, Weight};

    fn w(p: i64, q: i64) -> Weight {
        Weight::new(p, q).unwrap()
    }

    fn cost(n: i64) -> Cost {
        Cost::from_integer(n.into())
    }

    /// Test-side oracle for the oracle: enumerate all visit orders over the
    /// metric closure.
    fn permutation_opt(g: &Graph) -> Cost {
        let ids: Vec<VertexId> = g.vertices().collect();
        let n = ids.len();
        let mut dist: BTreeMap<(VertexId, VertexId), Cost> = BTreeMap::new();
        for &u in &ids {
            // Dijkstra would do; at these sizes Bellman-Ford-ish repeated
            // relaxation is fine and simpler.
            let mut d: BTreeMap<VertexId, Cost> = BTreeMap::new();
            d.insert(u, Cost::zero());
            for _ in 0..n {
                for (a, b, wt) in g.edges() {
                    for (x, y) in [(a, b), (b, a)] {
                        if let Some(dx) = d.get(&x).cloned() {
                            let nd = dx + wt.as_ratio();
                            if d.get(&y).map(|old| nd < *old).unwrap_or(true) {
                                d.insert(y, nd);
                            }
                        }
                    }
                }
            }
            for (&v, dv) in &d {
                dist.insert((u, v), dv.clone());
            }
        }
        let anchor = ids[0];
        let rest: Vec<VertexId> = ids[1..].to_vec();
        let mut best: Option<Cost> = None;
        let mut order = rest.clone();
        permute(&mut order, 0, &mut |perm| {
            let mut total = Cost::zero();
            let mut at = anchor;
            for &v in perm.iter() {
                total += dist[&(at, v)].clone();
                at = v;
            }
            total += dist[&(at, anchor)].clone();
            match &best {
                Some(b) if *b <= total => {}
                _ => best = Some(total),
            }
        });
        best.unwrap()
    }

    fn permute(items: &mut Vec<VertexId>, k: usize, f: &mut impl FnMut(&[VertexId])) {
        if k == items.len() {
            f(items);
            return;
        }
        for i in k..items.len() {
            items.swap(k, i);
            permute(items, k + 1, f);
            items.swap(k, i);
        }
    }

    #[test]
    fn shapes_on_triangles() {
        let unit = decompose_tadpole(&make_tadpole(3, 1, vec![w(1, 1); 4]).unwrap()).unwrap();
        assert_eq!(classify_shape(&unit), Shape::Shape1);

        let heavy =
            decompose_tadpole(&make_tadpole(3, 1, vec![w(1, 1), w(1, 1), w(10, 1), w(1, 1)]).unwrap())
                .unwrap();
        match classify_shape(&heavy) {
            Shape::Shape2 { skipped } => assert_eq!(skipped.2, w(10, 1)),
            s => panic!("expected shape 2, got {s:?}"),
        }

        // Exact tie: 2 = 1 + 1 goes to shape 1.
        let tie =
            decompose_tadpole(&make_tadpole(3, 1, vec![w(1, 1), w(1, 1), w(2, 1), w(1, 1)]).unwrap())
                .unwrap();
        assert_eq!(classify_shape(&tie), Shape::Shape1);
    }

    #[test]
    fn tadpole_closed_forms() {
        let unit = decompose_tadpole(&make_tadpole(3, 1, vec![w(1, 1); 4]).unwrap()).unwrap();
        assert_eq!(opt_cost_tadpole(&unit).cost, cost(5));

        let heavy =
            decompose_tadpole(&make_tadpole(3, 1, vec![w(1, 1), w(1, 1), w(10, 1), w(1, 1)]).unwrap())
                .unwrap();
        assert_eq!(opt_cost_tadpole(&heavy).cost, cost(6));
    }

    #[test]
    fn cycle_closed_forms() {
        let unit5 = make_cycle(5, vec![w(1, 1); 5]).unwrap();
        let o = opt_cost_cycle(&unit5).unwrap();
        assert_eq!(o.cost, cost(5));
        assert_eq!(o.shape, Shape::Shape1);

        let heavy = make_cycle(3, vec![w(1, 1), w(1, 1), w(10, 1)]).unwrap();
        let o = opt_cost_cycle(&heavy).unwrap();
        assert_eq!(o.cost, cost(4));
        assert!(matches!(o.shape, Shape::Shape2 { .. }));

        // Tie: both shapes cost 4; labeled shape 1.
        let tie = make_cycle(3, vec![w(1, 1), w(1, 1), w(2, 1)]).unwrap();
        let o = opt_cost_cycle(&tie).unwrap();
        assert_eq!(o.cost, cost(4));
        assert_eq!(o.shape, Shape::Shape1);

        let not_cycle = make_tadpole(3, 1, vec![w(1, 1); 4]).unwrap();
        assert_eq!(opt_cost_cycle(&not_cycle).unwrap_err(), OracleError::NotACycle);
    }

    #[test]
    fn brute_force_examples() {
        let t31 = make_tadpole(3, 1, vec![w(1, 1); 4]).unwrap();
        assert_eq!(brute_force_opt(&t31).unwrap(), cost(5));
        let c4 = make_cycle(4, vec![w(1, 1); 4]).unwrap();
        assert_eq!(brute_force_opt(&c4).unwrap(), cost(4));
    }

    #[test]
    fn brute_force_rejects_large_instances() {
        let g = make_cycle(15, vec![w(1, 1); 15]).unwrap();
        assert_eq!(
            brute_force_opt(&g).unwrap_err(),
            OracleError::TooLarge { n: 15, max: 14 }
        );
    }

    #[test]
    fn brute_force_matches_permutation_enumeration() {
        let cases = vec![
            make_tadpole(3, 1, vec![w(1, 1); 4]).unwrap(),
            make_tadpole(3, 1, vec![w(1, 1), w(1, 1), w(10, 1), w(1, 1)]).unwrap(),
            make_tadpole(4, 2, vec![w(3, 2), w(1, 5), w(7, 1), w(2, 3), w(1, 1), w(4, 1)]).unwrap(),
            make_cycle(5, vec![w(2, 1), w(3, 1), w(1, 2), w(9, 1), w(1, 1)]).unwrap(),
            make_cycle(6, vec![w(1, 1), w(1, 1), w(20, 1), w(1, 1), w(1, 1), w(1, 1)]).unwrap(),
        ];
        for g in cases {
            assert_eq!(brute_force_opt(&g).unwrap(), permutation_opt(&g));
        }
    }

    #[test]
    fn anchor_independence() {
        let g = make_tadpole(4, 2, vec![w(3, 2), w(1, 5), w(7, 1), w(2, 3), w(1, 1), w(4, 1)])
            .unwrap();
        let base = brute_force_opt(&g).unwrap();
        for v in g.vertices() {
            assert_eq!(brute_force_opt_anchored(&g, v).unwrap(), base);
        }
    }

    #[test]
    fn closed_forms_agree_with_brute_force_smoke() {
        let samples = vec![
            make_tadpole(3, 2, vec![w(5, 1), w(1, 3), w(2, 1), w(7, 2), w(1, 1)]).unwrap(),
            make_tadpole(5, 1, vec![w(1, 1), w(2, 1), w(3, 1), w(4, 1), w(5, 1), w(6, 1)]).unwrap(),
            make_tadpole(6, 4, vec![w(1, 1); 10]).unwrap(),
        ];
        for g in samples {
            let d = decompose_tadpole(&g).unwrap();
            assert_eq!(opt_cost_tadpole(&d).cost, brute_force_opt(&g).unwrap());
        }
        let cycles = vec![
            make_cycle(3, vec![w(1, 1), w(1, 1), w(10, 1)]).unwrap(),
            make_cycle(7, vec![w(1, 2), w(3, 4), w(5, 6), w(7, 8), w(9, 10), w(1, 1), w(2, 1)])
                .unwrap(),
        ];
        for g in cycles {
            assert_eq!(opt_cost_cycle(&g).unwrap().cost, brute_force_opt(&g).unwrap());
        }
    }
}

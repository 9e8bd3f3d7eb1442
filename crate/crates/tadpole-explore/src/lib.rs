//! Online exploration of weighted tadpole and cycle graphs.
//!
//! A searcher must visit every vertex of an unknown weighted graph and
//! return to its start, paying each edge traversal; visiting a vertex
//! reveals its neighbors and incident edge weights. This crate implements
//! the whole experimental apparatus for the tadpole case (a cycle with a
//! path attached):
//!
//! - [`graph`]: exact-rational weighted graphs, tadpole/cycle
//!   constructors, decomposition, and a plain-text edge-list format;
//! - [`fog`]: the partial-information environment with exact cost
//!   accounting that every explorer runs against;
//! - [`explorers`]: greedy (2-competitive on tadpoles), depth-first, and
//!   seeded random policies, plus the charging auditor that mechanizes the
//!   amortized cost analysis of greedy runs;
//! - [`oracle`]: closed-form optimal tour costs and an independent
//!   subset-DP brute force to validate them;
//! - [`adversary`]: the adaptive game that forces every explorer to a
//!   competitive ratio of at least `2 - 4/(3 + 2k)` on unit-weight
//!   tadpoles;
//! - [`advice`]: bit-budgeted oracle advice (2, `ceil(log2 n)`, and
//!   `ceil(log2 n) + 1` bits) with explorers that turn it into optimal or
//!   structurally optimal tours;
//! - [`harness`]: deterministic, seedable experiment sweeps with CSV
//!   output, parallel by default (`parallel` feature) with a sequential
//!   fallback.
//!
//! All weight arithmetic is exact — costs, optima, and competitive ratios
//! are rationals, and every pass/fail decision in the harness and tests is
//! an exact comparison.

pub mod adversary;
pub mod advice;
pub mod explorers;
pub mod fog;
pub mod graph;
pub mod harness;
pub mod oracle;

pub use fog::{known_shortest_path, Observation, Session, Tour};
pub use graph::{
    decompose_tadpole, make_cycle, make_tadpole, parse_graph, serialize_graph, Cost, Graph,
    VertexId, Weight,
};

//! Exact minimum-weight vertex cover for graphs of maximum degree 3.
//!
//! The solver branches over a minimum-size cover `U` of the input and tracks
//! the measures used to bound its branching tree.

pub mod bipartite;
pub mod cover;
pub mod engine;
pub mod graph;
pub mod instgen;
pub mod instrument;
pub mod oracle;
pub mod preprocess;
pub mod weight;
pub mod wgr;

pub use cover::{CoverPartition, MeasureParams, Measures, OutsideClass, PotentialValue, VertexSet};
pub use engine::{solve, solve_traced, EngineError, FMode, Solution, SolveConfig, SolveOutcome};
pub use graph::{Graph, GraphError, MutationToken, VertexId};
pub use instrument::BranchReport;
pub use weight::{Rational, WeightMap};

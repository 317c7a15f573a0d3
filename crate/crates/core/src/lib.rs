//! Exact decision-tree analysis of graph properties on at most six vertices.
//!
//! Bob learns an unknown graph by asking about one vertex pair at a time;
//! a property is evasive when Alice can force him to ask about every pair.
//! The solver works on isomorphism classes of positions; the scanner sweeps
//! whole spaces of properties for nonevasive ones.

pub mod error;
pub mod formats;
pub mod game;
pub mod graph;
pub mod position;
pub mod property;
pub mod scanner;
pub mod solver;

pub use error::{Error, Result};
pub use graph::{
    aut_order, canonical_code, class_of, complement_graph, edge_count, edge_endpoints, edge_index, enumerate_classes,
    ClassId, ClassMask, ClassTable, EdgeIndex, GraphCode, LabeledGraph,
};
pub use position::{
    build_position_table, canonical_position, decided_for, reachable_classes, Answer, PosId, Position, PositionCode,
    PositionTable, Verdict,
};
pub use property::{builtin, parse_property, Builtin, ClassOrder, Parity, Property, PropertyDoc};
pub use solver::{
    extract_strategy, is_evasive, replay_verify, solve, EvasionProbe, SolveOptions, SolveReport, StrategyNode,
    StrategyTree,
};

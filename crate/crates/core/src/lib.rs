//! Language-independent static analysis over enriched concrete syntax trees.
//!
//! Each frontend parses its language into an [`EcstNode`] tree whose
//! universal nodes come from the fixed [`UniversalKind`] vocabulary. The
//! analyses in [`metrics`], [`callgraph`] and [`ecfg`] read only those
//! universal nodes, and [`persistence`] stores trees and metric history.

pub mod callgraph;
pub mod ecfg;
pub mod ecst;
pub mod frontends;
pub mod metrics;
pub mod persistence;

pub use ecst::{
    count_kind, find_all, make_universal, skeleton, ConditionPolarity, EcstNode, NodeKind,
    Skeleton, SourceSpan, UniversalKind,
};
pub use frontends::{detect_language, parse, LanguageId, ParseError, ParsedFile};
pub use metrics::{FunctionMetrics, LocCounts, MetricsReport};

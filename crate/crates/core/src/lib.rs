//! Causal discovery with bounded-size conditioning sets.
//!
//! The crate builds k-closure graphs of DAGs, decides k-Markov equivalence,
//! computes k-essential graphs and PAGs by exhaustive enumeration, and learns
//! graphs from data or from a d-separation oracle with the k-PC algorithm.

pub mod bench;
pub mod closure;
pub mod citest;
pub mod enumeration;
pub mod graphs;
pub mod kpc;
pub mod separation;
pub mod vertex_set;

pub use graphs::{Dag, GraphError, Mark, MixedGraph, Pmg};
pub use separation::{ConditioningBound, SearchScope, SepQuery, SepsetEntry, SepsetTable};
pub use vertex_set::VertexSet;

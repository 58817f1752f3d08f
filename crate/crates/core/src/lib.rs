//! Reconstruct unknown rooted trees by issuing batched rounds of queries
//! against an exact oracle.
//!
//! Two query regimes are supported:
//!
//! - **Relative-distance queries** on the leaves of a proper binary tree:
//!   `closer(u, v, w)` names the pair with the deeper lowest common
//!   ancestor. [`recon::relative`] rebuilds the tree's leaf shape.
//! - **Path queries** on an arbitrary degree-d rooted tree over a known
//!   vertex set: `path(u, v)` is 1 iff `u` is an ancestor of `v`.
//!   [`recon::path`] recovers the exact edge set.
//!
//! Both algorithms run under a deterministic cooperative [`sched`]uler that
//! merges the batches of concurrently active subproblems into shared rounds,
//! so the [`oracle::QueryLedger`] measures the query complexity Q(n) and the
//! round complexity R(n) of a run. Instance generators and Newick ingestion
//! live in [`gen`] and [`newick`].

pub mod gen;
pub mod leaf_tree;
pub mod newick;
pub mod oracle;
pub mod parent_array;
pub mod recon;
pub mod sched;
pub mod tree;

pub use leaf_tree::{leaf_isomorphic, LeafTree};
pub use oracle::{Answer, Oracle, OracleError, Query, QueryLedger};
pub use tree::{trees_equal_edges, NodeId, RootedTree, TreeError};

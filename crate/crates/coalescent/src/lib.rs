//! Discrete coalescent processes on labeled forests and their random-graph
//! counterparts.
//!
//! The crate simulates three merge dynamics (Kingman's root pairing, the
//! additive vertex-to-root rule, and the multiplicative cross-pair rule) in
//! uniform, weight-driven, and rate-driven versions, couples the
//! multiplicative chain with the Erdos-Renyi graph process, and runs Kruskal's
//! algorithm on randomly weighted complete graphs. Every simulated quantity
//! with a closed form is backed by an independent exact oracle (brute-force
//! chain enumeration, a partition-shape dynamic program, and big-rational
//! evaluation of the forest-count formulas), and the limit constants
//! (zeta(3) for minimum spanning tree weight, the susceptibility curve
//! alpha(c)^2 n, and the empirical-entropy constant) are reproduced by
//! quadrature and Monte Carlo estimators.

pub mod engine;
pub mod entropy;
pub mod er;
pub mod exact;
pub mod experiment;
pub mod forest;
pub mod kernel;
pub mod mst;
pub mod numerics;
pub mod stats;
pub mod tree;

pub use forest::{Forest, ForestError, MergeRecord};
pub use kernel::KernelKind;
pub use tree::RootedTree;

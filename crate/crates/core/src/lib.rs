//! Probabilistic AVL (p-AVL) trees and the analysis toolkit around them.
//!
//! A p-AVL tree is an AVL tree whose bottom-up repairs each fire only with
//! probability `p`: `p = 0` is a plain BST, `p = 1` a standard AVL tree.
//!
//! * [`tree`]: the tree, rotations and repair counters.
//! * [`metrics`]: height, average depth, `sigma`, violating fraction.
//! * [`harness`]: p grids, key orders, seeding and single runs.
//! * [`distribution`]: aggregation, ECDFs, tails, height exceedance.
//! * [`fitting`]: rotation/imbalance models and their estimation.
//! * [`pareto`]: cost–gain frontier and knee detection.
//!
//! The crate is `no_std` and needs only `alloc`.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod distribution;
pub mod fitting;
pub mod harness;
pub mod linear;
pub mod metrics;
pub mod pareto;
pub mod tree;

pub use harness::{KeyOrder, PGridSpec, RunRecord, SweepConfig};
pub use tree::{NodeId, PavlTree, RepairCounters, RotationKind, TreeError};

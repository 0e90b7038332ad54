//! End-of-build structural statistics.
//!
//! `sigma` is the size-weighted excess imbalance
//! `(1/N) * sum over nodes of max(0, |BF| - 1) * subtree_size`, where the
//! subtree size includes the node itself. Depths are 0-based (root depth 0)
//! and heights are in edges.

use alloc::vec::Vec;

use crate::tree::{NodeId, PavlTree};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TreeMetrics {
    pub n: usize,
    pub height: i32,
    pub avg_depth: f64,
    pub sigma: f64,
    pub violating_fraction: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum MetricsError {
    #[error("statistic is undefined for an empty tree")]
    EmptyTree,
}

struct Totals {
    n: usize,
    max_depth: i32,
    depth_sum: u64,
    weighted_excess: u64,
    violating: usize,
}

fn traverse(tree: &PavlTree) -> Totals {
    let mut totals = Totals {
        n: 0,
        max_depth: -1,
        depth_sum: 0,
        weighted_excess: 0,
        violating: 0,
    };
    let mut stack: Vec<(NodeId, i32)> = tree.root().map(|r| (r, 0)).into_iter().collect();
    while let Some((id, depth)) = stack.pop() {
        let node = tree.node(id);
        totals.n += 1;
        totals.max_depth = totals.max_depth.max(depth);
        totals.depth_sum += depth as u64;
        let excess = tree.balance_factor(id).abs() - 1;
        if excess > 0 {
            totals.violating += 1;
            totals.weighted_excess += excess as u64 * node.size() as u64;
        }
        if let Some(l) = node.left() {
            stack.push((l, depth + 1));
        }
        if let Some(r) = node.right() {
            stack.push((r, depth + 1));
        }
    }
    totals
}

/// All statistics from a single traversal.
pub fn measure(tree: &PavlTree) -> Result<TreeMetrics, MetricsError> {
    let t = traverse(tree);
    if t.n == 0 {
        return Err(MetricsError::EmptyTree);
    }
    let n = t.n as f64;
    Ok(TreeMetrics {
        n: t.n,
        height: t.max_depth,
        avg_depth: t.depth_sum as f64 / n,
        sigma: t.weighted_excess as f64 / n,
        violating_fraction: t.violating as f64 / n,
    })
}

/// Maximum node depth in edges; `-1` for the empty tree.
pub fn tree_height(tree: &PavlTree) -> i32 {
    traverse(tree).max_depth
}

pub fn average_depth(tree: &PavlTree) -> Result<f64, MetricsError> {
    measure(tree).map(|m| m.avg_depth)
}

pub fn sigma(tree: &PavlTree) -> Result<f64, MetricsError> {
    measure(tree).map(|m| m.sigma)
}

pub fn violating_fraction(tree: &PavlTree) -> Result<f64, MetricsError> {
    measure(tree).map(|m| m.violating_fraction)
}

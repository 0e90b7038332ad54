//! The p-AVL tree.
//!
//! Insertion is an ordinary BST descent followed by a bottom-up unwinding
//! pass over the insertion path. Every ancestor whose balance factor leaves
//! `[-1, 1]` is an *imbalance event*; each event draws `u` uniformly from
//! `[0, 1)` and performs exactly one AVL repair (single or double rotation)
//! iff `u < p`. Unwinding always continues to the root, so `p = 0` yields a
//! plain BST and `p = 1` the classic bottom-up AVL tree.
//!
//! Nodes live in an arena and are addressed by [`NodeId`]; all traversals are
//! iterative, so degenerate (chain-shaped) trees of any size are fine.

use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Index of a node inside its tree's arena.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeId(u32);

impl NodeId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Node {
    key: i64,
    left: Option<NodeId>,
    right: Option<NodeId>,
    /// Height in edges; a leaf has height 0.
    height: i32,
    /// Number of nodes in the subtree rooted here.
    size: u32,
}

impl Node {
    fn leaf(key: i64) -> Self {
        Node {
            key,
            left: None,
            right: None,
            height: 0,
            size: 1,
        }
    }

    pub fn key(&self) -> i64 {
        self.key
    }

    pub fn left(&self) -> Option<NodeId> {
        self.left
    }

    pub fn right(&self) -> Option<NodeId> {
        self.right
    }

    pub fn height(&self) -> i32 {
        self.height
    }

    pub fn size(&self) -> u32 {
        self.size
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RotationKind {
    Single,
    Double,
}

impl RotationKind {
    /// Primitive rotations performed by this repair.
    pub fn primitive_count(self) -> u64 {
        match self {
            RotationKind::Single => 1,
            RotationKind::Double => 2,
        }
    }
}

/// Running totals over the lifetime of a tree.
///
/// `rotations_total` counts primitive rotations, so a double rotation
/// contributes 2.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RepairCounters {
    pub rotations_total: u64,
    pub single_rotations: u64,
    pub double_rotations: u64,
    pub imbalance_events: u64,
    pub repairs_fired: u64,
}

impl RepairCounters {
    fn record(&mut self, kind: RotationKind) {
        match kind {
            RotationKind::Single => self.single_rotations += 1,
            RotationKind::Double => self.double_rotations += 1,
        }
        self.rotations_total += kind.primitive_count();
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct InsertReport {
    pub imbalance_events: u64,
    pub rotations: u64,
    /// Depth of the freshly inserted leaf at the moment it was attached.
    pub depth: u32,
}

/// Result of a from-scratch structural check, see [`PavlTree::validate`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StructureReport {
    pub max_abs_balance: i32,
    pub node_count: usize,
    pub keys_ordered: bool,
    pub cache_consistent: bool,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TreeError {
    #[error("repair probability {0} is outside [0, 1]")]
    InvalidProbability(f64),
    #[error("key {0} is already present")]
    DuplicateKey(i64),
    #[error("cannot rotate right: node has no left child")]
    MissingLeftChild,
    #[error("cannot rotate left: node has no right child")]
    MissingRightChild,
    #[error("repair requested on a node with balance factor {0}")]
    NotImbalanced(i32),
    #[error("node id {0} does not belong to this tree")]
    UnknownNode(usize),
    #[error("tree is full")]
    Capacity,
}

pub struct PavlTree {
    nodes: Vec<Node>,
    root: Option<NodeId>,
    p: f64,
    rng: ChaCha8Rng,
    counters: RepairCounters,
    path: Vec<NodeId>,
}

impl core::fmt::Debug for PavlTree {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("PavlTree")
            .field("len", &self.nodes.len())
            .field("p", &self.p)
            .field("counters", &self.counters)
            .finish()
    }
}

impl PavlTree {
    /// Creates an empty tree whose coin flips come from a ChaCha8 stream
    /// seeded with `seed`.
    pub fn new(p: f64, seed: u64) -> Result<Self, TreeError> {
        if !(0.0..=1.0).contains(&p) {
            return Err(TreeError::InvalidProbability(p));
        }
        Ok(PavlTree {
            nodes: Vec::new(),
            root: None,
            p,
            rng: ChaCha8Rng::seed_from_u64(seed),
            counters: RepairCounters::default(),
            path: Vec::new(),
        })
    }

    pub fn with_capacity(p: f64, seed: u64, capacity: usize) -> Result<Self, TreeError> {
        let mut tree = Self::new(p, seed)?;
        tree.nodes.reserve(capacity);
        Ok(tree)
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn root(&self) -> Option<NodeId> {
        self.root
    }

    pub fn counters(&self) -> RepairCounters {
        self.counters
    }

    pub fn node(&self, id: NodeId) -> &Node {
        &self.nodes[id.index()]
    }

    /// Height in edges; `-1` for the empty tree.
    pub fn height(&self) -> i32 {
        self.height_of(self.root)
    }

    /// `height(left) - height(right)` from cached heights.
    pub fn balance_factor(&self, id: NodeId) -> i32 {
        let n = self.node(id);
        self.height_of(n.left) - self.height_of(n.right)
    }

    pub fn contains(&self, key: i64) -> bool {
        let mut cur = self.root;
        while let Some(id) = cur {
            let n = self.node(id);
            cur = match key.cmp(&n.key) {
                core::cmp::Ordering::Less => n.left,
                core::cmp::Ordering::Greater => n.right,
                core::cmp::Ordering::Equal => return true,
            };
        }
        false
    }

    pub fn find(&self, key: i64) -> Option<NodeId> {
        let mut cur = self.root;
        while let Some(id) = cur {
            let n = self.node(id);
            cur = match key.cmp(&n.key) {
                core::cmp::Ordering::Less => n.left,
                core::cmp::Ordering::Greater => n.right,
                core::cmp::Ordering::Equal => return Some(id),
            };
        }
        None
    }

    /// Keys in ascending (in-order) order.
    pub fn keys(&self) -> Vec<i64> {
        let mut out = Vec::with_capacity(self.len());
        let mut stack = Vec::new();
        let mut cur = self.root;
        loop {
            while let Some(id) = cur {
                stack.push(id);
                cur = self.node(id).left;
            }
            match stack.pop() {
                Some(id) => {
                    out.push(self.node(id).key);
                    cur = self.node(id).right;
                }
                None => break,
            }
        }
        out
    }

    pub fn insert(&mut self, key: i64) -> Result<InsertReport, TreeError> {
        self.path.clear();
        let mut cur = self.root;
        let mut go_left = false;
        while let Some(id) = cur {
            let n = &self.nodes[id.index()];
            self.path.push(id);
            cur = match key.cmp(&n.key) {
                core::cmp::Ordering::Less => {
                    go_left = true;
                    n.left
                }
                core::cmp::Ordering::Greater => {
                    go_left = false;
                    n.right
                }
                core::cmp::Ordering::Equal => return Err(TreeError::DuplicateKey(key)),
            };
        }

        let leaf = self.alloc(key)?;
        let depth = self.path.len() as u32;
        match self.path.last() {
            None => {
                self.root = Some(leaf);
                return Ok(InsertReport {
                    depth,
                    ..InsertReport::default()
                });
            }
            Some(&parent) => {
                let parent = &mut self.nodes[parent.index()];
                if go_left {
                    parent.left = Some(leaf);
                } else {
                    parent.right = Some(leaf);
                }
            }
        }

        let mut report = InsertReport {
            depth,
            ..InsertReport::default()
        };
        for i in (0..self.path.len()).rev() {
            let id = self.path[i];
            self.refresh(id);
            let bf = self.balance_factor(id);
            if bf.abs() <= 1 {
                continue;
            }
            report.imbalance_events += 1;
            self.counters.imbalance_events += 1;
            let u: f64 = self.rng.gen();
            if u >= self.p {
                continue;
            }
            self.counters.repairs_fired += 1;
            let (new_root, kind) = self.repair_local(id, bf)?;
            report.rotations += kind.primitive_count();
            let parent = if i > 0 { Some(self.path[i - 1]) } else { None };
            self.relink(parent, id, new_root);
        }
        Ok(report)
    }

    /// Rotates the subtree rooted at `id` to the right and links the new
    /// subtree root into `id`'s former parent. Returns the new subtree root.
    pub fn rotate_right(&mut self, id: NodeId) -> Result<NodeId, TreeError> {
        let path = self.path_to(id)?;
        let new_root = self.rotate_right_local(id)?;
        self.relink_and_refresh(&path, id, new_root);
        Ok(new_root)
    }

    /// Mirror of [`rotate_right`](Self::rotate_right).
    pub fn rotate_left(&mut self, id: NodeId) -> Result<NodeId, TreeError> {
        let path = self.path_to(id)?;
        let new_root = self.rotate_left_local(id)?;
        self.relink_and_refresh(&path, id, new_root);
        Ok(new_root)
    }

    /// Performs one AVL repair action at `id` (which must have `|BF| > 1`),
    /// updates the rotation counters and relinks the result into the tree.
    pub fn repair(&mut self, id: NodeId) -> Result<(NodeId, RotationKind), TreeError> {
        let path = self.path_to(id)?;
        let bf = self.balance_factor(id);
        if bf.abs() <= 1 {
            return Err(TreeError::NotImbalanced(bf));
        }
        let (new_root, kind) = self.repair_local(id, bf)?;
        self.relink_and_refresh(&path, id, new_root);
        Ok((new_root, kind))
    }

    /// Recomputes every height and size from scratch, compares against the
    /// cached values and checks key order.
    pub fn validate(&self) -> StructureReport {
        let mut report = StructureReport {
            max_abs_balance: 0,
            node_count: 0,
            keys_ordered: true,
            cache_consistent: true,
        };
        let Some(root) = self.root else {
            return report;
        };
        // Post-order with explicit stack; heights/sizes of finished subtrees
        // are kept in side tables indexed by node id.
        let mut height = alloc::vec![i32::MIN; self.nodes.len()];
        let mut size = alloc::vec![0u32; self.nodes.len()];
        let mut stack = alloc::vec![(root, false)];
        while let Some((id, expanded)) = stack.pop() {
            let n = self.node(id);
            if !expanded {
                stack.push((id, true));
                if let Some(r) = n.right {
                    stack.push((r, false));
                }
                if let Some(l) = n.left {
                    stack.push((l, false));
                }
                continue;
            }
            let (hl, sl) = n.left.map_or((-1, 0), |c| (height[c.index()], size[c.index()]));
            let (hr, sr) = n.right.map_or((-1, 0), |c| (height[c.index()], size[c.index()]));
            let h = 1 + hl.max(hr);
            let s = 1 + sl + sr;
            height[id.index()] = h;
            size[id.index()] = s;
            report.node_count += 1;
            report.max_abs_balance = report.max_abs_balance.max((hl - hr).abs());
            if h != n.height || s != n.size {
                report.cache_consistent = false;
            }
        }
        let keys = self.keys();
        report.keys_ordered = keys.windows(2).all(|w| w[0] < w[1]);
        if report.node_count != self.nodes.len() {
            report.cache_consistent = false;
        }
        report
    }

    fn alloc(&mut self, key: i64) -> Result<NodeId, TreeError> {
        let idx = u32::try_from(self.nodes.len()).map_err(|_| TreeError::Capacity)?;
        self.nodes.push(Node::leaf(key));
        Ok(NodeId(idx))
    }

    fn height_of(&self, id: Option<NodeId>) -> i32 {
        id.map_or(-1, |id| self.nodes[id.index()].height)
    }

    fn size_of(&self, id: Option<NodeId>) -> u32 {
        id.map_or(0, |id| self.nodes[id.index()].size)
    }

    fn refresh(&mut self, id: NodeId) {
        let (l, r) = {
            let n = &self.nodes[id.index()];
            (n.left, n.right)
        };
        let height = 1 + self.height_of(l).max(self.height_of(r));
        let size = 1 + self.size_of(l) + self.size_of(r);
        let n = &mut self.nodes[id.index()];
        n.height = height;
        n.size = size;
    }

    fn rotate_right_local(&mut self, id: NodeId) -> Result<NodeId, TreeError> {
        let pivot = self.nodes[id.index()]
            .left
            .ok_or(TreeError::MissingLeftChild)?;
        let inner = self.nodes[pivot.index()].right;
        self.nodes[id.index()].left = inner;
        self.nodes[pivot.index()].right = Some(id);
        self.refresh(id);
        self.refresh(pivot);
        Ok(pivot)
    }

    fn rotate_left_local(&mut self, id: NodeId) -> Result<NodeId, TreeError> {
        let pivot = self.nodes[id.index()]
            .right
            .ok_or(TreeError::MissingRightChild)?;
        let inner = self.nodes[pivot.index()].left;
        self.nodes[id.index()].right = inner;
        self.nodes[pivot.index()].left = Some(id);
        self.refresh(id);
        self.refresh(pivot);
        Ok(pivot)
    }

    /// One repair action chosen by the sign rule; ties on the child go to the
    /// single rotation. The caller relinks the returned subtree root.
    fn repair_local(&mut self, id: NodeId, bf: i32) -> Result<(NodeId, RotationKind), TreeError> {
        let (new_root, kind) = if bf > 1 {
            let child = self.nodes[id.index()]
                .left
                .ok_or(TreeError::MissingLeftChild)?;
            if self.balance_factor(child) >= 0 {
                (self.rotate_right_local(id)?, RotationKind::Single)
            } else {
                let l = self.rotate_left_local(child)?;
                self.nodes[id.index()].left = Some(l);
                (self.rotate_right_local(id)?, RotationKind::Double)
            }
        } else if bf < -1 {
            let child = self.nodes[id.index()]
                .right
                .ok_or(TreeError::MissingRightChild)?;
            if self.balance_factor(child) <= 0 {
                (self.rotate_left_local(id)?, RotationKind::Single)
            } else {
                let r = self.rotate_right_local(child)?;
                self.nodes[id.index()].right = Some(r);
                (self.rotate_left_local(id)?, RotationKind::Double)
            }
        } else {
            return Err(TreeError::NotImbalanced(bf));
        };
        self.counters.record(kind);
        Ok((new_root, kind))
    }

    fn relink(&mut self, parent: Option<NodeId>, old: NodeId, new: NodeId) {
        match parent {
            None => self.root = Some(new),
            Some(p) => {
                let p = &mut self.nodes[p.index()];
                if p.left == Some(old) {
                    p.left = Some(new);
                } else {
                    p.right = Some(new);
                }
            }
        }
    }

    /// Ancestors of `id`, root first, excluding `id` itself.
    fn path_to(&self, id: NodeId) -> Result<Vec<NodeId>, TreeError> {
        if id.index() >= self.nodes.len() {
            return Err(TreeError::UnknownNode(id.index()));
        }
        let key = self.node(id).key;
        let mut path = Vec::new();
        let mut cur = self.root;
        while let Some(c) = cur {
            if c == id {
                return Ok(path);
            }
            path.push(c);
            let n = self.node(c);
            cur = if key < n.key { n.left } else { n.right };
        }
        Err(TreeError::UnknownNode(id.index()))
    }

    fn relink_and_refresh(&mut self, path: &[NodeId], old: NodeId, new: NodeId) {
        self.relink(path.last().copied(), old, new);
        for &a in path.iter().rev() {
            self.refresh(a);
        }
    }

    #[cfg(test)]
    pub(crate) fn node_mut(&mut self, id: NodeId) -> &mut Node {
        &mut self.nodes[id.index()]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn build(p: f64, keys: &[i64]) -> (PavlTree, Vec<InsertReport>) {
        let mut t = PavlTree::new(p, 42).unwrap();
        let reports = keys.iter().map(|&k| t.insert(k).unwrap()).collect();
        (t, reports)
    }

    #[test]
    fn rejects_probability_outside_unit_interval() {
        assert_eq!(PavlTree::new(1.5, 0).unwrap_err(), TreeError::InvalidProbability(1.5));
        assert!(PavlTree::new(-0.1, 0).is_err());
        assert!(PavlTree::new(f64::NAN, 0).is_err());
        assert!(PavlTree::new(0.0, 0).is_ok());
        assert!(PavlTree::new(1.0, 0).is_ok());
    }

    #[test]
    fn p_zero_never_rotates() {
        let keys: Vec<i64> = (0..100).map(|i| (i * 37) % 101).collect();
        let (t, _) = build(0.0, &keys);
        assert_eq!(t.counters().rotations_total, 0);
        assert_eq!(t.counters().repairs_fired, 0);
    }

    #[test]
    fn p_one_stays_balanced() {
        let keys: Vec<i64> = (0..100).map(|i| (i * 37) % 101).collect();
        let mut t = PavlTree::new(1.0, 42).unwrap();
        for k in keys {
            t.insert(k).unwrap();
            assert!(t.validate().max_abs_balance <= 1);
        }
    }

    #[test]
    fn descending_triple_at_p_one() {
        let (t, r) = build(1.0, &[3, 2, 1]);
        assert_eq!(r[2].imbalance_events, 1);
        assert_eq!(r[2].rotations, 1);
        let root = t.root().unwrap();
        assert_eq!(t.node(root).key(), 2);
        assert_eq!(t.height(), 1);
        assert_eq!(t.counters().single_rotations, 1);
    }

    #[test]
    fn descending_triple_at_p_zero() {
        let (t, r) = build(0.0, &[3, 2, 1]);
        assert_eq!(r[2].imbalance_events, 1);
        assert_eq!(r[2].rotations, 0);
        assert_eq!(t.height(), 2);
        let root = t.node(t.root().unwrap());
        assert_eq!(root.key(), 3);
        let mid = t.node(root.left().unwrap());
        assert_eq!(mid.key(), 2);
        assert_eq!(t.node(mid.left().unwrap()).key(), 1);
        assert_eq!(r[2].depth, 2);
    }

    #[test]
    fn ascending_triple_at_p_one() {
        let (t, r) = build(1.0, &[1, 2, 3]);
        assert_eq!(r[2].rotations, 1);
        assert_eq!(t.node(t.root().unwrap()).key(), 2);
    }

    #[test]
    fn duplicate_key_leaves_tree_unchanged() {
        let (mut t, _) = build(1.0, &[5, 3, 8]);
        let before = t.keys();
        let counters = t.counters();
        assert_eq!(t.insert(3).unwrap_err(), TreeError::DuplicateKey(3));
        assert_eq!(t.keys(), before);
        assert_eq!(t.counters(), counters);
        assert_eq!(t.len(), 3);
    }

    #[test]
    fn rotate_right_on_left_chain() {
        let (mut t, _) = build(0.0, &[3, 2, 1]);
        let root = t.root().unwrap();
        let size_before = t.node(root).size();
        let new_root = t.rotate_right(root).unwrap();
        assert_eq!(t.root(), Some(new_root));
        let n = t.node(new_root);
        assert_eq!(n.key(), 2);
        assert_eq!(t.node(n.left().unwrap()).key(), 1);
        assert_eq!(t.node(n.right().unwrap()).key(), 3);
        assert_eq!(n.height(), 1);
        assert_eq!(n.size(), size_before);
        assert!(t.validate().cache_consistent);
    }

    #[test]
    fn rotate_without_child_is_structural_error() {
        let (mut t, _) = build(0.0, &[1, 2]);
        let root = t.root().unwrap();
        assert_eq!(t.rotate_right(root).unwrap_err(), TreeError::MissingLeftChild);
        let (mut t, _) = build(0.0, &[2, 1]);
        let root = t.root().unwrap();
        assert_eq!(t.rotate_left(root).unwrap_err(), TreeError::MissingRightChild);
    }

    #[test]
    fn rotate_left_on_right_spine_keeps_order() {
        let (mut t, _) = build(0.0, &[1, 2, 3, 4]);
        let before = t.keys();
        let root = t.root().unwrap();
        let new_root = t.rotate_left(root).unwrap();
        assert_eq!(t.node(new_root).key(), 2);
        assert_eq!(t.keys(), before);
        let v = t.validate();
        assert!(v.cache_consistent && v.keys_ordered);
    }

    #[test]
    fn rotation_below_root_refreshes_ancestors() {
        let (mut t, _) = build(0.0, &[10, 5, 4, 3]);
        let five = t.find(5).unwrap();
        t.rotate_right(five).unwrap();
        let v = t.validate();
        assert!(v.cache_consistent);
        assert_eq!(t.height(), 2);
    }

    #[test]
    fn repair_single_when_child_leans_same_way() {
        let (mut t, _) = build(0.0, &[3, 2, 1]);
        let root = t.root().unwrap();
        assert_eq!(t.balance_factor(root), 2);
        assert_eq!(t.balance_factor(t.node(root).left().unwrap()), 1);
        let (new_root, kind) = t.repair(root).unwrap();
        assert_eq!(kind, RotationKind::Single);
        assert_eq!(t.balance_factor(new_root), 0);
        assert_eq!(t.counters().rotations_total, 1);
    }

    #[test]
    fn repair_double_when_child_leans_opposite() {
        let (mut t, _) = build(0.0, &[3, 1, 2]);
        let root = t.root().unwrap();
        assert_eq!(t.balance_factor(root), 2);
        assert_eq!(t.balance_factor(t.node(root).left().unwrap()), -1);
        let (new_root, kind) = t.repair(root).unwrap();
        assert_eq!(kind, RotationKind::Double);
        assert_eq!(t.node(new_root).key(), 2);
        assert_eq!(t.counters().rotations_total, 2);
        assert_eq!(t.counters().double_rotations, 1);
    }

    #[test]
    fn repair_on_balanced_node_is_contract_error() {
        let (mut t, _) = build(1.0, &[2, 1, 3]);
        let root = t.root().unwrap();
        assert_eq!(t.repair(root).unwrap_err(), TreeError::NotImbalanced(0));
    }

    #[test]
    fn repair_performs_one_action_on_heavy_imbalance() {
        // Left chain of 5 at the root: BF = 4. One single rotation leaves the
        // node still imbalanced; no follow-up repair is applied.
        let (mut t, _) = build(0.0, &[5, 4, 3, 2, 1]);
        let root = t.root().unwrap();
        assert_eq!(t.balance_factor(root), 4);
        let (new_root, kind) = t.repair(root).unwrap();
        assert_eq!(kind, RotationKind::Single);
        assert_eq!(t.node(new_root).key(), 4);
        assert_eq!(t.balance_factor(new_root), 2);
        assert_eq!(t.counters().rotations_total, 1);
    }

    #[test]
    fn validate_empty_tree() {
        let t = PavlTree::new(0.5, 1).unwrap();
        let v = t.validate();
        assert_eq!(v.node_count, 0);
        assert!(v.cache_consistent && v.keys_ordered);
        assert_eq!(t.height(), -1);
    }

    #[test]
    fn validate_detects_corrupted_height() {
        let (mut t, _) = build(1.0, &[4, 2, 6, 1, 3]);
        assert!(t.validate().cache_consistent);
        let id = t.find(2).unwrap();
        t.node_mut(id).height = 7;
        assert!(!t.validate().cache_consistent);
    }

    #[test]
    fn validate_detects_corrupted_size() {
        let (mut t, _) = build(1.0, &[4, 2, 6]);
        let id = t.find(6).unwrap();
        t.node_mut(id).size = 3;
        assert!(!t.validate().cache_consistent);
    }

    #[test]
    fn counters_stay_consistent_at_intermediate_p() {
        let keys: Vec<i64> = (0..2000).map(|i| (i * 7919) % 2003).collect();
        let (t, reports) = build(0.3, &keys);
        let c = t.counters();
        assert_eq!(c.rotations_total, c.single_rotations + 2 * c.double_rotations);
        assert!(c.repairs_fired <= c.imbalance_events);
        assert_eq!(reports.iter().map(|r| r.rotations).sum::<u64>(), c.rotations_total);
        assert_eq!(reports.iter().map(|r| r.imbalance_events).sum::<u64>(), c.imbalance_events);
        let v = t.validate();
        assert!(v.cache_consistent && v.keys_ordered);
        assert_eq!(v.node_count, 2000);
    }

    #[test]
    fn deep_chain_does_not_overflow() {
        let keys: Vec<i64> = (0..20_000).collect();
        let (t, _) = build(0.0, &keys);
        assert_eq!(t.height(), 19_999);
        let v = t.validate();
        assert!(v.cache_consistent);
        assert_eq!(v.max_abs_balance, 19_999);
    }
}

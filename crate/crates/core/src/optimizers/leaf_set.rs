use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashSet};

use crate::partition::CellKey;

/// An active leaf and its optimistic value `f(x_{h,i}) + L·R·δ^h`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Leaf {
    pub key: CellKey,
    pub value: f64,
    pub b_value: f64,
}

impl Eq for Leaf {}

impl Ord for Leaf {
    // Max-heap order: larger b-value first, then smaller depth, then smaller index.
    fn cmp(&self, other: &Self) -> Ordering {
        self.b_value
            .total_cmp(&other.b_value)
            .then_with(|| other.key.depth.cmp(&self.key.depth))
            .then_with(|| other.key.index.cmp(&self.key.index))
    }
}

impl PartialOrd for Leaf {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Priority structure over active leaves.
#[derive(Debug, Default)]
pub struct ActiveLeafSet {
    heap: BinaryHeap<Leaf>,
    seen: HashSet<CellKey>,
}

impl ActiveLeafSet {
    pub fn new() -> Self {
        Self::default()
    }

    /// Inserts a leaf; returns `false` if the key was inserted before.
    pub fn insert(&mut self, leaf: Leaf) -> bool {
        if !self.seen.insert(leaf.key) {
            return false;
        }
        self.heap.push(leaf);
        true
    }

    pub fn pop(&mut self) -> Option<Leaf> {
        self.heap.pop()
    }

    pub fn peek(&self) -> Option<&Leaf> {
        self.heap.peek()
    }

    pub fn len(&self) -> usize {
        self.heap.len()
    }

    pub fn is_empty(&self) -> bool {
        self.heap.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Leaf> {
        self.heap.iter()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn leaf(depth: u32, index: u64, b: f64) -> Leaf {
        Leaf {
            key: CellKey::new(depth, index),
            value: 0.0,
            b_value: b,
        }
    }

    #[test]
    fn tie_break_prefers_shallow_then_low_index() {
        let mut s = ActiveLeafSet::new();
        s.insert(leaf(2, 0, 1.0));
        s.insert(leaf(1, 1, 1.0));
        s.insert(leaf(1, 0, 1.0));
        assert_eq!(s.pop().unwrap().key, CellKey::new(1, 0));
        assert_eq!(s.pop().unwrap().key, CellKey::new(1, 1));
        assert_eq!(s.pop().unwrap().key, CellKey::new(2, 0));
    }

    #[test]
    fn duplicate_keys_rejected() {
        let mut s = ActiveLeafSet::new();
        assert!(s.insert(leaf(1, 0, 1.0)));
        s.pop();
        assert!(!s.insert(leaf(1, 0, 2.0)));
        assert!(s.is_empty());
    }

    proptest! {
        #[test]
        fn pop_matches_linear_scan(items in prop::collection::vec((0u32..4, 0u64..8, -4i32..4), 1..40)) {
            let mut s = ActiveLeafSet::new();
            let mut all = Vec::new();
            for (d, i, b) in items {
                let l = leaf(d, i, b as f64 * 0.25);
                if s.insert(l) {
                    all.push(l);
                }
            }
            while let Some(top) = s.pop() {
                let bmax = all.iter().map(|l| l.b_value).fold(f64::NEG_INFINITY, f64::max);
                let best = all
                    .iter()
                    .filter(|l| l.b_value == bmax)
                    .min_by_key(|l| (l.key.depth, l.key.index))
                    .unwrap();
                prop_assert_eq!(top.key, best.key);
                all.retain(|l| l.key != top.key);
            }
        }
    }
}

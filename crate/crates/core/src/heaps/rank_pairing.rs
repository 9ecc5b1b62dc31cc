//! Rank-pairing heaps, type-1 and type-2 rank rules.
//!
//! Each tree is a half-ordered binary tree: a node's key is smaller than
//! every key in its left subtree, and a root has no right child. Roots form
//! a circular ring through their otherwise unused `right` pointers.
//!
//! Decrease-key makes exactly one cut (the node's right child takes its
//! place) and then restores ranks along the old parent path; no cascading
//! cuts ever happen.
//!
//! Rank of a missing child is -1. A root's rank is one more than its left
//! child's. A non-root's rank is determined by its children's ranks:
//! type-1 gives max+1 when they are equal and max otherwise; type-2 gives
//! max+1 when they differ by at most one and max otherwise. Equivalently,
//! the child rank differences are {1,1} or {0,i} for type-1, and {1,1},
//! {1,2}, or {0,i} for type-2.

use crate::error::HeapError;
use crate::heap::{Handle, HeapStats, OpCounters, PriorityQueue, Violation};
use crate::heaps::check_decreased;
use crate::key::{ItemId, Key64};
use crate::pool::{NodePool, PoolStrategy, SlotRef, NIL};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RankRule {
    Type1,
    Type2,
}

impl RankRule {
    /// Rank a non-root node must carry given its children's ranks.
    fn formula(self, rl: i32, rr: i32) -> i32 {
        let max = rl.max(rr);
        match self {
            RankRule::Type1 => {
                if rl == rr {
                    max + 1
                } else {
                    max
                }
            }
            RankRule::Type2 => {
                if (rl - rr).abs() <= 1 {
                    max + 1
                } else {
                    max
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct RpNode {
    key: u64,
    item: ItemId,
    parent: SlotRef,
    left: SlotRef,
    right: SlotRef, // binary-view right child; ring pointer while a root
    rank: i32,
}

impl Default for RpNode {
    fn default() -> Self {
        RpNode {
            key: 0,
            item: 0,
            parent: NIL,
            left: NIL,
            right: NIL,
            rank: 0,
        }
    }
}

pub struct RankPairingHeap {
    rule: RankRule,
    min: SlotRef,
    size: usize,
    pool: NodePool<RpNode>,
    counters: OpCounters,
    buckets: Vec<SlotRef>,
    scratch: Vec<SlotRef>,
}

impl RankPairingHeap {
    pub fn new(
        rule: RankRule,
        capacity_hint: usize,
        pad_factor: usize,
        strategy: PoolStrategy,
    ) -> Self {
        RankPairingHeap {
            rule,
            min: NIL,
            size: 0,
            pool: NodePool::new(capacity_hint, pad_factor, strategy),
            counters: OpCounters::default(),
            buckets: Vec::new(),
            scratch: Vec::new(),
        }
    }

    fn rank_of(&self, x: SlotRef) -> i32 {
        if x == NIL {
            -1
        } else {
            self.pool.get(x).rank
        }
    }

    /// Splices root `x` into the ring and maintains the minimum.
    fn add_root(&mut self, x: SlotRef) {
        if self.min == NIL {
            self.pool.get_mut(x).right = x;
            self.min = x;
            return;
        }
        let after = self.pool.get(self.min).right;
        self.pool.get_mut(x).right = after;
        self.pool.get_mut(self.min).right = x;
        self.counters.comparisons += 1;
        if self.pool.get(x).key < self.pool.get(self.min).key {
            self.min = x;
        }
    }

    /// Fair link of two equal-rank roots. The loser becomes the winner's
    /// left child and inherits the winner's old left child on its right.
    fn link(&mut self, a: SlotRef, b: SlotRef) -> SlotRef {
        debug_assert_eq!(self.pool.get(a).rank, self.pool.get(b).rank);
        self.counters.comparisons += 1;
        self.counters.links += 1;
        let (winner, loser) = if self.pool.get(a).key < self.pool.get(b).key {
            (a, b)
        } else {
            (b, a)
        };
        let wl = self.pool.get(winner).left;
        {
            let l = self.pool.get_mut(loser);
            l.right = wl;
            l.parent = winner;
        }
        if wl != NIL {
            self.pool.get_mut(wl).parent = loser;
        }
        let w = self.pool.get_mut(winner);
        w.left = loser;
        w.rank += 1;
        winner
    }

    /// Restores ranks from `u` toward the root after a child rank dropped.
    fn propagate_ranks(&mut self, mut u: SlotRef) {
        while u != NIL {
            let n = *self.pool.get(u);
            if n.parent == NIL {
                self.pool.get_mut(u).rank = self.rank_of(n.left) + 1;
                return;
            }
            let k = self
                .rule
                .formula(self.rank_of(n.left), self.rank_of(n.right));
            if k == n.rank {
                return;
            }
            self.pool.get_mut(u).rank = k;
            u = n.parent;
        }
    }

    fn subtree_min(&self, x: SlotRef, v: &mut Vec<Violation>, count: &mut usize) -> u64 {
        let n = self.pool.get(x);
        *count += 1;
        let mut best = n.key;
        if n.left != NIL {
            let ln = self.pool.get(n.left);
            if ln.parent != x {
                v.push(Violation::new(
                    "parent-link",
                    format!("item {} has wrong parent", ln.item),
                ));
            }
            let lmin = self.subtree_min(n.left, v, count);
            if lmin <= n.key {
                v.push(Violation::new(
                    "half-order",
                    format!("item {}: left subtree holds a smaller key", n.item),
                ));
            }
            best = best.min(lmin);
        }
        // The right subtree is ordered against ancestors, not against x.
        if n.right != NIL && n.parent != NIL {
            let rn = self.pool.get(n.right);
            if rn.parent != x {
                v.push(Violation::new(
                    "parent-link",
                    format!("item {} has wrong parent", rn.item),
                ));
            }
            best = best.min(self.subtree_min(n.right, v, count));
        }
        if n.parent != NIL {
            let k = self
                .rule
                .formula(self.rank_of(n.left), self.rank_of(n.right));
            if n.rank != k {
                v.push(Violation::new(
                    "rank-rule",
                    format!(
                        "item {}: rank {} with child ranks {},{} (expected {})",
                        n.item,
                        n.rank,
                        self.rank_of(n.left),
                        self.rank_of(n.right),
                        k
                    ),
                ));
            }
        }
        best
    }
}

impl PriorityQueue for RankPairingHeap {
    fn insert(&mut self, item: ItemId, key: Key64) -> Result<Handle, HeapError> {
        let slot = self.pool.acquire()?;
        {
            let n = self.pool.get_mut(slot);
            n.key = key.raw;
            n.item = item;
        }
        self.add_root(slot);
        self.size += 1;
        Ok(Handle::new(slot, self.pool.generation(slot)))
    }

    fn delete_min(&mut self) -> Result<(ItemId, Key64), HeapError> {
        if self.min == NIL {
            return Err(HeapError::Underflow);
        }
        let z = self.min;
        let zn = *self.pool.get(z);
        debug_assert!(self.scratch.is_empty());
        // Surviving roots.
        let mut r = zn.right;
        while r != z {
            self.scratch.push(r);
            r = self.pool.get(r).right;
        }
        // The min's left spine: every spine node becomes a root and keeps
        // its left subtree.
        let mut x = zn.left;
        while x != NIL {
            let next = self.pool.get(x).right;
            let left = self.pool.get(x).left;
            let rank = self.rank_of(left) + 1;
            {
                let n = self.pool.get_mut(x);
                n.parent = NIL;
                n.right = NIL;
                n.rank = rank;
            }
            self.scratch.push(x);
            x = next;
        }
        // Multipass linking: resolve equal ranks until all are distinct.
        self.buckets.clear();
        let mut i = 0;
        while i < self.scratch.len() {
            let mut t = self.scratch[i];
            i += 1;
            loop {
                let rk = self.pool.get(t).rank as usize;
                if self.buckets.len() <= rk {
                    self.buckets.resize(rk + 1, NIL);
                }
                if self.buckets[rk] == NIL {
                    self.buckets[rk] = t;
                    break;
                }
                let other = self.buckets[rk];
                self.buckets[rk] = NIL;
                t = self.link(t, other);
            }
        }
        self.scratch.clear();
        self.min = NIL;
        for i in 0..self.buckets.len() {
            let b = self.buckets[i];
            if b != NIL {
                self.add_root(b);
            }
        }
        self.size -= 1;
        self.pool.release(z);
        Ok((zn.item, Key64::from_raw(zn.key)))
    }

    fn decrease_key(&mut self, handle: Handle, key: Key64) -> Result<(), HeapError> {
        let x = handle.slot();
        self.pool.check_generation(x, handle.generation())?;
        let current = self.pool.get(x).key;
        check_decreased(current, key.raw)?;
        self.pool.get_mut(x).key = key.raw;
        let p = self.pool.get(x).parent;
        if p == NIL {
            self.counters.comparisons += 1;
            if key.raw < self.pool.get(self.min).key {
                self.min = x;
            }
            return Ok(());
        }
        // One cut: the right child takes x's place under p.
        self.counters.cuts += 1;
        let y = self.pool.get(x).right;
        if self.pool.get(p).left == x {
            self.pool.get_mut(p).left = y;
        } else {
            self.pool.get_mut(p).right = y;
        }
        if y != NIL {
            self.pool.get_mut(y).parent = p;
        }
        let left = self.pool.get(x).left;
        let rank = self.rank_of(left) + 1;
        {
            let n = self.pool.get_mut(x);
            n.parent = NIL;
            n.right = NIL;
            n.rank = rank;
        }
        self.add_root(x);
        self.propagate_ranks(p);
        Ok(())
    }

    fn find_min(&self) -> Result<(ItemId, Key64), HeapError> {
        if self.min == NIL {
            return Err(HeapError::Underflow);
        }
        let n = self.pool.get(self.min);
        Ok((n.item, Key64::from_raw(n.key)))
    }

    fn len(&self) -> usize {
        self.size
    }

    fn clear(&mut self) {
        self.min = NIL;
        self.size = 0;
        self.buckets.clear();
        self.scratch.clear();
        self.pool.reset();
    }

    fn stats(&self) -> HeapStats {
        let pc = self.pool.counters();
        HeapStats {
            size: self.size as u64,
            comparisons: self.counters.comparisons,
            node_reads: pc.reads,
            node_writes: pc.writes,
            links: self.counters.links,
            cuts: self.counters.cuts,
            marks: self.counters.marks,
        }
    }

    fn validate(&self) -> Vec<Violation> {
        let mut v = Vec::new();
        if self.min == NIL {
            if self.size != 0 {
                v.push(Violation::new("shape", "no roots but nonzero size"));
            }
            return v;
        }
        let mut count = 0usize;
        let mut best: Option<u64> = None;
        let mut steps = 0usize;
        let mut r = self.min;
        loop {
            steps += 1;
            if steps > self.size {
                v.push(Violation::new("ring", "root ring does not close"));
                return v;
            }
            let rn = self.pool.get(r);
            if rn.parent != NIL {
                v.push(Violation::new("root-links", "root has a parent"));
            }
            if rn.rank != self.rank_of(rn.left) + 1 {
                v.push(Violation::new(
                    "root-rank",
                    format!("item {}: root rank not left rank + 1", rn.item),
                ));
            }
            count += 1;
            let mut tmin = rn.key;
            if rn.left != NIL {
                let lmin = self.subtree_min(rn.left, &mut v, &mut count);
                if lmin <= rn.key {
                    v.push(Violation::new(
                        "half-order",
                        format!("item {}: subtree holds a smaller key", rn.item),
                    ));
                }
                tmin = tmin.min(lmin);
            }
            if best.map_or(true, |b| tmin < b) {
                best = Some(tmin);
            }
            r = rn.right;
            if r == self.min {
                break;
            }
        }
        if count != self.size {
            v.push(Violation::new(
                "shape",
                format!("walked {count} nodes, size {}", self.size),
            ));
        }
        if best != Some(self.pool.get(self.min).key) {
            v.push(Violation::new("min-cache", "min pointer not at minimum"));
        }
        v
    }
}

//! Rank-relaxed weak queue: a forest of weak heaps (binomial-shaped trees in
//! binary view) with carry-style joins, where decrease-key marks a node as
//! potentially violating instead of restructuring, and marked nodes are
//! cleaned up lazily.
//!
//! Binary view: a node's `right` child heads its own child chain, and the
//! chain continues through `left` pointers (so `left` links siblings). The
//! distinguished ancestor of a node is the first ancestor reached through a
//! right edge — its binomial parent — and weak-heap order says every
//! unmarked non-root is larger than its distinguished ancestor.
//!
//! Cleanup transformation: at most one marked node is kept per rank. When a
//! decrease-key would mark a second node of some rank, both are spliced out
//! of their sibling chains (a splice preserves every distinguished-ancestor
//! relation, both inside and outside the moved subtree) and joined into one
//! tree of the next rank, which re-enters the root registry. Marked counts
//! therefore stay logarithmic. The price is that a node's rank label can
//! exceed its current subtree size once subtrees have been cut from under
//! it; ranks here order joins, they are not size claims.
//!
//! The minimum lives either at a root or at a marked node, so find-min
//! tracks a pointer over that candidate set.

use crate::error::HeapError;
use crate::heap::{Handle, HeapStats, OpCounters, PriorityQueue, Violation};
use crate::heaps::check_decreased;
use crate::key::{ItemId, Key64};
use crate::pool::{NodePool, PoolStrategy, SlotRef, NIL};

#[derive(Debug, Clone, Copy)]
struct WeakNode {
    key: u64,
    item: ItemId,
    parent: SlotRef,
    left: SlotRef,  // next sibling in a child chain
    right: SlotRef, // head of this node's own child chain
    rank: u32,
    marked: bool,
}

impl Default for WeakNode {
    fn default() -> Self {
        WeakNode {
            key: 0,
            item: 0,
            parent: NIL,
            left: NIL,
            right: NIL,
            rank: 0,
            marked: false,
        }
    }
}

pub struct WeakQueue {
    roots: Vec<SlotRef>, // at most one root per rank, carry joins on collision
    marks: Vec<SlotRef>, // at most one marked node per rank
    min: SlotRef,        // minimum over roots and marked nodes
    size: usize,
    pool: NodePool<WeakNode>,
    counters: OpCounters,
}

impl WeakQueue {
    pub fn new(capacity_hint: usize, pad_factor: usize, strategy: PoolStrategy) -> Self {
        WeakQueue {
            roots: Vec::new(),
            marks: Vec::new(),
            min: NIL,
            size: 0,
            pool: NodePool::new(capacity_hint, pad_factor, strategy),
            counters: OpCounters::default(),
        }
    }

    /// Joins two equal-rank roots; the loser heads the winner's child chain.
    fn join(&mut self, a: SlotRef, b: SlotRef) -> SlotRef {
        debug_assert_eq!(self.pool.get(a).rank, self.pool.get(b).rank);
        self.counters.comparisons += 1;
        self.counters.links += 1;
        let (w, l) = if self.pool.get(a).key < self.pool.get(b).key {
            (a, b)
        } else {
            (b, a)
        };
        let old = self.pool.get(w).right;
        {
            let ln = self.pool.get_mut(l);
            ln.left = old;
            ln.parent = w;
        }
        if old != NIL {
            self.pool.get_mut(old).parent = l;
        }
        let wn = self.pool.get_mut(w);
        wn.right = l;
        wn.rank += 1;
        w
    }

    /// Registers a detached root, resolving rank collisions with carry joins.
    fn add_root(&mut self, mut x: SlotRef) {
        loop {
            let r = self.pool.get(x).rank as usize;
            if self.roots.len() <= r {
                self.roots.resize(r + 1, NIL);
            }
            if self.roots[r] == NIL {
                self.roots[r] = x;
                return;
            }
            let y = self.roots[r];
            self.roots[r] = NIL;
            x = self.join(x, y);
        }
    }

    /// First ancestor reached through a right edge; NIL for roots and nodes
    /// on a root's left spine (which have none).
    fn d_ancestor(&self, mut x: SlotRef) -> SlotRef {
        loop {
            let p = self.pool.get(x).parent;
            if p == NIL {
                return NIL;
            }
            if self.pool.get(p).right == x {
                return p;
            }
            x = p;
        }
    }

    /// Splices the binomial subtree of non-root `x` out of its sibling
    /// chain, leaving `x` a detached root. Distinguished-ancestor relations
    /// of every other node are unchanged.
    fn splice_out(&mut self, x: SlotRef) {
        self.counters.cuts += 1;
        let (p, l) = {
            let n = self.pool.get(x);
            (n.parent, n.left)
        };
        if self.pool.get(p).right == x {
            self.pool.get_mut(p).right = l;
        } else {
            debug_assert_eq!(self.pool.get(p).left, x);
            self.pool.get_mut(p).left = l;
        }
        if l != NIL {
            self.pool.get_mut(l).parent = p;
        }
        let n = self.pool.get_mut(x);
        n.parent = NIL;
        n.left = NIL;
    }

    fn unmark(&mut self, x: SlotRef) {
        let r = self.pool.get(x).rank as usize;
        self.pool.get_mut(x).marked = false;
        if self.marks.get(r).copied() == Some(x) {
            self.marks[r] = NIL;
        }
    }

    fn update_min(&mut self, x: SlotRef) {
        if self.min == NIL {
            self.min = x;
            return;
        }
        if self.min == x {
            return;
        }
        self.counters.comparisons += 1;
        if self.pool.get(x).key < self.pool.get(self.min).key {
            self.min = x;
        }
    }

    fn rescan_min(&mut self) {
        self.min = NIL;
        let mut best = u64::MAX;
        let candidates = self
            .roots
            .iter()
            .chain(self.marks.iter())
            .copied()
            .filter(|&s| s != NIL)
            .collect::<Vec<_>>();
        for c in candidates {
            let k = self.pool.get(c).key;
            if self.min == NIL {
                self.min = c;
                best = k;
            } else {
                self.counters.comparisons += 1;
                if k < best {
                    self.min = c;
                    best = k;
                }
            }
        }
    }

    /// Deletes a detached root: its children become roots again.
    fn dismantle_root(&mut self, z: SlotRef) {
        let mut c = self.pool.get(z).right;
        while c != NIL {
            let next = self.pool.get(c).left;
            {
                let n = self.pool.get_mut(c);
                n.parent = NIL;
                n.left = NIL;
            }
            if self.pool.get(c).marked {
                self.unmark(c);
            }
            self.add_root(c);
            c = next;
        }
    }

    fn collect_subtree(&self, x: SlotRef, out: &mut Vec<SlotRef>) {
        out.push(x);
        let mut c = self.pool.get(x).right;
        while c != NIL {
            self.collect_subtree(c, out);
            c = self.pool.get(c).left;
        }
    }
}

impl PriorityQueue for WeakQueue {
    fn insert(&mut self, item: ItemId, key: Key64) -> Result<Handle, HeapError> {
        let slot = self.pool.acquire()?;
        {
            let n = self.pool.get_mut(slot);
            n.key = key.raw;
            n.item = item;
        }
        self.add_root(slot);
        self.size += 1;
        // If the new key is the smallest, the new node won every carry join
        // and is a root; otherwise the minimum is unchanged.
        self.update_min(slot);
        Ok(Handle::new(slot, self.pool.generation(slot)))
    }

    fn delete_min(&mut self) -> Result<(ItemId, Key64), HeapError> {
        if self.min == NIL {
            return Err(HeapError::Underflow);
        }
        let z = self.min;
        let zn = *self.pool.get(z);
        if zn.parent == NIL {
            let r = zn.rank as usize;
            debug_assert_eq!(self.roots[r], z);
            self.roots[r] = NIL;
        } else {
            // The minimum sits at a marked node: cut its subtree free first.
            self.splice_out(z);
            self.unmark(z);
        }
        self.dismantle_root(z);
        self.size -= 1;
        self.pool.release(z);
        self.rescan_min();
        Ok((zn.item, Key64::from_raw(zn.key)))
    }

    fn decrease_key(&mut self, handle: Handle, key: Key64) -> Result<(), HeapError> {
        let x = handle.slot();
        self.pool.check_generation(x, handle.generation())?;
        let current = self.pool.get(x).key;
        check_decreased(current, key.raw)?;
        self.pool.get_mut(x).key = key.raw;
        let n = *self.pool.get(x);
        if n.parent == NIL || n.marked {
            // Roots and already-marked nodes are already minimum candidates.
            self.update_min(x);
            return Ok(());
        }
        let a = self.d_ancestor(x);
        if a == NIL {
            // Left spine of a root: ordered against nothing above it, treat
            // like a root for minimum tracking once it could be smaller.
            self.update_min(x);
            return Ok(());
        }
        self.counters.comparisons += 1;
        if key.raw > self.pool.get(a).key {
            return Ok(()); // weak-heap order intact
        }
        // Mark, keeping at most one marked node per rank.
        let r = n.rank as usize;
        if self.marks.len() <= r {
            self.marks.resize(r + 1, NIL);
        }
        if self.marks[r] == NIL {
            self.pool.get_mut(x).marked = true;
            self.counters.marks += 1;
            self.marks[r] = x;
            self.update_min(x);
        } else {
            // Pair cleanup: splice both subtrees out and join them.
            let y = self.marks[r];
            self.marks[r] = NIL;
            self.pool.get_mut(y).marked = false;
            self.splice_out(x);
            self.splice_out(y);
            let w = self.join(x, y);
            self.add_root(w);
            self.update_min(w);
        }
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
        self.roots.clear();
        self.marks.clear();
        self.min = NIL;
        self.size = 0;
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
        let mut all = Vec::new();
        for (r, &root) in self.roots.iter().enumerate() {
            if root == NIL {
                continue;
            }
            let rn = self.pool.get(root);
            if rn.parent != NIL || rn.left != NIL {
                v.push(Violation::new("root-links", "root has parent or left link"));
            }
            if rn.rank as usize != r {
                v.push(Violation::new(
                    "registry",
                    format!("rank {} root in slot {r}", rn.rank),
                ));
            }
            if rn.marked {
                v.push(Violation::new("marks", "marked root"));
            }
            self.collect_subtree(root, &mut all);
        }
        if all.len() != self.size {
            v.push(Violation::new(
                "shape",
                format!("walked {} nodes, size {}", all.len(), self.size),
            ));
            return v;
        }
        let mut marked_count = 0usize;
        let mut best = u64::MAX;
        for &x in &all {
            let n = self.pool.get(x);
            // Child chains carry strictly decreasing ranks.
            if n.right != NIL {
                let mut c = n.right;
                let mut last: Option<u32> = None;
                while c != NIL {
                    let cn = self.pool.get(c);
                    if let Some(lr) = last {
                        if cn.rank >= lr {
                            v.push(Violation::new(
                                "chain-ranks",
                                format!("item {}: sibling ranks not decreasing", cn.item),
                            ));
                        }
                    } else if cn.parent != x {
                        v.push(Violation::new(
                            "parent-link",
                            format!("item {} chain head has wrong parent", cn.item),
                        ));
                    }
                    if cn.rank >= n.rank {
                        v.push(Violation::new(
                            "chain-ranks",
                            format!("item {}: child rank not below parent rank", cn.item),
                        ));
                    }
                    let nxt = cn.left;
                    if nxt != NIL && self.pool.get(nxt).parent != c {
                        v.push(Violation::new(
                            "parent-link",
                            format!("sibling of item {} has wrong parent", cn.item),
                        ));
                    }
                    last = Some(cn.rank);
                    c = nxt;
                }
            }
            if n.marked {
                marked_count += 1;
                if self.marks.get(n.rank as usize).copied() != Some(x) {
                    v.push(Violation::new(
                        "marks",
                        format!("marked item {} missing from the rank registry", n.item),
                    ));
                }
            } else {
                let a = self.d_ancestor(x);
                if a != NIL && self.pool.get(a).key >= n.key {
                    v.push(Violation::new(
                        "weak-order",
                        format!("item {} not above its distinguished ancestor", n.item),
                    ));
                }
            }
            let candidate = n.parent == NIL || n.marked || self.d_ancestor(x) == NIL;
            if candidate && n.key < best {
                best = n.key;
            }
        }
        let registered = self.marks.iter().filter(|&&m| m != NIL).count();
        if registered != marked_count {
            v.push(Violation::new(
                "marks",
                format!("{registered} registered marks, {marked_count} marked nodes"),
            ));
        }
        if self.size > 0 {
            if self.min == NIL {
                v.push(Violation::new("min-cache", "no min pointer"));
            } else if self.pool.get(self.min).key > best {
                v.push(Violation::new("min-cache", "min pointer not at minimum"));
            }
        }
        v
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::key::make_key;

    fn heap() -> WeakQueue {
        WeakQueue::new(256, 1, PoolStrategy::Eager)
    }

    #[test]
    fn carry_joins_mirror_binary_counter() {
        let mut h = heap();
        for i in 0..13u32 {
            h.insert(i, make_key(i, i)).unwrap();
            assert!(h.validate().is_empty(), "{:?}", h.validate());
        }
        let ranks: Vec<usize> = h
            .roots
            .iter()
            .enumerate()
            .filter(|(_, &r)| r != NIL)
            .map(|(i, _)| i)
            .collect();
        assert_eq!(ranks, vec![0, 2, 3]); // 13 = 0b1101
    }

    #[test]
    fn delete_min_order() {
        let mut h = heap();
        let keys = [41u32, 7, 29, 3, 55, 18, 90, 12, 6, 77, 2, 64, 31];
        for (i, k) in keys.iter().enumerate() {
            h.insert(i as u32, make_key(*k, i as u32)).unwrap();
        }
        let mut sorted = keys.to_vec();
        sorted.sort();
        for want in sorted {
            assert_eq!(h.delete_min().unwrap().1.key32(), want);
            assert!(h.validate().is_empty(), "{:?}", h.validate());
        }
    }

    #[test]
    fn violating_decrease_marks_instead_of_restructuring() {
        let mut h = heap();
        let mut handles = Vec::new();
        for i in 0..16u32 {
            handles.push(h.insert(i, make_key(100 + i, i)).unwrap());
        }
        let links0 = h.stats().links;
        // Item 15 lost the last join, so it sits right under the root chain.
        h.decrease_key(handles[15], make_key(1, 15)).unwrap();
        assert_eq!(h.stats().links, links0);
        assert!(h.stats().marks <= 1);
        assert_eq!(h.find_min().unwrap().0, 15);
        assert!(h.validate().is_empty(), "{:?}", h.validate());
        assert_eq!(h.delete_min().unwrap().0, 15);
        assert!(h.validate().is_empty(), "{:?}", h.validate());
    }

    #[test]
    fn second_mark_of_a_rank_triggers_cleanup() {
        let mut h = heap();
        let mut handles = Vec::new();
        for i in 0..32u32 {
            handles.push(h.insert(i, make_key(100 + i, i)).unwrap());
        }
        let mut transforms = 0;
        for i in (1..32u32).rev() {
            let before = h.stats().links;
            if h.decrease_key(handles[i as usize], make_key(32 - i, i)).is_ok()
                && h.stats().links > before
            {
                transforms += 1;
            }
            let marked = (0..32u32)
                .filter(|&s| h.pool.get(s).marked)
                .map(|s| h.pool.get(s).rank)
                .collect::<Vec<_>>();
            let mut dedup = marked.clone();
            dedup.sort();
            dedup.dedup();
            assert_eq!(dedup.len(), marked.len(), "two marks share a rank");
            assert!(h.validate().is_empty(), "{:?}", h.validate());
        }
        assert!(transforms > 0, "expected at least one pair cleanup");
        let mut out = Vec::new();
        while !h.is_empty() {
            out.push(h.delete_min().unwrap().0);
            assert!(h.validate().is_empty(), "{:?}", h.validate());
        }
        let mut expect: Vec<u32> = (1..32).rev().collect();
        expect.push(0);
        assert_eq!(out, expect);
    }
}

//! Violation heap: multiway trees joined by 3-way links, decrease-key by a
//! single cut-with-replacement plus downward rank adjustments along active
//! children — no cascading cuts, no mark bits.
//!
//! The root list is kept as a per-rank registry holding at most two trees
//! per rank; adding a third triggers the 3-way link immediately, so the
//! two-per-rank cap holds after every operation rather than only after
//! delete-min consolidation. Root ranks are frozen at their link-time value
//! (the registry is keyed by them); rank adjustments apply to non-roots.
//!
//! A node's first two children are its active children: a cut replaces the
//! node by its larger-rank active child, and rank updates walk upward only
//! while the current node sits in an active position.

use crate::error::HeapError;
use crate::heap::{Handle, HeapStats, OpCounters, PriorityQueue, Violation};
use crate::heaps::check_decreased;
use crate::key::{ItemId, Key64};
use crate::pool::{NodePool, PoolStrategy, SlotRef, NIL};

#[derive(Debug, Clone, Copy)]
struct VioNode {
    key: u64,
    item: ItemId,
    child: SlotRef,   // first (active) child
    sibling: SlotRef, // next sibling to the right
    prev: SlotRef,    // left sibling, or the parent for a first child
    rank: i32,
}

impl Default for VioNode {
    fn default() -> Self {
        VioNode {
            key: 0,
            item: 0,
            child: NIL,
            sibling: NIL,
            prev: NIL,
            rank: 0,
        }
    }
}

pub struct ViolationHeap {
    // roots[r] holds the roots of rank r; the eager 3-way link keeps each
    // bucket at two or fewer.
    roots: Vec<Vec<SlotRef>>,
    min: SlotRef,
    size: usize,
    pool: NodePool<VioNode>,
    counters: OpCounters,
}

/// Rank a node takes from its two active children (missing child = -1).
fn rank_formula(r1: i32, r2: i32) -> i32 {
    // ceil((r1 + r2) / 2) + 1, exact for negative sums too.
    (r1 + r2 + 1).div_euclid(2) + 1
}

impl ViolationHeap {
    pub fn new(capacity_hint: usize, pad_factor: usize, strategy: PoolStrategy) -> Self {
        ViolationHeap {
            roots: Vec::new(),
            min: NIL,
            size: 0,
            pool: NodePool::new(capacity_hint, pad_factor, strategy),
            counters: OpCounters::default(),
        }
    }

    fn active_child_ranks(&self, x: SlotRef) -> (i32, i32) {
        let c1 = self.pool.get(x).child;
        if c1 == NIL {
            return (-1, -1);
        }
        let n1 = self.pool.get(c1);
        let r2 = if n1.sibling == NIL {
            -1
        } else {
            self.pool.get(n1.sibling).rank
        };
        (n1.rank, r2)
    }

    /// Registers root `x`, 3-way linking whenever a rank bucket reaches
    /// three trees, and maintains the minimum pointer.
    fn add_root(&mut self, mut x: SlotRef) {
        loop {
            let r = self.pool.get(x).rank.max(0) as usize;
            if self.roots.len() <= r {
                self.roots.resize_with(r + 1, Vec::new);
            }
            if self.roots[r].len() < 2 {
                self.roots[r].push(x);
                break;
            }
            let b = self.roots[r].pop().unwrap();
            let a = self.roots[r].pop().unwrap();
            x = self.link3(a, b, x);
        }
        if self.min == NIL {
            self.min = x;
        } else if self.min != x {
            self.counters.comparisons += 1;
            if self.pool.get(x).key < self.pool.get(self.min).key {
                self.min = x;
            }
        }
    }

    /// Links three equal-rank roots: the smallest gains the other two as its
    /// new active children and one extra rank.
    fn link3(&mut self, a: SlotRef, b: SlotRef, c: SlotRef) -> SlotRef {
        self.counters.comparisons += 2;
        self.counters.links += 2;
        let ka = self.pool.get(a).key;
        let kb = self.pool.get(b).key;
        let kc = self.pool.get(c).key;
        let (w, l1, l2) = if ka < kb && ka < kc {
            (a, b, c)
        } else if kb < kc {
            (b, a, c)
        } else {
            (c, a, b)
        };
        let old_child = self.pool.get(w).child;
        {
            let n = self.pool.get_mut(l1);
            n.prev = w;
            n.sibling = l2;
        }
        {
            let n = self.pool.get_mut(l2);
            n.prev = l1;
            n.sibling = old_child;
        }
        if old_child != NIL {
            self.pool.get_mut(old_child).prev = l2;
        }
        let wn = self.pool.get_mut(w);
        wn.child = l1;
        wn.rank += 1;
        w
    }

    /// Parent of `x` if `x` sits in an active (first or second) position.
    fn active_parent(&self, x: SlotRef) -> Option<SlotRef> {
        let prev = self.pool.get(x).prev;
        if prev == NIL {
            return None; // root
        }
        if self.pool.get(prev).child == x {
            return Some(prev);
        }
        let pp = self.pool.get(prev).prev;
        if pp != NIL && self.pool.get(pp).child == prev {
            return Some(pp);
        }
        None
    }

    /// Parent of `x` found by walking the sibling chain to its head.
    fn parent_of(&self, x: SlotRef) -> SlotRef {
        let mut cur = x;
        loop {
            let prev = self.pool.get(cur).prev;
            if prev == NIL {
                return NIL;
            }
            if self.pool.get(prev).child == cur {
                return prev;
            }
            cur = prev;
        }
    }

    /// Removes root `x` from its registry bucket.
    fn unregister(&mut self, x: SlotRef) {
        let r = self.pool.get(x).rank.max(0) as usize;
        let bucket = &mut self.roots[r];
        let pos = bucket.iter().position(|&s| s == x).expect("root registered");
        bucket.swap_remove(pos);
    }

    fn rescan_min(&mut self) {
        self.min = NIL;
        let mut best = u64::MAX;
        for bucket in &self.roots {
            for &r in bucket {
                let k = self.pool.get(r).key;
                if self.min == NIL {
                    self.min = r;
                    best = k;
                } else {
                    self.counters.comparisons += 1;
                    if k < best {
                        self.min = r;
                        best = k;
                    }
                }
            }
        }
    }

    /// Detaches non-root `x`, promoting its larger-rank active child into
    /// its place, and walks rank updates up through active positions.
    fn cut_with_replacement(&mut self, x: SlotRef) {
        self.counters.cuts += 1;
        let xn = *self.pool.get(x);
        // Pick the replacement before touching any links.
        let replacement = {
            let c1 = xn.child;
            if c1 == NIL {
                NIL
            } else {
                let n1 = self.pool.get(c1);
                if n1.sibling == NIL {
                    c1
                } else if self.pool.get(n1.sibling).rank > n1.rank {
                    n1.sibling
                } else {
                    c1
                }
            }
        };
        let start = self.active_parent(x).or_else(|| {
            let p = self.parent_of(x);
            (p != NIL).then_some(p)
        });
        if replacement == NIL {
            // Plain removal from the sibling chain.
            if self.pool.get(xn.prev).child == x {
                self.pool.get_mut(xn.prev).child = xn.sibling;
            } else {
                self.pool.get_mut(xn.prev).sibling = xn.sibling;
            }
            if xn.sibling != NIL {
                self.pool.get_mut(xn.sibling).prev = xn.prev;
            }
        } else {
            // Detach the replacement from x's child list, then slot it in
            // where x was.
            let rn = *self.pool.get(replacement);
            if xn.child == replacement {
                self.pool.get_mut(x).child = rn.sibling;
                if rn.sibling != NIL {
                    self.pool.get_mut(rn.sibling).prev = x;
                }
            } else {
                self.pool.get_mut(rn.prev).sibling = rn.sibling;
                if rn.sibling != NIL {
                    self.pool.get_mut(rn.sibling).prev = rn.prev;
                }
            }
            {
                let r = self.pool.get_mut(replacement);
                r.prev = xn.prev;
                r.sibling = xn.sibling;
            }
            if self.pool.get(xn.prev).child == x {
                self.pool.get_mut(xn.prev).child = replacement;
            } else {
                self.pool.get_mut(xn.prev).sibling = replacement;
            }
            if xn.sibling != NIL {
                self.pool.get_mut(xn.sibling).prev = replacement;
            }
        }
        // x becomes a root with a freshly computed rank.
        let (r1, r2) = self.active_child_ranks(x);
        {
            let n = self.pool.get_mut(x);
            n.prev = NIL;
            n.sibling = NIL;
            n.rank = rank_formula(r1, r2);
        }
        // Rank updates climb only while positions stay active and ranks
        // keep shrinking; root ranks stay frozen.
        let mut u = start;
        while let Some(cur) = u {
            if self.pool.get(cur).prev == NIL {
                break; // root: registry-keyed rank, leave it
            }
            let (r1, r2) = self.active_child_ranks(cur);
            let new = rank_formula(r1, r2);
            if new >= self.pool.get(cur).rank {
                break;
            }
            self.pool.get_mut(cur).rank = new;
            u = self.active_parent(cur);
        }
    }

    fn validate_tree(&self, x: SlotRef, v: &mut Vec<Violation>, count: &mut usize) {
        *count += 1;
        if *count > self.size {
            return;
        }
        let n = self.pool.get(x);
        let mut c = n.child;
        let mut expected_prev = x;
        while c != NIL {
            let cn = self.pool.get(c);
            if cn.prev != expected_prev {
                v.push(Violation::new(
                    "prev-link",
                    format!("item {} has wrong prev", cn.item),
                ));
            }
            if cn.key <= n.key {
                v.push(Violation::new(
                    "heap-order",
                    format!("item {} not below its parent", cn.item),
                ));
            }
            self.validate_tree(c, v, count);
            expected_prev = c;
            c = cn.sibling;
        }
    }
}

impl PriorityQueue for ViolationHeap {
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
        self.unregister(z);
        let mut c = zn.child;
        while c != NIL {
            let next = self.pool.get(c).sibling;
            {
                let n = self.pool.get_mut(c);
                n.prev = NIL;
                n.sibling = NIL;
            }
            self.add_root(c);
            c = next;
        }
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
        if self.pool.get(x).prev == NIL {
            // Root: only the minimum pointer can change.
            self.counters.comparisons += 1;
            if key.raw < self.pool.get(self.min).key {
                self.min = x;
            }
            return Ok(());
        }
        let p = self.parent_of(x);
        self.counters.comparisons += 1;
        if key.raw >= self.pool.get(p).key {
            return Ok(()); // heap order intact, nothing to restructure
        }
        self.cut_with_replacement(x);
        self.add_root(x);
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
        let mut count = 0usize;
        let mut best: Option<u64> = None;
        for (rank, bucket) in self.roots.iter().enumerate() {
            if bucket.len() > 2 {
                v.push(Violation::new(
                    "two-per-rank",
                    format!("{} roots of rank {rank}", bucket.len()),
                ));
            }
            for &r in bucket {
                let rn = self.pool.get(r);
                if rn.prev != NIL || rn.sibling != NIL {
                    v.push(Violation::new("root-links", "root has prev or sibling"));
                }
                if rn.rank.max(0) as usize != rank {
                    v.push(Violation::new(
                        "registry",
                        format!("rank {} root in bucket {rank}", rn.rank),
                    ));
                }
                if best.map_or(true, |b| rn.key < b) {
                    best = Some(rn.key);
                }
                self.validate_tree(r, &mut v, &mut count);
            }
        }
        if count != self.size {
            v.push(Violation::new(
                "shape",
                format!("walked {count} nodes, size {}", self.size),
            ));
        }
        match best {
            None => {
                if self.min != NIL || self.size != 0 {
                    v.push(Violation::new("min-cache", "min pointer with no roots"));
                }
            }
            Some(b) => {
                if self.min == NIL || self.pool.get(self.min).key != b {
                    v.push(Violation::new("min-cache", "min pointer not at minimum"));
                }
            }
        }
        v
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::key::make_key;

    fn heap() -> ViolationHeap {
        ViolationHeap::new(256, 1, PoolStrategy::Eager)
    }

    #[test]
    fn three_way_link_picks_smallest() {
        let mut h = heap();
        for (i, k) in [5u32, 2, 9].iter().enumerate() {
            h.insert(i as u32, make_key(*k, i as u32)).unwrap();
        }
        // Three rank-0 singletons force one 3-way link into a rank-1 tree.
        assert_eq!(h.find_min().unwrap().1.key32(), 2);
        assert_eq!(h.roots[0].len(), 0);
        assert_eq!(h.roots[1].len(), 1);
        assert_eq!(h.stats().links, 2);
        assert!(h.validate().is_empty(), "{:?}", h.validate());
    }

    #[test]
    fn cap_holds_after_every_insert() {
        let mut h = heap();
        for i in 0..100u32 {
            h.insert(i, make_key(i * 7 % 101, i)).unwrap();
            for bucket in &h.roots {
                assert!(bucket.len() <= 2);
            }
            assert!(h.validate().is_empty(), "{:?}", h.validate());
        }
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
    fn decrease_key_cut_and_replacement() {
        let mut h = heap();
        let mut handles = Vec::new();
        for i in 0..27u32 {
            handles.push(h.insert(i, make_key(100 + i, i)).unwrap());
        }
        let cuts0 = h.stats().cuts;
        for &i in &[26u32, 13, 7, 20] {
            let before = h.stats().cuts;
            h.decrease_key(handles[i as usize], make_key(i, i)).unwrap();
            assert!(h.stats().cuts - before <= 1);
            assert!(h.validate().is_empty(), "{:?}", h.validate());
        }
        assert!(h.stats().cuts - cuts0 <= 4);
        assert_eq!(h.delete_min().unwrap().0, 7);
    }

    #[test]
    fn artificial_third_root_trips_validator() {
        let mut h = heap();
        for (i, k) in [5u32, 9].iter().enumerate() {
            h.insert(i as u32, make_key(*k, i as u32)).unwrap();
        }
        // Bypass linking: forge a third rank-0 root directly.
        let slot = h.pool.acquire().unwrap();
        {
            let n = h.pool.get_mut(slot);
            n.key = make_key(7, 2).raw;
            n.item = 2;
        }
        h.roots[0].push(slot);
        h.size += 1;
        assert!(h.validate().iter().any(|v| v.rule == "two-per-rank"));
    }
}

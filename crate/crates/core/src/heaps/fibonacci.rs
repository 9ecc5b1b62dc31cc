//! Fibonacci heap: lazy inserts, consolidation on delete-min, cascading cuts
//! with mark bits on decrease-key. Root and child lists are circular and
//! doubly linked.

use crate::error::HeapError;
use crate::heap::{Handle, HeapStats, OpCounters, PriorityQueue, Violation};
use crate::heaps::check_decreased;
use crate::key::{ItemId, Key64};
use crate::pool::{NodePool, PoolStrategy, SlotRef, NIL};

#[derive(Debug, Clone, Copy)]
struct FibNode {
    key: u64,
    item: ItemId,
    parent: SlotRef,
    child: SlotRef, // any one child; siblings via the circular list
    left: SlotRef,
    right: SlotRef,
    rank: u32,
    marked: bool,
}

impl Default for FibNode {
    fn default() -> Self {
        FibNode {
            key: 0,
            item: 0,
            parent: NIL,
            child: NIL,
            left: NIL,
            right: NIL,
            rank: 0,
            marked: false,
        }
    }
}

pub struct FibonacciHeap {
    min: SlotRef,
    size: usize,
    pool: NodePool<FibNode>,
    counters: OpCounters,
    scratch: Vec<SlotRef>,
    rank_table: Vec<SlotRef>,
}

impl FibonacciHeap {
    pub fn new(capacity_hint: usize, pad_factor: usize, strategy: PoolStrategy) -> Self {
        FibonacciHeap {
            min: NIL,
            size: 0,
            pool: NodePool::new(capacity_hint, pad_factor, strategy),
            counters: OpCounters::default(),
            scratch: Vec::new(),
            rank_table: Vec::new(),
        }
    }

    /// Inserts singleton `x` into the root list and maintains the minimum.
    fn add_root(&mut self, x: SlotRef) {
        if self.min == NIL {
            let n = self.pool.get_mut(x);
            n.left = x;
            n.right = x;
            self.min = x;
            return;
        }
        let right = self.pool.get(self.min).right;
        {
            let n = self.pool.get_mut(x);
            n.left = self.min;
            n.right = right;
        }
        self.pool.get_mut(right).left = x;
        self.pool.get_mut(self.min).right = x;
        self.counters.comparisons += 1;
        if self.pool.get(x).key < self.pool.get(self.min).key {
            self.min = x;
        }
    }

    fn remove_from_list(&mut self, x: SlotRef) {
        let (l, r) = {
            let n = self.pool.get(x);
            (n.left, n.right)
        };
        self.pool.get_mut(l).right = r;
        self.pool.get_mut(r).left = l;
    }

    /// Makes `loser` a child of `winner` (equal ranks, keys already compared).
    fn link_under(&mut self, winner: SlotRef, loser: SlotRef) {
        self.counters.links += 1;
        let wc = self.pool.get(winner).child;
        if wc == NIL {
            let l = self.pool.get_mut(loser);
            l.left = loser;
            l.right = loser;
        } else {
            let right = self.pool.get(wc).right;
            {
                let l = self.pool.get_mut(loser);
                l.left = wc;
                l.right = right;
            }
            self.pool.get_mut(right).left = loser;
            self.pool.get_mut(wc).right = loser;
        }
        {
            let l = self.pool.get_mut(loser);
            l.parent = winner;
            l.marked = false;
        }
        let w = self.pool.get_mut(winner);
        w.child = loser;
        w.rank += 1;
    }

    /// Repeatedly links equal-rank roots until all root ranks are distinct,
    /// then rebuilds the root list and the minimum pointer.
    fn consolidate(&mut self) {
        debug_assert!(self.scratch.is_empty());
        if self.min == NIL {
            return;
        }
        let start = self.min;
        let mut w = start;
        loop {
            self.scratch.push(w);
            w = self.pool.get(w).right;
            if w == start {
                break;
            }
        }
        self.rank_table.clear();
        for i in 0..self.scratch.len() {
            let mut x = self.scratch[i];
            loop {
                let r = self.pool.get(x).rank as usize;
                if self.rank_table.len() <= r {
                    self.rank_table.resize(r + 1, NIL);
                }
                let y = self.rank_table[r];
                if y == NIL {
                    self.rank_table[r] = x;
                    break;
                }
                self.rank_table[r] = NIL;
                self.counters.comparisons += 1;
                let (winner, loser) = if self.pool.get(x).key < self.pool.get(y).key {
                    (x, y)
                } else {
                    (y, x)
                };
                self.link_under(winner, loser);
                x = winner;
            }
        }
        self.scratch.clear();
        self.min = NIL;
        for i in 0..self.rank_table.len() {
            let r = self.rank_table[i];
            if r != NIL {
                self.add_root(r);
            }
        }
    }

    /// Moves `x` (a non-root) to the root list.
    fn cut(&mut self, x: SlotRef) {
        self.counters.cuts += 1;
        let p = self.pool.get(x).parent;
        let x_right = self.pool.get(x).right;
        self.remove_from_list(x);
        {
            let pn = self.pool.get_mut(p);
            pn.rank -= 1;
            if pn.child == x {
                pn.child = if x_right == x { NIL } else { x_right };
            }
        }
        {
            let n = self.pool.get_mut(x);
            n.parent = NIL;
            n.marked = false;
        }
        self.add_root(x);
    }

    fn cascading_cut(&mut self, mut p: SlotRef) {
        loop {
            let pn = *self.pool.get(p);
            if pn.parent == NIL {
                break;
            }
            if !pn.marked {
                self.pool.get_mut(p).marked = true;
                self.counters.marks += 1;
                break;
            }
            self.cut(p);
            p = pn.parent;
        }
    }

    fn validate_tree(
        &self,
        x: SlotRef,
        fib: &[u64],
        v: &mut Vec<Violation>,
        budget: &mut usize,
    ) -> u64 {
        if *budget == 0 {
            return 0;
        }
        *budget -= 1;
        let n = self.pool.get(x);
        let mut count = 1u64;
        let mut children = 0u32;
        let c0 = n.child;
        if c0 != NIL {
            let mut c = c0;
            loop {
                let cn = self.pool.get(c);
                children += 1;
                if cn.parent != x {
                    v.push(Violation::new(
                        "parent-link",
                        format!("item {} has wrong parent", cn.item),
                    ));
                }
                if cn.key <= n.key {
                    v.push(Violation::new(
                        "heap-order",
                        format!("item {} not below its parent", cn.item),
                    ));
                }
                if self.pool.get(cn.right).left != c {
                    v.push(Violation::new(
                        "list-links",
                        format!("broken circular list at item {}", cn.item),
                    ));
                }
                count += self.validate_tree(c, fib, v, budget);
                c = cn.right;
                if c == c0 || *budget == 0 {
                    break;
                }
            }
        }
        if children != n.rank {
            v.push(Violation::new(
                "rank",
                format!("item {}: rank {} but {} children", n.item, n.rank, children),
            ));
        }
        let bound = fib
            .get(n.rank as usize + 2)
            .copied()
            .unwrap_or(u64::MAX);
        if count < bound {
            v.push(Violation::new(
                "fibonacci-bound",
                format!(
                    "rank {} subtree at item {} has {} nodes, needs >= {}",
                    n.rank, n.item, count, bound
                ),
            ));
        }
        count
    }
}

impl PriorityQueue for FibonacciHeap {
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
        // Promote children into the root list.
        if zn.child != NIL {
            let mut c = zn.child;
            loop {
                let next = self.pool.get(c).right;
                self.pool.get_mut(c).parent = NIL;
                let min_right = self.pool.get(self.min).right;
                {
                    let cn = self.pool.get_mut(c);
                    cn.left = self.min;
                    cn.right = min_right;
                }
                self.pool.get_mut(min_right).left = c;
                self.pool.get_mut(self.min).right = c;
                if next == zn.child {
                    break;
                }
                c = next;
            }
        }
        self.remove_from_list(z);
        if z == self.pool.get(z).right && zn.child == NIL {
            self.min = NIL;
        } else {
            self.min = self.pool.get(z).right;
            self.consolidate();
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
        if p != NIL {
            self.counters.comparisons += 1;
            if key.raw < self.pool.get(p).key {
                self.cut(x);
                self.cascading_cut(p);
            }
        } else {
            self.counters.comparisons += 1;
            if key.raw < self.pool.get(self.min).key {
                self.min = x;
            }
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
        self.min = NIL;
        self.size = 0;
        self.scratch.clear();
        self.rank_table.clear();
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
        let mut fib = vec![0u64, 1];
        while fib.len() < 96 {
            fib.push(fib[fib.len() - 1].saturating_add(fib[fib.len() - 2]));
        }
        let mut total = 0u64;
        let mut best: Option<u64> = None;
        // Budget bounds the walk so a corrupted cycle terminates.
        let mut budget = self.size + 1;
        let mut r = self.min;
        loop {
            let rn = self.pool.get(r);
            if rn.parent != NIL {
                v.push(Violation::new("root-links", "root has a parent"));
            }
            if self.pool.get(rn.right).left != r {
                v.push(Violation::new("list-links", "broken root list"));
            }
            if best.map_or(true, |b| rn.key < b) {
                best = Some(rn.key);
            }
            total += self.validate_tree(r, &fib, &mut v, &mut budget);
            r = rn.right;
            if r == self.min || budget == 0 {
                break;
            }
        }
        if total != self.size as u64 {
            v.push(Violation::new(
                "shape",
                format!("walked {total} nodes, size {}", self.size),
            ));
        }
        if best != Some(self.pool.get(self.min).key) {
            v.push(Violation::new("min-cache", "min pointer not at minimum root"));
        }
        v
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::key::make_key;

    fn heap() -> FibonacciHeap {
        FibonacciHeap::new(256, 1, PoolStrategy::Eager)
    }

    #[test]
    fn lazy_insert_does_not_link() {
        let mut h = heap();
        for i in 0..10u32 {
            h.insert(i, make_key(10 - i, i)).unwrap();
        }
        assert_eq!(h.stats().links, 0);
        assert_eq!(h.find_min().unwrap().1.key32(), 1);
        assert!(h.validate().is_empty(), "{:?}", h.validate());
    }

    #[test]
    fn delete_min_consolidates_to_distinct_ranks() {
        let mut h = heap();
        for i in 0..9u32 {
            h.insert(i, make_key(i, i)).unwrap();
        }
        h.delete_min().unwrap();
        // 8 remaining nodes consolidate into a single rank-3 tree.
        assert!(h.validate().is_empty(), "{:?}", h.validate());
        let mut ranks = Vec::new();
        let mut r = h.min;
        loop {
            ranks.push(h.pool.get(r).rank);
            r = h.pool.get(r).right;
            if r == h.min {
                break;
            }
        }
        ranks.sort();
        assert_eq!(ranks, vec![3]);
    }

    #[test]
    fn cascading_cut_chain() {
        // Build a rank-3 tree, then cut grandchildren so that marked
        // ancestors cascade: the second cut in a marked parent's subtree
        // detaches the parent too.
        let mut h = heap();
        let mut handles = Vec::new();
        for i in 0..9u32 {
            handles.push(h.insert(i, make_key(10 + i, i)).unwrap());
        }
        h.delete_min().unwrap(); // consolidate the rest into one tree
        let cuts0 = h.stats().cuts;
        let marks0 = h.stats().marks;
        h.decrease_key(handles[8], make_key(1, 8)).unwrap();
        assert_eq!(h.stats().cuts - cuts0, 1);
        assert_eq!(h.stats().marks - marks0, 1);
        // Item 8 was the deepest leaf; its old parent (7) is now marked.
        // Cutting 7's remaining structure triggers the cascade.
        h.decrease_key(handles[7], make_key(2, 7)).unwrap();
        assert!(h.stats().cuts - cuts0 >= 2);
        assert!(h.validate().is_empty(), "{:?}", h.validate());
        let mut out = Vec::new();
        while !h.is_empty() {
            out.push(h.delete_min().unwrap().0);
        }
        assert_eq!(out, vec![8, 7, 1, 2, 3, 4, 5, 6]);
    }

    #[test]
    fn full_order_with_interleaved_decreases() {
        let mut h = heap();
        let mut handles = Vec::new();
        for i in 0..64u32 {
            handles.push(h.insert(i, make_key(1000 + i, i)).unwrap());
        }
        for _ in 0..8 {
            h.delete_min().unwrap();
        }
        for (j, &i) in [20u32, 35, 50, 63].iter().enumerate() {
            h.decrease_key(handles[i as usize], make_key(j as u32, i))
                .unwrap();
            assert!(h.validate().is_empty(), "{:?}", h.validate());
        }
        assert_eq!(h.delete_min().unwrap().0, 20);
        assert_eq!(h.delete_min().unwrap().0, 35);
        assert_eq!(h.delete_min().unwrap().0, 50);
        assert_eq!(h.delete_min().unwrap().0, 63);
        assert!(h.validate().is_empty(), "{:?}", h.validate());
    }
}

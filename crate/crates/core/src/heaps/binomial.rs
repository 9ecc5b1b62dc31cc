//! Binomial heap with eager carry linking and a cached minimum root.
//!
//! Decrease-key sifts the node toward the root by structural swaps (the node
//! and its parent exchange places in the tree) rather than by moving items
//! between nodes, so handles stay valid across restructuring. A swap costs
//! one child-list scan per level, which keeps decrease-key at O(log^2 n) in
//! exchange for stable handles.

use crate::error::HeapError;
use crate::heap::{Handle, HeapStats, OpCounters, PriorityQueue, Violation};
use crate::heaps::check_decreased;
use crate::key::{ItemId, Key64};
use crate::pool::{NodePool, PoolStrategy, SlotRef, NIL};

#[derive(Debug, Clone, Copy)]
struct BinomialNode {
    key: u64,
    item: ItemId,
    parent: SlotRef,
    child: SlotRef, // leftmost child, ranks decrease left to right
    sibling: SlotRef,
    rank: u32,
}

impl Default for BinomialNode {
    fn default() -> Self {
        BinomialNode {
            key: 0,
            item: 0,
            parent: NIL,
            child: NIL,
            sibling: NIL,
            rank: 0,
        }
    }
}

pub struct BinomialHeap {
    head: SlotRef, // root list, ranks strictly increasing
    min_root: SlotRef,
    size: usize,
    pool: NodePool<BinomialNode>,
    counters: OpCounters,
}

impl BinomialHeap {
    pub fn new(capacity_hint: usize, pad_factor: usize, strategy: PoolStrategy) -> Self {
        BinomialHeap {
            head: NIL,
            min_root: NIL,
            size: 0,
            pool: NodePool::new(capacity_hint, pad_factor, strategy),
            counters: OpCounters::default(),
        }
    }

    /// Makes `loser` the leftmost child of `winner`; both must have equal
    /// rank. The caller has already compared the keys.
    fn link_under(&mut self, winner: SlotRef, loser: SlotRef) {
        self.counters.links += 1;
        let old_child = self.pool.get(winner).child;
        {
            let l = self.pool.get_mut(loser);
            l.parent = winner;
            l.sibling = old_child;
        }
        let w = self.pool.get_mut(winner);
        w.child = loser;
        w.rank += 1;
    }

    /// Merges a rank-sorted root list into the heap and resolves equal-rank
    /// pairs with carry links, as in a binary addition.
    fn union(&mut self, other: SlotRef) {
        self.head = self.merge_lists(self.head, other);
        if self.head == NIL {
            return;
        }
        let mut prev = NIL;
        let mut x = self.head;
        let mut next = self.pool.get(x).sibling;
        while next != NIL {
            let xr = self.pool.get(x).rank;
            let nr = self.pool.get(next).rank;
            let nn = self.pool.get(next).sibling;
            let three_equal = nn != NIL && self.pool.get(nn).rank == xr;
            if xr != nr || three_equal {
                prev = x;
                x = next;
            } else {
                self.counters.comparisons += 1;
                if self.pool.get(x).key < self.pool.get(next).key {
                    self.pool.get_mut(x).sibling = nn;
                    self.link_under(x, next);
                } else {
                    if prev == NIL {
                        self.head = next;
                    } else {
                        self.pool.get_mut(prev).sibling = next;
                    }
                    self.link_under(next, x);
                    x = next;
                }
            }
            next = self.pool.get(x).sibling;
        }
    }

    /// Merges two rank-sorted lists into one (no linking yet).
    fn merge_lists(&mut self, a: SlotRef, b: SlotRef) -> SlotRef {
        if a == NIL {
            return b;
        }
        if b == NIL {
            return a;
        }
        let mut a = a;
        let mut b = b;
        let head;
        if self.pool.get(a).rank <= self.pool.get(b).rank {
            head = a;
            a = self.pool.get(a).sibling;
        } else {
            head = b;
            b = self.pool.get(b).sibling;
        }
        let mut tail = head;
        while a != NIL && b != NIL {
            let pick = if self.pool.get(a).rank <= self.pool.get(b).rank {
                let p = a;
                a = self.pool.get(a).sibling;
                p
            } else {
                let p = b;
                b = self.pool.get(b).sibling;
                p
            };
            self.pool.get_mut(tail).sibling = pick;
            tail = pick;
        }
        let rest = if a != NIL { a } else { b };
        self.pool.get_mut(tail).sibling = rest;
        head
    }

    fn rescan_min(&mut self) {
        self.min_root = NIL;
        let mut r = self.head;
        let mut best = u64::MAX;
        while r != NIL {
            let n = self.pool.get(r);
            if self.min_root == NIL {
                self.min_root = r;
                best = n.key;
            } else {
                self.counters.comparisons += 1;
                if n.key < best {
                    self.min_root = r;
                    best = n.key;
                }
            }
            r = n.sibling;
        }
    }

    /// Predecessor of `x` in the sibling list starting at `first`.
    fn list_pred(&self, first: SlotRef, x: SlotRef) -> SlotRef {
        if first == x {
            return NIL;
        }
        let mut cur = first;
        loop {
            let next = self.pool.get(cur).sibling;
            if next == x {
                return cur;
            }
            debug_assert!(next != NIL, "node not found in sibling list");
            cur = next;
        }
    }

    /// Swaps child `c` with its parent `p` structurally: they exchange tree
    /// positions and ranks, items stay in their nodes.
    fn swap_with_parent(&mut self, p: SlotRef, c: SlotRef) {
        let pn = *self.pool.get(p);
        let cn = *self.pool.get(c);
        debug_assert_eq!(cn.parent, p);

        let pred_c = self.list_pred(pn.child, c);
        let pred_p = if pn.parent != NIL {
            self.list_pred(self.pool.get(pn.parent).child, p)
        } else {
            self.list_pred(self.head, p)
        };

        // c takes p's place.
        {
            let cm = self.pool.get_mut(c);
            cm.parent = pn.parent;
            cm.sibling = pn.sibling;
            cm.rank = pn.rank;
            cm.child = if pn.child == c { p } else { pn.child };
        }
        if pred_p != NIL {
            self.pool.get_mut(pred_p).sibling = c;
        } else if pn.parent != NIL {
            self.pool.get_mut(pn.parent).child = c;
        } else {
            self.head = c;
        }

        // p takes c's place.
        {
            let pm = self.pool.get_mut(p);
            pm.parent = c;
            pm.sibling = cn.sibling;
            pm.rank = cn.rank;
            pm.child = cn.child;
        }
        if pred_c != NIL {
            self.pool.get_mut(pred_c).sibling = p;
        }

        // Reparent both children lists.
        let mut g = cn.child;
        while g != NIL {
            let gn = self.pool.get_mut(g);
            gn.parent = p;
            g = gn.sibling;
        }
        let mut g = self.pool.get(c).child;
        while g != NIL {
            let gn = self.pool.get_mut(g);
            if g != p {
                gn.parent = c;
            }
            g = gn.sibling;
        }

        if self.min_root == p {
            self.min_root = c;
        }
    }

    #[cfg(test)]
    fn root_ranks(&self) -> Vec<u32> {
        let mut out = Vec::new();
        let mut r = self.head;
        while r != NIL {
            let n = self.pool.get(r);
            out.push(n.rank);
            r = n.sibling;
        }
        out
    }

    fn validate_tree(&self, root: SlotRef, v: &mut Vec<Violation>) -> usize {
        let node = self.pool.get(root);
        let mut count = 1usize;
        let mut expected_rank = node.rank;
        let mut c = node.child;
        while c != NIL {
            let cn = self.pool.get(c);
            if expected_rank == 0 {
                v.push(Violation::new(
                    "binomial-shape",
                    format!("item {} has more children than its rank", node.item),
                ));
                return count;
            }
            expected_rank -= 1;
            if cn.rank != expected_rank {
                v.push(Violation::new(
                    "binomial-shape",
                    format!(
                        "item {}: child rank {} where {} expected",
                        node.item, cn.rank, expected_rank
                    ),
                ));
            }
            if cn.parent != root {
                v.push(Violation::new(
                    "parent-link",
                    format!("item {} has wrong parent", cn.item),
                ));
            }
            if cn.key <= node.key {
                v.push(Violation::new(
                    "heap-order",
                    format!("item {} not below its parent", cn.item),
                ));
            }
            count += self.validate_tree(c, v);
            c = cn.sibling;
        }
        if expected_rank != 0 {
            v.push(Violation::new(
                "binomial-shape",
                format!("item {} has fewer children than its rank", node.item),
            ));
        }
        if count != 1usize << node.rank {
            v.push(Violation::new(
                "binomial-size",
                format!(
                    "rank {} tree at item {} has {} nodes, expected {}",
                    node.rank,
                    node.item,
                    count,
                    1usize << node.rank
                ),
            ));
        }
        count
    }
}

impl PriorityQueue for BinomialHeap {
    fn insert(&mut self, item: ItemId, key: Key64) -> Result<Handle, HeapError> {
        let slot = self.pool.acquire()?;
        {
            let n = self.pool.get_mut(slot);
            n.key = key.raw;
            n.item = item;
        }
        let old_min_key = if self.min_root == NIL {
            None
        } else {
            Some(self.pool.get(self.min_root).key)
        };
        self.union(slot);
        self.size += 1;
        // With unique keys a smaller key wins every carry link, so the new
        // node is still a root whenever it beats the cached minimum.
        match old_min_key {
            None => self.min_root = slot,
            Some(mk) => {
                self.counters.comparisons += 1;
                if key.raw < mk {
                    self.min_root = slot;
                }
            }
        }
        Ok(Handle::new(slot, self.pool.generation(slot)))
    }

    fn delete_min(&mut self) -> Result<(ItemId, Key64), HeapError> {
        if self.min_root == NIL {
            return Err(HeapError::Underflow);
        }
        let min_ref = self.min_root;
        let min = *self.pool.get(min_ref);
        let pred = self.list_pred(self.head, min_ref);
        if pred == NIL {
            self.head = min.sibling;
        } else {
            self.pool.get_mut(pred).sibling = min.sibling;
        }
        // Reverse the child list (into increasing rank) and orphan it.
        let mut rev = NIL;
        let mut c = min.child;
        while c != NIL {
            let next = self.pool.get(c).sibling;
            {
                let cn = self.pool.get_mut(c);
                cn.parent = NIL;
                cn.sibling = rev;
            }
            rev = c;
            c = next;
        }
        self.union(rev);
        self.size -= 1;
        self.pool.release(min_ref);
        self.rescan_min();
        Ok((min.item, Key64::from_raw(min.key)))
    }

    fn decrease_key(&mut self, handle: Handle, key: Key64) -> Result<(), HeapError> {
        let x = handle.slot();
        self.pool.check_generation(x, handle.generation())?;
        let current = self.pool.get(x).key;
        check_decreased(current, key.raw)?;
        self.pool.get_mut(x).key = key.raw;
        loop {
            let p = self.pool.get(x).parent;
            if p == NIL {
                break;
            }
            self.counters.comparisons += 1;
            if key.raw < self.pool.get(p).key {
                self.swap_with_parent(p, x);
            } else {
                break;
            }
        }
        if self.pool.get(x).parent == NIL {
            self.counters.comparisons += 1;
            if self.min_root == NIL || key.raw < self.pool.get(self.min_root).key {
                self.min_root = x;
            }
        }
        Ok(())
    }

    fn find_min(&self) -> Result<(ItemId, Key64), HeapError> {
        if self.min_root == NIL {
            return Err(HeapError::Underflow);
        }
        let n = self.pool.get(self.min_root);
        Ok((n.item, Key64::from_raw(n.key)))
    }

    fn len(&self) -> usize {
        self.size
    }

    fn clear(&mut self) {
        self.head = NIL;
        self.min_root = NIL;
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
        let mut total = 0usize;
        let mut last_rank: Option<u32> = None;
        let mut r = self.head;
        let mut min_seen: Option<(SlotRef, u64)> = None;
        while r != NIL {
            let n = self.pool.get(r);
            if n.parent != NIL {
                v.push(Violation::new("root-links", "root has a parent"));
            }
            if let Some(lr) = last_rank {
                if n.rank <= lr {
                    v.push(Violation::new(
                        "root-ranks",
                        format!("root ranks not strictly increasing at rank {}", n.rank),
                    ));
                }
            }
            last_rank = Some(n.rank);
            if min_seen.map_or(true, |(_, k)| n.key < k) {
                min_seen = Some((r, n.key));
            }
            total += self.validate_tree(r, &mut v);
            r = n.sibling;
        }
        if total != self.size {
            v.push(Violation::new(
                "shape",
                format!("walked {total} nodes, size {}", self.size),
            ));
        }
        match (min_seen, self.min_root) {
            (None, m) if m != NIL => v.push(Violation::new("min-cache", "stale min pointer")),
            (Some((slot, _)), m) if m != slot => {
                v.push(Violation::new("min-cache", "min pointer not at minimum root"))
            }
            _ => {}
        }
        v
    }
}

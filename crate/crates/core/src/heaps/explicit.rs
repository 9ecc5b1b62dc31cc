//! Explicit d-ary heaps: the same complete tree as the implicit variants,
//! stored as heap-allocated nodes with a fixed d-wide child array.
//!
//! Sifting swaps nodes structurally (relinking, not payload copies) so
//! handles stay pinned to their item for the node's whole lifetime.

use crate::error::HeapError;
use crate::heap::{Handle, HeapStats, OpCounters, PriorityQueue, Violation};
use crate::heaps::check_decreased;
use crate::key::{ItemId, Key64};
use crate::pool::{NodePool, PoolStrategy, SlotRef, NIL};

#[derive(Debug, Clone, Copy)]
struct ExplicitNode<const D: usize> {
    key: u64,
    item: ItemId,
    parent: SlotRef,
    children: [SlotRef; D],
    child_count: u32,
}

impl<const D: usize> Default for ExplicitNode<D> {
    fn default() -> Self {
        ExplicitNode {
            key: 0,
            item: 0,
            parent: NIL,
            children: [NIL; D],
            child_count: 0,
        }
    }
}

/// Root-to-slot navigation steps for the level-order index `size - 1`,
/// derived from the base-d representation of the index.
pub fn last_path(size: u64, d: u64) -> Vec<u32> {
    assert!(size >= 1);
    let mut path = Vec::new();
    let mut j = size - 1;
    while j > 0 {
        path.push(((j - 1) % d) as u32);
        j = (j - 1) / d;
    }
    path.reverse();
    path
}

pub struct ExplicitHeap<const D: usize> {
    root: SlotRef,
    size: usize,
    pool: NodePool<ExplicitNode<D>>,
    counters: OpCounters,
}

impl<const D: usize> ExplicitHeap<D> {
    pub fn new(capacity_hint: usize, pad_factor: usize, strategy: PoolStrategy) -> Self {
        assert!(matches!(D, 2 | 4 | 8 | 16), "d must be in {{2,4,8,16}}");
        ExplicitHeap {
            root: NIL,
            size: 0,
            pool: NodePool::new(capacity_hint, pad_factor, strategy),
            counters: OpCounters::default(),
        }
    }

    #[inline]
    fn less(&mut self, a: u64, b: u64) -> bool {
        self.counters.comparisons += 1;
        a < b
    }

    fn walk(&self, path: &[u32]) -> SlotRef {
        let mut cur = self.root;
        for &c in path {
            cur = self.pool.get(cur).children[c as usize];
        }
        cur
    }

    fn child_pos(&self, parent: SlotRef, child: SlotRef) -> usize {
        let node = self.pool.get(parent);
        for i in 0..node.child_count as usize {
            if node.children[i] == child {
                return i;
            }
        }
        unreachable!("child not found under its parent");
    }

    /// Structural swap of a node with its parent: the two exchange places in
    /// the tree, children keep their order, items never move between nodes.
    fn swap_parent_child(&mut self, p: SlotRef, c: SlotRef) {
        let pos = self.child_pos(p, c);
        let pn = *self.pool.get(p);
        let cn = *self.pool.get(c);
        let g = pn.parent;
        if g == NIL {
            self.root = c;
        } else {
            let gpos = self.child_pos(g, p);
            self.pool.get_mut(g).children[gpos] = c;
        }
        {
            let cm = self.pool.get_mut(c);
            cm.parent = g;
            cm.children = pn.children;
            cm.children[pos] = p;
            cm.child_count = pn.child_count;
        }
        {
            let pm = self.pool.get_mut(p);
            pm.parent = c;
            pm.children = cn.children;
            pm.child_count = cn.child_count;
        }
        for i in 0..pn.child_count as usize {
            let grand = self.pool.get(c).children[i];
            if grand != NIL && grand != p {
                self.pool.get_mut(grand).parent = c;
            }
        }
        for i in 0..cn.child_count as usize {
            let grand = cn.children[i];
            self.pool.get_mut(grand).parent = p;
        }
    }

    fn sift_up(&mut self, x: SlotRef) {
        loop {
            let node = *self.pool.get(x);
            if node.parent == NIL {
                break;
            }
            let pk = self.pool.get(node.parent).key;
            if self.less(node.key, pk) {
                self.swap_parent_child(node.parent, x);
            } else {
                break;
            }
        }
    }

    fn sift_down(&mut self, x: SlotRef) {
        loop {
            let node = *self.pool.get(x);
            if node.child_count == 0 {
                break;
            }
            let mut mc = node.children[0];
            let mut mk = self.pool.get(mc).key;
            for i in 1..node.child_count as usize {
                let c = node.children[i];
                let k = self.pool.get(c).key;
                if self.less(k, mk) {
                    mc = c;
                    mk = k;
                }
            }
            if self.less(mk, node.key) {
                self.swap_parent_child(x, mc);
            } else {
                break;
            }
        }
    }
}

impl<const D: usize> PriorityQueue for ExplicitHeap<D> {
    fn insert(&mut self, item: ItemId, key: Key64) -> Result<Handle, HeapError> {
        let slot = self.pool.acquire()?;
        {
            let n = self.pool.get_mut(slot);
            n.key = key.raw;
            n.item = item;
        }
        if self.size == 0 {
            self.root = slot;
        } else {
            // Path to the new slot: level-order index `size`.
            let path = last_path(self.size as u64 + 1, D as u64);
            let parent = self.walk(&path[..path.len() - 1]);
            let pos = *path.last().unwrap() as usize;
            {
                let pn = self.pool.get_mut(parent);
                debug_assert_eq!(pn.child_count as usize, pos);
                pn.children[pos] = slot;
                pn.child_count += 1;
            }
            self.pool.get_mut(slot).parent = parent;
        }
        self.size += 1;
        self.sift_up(slot);
        Ok(Handle::new(slot, self.pool.generation(slot)))
    }

    fn delete_min(&mut self) -> Result<(ItemId, Key64), HeapError> {
        if self.size == 0 {
            return Err(HeapError::Underflow);
        }
        let min_ref = self.root;
        let min = *self.pool.get(min_ref);
        if self.size == 1 {
            self.root = NIL;
            self.size = 0;
            self.pool.release(min_ref);
            return Ok((min.item, Key64::from_raw(min.key)));
        }
        // Detach the last node, relocate it to the root position, sift down.
        let path = last_path(self.size as u64, D as u64);
        let last = self.walk(&path);
        let lp = self.pool.get(last).parent;
        let pos = *path.last().unwrap() as usize;
        {
            let pn = self.pool.get_mut(lp);
            debug_assert_eq!(pn.children[pos], last);
            pn.children[pos] = NIL;
            pn.child_count -= 1;
        }
        let rn = *self.pool.get(min_ref);
        {
            let ln = self.pool.get_mut(last);
            ln.parent = NIL;
            ln.children = rn.children;
            ln.child_count = rn.child_count;
        }
        for i in 0..rn.child_count as usize {
            let c = rn.children[i];
            self.pool.get_mut(c).parent = last;
        }
        self.root = last;
        self.size -= 1;
        self.pool.release(min_ref);
        self.sift_down(last);
        Ok((min.item, Key64::from_raw(min.key)))
    }

    fn decrease_key(&mut self, handle: Handle, key: Key64) -> Result<(), HeapError> {
        self.pool
            .check_generation(handle.slot(), handle.generation())?;
        let current = self.pool.get(handle.slot()).key;
        check_decreased(current, key.raw)?;
        self.pool.get_mut(handle.slot()).key = key.raw;
        self.sift_up(handle.slot());
        Ok(())
    }

    fn find_min(&self) -> Result<(ItemId, Key64), HeapError> {
        if self.root == NIL {
            return Err(HeapError::Underflow);
        }
        let n = self.pool.get(self.root);
        Ok((n.item, Key64::from_raw(n.key)))
    }

    fn len(&self) -> usize {
        self.size
    }

    fn clear(&mut self) {
        self.root = NIL;
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
        if self.root == NIL {
            if self.size != 0 {
                v.push(Violation::new("shape", "no root but nonzero size"));
            }
            return v;
        }
        let mut queue = std::collections::VecDeque::new();
        queue.push_back((self.root, 0u64));
        let mut seen = 0usize;
        let mut max_index = 0u64;
        while let Some((slot, index)) = queue.pop_front() {
            seen += 1;
            max_index = max_index.max(index);
            let node = self.pool.get(slot);
            for i in 0..D {
                let c = node.children[i];
                let occupied = i < node.child_count as usize;
                if occupied != (c != NIL) {
                    v.push(Violation::new(
                        "child-prefix",
                        format!("node at index {index} child {i} occupancy mismatch"),
                    ));
                    continue;
                }
                if c == NIL {
                    continue;
                }
                let cn = self.pool.get(c);
                if cn.parent != slot {
                    v.push(Violation::new(
                        "parent-link",
                        format!("child {i} of index {index} has wrong parent"),
                    ));
                }
                if node.key >= cn.key {
                    v.push(Violation::new(
                        "heap-order",
                        format!("index {index} not below child {i}"),
                    ));
                }
                queue.push_back((c, D as u64 * index + 1 + i as u64));
            }
        }
        if seen != self.size || max_index != self.size as u64 - 1 {
            v.push(Violation::new(
                "complete-shape",
                format!(
                    "walked {seen} nodes, max index {max_index}, size {}",
                    self.size
                ),
            ));
        }
        v
    }
}

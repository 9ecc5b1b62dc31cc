//! Two-pass pairing heap.
//!
//! Child lists use the usual leftmost-child / right-sibling layout with a
//! back pointer (`prev` is the left sibling, or the parent for a leftmost
//! child), so a decrease-key cut is O(1) pointer surgery.

use crate::error::HeapError;
use crate::heap::{Handle, HeapStats, OpCounters, PriorityQueue, Violation};
use crate::heaps::check_decreased;
use crate::key::{ItemId, Key64};
use crate::pool::{NodePool, PoolStrategy, SlotRef, NIL};

#[derive(Debug, Clone, Copy)]
struct PairingNode {
    key: u64,
    item: ItemId,
    child: SlotRef,
    sibling: SlotRef,
    prev: SlotRef,
}

impl Default for PairingNode {
    fn default() -> Self {
        PairingNode {
            key: 0,
            item: 0,
            child: NIL,
            sibling: NIL,
            prev: NIL,
        }
    }
}

pub struct PairingHeap {
    root: SlotRef,
    size: usize,
    pool: NodePool<PairingNode>,
    counters: OpCounters,
    scratch: Vec<SlotRef>,
}

impl PairingHeap {
    pub fn new(capacity_hint: usize, pad_factor: usize, strategy: PoolStrategy) -> Self {
        PairingHeap {
            root: NIL,
            size: 0,
            pool: NodePool::new(capacity_hint, pad_factor, strategy),
            counters: OpCounters::default(),
            scratch: Vec::new(),
        }
    }

    /// Comparison-link: the larger root becomes the leftmost child of the
    /// smaller. Both inputs must be detached trees.
    fn link(&mut self, a: SlotRef, b: SlotRef) -> SlotRef {
        self.counters.comparisons += 1;
        self.counters.links += 1;
        let (winner, loser) = if self.pool.get(a).key < self.pool.get(b).key {
            (a, b)
        } else {
            (b, a)
        };
        let old_child = self.pool.get(winner).child;
        {
            let l = self.pool.get_mut(loser);
            l.sibling = old_child;
            l.prev = winner;
        }
        if old_child != NIL {
            self.pool.get_mut(old_child).prev = loser;
        }
        self.pool.get_mut(winner).child = loser;
        winner
    }

    /// Standard two-pass combine of a child list: pair left to right, then
    /// fold the pair winners right to left.
    fn two_pass(&mut self, first: SlotRef) -> SlotRef {
        debug_assert!(self.scratch.is_empty());
        let mut cur = first;
        while cur != NIL {
            let a = cur;
            let b = self.pool.get(a).sibling;
            if b == NIL {
                self.detach(a);
                self.scratch.push(a);
                break;
            }
            cur = self.pool.get(b).sibling;
            self.detach(a);
            self.detach(b);
            let w = self.link(a, b);
            self.scratch.push(w);
        }
        let mut root = match self.scratch.pop() {
            Some(r) => r,
            None => return NIL,
        };
        while let Some(next) = self.scratch.pop() {
            root = self.link(root, next);
        }
        root
    }

    #[inline]
    fn detach(&mut self, x: SlotRef) {
        let n = self.pool.get_mut(x);
        n.sibling = NIL;
        n.prev = NIL;
    }

    /// Removes `x` from its sibling list without touching its own children.
    fn cut(&mut self, x: SlotRef) {
        self.counters.cuts += 1;
        let (prev, sibling) = {
            let n = self.pool.get(x);
            (n.prev, n.sibling)
        };
        if self.pool.get(prev).child == x {
            self.pool.get_mut(prev).child = sibling;
        } else {
            self.pool.get_mut(prev).sibling = sibling;
        }
        if sibling != NIL {
            self.pool.get_mut(sibling).prev = prev;
        }
        self.detach(x);
    }
}

impl PriorityQueue for PairingHeap {
    fn insert(&mut self, item: ItemId, key: Key64) -> Result<Handle, HeapError> {
        let slot = self.pool.acquire()?;
        {
            let n = self.pool.get_mut(slot);
            n.key = key.raw;
            n.item = item;
        }
        self.root = if self.root == NIL {
            slot
        } else {
            self.link(self.root, slot)
        };
        self.size += 1;
        Ok(Handle::new(slot, self.pool.generation(slot)))
    }

    fn delete_min(&mut self) -> Result<(ItemId, Key64), HeapError> {
        if self.root == NIL {
            return Err(HeapError::Underflow);
        }
        let min_ref = self.root;
        let min = *self.pool.get(min_ref);
        self.root = self.two_pass(min.child);
        if self.root != NIL {
            self.pool.get_mut(self.root).prev = NIL;
        }
        self.size -= 1;
        self.pool.release(min_ref);
        Ok((min.item, Key64::from_raw(min.key)))
    }

    fn decrease_key(&mut self, handle: Handle, key: Key64) -> Result<(), HeapError> {
        let x = handle.slot();
        self.pool.check_generation(x, handle.generation())?;
        let current = self.pool.get(x).key;
        check_decreased(current, key.raw)?;
        self.pool.get_mut(x).key = key.raw;
        if x != self.root {
            self.cut(x);
            self.root = self.link(self.root, x);
        }
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
        if self.root == NIL {
            if self.size != 0 {
                v.push(Violation::new("shape", "no root but nonzero size"));
            }
            return v;
        }
        let root = self.pool.get(self.root);
        if root.prev != NIL || root.sibling != NIL {
            v.push(Violation::new("root-links", "root has prev or sibling"));
        }
        let mut seen = 0usize;
        let mut stack = vec![self.root];
        while let Some(x) = stack.pop() {
            seen += 1;
            if seen > self.size {
                v.push(Violation::new("shape", "cycle or extra nodes"));
                return v;
            }
            let xn = self.pool.get(x);
            let mut c = xn.child;
            let mut expected_prev = x;
            while c != NIL {
                let cn = self.pool.get(c);
                if cn.prev != expected_prev {
                    v.push(Violation::new(
                        "prev-link",
                        format!("node for item {} has wrong prev", cn.item),
                    ));
                }
                if cn.key <= xn.key {
                    v.push(Violation::new(
                        "heap-order",
                        format!("item {} not below its parent", cn.item),
                    ));
                }
                stack.push(c);
                expected_prev = c;
                c = cn.sibling;
            }
        }
        if seen != self.size {
            v.push(Violation::new(
                "shape",
                format!("walked {seen} nodes, size {}", self.size),
            ));
        }
        v
    }
}

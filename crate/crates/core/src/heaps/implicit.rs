//! Implicit d-ary heaps: a complete tree encoded in level order.
//!
//! Two versions. `SimpleImplicitHeap` inlines (key, item) pairs directly in
//! the array; it is the leanest variant but cannot support decrease-key
//! because items move between slots. `ImplicitHeap` stores an array of node
//! references and writes each node's current index back into the node, so a
//! handle survives sifting.

use crate::error::HeapError;
use crate::heap::{Handle, HeapStats, OpCounters, PriorityQueue, Violation};
use crate::heaps::check_decreased;
use crate::key::{ItemId, Key64};
use crate::pool::{NodePool, PoolStrategy, SlotRef};

/// Array heap of inline (key, item) pairs, no indirection, no decrease-key.
pub struct SimpleImplicitHeap {
    d: usize,
    slots: Vec<(u64, ItemId)>,
    strategy: PoolStrategy,
    eager_capacity: usize,
    counters: OpCounters,
    reads: u64,
    writes: u64,
}

impl SimpleImplicitHeap {
    pub fn new(d: usize, capacity_hint: usize, strategy: PoolStrategy) -> Self {
        assert!(matches!(d, 2 | 4 | 8 | 16), "d must be in {{2,4,8,16}}");
        let eager_capacity = capacity_hint.max(1);
        let slots = match strategy {
            PoolStrategy::Eager => Vec::with_capacity(eager_capacity),
            _ => Vec::new(),
        };
        SimpleImplicitHeap {
            d,
            slots,
            strategy,
            eager_capacity,
            counters: OpCounters::default(),
            reads: 0,
            writes: 0,
        }
    }

    /// Test-only direct construction from a level-order key list.
    pub fn from_level_order(d: usize, entries: &[(u64, ItemId)]) -> Self {
        let mut heap = Self::new(d, entries.len().max(1), PoolStrategy::Doubling);
        heap.slots.extend_from_slice(entries);
        heap
    }

    pub fn level_order(&self) -> Vec<u64> {
        self.slots.iter().map(|&(k, _)| k).collect()
    }

    #[inline]
    fn less(&mut self, a: u64, b: u64) -> bool {
        self.counters.comparisons += 1;
        a < b
    }

    /// Moves the entry at `i` toward the root until its parent is smaller.
    /// Returns the final position.
    pub fn sift_up(&mut self, mut i: usize) -> usize {
        self.reads += 1;
        let moving = self.slots[i];
        while i > 0 {
            let parent = (i - 1) / self.d;
            self.reads += 1;
            let pk = self.slots[parent].0;
            if self.less(moving.0, pk) {
                self.slots[i] = self.slots[parent];
                self.writes += 1;
                i = parent;
            } else {
                break;
            }
        }
        self.slots[i] = moving;
        self.writes += 1;
        i
    }

    /// Swaps the entry at `i` with its least child while any child is
    /// smaller. One comparison pass of up to `d` children per level.
    pub fn sift_down(&mut self, mut i: usize) -> usize {
        let n = self.slots.len();
        self.reads += 1;
        let moving = self.slots[i];
        loop {
            let first = self.d * i + 1;
            if first >= n {
                break;
            }
            let last = (first + self.d).min(n);
            let mut mc = first;
            self.reads += 1;
            let mut mk = self.slots[first].0;
            for j in first + 1..last {
                self.reads += 1;
                let k = self.slots[j].0;
                if self.less(k, mk) {
                    mc = j;
                    mk = k;
                }
            }
            if self.less(mk, moving.0) {
                self.slots[i] = self.slots[mc];
                self.writes += 1;
                i = mc;
            } else {
                break;
            }
        }
        self.slots[i] = moving;
        self.writes += 1;
        i
    }
}

impl PriorityQueue for SimpleImplicitHeap {
    fn insert(&mut self, item: ItemId, key: Key64) -> Result<Handle, HeapError> {
        if self.strategy == PoolStrategy::Eager && self.slots.len() == self.eager_capacity {
            return Err(HeapError::Capacity {
                capacity: self.eager_capacity,
            });
        }
        self.slots.push((key.raw, item));
        self.writes += 1;
        self.sift_up(self.slots.len() - 1);
        Ok(Handle::INVALID)
    }

    fn delete_min(&mut self) -> Result<(ItemId, Key64), HeapError> {
        if self.slots.is_empty() {
            return Err(HeapError::Underflow);
        }
        self.reads += 1;
        let (raw, item) = self.slots[0];
        let last = self.slots.pop().unwrap();
        if !self.slots.is_empty() {
            self.slots[0] = last;
            self.writes += 1;
            self.sift_down(0);
        }
        Ok((item, Key64::from_raw(raw)))
    }

    fn decrease_key(&mut self, _handle: Handle, _key: Key64) -> Result<(), HeapError> {
        Err(HeapError::Unsupported("implicit_simple has no decrease_key"))
    }

    fn find_min(&self) -> Result<(ItemId, Key64), HeapError> {
        self.slots
            .first()
            .map(|&(raw, item)| (item, Key64::from_raw(raw)))
            .ok_or(HeapError::Underflow)
    }

    fn len(&self) -> usize {
        self.slots.len()
    }

    fn clear(&mut self) {
        self.slots.clear();
    }

    fn stats(&self) -> HeapStats {
        HeapStats {
            size: self.slots.len() as u64,
            comparisons: self.counters.comparisons,
            node_reads: self.reads,
            node_writes: self.writes,
            links: self.counters.links,
            cuts: self.counters.cuts,
            marks: self.counters.marks,
        }
    }

    fn validate(&self) -> Vec<Violation> {
        let mut v = Vec::new();
        for i in 1..self.slots.len() {
            let parent = (i - 1) / self.d;
            if self.slots[parent].0 >= self.slots[i].0 {
                v.push(Violation::new(
                    "heap-order",
                    format!("slot {parent} not below slot {i}"),
                ));
            }
        }
        v
    }

    fn supports_decrease_key(&self) -> bool {
        false
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct ImplicitNode {
    key: u64,
    item: ItemId,
    index: u32,
}

/// Array heap over node references with index back-links: the level of
/// indirection that buys decrease-key support.
pub struct ImplicitHeap {
    d: usize,
    slots: Vec<SlotRef>,
    pool: NodePool<ImplicitNode>,
    counters: OpCounters,
}

impl ImplicitHeap {
    pub fn new(d: usize, capacity_hint: usize, pad_factor: usize, strategy: PoolStrategy) -> Self {
        assert!(matches!(d, 2 | 4 | 8 | 16), "d must be in {{2,4,8,16}}");
        let slots = match strategy {
            PoolStrategy::Eager => Vec::with_capacity(capacity_hint.max(1)),
            _ => Vec::new(),
        };
        ImplicitHeap {
            d,
            slots,
            pool: NodePool::new(capacity_hint, pad_factor, strategy),
            counters: OpCounters::default(),
        }
    }

    #[inline]
    fn less(&mut self, a: u64, b: u64) -> bool {
        self.counters.comparisons += 1;
        a < b
    }

    fn sift_up(&mut self, mut i: usize) -> usize {
        let moving = self.slots[i];
        let moving_key = self.pool.get(moving).key;
        while i > 0 {
            let parent = (i - 1) / self.d;
            let pref = self.slots[parent];
            let pk = self.pool.get(pref).key;
            if self.less(moving_key, pk) {
                self.slots[i] = pref;
                self.pool.get_mut(pref).index = i as u32;
                i = parent;
            } else {
                break;
            }
        }
        self.slots[i] = moving;
        self.pool.get_mut(moving).index = i as u32;
        i
    }

    fn sift_down(&mut self, mut i: usize) -> usize {
        let n = self.slots.len();
        let moving = self.slots[i];
        let moving_key = self.pool.get(moving).key;
        loop {
            let first = self.d * i + 1;
            if first >= n {
                break;
            }
            let last = (first + self.d).min(n);
            let mut mc = first;
            let mut mk = self.pool.get(self.slots[first]).key;
            for j in first + 1..last {
                let k = self.pool.get(self.slots[j]).key;
                if self.less(k, mk) {
                    mc = j;
                    mk = k;
                }
            }
            if self.less(mk, moving_key) {
                let cref = self.slots[mc];
                self.slots[i] = cref;
                self.pool.get_mut(cref).index = i as u32;
                i = mc;
            } else {
                break;
            }
        }
        self.slots[i] = moving;
        self.pool.get_mut(moving).index = i as u32;
        i
    }
}

impl PriorityQueue for ImplicitHeap {
    fn insert(&mut self, item: ItemId, key: Key64) -> Result<Handle, HeapError> {
        let slot = self.pool.acquire()?;
        let i = self.slots.len();
        *self.pool.get_mut(slot) = ImplicitNode {
            key: key.raw,
            item,
            index: i as u32,
        };
        self.slots.push(slot);
        self.sift_up(i);
        Ok(Handle::new(slot, self.pool.generation(slot)))
    }

    fn delete_min(&mut self) -> Result<(ItemId, Key64), HeapError> {
        if self.slots.is_empty() {
            return Err(HeapError::Underflow);
        }
        let min_ref = self.slots[0];
        let node = *self.pool.get(min_ref);
        let last = self.slots.pop().unwrap();
        if !self.slots.is_empty() {
            self.slots[0] = last;
            self.pool.get_mut(last).index = 0;
            self.sift_down(0);
        }
        self.pool.release(min_ref);
        Ok((node.item, Key64::from_raw(node.key)))
    }

    fn decrease_key(&mut self, handle: Handle, key: Key64) -> Result<(), HeapError> {
        self.pool
            .check_generation(handle.slot(), handle.generation())?;
        let node = self.pool.get(handle.slot());
        check_decreased(node.key, key.raw)?;
        let index = node.index as usize;
        self.pool.get_mut(handle.slot()).key = key.raw;
        self.sift_up(index);
        Ok(())
    }

    fn find_min(&self) -> Result<(ItemId, Key64), HeapError> {
        let &slot = self.slots.first().ok_or(HeapError::Underflow)?;
        let node = self.pool.get(slot);
        Ok((node.item, Key64::from_raw(node.key)))
    }

    fn len(&self) -> usize {
        self.slots.len()
    }

    fn clear(&mut self) {
        self.slots.clear();
        self.pool.reset();
    }

    fn stats(&self) -> HeapStats {
        let pc = self.pool.counters();
        HeapStats {
            size: self.slots.len() as u64,
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
        for (i, &slot) in self.slots.iter().enumerate() {
            let node = self.pool.get(slot);
            if node.index as usize != i {
                v.push(Violation::new(
                    "back-link",
                    format!("slot {i} stores node claiming index {}", node.index),
                ));
            }
            if i > 0 {
                let parent = self.slots[(i - 1) / self.d];
                if self.pool.get(parent).key >= node.key {
                    v.push(Violation::new(
                        "heap-order",
                        format!("slot {} not below slot {i}", (i - 1) / self.d),
                    ));
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

    #[test]
    fn sift_up_hand_case() {
        // d=2, level-order keys [9,12,10]; decrease position 2 to 1.
        let mut h = SimpleImplicitHeap::from_level_order(2, &[(9, 0), (12, 1), (10, 2)]);
        h.slots[2].0 = 1;
        let end = h.sift_up(2);
        assert_eq!(end, 0);
        assert_eq!(h.level_order(), vec![1, 12, 9]);
    }

    #[test]
    fn sift_up_no_movement_when_ordered() {
        let mut h = SimpleImplicitHeap::from_level_order(2, &[(1, 0), (5, 1), (3, 2)]);
        assert_eq!(h.sift_up(2), 2);
        assert_eq!(h.level_order(), vec![1, 5, 3]);
    }

    #[test]
    fn sift_down_hand_case() {
        let mut h = SimpleImplicitHeap::from_level_order(2, &[(9, 0), (1, 1), (2, 2)]);
        let end = h.sift_down(0);
        assert_eq!(end, 1);
        assert_eq!(h.level_order(), vec![1, 9, 2]);
    }

    #[test]
    fn sift_down_leaf_is_noop() {
        let mut h = SimpleImplicitHeap::from_level_order(2, &[(1, 0), (5, 1), (3, 2)]);
        assert_eq!(h.sift_down(2), 2);
    }

    #[test]
    fn sift_down_d4_picks_least_child() {
        let mut h =
            SimpleImplicitHeap::from_level_order(4, &[(50, 0), (8, 1), (3, 2), (9, 3), (4, 4)]);
        let end = h.sift_down(0);
        assert_eq!(end, 2);
        assert_eq!(h.level_order(), vec![3, 8, 50, 9, 4]);
    }

    #[test]
    fn simple_rejects_decrease_key() {
        let mut h = SimpleImplicitHeap::new(2, 8, PoolStrategy::Eager);
        let hd = h.insert(0, make_key(5, 0)).unwrap();
        assert!(matches!(
            h.decrease_key(hd, make_key(1, 0)),
            Err(HeapError::Unsupported(_))
        ));
        assert!(!h.supports_decrease_key());
    }

    #[test]
    fn eager_capacity_enforced() {
        let mut h = SimpleImplicitHeap::new(2, 2, PoolStrategy::Eager);
        h.insert(0, make_key(1, 0)).unwrap();
        h.insert(1, make_key(2, 1)).unwrap();
        assert!(matches!(
            h.insert(2, make_key(3, 2)),
            Err(HeapError::Capacity { .. })
        ));
    }

    #[test]
    fn implicit_decrease_key_basics() {
        let mut h = ImplicitHeap::new(2, 16, 1, PoolStrategy::Eager);
        let h0 = h.insert(0, make_key(50, 0)).unwrap();
        let _h1 = h.insert(1, make_key(30, 1)).unwrap();
        h.decrease_key(h0, make_key(10, 0)).unwrap();
        assert_eq!(h.delete_min().unwrap(), (0, make_key(10, 0)));
        assert!(h.validate().is_empty());
    }

    #[test]
    fn implicit_decrease_touches_only_ancestor_path() {
        // Pool reads per decrease bounded by ceil(log_d size) + 1.
        let d = 4;
        let mut h = ImplicitHeap::new(d, 1 << 12, 1, PoolStrategy::Eager);
        let mut handles = Vec::new();
        for i in 0..(1u32 << 10) {
            handles.push(h.insert(i, make_key(1000 + i * 2, i)).unwrap());
        }
        let size = h.len() as f64;
        let bound = size.log(d as f64).ceil() as u64 + 1;
        let target = handles[900];
        let before = h.stats().node_reads;
        h.decrease_key(target, make_key(999, 900)).unwrap();
        let reads = h.stats().node_reads - before;
        assert!(
            reads <= bound + 1, // +1 for the contract check read of the target
            "decrease read {reads} nodes, bound {bound}"
        );
    }

    #[test]
    fn invalid_handle_after_delete() {
        let mut h = ImplicitHeap::new(2, 8, 1, PoolStrategy::Eager);
        let h0 = h.insert(0, make_key(5, 0)).unwrap();
        h.insert(1, make_key(9, 1)).unwrap();
        h.delete_min().unwrap();
        if cfg!(debug_assertions) {
            assert!(matches!(
                h.decrease_key(h0, make_key(1, 0)),
                Err(HeapError::StaleHandle)
            ));
        }
    }

    #[test]
    fn validate_catches_corrupt_backlink() {
        let mut h = ImplicitHeap::new(2, 8, 1, PoolStrategy::Eager);
        for i in 0..5u32 {
            h.insert(i, make_key(10 + i, i)).unwrap();
        }
        assert!(h.validate().is_empty());
        let slot = h.slots[3];
        h.pool.get_mut(slot).index = 0;
        let v = h.validate();
        assert!(v.iter().any(|x| x.rule == "back-link"));
    }

    #[test]
    fn validate_catches_order_violation() {
        let mut h = SimpleImplicitHeap::from_level_order(2, &[(9, 0), (1, 1)]);
        assert_eq!(h.validate().len(), 1);
        h.slots.swap(0, 1);
        assert!(h.validate().is_empty());
    }
}

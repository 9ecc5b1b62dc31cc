//! Fixed-size node pool shared by the linked heap variants.
//!
//! The pool hands out slots of `node_size * pad_factor` bytes. The pad factor
//! changes only where nodes land in memory, never what the algorithms do, so
//! comparison counts are identical across paddings while cache behavior (and
//! wallclock) is not.
//!
//! Three allocation strategies are supported: `Eager` reserves the full
//! capacity up front from the trace header's max-live size and errors when
//! exhausted, `Doubling` starts small and doubles when full, and `OnDemand`
//! grows one slot per acquire.
//!
//! Debug builds tag slots with generations so a handle used after its item
//! was deleted is reported instead of silently resolving to a recycled node.

use std::cell::Cell;
use std::marker::PhantomData;

use serde::{Deserialize, Serialize};

use crate::error::HeapError;

/// Reference to a pool slot. `NIL` marks an absent link inside node structs.
pub type SlotRef = u32;
pub const NIL: SlotRef = u32::MAX;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PoolStrategy {
    Eager,
    Doubling,
    OnDemand,
}

impl std::fmt::Display for PoolStrategy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            PoolStrategy::Eager => write!(f, "eager"),
            PoolStrategy::Doubling => write!(f, "doubling"),
            PoolStrategy::OnDemand => write!(f, "on_demand"),
        }
    }
}

impl std::str::FromStr for PoolStrategy {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "eager" => Ok(PoolStrategy::Eager),
            "doubling" => Ok(PoolStrategy::Doubling),
            "on_demand" | "on-demand" => Ok(PoolStrategy::OnDemand),
            other => Err(format!("unknown pool strategy: {other}")),
        }
    }
}

/// Per-pool event counters.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct PoolCounters {
    pub acquires: u64,
    pub releases: u64,
    pub peak_live: u64,
    pub growth_events: u64,
    pub reads: u64,
    pub writes: u64,
}

const DOUBLING_INITIAL: usize = 4;

pub struct NodePool<T> {
    words: Vec<u64>,
    slot_words: usize,
    capacity: usize,
    strategy: PoolStrategy,
    // LIFO free registry: reuses cache-warm slots, deterministic placement.
    free: Vec<SlotRef>,
    next_fresh: SlotRef,
    acquires: u64,
    releases: u64,
    peak_live: u64,
    growth_events: u64,
    reads: Cell<u64>,
    writes: Cell<u64>,
    #[cfg(debug_assertions)]
    gens: Vec<u32>,
    #[cfg(debug_assertions)]
    live: Vec<bool>,
    _marker: PhantomData<T>,
}

impl<T: Copy + Default> NodePool<T> {
    /// `capacity_hint` is the eager capacity (trace max-live size); the other
    /// strategies ignore it.
    pub fn new(capacity_hint: usize, pad_factor: usize, strategy: PoolStrategy) -> Self {
        assert!(pad_factor >= 1, "pad_factor must be >= 1");
        assert!(
            std::mem::align_of::<T>() <= 8,
            "pool nodes must be at most 8-byte aligned"
        );
        let slot_bytes = std::mem::size_of::<T>().max(1) * pad_factor;
        let slot_words = slot_bytes.div_ceil(8);
        let capacity = match strategy {
            PoolStrategy::Eager => capacity_hint.max(1),
            PoolStrategy::Doubling => DOUBLING_INITIAL,
            PoolStrategy::OnDemand => 0,
        };
        let mut pool = NodePool {
            words: Vec::new(),
            slot_words,
            capacity,
            strategy,
            free: Vec::new(),
            next_fresh: 0,
            acquires: 0,
            releases: 0,
            peak_live: 0,
            growth_events: 0,
            reads: Cell::new(0),
            writes: Cell::new(0),
            #[cfg(debug_assertions)]
            gens: Vec::new(),
            #[cfg(debug_assertions)]
            live: Vec::new(),
            _marker: PhantomData,
        };
        pool.reserve_to(capacity);
        pool
    }

    fn reserve_to(&mut self, capacity: usize) {
        self.capacity = capacity;
        self.words.resize(capacity * self.slot_words, 0);
        #[cfg(debug_assertions)]
        {
            self.gens.resize(capacity, 0);
            self.live.resize(capacity, false);
        }
    }

    pub fn node_size(&self) -> usize {
        self.slot_words * 8
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn live(&self) -> u64 {
        self.acquires - self.releases
    }

    pub fn counters(&self) -> PoolCounters {
        PoolCounters {
            acquires: self.acquires,
            releases: self.releases,
            peak_live: self.peak_live,
            growth_events: self.growth_events,
            reads: self.reads.get(),
            writes: self.writes.get(),
        }
    }

    pub fn acquire(&mut self) -> Result<SlotRef, HeapError> {
        let slot = if let Some(slot) = self.free.pop() {
            slot
        } else {
            if (self.next_fresh as usize) == self.capacity {
                match self.strategy {
                    PoolStrategy::Eager => {
                        return Err(HeapError::Capacity {
                            capacity: self.capacity,
                        })
                    }
                    PoolStrategy::Doubling => {
                        let next = (self.capacity * 2).max(DOUBLING_INITIAL);
                        self.reserve_to(next);
                        self.growth_events += 1;
                    }
                    PoolStrategy::OnDemand => {
                        let next = self.capacity + 1;
                        self.reserve_to(next);
                        self.growth_events += 1;
                    }
                }
            }
            let slot = self.next_fresh;
            self.next_fresh += 1;
            slot
        };
        unsafe {
            std::ptr::write(self.slot_ptr_mut(slot), T::default());
        }
        self.acquires += 1;
        self.peak_live = self.peak_live.max(self.live());
        #[cfg(debug_assertions)]
        {
            self.live[slot as usize] = true;
        }
        Ok(slot)
    }

    pub fn release(&mut self, slot: SlotRef) {
        #[cfg(debug_assertions)]
        {
            assert!(
                self.live[slot as usize],
                "double release of pool slot {slot}"
            );
            self.live[slot as usize] = false;
            self.gens[slot as usize] = self.gens[slot as usize].wrapping_add(1);
        }
        self.releases += 1;
        self.free.push(slot);
    }

    /// Returns every slot to the pool. Counters are retained.
    pub fn reset(&mut self) {
        self.releases = self.acquires;
        self.free.clear();
        self.next_fresh = 0;
        #[cfg(debug_assertions)]
        {
            for (i, l) in self.live.iter_mut().enumerate() {
                if *l {
                    self.gens[i] = self.gens[i].wrapping_add(1);
                }
                *l = false;
            }
        }
    }

    fn slot_ptr(&self, slot: SlotRef) -> *const T {
        debug_assert!((slot as usize) < self.capacity, "slot out of range");
        unsafe { self.words.as_ptr().add(slot as usize * self.slot_words) as *const T }
    }

    fn slot_ptr_mut(&mut self, slot: SlotRef) -> *mut T {
        debug_assert!((slot as usize) < self.capacity, "slot out of range");
        unsafe {
            self.words
                .as_mut_ptr()
                .add(slot as usize * self.slot_words) as *mut T
        }
    }

    #[inline]
    pub fn get(&self, slot: SlotRef) -> &T {
        self.reads.set(self.reads.get() + 1);
        unsafe { &*self.slot_ptr(slot) }
    }

    #[inline]
    pub fn get_mut(&mut self, slot: SlotRef) -> &mut T {
        self.writes.set(self.writes.get() + 1);
        unsafe { &mut *self.slot_ptr_mut(slot) }
    }

    /// Current generation of a slot, for handle construction.
    pub fn generation(&self, slot: SlotRef) -> u32 {
        #[cfg(debug_assertions)]
        {
            self.gens[slot as usize]
        }
        #[cfg(not(debug_assertions))]
        {
            let _ = slot;
            0
        }
    }

    /// Validates that a handle's generation still matches its slot.
    ///
    /// The check only exists in debug builds; timed release runs resolve
    /// handles without it.
    pub fn check_generation(&self, slot: SlotRef, gen: u32) -> Result<(), HeapError> {
        #[cfg(debug_assertions)]
        {
            if (slot as usize) >= self.capacity
                || !self.live[slot as usize]
                || self.gens[slot as usize] != gen
            {
                return Err(HeapError::StaleHandle);
            }
        }
        let _ = (slot, gen);
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[derive(Clone, Copy, Default)]
    struct Node {
        key: u64,
        link: SlotRef,
    }

    #[test]
    fn acquire_release_round_trip() {
        let mut pool: NodePool<Node> = NodePool::new(8, 1, PoolStrategy::Eager);
        let a = pool.acquire().unwrap();
        pool.get_mut(a).key = 7;
        pool.get_mut(a).link = 3;
        assert_eq!(pool.get(a).key, 7);
        assert_eq!(pool.get(a).link, 3);
        pool.release(a);
        assert_eq!(pool.live(), 0);
    }

    #[test]
    fn released_slot_reused_lifo() {
        let mut pool: NodePool<Node> = NodePool::new(8, 1, PoolStrategy::Eager);
        let a = pool.acquire().unwrap();
        let _b = pool.acquire().unwrap();
        let _c = pool.acquire().unwrap();
        pool.release(a);
        let d = pool.acquire().unwrap();
        assert_eq!(d, a);
    }

    #[test]
    fn eager_pool_exhaustion() {
        let mut pool: NodePool<Node> = NodePool::new(2, 1, PoolStrategy::Eager);
        pool.acquire().unwrap();
        pool.acquire().unwrap();
        assert!(matches!(
            pool.acquire(),
            Err(HeapError::Capacity { capacity: 2 })
        ));
    }

    #[test]
    fn eager_never_grows() {
        let mut pool: NodePool<Node> = NodePool::new(1000, 1, PoolStrategy::Eager);
        for _ in 0..1000 {
            pool.acquire().unwrap();
        }
        assert_eq!(pool.counters().growth_events, 0);
        assert_eq!(pool.capacity(), 1000);
    }

    #[test]
    fn doubling_growth_schedule() {
        let mut pool: NodePool<Node> = NodePool::new(1000, 1, PoolStrategy::Doubling);
        assert_eq!(pool.capacity(), 4);
        for _ in 0..9 {
            pool.acquire().unwrap();
        }
        // 4 -> 8 -> 16
        assert_eq!(pool.counters().growth_events, 2);
        assert_eq!(pool.capacity(), 16);
    }

    #[test]
    fn on_demand_growth_per_acquire() {
        let mut pool: NodePool<Node> = NodePool::new(0, 1, PoolStrategy::OnDemand);
        for _ in 0..7 {
            pool.acquire().unwrap();
        }
        assert_eq!(pool.counters().growth_events, 7);
    }

    #[test]
    fn padding_scales_node_size() {
        let base: NodePool<Node> = NodePool::new(1, 1, PoolStrategy::Eager);
        let padded: NodePool<Node> = NodePool::new(1, 4, PoolStrategy::Eager);
        assert_eq!(padded.node_size(), 4 * base.node_size());
    }

    #[test]
    #[cfg(debug_assertions)]
    #[should_panic(expected = "double release")]
    fn double_release_caught() {
        let mut pool: NodePool<Node> = NodePool::new(4, 1, PoolStrategy::Eager);
        let a = pool.acquire().unwrap();
        pool.release(a);
        pool.release(a);
    }

    #[test]
    #[cfg(debug_assertions)]
    fn generation_catches_stale_handle() {
        let mut pool: NodePool<Node> = NodePool::new(4, 1, PoolStrategy::Eager);
        let a = pool.acquire().unwrap();
        let gen = pool.generation(a);
        pool.release(a);
        let _b = pool.acquire().unwrap(); // reuses slot a
        assert!(matches!(
            pool.check_generation(a, gen),
            Err(HeapError::StaleHandle)
        ));
    }
}

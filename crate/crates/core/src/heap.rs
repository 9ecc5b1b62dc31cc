//! The uniform priority-queue contract every variant implements.

use serde::{Deserialize, Serialize};

use crate::error::HeapError;
use crate::key::{ItemId, Key64};
use crate::pool::SlotRef;

/// Stable reference to a live heap node, valid from the insert that produced
/// it until the delete-min that removes its item.
///
/// The payload is variant-specific; callers treat it as opaque. The
/// generation half is checked in debug builds only.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Handle {
    slot: SlotRef,
    gen: u32,
}

impl Handle {
    /// Returned by variants without decrease-key support (implicit-simple).
    pub const INVALID: Handle = Handle {
        slot: u32::MAX,
        gen: u32::MAX,
    };

    pub(crate) fn new(slot: SlotRef, gen: u32) -> Self {
        Handle { slot, gen }
    }

    pub(crate) fn slot(self) -> SlotRef {
        self.slot
    }

    pub(crate) fn generation(self) -> u32 {
        self.gen
    }
}

/// Software event counters, the crate's stand-ins for hardware read/write
/// columns. All counters are monotone; `size` tracks live items.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct HeapStats {
    pub size: u64,
    pub comparisons: u64,
    pub node_reads: u64,
    pub node_writes: u64,
    pub links: u64,
    pub cuts: u64,
    pub marks: u64,
}

/// Restructuring counters maintained inside each variant. Node reads/writes
/// come from the pool (or are tracked directly by the array variants).
#[derive(Debug, Clone, Copy, Default)]
pub struct OpCounters {
    pub comparisons: u64,
    pub links: u64,
    pub cuts: u64,
    pub marks: u64,
}

/// One structural-invariant violation found by a validator walk.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub rule: &'static str,
    pub detail: String,
}

impl Violation {
    pub fn new(rule: &'static str, detail: impl Into<String>) -> Self {
        Violation {
            rule,
            detail: detail.into(),
        }
    }
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.rule, self.detail)
    }
}

/// Insert / delete-min / decrease-key contract, plus the plumbing the trace
/// layer needs (find-min, size, clear, validation).
///
/// Preconditions shared by all variants: inserted raw keys are distinct from
/// every live key, and decrease-key targets a live handle with a strictly
/// smaller key. Violations are detected and reported as errors.
pub trait PriorityQueue {
    fn insert(&mut self, item: ItemId, key: Key64) -> Result<Handle, HeapError>;

    fn delete_min(&mut self) -> Result<(ItemId, Key64), HeapError>;

    fn decrease_key(&mut self, handle: Handle, key: Key64) -> Result<(), HeapError>;

    fn find_min(&self) -> Result<(ItemId, Key64), HeapError>;

    fn len(&self) -> usize;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Releases all nodes; event counters are retained.
    fn clear(&mut self);

    fn stats(&self) -> HeapStats;

    /// Full structural walk; empty result means every invariant holds.
    fn validate(&self) -> Vec<Violation>;

    fn supports_decrease_key(&self) -> bool {
        true
    }
}

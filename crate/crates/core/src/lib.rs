//! Priority-queue laboratory: eleven heap families behind one contract,
//! plus trace-driven workload generation and a benchmark harness.
//!
//! The library is organized around three ideas:
//! - a composite 64-bit key (user key in the high half, item id in the low
//!   half) so live keys are unique and every comparison is decisive;
//! - a fixed-size node pool with pluggable allocation strategies and a
//!   padding knob, shared by every linked variant;
//! - binary operation traces generated once against a reference oracle and
//!   replayed identically against every competitor.

pub mod error;
pub mod heap;
pub mod heaps;
pub mod key;
pub mod metrics;
pub mod oracle;
pub mod pool;
pub mod profiler;
pub mod report;
pub mod runner;
pub mod trace;
pub mod variant;
pub mod workloads;

pub use error::{GraphError, HeapError, RunError, TraceError};
pub use heap::{Handle, HeapStats, PriorityQueue, Violation};
pub use key::{make_key, ItemId, Key64};
pub use oracle::{oracle_replay, OracleHeap};
pub use pool::{NodePool, PoolStrategy};
pub use variant::{all_variants, HeapFamily, HeapVariant};

//! Error types shared across the crate.

use thiserror::Error;

use crate::key::{ItemId, Key64};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum HeapError {
    #[error("delete_min/find_min on empty heap")]
    Underflow,
    #[error("node pool exhausted (eager pool of capacity {capacity})")]
    Capacity { capacity: usize },
    #[error("new key {new} is not smaller than current key {current}")]
    KeyNotDecreased { current: Key64, new: Key64 },
    #[error("handle refers to a deleted item")]
    StaleHandle,
    #[error("operation not supported by this heap variant: {0}")]
    Unsupported(&'static str),
    #[error("internal invariant broken: {0}")]
    Internal(&'static str),
}

#[derive(Debug, Error)]
pub enum TraceError {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("bad magic at byte offset {offset}")]
    BadMagic { offset: u64 },
    #[error("unsupported format version {version}")]
    BadVersion { version: u32 },
    #[error("truncated trace file at byte offset {offset}")]
    Truncated { offset: u64 },
    #[error("bad opcode {opcode} at byte offset {offset}")]
    BadOpcode { opcode: u8, offset: u64 },
    #[error("malformed text record at line {line}: {reason}")]
    BadText { line: usize, reason: String },
    #[error("trace invalid at record {index}: {reason}")]
    Invalid { index: usize, reason: String },
    #[error("header counts inconsistent: {0}")]
    BadHeader(String),
}

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error("arc endpoint out of range at line {line}: {vertex}")]
    VertexRange { line: usize, vertex: u64 },
    #[error("missing problem line (p sp <n> <m>)")]
    MissingProblemLine,
}

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Trace(#[from] TraceError),
    #[error("heap error at record {index}: {source}")]
    Heap { index: usize, source: HeapError },
    #[error("delete_min mismatch at record {index}: got ({got_item}, {got_key}), trace expects ({want_item}, {want_key})")]
    Mismatch {
        index: usize,
        got_item: ItemId,
        got_key: Key64,
        want_item: ItemId,
        want_key: Key64,
    },
    #[error("variant does not support opcode {opcode:?} (record {index})")]
    UnsupportedOpcode { opcode: &'static str, index: usize },
    #[error("baseline subtraction across different traces: {0} vs {1}")]
    TraceMismatch(String, String),
}

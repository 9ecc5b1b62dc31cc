//! Shared fixtures for the criterion benchmarks: pre-generated traces and
//! the variant shortlists each benchmark sweeps over.

use pqlab::trace::Trace;
use pqlab::workloads::{
    gen_decrease_key, gen_dijkstra, gen_grid_graph, gen_insert_delete, gen_sort, ArtificialParams,
    DecreaseMode,
};
use pqlab::HeapVariant;

pub const SEED: u64 = 7;

/// Variants worth watching on pure insert/delete workloads.
pub fn sort_shortlist() -> Vec<HeapVariant> {
    ["implicit_simple_4", "implicit_4", "explicit_4", "pairing", "binomial", "fibonacci"]
        .iter()
        .map(|s| s.parse().unwrap())
        .collect()
}

/// Variants with constant or near-constant decrease-key.
pub fn decrease_shortlist() -> Vec<HeapVariant> {
    [
        "implicit_4",
        "pairing",
        "fibonacci",
        "rank_pairing_t1",
        "violation",
        "rank_relaxed_weak",
        "quake",
        "strict_fibonacci",
    ]
    .iter()
    .map(|s| s.parse().unwrap())
    .collect()
}

pub fn sort_trace(n: usize) -> Trace {
    gen_sort(n, SEED)
}

pub fn insert_delete_trace(n: usize, c: usize) -> Trace {
    gen_insert_delete(n, c, SEED)
}

pub fn decrease_trace(n: usize, c: usize, k: usize) -> Trace {
    gen_decrease_key(ArtificialParams {
        n,
        c,
        k,
        mode: DecreaseMode::Middle,
        seed: SEED,
    })
}

pub fn grid_dijkstra_trace(rows: usize, cols: usize) -> Trace {
    let graph = gen_grid_graph(rows, cols, 10_000, SEED);
    gen_dijkstra(&graph, 0)
}

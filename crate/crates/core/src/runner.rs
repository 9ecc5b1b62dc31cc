//! Trace replay driver: timing protocol, instrumented counter pass, and
//! dummy-baseline subtraction.
//!
//! Protocol: one instrumented iteration collects the software counters;
//! timing then runs `max(5, ceil(budget / single_iteration_time))`
//! iterations (budget 2 s by default) on a fresh heap each, and the
//! wallclock is the mean. `--one-shot` runs exactly one timed iteration for
//! use under an external profiler.

use std::time::{Duration, Instant};

use crate::error::{HeapError, RunError};
use crate::heap::{Handle, PriorityQueue};
use crate::metrics::{trace_id, MetricRecord};
use crate::trace::{DummyReport, Opcode, Trace};
use crate::variant::HeapVariant;

#[derive(Debug, Clone, Copy)]
pub struct RunOptions {
    pub min_iterations: u32,
    pub time_budget: Duration,
    /// Exactly one timed iteration (for profiler runs).
    pub one_shot: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            min_iterations: 5,
            time_budget: Duration::from_secs(2),
            one_shot: false,
        }
    }
}

/// The paper's iteration rule: at least `min_iters`, and enough to fill the
/// wallclock budget given one iteration costs `single`.
pub fn iterations_for(min_iters: u32, budget: Duration, single: Duration) -> u32 {
    let single_ns = single.as_nanos().max(1);
    let by_budget = budget.as_nanos().div_ceil(single_ns);
    min_iters.max(by_budget.min(u32::MAX as u128) as u32)
}

/// Replays every record against `heap`, checking embedded expected answers.
/// Returns the number of records executed.
pub fn replay_trace(heap: &mut dyn PriorityQueue, trace: &Trace) -> Result<usize, RunError> {
    let mut handles: Vec<Handle> = Vec::with_capacity(trace.header.insert_count as usize);
    for (index, rec) in trace.records.iter().enumerate() {
        match rec.opcode {
            Opcode::Insert => {
                debug_assert_eq!(rec.id as usize, handles.len(), "ids are insertion ordinals");
                let h = heap
                    .insert(rec.id, rec.key)
                    .map_err(|source| RunError::Heap { index, source })?;
                handles.push(h);
            }
            Opcode::DeleteMin => {
                let (got_item, got_key) = heap
                    .delete_min()
                    .map_err(|source| RunError::Heap { index, source })?;
                if trace.header.expected_embedded
                    && (got_item, got_key) != (rec.id, rec.key)
                {
                    return Err(RunError::Mismatch {
                        index,
                        got_item,
                        got_key,
                        want_item: rec.id,
                        want_key: rec.key,
                    });
                }
            }
            Opcode::DecreaseKey => {
                let handle = handles[rec.id as usize];
                match heap.decrease_key(handle, rec.key) {
                    Ok(()) => {}
                    Err(HeapError::Unsupported(_)) => {
                        return Err(RunError::UnsupportedOpcode {
                            opcode: rec.opcode.name(),
                            index,
                        });
                    }
                    Err(source) => return Err(RunError::Heap { index, source }),
                }
            }
        }
    }
    Ok(trace.records.len())
}

/// Mean live size over the trace's operations, rounded to nearest.
fn mean_live(trace: &Trace) -> u64 {
    if trace.records.is_empty() {
        return 0;
    }
    let mut live = 0i64;
    let mut sum = 0i64;
    for r in &trace.records {
        match r.opcode {
            Opcode::Insert => live += 1,
            Opcode::DeleteMin => live -= 1,
            Opcode::DecreaseKey => {}
        }
        sum += live;
    }
    ((sum as f64 / trace.records.len() as f64).round() as i64).max(0) as u64
}

/// Runs one instrumented iteration for counters, then the timing protocol.
pub fn run_driver(
    variant: HeapVariant,
    trace: &Trace,
    options: &RunOptions,
) -> Result<MetricRecord, RunError> {
    if trace.header.decrease_count > 0 && !variant.supports_decrease_key() {
        let index = trace
            .records
            .iter()
            .position(|r| r.opcode == Opcode::DecreaseKey)
            .unwrap_or(0);
        return Err(RunError::UnsupportedOpcode {
            opcode: Opcode::DecreaseKey.name(),
            index,
        });
    }
    let capacity = trace.header.max_live as usize;
    // Instrumented pass: counters from exactly one iteration.
    let mut heap = variant.build(capacity);
    replay_trace(heap.as_mut(), trace)?;
    let stats = heap.stats();
    drop(heap);
    // Timing passes: fresh heap per iteration, mean wallclock.
    let first = {
        let mut heap = variant.build(capacity);
        let t0 = Instant::now();
        replay_trace(heap.as_mut(), trace)?;
        t0.elapsed()
    };
    let iterations = if options.one_shot {
        1
    } else {
        iterations_for(options.min_iterations, options.time_budget, first)
    };
    let mut total = first;
    for _ in 1..iterations {
        let mut heap = variant.build(capacity);
        let t0 = Instant::now();
        replay_trace(heap.as_mut(), trace)?;
        total += t0.elapsed();
    }
    Ok(MetricRecord {
        variant: variant.name(),
        trace: trace_id(&trace.header),
        wallclock_ns: (total.as_nanos() / iterations as u128) as u64,
        iterations,
        comparisons: stats.comparisons,
        node_reads: stats.node_reads,
        node_writes: stats.node_writes,
        links: stats.links,
        cuts: stats.cuts,
        marks: stats.marks,
        inserts: trace.header.insert_count,
        deletes: trace.header.delete_count,
        decreases: trace.header.decrease_count,
        n_live: mean_live(trace),
        external: Default::default(),
    })
}

/// Wraps a dummy (parse-only) replay as a metric record for subtraction.
pub fn dummy_metric(trace: &Trace, report: &DummyReport) -> MetricRecord {
    MetricRecord {
        variant: "dummy".to_string(),
        trace: trace_id(&trace.header),
        wallclock_ns: report.wallclock_ns,
        iterations: 1,
        comparisons: 0,
        node_reads: 0,
        node_writes: 0,
        links: 0,
        cuts: 0,
        marks: 0,
        inserts: trace.header.insert_count,
        deletes: trace.header.delete_count,
        decreases: trace.header.decrease_count,
        n_live: mean_live(trace),
        external: Default::default(),
    }
}

/// Subtracts the dummy driver's wallclock and external columns. Software
/// heap counters pass through (the dummy performs no heap operations).
/// Negative results clamp to zero with a warning.
pub fn subtract_baseline(
    record: &MetricRecord,
    dummy: &MetricRecord,
) -> Result<MetricRecord, RunError> {
    if record.trace != dummy.trace {
        return Err(RunError::TraceMismatch(
            record.trace.clone(),
            dummy.trace.clone(),
        ));
    }
    let mut out = record.clone();
    if dummy.wallclock_ns > out.wallclock_ns {
        log::warn!(
            "dummy baseline ({} ns) exceeds {} ({} ns); clamping to zero",
            dummy.wallclock_ns,
            out.variant,
            out.wallclock_ns
        );
        out.wallclock_ns = 0;
    } else {
        out.wallclock_ns -= dummy.wallclock_ns;
    }
    for (k, v) in &mut out.external {
        if let Some(d) = dummy.external.get(k) {
            if d > v {
                log::warn!("dummy baseline column {k} exceeds measurement; clamping");
                *v = 0;
            } else {
                *v -= d;
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::variant::all_variants;
    use crate::workloads::{gen_decrease_key, gen_sort, ArtificialParams, DecreaseMode};

    fn fast_options() -> RunOptions {
        RunOptions {
            min_iterations: 1,
            time_budget: Duration::from_millis(0),
            one_shot: true,
        }
    }

    #[test]
    fn iteration_rule_matches_protocol() {
        let two = Duration::from_secs(2);
        assert_eq!(iterations_for(5, two, Duration::from_millis(500)), 5);
        assert_eq!(iterations_for(5, two, Duration::from_millis(100)), 20);
        assert_eq!(iterations_for(5, two, Duration::from_millis(300)), 7); // ceil(2/0.3)
        assert_eq!(iterations_for(5, two, Duration::from_secs(10)), 5);
    }

    #[test]
    fn every_variant_replays_a_sort_trace() {
        let trace = gen_sort(128, 3);
        for v in all_variants() {
            let rec = run_driver(v, &trace, &fast_options()).unwrap();
            assert_eq!(rec.variant, v.name());
            assert_eq!(rec.inserts, 128);
            assert!(rec.comparisons > 0, "{v}");
        }
    }

    #[test]
    fn implicit_simple_rejects_decrease_traces() {
        let trace = gen_decrease_key(ArtificialParams {
            n: 8,
            c: 1,
            k: 1,
            mode: DecreaseMode::Middle,
            seed: 1,
        });
        let v: HeapVariant = "implicit_simple_2".parse().unwrap();
        match run_driver(v, &trace, &fast_options()) {
            Err(RunError::UnsupportedOpcode { .. }) => {}
            other => panic!("expected unsupported opcode, got {other:?}"),
        }
    }

    #[test]
    fn mismatch_is_reported_with_record_index() {
        let mut trace = gen_sort(8, 4);
        // Corrupt the first embedded expected answer.
        let idx = trace
            .records
            .iter()
            .position(|r| r.opcode == Opcode::DeleteMin)
            .unwrap();
        trace.records[idx].id ^= 1;
        let v: HeapVariant = "pairing".parse().unwrap();
        match run_driver(v, &trace, &fast_options()) {
            Err(RunError::Mismatch { index, .. }) => assert_eq!(index, idx),
            other => panic!("expected mismatch, got {other:?}"),
        }
    }

    #[test]
    fn counters_are_deterministic_across_runs() {
        let trace = gen_decrease_key(ArtificialParams {
            n: 32,
            c: 2,
            k: 2,
            mode: DecreaseMode::Middle,
            seed: 5,
        });
        let v: HeapVariant = "fibonacci".parse().unwrap();
        let a = run_driver(v, &trace, &fast_options()).unwrap();
        let b = run_driver(v, &trace, &fast_options()).unwrap();
        assert_eq!(
            (a.comparisons, a.node_reads, a.node_writes, a.links, a.cuts, a.marks),
            (b.comparisons, b.node_reads, b.node_writes, b.links, b.cuts, b.marks)
        );
    }

    #[test]
    fn baseline_subtraction_clamps_and_checks_trace() {
        let trace = gen_sort(16, 9);
        let v: HeapVariant = "binomial".parse().unwrap();
        let rec = run_driver(v, &trace, &fast_options()).unwrap();
        let mut dummy = rec.clone();
        dummy.variant = "dummy".to_string();
        dummy.wallclock_ns = rec.wallclock_ns / 2;
        let out = subtract_baseline(&rec, &dummy).unwrap();
        assert_eq!(out.wallclock_ns, rec.wallclock_ns - dummy.wallclock_ns);
        assert_eq!(out.comparisons, rec.comparisons);

        dummy.wallclock_ns = rec.wallclock_ns + 1;
        assert_eq!(subtract_baseline(&rec, &dummy).unwrap().wallclock_ns, 0);

        dummy.trace = "other".to_string();
        assert!(matches!(
            subtract_baseline(&rec, &dummy),
            Err(RunError::TraceMismatch(..))
        ));
    }
}

//! Acceptance gate: one test per criterion, each printing a pass line on
//! success (a failed assertion is the fail line). Tests share a global lock
//! so wallclock-sensitive criteria never run next to heavy compute.

use std::sync::{LazyLock, Mutex, MutexGuard, PoisonError};
use std::time::Duration;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use pqlab::metrics::MetricRecord;
use pqlab::report::make_ratio_table;
use pqlab::runner::{iterations_for, run_driver, subtract_baseline, RunOptions};
use pqlab::trace::{trace_validate, Opcode, Trace};
use pqlab::variant::{all_variants, HeapVariant};
use pqlab::workloads::{
    bellman_ford, degeneracy_stats, distances_from_trace, gen_decrease_key, gen_dijkstra,
    gen_grid_graph, gen_insert_delete, gen_random_graph, gen_sort, read_dimacs_gr_from,
    ArtificialParams, DecreaseMode,
};
use pqlab::{make_key, Key64, OracleHeap};

static SERIAL: LazyLock<Mutex<()>> = LazyLock::new(|| Mutex::new(()));

fn serial() -> MutexGuard<'static, ()> {
    SERIAL.lock().unwrap_or_else(PoisonError::into_inner)
}

fn one_shot() -> RunOptions {
    RunOptions {
        min_iterations: 1,
        time_budget: Duration::ZERO,
        one_shot: true,
    }
}

/// Replays a trace, checking the embedded oracle answers (which makes the
/// delete-min sequence comparison exact), and returns the comparison count.
fn replay_checked(v: HeapVariant, trace: &Trace) -> u64 {
    let mut heap = v.build(trace.header.max_live as usize);
    pqlab::runner::replay_trace(heap.as_mut(), trace)
        .unwrap_or_else(|e| panic!("{v} failed: {e}"));
    heap.stats().comparisons
}

#[test]
fn criterion_1_oracle_equivalence() {
    let _guard = serial();
    let variants = all_variants();
    let mut traces = 0usize;
    let mut run = |trace: Trace| {
        assert!(
            trace_validate(&trace).is_empty(),
            "generated trace invalid: {}",
            trace.header.generator
        );
        for v in &variants {
            if trace.header.decrease_count > 0 && !v.supports_decrease_key() {
                continue;
            }
            replay_checked(*v, &trace);
        }
        traces += 1;
    };
    for seed in 0..5u64 {
        for n in [1usize << 8, 1 << 12] {
            run(gen_sort(n, seed));
            for c in [1usize, 32] {
                run(gen_insert_delete(n, c, seed));
                for k in [1usize, 32] {
                    for mode in [DecreaseMode::Middle, DecreaseMode::Min] {
                        run(gen_decrease_key(ArtificialParams { n, c, k, mode, seed }));
                    }
                }
            }
        }
    }
    for seed in 0..20u64 {
        for nv in [64usize, 200] {
            run(gen_dijkstra(&gen_random_graph(nv, 4 * nv, 10_000, seed), 0));
        }
    }
    for seed in 0..25u64 {
        run(gen_dijkstra(&gen_grid_graph(8, 8, 100, seed), 0));
        run(gen_dijkstra(&gen_grid_graph(16, 12, 100, seed), 0));
    }
    assert!(traces >= 200, "corpus has only {traces} traces");
    println!("acceptance criterion 1 PASS — oracle equivalence on {traces} traces");
}

#[test]
fn criterion_2_lemma_1_reproduction() {
    let _guard = serial();
    let s1 = degeneracy_stats(1 << 14, 1, 20_260_823, 1 << 12);
    assert!(
        (s1.p_new_min - 0.500).abs() <= 0.02,
        "c=1: p_new_min = {}",
        s1.p_new_min
    );
    assert!(s1.largest_keys_ok, "c=1: live set diverged from n largest");
    let s32 = degeneracy_stats(1 << 14, 32, 20_260_823, 1 << 15);
    assert!(
        (s32.p_new_min - 0.970).abs() <= 0.01,
        "c=32: p_new_min = {}",
        s32.p_new_min
    );
    assert!(s32.largest_keys_ok, "c=32: live set diverged from n largest");
    println!(
        "acceptance criterion 2 PASS — Lemma 1: p(c=1) = {:.3}, p(c=32) = {:.3}, snapshots clean",
        s1.p_new_min, s32.p_new_min
    );
}

#[test]
fn criterion_3_structural_fuzz() {
    let _guard = serial();
    const OPS: usize = 10_000;
    for v in all_variants() {
        let mut rng = ChaCha8Rng::seed_from_u64(0xFACE ^ v.name().len() as u64);
        let mut heap = v.build(OPS);
        let mut oracle = OracleHeap::new();
        let mut handles = Vec::new();
        let mut live: Vec<u32> = Vec::new();
        let mut next_id = 0u32;
        for op in 0..OPS {
            let roll: f64 = rng.gen();
            if live.is_empty() || roll < 0.45 {
                let key = make_key(rng.gen(), next_id);
                handles.push(heap.insert(next_id, key).unwrap());
                oracle.insert(next_id, key).unwrap();
                live.push(next_id);
                next_id += 1;
            } else if roll < 0.80 {
                let (id, key) = heap.delete_min().unwrap();
                assert_eq!((id, key), oracle.delete_min().unwrap(), "{v} op {op}");
                live.retain(|&x| x != id);
            } else if v.supports_decrease_key() {
                let id = live[rng.gen_range(0..live.len())];
                let cur = oracle.key_of(id).unwrap();
                if cur.raw == 0 {
                    continue;
                }
                let new = Key64::from_raw(cur.raw - rng.gen_range(1..=cur.raw.max(2) / 2));
                if !oracle.contains_key(new) {
                    let cuts_before = heap.stats().cuts;
                    heap.decrease_key(handles[id as usize], new).unwrap();
                    oracle.decrease_key(id, new).unwrap();
                    if matches!(v.name().as_str(), "rank_pairing_t1" | "rank_pairing_t2") {
                        assert!(
                            heap.stats().cuts - cuts_before <= 1,
                            "{v}: more than one cut in a decrease"
                        );
                    }
                }
            }
            let violations = heap.validate();
            assert!(violations.is_empty(), "{v} op {op}: {violations:?}");
        }
    }
    println!(
        "acceptance criterion 3 PASS — {} ops of structural fuzz per variant, validators clean",
        OPS
    );
}

#[test]
fn criterion_4_protocol_arithmetic() {
    let _guard = serial();
    // Iteration rule on synthetic timings.
    let two = Duration::from_secs(2);
    assert_eq!(iterations_for(5, two, Duration::from_millis(500)), 5);
    assert_eq!(iterations_for(5, two, Duration::from_millis(100)), 20);
    assert_eq!(iterations_for(5, two, Duration::from_millis(700)), 5); // ceil(2/0.7)=3
    assert_eq!(iterations_for(5, two, Duration::from_millis(7)), 286);
    // Baseline subtraction fixture.
    let fixture = |variant: &str, wall: u64, comparisons: u64| MetricRecord {
        variant: variant.into(),
        trace: "fixture".into(),
        wallclock_ns: wall,
        iterations: 5,
        comparisons,
        node_reads: 0,
        node_writes: 0,
        links: 0,
        cuts: 0,
        marks: 0,
        inserts: 10,
        deletes: 10,
        decreases: 0,
        n_live: 5,
        external: Default::default(),
    };
    let dummy = fixture("dummy", 2_000_000, 0);
    let rec = subtract_baseline(&fixture("pairing", 10_000_000, 123), &dummy).unwrap();
    assert_eq!(rec.wallclock_ns, 8_000_000);
    assert_eq!(rec.comparisons, 123);
    let clamped = subtract_baseline(&fixture("pairing", 1_000_000, 9), &dummy).unwrap();
    assert_eq!(clamped.wallclock_ns, 0);
    // Ratio table against hand-computed values.
    let table = make_ratio_table(
        &[
            fixture("a", 40, 400),
            fixture("b", 10, 100),
            fixture("c", 20, 300),
        ],
        &["time", "comparisons"],
    );
    let rows: Vec<(&str, f64, f64)> = table
        .rows
        .iter()
        .map(|r| {
            (
                r.variant.as_str(),
                r.cells[0].unwrap().ratio,
                r.cells[1].unwrap().ratio,
            )
        })
        .collect();
    assert_eq!(
        rows,
        vec![("b", 1.0, 1.0), ("c", 2.0, 3.0), ("a", 4.0, 4.0)]
    );
    assert!(table.rows[0].cells[0].unwrap().is_min);
    println!("acceptance criterion 4 PASS — iteration rule, baseline subtraction, ratio table");
}

#[test]
fn criterion_5_degenerate_workload_trend() {
    let _guard = serial();
    let trace = gen_insert_delete(1 << 17, 32, 7);
    let implicit2: HeapVariant = "implicit_2".parse().unwrap();
    let pairing: HeapVariant = "pairing".parse().unwrap();
    let binomial: HeapVariant = "binomial".parse().unwrap();
    let mut agree = 0;
    let mut detail = Vec::new();
    for _round in 0..3 {
        let wall = |v| run_driver(v, &trace, &one_shot()).unwrap().wallclock_ns;
        let (wi, wp, wb) = (wall(implicit2), wall(pairing), wall(binomial));
        detail.push(format!("implicit_2={wi} pairing={wp} binomial={wb}"));
        if wp < wi && wb < wi {
            agree += 1;
        }
    }
    assert!(
        agree >= 2,
        "queue-based structures did not beat implicit_2 in 2/3 runs: {detail:?}"
    );
    println!(
        "acceptance criterion 5 PASS — pairing and binomial beat implicit_2 in {agree}/3 runs"
    );
}

#[test]
fn criterion_6_sorting_trend() {
    let _guard = serial();
    let trace = gen_sort(1 << 20, 11);
    let variants = all_variants();
    let mut agree = 0;
    let mut detail = Vec::new();
    for _round in 0..3 {
        let mut walls: Vec<(String, u64)> = variants
            .iter()
            .map(|v| {
                (
                    v.name(),
                    run_driver(*v, &trace, &one_shot()).unwrap().wallclock_ns,
                )
            })
            .collect();
        walls.sort_by_key(|(_, w)| *w);
        let rank_simple4 = walls
            .iter()
            .position(|(n, _)| n == "implicit_simple_4")
            .unwrap();
        let fastest = walls[0].1;
        let fib = walls.iter().find(|(n, _)| n == "fibonacci").unwrap().1;
        detail.push(format!(
            "implicit_simple_4 rank {}, fibonacci/fastest = {:.2}",
            rank_simple4 + 1,
            fib as f64 / fastest as f64
        ));
        if rank_simple4 < 3 && fib >= 2 * fastest {
            agree += 1;
        }
    }
    assert!(agree >= 2, "sorting trend failed: {detail:?}");
    println!("acceptance criterion 6 PASS — sorting trend held in {agree}/3 runs ({})",
        detail.last().unwrap());
}

#[test]
fn criterion_7_padding_experiment() {
    let _guard = serial();
    let trace = gen_decrease_key(ArtificialParams {
        n: 1 << 17,
        c: 2,
        k: 2,
        mode: DecreaseMode::Middle,
        seed: 3,
    });
    for base in ["pairing", "implicit_4"] {
        let mut walls = Vec::new();
        let mut comps = Vec::new();
        for pad in [1usize, 2, 4] {
            let v: HeapVariant = base.parse().unwrap();
            let v = v.with_pad(pad);
            // Min-of-3 to suppress scheduler noise; comparisons from one run.
            let runs: Vec<MetricRecord> = (0..3)
                .map(|_| run_driver(v, &trace, &one_shot()).unwrap())
                .collect();
            walls.push(runs.iter().map(|r| r.wallclock_ns).min().unwrap());
            comps.push(runs[0].comparisons);
        }
        assert!(
            comps[0] == comps[1] && comps[1] == comps[2],
            "{base}: padding changed comparison counts: {comps:?}"
        );
        assert!(
            walls[0] <= walls[1] && walls[1] <= walls[2],
            "{base}: wallclock not monotone over padding: {walls:?}"
        );
        println!(
            "  {base}: pad 1/2/4 wallclock {walls:?} ns, comparisons {}",
            comps[0]
        );
    }
    println!("acceptance criterion 7 PASS — padding leaves comparisons fixed, wallclock monotone");
}

#[test]
fn criterion_8_dijkstra_correctness() {
    let _guard = serial();
    let mut rng = ChaCha8Rng::seed_from_u64(88);
    for g in 0..50 {
        let n = rng.gen_range(16..=256);
        let m = rng.gen_range(n..=2048.min(n * n));
        let graph = gen_random_graph(n, m, 10_000, rng.gen());
        let source = rng.gen_range(0..n) as u32;
        let trace = gen_dijkstra(&graph, source);
        assert!(trace_validate(&trace).is_empty(), "graph {g}: invalid trace");
        assert_eq!(
            distances_from_trace(&trace, n),
            bellman_ford(&graph, source),
            "graph {g}: distances diverge"
        );
    }
    // A provided `.gr` file must parse and generate a valid trace.
    let gr = "c sample road fragment\np sp 5 6\na 1 2 4\na 2 3 1\na 1 3 7\na 3 4 2\na 4 5 1\na 5 1 9\n";
    let graph = read_dimacs_gr_from(std::io::Cursor::new(gr)).unwrap();
    let trace = gen_dijkstra(&graph, 0);
    assert!(trace_validate(&trace).is_empty());
    assert_eq!(distances_from_trace(&trace, 5), bellman_ford(&graph, 0));
    println!("acceptance criterion 8 PASS — Dijkstra matches Bellman-Ford on 50 graphs + .gr file");
}

#[test]
fn criterion_9_allocation_strategy_neutrality() {
    let _guard = serial();
    use pqlab::pool::PoolStrategy;
    let decrease_trace = gen_decrease_key(ArtificialParams {
        n: 128,
        c: 4,
        k: 2,
        mode: DecreaseMode::Middle,
        seed: 5,
    });
    let sort_trace = gen_sort(512, 5);
    for v in all_variants() {
        let trace = if v.supports_decrease_key() {
            &decrease_trace
        } else {
            &sort_trace
        };
        let mut outputs: Vec<(Vec<(u32, Key64)>, u64)> = Vec::new();
        for strategy in [PoolStrategy::Eager, PoolStrategy::Doubling, PoolStrategy::OnDemand] {
            let v = v.with_pool(strategy);
            let mut heap = v.build(trace.header.max_live as usize);
            let mut handles = Vec::new();
            let mut deletes = Vec::new();
            for rec in &trace.records {
                match rec.opcode {
                    Opcode::Insert => handles.push(heap.insert(rec.id, rec.key).unwrap()),
                    Opcode::DeleteMin => deletes.push(heap.delete_min().unwrap()),
                    Opcode::DecreaseKey => heap
                        .decrease_key(handles[rec.id as usize], rec.key)
                        .unwrap(),
                }
            }
            outputs.push((deletes, heap.stats().comparisons));
        }
        assert!(
            outputs.windows(2).all(|w| w[0] == w[1]),
            "{v}: allocation strategy changed behavior"
        );
    }
    println!("acceptance criterion 9 PASS — outputs and comparisons identical across pool strategies");
}

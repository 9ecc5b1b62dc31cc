//! Trace generators: the artificial sort / insert-delete / decrease-key
//! workloads, the degeneracy statistics behind them, and Dijkstra traces
//! from generated or DIMACS-format graphs.
//!
//! Every generator drives the oracle while emitting records, so delete-min
//! expectations are embedded and the decrease-key contract (live target,
//! strictly smaller unique key) holds by construction. Generators are pure
//! functions of their parameters and seed.

use std::collections::BTreeSet;
use std::fmt;
use std::io::BufRead;
use std::path::Path;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::GraphError;
use crate::key::{make_key, ItemId, Key64};
use crate::oracle::OracleHeap;
use crate::trace::{Trace, TraceRecord};

/// Key32 value reserved as infinity in Dijkstra traces.
pub const INF_KEY32: u32 = u32::MAX;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecreaseMode {
    /// New key uniform strictly between the current minimum and the old key.
    Middle,
    /// New key one below the current minimum: the item becomes the minimum.
    Min,
}

impl fmt::Display for DecreaseMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DecreaseMode::Middle => "middle",
            DecreaseMode::Min => "min",
        })
    }
}

impl FromStr for DecreaseMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "middle" => Ok(DecreaseMode::Middle),
            "min" => Ok(DecreaseMode::Min),
            other => Err(format!("unknown decrease mode `{other}`")),
        }
    }
}

/// Parameters of the artificial workloads: `n` warmup inserts, then `c*n`
/// iterations, each performing `k` decreases where applicable.
#[derive(Debug, Clone, Copy)]
pub struct ArtificialParams {
    pub n: usize,
    pub c: usize,
    pub k: usize,
    pub mode: DecreaseMode,
    pub seed: u64,
}

fn params_kv(p: &ArtificialParams, with_ck: bool, with_k: bool) -> Vec<(String, String)> {
    let mut kv = vec![("n".to_string(), p.n.to_string())];
    if with_ck {
        kv.push(("c".to_string(), p.c.to_string()));
    }
    if with_k {
        kv.push(("k".to_string(), p.k.to_string()));
        kv.push(("mode".to_string(), p.mode.to_string()));
    }
    kv.push(("seed".to_string(), p.seed.to_string()));
    kv
}

/// `n` random insertions followed by `n` minimum deletions.
pub fn gen_sort(n: usize, seed: u64) -> Trace {
    assert!(n >= 1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut oracle = OracleHeap::new();
    let mut records = Vec::with_capacity(2 * n);
    for id in 0..n as ItemId {
        let key = make_key(rng.gen::<u32>(), id);
        oracle.insert(id, key).unwrap();
        records.push(TraceRecord::insert(id, key));
    }
    for _ in 0..n {
        let (id, key) = oracle.delete_min().unwrap();
        records.push(TraceRecord::delete_min(id, key));
    }
    let p = ArtificialParams { n, c: 0, k: 0, mode: DecreaseMode::Middle, seed };
    Trace::from_records("sort", params_kv(&p, false, false), records)
}

/// `n` warmup inserts, then `c*n` iterations of one insert + one delete-min.
pub fn gen_insert_delete(n: usize, c: usize, seed: u64) -> Trace {
    assert!(n >= 1 && c >= 1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut oracle = OracleHeap::new();
    let mut records = Vec::with_capacity(n + 2 * c * n);
    let mut next_id: ItemId = 0;
    for _ in 0..n {
        let key = make_key(rng.gen::<u32>(), next_id);
        oracle.insert(next_id, key).unwrap();
        records.push(TraceRecord::insert(next_id, key));
        next_id += 1;
    }
    for _ in 0..c * n {
        let key = make_key(rng.gen::<u32>(), next_id);
        oracle.insert(next_id, key).unwrap();
        records.push(TraceRecord::insert(next_id, key));
        next_id += 1;
        let (id, key) = oracle.delete_min().unwrap();
        records.push(TraceRecord::delete_min(id, key));
    }
    let p = ArtificialParams { n, c, k: 0, mode: DecreaseMode::Middle, seed };
    Trace::from_records("insert_delete", params_kv(&p, true, false), records)
}

/// Picks a uniform live item other than the current minimum.
fn pick_non_min(rng: &mut ChaCha8Rng, live: &[ItemId], min_id: ItemId) -> ItemId {
    loop {
        let id = live[rng.gen_range(0..live.len())];
        if id != min_id {
            return id;
        }
    }
}

/// `n` warmup inserts, then `c*n` iterations of one insert, `k` decreases on
/// random non-minimum items, and one delete-min.
pub fn gen_decrease_key(p: ArtificialParams) -> Trace {
    let ArtificialParams { n, c, k, mode, seed } = p;
    assert!(n >= 2, "a non-minimum target must exist");
    assert!(c >= 1 && k >= 1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut oracle = OracleHeap::new();
    let mut records = Vec::with_capacity(n + c * n * (k + 2));
    let mut next_id: ItemId = 0;
    // Dense list of live ids for uniform target selection.
    let mut live: Vec<ItemId> = Vec::with_capacity(n + 1);
    let mut pos: Vec<usize> = Vec::new();
    let add_live = |live: &mut Vec<ItemId>, pos: &mut Vec<usize>, id: ItemId| {
        if pos.len() <= id as usize {
            pos.resize(id as usize + 1, usize::MAX);
        }
        pos[id as usize] = live.len();
        live.push(id);
    };
    let remove_live = |live: &mut Vec<ItemId>, pos: &mut Vec<usize>, id: ItemId| {
        let at = pos[id as usize];
        let last = *live.last().unwrap();
        live.swap_remove(at);
        if last != id {
            pos[last as usize] = at;
        }
        pos[id as usize] = usize::MAX;
    };
    for _ in 0..n {
        let key = make_key(rng.gen::<u32>(), next_id);
        oracle.insert(next_id, key).unwrap();
        records.push(TraceRecord::insert(next_id, key));
        add_live(&mut live, &mut pos, next_id);
        next_id += 1;
    }
    for _ in 0..c * n {
        let key = make_key(rng.gen::<u32>(), next_id);
        oracle.insert(next_id, key).unwrap();
        records.push(TraceRecord::insert(next_id, key));
        add_live(&mut live, &mut pos, next_id);
        next_id += 1;
        for _ in 0..k {
            let (min_id, min_key) = oracle.find_min().unwrap();
            let new = match mode {
                DecreaseMode::Min => {
                    let target = pick_non_min(&mut rng, &live, min_id);
                    assert!(min_key.raw > 0, "min-mode key underflow (seed {seed})");
                    (target, Key64::from_raw(min_key.raw - 1))
                }
                DecreaseMode::Middle => loop {
                    let target = pick_non_min(&mut rng, &live, min_id);
                    let cur = oracle.key_of(target).unwrap().raw;
                    if cur - min_key.raw < 2 {
                        continue; // no integer strictly between; re-pick
                    }
                    let raw = rng.gen_range(min_key.raw + 1..cur);
                    if oracle.contains_key(Key64::from_raw(raw)) {
                        continue;
                    }
                    break (target, Key64::from_raw(raw));
                },
            };
            oracle.decrease_key(new.0, new.1).unwrap();
            records.push(TraceRecord::decrease_key(new.0, new.1));
        }
        let (id, key) = oracle.delete_min().unwrap();
        records.push(TraceRecord::delete_min(id, key));
        remove_live(&mut live, &mut pos, id);
    }
    Trace::from_records("decrease_key", params_kv(&p, true, true), records)
}

/// Lemma-1 statistics for the insert-delete workload.
#[derive(Debug, Clone, Copy)]
pub struct DegeneracyStats {
    /// Probability that one more uniform insert would land below the final
    /// minimum, estimated by probe draws against the end state. At the end
    /// of `c*n` iterations this approaches `c / (c + 1)`.
    pub p_new_min: f64,
    /// True iff at every sampled point the live set equalled the `n`
    /// largest keys inserted so far.
    pub largest_keys_ok: bool,
    /// Number of live-set snapshots checked.
    pub samples: usize,
}

/// Simulates `gen_insert_delete(n, c, seed)` on the oracle and measures how
/// degenerate the workload becomes.
pub fn degeneracy_stats(n: usize, c: usize, seed: u64, sample_every: usize) -> DegeneracyStats {
    assert!(n >= 1 && c >= 1 && sample_every >= 1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut oracle = OracleHeap::new();
    let mut inserted: BTreeSet<u64> = BTreeSet::new();
    let mut next_id: ItemId = 0;
    let insert = |oracle: &mut OracleHeap, inserted: &mut BTreeSet<u64>,
                      rng: &mut ChaCha8Rng, next_id: &mut ItemId| {
        let key = make_key(rng.gen::<u32>(), *next_id);
        oracle.insert(*next_id, key).unwrap();
        inserted.insert(key.raw);
        *next_id += 1;
    };
    for _ in 0..n {
        insert(&mut oracle, &mut inserted, &mut rng, &mut next_id);
    }
    let mut largest_keys_ok = true;
    let mut samples = 0usize;
    for iter in 0..c * n {
        insert(&mut oracle, &mut inserted, &mut rng, &mut next_id);
        oracle.delete_min().unwrap();
        if (iter + 1) % sample_every == 0 || iter + 1 == c * n {
            samples += 1;
            let top_n = inserted.iter().rev().take(n);
            let mut live: Vec<u64> = oracle.live_keys().collect();
            live.reverse();
            if !top_n.eq(live.iter()) {
                largest_keys_ok = false;
            }
        }
    }
    // Probe the end state: the fraction of fresh uniform keys that would
    // become the new minimum. Probes do not mutate the oracle.
    let min = oracle.find_min().unwrap().1.raw;
    const PROBES: usize = 1 << 16;
    let below = (0..PROBES)
        .filter(|_| make_key(rng.gen::<u32>(), next_id).raw < min)
        .count();
    DegeneracyStats {
        p_new_min: below as f64 / PROBES as f64,
        largest_keys_ok,
        samples,
    }
}

// ---- graphs --------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Arc {
    pub from: u32,
    pub to: u32,
    pub w: u32,
}

/// Directed weighted graph with a CSR adjacency index.
#[derive(Debug, Clone)]
pub struct Graph {
    pub n: usize,
    pub arcs: Vec<Arc>,
    adj_start: Vec<u32>,
}

impl Graph {
    pub fn from_arcs(n: usize, mut arcs: Vec<Arc>) -> Self {
        arcs.sort_by_key(|a| a.from);
        let mut adj_start = vec![0u32; n + 1];
        for a in &arcs {
            adj_start[a.from as usize + 1] += 1;
        }
        for i in 0..n {
            adj_start[i + 1] += adj_start[i];
        }
        Graph { n, arcs, adj_start }
    }

    pub fn out_arcs(&self, v: u32) -> &[Arc] {
        &self.arcs[self.adj_start[v as usize] as usize..self.adj_start[v as usize + 1] as usize]
    }

    pub fn arc_count(&self) -> usize {
        self.arcs.len()
    }
}

pub fn gen_random_graph(n: usize, m: usize, max_w: u32, seed: u64) -> Graph {
    assert!(n >= 1 && max_w >= 1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let arcs = (0..m)
        .map(|_| Arc {
            from: rng.gen_range(0..n) as u32,
            to: rng.gen_range(0..n) as u32,
            w: rng.gen_range(1..=max_w),
        })
        .collect();
    Graph::from_arcs(n, arcs)
}

/// 4-neighbor grid with both arc directions and independent uniform weights.
pub fn gen_grid_graph(rows: usize, cols: usize, max_w: u32, seed: u64) -> Graph {
    assert!(rows >= 1 && cols >= 1 && max_w >= 1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let id = |r: usize, c: usize| (r * cols + c) as u32;
    let mut arcs = Vec::new();
    for r in 0..rows {
        for c in 0..cols {
            let mut link = |to: u32| {
                arcs.push(Arc {
                    from: id(r, c),
                    to,
                    w: rng.gen_range(1..=max_w),
                });
            };
            if c + 1 < cols {
                link(id(r, c + 1));
            }
            if c > 0 {
                link(id(r, c - 1));
            }
            if r + 1 < rows {
                link(id(r + 1, c));
            }
            if r > 0 {
                link(id(r - 1, c));
            }
        }
    }
    Graph::from_arcs(rows * cols, arcs)
}

/// Reads the 9th DIMACS challenge shortest-path `.gr` format: a `p sp n m`
/// problem line and `a u v w` arc lines, vertices 1-based.
pub fn read_dimacs_gr(path: impl AsRef<Path>) -> Result<Graph, GraphError> {
    let file = std::fs::File::open(path)?;
    read_dimacs_gr_from(std::io::BufReader::new(file))
}

pub fn read_dimacs_gr_from(r: impl BufRead) -> Result<Graph, GraphError> {
    let mut n: Option<usize> = None;
    let mut arcs = Vec::new();
    for (idx, line) in r.lines().enumerate() {
        let line = line?;
        let lineno = idx + 1;
        let mut tok = line.split_ascii_whitespace();
        match tok.next() {
            None | Some("c") => continue,
            Some("p") => {
                if tok.next() != Some("sp") {
                    return Err(GraphError::Parse {
                        line: lineno,
                        reason: "expected `p sp <n> <m>`".into(),
                    });
                }
                let nv: usize = tok
                    .next()
                    .and_then(|s| s.parse().ok())
                    .ok_or_else(|| GraphError::Parse {
                        line: lineno,
                        reason: "bad vertex count".into(),
                    })?;
                n = Some(nv);
            }
            Some("a") => {
                let n = n.ok_or(GraphError::MissingProblemLine)?;
                let mut next_num = |what: &str| -> Result<u64, GraphError> {
                    tok.next()
                        .and_then(|s| s.parse().ok())
                        .ok_or_else(|| GraphError::Parse {
                            line: lineno,
                            reason: format!("bad {what}"),
                        })
                };
                let u = next_num("source vertex")?;
                let v = next_num("target vertex")?;
                let w = next_num("weight")?;
                for &vertex in [&u, &v] {
                    if vertex < 1 || vertex > n as u64 {
                        return Err(GraphError::VertexRange { line: lineno, vertex });
                    }
                }
                if w >= INF_KEY32 as u64 {
                    return Err(GraphError::Parse {
                        line: lineno,
                        reason: format!("weight {w} exceeds the representable range"),
                    });
                }
                arcs.push(Arc {
                    from: (u - 1) as u32,
                    to: (v - 1) as u32,
                    w: w as u32,
                });
            }
            Some(other) => {
                return Err(GraphError::Parse {
                    line: lineno,
                    reason: format!("unknown line type `{other}`"),
                });
            }
        }
    }
    let n = n.ok_or(GraphError::MissingProblemLine)?;
    Ok(Graph::from_arcs(n, arcs))
}

// ---- Dijkstra ------------------------------------------------------------

/// Runs Dijkstra from `source` against the oracle and records the exact
/// operation stream: every vertex inserted up front (source at 0, the rest
/// at the infinity key), a decrease per successful relaxation, a delete-min
/// per settled vertex. Unreachable vertices settle at infinity.
pub fn gen_dijkstra(graph: &Graph, source: u32) -> Trace {
    assert!(graph.n >= 1 && (source as usize) < graph.n);
    let mut oracle = OracleHeap::new();
    let mut records = Vec::new();
    for v in 0..graph.n as u32 {
        let key32 = if v == source { 0 } else { INF_KEY32 };
        let key = make_key(key32, v);
        oracle.insert(v, key).unwrap();
        records.push(TraceRecord::insert(v, key));
    }
    let mut settled = vec![false; graph.n];
    while !oracle.is_empty() {
        let (u, key) = oracle.delete_min().unwrap();
        records.push(TraceRecord::delete_min(u, key));
        settled[u as usize] = true;
        let du = key.key32();
        if du == INF_KEY32 {
            continue; // unreachable; nothing to relax
        }
        for a in graph.out_arcs(u) {
            if settled[a.to as usize] {
                continue;
            }
            let cand = du as u64 + a.w as u64;
            assert!(cand < INF_KEY32 as u64, "distance overflows key32 range");
            let cur = oracle.key_of(a.to).unwrap();
            if (cand as u32) < cur.key32() {
                let nk = make_key(cand as u32, a.to);
                oracle.decrease_key(a.to, nk).unwrap();
                records.push(TraceRecord::decrease_key(a.to, nk));
            }
        }
    }
    let params = vec![
        ("n".to_string(), graph.n.to_string()),
        ("m".to_string(), graph.arc_count().to_string()),
        ("source".to_string(), source.to_string()),
    ];
    Trace::from_records("dijkstra", params, records)
}

/// Distances settled by a Dijkstra trace: key32 of each DELETE_MIN record,
/// `u64::MAX` for vertices settled at the infinity key.
pub fn distances_from_trace(trace: &Trace, n: usize) -> Vec<u64> {
    let mut dist = vec![u64::MAX; n];
    for r in &trace.records {
        if r.opcode == crate::trace::Opcode::DeleteMin {
            let d = r.key.key32();
            dist[r.id as usize] = if d == INF_KEY32 { u64::MAX } else { d as u64 };
        }
    }
    dist
}

/// Reference shortest-path distances (no priority queue involved).
pub fn bellman_ford(graph: &Graph, source: u32) -> Vec<u64> {
    let mut dist = vec![u64::MAX; graph.n];
    dist[source as usize] = 0;
    for _ in 0..graph.n.saturating_sub(1) {
        let mut changed = false;
        for a in &graph.arcs {
            let du = dist[a.from as usize];
            if du == u64::MAX {
                continue;
            }
            let cand = du + a.w as u64;
            if cand < dist[a.to as usize] {
                dist[a.to as usize] = cand;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    dist
}

//! `pqlab`: generate operation traces, replay them against a heap variant,
//! and turn the collected metrics into ratio tables and scaled series.
//!
//! The binary is a thin shell over the `pqlab` library. Traces are written
//! in the binary format by default; a `.txt` extension (or `--text`) selects
//! the line-oriented text form. `run` emits one JSON metric record per line
//! so results from many invocations can be concatenated and tabulated later.

use std::fs::OpenOptions;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::time::Duration;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use pqlab::metrics::{read_jsonl_path, trace_id, MetricRecord};
use pqlab::profiler::profiler_import;
use pqlab::report::{make_ratio_table, scaled_series, SeriesScaling};
use pqlab::runner::{dummy_metric, run_driver, subtract_baseline, RunOptions};
use pqlab::trace::{dummy_replay, trace_validate, Trace};
use pqlab::workloads::{
    gen_decrease_key, gen_dijkstra, gen_grid_graph, gen_insert_delete, gen_random_graph, gen_sort,
    read_dimacs_gr, ArtificialParams, DecreaseMode,
};
use pqlab::{all_variants, HeapVariant, PoolStrategy};

#[derive(Parser)]
#[command(name = "pqlab", version, about = "priority-queue laboratory")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a workload trace.
    Gen(GenArgs),
    /// Check a trace file for well-formedness.
    Validate {
        /// Trace file to check.
        #[arg(long)]
        trace: PathBuf,
    },
    /// Replay a trace against one heap variant and emit a metric record.
    Run(RunArgs),
    /// Render metric records as a per-trace ratio table.
    Table {
        /// JSON-lines metrics file.
        #[arg(long)]
        metrics: PathBuf,
        /// Comma-separated column names.
        #[arg(long, default_value = "time,comparisons,node_reads,node_writes,links")]
        columns: String,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Render metric records as a size-scaled series for one variant.
    Series {
        /// JSON-lines metrics file.
        #[arg(long)]
        metrics: PathBuf,
        /// Variant whose records form the series.
        #[arg(long)]
        heap: String,
        #[arg(long, value_enum, default_value_t = Scaling::AllOpsLogn)]
        scaling: Scaling,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Generate the standard workload set, run every variant, print tables.
    Suite(SuiteArgs),
}

#[derive(Copy, Clone, ValueEnum)]
enum Format {
    Text,
    Csv,
}

#[derive(Copy, Clone, ValueEnum)]
enum Scaling {
    /// wallclock / ((inserts + deletes + decreases) * log2(n))
    AllOpsLogn,
    /// wallclock / (inserts + decreases + deletes * log2(n))
    DelminOnlyLogn,
}

#[derive(Copy, Clone, ValueEnum)]
enum Workload {
    Sort,
    InsertDelete,
    DecreaseKey,
    Dijkstra,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, value_enum)]
    workload: Workload,
    /// Output trace path; a `.txt` extension selects the text format.
    #[arg(long)]
    trace: PathBuf,
    /// Warmup size (items in the heap when the measured phase starts).
    #[arg(long, default_value_t = 1 << 12)]
    n: usize,
    /// Iteration multiplier: the measured phase runs c*n rounds.
    #[arg(long, default_value_t = 1)]
    c: usize,
    /// Decreases per round (decrease_key workload only).
    #[arg(long, default_value_t = 1)]
    k: usize,
    /// Decrease target: `middle` or `min`.
    #[arg(long, default_value = "middle")]
    mode: String,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Force the text trace format regardless of extension.
    #[arg(long)]
    text: bool,
    /// DIMACS .gr file (dijkstra workload).
    #[arg(long)]
    gr: Option<PathBuf>,
    /// Grid dimensions `ROWSxCOLS` for a synthetic road-like graph.
    #[arg(long)]
    grid: Option<String>,
    /// Arc count for a uniform random graph on n vertices.
    #[arg(long)]
    arcs: Option<usize>,
    /// Maximum arc weight for synthetic graphs.
    #[arg(long, default_value_t = 10_000)]
    max_w: u32,
    /// Dijkstra source vertex.
    #[arg(long, default_value_t = 0)]
    source: u32,
}

#[derive(Args)]
struct RunArgs {
    /// Variant name (`pairing`, `implicit_4`, ...) or an array family
    /// (`implicit`) combined with `--d`.
    #[arg(long)]
    heap: String,
    /// Arity for array families.
    #[arg(long)]
    d: Option<usize>,
    /// Node padding factor.
    #[arg(long, default_value_t = 1)]
    pad: usize,
    /// Pool allocation strategy: eager, doubling, on_demand.
    #[arg(long, default_value = "eager")]
    pool: String,
    #[arg(long)]
    trace: PathBuf,
    /// Run exactly one timed iteration (for profiler attachment).
    #[arg(long)]
    one_shot: bool,
    /// Minimum timed iterations.
    #[arg(long, default_value_t = 5)]
    min_iters: u32,
    /// Time budget for the timed iterations, in milliseconds.
    #[arg(long, default_value_t = 2000)]
    budget_ms: u64,
    /// Subtract the parse-only dummy driver's costs before reporting.
    #[arg(long)]
    subtract_dummy: bool,
    /// Attach external counters from a profiler report (cg_annotate or
    /// key=value lines).
    #[arg(long)]
    profile: Option<PathBuf>,
    /// Append the record to this JSON-lines file instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SuiteArgs {
    /// Warmup size shared by every workload in the batch.
    #[arg(long, default_value_t = 1 << 14)]
    n: usize,
    #[arg(long, default_value_t = 4)]
    c: usize,
    #[arg(long, default_value_t = 4)]
    k: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Directory for generated traces and per-variant metrics.
    #[arg(long)]
    out_dir: PathBuf,
    /// One timed iteration per (variant, trace) pair.
    #[arg(long)]
    one_shot: bool,
    /// Run up to this many `pqlab run` child processes at once.
    #[arg(long)]
    parallel: Option<usize>,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
}

fn main() -> Result<()> {
    env_logger::init();
    match Cli::parse().command {
        Command::Gen(args) => gen(args),
        Command::Validate { trace } => validate(&trace),
        Command::Run(args) => run(args),
        Command::Table { metrics, columns, format } => table(&metrics, &columns, format),
        Command::Series { metrics, heap, scaling, format } => {
            series(&metrics, &heap, scaling, format)
        }
        Command::Suite(args) => suite(args),
    }
}

fn is_text_path(path: &Path) -> bool {
    path.extension().is_some_and(|e| e == "txt")
}

fn write_trace(trace: &Trace, path: &Path, force_text: bool) -> Result<()> {
    if force_text || is_text_path(path) {
        let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
        trace.write_text(&mut f)?;
    } else {
        trace.write_path(path)?;
    }
    Ok(())
}

fn read_trace(path: &Path) -> Result<Trace> {
    let trace = if is_text_path(path) {
        let mut r = std::io::BufReader::new(std::fs::File::open(path)?);
        Trace::read_text(&mut r)?
    } else {
        Trace::read_path(path)?
    };
    Ok(trace)
}

fn gen(args: GenArgs) -> Result<()> {
    let trace = match args.workload {
        Workload::Sort => gen_sort(args.n, args.seed),
        Workload::InsertDelete => gen_insert_delete(args.n, args.c, args.seed),
        Workload::DecreaseKey => {
            let mode: DecreaseMode = args.mode.parse().map_err(anyhow::Error::msg)?;
            gen_decrease_key(ArtificialParams {
                n: args.n,
                c: args.c,
                k: args.k,
                mode,
                seed: args.seed,
            })
        }
        Workload::Dijkstra => {
            let graph = if let Some(gr) = &args.gr {
                read_dimacs_gr(gr).with_context(|| format!("reading {}", gr.display()))?
            } else if let Some(grid) = &args.grid {
                let (rows, cols) = grid
                    .split_once('x')
                    .and_then(|(r, c)| Some((r.parse().ok()?, c.parse().ok()?)))
                    .context("--grid expects ROWSxCOLS")?;
                gen_grid_graph(rows, cols, args.max_w, args.seed)
            } else {
                let m = args.arcs.unwrap_or(4 * args.n);
                gen_random_graph(args.n, m, args.max_w, args.seed)
            };
            if (args.source as usize) >= graph.n {
                bail!("source {} out of range for {} vertices", args.source, graph.n);
            }
            gen_dijkstra(&graph, args.source)
        }
    };
    write_trace(&trace, &args.trace, args.text)?;
    eprintln!(
        "wrote {} ({} records, max live {})",
        args.trace.display(),
        trace.header.total_ops,
        trace.header.max_live
    );
    Ok(())
}

fn validate(path: &Path) -> Result<()> {
    let trace = read_trace(path)?;
    let violations = trace_validate(&trace);
    if violations.is_empty() {
        println!("ok: {} ({} records)", trace_id(&trace.header), trace.header.total_ops);
        Ok(())
    } else {
        for v in &violations {
            match v.index {
                Some(i) => println!("record {i}: {}", v.reason),
                None => println!("header: {}", v.reason),
            }
        }
        bail!("{} violation(s) in {}", violations.len(), path.display());
    }
}

fn resolve_variant(heap: &str, d: Option<usize>, pad: usize, pool: &str) -> Result<HeapVariant> {
    let name = match d {
        Some(d) => format!("{heap}_{d}"),
        None => heap.to_string(),
    };
    let variant: HeapVariant = name.parse()?;
    let pool: PoolStrategy = pool.parse().map_err(anyhow::Error::msg)?;
    Ok(variant.with_pad(pad).with_pool(pool))
}

fn emit_record(record: &MetricRecord, out: Option<&Path>) -> Result<()> {
    let line = serde_json::to_string(record)?;
    match out {
        Some(path) => {
            let mut f = OpenOptions::new().create(true).append(true).open(path)?;
            writeln!(f, "{line}")?;
        }
        None => println!("{line}"),
    }
    Ok(())
}

fn run(args: RunArgs) -> Result<()> {
    let variant = resolve_variant(&args.heap, args.d, args.pad, &args.pool)?;
    let trace = read_trace(&args.trace)?;
    let options = RunOptions {
        min_iterations: args.min_iters,
        time_budget: Duration::from_millis(args.budget_ms),
        one_shot: args.one_shot,
    };
    let mut record = run_driver(variant, &trace, &options)
        .with_context(|| format!("replaying {} on {}", args.trace.display(), variant))?;
    if args.subtract_dummy {
        // The dummy driver needs the binary format; round-trip text traces
        // through a temporary file.
        let report = if is_text_path(&args.trace) {
            let tmp = std::env::temp_dir().join(format!("pqlab-dummy-{}.pqt", std::process::id()));
            trace.write_path(&tmp)?;
            let report = dummy_replay(&tmp)?;
            let _ = std::fs::remove_file(&tmp);
            report
        } else {
            dummy_replay(&args.trace)?
        };
        record = subtract_baseline(&record, &dummy_metric(&trace, &report))?;
    }
    if let Some(profile) = &args.profile {
        record = profiler_import(profile, &record)
            .with_context(|| format!("importing {}", profile.display()))?;
    }
    emit_record(&record, args.out.as_deref())
}

fn parse_columns(spec: &str) -> Vec<&str> {
    spec.split(',').map(str::trim).filter(|s| !s.is_empty()).collect()
}

fn table(metrics: &Path, columns: &str, format: Format) -> Result<()> {
    let records = read_jsonl_path(metrics)?;
    if records.is_empty() {
        bail!("no metric records in {}", metrics.display());
    }
    let columns = parse_columns(columns);
    // One table per distinct trace, in first-seen order.
    let mut traces: Vec<String> = Vec::new();
    for r in &records {
        if !traces.contains(&r.trace) {
            traces.push(r.trace.clone());
        }
    }
    for t in &traces {
        let group: Vec<MetricRecord> =
            records.iter().filter(|r| &r.trace == t).cloned().collect();
        let table = make_ratio_table(&group, &columns);
        match format {
            Format::Text => print!("{}", table.render_text()),
            Format::Csv => print!("{}", table.render_csv()),
        }
        println!();
    }
    Ok(())
}

fn series(metrics: &Path, heap: &str, scaling: Scaling, format: Format) -> Result<()> {
    let records: Vec<MetricRecord> = read_jsonl_path(metrics)?
        .into_iter()
        .filter(|r| r.variant == heap)
        .collect();
    if records.is_empty() {
        bail!("no records for variant {heap} in {}", metrics.display());
    }
    let scaling = match scaling {
        Scaling::AllOpsLogn => SeriesScaling::AllOpsLogN,
        Scaling::DelminOnlyLogn => SeriesScaling::DelminOnlyLogN,
    };
    let points = scaled_series(&records, scaling);
    match format {
        Format::Csv => {
            println!("n,ns_per_scaled_op");
            for p in &points {
                println!("{},{:.4}", p.n, p.value);
            }
        }
        Format::Text => {
            for p in &points {
                println!("{:>12}  {:>10.4}", p.n, p.value);
            }
        }
    }
    Ok(())
}

fn suite(args: SuiteArgs) -> Result<()> {
    std::fs::create_dir_all(&args.out_dir)?;
    let SuiteArgs { n, c, k, seed, .. } = args;
    let mut traces: Vec<(String, Trace)> = vec![
        ("sort".into(), gen_sort(n, seed)),
        ("insert_delete".into(), gen_insert_delete(n, c, seed)),
    ];
    for mode in [DecreaseMode::Middle, DecreaseMode::Min] {
        traces.push((
            format!("decrease_{mode}"),
            gen_decrease_key(ArtificialParams { n, c, k, mode, seed }),
        ));
    }

    let mut jobs: Vec<(HeapVariant, PathBuf, PathBuf)> = Vec::new();
    for (label, trace) in &traces {
        let trace_path = args.out_dir.join(format!("{label}.pqt"));
        trace.write_path(&trace_path)?;
        for variant in all_variants() {
            if trace.header.decrease_count > 0 && !variant.supports_decrease_key() {
                continue;
            }
            let metrics_path = args.out_dir.join(format!("{label}.{variant}.jsonl"));
            let _ = std::fs::remove_file(&metrics_path);
            jobs.push((variant, trace_path.clone(), metrics_path));
        }
    }

    match args.parallel.filter(|&p| p > 1) {
        Some(width) => run_jobs_in_processes(&jobs, width, args.one_shot)?,
        None => {
            let options = RunOptions {
                one_shot: args.one_shot,
                ..RunOptions::default()
            };
            for (variant, trace_path, metrics_path) in &jobs {
                let trace = read_trace(trace_path)?;
                let record = run_driver(*variant, &trace, &options)?;
                let report = dummy_replay(trace_path)?;
                let record = subtract_baseline(&record, &dummy_metric(&trace, &report))?;
                emit_record(&record, Some(metrics_path))?;
            }
        }
    }

    let columns = ["time", "comparisons", "node_reads", "node_writes", "links"];
    for (label, _) in &traces {
        let mut group = Vec::new();
        for (_, _, metrics_path) in jobs.iter().filter(|(_, t, _)| {
            t.file_stem().is_some_and(|s| s.to_string_lossy() == *label)
        }) {
            group.extend(read_jsonl_path(metrics_path)?);
        }
        if group.is_empty() {
            continue;
        }
        let table = make_ratio_table(&group, &columns);
        match args.format {
            Format::Text => print!("{}", table.render_text()),
            Format::Csv => print!("{}", table.render_csv()),
        }
        println!();
    }
    Ok(())
}

/// Fans the (variant, trace) jobs out to child `pqlab run` processes,
/// at most `width` in flight. Wallclock numbers from concurrent children
/// contend for cores; use width 1 or the in-process path when timing
/// fidelity matters more than throughput.
fn run_jobs_in_processes(
    jobs: &[(HeapVariant, PathBuf, PathBuf)],
    width: usize,
    one_shot: bool,
) -> Result<()> {
    let exe = std::env::current_exe()?;
    let mut pending = jobs.iter();
    let mut in_flight: Vec<(std::process::Child, String)> = Vec::new();
    loop {
        while in_flight.len() < width {
            let Some((variant, trace_path, metrics_path)) = pending.next() else {
                break;
            };
            let mut cmd = std::process::Command::new(&exe);
            cmd.arg("run")
                .arg("--heap")
                .arg(variant.name())
                .arg("--pad")
                .arg(variant.pad_factor.to_string())
                .arg("--pool")
                .arg(variant.pool_strategy.to_string())
                .arg("--trace")
                .arg(trace_path)
                .arg("--subtract-dummy")
                .arg("--out")
                .arg(metrics_path);
            if one_shot {
                cmd.arg("--one-shot");
            }
            let child = cmd.spawn().with_context(|| format!("spawning run for {variant}"))?;
            in_flight.push((child, variant.name()));
        }
        let Some((mut child, name)) = in_flight.pop() else {
            break;
        };
        let status = child.wait()?;
        if !status.success() {
            bail!("child run for {name} exited with {status}");
        }
    }
    Ok(())
}

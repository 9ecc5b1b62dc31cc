//! End-to-end tests of the `pqlab` binary: generate, validate, run, and
//! tabulate through the real command-line surface.

use std::path::Path;
use std::process::{Command, Output};

fn pqlab(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pqlab"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn expect_ok(out: &Output) -> String {
    assert!(
        out.status.success(),
        "exit {:?}\nstdout: {}\nstderr: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr),
    );
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn gen_validate_run_table_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    expect_ok(&pqlab(d, &["gen", "--workload", "sort", "--n", "512", "--seed", "3", "--trace", "sort.pqt"]));

    let out = expect_ok(&pqlab(d, &["validate", "--trace", "sort.pqt"]));
    assert!(out.starts_with("ok: sort(n=512,seed=3)"), "got: {out}");

    for heap in ["pairing", "binomial", "implicit_simple_4"] {
        expect_ok(&pqlab(
            d,
            &["run", "--heap", heap, "--trace", "sort.pqt", "--one-shot", "--out", "m.jsonl"],
        ));
    }
    let table = expect_ok(&pqlab(d, &["table", "--metrics", "m.jsonl"]));
    assert!(table.contains("pairing"), "table: {table}");
    assert!(table.contains("implicit_simple_4"));
    assert!(table.contains('*'), "minimum cells should be flagged");

    let csv = expect_ok(&pqlab(d, &["table", "--metrics", "m.jsonl", "--format", "csv"]));
    assert!(csv.starts_with("variant,time,time_min"), "csv: {csv}");
}

#[test]
fn run_emits_a_parseable_record_to_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    expect_ok(&pqlab(
        d,
        &["gen", "--workload", "decrease-key", "--n", "256", "--c", "2", "--k", "2",
          "--mode", "middle", "--seed", "9", "--trace", "dk.pqt"],
    ));
    let out = expect_ok(&pqlab(
        d,
        &["run", "--heap", "implicit", "--d", "4", "--pad", "2", "--pool", "doubling",
          "--trace", "dk.pqt", "--one-shot", "--subtract-dummy"],
    ));
    let record: serde_json::Value = serde_json::from_str(out.trim()).unwrap();
    assert_eq!(record["variant"], "implicit_4");
    assert_eq!(record["trace"], "decrease_key(n=256,c=2,k=2,mode=middle,seed=9)");
    assert!(record["comparisons"].as_u64().unwrap() > 0);
    assert_eq!(record["decreases"].as_u64().unwrap(), 2 * 256 * 2);
}

#[test]
fn text_traces_work_end_to_end() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    expect_ok(&pqlab(d, &["gen", "--workload", "sort", "--n", "64", "--trace", "t.txt"]));
    let body = std::fs::read_to_string(d.join("t.txt")).unwrap();
    assert!(body.lines().count() > 128, "text form is line oriented");
    expect_ok(&pqlab(d, &["validate", "--trace", "t.txt"]));
    let out = expect_ok(&pqlab(
        d,
        &["run", "--heap", "quake", "--trace", "t.txt", "--one-shot", "--subtract-dummy"],
    ));
    let record: serde_json::Value = serde_json::from_str(out.trim()).unwrap();
    assert_eq!(record["inserts"].as_u64().unwrap(), 64);
}

#[test]
fn dijkstra_gen_reads_dimacs_and_grids() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(
        d.join("tiny.gr"),
        "c tiny\np sp 3 3\na 1 2 5\na 2 3 5\na 1 3 20\n",
    )
    .unwrap();
    expect_ok(&pqlab(
        d,
        &["gen", "--workload", "dijkstra", "--gr", "tiny.gr", "--trace", "gr.pqt"],
    ));
    expect_ok(&pqlab(d, &["validate", "--trace", "gr.pqt"]));

    expect_ok(&pqlab(
        d,
        &["gen", "--workload", "dijkstra", "--grid", "8x8", "--trace", "grid.pqt"],
    ));
    let out = expect_ok(&pqlab(d, &["validate", "--trace", "grid.pqt"]));
    assert!(out.contains("dijkstra("), "got: {out}");
}

#[test]
fn series_orders_points_by_size() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    for n in ["1024", "256"] {
        let trace = format!("s{n}.pqt");
        expect_ok(&pqlab(d, &["gen", "--workload", "sort", "--n", n, "--trace", &trace]));
        expect_ok(&pqlab(
            d,
            &["run", "--heap", "pairing", "--trace", &trace, "--one-shot", "--out", "m.jsonl"],
        ));
    }
    let out = expect_ok(&pqlab(
        d,
        &["series", "--metrics", "m.jsonl", "--heap", "pairing", "--format", "csv"],
    ));
    let lines: Vec<&str> = out.trim().lines().collect();
    assert_eq!(lines[0], "n,ns_per_scaled_op");
    assert_eq!(lines.len(), 3);
    let n_of = |l: &str| l.split(',').next().unwrap().parse::<u64>().unwrap();
    assert!(n_of(lines[1]) < n_of(lines[2]), "points sorted by n: {out}");
}

#[test]
fn validate_rejects_garbage() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(d.join("junk.pqt"), b"not a trace").unwrap();
    let out = pqlab(d, &["validate", "--trace", "junk.pqt"]);
    assert!(!out.status.success());
}

#[test]
fn suite_runs_serial_and_parallel() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let out = expect_ok(&pqlab(
        d,
        &["suite", "--n", "128", "--c", "2", "--k", "2", "--one-shot", "--out-dir", "serial"],
    ));
    // One table per workload, each led by its trace id.
    for id in ["sort(", "insert_delete(", "decrease_key("] {
        assert!(out.contains(id), "missing table for {id}: {out}");
    }
    assert!(out.contains("strict_fibonacci"));

    let par = expect_ok(&pqlab(
        d,
        &["suite", "--n", "128", "--c", "2", "--k", "2", "--one-shot", "--out-dir", "par",
          "--parallel", "4"],
    ));
    assert!(par.contains("sort("), "parallel suite output: {par}");
}

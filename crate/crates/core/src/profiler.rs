//! Import of external cache-profiler reports into metric records.
//!
//! Two shapes are accepted, both line oriented and tolerant of comments
//! (`#`, `;`, `--`, or cachegrind's `c`-free noise lines are skipped):
//! - key-value lines: `Ir 12,345` or `inst=12345`, one counter per line;
//! - cg_annotate output: an event-name header line followed by a numbers
//!   line ending in `PROGRAM TOTALS`.
//!
//! Cachegrind events map onto the report columns: Ir→inst, Dr→l1_rd,
//! Dw→l1_wr, D1mr+D1mw→l1_m, DLmr+DLmw→l2_m, Bc→br, Bcm→br_m. Columns with
//! no source stay absent and are omitted from tables.

use std::collections::BTreeMap;
use std::io::BufRead;
use std::path::Path;

use crate::error::TraceError;
use crate::metrics::MetricRecord;

/// The §4-style external column names, in report order.
pub const EXTERNAL_COLUMNS: [&str; 9] = [
    "inst", "l1_rd", "l1_wr", "l2_rd", "l2_wr", "br", "l1_m", "l2_m", "br_m",
];

fn is_event_name(tok: &str) -> bool {
    matches!(
        tok,
        "Ir" | "I1mr" | "ILmr" | "Dr" | "D1mr" | "DLmr" | "Dw" | "D1mw" | "DLmw" | "Bc"
            | "Bcm" | "Bi" | "Bim"
    ) || EXTERNAL_COLUMNS.contains(&tok)
}

fn parse_count(tok: &str) -> Option<u64> {
    let cleaned: String = tok.chars().filter(|c| *c != ',' && *c != '.').collect();
    if cleaned.is_empty() {
        return None;
    }
    cleaned.parse().ok()
}

/// Parses a profiler report into raw event counts.
pub fn parse_report(r: impl BufRead) -> Result<BTreeMap<String, u64>, TraceError> {
    let mut events: BTreeMap<String, u64> = BTreeMap::new();
    let mut header: Option<Vec<String>> = None;
    for line in r.lines() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty()
            || trimmed.starts_with('#')
            || trimmed.starts_with(';')
            || trimmed.starts_with("--")
        {
            continue;
        }
        // Key-value form, possibly with '='.
        let kv: Vec<&str> = trimmed
            .split(|c: char| c.is_whitespace() || c == '=' || c == ':')
            .filter(|s| !s.is_empty())
            .collect();
        if kv.len() == 2 && is_event_name(kv[0]) {
            if let Some(v) = parse_count(kv[1]) {
                *events.entry(kv[0].to_string()).or_default() += v;
                continue;
            }
        }
        // cg_annotate header: every token an event name.
        if kv.len() > 1 && kv.iter().all(|t| is_event_name(t)) {
            header = Some(kv.iter().map(|t| t.to_string()).collect());
            continue;
        }
        // cg_annotate totals row.
        if trimmed.ends_with("PROGRAM TOTALS") {
            if let Some(names) = &header {
                let nums: Vec<u64> = trimmed
                    .split_whitespace()
                    .filter_map(parse_count)
                    .collect();
                for (name, v) in names.iter().zip(nums) {
                    *events.entry(name.clone()).or_default() += v;
                }
            }
        }
    }
    Ok(events)
}

/// Maps raw events onto the report columns.
pub fn map_events(events: &BTreeMap<String, u64>) -> BTreeMap<String, u64> {
    let get = |k: &str| events.get(k).copied();
    let sum2 = |a: &str, b: &str| match (get(a), get(b)) {
        (None, None) => None,
        (x, y) => Some(x.unwrap_or(0) + y.unwrap_or(0)),
    };
    let mut out = BTreeMap::new();
    let mut put = |k: &str, v: Option<u64>| {
        if let Some(v) = v {
            out.insert(k.to_string(), v);
        }
    };
    put("inst", get("Ir").or_else(|| get("inst")));
    put("l1_rd", get("Dr").or_else(|| get("l1_rd")));
    put("l1_wr", get("Dw").or_else(|| get("l1_wr")));
    put("l2_rd", get("l2_rd"));
    put("l2_wr", get("l2_wr"));
    put("br", get("Bc").or_else(|| get("br")));
    put("br_m", get("Bcm").or_else(|| get("br_m")));
    put("l1_m", sum2("D1mr", "D1mw").or_else(|| get("l1_m")));
    put("l2_m", sum2("DLmr", "DLmw").or_else(|| get("l2_m")));
    out
}

/// Populates the external columns of `record` from a report file.
pub fn profiler_import(
    path: impl AsRef<Path>,
    record: &MetricRecord,
) -> Result<MetricRecord, TraceError> {
    let file = std::io::BufReader::new(std::fs::File::open(path)?);
    profiler_import_from(file, record)
}

pub fn profiler_import_from(
    r: impl BufRead,
    record: &MetricRecord,
) -> Result<MetricRecord, TraceError> {
    let events = parse_report(r)?;
    if events.is_empty() {
        return Err(TraceError::BadHeader(
            "profiler report contains no recognizable counters".to_string(),
        ));
    }
    let mut out = record.clone();
    out.external = map_events(&events);
    Ok(out)
}

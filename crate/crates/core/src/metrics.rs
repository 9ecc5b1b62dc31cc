//! Metric records produced by the run driver, stored as JSON lines.

use std::collections::BTreeMap;
use std::io::{BufRead, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::TraceError;
use crate::trace::TraceHeader;

/// One (variant, trace) measurement. `variant` is the canonical variant
/// name ("pairing", "implicit_4", ...); the dummy parse-only driver uses
/// the reserved name "dummy". External columns come from a profiler report
/// and are absent unless imported.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricRecord {
    pub variant: String,
    pub trace: String,
    /// Mean over the timed iterations.
    pub wallclock_ns: u64,
    pub iterations: u32,
    /// Software counters, measured over exactly one instrumented iteration.
    pub comparisons: u64,
    pub node_reads: u64,
    pub node_writes: u64,
    pub links: u64,
    pub cuts: u64,
    pub marks: u64,
    /// Trace composition, for scaled series.
    pub inserts: u64,
    pub deletes: u64,
    pub decreases: u64,
    /// Mean live size over the trace.
    pub n_live: u64,
    /// Profiler-imported columns (inst, l1_rd, ..., br_m), absent by default.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub external: BTreeMap<String, u64>,
}

impl MetricRecord {
    /// Looks up a metric column by name; external columns by their own name.
    pub fn column(&self, name: &str) -> Option<u64> {
        match name {
            "time" | "wallclock_ns" => Some(self.wallclock_ns),
            "comparisons" => Some(self.comparisons),
            "node_reads" => Some(self.node_reads),
            "node_writes" => Some(self.node_writes),
            "links" => Some(self.links),
            "cuts" => Some(self.cuts),
            "marks" => Some(self.marks),
            other => self.external.get(other).copied(),
        }
    }
}

/// Stable trace identifier: generator name plus its parameter block.
pub fn trace_id(header: &TraceHeader) -> String {
    let params: Vec<String> = header
        .params
        .iter()
        .map(|(k, v)| format!("{k}={v}"))
        .collect();
    format!("{}({})", header.generator, params.join(","))
}

pub fn write_jsonl(w: &mut impl Write, records: &[MetricRecord]) -> Result<(), TraceError> {
    for r in records {
        let line = serde_json::to_string(r).expect("metric record serializes");
        writeln!(w, "{line}")?;
    }
    Ok(())
}

pub fn read_jsonl(r: impl BufRead) -> Result<Vec<MetricRecord>, TraceError> {
    let mut out = Vec::new();
    for (idx, line) in r.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rec = serde_json::from_str(&line).map_err(|e| TraceError::BadText {
            line: idx + 1,
            reason: e.to_string(),
        })?;
        out.push(rec);
    }
    Ok(out)
}

pub fn write_jsonl_path(path: impl AsRef<Path>, records: &[MetricRecord]) -> Result<(), TraceError> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    write_jsonl(&mut f, records)
}

pub fn read_jsonl_path(path: impl AsRef<Path>) -> Result<Vec<MetricRecord>, TraceError> {
    let f = std::io::BufReader::new(std::fs::File::open(path)?);
    read_jsonl(f)
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn sample(variant: &str, wall: u64) -> MetricRecord {
        MetricRecord {
            variant: variant.to_string(),
            trace: "sort(n=4,seed=1)".to_string(),
            wallclock_ns: wall,
            iterations: 5,
            comparisons: 100,
            node_reads: 50,
            node_writes: 25,
            links: 10,
            cuts: 2,
            marks: 1,
            inserts: 4,
            deletes: 4,
            decreases: 0,
            n_live: 2,
            external: BTreeMap::new(),
        }
    }

    #[test]
    fn jsonl_round_trip() {
        let mut recs = vec![sample("pairing", 1000), sample("binomial", 2000)];
        recs[1].external.insert("inst".to_string(), 777);
        let mut buf = Vec::new();
        write_jsonl(&mut buf, &recs).unwrap();
        let back = read_jsonl(std::io::Cursor::new(buf)).unwrap();
        assert_eq!(back, recs);
    }

    #[test]
    fn column_lookup() {
        let mut r = sample("pairing", 42);
        r.external.insert("l1_m".to_string(), 9);
        assert_eq!(r.column("time"), Some(42));
        assert_eq!(r.column("comparisons"), Some(100));
        assert_eq!(r.column("l1_m"), Some(9));
        assert_eq!(r.column("l2_m"), None);
    }

    #[test]
    fn bad_line_reports_line_number() {
        let text = "{\"variant\":\"x\"}\n";
        match read_jsonl(std::io::Cursor::new(text)) {
            Err(TraceError::BadText { line: 1, .. }) => {}
            other => panic!("expected BadText, got {other:?}"),
        }
    }
}

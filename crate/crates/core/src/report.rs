//! Reporting: ratio tables (metrics normalized by the per-column minimum,
//! rows sorted by wallclock) and size-scaled series.

use serde::{Deserialize, Serialize};

use crate::metrics::MetricRecord;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatioCell {
    pub raw: u64,
    /// raw / column minimum; raw value itself when the column minimum is 0.
    pub ratio: f64,
    pub is_min: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RatioRow {
    pub variant: String,
    pub cells: Vec<Option<RatioCell>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RatioTable {
    pub trace: String,
    pub columns: Vec<String>,
    /// Columns whose minimum was zero; their cells hold absolute values.
    pub absolute: Vec<bool>,
    /// Sorted by ascending wallclock.
    pub rows: Vec<RatioRow>,
}

/// Builds a ratio table over `columns` ("time" plus any counter or imported
/// column name). All records must stem from the same trace.
pub fn make_ratio_table(records: &[MetricRecord], columns: &[&str]) -> RatioTable {
    assert!(!records.is_empty(), "ratio table needs at least one record");
    let trace = records[0].trace.clone();
    assert!(
        records.iter().all(|r| r.trace == trace),
        "ratio table mixes traces"
    );
    let mut sorted: Vec<&MetricRecord> = records.iter().collect();
    sorted.sort_by_key(|r| r.wallclock_ns);
    let mins: Vec<Option<u64>> = columns
        .iter()
        .map(|c| sorted.iter().filter_map(|r| r.column(c)).min())
        .collect();
    let absolute: Vec<bool> = mins.iter().map(|m| *m == Some(0)).collect();
    let rows = sorted
        .iter()
        .map(|r| RatioRow {
            variant: r.variant.clone(),
            cells: columns
                .iter()
                .zip(&mins)
                .map(|(c, min)| {
                    r.column(c).map(|raw| {
                        let min = min.expect("column has a minimum if any cell exists");
                        let ratio = if min == 0 {
                            raw as f64
                        } else {
                            raw as f64 / min as f64
                        };
                        RatioCell {
                            raw,
                            ratio,
                            is_min: raw == min,
                        }
                    })
                })
                .collect(),
        })
        .collect();
    RatioTable {
        trace,
        columns: columns.iter().map(|c| c.to_string()).collect(),
        absolute,
        rows,
    }
}

impl RatioTable {
    /// Aligned plain-text rendering; column minima marked with `*`.
    pub fn render_text(&self) -> String {
        let mut widths: Vec<usize> = self.columns.iter().map(|c| c.len()).collect();
        let cell_text = |cell: &Option<RatioCell>| -> String {
            match cell {
                None => "-".to_string(),
                Some(c) => {
                    let star = if c.is_min { "*" } else { "" };
                    format!("{:.2}{star}", c.ratio)
                }
            }
        };
        let mut name_w = "variant".len();
        for row in &self.rows {
            name_w = name_w.max(row.variant.len());
            for (i, cell) in row.cells.iter().enumerate() {
                widths[i] = widths[i].max(cell_text(cell).len());
            }
        }
        let mut out = format!("# trace: {}\n", self.trace);
        out.push_str(&format!("{:<name_w$}", "variant"));
        for (i, c) in self.columns.iter().enumerate() {
            let mark = if self.absolute[i] { " (abs)" } else { "" };
            out.push_str(&format!("  {:>w$}{mark}", c, w = widths[i]));
        }
        out.push('\n');
        for row in &self.rows {
            out.push_str(&format!("{:<name_w$}", row.variant));
            for (i, cell) in row.cells.iter().enumerate() {
                out.push_str(&format!("  {:>w$}", cell_text(cell), w = widths[i]));
            }
            out.push('\n');
        }
        out
    }

    /// CSV rendering; minima carry `min=true` in an adjacent column.
    pub fn render_csv(&self) -> String {
        let mut out = String::from("variant");
        for c in &self.columns {
            out.push_str(&format!(",{c},{c}_min"));
        }
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.variant);
            for cell in &row.cells {
                match cell {
                    None => out.push_str(",,"),
                    Some(c) => out.push_str(&format!(",{:.2},{}", c.ratio, c.is_min)),
                }
            }
            out.push('\n');
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeriesScaling {
    /// Divide wallclock by (inserts + deletes + decreases) * log2(n).
    AllOpsLogN,
    /// Divide wallclock by inserts + decreases + deletes * log2(n).
    DelminOnlyLogN,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesPoint {
    pub n: u64,
    /// Nanoseconds per scaled operation.
    pub value: f64,
}

/// Wallclock per scaled operation across sizes, for one (variant, workload)
/// family of records. Records with n < 2 are skipped with a warning (their
/// log factor would vanish).
pub fn scaled_series(records: &[MetricRecord], scaling: SeriesScaling) -> Vec<SeriesPoint> {
    let mut points = Vec::new();
    for r in records {
        if r.n_live < 2 {
            log::warn!("scaled series skips record with live size {}", r.n_live);
            continue;
        }
        let logn = (r.n_live as f64).log2();
        let scaled = match scaling {
            SeriesScaling::AllOpsLogN => {
                (r.inserts + r.deletes + r.decreases) as f64 * logn
            }
            SeriesScaling::DelminOnlyLogN => {
                (r.inserts + r.decreases) as f64 + r.deletes as f64 * logn
            }
        };
        points.push(SeriesPoint {
            n: r.n_live,
            value: r.wallclock_ns as f64 / scaled,
        });
    }
    points.sort_by_key(|p| p.n);
    points
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeMap;

    fn rec(variant: &str, wall: u64, comparisons: u64) -> MetricRecord {
        MetricRecord {
            variant: variant.to_string(),
            trace: "t".to_string(),
            wallclock_ns: wall,
            iterations: 5,
            comparisons,
            node_reads: 0,
            node_writes: 0,
            links: 0,
            cuts: 0,
            marks: 0,
            inserts: 100,
            deletes: 100,
            decreases: 0,
            n_live: 64,
            external: BTreeMap::new(),
        }
    }

    #[test]
    fn ratios_and_row_order() {
        let records = vec![rec("a", 40, 10), rec("b", 10, 30), rec("c", 20, 20)];
        let t = make_ratio_table(&records, &["time", "comparisons"]);
        let order: Vec<&str> = t.rows.iter().map(|r| r.variant.as_str()).collect();
        assert_eq!(order, ["b", "c", "a"]);
        let time_ratios: Vec<f64> = t
            .rows
            .iter()
            .map(|r| r.cells[0].unwrap().ratio)
            .collect();
        assert_eq!(time_ratios, vec![1.0, 2.0, 4.0]);
        assert!(t.rows[0].cells[0].unwrap().is_min);
        // Column minima are independent: comparisons minimum is row "a".
        assert!(t.rows[2].cells[1].unwrap().is_min);
        assert!(t.columns.iter().zip(0..).all(|(_, i)| {
            t.rows.iter().any(|r| r.cells[i].map_or(false, |c| c.ratio == 1.0))
        }));
    }

    #[test]
    fn single_record_table_is_all_ones() {
        let t = make_ratio_table(&[rec("a", 7, 3)], &["time", "comparisons"]);
        assert_eq!(t.rows.len(), 1);
        assert!(t.rows[0].cells.iter().all(|c| c.unwrap().ratio == 1.0));
    }

    #[test]
    fn zero_minimum_column_reports_absolute_values() {
        let records = vec![rec("a", 10, 0), rec("b", 20, 6)];
        let t = make_ratio_table(&records, &["comparisons"]);
        assert!(t.absolute[0]);
        assert_eq!(t.rows[1].cells[0].unwrap().ratio, 6.0);
    }

    #[test]
    fn renderings_contain_min_markers() {
        let records = vec![rec("a", 10, 5), rec("b", 30, 4)];
        let t = make_ratio_table(&records, &["time", "comparisons"]);
        let text = t.render_text();
        assert!(text.contains("1.00*"));
        assert!(text.contains("3.00"));
        let csv = t.render_csv();
        assert!(csv.starts_with("variant,time,time_min,comparisons,comparisons_min"));
        assert!(csv.contains("a,1.00,true"));
    }

    #[test]
    fn series_formula() {
        let mut small = rec("a", 1000, 0);
        small.n_live = 16;
        let mut big = rec("a", 2000, 0);
        big.n_live = 256;
        let pts = scaled_series(&[big.clone(), small.clone()], SeriesScaling::AllOpsLogN);
        assert_eq!(pts.len(), 2);
        assert_eq!(pts[0].n, 16);
        assert!((pts[0].value - 1000.0 / (200.0 * 4.0)).abs() < 1e-9);
        assert!((pts[1].value - 2000.0 / (200.0 * 8.0)).abs() < 1e-9);
        let pts = scaled_series(&[small], SeriesScaling::DelminOnlyLogN);
        assert!((pts[0].value - 1000.0 / (100.0 + 100.0 * 4.0)).abs() < 1e-9);
    }
}

//! Trace files: a recorded operation sequence is the unit of benchmarking.
//!
//! Binary format (`.pqtr`, little-endian, fixed-width records):
//!
//! ```text
//! magic "PQTR" | version u32 | flags u32 | total u64 | inserts u64
//! | deletes u64 | decreases u64 | max_live u64
//! | generator (u32 len + bytes) | param count u32 | {key,value} strings
//! records: opcode u8 | id u32 | key u64            (13 bytes each)
//! ```
//!
//! DELETE_MIN records carry the expected (id, key) answer so drivers can
//! self-check without an oracle at replay time; the header flag records
//! whether those fields are populated. Every record is 13 bytes either way,
//! keeping the dummy driver's parse cost uniform across opcodes.
//!
//! A lossless text form (`.pqtrt`, one op per line) exists for debugging.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;
use std::time::Instant;

use crate::error::TraceError;
use crate::key::{ItemId, Key64};
use crate::oracle::OracleHeap;

pub const MAGIC: [u8; 4] = *b"PQTR";
pub const FORMAT_VERSION: u32 = 1;
const FLAG_EXPECTED: u32 = 1;
pub const RECORD_BYTES: usize = 13;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u8)]
pub enum Opcode {
    Insert = 0,
    DeleteMin = 1,
    DecreaseKey = 2,
}

impl Opcode {
    pub fn name(self) -> &'static str {
        match self {
            Opcode::Insert => "INSERT",
            Opcode::DeleteMin => "DELETE_MIN",
            Opcode::DecreaseKey => "DECREASE_KEY",
        }
    }
}

/// One operation. For INSERT and DECREASE_KEY, `id`/`key` are the operands;
/// for DELETE_MIN they hold the expected answer (zeros when stripped).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TraceRecord {
    pub opcode: Opcode,
    pub id: ItemId,
    pub key: Key64,
}

impl TraceRecord {
    pub fn insert(id: ItemId, key: Key64) -> Self {
        TraceRecord {
            opcode: Opcode::Insert,
            id,
            key,
        }
    }

    pub fn delete_min(expected_id: ItemId, expected_key: Key64) -> Self {
        TraceRecord {
            opcode: Opcode::DeleteMin,
            id: expected_id,
            key: expected_key,
        }
    }

    pub fn decrease_key(id: ItemId, key: Key64) -> Self {
        TraceRecord {
            opcode: Opcode::DecreaseKey,
            id,
            key,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceHeader {
    pub version: u32,
    pub total_ops: u64,
    pub insert_count: u64,
    pub delete_count: u64,
    pub decrease_count: u64,
    pub max_live: u64,
    pub expected_embedded: bool,
    pub generator: String,
    pub params: Vec<(String, String)>,
}

impl TraceHeader {
    pub fn param(&self, key: &str) -> Option<&str> {
        self.params
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    fn check_counts(&self) -> Result<(), TraceError> {
        if self.total_ops != self.insert_count + self.delete_count + self.decrease_count {
            return Err(TraceError::BadHeader(format!(
                "total {} != inserts {} + deletes {} + decreases {}",
                self.total_ops, self.insert_count, self.delete_count, self.decrease_count
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trace {
    pub header: TraceHeader,
    pub records: Vec<TraceRecord>,
}

impl Trace {
    /// Builds a trace from records, deriving the header counts and max-live
    /// size by scanning.
    pub fn from_records(
        generator: impl Into<String>,
        params: Vec<(String, String)>,
        records: Vec<TraceRecord>,
    ) -> Self {
        let mut inserts = 0u64;
        let mut deletes = 0u64;
        let mut decreases = 0u64;
        let mut live = 0i64;
        let mut max_live = 0i64;
        for r in &records {
            match r.opcode {
                Opcode::Insert => {
                    inserts += 1;
                    live += 1;
                    max_live = max_live.max(live);
                }
                Opcode::DeleteMin => {
                    deletes += 1;
                    live -= 1;
                }
                Opcode::DecreaseKey => decreases += 1,
            }
        }
        Trace {
            header: TraceHeader {
                version: FORMAT_VERSION,
                total_ops: records.len() as u64,
                insert_count: inserts,
                delete_count: deletes,
                decrease_count: decreases,
                max_live: max_live as u64,
                expected_embedded: true,
                generator: generator.into(),
                params,
            },
            records,
        }
    }

    /// Zeroes the embedded DELETE_MIN answers (pure-timing form).
    pub fn strip_expected(&mut self) {
        self.header.expected_embedded = false;
        for r in &mut self.records {
            if r.opcode == Opcode::DeleteMin {
                r.id = 0;
                r.key = Key64::from_raw(0);
            }
        }
    }

    pub fn write_binary(&self, w: &mut impl Write) -> Result<(), TraceError> {
        self.header.check_counts()?;
        w.write_all(&MAGIC)?;
        w.write_all(&self.header.version.to_le_bytes())?;
        let flags = if self.header.expected_embedded {
            FLAG_EXPECTED
        } else {
            0
        };
        w.write_all(&flags.to_le_bytes())?;
        for v in [
            self.header.total_ops,
            self.header.insert_count,
            self.header.delete_count,
            self.header.decrease_count,
            self.header.max_live,
        ] {
            w.write_all(&v.to_le_bytes())?;
        }
        write_string(w, &self.header.generator)?;
        w.write_all(&(self.header.params.len() as u32).to_le_bytes())?;
        for (k, v) in &self.header.params {
            write_string(w, k)?;
            write_string(w, v)?;
        }
        for r in &self.records {
            let mut buf = [0u8; RECORD_BYTES];
            buf[0] = r.opcode as u8;
            buf[1..5].copy_from_slice(&r.id.to_le_bytes());
            buf[5..13].copy_from_slice(&r.key.raw.to_le_bytes());
            w.write_all(&buf)?;
        }
        Ok(())
    }

    pub fn write_path(&self, path: impl AsRef<Path>) -> Result<(), TraceError> {
        let path = path.as_ref();
        let mut w = BufWriter::new(File::create(path)?);
        if path.extension().is_some_and(|e| e == "pqtrt") {
            self.write_text(&mut w)?;
        } else {
            self.write_binary(&mut w)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_binary(r: &mut impl Read) -> Result<Self, TraceError> {
        let mut reader = TraceReader::from_reader(r)?;
        let mut records = Vec::with_capacity(reader.header.total_ops as usize);
        while let Some(rec) = reader.next_record()? {
            records.push(rec);
        }
        Ok(Trace {
            header: reader.header,
            records,
        })
    }

    pub fn read_path(path: impl AsRef<Path>) -> Result<Self, TraceError> {
        let path = path.as_ref();
        let mut r = BufReader::new(File::open(path)?);
        if path.extension().is_some_and(|e| e == "pqtrt") {
            Self::read_text(&mut r)
        } else {
            Self::read_binary(&mut r)
        }
    }

    pub fn write_text(&self, w: &mut impl Write) -> Result<(), TraceError> {
        self.header.check_counts()?;
        writeln!(w, "pqtrt {}", self.header.version)?;
        writeln!(
            w,
            "counts {} {} {} {}",
            self.header.total_ops,
            self.header.insert_count,
            self.header.delete_count,
            self.header.decrease_count
        )?;
        writeln!(w, "maxlive {}", self.header.max_live)?;
        writeln!(
            w,
            "expected {}",
            if self.header.expected_embedded { 1 } else { 0 }
        )?;
        writeln!(w, "generator {}", self.header.generator)?;
        for (k, v) in &self.header.params {
            writeln!(w, "param {k} {v}")?;
        }
        writeln!(w, "begin")?;
        for r in &self.records {
            let tag = match r.opcode {
                Opcode::Insert => 'I',
                Opcode::DeleteMin => 'D',
                Opcode::DecreaseKey => 'X',
            };
            writeln!(w, "{tag} {} {}", r.id, r.key.raw)?;
        }
        Ok(())
    }

    pub fn read_text(r: &mut impl BufRead) -> Result<Self, TraceError> {
        let bad = |line: usize, reason: &str| TraceError::BadText {
            line,
            reason: reason.to_string(),
        };
        let mut lines = r.lines().enumerate();
        let mut header = TraceHeader {
            version: FORMAT_VERSION,
            total_ops: 0,
            insert_count: 0,
            delete_count: 0,
            decrease_count: 0,
            max_live: 0,
            expected_embedded: true,
            generator: String::new(),
            params: Vec::new(),
        };
        let mut records = Vec::new();
        let mut in_body = false;
        for (i, line) in &mut lines {
            let line = line?;
            let lineno = i + 1;
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut parts = line.split_whitespace();
            let head = parts.next().unwrap();
            if !in_body {
                match head {
                    "pqtrt" => {
                        header.version = parts
                            .next()
                            .and_then(|s| s.parse().ok())
                            .ok_or_else(|| bad(lineno, "bad version"))?;
                    }
                    "counts" => {
                        let mut next = || {
                            parts
                                .next()
                                .and_then(|s| s.parse::<u64>().ok())
                                .ok_or_else(|| bad(lineno, "bad counts"))
                        };
                        header.total_ops = next()?;
                        header.insert_count = next()?;
                        header.delete_count = next()?;
                        header.decrease_count = next()?;
                    }
                    "maxlive" => {
                        header.max_live = parts
                            .next()
                            .and_then(|s| s.parse().ok())
                            .ok_or_else(|| bad(lineno, "bad maxlive"))?;
                    }
                    "expected" => {
                        header.expected_embedded = parts.next() == Some("1");
                    }
                    "generator" => {
                        header.generator = parts.next().unwrap_or("").to_string();
                    }
                    "param" => {
                        let k = parts.next().ok_or_else(|| bad(lineno, "param key"))?;
                        let v = parts.collect::<Vec<_>>().join(" ");
                        header.params.push((k.to_string(), v));
                    }
                    "begin" => in_body = true,
                    other => return Err(bad(lineno, &format!("unknown header line {other}"))),
                }
            } else {
                let opcode = match head {
                    "I" => Opcode::Insert,
                    "D" => Opcode::DeleteMin,
                    "X" => Opcode::DecreaseKey,
                    other => return Err(bad(lineno, &format!("unknown op tag {other}"))),
                };
                let id: u32 = parts
                    .next()
                    .and_then(|s| s.parse().ok())
                    .ok_or_else(|| bad(lineno, "bad id"))?;
                let raw: u64 = parts
                    .next()
                    .and_then(|s| s.parse().ok())
                    .ok_or_else(|| bad(lineno, "bad key"))?;
                records.push(TraceRecord {
                    opcode,
                    id,
                    key: Key64::from_raw(raw),
                });
            }
        }
        header.check_counts()?;
        Ok(Trace { header, records })
    }
}

fn write_string(w: &mut impl Write, s: &str) -> Result<(), TraceError> {
    w.write_all(&(s.len() as u32).to_le_bytes())?;
    w.write_all(s.as_bytes())?;
    Ok(())
}

/// Streaming binary reader: header up front, records on demand.
pub struct TraceReader<'a> {
    pub header: TraceHeader,
    reader: &'a mut dyn Read,
    offset: u64,
    remaining: u64,
}

impl<'a> TraceReader<'a> {
    pub fn from_reader(r: &'a mut dyn Read) -> Result<Self, TraceError> {
        let mut offset = 0u64;
        let mut magic = [0u8; 4];
        read_exact(r, &mut magic, &mut offset)?;
        if magic != MAGIC {
            return Err(TraceError::BadMagic { offset: 0 });
        }
        let version = read_u32(r, &mut offset)?;
        if version != FORMAT_VERSION {
            return Err(TraceError::BadVersion { version });
        }
        let flags = read_u32(r, &mut offset)?;
        let total_ops = read_u64(r, &mut offset)?;
        let insert_count = read_u64(r, &mut offset)?;
        let delete_count = read_u64(r, &mut offset)?;
        let decrease_count = read_u64(r, &mut offset)?;
        let max_live = read_u64(r, &mut offset)?;
        let generator = read_string(r, &mut offset)?;
        let n_params = read_u32(r, &mut offset)?;
        let mut params = Vec::with_capacity(n_params as usize);
        for _ in 0..n_params {
            let k = read_string(r, &mut offset)?;
            let v = read_string(r, &mut offset)?;
            params.push((k, v));
        }
        let header = TraceHeader {
            version,
            total_ops,
            insert_count,
            delete_count,
            decrease_count,
            max_live,
            expected_embedded: flags & FLAG_EXPECTED != 0,
            generator,
            params,
        };
        header.check_counts()?;
        Ok(TraceReader {
            remaining: header.total_ops,
            header,
            reader: r,
            offset,
        })
    }

    pub fn next_record(&mut self) -> Result<Option<TraceRecord>, TraceError> {
        if self.remaining == 0 {
            return Ok(None);
        }
        let mut buf = [0u8; RECORD_BYTES];
        read_exact(self.reader, &mut buf, &mut self.offset)?;
        self.remaining -= 1;
        let opcode = match buf[0] {
            0 => Opcode::Insert,
            1 => Opcode::DeleteMin,
            2 => Opcode::DecreaseKey,
            other => {
                return Err(TraceError::BadOpcode {
                    opcode: other,
                    offset: self.offset - RECORD_BYTES as u64,
                })
            }
        };
        let id = u32::from_le_bytes(buf[1..5].try_into().unwrap());
        let raw = u64::from_le_bytes(buf[5..13].try_into().unwrap());
        Ok(Some(TraceRecord {
            opcode,
            id,
            key: Key64::from_raw(raw),
        }))
    }
}

fn read_exact(r: &mut dyn Read, buf: &mut [u8], offset: &mut u64) -> Result<(), TraceError> {
    match r.read_exact(buf) {
        Ok(()) => {
            *offset += buf.len() as u64;
            Ok(())
        }
        Err(e) if e.kind() == std::io::ErrorKind::UnexpectedEof => {
            Err(TraceError::Truncated { offset: *offset })
        }
        Err(e) => Err(e.into()),
    }
}

fn read_u32(r: &mut dyn Read, offset: &mut u64) -> Result<u32, TraceError> {
    let mut b = [0u8; 4];
    read_exact(r, &mut b, offset)?;
    Ok(u32::from_le_bytes(b))
}

fn read_u64(r: &mut dyn Read, offset: &mut u64) -> Result<u64, TraceError> {
    let mut b = [0u8; 8];
    read_exact(r, &mut b, offset)?;
    Ok(u64::from_le_bytes(b))
}

fn read_string(r: &mut dyn Read, offset: &mut u64) -> Result<String, TraceError> {
    let len = read_u32(r, offset)? as usize;
    let mut buf = vec![0u8; len];
    read_exact(r, &mut buf, offset)?;
    String::from_utf8(buf).map_err(|_| TraceError::BadHeader("non-utf8 string".into()))
}

/// One problem found by [`trace_validate`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceViolation {
    pub index: Option<usize>,
    pub reason: String,
}

impl std::fmt::Display for TraceViolation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.index {
            Some(i) => write!(f, "record {i}: {}", self.reason),
            None => write!(f, "header: {}", self.reason),
        }
    }
}

/// Replays a trace against the oracle and checks every record invariant,
/// including embedded DELETE_MIN answers and header counts. Violations are
/// returned, not thrown.
pub fn trace_validate(trace: &Trace) -> Vec<TraceViolation> {
    let mut violations = Vec::new();
    let mut oracle = OracleHeap::new();
    let mut counts = (0u64, 0u64, 0u64);
    let mut live = 0i64;
    let mut max_live = 0i64;
    let mut next_id = 0u32;
    for (index, rec) in trace.records.iter().enumerate() {
        let mut fail = |reason: String| {
            violations.push(TraceViolation {
                index: Some(index),
                reason,
            })
        };
        match rec.opcode {
            Opcode::Insert => {
                counts.0 += 1;
                live += 1;
                max_live = max_live.max(live);
                if rec.id != next_id {
                    fail(format!(
                        "insert id {} out of ordinal order (expected {next_id})",
                        rec.id
                    ));
                }
                next_id = next_id.wrapping_add(1);
                if oracle.contains_key(rec.key) {
                    fail(format!("duplicate live key {}", rec.key));
                } else if oracle.insert(rec.id, rec.key).is_err() {
                    fail("insert rejected by oracle".into());
                }
            }
            Opcode::DeleteMin => {
                counts.1 += 1;
                live -= 1;
                match oracle.delete_min() {
                    Ok((item, key)) => {
                        if trace.header.expected_embedded && (rec.id != item || rec.key != key) {
                            fail(format!(
                                "expected answer ({}, {}) but oracle says ({item}, {key})",
                                rec.id, rec.key
                            ));
                        }
                    }
                    Err(_) => fail("delete_min on empty heap".into()),
                }
            }
            Opcode::DecreaseKey => {
                counts.2 += 1;
                if let Err(e) = oracle.decrease_key(rec.id, rec.key) {
                    fail(format!("decrease_key invalid: {e}"));
                }
            }
        }
    }
    let h = &trace.header;
    for (name, want, got) in [
        ("insert count", h.insert_count, counts.0),
        ("delete count", h.delete_count, counts.1),
        ("decrease count", h.decrease_count, counts.2),
        ("total count", h.total_ops, trace.records.len() as u64),
        ("max live", h.max_live, max_live as u64),
    ] {
        if want != got {
            violations.push(TraceViolation {
                index: None,
                reason: format!("{name} mismatch: header {want}, actual {got}"),
            });
        }
    }
    violations
}

/// Result of a dummy (parse-only) replay.
#[derive(Debug, Clone, Copy)]
pub struct DummyReport {
    pub records: u64,
    pub wallclock_ns: u64,
    /// Field fold, kept so the parse cannot be optimized away.
    pub checksum: u64,
}

/// Parses every record and touches every field, performing no heap
/// operations. Captures harness overhead for baseline subtraction.
pub fn dummy_replay(path: impl AsRef<Path>) -> Result<DummyReport, TraceError> {
    let mut file = BufReader::new(File::open(path.as_ref())?);
    let start = Instant::now();
    let mut reader = TraceReader::from_reader(&mut file)?;
    let mut records = 0u64;
    let mut checksum = 0u64;
    while let Some(rec) = reader.next_record()? {
        records += 1;
        checksum = checksum
            .wrapping_mul(31)
            .wrapping_add(rec.opcode as u64)
            .wrapping_add(rec.id as u64)
            .wrapping_add(rec.key.raw);
    }
    Ok(DummyReport {
        records,
        wallclock_ns: start.elapsed().as_nanos() as u64,
        checksum,
    })
}

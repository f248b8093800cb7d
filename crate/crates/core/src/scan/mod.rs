//! The rational direction grid, the parallel scan over it, and the JSON
//! Lines format scans are stored in.
//!
//! A scan file starts with a [`ScanHeader`] line followed by one
//! [`DirectionRecord`] per grid cell, sorted by `(m, n)`. While a scan runs,
//! records are appended in completion order to `<out>.partial`, which is
//! what `resume` picks up after an interruption.

pub mod areas;
pub mod fractal;
pub mod render;

use std::collections::HashSet;
use std::fs::{self, File, OpenOptions};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::classify::Classifier;
use crate::dynamics::{ClassifyOptions, DirectionRecord, RationalDirection, SectionOptions};
use crate::error::ScanError;
use crate::geometry::DispersionRelation;

pub use areas::{zone_areas, zone_areas_with, AreaRow, AreaTable, Normalization};
pub use fractal::{
    box_count_dimension, default_scales, extract_ergodic_set, sausage_dimension, BoxCountReport, Domain,
    FractalMethod,
};
pub use render::{render_ppm, render_svg, RenderOptions};

pub const SCHEMA_VERSION: u32 = 1;

/// First line of a scan file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanHeader {
    pub schema_version: u32,
    pub surface: String,
    #[serde(rename = "E")]
    pub energy: f64,
    #[serde(rename = "N")]
    pub big_n: i64,
    pub tolerances: SectionOptions,
    pub tool_version: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanResult {
    pub header: ScanHeader,
    /// sorted by `(m, n)`.
    pub records: Vec<DirectionRecord>,
}

#[derive(Debug, Clone, Copy)]
pub struct Progress {
    pub done: usize,
    pub total: usize,
    pub elapsed: Duration,
}

/// All `0 <= m <= n <= N` in lexicographic order.
pub fn enumerate_grid(big_n: i64) -> Vec<RationalDirection> {
    assert!(big_n >= 1, "grid size must be at least 1");
    (0..=big_n)
        .flat_map(|m| (m..=big_n).map(move |n| (m, n)))
        .map(|(m, n)| RationalDirection::grid(m, n, big_n).expect("grid cell inside the triangle"))
        .collect()
}

pub fn grid_size(big_n: i64) -> usize {
    let n = big_n as usize;
    (n + 1) * (n + 2) / 2
}

impl ScanHeader {
    pub fn new(f: &DispersionRelation, energy: f64, big_n: i64, opts: &ClassifyOptions) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            surface: f.name.clone(),
            energy,
            big_n,
            tolerances: opts.section.clone(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
        }
    }
}

fn strip_timing(mut r: DirectionRecord) -> DirectionRecord {
    r.diag.elapsed_ms = None;
    r
}

fn sort_records(records: &mut [DirectionRecord]) {
    records.sort_by_key(|r| (r.m, r.n));
}

fn pool(workers: usize) -> rayon::ThreadPool {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .expect("worker pool")
}

/// Classifies every grid cell in memory. Timings are dropped so the result
/// does not depend on scheduling.
pub fn scan(f: &DispersionRelation, energy: f64, big_n: i64, opts: &ClassifyOptions, workers: usize) -> ScanResult {
    let classifier = Classifier::new(f.clone(), energy, opts.clone());
    let dirs = enumerate_grid(big_n);
    let mut records: Vec<DirectionRecord> =
        pool(workers).install(|| dirs.par_iter().map(|d| strip_timing(classifier.classify(d))).collect());
    sort_records(&mut records);
    ScanResult {
        header: ScanHeader::new(f, energy, big_n, opts),
        records,
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> ScanError + '_ {
    move |source| ScanError::Io {
        path: path.display().to_string(),
        source,
    }
}

pub fn partial_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".partial");
    PathBuf::from(s)
}

/// Records already in a checkpoint whose header matches; a torn last line
/// from an interrupted write is dropped.
fn load_checkpoint(path: &Path, header: &ScanHeader) -> Result<Vec<DirectionRecord>, ScanError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    let complete = match text.rfind('\n') {
        Some(i) => &text[..=i],
        None => "",
    };
    if complete.is_empty() {
        return Ok(Vec::new());
    }
    let parsed = parse_scan_text(path, complete, false)?;
    if &parsed.header != header {
        return Err(ScanError::CheckpointMismatch {
            path: path.display().to_string(),
            message: "header differs from the requested scan".to_string(),
        });
    }
    if complete.len() != text.len() {
        fs::write(path, complete).map_err(io_err(path))?;
    }
    Ok(parsed.records)
}

/// Scan with an append-only checkpoint next to `out`, writing the sorted
/// file at the end. With `resume`, cells already present in the checkpoint
/// are not recomputed.
pub fn scan_to_file(
    f: &DispersionRelation,
    energy: f64,
    big_n: i64,
    opts: &ClassifyOptions,
    workers: usize,
    out: &Path,
    resume: bool,
    progress: Option<&(dyn Fn(Progress) + Sync)>,
) -> Result<ScanResult, ScanError> {
    let header = ScanHeader::new(f, energy, big_n, opts);
    let partial = partial_path(out);
    let mut done: Vec<DirectionRecord> = Vec::new();
    if resume && partial.exists() {
        done = load_checkpoint(&partial, &header)?;
    } else if resume && out.exists() {
        let finished = read_scan(out)?;
        if finished.header == header && finished.records.len() == grid_size(big_n) {
            return Ok(finished);
        }
    }
    if done.is_empty() {
        let mut file = File::create(&partial).map_err(io_err(&partial))?;
        let line = serde_json::to_string(&header).expect("header serializes");
        writeln!(file, "{line}").map_err(io_err(&partial))?;
    }
    let seen: HashSet<(i64, i64)> = done.iter().map(|r| (r.m, r.n)).collect();
    let todo: Vec<RationalDirection> = enumerate_grid(big_n)
        .into_iter()
        .filter(|d| !seen.contains(&(d.m, d.n)))
        .collect();

    let classifier = Classifier::new(f.clone(), energy, opts.clone());
    let file = OpenOptions::new().append(true).open(&partial).map_err(io_err(&partial))?;
    let sink = Mutex::new(BufWriter::new(file));
    let total = grid_size(big_n);
    let count = AtomicUsize::new(done.len());
    let start = Instant::now();
    let fresh: Vec<Result<DirectionRecord, ScanError>> = pool(workers).install(|| {
        todo.par_iter()
            .map(|d| {
                let rec = strip_timing(classifier.classify(d));
                let line = serde_json::to_string(&rec).expect("record serializes");
                {
                    let mut w = sink.lock().unwrap();
                    writeln!(w, "{line}").and_then(|_| w.flush()).map_err(io_err(&partial))?;
                }
                let k = count.fetch_add(1, Ordering::Relaxed) + 1;
                if let Some(p) = progress {
                    p(Progress {
                        done: k,
                        total,
                        elapsed: start.elapsed(),
                    });
                }
                Ok(rec)
            })
            .collect()
    });
    for r in fresh {
        done.push(r?);
    }
    sort_records(&mut done);
    let result = ScanResult { header, records: done };
    write_scan(out, &result)?;
    fs::remove_file(&partial).map_err(io_err(&partial))?;
    Ok(result)
}

pub fn write_scan(path: &Path, s: &ScanResult) -> Result<(), ScanError> {
    let file = File::create(path).map_err(io_err(path))?;
    let mut w = BufWriter::new(file);
    let mut put = |line: String| writeln!(w, "{line}").map_err(io_err(path));
    put(serde_json::to_string(&s.header).expect("header serializes"))?;
    for r in &s.records {
        put(serde_json::to_string(r).expect("record serializes"))?;
    }
    w.flush().map_err(io_err(path))
}

pub fn read_scan(path: &Path) -> Result<ScanResult, ScanError> {
    let file = File::open(path).map_err(io_err(path))?;
    let mut text = String::new();
    for line in BufReader::new(file).lines() {
        text.push_str(&line.map_err(io_err(path))?);
        text.push('\n');
    }
    parse_scan_text(path, &text, true)
}

/// Parses a scan; `complete` additionally demands the whole grid.
fn parse_scan_text(path: &Path, text: &str, complete: bool) -> Result<ScanResult, ScanError> {
    let p = path.display().to_string();
    let err = |line: usize, message: String| ScanError::Parse {
        path: p.clone(),
        line,
        message,
    };
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (_, first) = lines.next().ok_or_else(|| err(1, "empty file".to_string()))?;
    let raw: serde_json::Value = serde_json::from_str(first).map_err(|e| err(1, e.to_string()))?;
    let version = raw
        .get("schema_version")
        .and_then(|v| v.as_u64())
        .ok_or_else(|| err(1, "header has no schema_version".to_string()))?;
    if version != SCHEMA_VERSION as u64 {
        return Err(ScanError::Schema {
            path: p.clone(),
            found: version as u32,
            expected: SCHEMA_VERSION,
        });
    }
    let header: ScanHeader = serde_json::from_value(raw).map_err(|e| err(1, e.to_string()))?;
    let mut records = Vec::new();
    for (i, line) in lines {
        let rec: DirectionRecord = serde_json::from_str(line).map_err(|e| err(i + 1, e.to_string()))?;
        if rec.big_n != header.big_n {
            return Err(err(i + 1, format!("record has N = {}, header N = {}", rec.big_n, header.big_n)));
        }
        records.push(rec);
    }
    sort_records(&mut records);
    if records.windows(2).any(|w| (w[0].m, w[0].n) == (w[1].m, w[1].n)) {
        return Err(err(0, "duplicate grid cell".to_string()));
    }
    if complete && records.len() != grid_size(header.big_n) {
        return Err(err(
            text.lines().count() + 1,
            format!("expected {} records, found {}", grid_size(header.big_n), records.len()),
        ));
    }
    Ok(ScanResult { header, records })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_counts() {
        let g = enumerate_grid(1);
        let cells: Vec<_> = g.iter().map(|d| (d.m, d.n, d.big_n)).collect();
        assert_eq!(cells, vec![(0, 0, 1), (0, 1, 1), (1, 1, 1)]);
        let g = enumerate_grid(2);
        assert_eq!(g.len(), 6);
        assert_eq!(g.iter().find(|d| d.m == 2 && d.n == 2).unwrap().h, [1, 1, 1]);
        assert_eq!(enumerate_grid(400).len(), 80601);
        assert_eq!(grid_size(400), 80601);
    }

    #[test]
    fn partial_suffix() {
        assert_eq!(partial_path(Path::new("a/s.jsonl")), PathBuf::from("a/s.jsonl.partial"));
    }
}

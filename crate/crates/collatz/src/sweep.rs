//! Bulk analytics over integer ranges: per-n records with base-2/3/4 digit
//! strings, total-stopping-time record curves, peak histograms, and
//! stopping-time outlier scans.
//!
//! Work is partitioned into fixed-size contiguous chunks and merged back in
//! chunk order, so output is byte-identical no matter how many workers run.

use std::collections::BTreeMap;
use std::io::{self, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::core::{self, summarize, to_base};
use crate::nat::Nat;

/// Fixed chunk width; independent of the worker count so that the
/// chunk/merge structure (and with it the output) never varies.
const CHUNK: u64 = 4096;

/// Runs `f` on a dedicated pool of `workers` threads, or inline on the
/// global pool when unspecified.
pub fn with_workers<T: Send>(workers: Option<usize>, f: impl FnOnce() -> T + Send) -> T {
    match workers {
        None => f(),
        Some(w) => rayon::ThreadPoolBuilder::new()
            .num_threads(w.max(1))
            .build()
            .expect("failed to build worker pool")
            .install(f),
    }
}

/// The integers a sweep visits: 3, 5, 7, ... by default, or every integer
/// from 2 when evens are admitted.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Domain {
    first: u64,
    stride: u64,
    count: u64,
}

impl Domain {
    fn new(max: u64, include_even: bool) -> Domain {
        let first = if include_even { 2 } else { 3 };
        let stride = if include_even { 1 } else { 2 };
        let count = if max < first {
            0
        } else {
            (max - first) / stride + 1
        };
        Domain {
            first,
            stride,
            count,
        }
    }

    fn odds(first: u64, last: u64) -> Domain {
        assert!(first % 2 == 1, "population starts on an odd number");
        let count = if last < first { 0 } else { (last - first) / 2 + 1 };
        Domain {
            first,
            stride: 2,
            count,
        }
    }

    fn value(&self, index: u64) -> u64 {
        self.first + index * self.stride
    }

    /// Maps every domain element through `f` chunk by chunk and hands the
    /// per-chunk results back in chunk order.
    fn map_chunks<T, F>(&self, f: F) -> Vec<Vec<T>>
    where
        T: Send,
        F: Fn(u64) -> T + Sync,
    {
        let chunks = self.count.div_ceil(CHUNK);
        (0..chunks)
            .into_par_iter()
            .map(|c| {
                let lo = c * CHUNK;
                let hi = (lo + CHUNK).min(self.count);
                (lo..hi).map(|i| f(self.value(i))).collect()
            })
            .collect()
    }
}

/// One row of a sweep: the start value, its two iteration counts, its peak,
/// and its digit strings in bases 2, 3, and 4.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub n: u64,
    pub total: u64,
    pub stop: u64,
    pub peak: Nat,
    pub base2: String,
    pub base3: String,
    pub base4: String,
}

/// A start value the sweep could not resolve, with the reason.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SweepFailure {
    pub n: u64,
    pub error: core::Error,
}

#[derive(Debug, Clone, Default)]
pub struct SweepOutput {
    /// Ascending by n.
    pub records: Vec<SweepRecord>,
    /// Start values that exceeded the step cap; the sweep continues past
    /// them rather than aborting.
    pub failures: Vec<SweepFailure>,
}

fn record_for(n: u64, cap: u64) -> Result<SweepRecord, SweepFailure> {
    let nat = Nat::from(n);
    let s = summarize(&nat, cap).map_err(|error| SweepFailure { n, error })?;
    Ok(SweepRecord {
        n,
        total: s.total_stopping_time,
        stop: s.stopping_time.unwrap_or(0),
        peak: s.peak,
        base2: to_base(&nat, 2).expect("base 2 is valid"),
        base3: to_base(&nat, 3).expect("base 3 is valid"),
        base4: to_base(&nat, 4).expect("base 4 is valid"),
    })
}

/// Per-n records for odd n in 3..=max (every n from 2 when evens are
/// admitted), ascending. Requires max >= 3.
pub fn sweep(max: u64, include_even: bool, cap: u64, workers: Option<usize>) -> SweepOutput {
    assert!(max >= 3, "sweep bound must be at least 3");
    let domain = Domain::new(max, include_even);
    with_workers(workers, || {
        let mut out = SweepOutput::default();
        for chunk in domain.map_chunks(|n| record_for(n, cap)) {
            for item in chunk {
                match item {
                    Ok(r) => out.records.push(r),
                    Err(f) => out.failures.push(f),
                }
            }
        }
        out
    })
}

/// The total-stopping-time record curve over odd n in 3..=max: one entry
/// per new maximum, strictly increasing in both coordinates.
pub fn record_curve(max: u64, cap: u64, workers: Option<usize>) -> Vec<(u64, u64)> {
    let domain = Domain::new(max, false);
    with_workers(workers, || {
        // Chunk-local record candidates; every global record is also a
        // record within its own chunk, so the sequential merge loses
        // nothing.
        let per_chunk = domain.map_chunks(|n| {
            summarize(&Nat::from(n), cap)
                .map(|s| (n, s.total_stopping_time))
                .expect("record curve within the step cap")
        });
        let mut curve = Vec::new();
        let mut best = 0u64;
        for chunk in per_chunk {
            let mut chunk_best = 0u64;
            for (n, total) in chunk {
                if total > chunk_best {
                    chunk_best = total;
                    if total > best {
                        best = total;
                        curve.push((n, total));
                    }
                }
            }
        }
        curve
    })
}

/// How many swept starts attained each peak value.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PeakHistogram {
    /// Which starts were swept, e.g. "odd n in 3..=3077".
    pub population: String,
    pub population_size: u64,
    pub counts: BTreeMap<Nat, u64>,
}

impl PeakHistogram {
    /// The most frequent peak and its count (greatest peak wins a tie,
    /// which cannot occur with a unique maximum count).
    pub fn modal(&self) -> Option<(&Nat, u64)> {
        self.counts
            .iter()
            .max_by_key(|(peak, count)| (**count, *peak))
            .map(|(p, c)| (p, *c))
    }

    /// Counts ranked most-frequent first (ties broken by larger peak).
    pub fn ranked(&self) -> Vec<(&Nat, u64)> {
        let mut v: Vec<(&Nat, u64)> = self.counts.iter().map(|(p, c)| (p, *c)).collect();
        v.sort_by(|a, b| (b.1, b.0).cmp(&(a.1, a.0)));
        v
    }

    pub fn share(&self, count: u64) -> f64 {
        count as f64 / self.population_size as f64
    }
}

fn histogram_over(domain: Domain, population: String, cap: u64) -> PeakHistogram {
    let per_chunk = domain.map_chunks(|n| {
        summarize(&Nat::from(n), cap)
            .map(|s| s.peak)
            .expect("histogram within the step cap")
    });
    let mut counts: BTreeMap<Nat, u64> = BTreeMap::new();
    for chunk in per_chunk {
        for peak in chunk {
            *counts.entry(peak).or_default() += 1;
        }
    }
    PeakHistogram {
        population,
        population_size: domain.count,
        counts,
    }
}

/// Histogram of peak values over odd n in 3..=max.
pub fn peak_histogram(max: u64, cap: u64, workers: Option<usize>) -> PeakHistogram {
    assert!(max >= 3, "histogram bound must be at least 3");
    with_workers(workers, || {
        histogram_over(
            Domain::new(max, false),
            format!("odd n in 3..={max}"),
            cap,
        )
    })
}

/// Histogram of peak values over odd n in first..=last (both odd).
pub fn peak_histogram_odds(first: u64, last: u64, cap: u64, workers: Option<usize>) -> PeakHistogram {
    with_workers(workers, || {
        histogram_over(
            Domain::odds(first, last),
            format!("odd n in {first}..={last}"),
            cap,
        )
    })
}

/// All odd n in 3..=max whose stopping time is at least `threshold`,
/// ascending by n.
pub fn stopping_time_outliers(
    max: u64,
    threshold: u64,
    cap: u64,
    workers: Option<usize>,
) -> Vec<(u64, u64)> {
    let domain = Domain::new(max, false);
    with_workers(workers, || {
        domain
            .map_chunks(|n| {
                let st = core::stopping_time(&Nat::from(n), cap)
                    .expect("outlier scan within the step cap");
                (n, st)
            })
            .into_iter()
            .flatten()
            .filter(|&(_, st)| st >= threshold)
            .collect()
    })
}

/// Fixed CSV header for sweep records.
pub const CSV_HEADER: &str = "n,total,stop,peak,base2,base3,base4";

/// Writes records as CSV with the fixed header, ascending order preserved.
pub fn emit_csv<W: Write>(records: &[SweepRecord], mut w: W) -> io::Result<()> {
    writeln!(w, "{CSV_HEADER}")?;
    for r in records {
        writeln!(
            w,
            "{},{},{},{},{},{},{}",
            r.n, r.total, r.stop, r.peak, r.base2, r.base3, r.base4
        )?;
    }
    Ok(())
}

/// Writes one JSON object per record per line.
pub fn emit_json_lines<W: Write>(records: &[SweepRecord], mut w: W) -> io::Result<()> {
    for r in records {
        serde_json::to_writer(&mut w, r)?;
        writeln!(w)?;
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ParseError {
    #[error("line {line}: expected header {CSV_HEADER:?}")]
    Header { line: usize },
    #[error("line {line}: {msg}")]
    Field { line: usize, msg: String },
}

/// Parses CSV produced by [`emit_csv`].
pub fn parse_csv(text: &str) -> Result<Vec<SweepRecord>, ParseError> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, header)) if header == CSV_HEADER => {}
        _ => return Err(ParseError::Header { line: 1 }),
    }
    let mut records = Vec::new();
    for (idx, line) in lines {
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 7 {
            return Err(ParseError::Field {
                line: idx + 1,
                msg: format!("expected 7 fields, got {}", fields.len()),
            });
        }
        let numeric = |s: &str, what: &str| -> Result<u64, ParseError> {
            s.parse().map_err(|_| ParseError::Field {
                line: idx + 1,
                msg: format!("bad {what}: {s:?}"),
            })
        };
        records.push(SweepRecord {
            n: numeric(fields[0], "n")?,
            total: numeric(fields[1], "total")?,
            stop: numeric(fields[2], "stop")?,
            peak: fields[3].parse().map_err(|_| ParseError::Field {
                line: idx + 1,
                msg: format!("bad peak: {:?}", fields[3]),
            })?,
            base2: fields[4].to_string(),
            base3: fields[5].to_string(),
            base4: fields[6].to_string(),
        });
    }
    Ok(records)
}

/// Parses JSON-lines produced by [`emit_json_lines`].
pub fn parse_json_lines(text: &str) -> Result<Vec<SweepRecord>, serde_json::Error> {
    text.lines()
        .filter(|l| !l.is_empty())
        .map(serde_json::from_str)
        .collect()
}

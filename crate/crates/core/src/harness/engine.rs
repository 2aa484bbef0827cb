//! Ordered parallel rendering of independent records.
//!
//! Records are rendered in fixed-size chunks by a worker pool and written by a
//! single writer in index order. A record's bytes depend only on its index, so
//! the output is identical for every worker count.

use std::io::Write;
use std::ops::Range;

use rayon::prelude::*;

use super::clock::Clock;
use super::limiter::Throttle;
use super::plan::RecordTarget;
use crate::error::{Error, Result};

const CHUNK: u64 = 256;
const CHUNKS_PER_WORKER: usize = 4;

/// A generator whose records are pure functions of their index.
pub trait RecordSource: Sync {
    /// Appends record `index`, including its trailing newline, to `out`.
    fn render(&self, index: u64, out: &mut Vec<u8>);
}

/// Receives the size of each record just before it is written.
pub trait Pacer {
    fn pace(&mut self, amount: u64);
}

impl<C: Clock> Pacer for Throttle<C> {
    fn pace(&mut self, amount: u64) {
        self.acquire(amount)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Totals {
    pub records: u64,
    pub bytes: u64,
}

struct Rendered {
    buf: Vec<u8>,
    ends: Vec<usize>,
}

fn render_range<S: RecordSource + ?Sized>(source: &S, range: Range<u64>) -> Rendered {
    let mut buf = Vec::with_capacity((range.end - range.start) as usize * 64);
    let mut ends = Vec::with_capacity((range.end - range.start) as usize);
    for i in range {
        source.render(i, &mut buf);
        ends.push(buf.len());
    }
    Rendered { buf, ends }
}

pub(crate) fn build_pool(workers: usize) -> Result<Option<rayon::ThreadPool>> {
    if workers <= 1 {
        return Ok(None);
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map(Some)
        .map_err(|e| Error::param(format!("cannot start {workers} workers: {e}")))
}

/// Renders records `0, 1, 2, …` until `target` is met and writes them to `sink`.
pub fn write_records<S: RecordSource + ?Sized>(
    source: &S,
    target: RecordTarget,
    workers: usize,
    sink: &mut dyn Write,
    pacer: Option<&mut dyn Pacer>,
) -> Result<Totals> {
    let pool = build_pool(workers)?;
    let (count, bytes) = match target {
        RecordTarget::Records(n) => (n, None),
        RecordTarget::Bytes(b) => (u64::MAX, Some(b)),
    };
    write_range(source, 0..count, bytes, pool.as_ref(), workers, sink, pacer)
}

/// Writes records in `range`, stopping early once `byte_target` is crossed.
pub(crate) fn write_range<S: RecordSource + ?Sized>(
    source: &S,
    range: Range<u64>,
    byte_target: Option<u64>,
    pool: Option<&rayon::ThreadPool>,
    workers: usize,
    sink: &mut dyn Write,
    mut pacer: Option<&mut dyn Pacer>,
) -> Result<Totals> {
    let (first, limit) = (range.start, range.end);
    let batch = CHUNK * (workers.max(1) * CHUNKS_PER_WORKER) as u64;
    let mut totals = Totals::default();
    let mut next = first;

    while next < limit {
        let end = limit.min(next.saturating_add(batch));
        let ranges: Vec<Range<u64>> = (next..end)
            .step_by(CHUNK as usize)
            .map(|s| s..(s + CHUNK).min(end))
            .collect();
        let rendered: Vec<Rendered> = match pool {
            Some(pool) => pool.install(|| {
                ranges
                    .par_iter()
                    .map(|r| render_range(source, r.clone()))
                    .collect()
            }),
            None => ranges.iter().map(|r| render_range(source, r.clone())).collect(),
        };

        for (range, chunk) in ranges.iter().zip(&rendered) {
            let fits = byte_target.is_none_or(|b| (totals.bytes + chunk.buf.len() as u64) < b);
            if pacer.is_none() && fits {
                sink.write_all(&chunk.buf)
                    .map_err(|e| Error::io_at(format!("writing records {}..{}", range.start, range.end), e))?;
                totals.bytes += chunk.buf.len() as u64;
                totals.records += chunk.ends.len() as u64;
                continue;
            }
            let mut start = 0;
            for (j, &stop) in chunk.ends.iter().enumerate() {
                let record = &chunk.buf[start..stop];
                start = stop;
                if let Some(p) = pacer.as_deref_mut() {
                    p.pace(record.len() as u64);
                }
                sink.write_all(record)
                    .map_err(|e| Error::io_at(format!("writing record {}", range.start + j as u64), e))?;
                totals.bytes += record.len() as u64;
                totals.records += 1;
                if byte_target.is_some_and(|b| totals.bytes >= b) {
                    return Ok(totals);
                }
            }
        }
        next = end;
    }
    Ok(totals)
}

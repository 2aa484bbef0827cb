use std::io::Write;
use std::time::Instant;

use super::edgelist::{edge_line_len, header_line, push_edge};
use super::generate::{power_for_edges, EdgeSampler};
use super::initiator::InitiatorMatrix;
use crate::error::{Error, Result};
use crate::harness::clock::SystemClock;
use crate::harness::limiter::Throttle;
use crate::harness::{GenerationPlan, GeneratorKind, OutputFormat, RecordTarget, ThroughputReport};

const EDGE_BATCH: u64 = 1 << 16;
const WRITE_BLOCK: usize = 1 << 16;

/// Streams a Kronecker graph sized by the plan's edge or byte target as an
/// edge list or `src,dst` CSV.
///
/// An edge target is met exactly. A byte target stops after the first edge
/// whose line brings the file, header included, to at least the target.
/// Without an explicit power, the smallest power whose expected edge count
/// covers the target is used (byte targets assume 8 bytes per edge).
pub fn generate_graph_volume(
    theta: &InitiatorMatrix,
    plan: &GenerationPlan,
    sink: &mut dyn Write,
) -> Result<ThroughputReport> {
    let target = plan.record_target()?;
    let format = plan.format();
    let k = match (plan.kronecker_power, target) {
        (Some(k), _) => k,
        (None, RecordTarget::Records(n)) => power_for_edges(theta, n)?,
        (None, RecordTarget::Bytes(b)) => power_for_edges(theta, b.div_ceil(8))?,
    };
    let nodes = theta.node_count(k)?;
    let mut sampler = EdgeSampler::new(theta, k, plan.seed, plan.workers)?;
    let mut throttle = plan
        .rate_cap
        .map(|rate| Throttle::new(rate, SystemClock::new()))
        .transpose()?;
    let pace_block = plan.rate_cap.map_or(usize::MAX, |r| ((r / 16.0) as usize).clamp(1, 1024));
    let sep = if format == OutputFormat::Csv { b',' } else { b'\t' };
    let started = Instant::now();

    let mut edges = Vec::new();
    let header = match target {
        RecordTarget::Records(n) => {
            if u128::from(n) > sampler_capacity(theta, nodes) {
                return Err(Error::param(format!("{n} edges requested but the graph has {nodes} nodes")));
            }
            header_for(format, nodes, n, theta.directed())
        }
        RecordTarget::Bytes(b) => {
            // The header states the edge count, so draw every edge first.
            let mut body = 0u64;
            'draw: loop {
                let start = edges.len();
                sampler.fill(&mut edges, EDGE_BATCH, start as u64 + EDGE_BATCH)?;
                for i in start..edges.len() {
                    body += edge_line_len(edges[i]);
                    let head = header_for(format, nodes, i as u64 + 1, theta.directed()).len() as u64;
                    if head + body >= b {
                        edges.truncate(i + 1);
                        break 'draw;
                    }
                }
            }
            header_for(format, nodes, edges.len() as u64, theta.directed())
        }
    };

    sink.write_all(header.as_bytes()).map_err(|e| Error::io_at("writing header", e))?;
    let mut bytes = header.len() as u64;
    let mut written = 0u64;
    let mut buf = Vec::with_capacity(WRITE_BLOCK + 64);
    let mut emit = |batch: &[(u64, u64)], written: &mut u64, bytes: &mut u64| -> Result<()> {
        for group in batch.chunks(pace_block.min(batch.len().max(1))) {
            if let Some(t) = throttle.as_mut() {
                t.acquire(group.len() as u64);
            }
            for &e in group {
                push_edge(&mut buf, e, sep);
            }
            if buf.len() >= WRITE_BLOCK || throttle.is_some() {
                sink.write_all(&buf)
                    .map_err(|err| Error::io_at(format!("writing edge {}", *written), err))?;
                *bytes += buf.len() as u64;
                buf.clear();
            }
            *written += group.len() as u64;
        }
        Ok(())
    };
    match target {
        RecordTarget::Records(n) => {
            while written < n {
                edges.clear();
                let want = (n - written).min(EDGE_BATCH);
                sampler.fill(&mut edges, want, n)?;
                emit(&edges, &mut written, &mut bytes)?;
            }
        }
        RecordTarget::Bytes(_) => emit(&edges, &mut written, &mut bytes)?,
    }
    sink.write_all(&buf).map_err(|e| Error::io_at("writing edge list", e))?;
    bytes += buf.len() as u64;
    sink.flush()?;
    Ok(ThroughputReport::new(
        GeneratorKind::Graph,
        bytes,
        written,
        started.elapsed().as_secs_f64(),
        plan.workers,
        plan.seed,
    ))
}

fn sampler_capacity(theta: &InitiatorMatrix, nodes: u64) -> u128 {
    let n = u128::from(nodes);
    if theta.directed() {
        n * n
    } else {
        n * (n + 1) / 2
    }
}

fn header_for(format: OutputFormat, nodes: u64, edges: u64, directed: bool) -> String {
    if format == OutputFormat::Csv {
        "src,dst\n".to_string()
    } else {
        header_line(nodes, edges, directed)
    }
}

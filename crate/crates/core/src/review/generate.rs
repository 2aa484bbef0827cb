use std::io::{BufRead, Write};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::model::{ReviewModel, SCORES};
use crate::error::{Error, Result};
use crate::graph::EdgeSampler;
use crate::harness::clock::SystemClock;
use crate::harness::limiter::Throttle;
use crate::harness::{
    build_pool, write_range, GenerationPlan, GeneratorKind, OutputFormat, Pacer, RecordSource, RecordTarget,
    ThroughputReport, Totals,
};
use crate::rng::{derive_stream, CumulativeTable, RandomStream};
use crate::text::{render_document, PreparedLda};

/// Edges drawn per round when streaming reviews.
const EDGE_BATCH: u64 = 1 << 18;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReviewRecord {
    #[serde(rename = "userId")]
    pub user_id: u64,
    #[serde(rename = "productId")]
    pub product_id: u64,
    pub score: u8,
    pub text: String,
}

/// Sampling tables for scores and per-score text, with JSON-escaped copies
/// of every token.
pub struct PreparedReview {
    scores: CumulativeTable,
    plain: Vec<Option<PreparedLda>>,
    escaped: Vec<Option<PreparedLda>>,
    product_offset: u64,
}

impl PreparedReview {
    pub fn new(model: &ReviewModel) -> Self {
        let plain: Vec<Option<PreparedLda>> = (1..=SCORES as u8)
            .map(|s| model.text_model(s).map(PreparedLda::new))
            .collect();
        let escaped = plain
            .iter()
            .map(|p| {
                p.as_ref().map(|p| {
                    let mut e = p.clone();
                    for t in &mut e.tokens {
                        let q = serde_json::to_vec(std::str::from_utf8(t).expect("tokens are UTF-8"))
                            .expect("strings serialize");
                        *t = q[1..q.len() - 1].into();
                    }
                    e
                })
            })
            .collect();
        Self {
            scores: CumulativeTable::new(model.score_weights()).expect("validated weights"),
            plain,
            escaped,
            product_offset: model.user_count(),
        }
    }

    fn score(&self, s: &mut RandomStream) -> usize {
        self.scores.sample(s)
    }

    fn text(&self, score: usize) -> &PreparedLda {
        self.plain[score].as_ref().expect("positive-weight scores have text models")
    }

    /// Appends the record for edge number `index` in `format`.
    pub fn render(&self, format: OutputFormat, seed: u64, index: u64, edge: (u64, u64), out: &mut Vec<u8>) {
        let mut s = derive_stream(seed, index);
        let score = self.score(&mut s);
        let mut num = itoa::Buffer::new();
        let digit = b'1' + score as u8;
        match format {
            OutputFormat::Triples => {
                out.extend_from_slice(num.format(edge.0).as_bytes());
                out.push(b',');
                out.extend_from_slice(num.format(edge.1 + self.product_offset).as_bytes());
                out.extend_from_slice(&[b',', digit, b'\n']);
            }
            OutputFormat::Pairs => {
                render_document(self.text(score), &mut s, out);
                out.extend_from_slice(&[b'\t', digit, b'\n']);
            }
            _ => {
                out.extend_from_slice(b"{\"userId\":");
                out.extend_from_slice(num.format(edge.0).as_bytes());
                out.extend_from_slice(b",\"productId\":");
                out.extend_from_slice(num.format(edge.1 + self.product_offset).as_bytes());
                out.extend_from_slice(b",\"score\":");
                out.push(digit);
                out.extend_from_slice(b",\"text\":\"");
                let escaped = self.escaped[score].as_ref().expect("positive-weight scores have text models");
                render_document(escaped, &mut s, out);
                out.extend_from_slice(b"\"}\n");
            }
        }
    }
}

/// The review for edge number `index` of the review graph.
pub fn generate_review(model: &PreparedReview, seed: u64, index: u64, edge: (u64, u64)) -> ReviewRecord {
    let mut s = derive_stream(seed, index);
    let score = model.score(&mut s);
    let mut text = Vec::new();
    render_document(model.text(score), &mut s, &mut text);
    ReviewRecord {
        user_id: edge.0,
        product_id: edge.1 + model.product_offset,
        score: score as u8 + 1,
        text: String::from_utf8(text).expect("tokens are UTF-8"),
    }
}

struct Batch<'a> {
    model: &'a PreparedReview,
    format: OutputFormat,
    seed: u64,
    first: u64,
    edges: &'a [(u64, u64)],
}

impl RecordSource for Batch<'_> {
    fn render(&self, index: u64, out: &mut Vec<u8>) {
        let edge = self.edges[(index - self.first) as usize];
        self.model.render(self.format, self.seed, index, edge, out);
    }
}

pub const TRIPLES_HEADER: &[u8] = b"userId,productId,score\n";

/// Streams reviews for the plan's record, edge or byte target.
///
/// Edges are drawn in batches from the model's directed Kronecker graph, so a
/// byte target never materializes more than one batch beyond what it needs.
pub fn generate_reviews(model: &ReviewModel, plan: &GenerationPlan, sink: &mut dyn Write) -> Result<ThroughputReport> {
    let target = plan.record_target()?;
    let format = plan.format();
    let prepared = PreparedReview::new(model);
    let mut sampler = EdgeSampler::new(model.initiator(), model.k(), plan.seed, plan.workers)?;
    let pool = build_pool(plan.workers)?;
    let mut throttle = plan
        .rate_cap
        .map(|rate| Throttle::new(rate, SystemClock::new()))
        .transpose()?;
    let header: &[u8] = if format == OutputFormat::Triples { TRIPLES_HEADER } else { b"" };

    let started = Instant::now();
    sink.write_all(header).map_err(|e| Error::io_at("writing header", e))?;
    let mut totals = Totals {
        records: 0,
        bytes: header.len() as u64,
    };
    let mut edges = Vec::new();
    loop {
        let want = match target {
            RecordTarget::Records(n) => (n - totals.records).min(EDGE_BATCH),
            RecordTarget::Bytes(b) if totals.bytes >= b => 0,
            RecordTarget::Bytes(b) => {
                // Size the batch from the mean record length so far.
                let mean = totals.bytes.checked_div(totals.records).map_or(32, |m| m.max(1));
                ((b - totals.bytes) / mean + 64).clamp(1024, EDGE_BATCH)
            }
        };
        if want == 0 {
            break;
        }
        edges.clear();
        sampler.fill(&mut edges, want, sampler.accepted() + want)?;
        let batch = Batch {
            model: &prepared,
            format,
            seed: plan.seed,
            first: totals.records,
            edges: &edges,
        };
        let bytes = match target {
            RecordTarget::Records(_) => None,
            RecordTarget::Bytes(b) => Some(b - totals.bytes),
        };
        let got = write_range(
            &batch,
            totals.records..totals.records + edges.len() as u64,
            bytes,
            pool.as_ref(),
            plan.workers,
            sink,
            throttle.as_mut().map(|t| t as &mut dyn Pacer),
        )?;
        totals.records += got.records;
        totals.bytes += got.bytes;
    }
    sink.flush()?;
    Ok(ThroughputReport::new(
        GeneratorKind::Review,
        totals.bytes,
        totals.records,
        started.elapsed().as_secs_f64(),
        plan.workers,
        plan.seed,
    ))
}

/// Parses JSON-lines review records, skipping blank lines.
pub fn read_review_records(reader: impl BufRead) -> impl Iterator<Item = Result<ReviewRecord>> {
    reader.lines().enumerate().filter_map(|(i, line)| match line {
        Err(e) => Some(Err(Error::io_at(format!("reading line {}", i + 1), e))),
        Ok(l) if l.trim().is_empty() => None,
        Ok(l) => Some(
            serde_json::from_str::<ReviewRecord>(&l)
                .map_err(|e| Error::Format(format!("line {}: {e}", i + 1)))
                .and_then(|r| {
                    if (1..=SCORES as u8).contains(&r.score) {
                        Ok(r)
                    } else {
                        Err(Error::Format(format!("line {}: score {} is not in 1..5", i + 1, r.score)))
                    }
                }),
        ),
    })
}

/// Writes `userId,productId,score` CSV under a header; returns the record count.
pub fn export_for_filtering<I>(records: I, sink: &mut dyn Write) -> Result<u64>
where
    I: IntoIterator<Item = ReviewRecord>,
{
    sink.write_all(TRIPLES_HEADER)?;
    let mut n = 0;
    for r in records {
        writeln!(sink, "{},{},{}", r.user_id, r.product_id, r.score)
            .map_err(|e| Error::io_at(format!("writing record {n}"), e))?;
        n += 1;
    }
    sink.flush()?;
    Ok(n)
}

/// Writes `text<TAB>score` lines; returns the record count.
pub fn export_for_classification<I>(records: I, sink: &mut dyn Write) -> Result<u64>
where
    I: IntoIterator<Item = ReviewRecord>,
{
    let mut n = 0;
    for r in records {
        writeln!(sink, "{}\t{}", r.text, r.score).map_err(|e| Error::io_at(format!("writing record {n}"), e))?;
        n += 1;
    }
    sink.flush()?;
    Ok(n)
}

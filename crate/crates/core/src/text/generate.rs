use std::io::Write;

use super::model::{LdaModel, PreparedLda};
use crate::error::Result;
use crate::harness::{self, GenerationPlan, GeneratorKind, RecordSource, ThroughputReport};
use crate::rng::{derive_stream, dist, RandomStream};

/// One word of a generated document with the topic it was drawn from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WordDraw {
    pub topic: u32,
    pub word: u32,
}

/// A sampled document: length, topic proportions and the topic/word pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct DocumentDraw {
    pub theta: Vec<f64>,
    pub words: Vec<WordDraw>,
}

impl DocumentDraw {
    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }
}

/// Runs the LDA generative process once:
/// `N ~ Poisson(xi)`, `theta ~ Dirichlet(alpha)`, then for each of the `N`
/// words a topic `z ~ Multinomial(theta)` and a word `w ~ Multinomial(beta[z])`.
pub fn generate_document(model: &LdaModel, s: &mut RandomStream) -> DocumentDraw {
    generate_document_prepared(&PreparedLda::new(model), s)
}

pub fn generate_document_prepared(model: &PreparedLda, s: &mut RandomStream) -> DocumentDraw {
    let mut theta = Vec::with_capacity(model.alpha.len());
    let mut words = Vec::new();
    draw_words(model, s, &mut theta, |topic, word| words.push(WordDraw { topic, word }));
    DocumentDraw { theta, words }
}

/// Core sampling loop shared by the structured and the rendering paths.
#[inline]
pub(crate) fn draw_words(
    model: &PreparedLda,
    s: &mut RandomStream,
    theta: &mut Vec<f64>,
    mut emit: impl FnMut(u32, u32),
) {
    let n = dist::poisson(s, model.xi);
    dist::dirichlet_into(s, &model.alpha, theta);
    if n == 0 {
        return;
    }
    let k = theta.len();
    let mut cumulative = [0.0f64; 64];
    let mut heap;
    let cdf: &mut [f64] = if k <= cumulative.len() {
        &mut cumulative[..k]
    } else {
        heap = vec![0.0; k];
        &mut heap
    };
    let mut total = 0.0;
    for (c, t) in cdf.iter_mut().zip(theta.iter()) {
        total += t;
        *c = total;
    }
    for _ in 0..n {
        let u = s.next_f64() * total;
        let z = cdf.partition_point(|&c| c <= u).min(k - 1);
        let w = model.topic_words[z].sample(s);
        emit(z as u32, w as u32);
    }
}

/// Renders document `i` as space-separated tokens from stream `(seed, i)`.
pub struct TextSource<'a> {
    model: &'a PreparedLda,
    seed: u64,
}

impl<'a> TextSource<'a> {
    pub fn new(model: &'a PreparedLda, seed: u64) -> Self {
        Self { model, seed }
    }
}

impl RecordSource for TextSource<'_> {
    fn render(&self, index: u64, out: &mut Vec<u8>) {
        let mut s = derive_stream(self.seed, index);
        render_document(self.model, &mut s, out);
        out.push(b'\n');
    }
}

/// Appends one generated document (no newline) to `out`.
pub(crate) fn render_document(model: &PreparedLda, s: &mut RandomStream, out: &mut Vec<u8>) {
    let mut theta = Vec::with_capacity(model.alpha.len());
    let mut first = true;
    draw_words(model, s, &mut theta, |_, w| {
        if !first {
            out.push(b' ');
        }
        first = false;
        out.extend_from_slice(&model.tokens[w as usize]);
    });
}

/// Generates newline-delimited documents into `sink` until the plan's
/// document or byte target is met.
pub fn generate_text_volume(
    model: &LdaModel,
    plan: &GenerationPlan,
    sink: &mut dyn Write,
) -> Result<ThroughputReport> {
    let prepared = PreparedLda::new(model);
    let source = TextSource::new(&prepared, plan.seed);
    harness::generate_records(GeneratorKind::Text, &source, plan, sink)
}

#![allow(dead_code)]

use statrs::distribution::{ChiSquared, ContinuousCDF};
use synthgen::text::{Dictionary, LdaModel};

/// Upper-tail p-value of Pearson's statistic for `observed` counts against
/// `probs`. Cells with zero probability must be empty and are skipped.
pub fn chi_square_p(observed: &[u64], probs: &[f64]) -> f64 {
    assert_eq!(observed.len(), probs.len());
    let n: u64 = observed.iter().sum();
    let total: f64 = probs.iter().sum();
    let mut stat = 0.0;
    let mut cells = 0;
    for (&o, &p) in observed.iter().zip(probs) {
        if p == 0.0 {
            assert_eq!(o, 0, "draw in a zero-probability cell");
            continue;
        }
        let e = n as f64 * p / total;
        stat += (o as f64 - e).powi(2) / e;
        cells += 1;
    }
    ChiSquared::new((cells - 1) as f64).unwrap().sf(stat)
}

/// Three standard errors of a binomial proportion.
pub fn three_sigma(p: f64, n: u64) -> f64 {
    3.0 * (p * (1.0 - p) / n as f64).sqrt()
}

pub fn dictionary(words: &[&str]) -> Dictionary {
    Dictionary::new(words.iter().map(|s| s.to_string()).collect()).unwrap()
}

pub fn lda(words: &[&str], alpha: Vec<f64>, beta: Vec<Vec<f64>>, xi: f64) -> LdaModel {
    LdaModel::new(alpha, beta, xi, dictionary(words)).unwrap()
}

/// The hand-built two-topic, four-word model used by the conformance checks.
pub fn small_model() -> LdaModel {
    lda(
        &["apple", "banana", "cherry", "date"],
        vec![2.0, 3.0],
        vec![vec![0.5, 0.3, 0.2, 0.0], vec![0.1, 0.1, 0.3, 0.5]],
        1.0,
    )
}

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use synthgen::graph::InitiatorMatrix;
use synthgen::harness::{GenerationPlan, GeneratorKind, Volume};
use synthgen::review::ReviewModel;


/// Model files for every generator kind, written into one directory.
pub struct Models {
    pub text: PathBuf,
    pub graph: PathBuf,
    pub table: PathBuf,
    pub review: PathBuf,
}

pub fn text_fixture() -> LdaModel {
    let words: Vec<String> = (0..200).map(|i| format!("word{i}")).collect();
    let refs: Vec<&str> = words.iter().map(String::as_str).collect();
    let beta = (0..4)
        .map(|t| {
            let row: Vec<f64> = (0..200).map(|w| 1.0 / (1.0 + ((w + 37 * t) % 200) as f64)).collect();
            let total: f64 = row.iter().sum();
            row.into_iter().map(|x| x / total).collect()
        })
        .collect();
    lda(&refs, vec![0.3; 4], beta, 60.0)
}

pub fn write_models(dir: &Path) -> Models {
    let text = dir.join("text.json");
    text_fixture().save(&text).unwrap();

    let theta = InitiatorMatrix::new(vec![vec![0.9, 0.5], vec![0.5, 0.1]], true).unwrap();
    let graph = dir.join("initiator.json");
    std::fs::write(&graph, theta.to_json()).unwrap();

    let table = Path::new(env!("CARGO_MANIFEST_DIR")).join("schemas/item.json");

    let texts: BTreeMap<u8, LdaModel> = (1..=5).map(|s| (s, text_fixture())).collect();
    let review_model = ReviewModel::new(
        InitiatorMatrix::new(vec![vec![0.9, 0.6], vec![0.6, 0.2]], true).unwrap(),
        20,
        [1.0, 1.0, 2.0, 3.0, 4.0],
        texts,
    )
    .unwrap();
    let review = dir.join("review.json");
    review_model.save(&review).unwrap();
    Models { text, graph, table, review }
}

/// Plan for `kind` using the matching model file.
pub fn plan(kind: GeneratorKind, models: &Models, volume: Volume) -> GenerationPlan {
    let plan = GenerationPlan::new(kind, volume);
    match kind {
        GeneratorKind::Text => plan.with_model(&models.text),
        GeneratorKind::Graph => plan.with_model(&models.graph),
        GeneratorKind::Table => plan.with_model(&models.table),
        GeneratorKind::Resume => plan,
        GeneratorKind::Review => plan.with_model(&models.review),
    }
}

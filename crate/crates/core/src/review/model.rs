use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::InitiatorMatrix;
use crate::rng::RandomStream;
use crate::text::{preprocess_corpus, train_lda, LdaModel, LdaModelFile, LdaTrainConfig};

/// Scores run from 1 to `SCORES`.
pub const SCORES: usize = 5;

#[derive(Debug, Clone, PartialEq)]
pub struct ReviewModel {
    initiator: InitiatorMatrix,
    k: u32,
    score_weights: [f64; SCORES],
    text_models: BTreeMap<u8, LdaModel>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ReviewModelFile {
    initiator: InitiatorMatrix,
    k: u32,
    score_weights: [f64; SCORES],
    text_models: BTreeMap<String, LdaModelFile>,
}

impl ReviewModel {
    /// `initiator` must be directed; every score with positive weight needs
    /// a text model.
    pub fn new(
        initiator: InitiatorMatrix,
        k: u32,
        score_weights: [f64; SCORES],
        text_models: BTreeMap<u8, LdaModel>,
    ) -> Result<Self> {
        if !initiator.directed() {
            return Err(Error::config("initiator.directed", "review graphs need a directed initiator"));
        }
        if k == 0 {
            return Err(Error::config("k", "kronecker power must be >= 1"));
        }
        initiator
            .node_count(k)
            .and_then(|n| n.checked_mul(2).ok_or_else(|| Error::param("overflow")))
            .map_err(|_| Error::config("k", format!("{}^{k} users and products overflow 64-bit ids", initiator.n())))?;
        for (i, w) in score_weights.iter().enumerate() {
            if !(w.is_finite() && *w >= 0.0) {
                return Err(Error::config(format!("score_weights[{i}]"), format!("{w} is not a nonnegative weight")));
            }
        }
        if !score_weights.iter().any(|&w| w > 0.0) {
            return Err(Error::config("score_weights", "at least one score needs positive weight"));
        }
        if let Some(bad) = text_models.keys().find(|&&s| s == 0 || s as usize > SCORES) {
            return Err(Error::config(format!("text_models.{bad}"), "scores run from 1 to 5"));
        }
        for (i, &w) in score_weights.iter().enumerate() {
            let score = i as u8 + 1;
            if w > 0.0 && !text_models.contains_key(&score) {
                return Err(Error::config(
                    format!("text_models.{score}"),
                    format!("score {score} has weight {w} but no text model"),
                ));
            }
        }
        Ok(Self {
            initiator,
            k,
            score_weights,
            text_models,
        })
    }

    pub fn initiator(&self) -> &InitiatorMatrix {
        &self.initiator
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn score_weights(&self) -> &[f64; SCORES] {
        &self.score_weights
    }

    pub fn text_model(&self, score: u8) -> Option<&LdaModel> {
        self.text_models.get(&score)
    }

    pub fn text_models(&self) -> &BTreeMap<u8, LdaModel> {
        &self.text_models
    }

    /// Same model with a different Kronecker power.
    pub fn with_k(self, k: u32) -> Result<Self> {
        Self::new(self.initiator, k, self.score_weights, self.text_models)
    }

    /// Number of users, which is also the first product id.
    pub fn user_count(&self) -> u64 {
        self.initiator.node_count(self.k).expect("validated power")
    }

    pub fn from_json_reader(reader: impl Read) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_reader(reader);
        let file: ReviewModelFile = serde_path_to_error::deserialize(de)
            .map_err(|e| Error::config(e.path().to_string(), e.inner().to_string()))?;
        let mut models = BTreeMap::new();
        for (key, m) in file.text_models {
            let score: u8 = key
                .parse()
                .map_err(|_| Error::config(format!("text_models.{key}"), "keys must be scores 1..5"))?;
            let model = LdaModel::try_from(m).map_err(|e| match e {
                Error::Config { path, message } => Error::config(format!("text_models.{key}.{path}"), message),
                other => other,
            })?;
            models.insert(score, model);
        }
        Self::new(file.initiator, file.k, file.score_weights, models)
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        Self::from_json_reader(text.as_bytes())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let f = File::open(path).map_err(|e| Error::io_at(path.display().to_string(), e))?;
        Self::from_json_reader(BufReader::new(f))
    }

    fn file(&self) -> ReviewModelFile {
        ReviewModelFile {
            initiator: self.initiator.clone(),
            k: self.k,
            score_weights: self.score_weights,
            text_models: self
                .text_models
                .iter()
                .map(|(s, m)| (s.to_string(), LdaModelFile::from(m.clone())))
                .collect(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.file()).expect("model serializes")
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let ctx = || path.display().to_string();
        let f = File::create(path).map_err(|e| Error::io_at(ctx(), e))?;
        let mut w = BufWriter::new(f);
        serde_json::to_writer(&mut w, &self.file()).map_err(|e| Error::io_at(ctx(), e.into()))?;
        w.flush().map_err(|e| Error::io_at(ctx(), e))
    }
}

/// Reads `text<TAB>score` lines. Blank lines are skipped.
pub fn read_scored_corpus(reader: impl BufRead) -> Result<Vec<(String, u8)>> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io_at(format!("reading line {}", i + 1), e))?;
        if line.trim().is_empty() {
            continue;
        }
        let (text, score) = line
            .rsplit_once('\t')
            .ok_or_else(|| Error::Format(format!("line {}: expected text<TAB>score", i + 1)))?;
        let score: u8 = score
            .trim()
            .parse()
            .ok()
            .filter(|s| (1..=SCORES as u8).contains(s))
            .ok_or_else(|| Error::Format(format!("line {}: score {score:?} is not in 1..5", i + 1)))?;
        out.push((text.to_string(), score));
    }
    Ok(out)
}

/// Partitions `reviews` by score, trains one LDA per non-empty partition and
/// sets each score's weight to its share of the reviews.
///
/// A partition with fewer distinct tokens than `config.topics` is trained
/// with one topic per distinct token instead. Scores whose reviews keep no
/// tokens after preprocessing get weight zero.
pub fn train_review_model(
    reviews: &[(String, u8)],
    initiator: InitiatorMatrix,
    k: u32,
    config: &LdaTrainConfig,
    min_token_frequency: u64,
    s: &mut RandomStream,
) -> Result<ReviewModel> {
    let mut weights = [0.0; SCORES];
    let mut text_models = BTreeMap::new();
    for score in 1..=SCORES as u8 {
        let docs: Vec<&str> = reviews
            .iter()
            .filter(|(_, sc)| *sc == score)
            .map(|(t, _)| t.as_str())
            .collect();
        if docs.is_empty() {
            continue;
        }
        let corpus = match preprocess_corpus(&docs, min_token_frequency) {
            Ok(c) => c,
            Err(Error::Format(_)) => continue,
            Err(e) => return Err(e),
        };
        let mut cfg = config.clone();
        cfg.topics = cfg.topics.min(corpus.distinct_tokens());
        text_models.insert(score, train_lda(&corpus, &cfg, s)?);
        weights[score as usize - 1] = docs.len() as f64 / reviews.len() as f64;
    }
    if text_models.is_empty() {
        return Err(Error::Format("no review has any token that survives preprocessing".into()));
    }
    ReviewModel::new(initiator, k, weights, text_models)
}

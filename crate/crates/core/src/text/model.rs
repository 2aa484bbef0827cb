use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::corpus::Dictionary;
use crate::error::{Error, Result};
use crate::rng::CumulativeTable;

const ROW_SUM_TOLERANCE: f64 = 1e-6;

/// Trained LDA parameters: `k` topics with a Dirichlet prior `alpha`, a
/// `k × V` topic-word matrix `beta` and a Poisson document-length mean `xi`.
#[derive(Debug, Clone, PartialEq)]
pub struct LdaModel {
    alpha: Vec<f64>,
    beta: Vec<Vec<f64>>,
    xi: f64,
    dictionary: Dictionary,
}

/// On-disk layout of a model file.
#[derive(Debug, Serialize, Deserialize)]
pub(crate) struct LdaModelFile {
    pub k: usize,
    pub alpha: Vec<f64>,
    pub xi: f64,
    pub dictionary: Dictionary,
    pub beta: Vec<Vec<f64>>,
}

impl LdaModel {
    pub fn new(alpha: Vec<f64>, beta: Vec<Vec<f64>>, xi: f64, dictionary: Dictionary) -> Result<Self> {
        let k = alpha.len();
        if k == 0 {
            return Err(Error::config("alpha", "model needs at least one topic"));
        }
        if let Some((i, a)) = alpha.iter().enumerate().find(|(_, a)| !(**a > 0.0 && a.is_finite())) {
            return Err(Error::config(format!("alpha[{i}]"), format!("{a} is not a positive number")));
        }
        if !(xi > 0.0 && xi.is_finite()) {
            return Err(Error::config("xi", format!("{xi} is not a positive number")));
        }
        if beta.len() != k {
            return Err(Error::config(
                "beta",
                format!("{} rows but {k} topics", beta.len()),
            ));
        }
        let v = dictionary.len();
        for (t, row) in beta.iter().enumerate() {
            if row.len() != v {
                return Err(Error::config(
                    format!("beta[{t}]"),
                    format!("{} columns but dictionary has {v} tokens", row.len()),
                ));
            }
            if let Some((w, p)) = row.iter().enumerate().find(|(_, p)| !(**p >= 0.0 && p.is_finite())) {
                return Err(Error::config(format!("beta[{t}][{w}]"), format!("{p} is not a probability")));
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > ROW_SUM_TOLERANCE {
                return Err(Error::config(format!("beta[{t}]"), format!("row sums to {sum}, not 1")));
            }
        }
        Ok(Self {
            alpha,
            beta,
            xi,
            dictionary,
        })
    }

    pub fn topics(&self) -> usize {
        self.alpha.len()
    }

    pub fn vocabulary_size(&self) -> usize {
        self.dictionary.len()
    }

    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    pub fn beta(&self) -> &[Vec<f64>] {
        &self.beta
    }

    pub fn xi(&self) -> f64 {
        self.xi
    }

    pub fn dictionary(&self) -> &Dictionary {
        &self.dictionary
    }

    /// Expected word distribution of generated text: `Σ_k (α_k / Σα) β_k`.
    pub fn expected_word_marginal(&self) -> Vec<f64> {
        let total: f64 = self.alpha.iter().sum();
        let mut m = vec![0.0; self.vocabulary_size()];
        for (a, row) in self.alpha.iter().zip(&self.beta) {
            for (mw, b) in m.iter_mut().zip(row) {
                *mw += a / total * b;
            }
        }
        m
    }

    pub fn from_json_reader(reader: impl Read) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_reader(reader);
        let file: LdaModelFile = serde_path_to_error::deserialize(de)
            .map_err(|e| Error::config(e.path().to_string(), e.inner().to_string()))?;
        Self::try_from(file)
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        Self::from_json_reader(text.as_bytes())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io_at(path.display().to_string(), e))?;
        Self::from_json_reader(BufReader::new(file))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&LdaModelFile::from(self.clone())).expect("model serializes")
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = File::create(path).map_err(|e| Error::io_at(path.display().to_string(), e))?;
        let mut w = BufWriter::new(file);
        serde_json::to_writer(&mut w, &LdaModelFile::from(self.clone()))
            .map_err(|e| Error::io_at(path.display().to_string(), e.into()))?;
        w.flush().map_err(|e| Error::io_at(path.display().to_string(), e))
    }
}

impl TryFrom<LdaModelFile> for LdaModel {
    type Error = Error;

    fn try_from(f: LdaModelFile) -> Result<Self> {
        if f.k != f.alpha.len() {
            return Err(Error::config(
                "k",
                format!("k = {} but alpha has {} entries", f.k, f.alpha.len()),
            ));
        }
        LdaModel::new(f.alpha, f.beta, f.xi, f.dictionary)
    }
}

impl From<LdaModel> for LdaModelFile {
    fn from(m: LdaModel) -> Self {
        LdaModelFile {
            k: m.alpha.len(),
            alpha: m.alpha,
            xi: m.xi,
            dictionary: m.dictionary,
            beta: m.beta,
        }
    }
}

/// Sampling tables derived once from a model and shared by all workers.
#[derive(Debug, Clone)]
pub struct PreparedLda {
    pub(crate) alpha: Vec<f64>,
    pub(crate) xi: f64,
    pub(crate) topic_words: Vec<CumulativeTable>,
    pub(crate) tokens: Vec<Box<[u8]>>,
}

impl PreparedLda {
    pub fn new(model: &LdaModel) -> Self {
        let topic_words = model
            .beta
            .iter()
            .map(|row| CumulativeTable::new(row).expect("validated beta row"))
            .collect();
        let tokens = model
            .dictionary
            .words()
            .iter()
            .map(|w| w.as_bytes().into())
            .collect();
        Self {
            alpha: model.alpha.clone(),
            xi: model.xi,
            topic_words,
            tokens,
        }
    }

    /// Length in bytes of the longest token.
    pub fn max_token_len(&self) -> usize {
        self.tokens.iter().map(|t| t.len()).max().unwrap_or(0)
    }
}

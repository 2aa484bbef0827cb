use super::corpus::BagOfWordsCorpus;
use super::model::LdaModel;
use crate::error::{Error, Result};
use crate::rng::RandomStream;

/// Collapsed Gibbs trainer settings.
#[derive(Debug, Clone, PartialEq)]
pub struct LdaTrainConfig {
    pub topics: usize,
    pub iterations: usize,
    /// Symmetric document-topic prior; `None` means `50 / topics`.
    pub alpha: Option<f64>,
    /// Topic-word smoothing.
    pub eta: f64,
}

impl Default for LdaTrainConfig {
    fn default() -> Self {
        Self {
            topics: 20,
            iterations: 200,
            alpha: None,
            eta: 0.01,
        }
    }
}

impl LdaTrainConfig {
    pub fn alpha_value(&self) -> f64 {
        self.alpha.unwrap_or(50.0 / self.topics as f64)
    }
}

/// Fits an LDA model by collapsed Gibbs sampling.
///
/// Topic assignments start uniform at random and are resampled token by token,
/// documents in corpus order, for `iterations` sweeps. `beta` is read from the
/// final sweep as `(n_kw + eta) / (n_k + V eta)`; `xi` is the mean document
/// length and `alpha` is held fixed.
pub fn train_lda(
    corpus: &BagOfWordsCorpus,
    config: &LdaTrainConfig,
    s: &mut RandomStream,
) -> Result<LdaModel> {
    let k = config.topics;
    let alpha = config.alpha_value();
    let eta = config.eta;
    if k == 0 {
        return Err(Error::param("number of topics must be >= 1"));
    }
    if config.iterations == 0 {
        return Err(Error::param("iterations must be >= 1"));
    }
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::param(format!("alpha {alpha} must be > 0")));
    }
    if !(eta > 0.0 && eta.is_finite()) {
        return Err(Error::param(format!("eta {eta} must be > 0")));
    }
    if corpus.documents().is_empty() || corpus.total_tokens() == 0 {
        return Err(Error::param("corpus is empty"));
    }
    let distinct = corpus.distinct_tokens();
    if k > distinct {
        return Err(Error::param(format!(
            "{k} topics requested but the corpus has only {distinct} distinct tokens"
        )));
    }

    let v = corpus.dictionary().len();
    let docs = corpus.documents();

    // Flattened token sequence: each (id, count) expands to `count` tokens.
    let mut words: Vec<u32> = Vec::with_capacity(corpus.total_tokens() as usize);
    let mut doc_end: Vec<usize> = Vec::with_capacity(docs.len());
    for doc in docs {
        for &(id, count) in doc {
            words.extend(std::iter::repeat_n(id, count as usize));
        }
        doc_end.push(words.len());
    }

    let mut z: Vec<u32> = Vec::with_capacity(words.len());
    let mut n_dk = vec![0u32; docs.len() * k];
    let mut n_wk = vec![0u32; v * k];
    let mut n_k = vec![0u64; k];
    let mut start = 0;
    for (d, &end) in doc_end.iter().enumerate() {
        for &w in &words[start..end] {
            let t = s.next_below(k as u64) as usize;
            z.push(t as u32);
            n_dk[d * k + t] += 1;
            n_wk[w as usize * k + t] += 1;
            n_k[t] += 1;
        }
        start = end;
    }

    let v_eta = v as f64 * eta;
    let mut p = vec![0.0f64; k];
    for _ in 0..config.iterations {
        let mut start = 0;
        for (d, &end) in doc_end.iter().enumerate() {
            let dk = &mut n_dk[d * k..(d + 1) * k];
            for i in start..end {
                let w = words[i] as usize;
                let wk = &mut n_wk[w * k..(w + 1) * k];
                let old = z[i] as usize;
                dk[old] -= 1;
                wk[old] -= 1;
                n_k[old] -= 1;

                let mut total = 0.0;
                for t in 0..k {
                    total += (f64::from(dk[t]) + alpha) * (f64::from(wk[t]) + eta)
                        / (n_k[t] as f64 + v_eta);
                    p[t] = total;
                }
                let u = s.next_f64() * total;
                let new = p.partition_point(|&c| c <= u).min(k - 1);

                z[i] = new as u32;
                dk[new] += 1;
                wk[new] += 1;
                n_k[new] += 1;
            }
            start = end;
        }
    }

    let beta: Vec<Vec<f64>> = (0..k)
        .map(|t| {
            let denom = n_k[t] as f64 + v_eta;
            (0..v)
                .map(|w| (f64::from(n_wk[w * k + t]) + eta) / denom)
                .collect()
        })
        .collect();
    let xi = corpus.total_tokens() as f64 / docs.len() as f64;

    LdaModel::new(vec![alpha; k], beta, xi, corpus.dictionary().clone())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::derive_stream;
    use crate::text::preprocess_corpus;

    #[test]
    fn single_topic_is_smoothed_frequency() {
        let corpus = preprocess_corpus(["a b a c", "b b d", "a"], 1).unwrap();
        let cfg = LdaTrainConfig {
            topics: 1,
            iterations: 3,
            alpha: Some(0.7),
            eta: 0.01,
        };
        let m = train_lda(&corpus, &cfg, &mut derive_stream(1, 0)).unwrap();
        // counts a=3 b=3 c=1 d=1, total 8, V=4
        let expected = [3.0, 3.0, 1.0, 1.0].map(|c| (c + 0.01) / (8.0 + 4.0 * 0.01));
        for (got, want) in m.beta()[0].iter().zip(expected) {
            assert!((got - want).abs() < 1e-12);
        }
        assert_eq!(m.alpha(), [0.7]);
        assert!((m.xi() - 8.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_more_topics_than_tokens() {
        let corpus = preprocess_corpus(["a b", "b a"], 1).unwrap();
        let cfg = LdaTrainConfig {
            topics: 3,
            ..Default::default()
        };
        assert!(matches!(
            train_lda(&corpus, &cfg, &mut derive_stream(0, 0)),
            Err(Error::Param(_))
        ));
    }

    #[test]
    fn default_alpha_heuristic() {
        let cfg = LdaTrainConfig::default();
        assert_eq!(cfg.topics, 20);
        assert_eq!(cfg.alpha_value(), 2.5);
        assert_eq!(cfg.eta, 0.01);
    }

    #[test]
    fn deterministic_given_seed() {
        let corpus = preprocess_corpus(["a b c d a b", "c d c d e", "e a e b"], 1).unwrap();
        let cfg = LdaTrainConfig {
            topics: 2,
            iterations: 20,
            alpha: Some(0.5),
            eta: 0.1,
        };
        let a = train_lda(&corpus, &cfg, &mut derive_stream(5, 0)).unwrap();
        let b = train_lda(&corpus, &cfg, &mut derive_stream(5, 0)).unwrap();
        assert_eq!(a, b);
        for row in a.beta() {
            assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-6);
        }
    }
}

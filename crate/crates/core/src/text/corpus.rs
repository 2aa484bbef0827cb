use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Ordered list of distinct tokens; a token's index is its id.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<String>", into = "Vec<String>")]
pub struct Dictionary {
    words: Vec<String>,
    #[serde(skip)]
    index: HashMap<String, u32>,
}

impl Dictionary {
    pub fn new(words: Vec<String>) -> Result<Self> {
        if words.is_empty() {
            return Err(Error::config("dictionary", "dictionary must contain at least one token"));
        }
        if words.len() > u32::MAX as usize {
            return Err(Error::config("dictionary", "dictionary too large"));
        }
        let mut index = HashMap::with_capacity(words.len());
        for (i, w) in words.iter().enumerate() {
            if index.insert(w.clone(), i as u32).is_some() {
                return Err(Error::config(
                    format!("dictionary[{i}]"),
                    format!("duplicate token {w:?}"),
                ));
            }
        }
        Ok(Self { words, index })
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn word(&self, id: u32) -> &str {
        &self.words[id as usize]
    }

    pub fn id(&self, word: &str) -> Option<u32> {
        self.index.get(word).copied()
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }
}

impl TryFrom<Vec<String>> for Dictionary {
    type Error = Error;

    fn try_from(words: Vec<String>) -> Result<Self> {
        Dictionary::new(words)
    }
}

impl From<Dictionary> for Vec<String> {
    fn from(d: Dictionary) -> Self {
        d.words
    }
}

/// Sparse per-document token counts over a dictionary.
#[derive(Debug, Clone, PartialEq)]
pub struct BagOfWordsCorpus {
    dictionary: Dictionary,
    documents: Vec<Vec<(u32, u32)>>,
}

impl BagOfWordsCorpus {
    /// Builds a corpus from `(token id, count)` vectors. Ids must be valid
    /// for `dictionary`, counts positive, and each vector sorted by id
    /// without repeats.
    pub fn new(dictionary: Dictionary, documents: Vec<Vec<(u32, u32)>>) -> Result<Self> {
        let v = dictionary.len() as u32;
        for (d, doc) in documents.iter().enumerate() {
            for (j, &(id, count)) in doc.iter().enumerate() {
                if id >= v {
                    return Err(Error::Format(format!(
                        "document {d}: token id {id} outside dictionary of {v}"
                    )));
                }
                if count == 0 {
                    return Err(Error::Format(format!("document {d}: zero count for token {id}")));
                }
                if j > 0 && doc[j - 1].0 >= id {
                    return Err(Error::Format(format!(
                        "document {d}: token ids must be strictly increasing"
                    )));
                }
            }
        }
        Ok(Self {
            dictionary,
            documents,
        })
    }

    pub fn dictionary(&self) -> &Dictionary {
        &self.dictionary
    }

    pub fn documents(&self) -> &[Vec<(u32, u32)>] {
        &self.documents
    }

    pub fn total_tokens(&self) -> u64 {
        self.documents
            .iter()
            .flat_map(|d| d.iter())
            .map(|&(_, c)| u64::from(c))
            .sum()
    }

    /// Number of dictionary tokens that occur at least once.
    pub fn distinct_tokens(&self) -> usize {
        let mut seen = vec![false; self.dictionary.len()];
        for &(id, _) in self.documents.iter().flatten() {
            seen[id as usize] = true;
        }
        seen.into_iter().filter(|&s| s).count()
    }
}

/// Lowercases, splits on anything that is not alphanumeric and drops tokens
/// made only of digits.
pub fn tokenize(text: &str) -> impl Iterator<Item = String> + '_ {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty() && !t.chars().all(char::is_numeric))
        .map(str::to_lowercase)
}

/// Tokenizes raw documents and keeps tokens whose corpus frequency is at
/// least `min_token_frequency`. Dictionary order is order of first
/// appearance; documents left empty by the filter are dropped.
pub fn preprocess_corpus<I, S>(raw_documents: I, min_token_frequency: u64) -> Result<BagOfWordsCorpus>
where
    I: IntoIterator<Item = S>,
    S: AsRef<str>,
{
    if min_token_frequency == 0 {
        return Err(Error::param("min_token_frequency must be >= 1"));
    }
    let mut provisional: HashMap<String, u32> = HashMap::new();
    let mut words: Vec<String> = Vec::new();
    let mut freq: Vec<u64> = Vec::new();
    let mut docs: Vec<Vec<u32>> = Vec::new();
    let mut any_tokens = false;
    for raw in raw_documents {
        let mut doc = Vec::new();
        for token in tokenize(raw.as_ref()) {
            let id = *provisional.entry(token).or_insert_with_key(|t| {
                words.push(t.clone());
                freq.push(0);
                (words.len() - 1) as u32
            });
            freq[id as usize] += 1;
            doc.push(id);
        }
        any_tokens |= !doc.is_empty();
        docs.push(doc);
    }
    if !any_tokens {
        return Err(Error::Format(
            "corpus contains no tokens after tokenization".to_string(),
        ));
    }

    let mut remap = vec![u32::MAX; words.len()];
    let mut kept = Vec::new();
    for (old, word) in words.into_iter().enumerate() {
        if freq[old] >= min_token_frequency {
            remap[old] = kept.len() as u32;
            kept.push(word);
        }
    }
    if kept.is_empty() {
        return Err(Error::Format(format!(
            "all tokens filtered: no token occurs at least {min_token_frequency} times"
        )));
    }

    let documents: Vec<Vec<(u32, u32)>> = docs
        .into_iter()
        .filter_map(|doc| {
            let mut counts: Vec<(u32, u32)> = Vec::new();
            let mut ids: Vec<u32> = doc
                .into_iter()
                .map(|id| remap[id as usize])
                .filter(|&id| id != u32::MAX)
                .collect();
            ids.sort_unstable();
            for id in ids {
                match counts.last_mut() {
                    Some((last, c)) if *last == id => *c += 1,
                    _ => counts.push((id, 1)),
                }
            }
            (!counts.is_empty()).then_some(counts)
        })
        .collect();

    BagOfWordsCorpus::new(Dictionary::new(kept)?, documents)
}

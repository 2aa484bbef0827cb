use std::collections::HashSet;
use std::fs::File;
use std::io::{BufReader, Read};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::CumulativeTable;

/// Random-name parameters. Names are capitalised syllable strings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NameSpec {
    pub syllables: Vec<String>,
    #[serde(default = "default_min")]
    pub min_syllables: u32,
    #[serde(default = "default_max")]
    pub max_syllables: u32,
}

fn default_min() -> u32 {
    2
}

fn default_max() -> u32 {
    4
}

impl Default for NameSpec {
    fn default() -> Self {
        let syllables = [
            "ka", "lo", "mi", "ren", "su", "ta", "vin", "el", "dor", "ya", "zhu", "an", "li", "mor", "ne", "sa",
            "qi", "ho", "ber", "tan", "wei", "ra", "gu", "fen",
        ];
        Self {
            syllables: syllables.iter().map(|s| s.to_string()).collect(),
            min_syllables: 2,
            max_syllables: 4,
        }
    }
}

/// One field. Exactly one of `values` (a leaf pool) or `subfields` is set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldSpec {
    pub name: String,
    pub presence_probability: f64,
    /// Maximum occurrence count. Fields with `repeat > 1` are emitted as
    /// arrays of 1..=repeat elements.
    #[serde(default = "default_repeat")]
    pub repeat: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<String>>,
    /// Multinomial weights over `values`; uniform when omitted.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subfields: Option<Vec<FieldSpec>>,
}

fn default_repeat() -> u32 {
    1
}

impl FieldSpec {
    pub fn pool(name: &str, p: f64, repeat: u32, values: &[&str]) -> Self {
        Self {
            name: name.to_string(),
            presence_probability: p,
            repeat,
            values: Some(values.iter().map(|s| s.to_string()).collect()),
            weights: None,
            subfields: None,
        }
    }

    pub fn compound(name: &str, p: f64, repeat: u32, subfields: Vec<FieldSpec>) -> Self {
        Self {
            name: name.to_string(),
            presence_probability: p,
            repeat,
            values: None,
            weights: None,
            subfields: Some(subfields),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResumeSchema {
    #[serde(default)]
    pub name: NameSpec,
    pub fields: Vec<FieldSpec>,
}

pub(crate) enum Content {
    Pool(CumulativeTable),
    Compound(Vec<CompiledField>),
}

pub(crate) struct CompiledField {
    pub p: f64,
    pub repeat: u32,
    /// `"name":` with JSON escaping applied.
    pub key: Box<[u8]>,
    /// Pool values as JSON string literals.
    pub values: Vec<Box<[u8]>>,
    pub content: Content,
}

pub(crate) fn json_string(s: &str) -> Vec<u8> {
    serde_json::to_vec(s).expect("strings serialize")
}

fn err(path: String, message: impl Into<String>) -> Error {
    Error::config(path, message)
}

impl ResumeSchema {
    pub fn from_json_reader(reader: impl Read) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_reader(reader);
        let schema: ResumeSchema = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            Error::config(path, e.into_inner().to_string())
        })?;
        schema.compile()?;
        Ok(schema)
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        Self::from_json_reader(text.as_bytes())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let f = File::open(path).map_err(|e| Error::io_at(path.display().to_string(), e))?;
        Self::from_json_reader(BufReader::new(f))
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("schema serializes")
    }

    /// The built-in schema: eleven fields with placeholder presence rates
    /// (0.9 institute and title, 0.7 email, 0.5 everything else) and small
    /// illustrative value pools.
    pub fn builtin() -> Self {
        let years = [
            "1998-2002", "2000-2004", "2002-2006", "2004-2008", "2006-2010", "2008-2012", "2010-2013",
            "2011-2014", "2012-2015",
        ];
        let orgs = [
            "Institute of Computing Technology", "Tsinghua University", "Peking University",
            "University of Science and Technology", "Zhejiang University", "Fudan University",
            "Chinese Academy of Sciences", "Huawei", "Alibaba", "Baidu", "Tencent", "IBM Research",
        ];
        let positions = [
            "BSc", "MSc", "PhD", "Postdoc", "Engineer", "Senior Engineer", "Researcher", "Manager",
            "Assistant Professor",
        ];
        let topics = [
            "big data", "databases", "computer architecture", "machine learning", "distributed systems",
            "information retrieval", "data mining", "networking", "operating systems", "graph processing",
            "benchmarking", "cloud computing",
        ];
        let experience = |name: &str| {
            FieldSpec::compound(
                name,
                0.5,
                3,
                vec![
                    FieldSpec::pool("time", 0.5, 1, &years),
                    FieldSpec::pool("company_or_school", 0.5, 1, &orgs),
                    FieldSpec::pool("position_or_degree", 0.5, 1, &positions),
                ],
            )
        };
        Self {
            name: NameSpec::default(),
            fields: vec![
                FieldSpec::pool(
                    "email",
                    0.7,
                    2,
                    &["office@mail.example.com", "contact@lab.example.edu", "staff@inst.example.ac.cn", "hello@corp.example.net"],
                ),
                FieldSpec::pool(
                    "telephone",
                    0.5,
                    1,
                    &["+86-10-6260-0000", "+86-10-6260-0001", "+86-21-5550-0199", "+1-555-0100", "+44-20-7946-0018"],
                ),
                FieldSpec::pool(
                    "address",
                    0.5,
                    1,
                    &["6 Kexueyuan South Road, Beijing", "220 Handan Road, Shanghai", "38 Zheda Road, Hangzhou", "1 Main Street, Springfield"],
                ),
                FieldSpec::pool(
                    "date_of_birth",
                    0.5,
                    1,
                    &["1975-03-14", "1979-11-02", "1982-06-30", "1985-01-21", "1988-09-09", "1990-12-25"],
                ),
                FieldSpec::pool(
                    "home_place",
                    0.5,
                    1,
                    &["Beijing", "Shanghai", "Hangzhou", "Wuhan", "Chengdu", "Xi'an", "Nanjing", "Shenzhen"],
                ),
                FieldSpec::pool("institute", 0.9, 1, &orgs),
                FieldSpec::pool(
                    "title",
                    0.9,
                    1,
                    &["Professor", "Associate Professor", "Assistant Professor", "Researcher", "Engineer", "Student"],
                ),
                FieldSpec::pool("research_interest", 0.5, 3, &topics),
                experience("education_experience"),
                experience("work_experience"),
                FieldSpec::compound(
                    "publications",
                    0.5,
                    5,
                    vec![
                        FieldSpec::pool("author", 0.5, 3, &["J. Smith", "L. Wang", "Y. Zhang", "M. Garcia", "K. Tanaka", "A. Kumar"]),
                        FieldSpec::pool("time", 0.5, 1, &["2008", "2009", "2010", "2011", "2012", "2013"]),
                        FieldSpec::pool(
                            "title",
                            0.5,
                            1,
                            &[
                                "A benchmark suite for big data systems",
                                "Characterizing data analysis workloads",
                                "Scalable graph generation",
                                "Topic models at scale",
                                "Efficient query processing on clusters",
                            ],
                        ),
                        FieldSpec::pool("source", 0.5, 1, &["HPCA", "VLDB", "SIGMOD", "ICDE", "KDD", "WWW", "IISWC"]),
                    ],
                ),
            ],
        }
    }

    pub(crate) fn compile(&self) -> Result<Vec<CompiledField>> {
        let n = &self.name;
        if n.syllables.is_empty() || n.syllables.iter().any(|s| s.is_empty()) {
            return Err(err("name.syllables".into(), "syllable pool must hold non-empty strings"));
        }
        if n.min_syllables == 0 || n.min_syllables > n.max_syllables {
            return Err(err(
                "name.min_syllables".into(),
                format!("need 1 <= min ({}) <= max ({})", n.min_syllables, n.max_syllables),
            ));
        }
        compile_fields(&self.fields, "fields", 1)
    }
}

fn compile_fields(fields: &[FieldSpec], path: &str, depth: u32) -> Result<Vec<CompiledField>> {
    let mut seen = HashSet::new();
    if depth == 1 {
        seen.insert("name");
    }
    let mut out = Vec::with_capacity(fields.len());
    for (i, f) in fields.iter().enumerate() {
        let at = |field: &str| format!("{path}[{i}].{field}");
        if f.name.is_empty() || !seen.insert(f.name.as_str()) {
            let why = if f.name == "name" && depth == 1 {
                "\"name\" is reserved for the generated primary key".to_string()
            } else {
                format!("duplicate or empty field name {:?}", f.name)
            };
            return Err(err(at("name"), why));
        }
        let p = f.presence_probability;
        if !(0.0..=1.0).contains(&p) {
            return Err(err(at("presence_probability"), format!("{p} is outside [0, 1]")));
        }
        if f.repeat == 0 {
            return Err(err(at("repeat"), "repeat must be >= 1"));
        }
        let (content, values) = match (&f.values, &f.subfields) {
            (Some(values), None) => {
                if values.is_empty() {
                    return Err(err(at("values"), "value pool must not be empty"));
                }
                let weights = match &f.weights {
                    Some(w) if w.len() != values.len() => {
                        return Err(err(at("weights"), format!("{} weights for {} values", w.len(), values.len())))
                    }
                    Some(w) => w.clone(),
                    None => vec![1.0; values.len()],
                };
                let table = CumulativeTable::new(&weights).map_err(|e| err(at("weights"), e.to_string()))?;
                let escaped = values.iter().map(|v| json_string(v).into_boxed_slice()).collect();
                (Content::Pool(table), escaped)
            }
            (None, Some(subs)) => {
                if depth >= 2 {
                    return Err(err(at("subfields"), "sub-fields cannot have sub-fields"));
                }
                if f.weights.is_some() {
                    return Err(err(at("weights"), "weights apply only to value pools"));
                }
                if subs.is_empty() {
                    return Err(err(at("subfields"), "compound field needs at least one sub-field"));
                }
                (Content::Compound(compile_fields(subs, &at("subfields"), depth + 1)?), Vec::new())
            }
            _ => return Err(err(at("values"), "set exactly one of `values` or `subfields`")),
        };
        let mut key = json_string(&f.name);
        key.push(b':');
        out.push(CompiledField {
            p,
            repeat: f.repeat,
            key: key.into_boxed_slice(),
            values,
            content,
        });
    }
    Ok(out)
}

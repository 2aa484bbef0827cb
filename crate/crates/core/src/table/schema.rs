use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufReader, Read};
use std::path::Path;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{CumulativeTable, ZipfTable};

/// Column value families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ColumnKind {
    Integer,
    Real,
    Date,
    Categorical,
    SequentialId,
    ForeignKey,
}

/// A bound given either as a number or, for date columns, an ISO date.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Scalar {
    Number(f64),
    Date(String),
}

impl Scalar {
    /// Numeric value; dates become days since 1970-01-01.
    pub fn value(&self) -> std::result::Result<f64, String> {
        match self {
            Scalar::Number(x) if x.is_finite() => Ok(*x),
            Scalar::Number(x) => Err(format!("{x} is not finite")),
            Scalar::Date(s) => NaiveDate::parse_from_str(s, "%Y-%m-%d")
                .map(|d| (d - epoch()).num_days() as f64)
                .map_err(|e| format!("{s:?} is not a YYYY-MM-DD date: {e}")),
        }
    }
}

pub(crate) fn epoch() -> NaiveDate {
    NaiveDate::from_ymd_opt(1970, 1, 1).expect("valid date")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum Distribution {
    Uniform { lo: Scalar, hi: Scalar },
    Gaussian { mean: Scalar, sd: f64 },
    Zipf { s: f64, cardinality: u64 },
    Categorical {
        values: Vec<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        weights: Option<Vec<f64>>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ForeignRef {
    pub table: String,
    /// Row count of the referenced table; may instead come from the
    /// schema's `foreign_tables`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rows: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ColumnSpec {
    pub name: String,
    pub kind: ColumnKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub distribution: Option<Distribution>,
    #[serde(default, skip_serializing_if = "is_zero")]
    pub nullable_probability: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub references: Option<ForeignRef>,
}

fn is_zero(x: &f64) -> bool {
    *x == 0.0
}

/// A validated table description. Construct with [`TableSchema::from_json_str`]
/// or [`TableSchema::validated`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TableSchema {
    pub table: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rows: Option<u64>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub foreign_tables: BTreeMap<String, u64>,
    pub columns: Vec<ColumnSpec>,
}

/// Per-column sampler compiled from a validated spec.
#[derive(Debug, Clone)]
pub(crate) enum Compiled {
    SequentialId,
    ForeignKey { rows: u64 },
    UniformInt { lo: i64, hi: i64 },
    UniformReal { lo: f64, hi: f64 },
    Gaussian { mean: f64, sd: f64, round: bool },
    Zipf(ZipfTable),
    Categorical { table: CumulativeTable },
}

#[derive(Debug, Clone)]
pub(crate) struct CompiledColumn {
    pub kind: ColumnKind,
    pub null_p: f64,
    pub sampler: Compiled,
    pub values: Vec<String>,
}

fn err(path: String, message: impl Into<String>) -> Error {
    Error::config(path, message)
}

impl TableSchema {
    pub fn from_json_reader(reader: impl Read) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_reader(reader);
        let schema: TableSchema = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            Error::config(path, e.into_inner().to_string())
        })?;
        schema.validated()
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

    /// Checks every invariant and returns the schema unchanged.
    pub fn validated(self) -> Result<Self> {
        self.compile()?;
        Ok(self)
    }

    pub(crate) fn compile(&self) -> Result<Vec<CompiledColumn>> {
        if self.columns.is_empty() {
            return Err(err("columns".into(), "schema needs at least one column"));
        }
        let mut names = std::collections::HashSet::new();
        let mut sequential = 0;
        let mut out = Vec::with_capacity(self.columns.len());
        for (i, col) in self.columns.iter().enumerate() {
            let at = |field: &str| format!("columns[{i}].{field}");
            if col.name.is_empty() {
                return Err(err(at("name"), "column name must not be empty"));
            }
            if !names.insert(col.name.as_str()) {
                return Err(err(at("name"), format!("duplicate column name {:?}", col.name)));
            }
            let p = col.nullable_probability;
            if !(0.0..=1.0).contains(&p) {
                return Err(err(at("nullable_probability"), format!("{p} is outside [0, 1]")));
            }
            let mut values = Vec::new();
            let sampler = match col.kind {
                ColumnKind::SequentialId => {
                    sequential += 1;
                    if sequential > 1 {
                        return Err(err(at("kind"), "at most one sequential_id column is allowed"));
                    }
                    if p > 0.0 {
                        return Err(err(at("nullable_probability"), "sequential ids cannot be null"));
                    }
                    Compiled::SequentialId
                }
                ColumnKind::ForeignKey => {
                    let r = col
                        .references
                        .as_ref()
                        .ok_or_else(|| err(at("references"), "foreign_key column needs `references`"))?;
                    let rows = r
                        .rows
                        .or_else(|| self.foreign_tables.get(&r.table).copied())
                        .ok_or_else(|| {
                            err(
                                at("references.rows"),
                                format!("no row count for referenced table {:?}", r.table),
                            )
                        })?;
                    if rows == 0 {
                        return Err(err(at("references.rows"), "referenced table must have >= 1 row"));
                    }
                    Compiled::ForeignKey { rows }
                }
                kind => {
                    let d = col
                        .distribution
                        .as_ref()
                        .ok_or_else(|| err(at("distribution"), format!("{kind:?} column needs a distribution")))?;
                    compile_distribution(kind, d, &at("distribution"), &mut values)?
                }
            };
            if !matches!(col.kind, ColumnKind::ForeignKey) && col.references.is_some() {
                return Err(err(at("references"), "only foreign_key columns take `references`"));
            }
            out.push(CompiledColumn {
                kind: col.kind,
                null_p: p,
                sampler,
                values,
            });
        }
        Ok(out)
    }
}

fn scalar(v: &Scalar, path: String) -> Result<f64> {
    v.value().map_err(|m| err(path, m))
}

fn compile_distribution(
    kind: ColumnKind,
    d: &Distribution,
    path: &str,
    values: &mut Vec<String>,
) -> Result<Compiled> {
    let p = |f: &str| format!("{path}.{f}");
    match (kind, d) {
        (ColumnKind::Categorical, Distribution::Categorical { values: vs, weights }) => {
            if vs.is_empty() {
                return Err(err(p("values"), "categorical distribution needs at least one value"));
            }
            let w = match weights {
                Some(w) if w.len() != vs.len() => {
                    return Err(err(
                        p("weights"),
                        format!("{} weights for {} values", w.len(), vs.len()),
                    ))
                }
                Some(w) => w.clone(),
                None => vec![1.0; vs.len()],
            };
            let table = CumulativeTable::new(&w).map_err(|e| err(p("weights"), e.to_string()))?;
            values.extend(vs.iter().cloned());
            Ok(Compiled::Categorical { table })
        }
        (ColumnKind::Categorical, _) => Err(err(p("type"), "categorical columns need a categorical distribution")),
        (_, Distribution::Categorical { .. }) => {
            Err(err(p("type"), format!("categorical distribution is not valid for {kind:?} columns")))
        }
        (_, Distribution::Uniform { lo, hi }) => {
            let (lo, hi) = (scalar(lo, p("lo"))?, scalar(hi, p("hi"))?);
            if lo > hi {
                return Err(err(p("hi"), format!("upper bound {hi} is below lower bound {lo}")));
            }
            if kind == ColumnKind::Real {
                Ok(Compiled::UniformReal { lo, hi })
            } else {
                let (l, h) = (lo.ceil(), hi.floor());
                if l > h || l < i64::MIN as f64 || h > i64::MAX as f64 {
                    return Err(err(p("lo"), format!("no integers in [{lo}, {hi}]")));
                }
                Ok(Compiled::UniformInt { lo: l as i64, hi: h as i64 })
            }
        }
        (_, Distribution::Gaussian { mean, sd }) => {
            let mean = scalar(mean, p("mean"))?;
            if !(*sd >= 0.0 && sd.is_finite()) {
                return Err(err(p("sd"), format!("standard deviation {sd} must be >= 0")));
            }
            Ok(Compiled::Gaussian {
                mean,
                sd: *sd,
                round: kind != ColumnKind::Real,
            })
        }
        (ColumnKind::Date, Distribution::Zipf { .. }) => Err(err(p("type"), "zipf is not valid for date columns")),
        (_, Distribution::Zipf { s, cardinality }) => {
            if !(*s > 0.0 && s.is_finite()) {
                return Err(err(p("s"), format!("zipf exponent {s} must be > 0")));
            }
            let z = ZipfTable::new(*s, *cardinality).map_err(|e| err(p("cardinality"), e.to_string()))?;
            Ok(Compiled::Zipf(z))
        }
    }
}

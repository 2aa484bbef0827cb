use std::fmt;
use std::io::Write;

use chrono::{Datelike, Duration, NaiveDate};

use super::schema::{epoch, ColumnKind, Compiled, CompiledColumn, TableSchema};
use crate::error::Result;
use crate::harness::{self, GenerationPlan, GeneratorKind, RecordSource, ThroughputReport};
use crate::rng::dist::bernoulli;
use crate::rng::{derive_stream, sample_normal, RandomStream};

/// One generated field.
#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Null,
    Integer(i64),
    Real(f64),
    /// Days since 1970-01-01.
    Date(i64),
    Text(String),
}

impl fmt::Display for Value {
    /// Unquoted CSV rendering; null is the empty string.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Null => Ok(()),
            Value::Integer(v) => write!(f, "{v}"),
            Value::Real(v) => f.write_str(ryu::Buffer::new().format(*v)),
            Value::Date(d) => {
                let mut b = Vec::with_capacity(10);
                push_date(&mut b, *d);
                f.write_str(std::str::from_utf8(&b).expect("ascii"))
            }
            Value::Text(s) => f.write_str(s),
        }
    }
}

#[derive(Clone, Copy)]
enum Cell {
    Null,
    Int(i64),
    Real(f64),
    Date(i64),
    Choice(usize),
}

fn min_day() -> i64 {
    (NaiveDate::from_ymd_opt(0, 1, 1).expect("valid") - epoch()).num_days()
}

fn max_day() -> i64 {
    (NaiveDate::from_ymd_opt(9999, 12, 31).expect("valid") - epoch()).num_days()
}

/// Dates are clamped to years 0000..=9999 so they always render as YYYY-MM-DD.
fn push_date(out: &mut Vec<u8>, days: i64) {
    let d = epoch() + Duration::days(days.clamp(min_day(), max_day()));
    let mut b = itoa::Buffer::new();
    let y = b.format(d.year());
    out.extend(std::iter::repeat_n(b'0', 4 - y.len()));
    out.extend_from_slice(y.as_bytes());
    for part in [d.month(), d.day()] {
        out.push(b'-');
        if part < 10 {
            out.push(b'0');
        }
        out.extend_from_slice(itoa::Buffer::new().format(part).as_bytes());
    }
}

fn draw(col: &CompiledColumn, s: &mut RandomStream, index: u64) -> Cell {
    if col.null_p > 0.0 && bernoulli(s, col.null_p) {
        return Cell::Null;
    }
    let date = col.kind == ColumnKind::Date;
    match &col.sampler {
        Compiled::SequentialId => Cell::Int(index as i64 + 1),
        Compiled::ForeignKey { rows } => Cell::Int(s.next_below(*rows) as i64 + 1),
        Compiled::UniformInt { lo, hi } => {
            let v = s.next_in_range(*lo, *hi);
            if date {
                Cell::Date(v)
            } else {
                Cell::Int(v)
            }
        }
        Compiled::UniformReal { lo, hi } => Cell::Real(lo + (hi - lo) * s.next_f64()),
        Compiled::Gaussian { mean, sd, round } => {
            let x = mean + sd * sample_normal(s);
            match (round, date) {
                (_, true) => Cell::Date(x.round() as i64),
                (true, false) => Cell::Int(x.round() as i64),
                (false, false) => Cell::Real(x),
            }
        }
        Compiled::Zipf(z) => {
            let r = z.sample(s);
            if col.kind == ColumnKind::Real {
                Cell::Real(r as f64)
            } else {
                Cell::Int(r as i64)
            }
        }
        Compiled::Categorical { table } => Cell::Choice(table.sample(s)),
    }
}

/// Draws row `row_index` from stream `(master_seed, row_index)`.
pub fn generate_row(schema: &TableSchema, master_seed: u64, row_index: u64) -> Result<Vec<Value>> {
    Ok(PreparedTable::new(schema)?.row(master_seed, row_index))
}

/// Compiled samplers plus pre-escaped header and categorical values.
#[derive(Debug, Clone)]
pub struct PreparedTable {
    columns: Vec<CompiledColumn>,
    escaped: Vec<Vec<Box<[u8]>>>,
    header: Vec<u8>,
}

impl PreparedTable {
    pub fn new(schema: &TableSchema) -> Result<Self> {
        let columns = schema.compile()?;
        let escaped = columns
            .iter()
            .map(|c| c.values.iter().map(|v| escape(v).into_boxed_slice()).collect())
            .collect();
        let mut header = Vec::new();
        for (i, c) in schema.columns.iter().enumerate() {
            if i > 0 {
                header.push(b',');
            }
            header.extend_from_slice(&escape(&c.name));
        }
        header.push(b'\n');
        Ok(Self {
            columns,
            escaped,
            header,
        })
    }

    /// CSV header line including the trailing newline.
    pub fn header(&self) -> &[u8] {
        &self.header
    }

    pub fn row(&self, master_seed: u64, row_index: u64) -> Vec<Value> {
        let mut s = derive_stream(master_seed, row_index);
        self.columns
            .iter()
            .map(|c| match draw(c, &mut s, row_index) {
                Cell::Null => Value::Null,
                Cell::Int(v) => Value::Integer(v),
                Cell::Real(v) => Value::Real(v),
                Cell::Date(d) => Value::Date(d),
                Cell::Choice(i) => Value::Text(c.values[i].clone()),
            })
            .collect()
    }

    /// Appends row `row_index` as a CSV line.
    pub fn render_row(&self, master_seed: u64, row_index: u64, out: &mut Vec<u8>) {
        let mut s = derive_stream(master_seed, row_index);
        for (i, c) in self.columns.iter().enumerate() {
            if i > 0 {
                out.push(b',');
            }
            match draw(c, &mut s, row_index) {
                Cell::Null => {}
                Cell::Int(v) => out.extend_from_slice(itoa::Buffer::new().format(v).as_bytes()),
                Cell::Real(v) => out.extend_from_slice(ryu::Buffer::new().format(v).as_bytes()),
                Cell::Date(d) => push_date(out, d),
                Cell::Choice(k) => out.extend_from_slice(&self.escaped[i][k]),
            }
        }
        out.push(b'\n');
    }
}

fn escape(field: &str) -> Vec<u8> {
    if !field.contains([',', '"', '\n', '\r']) {
        return field.as_bytes().to_vec();
    }
    let mut out = Vec::with_capacity(field.len() + 2);
    out.push(b'"');
    for b in field.bytes() {
        if b == b'"' {
            out.push(b'"');
        }
        out.push(b);
    }
    out.push(b'"');
    out
}

pub struct TableSource<'a> {
    table: &'a PreparedTable,
    seed: u64,
}

impl<'a> TableSource<'a> {
    pub fn new(table: &'a PreparedTable, seed: u64) -> Self {
        Self { table, seed }
    }
}

impl RecordSource for TableSource<'_> {
    fn render(&self, index: u64, out: &mut Vec<u8>) {
        self.table.render_row(self.seed, index, out);
    }
}

/// Writes the header and rows `0..R` as CSV.
pub fn generate_table(
    schema: &TableSchema,
    plan: &GenerationPlan,
    sink: &mut dyn Write,
) -> Result<ThroughputReport> {
    let table = PreparedTable::new(schema)?;
    let source = TableSource::new(&table, plan.seed);
    harness::generate_with_header(GeneratorKind::Table, table.header(), &source, plan, sink)
}

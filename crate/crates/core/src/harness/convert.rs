//! Streaming conversions between generated formats.
//!
//! JSON-lines ↔ CSV is lossless for flat records. CSV fields are read back
//! with type inference: a field that is the canonical JSON text of a
//! number, boolean or string literal becomes that value, anything else is a
//! string. Strings that would be misread are therefore written as JSON
//! string literals, e.g. the string `2008` becomes the field `"2008"`
//! (CSV-escaped as `"""2008"""`). An empty field means the key is absent, so
//! `null` values do not survive a round trip.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde_json::{Map, Value};

use super::plan::OutputFormat;
use crate::error::{Error, Result};
use crate::review::{export_for_classification, export_for_filtering, read_review_records, ReviewRecord};

fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path)
        .map(|f| BufReader::with_capacity(1 << 20, f))
        .map_err(|e| Error::io_at(path.display().to_string(), e))
}

fn csv_err(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::from(io),
        other => Error::Format(format!("{other:?}")),
    }
}

/// Converts `input` from one layout to another, writing `output`; returns
/// the number of records converted.
///
/// Supported pairs: JSON-lines ↔ CSV, edge list ↔ CSV, text → CSV, and
/// review JSON-lines → triples or pairs.
pub fn convert_format(input: &Path, from: OutputFormat, to: OutputFormat, output: &Path) -> Result<u64> {
    use OutputFormat::*;
    let run = |sink: &mut dyn Write| -> Result<u64> {
        match (from, to) {
            (JsonLines, Csv) => jsonl_to_csv(|| open(input), sink),
            (Csv, JsonLines) => csv_to_jsonl(open(input)?, sink),
            (EdgeList, Csv) => edge_list_to_csv(open(input)?, sink),
            (Csv, EdgeList) => csv_to_edge_list(open(input)?, sink),
            (Text, Csv) => text_to_csv(open(input)?, sink),
            (JsonLines, Triples) | (JsonLines, Pairs) => {
                let mut failure = None;
                let records = read_review_records(open(input)?).map_while(|r| match r {
                    Ok(r) => Some(r),
                    Err(e) => {
                        failure = Some(e);
                        None
                    }
                });
                let n = convert_reviews(records, to, sink)?;
                failure.map_or(Ok(n), Err)
            }
            _ => Err(Error::Unsupported(format!("no conversion from {from} to {to}"))),
        }
    };
    let file = File::create(output).map_err(|e| Error::io_at(output.display().to_string(), e))?;
    let mut sink = BufWriter::with_capacity(1 << 20, file);
    let n = run(&mut sink)?;
    sink.flush().map_err(|e| Error::io_at(output.display().to_string(), e))?;
    Ok(n)
}

fn convert_reviews(records: impl Iterator<Item = ReviewRecord>, to: OutputFormat, sink: &mut dyn Write) -> Result<u64> {
    if to == OutputFormat::Triples {
        export_for_filtering(records, sink)
    } else {
        export_for_classification(records, sink)
    }
}

fn parse_object(line: &str, number: usize) -> Result<Map<String, Value>> {
    match serde_json::from_str::<Value>(line) {
        Ok(Value::Object(m)) => Ok(m),
        Ok(_) => Err(Error::Format(format!("line {number}: expected a JSON object"))),
        Err(e) => Err(Error::Format(format!("line {number}: {e}"))),
    }
}

fn json_lines<R: BufRead>(reader: R) -> impl Iterator<Item = Result<Map<String, Value>>> {
    reader.lines().enumerate().filter_map(|(i, line)| match line {
        Err(e) => Some(Err(Error::io_at(format!("reading line {}", i + 1), e))),
        Ok(l) if l.trim().is_empty() => None,
        Ok(l) => Some(parse_object(&l, i + 1)),
    })
}

/// Two passes over the input: the first collects the union of keys in
/// first-appearance order and rejects nested values, the second writes rows.
pub fn jsonl_to_csv<R, F>(mut reopen: F, sink: &mut dyn Write) -> Result<u64>
where
    R: BufRead,
    F: FnMut() -> Result<R>,
{
    let mut columns: Vec<String> = Vec::new();
    let mut index = std::collections::HashMap::new();
    let mut nested: Vec<String> = Vec::new();
    for record in json_lines(reopen()?) {
        for (k, v) in record? {
            if v.is_object() || v.is_array() {
                if !nested.contains(&k) {
                    nested.push(k);
                }
                continue;
            }
            if !index.contains_key(&k) {
                index.insert(k.clone(), columns.len());
                columns.push(k);
            }
        }
    }
    if !nested.is_empty() {
        return Err(Error::Unsupported(format!(
            "CSV cannot hold nested values; offending fields: {}",
            nested.join(", ")
        )));
    }
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(sink);
    if !columns.is_empty() {
        w.write_record(&columns).map_err(csv_err)?;
    }
    let mut row = vec![String::new(); columns.len()];
    let mut n = 0;
    for record in json_lines(reopen()?) {
        row.iter_mut().for_each(String::clear);
        for (k, v) in record? {
            let slot = &mut row[index[&k]];
            match v {
                Value::Null => {}
                Value::String(s) => encode_string(&s, slot),
                other => *slot = other.to_string(),
            }
        }
        w.write_record(&row).map_err(csv_err)?;
        n += 1;
    }
    w.flush()?;
    Ok(n)
}

fn encode_string(s: &str, out: &mut String) {
    match infer(s) {
        Some(Value::String(back)) if back == s => out.push_str(s),
        _ => *out = Value::String(s.to_string()).to_string(),
    }
}

/// Reads a CSV field back as a JSON value; `None` for an empty field.
fn infer(field: &str) -> Option<Value> {
    if field.is_empty() {
        return None;
    }
    let literal = match field.as_bytes()[0] {
        b'"' | b'-' | b'0'..=b'9' | b't' | b'f' => serde_json::from_str::<Value>(field).ok(),
        _ => None,
    };
    match literal {
        Some(v @ (Value::Number(_) | Value::Bool(_) | Value::String(_))) => {
            let canonical = v.to_string();
            Some(if canonical == field { v } else { Value::String(field.to_string()) })
        }
        _ => Some(Value::String(field.to_string())),
    }
}

/// CSV with a header row to JSON-lines; empty fields are omitted.
pub fn csv_to_jsonl(reader: impl BufRead, sink: &mut dyn Write) -> Result<u64> {
    let mut r = csv::ReaderBuilder::new().from_reader(reader);
    let header = r.headers().map_err(csv_err)?.clone();
    let mut rec = csv::StringRecord::new();
    let mut n = 0;
    let mut line = Vec::new();
    while r.read_record(&mut rec).map_err(csv_err)? {
        let mut m = Map::new();
        for (k, field) in header.iter().zip(rec.iter()) {
            if let Some(v) = infer(field) {
                m.insert(k.to_string(), v);
            }
        }
        line.clear();
        serde_json::to_writer(&mut line, &m).expect("maps serialize");
        line.push(b'\n');
        sink.write_all(&line)
            .map_err(|e| Error::io_at(format!("writing record {n}"), e))?;
        n += 1;
    }
    sink.flush()?;
    Ok(n)
}

/// Edge list lines (`#` comments skipped) to `src,dst` CSV.
pub fn edge_list_to_csv(reader: impl BufRead, sink: &mut dyn Write) -> Result<u64> {
    sink.write_all(b"src,dst\n")?;
    let mut n = 0;
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io_at(format!("reading line {}", i + 1), e))?;
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        let mut ids = t.split(|c: char| c.is_whitespace() || c == ',').filter(|s| !s.is_empty());
        let (Some(a), Some(b), None) = (ids.next(), ids.next(), ids.next()) else {
            return Err(Error::Format(format!("line {}: expected two node ids", i + 1)));
        };
        for id in [a, b] {
            id.parse::<u64>()
                .map_err(|_| Error::Format(format!("line {}: {id:?} is not a node id", i + 1)))?;
        }
        writeln!(sink, "{a},{b}")?;
        n += 1;
    }
    sink.flush()?;
    Ok(n)
}

/// `src,dst` CSV to a header-less, tab-separated edge list.
pub fn csv_to_edge_list(reader: impl BufRead, sink: &mut dyn Write) -> Result<u64> {
    let mut r = csv::ReaderBuilder::new().from_reader(reader);
    let mut rec = csv::StringRecord::new();
    let mut n = 0;
    while r.read_record(&mut rec).map_err(csv_err)? {
        if rec.len() != 2 {
            return Err(Error::Format(format!("row {}: expected src,dst", n + 1)));
        }
        for id in rec.iter() {
            id.parse::<u64>()
                .map_err(|_| Error::Format(format!("row {}: {id:?} is not a node id", n + 1)))?;
        }
        writeln!(sink, "{}\t{}", &rec[0], &rec[1])?;
        n += 1;
    }
    sink.flush()?;
    Ok(n)
}

/// One line per record under a single `text` column.
pub fn text_to_csv(reader: impl BufRead, sink: &mut dyn Write) -> Result<u64> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(sink);
    w.write_record(["text"]).map_err(csv_err)?;
    let mut n = 0;
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io_at(format!("reading line {}", i + 1), e))?;
        w.write_record([line]).map_err(csv_err)?;
        n += 1;
    }
    w.flush()?;
    Ok(n)
}

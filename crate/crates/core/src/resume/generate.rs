use std::io::Write;

use super::schema::{json_string, CompiledField, Content, ResumeSchema};
use crate::error::Result;
use crate::harness::{self, GenerationPlan, GeneratorKind, RecordSource, ThroughputReport};
use crate::rng::dist::bernoulli;
use crate::rng::{derive_stream, RandomStream};

/// A compiled schema with every key and pool value pre-escaped as JSON.
pub struct PreparedResume {
    fields: Vec<CompiledField>,
    /// Escaped syllables without quotes: lower-case and capitalised forms.
    syllables: Vec<Box<[u8]>>,
    capitalised: Vec<Box<[u8]>>,
    min_syllables: u32,
    max_syllables: u32,
}

fn unquoted(s: &str) -> Box<[u8]> {
    let q = json_string(s);
    q[1..q.len() - 1].into()
}

impl PreparedResume {
    pub fn new(schema: &ResumeSchema) -> Result<Self> {
        let fields = schema.compile()?;
        let syl = &schema.name.syllables;
        let capitalised = syl
            .iter()
            .map(|s| {
                let mut c = s.chars();
                let first = c.next().map(|f| f.to_uppercase().collect::<String>()).unwrap_or_default();
                unquoted(&(first + c.as_str()))
            })
            .collect();
        Ok(Self {
            fields,
            syllables: syl.iter().map(|s| unquoted(s)).collect(),
            capitalised,
            min_syllables: schema.name.min_syllables,
            max_syllables: schema.name.max_syllables,
        })
    }

    /// Appends one record (no newline) drawn from `s`.
    pub fn render(&self, s: &mut RandomStream, out: &mut Vec<u8>) {
        out.extend_from_slice(b"{\"name\":\"");
        let count = s.next_in_range(i64::from(self.min_syllables), i64::from(self.max_syllables));
        let n = self.syllables.len() as u64;
        for i in 0..count {
            let k = s.next_below(n) as usize;
            out.extend_from_slice(if i == 0 { &self.capitalised[k] } else { &self.syllables[k] });
        }
        out.push(b'_');
        out.extend_from_slice(itoa::Buffer::new().format(s.stream_id()).as_bytes());
        out.push(b'"');
        for f in &self.fields {
            if bernoulli(s, f.p) {
                out.push(b',');
                render_field(f, s, out);
            }
        }
        out.push(b'}');
    }
}

fn render_field(f: &CompiledField, s: &mut RandomStream, out: &mut Vec<u8>) {
    out.extend_from_slice(&f.key);
    if f.repeat > 1 {
        let n = 1 + s.next_below(u64::from(f.repeat));
        out.push(b'[');
        for i in 0..n {
            if i > 0 {
                out.push(b',');
            }
            render_item(f, s, out);
        }
        out.push(b']');
    } else {
        render_item(f, s, out);
    }
}

fn render_item(f: &CompiledField, s: &mut RandomStream, out: &mut Vec<u8>) {
    match &f.content {
        Content::Pool(table) => out.extend_from_slice(&f.values[table.sample(s)]),
        Content::Compound(subs) => {
            out.push(b'{');
            let mut first = true;
            for sub in subs {
                if bernoulli(s, sub.p) {
                    if !first {
                        out.push(b',');
                    }
                    first = false;
                    render_field(sub, s, out);
                }
            }
            out.push(b'}');
        }
    }
}

/// Draws one resume from `s` as a JSON object with keys in schema order.
pub fn generate_resume(schema: &ResumeSchema, s: &mut RandomStream) -> Result<serde_json::Value> {
    let prepared = PreparedResume::new(schema)?;
    let mut buf = Vec::new();
    prepared.render(s, &mut buf);
    Ok(serde_json::from_slice(&buf).expect("rendered resumes are valid JSON"))
}

/// Record `i` is drawn from stream `(seed, i)`, one JSON object per line.
pub struct ResumeSource<'a> {
    schema: &'a PreparedResume,
    seed: u64,
}

impl<'a> ResumeSource<'a> {
    pub fn new(schema: &'a PreparedResume, seed: u64) -> Self {
        Self { schema, seed }
    }
}

impl RecordSource for ResumeSource<'_> {
    fn render(&self, index: u64, out: &mut Vec<u8>) {
        self.schema.render(&mut derive_stream(self.seed, index), out);
        out.push(b'\n');
    }
}

pub fn generate_resumes(
    schema: &ResumeSchema,
    plan: &GenerationPlan,
    sink: &mut dyn Write,
) -> Result<ThroughputReport> {
    let prepared = PreparedResume::new(schema)?;
    let source = ResumeSource::new(&prepared, plan.seed);
    harness::generate_records(GeneratorKind::Resume, &source, plan, sink)
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::Value;

    fn with_probability(p: f64) -> ResumeSchema {
        let mut s = ResumeSchema::builtin();
        for f in &mut s.fields {
            f.presence_probability = p;
            f.repeat = 1;
            for sub in f.subfields.iter_mut().flatten() {
                sub.presence_probability = p;
                sub.repeat = 1;
            }
        }
        s
    }

    #[test]
    fn forced_inclusion() {
        let schema = with_probability(1.0);
        for i in 0..50 {
            let r = generate_resume(&schema, &mut derive_stream(2, i)).unwrap();
            let obj = r.as_object().unwrap();
            assert_eq!(obj.len(), 12);
            for f in &schema.fields {
                let v = &obj[&f.name];
                if let Some(subs) = &f.subfields {
                    assert_eq!(v.as_object().unwrap().len(), subs.len());
                } else {
                    assert!(v.is_string());
                }
            }
        }
    }

    #[test]
    fn forced_exclusion() {
        let schema = with_probability(0.0);
        for i in 0..50 {
            let r = generate_resume(&schema, &mut derive_stream(2, i)).unwrap();
            let obj = r.as_object().unwrap();
            assert_eq!(obj.keys().collect::<Vec<_>>(), ["name"]);
            let name = obj["name"].as_str().unwrap();
            assert!(name.ends_with(&format!("_{i}")), "{name}");
            assert!(name.chars().next().unwrap().is_uppercase());
        }
    }

    #[test]
    fn repeats_are_arrays_within_bounds() {
        let schema = ResumeSchema::from_json_str(
            r#"{"fields":[{"name":"email","presence_probability":1,"repeat":3,"values":["a\"b","c"]}]}"#,
        )
        .unwrap();
        let mut lengths = [0; 4];
        for i in 0..300 {
            let r = generate_resume(&schema, &mut derive_stream(0, i)).unwrap();
            let arr = r["email"].as_array().unwrap();
            lengths[arr.len()] += 1;
            assert!(arr.iter().all(|v| v == "a\"b" || v == "c"));
        }
        assert_eq!(lengths[0], 0);
        assert!(lengths[1..].iter().all(|&n| n > 50), "{lengths:?}");
    }

    #[test]
    fn source_matches_structured_draw() {
        let schema = ResumeSchema::builtin();
        let p = PreparedResume::new(&schema).unwrap();
        let src = ResumeSource::new(&p, 11);
        for i in 0..100 {
            let mut line = Vec::new();
            src.render(i, &mut line);
            assert_eq!(line.pop(), Some(b'\n'));
            let parsed: Value = serde_json::from_slice(&line).unwrap();
            assert_eq!(parsed, generate_resume(&schema, &mut derive_stream(11, i)).unwrap());
        }
    }
}

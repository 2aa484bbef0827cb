use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::time::Instant;

use super::clock::SystemClock;
use super::engine::{write_records, Pacer, RecordSource};
use super::limiter::Throttle;
use super::plan::{GenerationPlan, GeneratorKind, Output, RecordTarget};
use super::report::ThroughputReport;
use crate::error::{Error, Result};
use crate::graph::{generate_graph_volume, InitiatorMatrix};
use crate::resume::{generate_resumes, ResumeSchema};
use crate::review::{generate_reviews, ReviewModel};
use crate::table::{generate_table, TableSchema};
use crate::text::{generate_text_volume, LdaModel};

/// Shared driver for record-oriented generators: applies the plan's target,
/// worker count and rate cap, and times the run.
pub(crate) fn generate_records<S: RecordSource + ?Sized>(
    kind: GeneratorKind,
    source: &S,
    plan: &GenerationPlan,
    sink: &mut dyn Write,
) -> Result<ThroughputReport> {
    generate_with_header(kind, b"", source, plan, sink)
}

/// Like [`generate_records`] but writes `header` first. The header counts
/// toward a byte target and the reported byte total.
pub(crate) fn generate_with_header<S: RecordSource + ?Sized>(
    kind: GeneratorKind,
    header: &[u8],
    source: &S,
    plan: &GenerationPlan,
    sink: &mut dyn Write,
) -> Result<ThroughputReport> {
    let target = match plan.record_target()? {
        RecordTarget::Bytes(b) => RecordTarget::Bytes(b.saturating_sub(header.len() as u64).max(1)),
        t => t,
    };
    let mut throttle = plan
        .rate_cap
        .map(|rate| Throttle::new(rate, SystemClock::new()))
        .transpose()?;
    let started = Instant::now();
    if !header.is_empty() {
        sink.write_all(header)
            .map_err(|e| Error::io_at("writing header", e))?;
    }
    let totals = write_records(
        source,
        target,
        plan.workers,
        sink,
        throttle.as_mut().map(|t| t as &mut dyn Pacer),
    )?;
    sink.flush()?;
    let seconds = started.elapsed().as_secs_f64();
    Ok(ThroughputReport::new(
        kind,
        totals.bytes + header.len() as u64,
        totals.records,
        seconds,
        plan.workers,
        plan.seed,
    ))
}

/// Loads the plan's model, opens its output and runs the named generator.
///
/// Errors fall into distinct categories: an invalid plan is a parameter or
/// configuration error, a model or schema that cannot be loaded is
/// [`Error::Model`], and output failures are I/O errors.
pub fn run_plan(plan: &GenerationPlan) -> Result<ThroughputReport> {
    plan.validate()?;
    match plan.kind {
        GeneratorKind::Text => {
            let model = load(plan, LdaModel::load)?;
            with_sink(&plan.output, |sink| generate_text_volume(&model, plan, sink))
        }
        GeneratorKind::Graph => {
            let theta = load(plan, InitiatorMatrix::load)?;
            with_sink(&plan.output, |sink| generate_graph_volume(&theta, plan, sink))
        }
        GeneratorKind::Table => {
            let schema = load(plan, TableSchema::load)?;
            with_sink(&plan.output, |sink| generate_table(&schema, plan, sink))
        }
        GeneratorKind::Resume => {
            let schema = match plan.model {
                Some(_) => load(plan, ResumeSchema::load)?,
                None => ResumeSchema::builtin(),
            };
            with_sink(&plan.output, |sink| generate_resumes(&schema, plan, sink))
        }
        GeneratorKind::Review => {
            let mut model = load(plan, ReviewModel::load)?;
            if let Some(k) = plan.kronecker_power {
                model = model.with_k(k).map_err(|e| match e {
                    Error::Config { message, .. } => Error::param(message),
                    other => other,
                })?;
            }
            with_sink(&plan.output, |sink| generate_reviews(&model, plan, sink))
        }
    }
}

fn load<T>(plan: &GenerationPlan, loader: impl FnOnce(PathBuf) -> Result<T>) -> Result<T> {
    let path = plan.model.as_deref().ok_or_else(|| {
        Error::config("model", format!("{} generation needs a model or schema file", plan.kind))
    })?;
    loader(path.to_path_buf()).map_err(|e| Error::model(path.display().to_string(), e))
}

fn with_sink<T>(output: &Output, run: impl FnOnce(&mut dyn Write) -> Result<T>) -> Result<T> {
    match output {
        Output::Path(path) => {
            let file = File::create(path).map_err(|e| Error::io_at(path.display().to_string(), e))?;
            run(&mut BufWriter::with_capacity(1 << 20, file))
        }
        Output::Stdout => run(&mut BufWriter::with_capacity(1 << 20, io::stdout().lock())),
        Output::Discard => run(&mut io::sink()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::Volume;
    use crate::ErrorKind;

    #[test]
    fn error_categories_are_distinct() {
        let dir = tempfile::tempdir().unwrap();
        let missing = GenerationPlan::new(GeneratorKind::Text, Volume::Records(1));
        assert_eq!(run_plan(&missing).unwrap_err().kind(), ErrorKind::Config);

        let absent = missing.clone().with_model(dir.path().join("nope.json"));
        assert_eq!(run_plan(&absent).unwrap_err().kind(), ErrorKind::Model);

        let bad = dir.path().join("bad.json");
        std::fs::write(&bad, "{\"k\": 1}").unwrap();
        let e = run_plan(&missing.clone().with_model(&bad)).unwrap_err();
        assert_eq!(e.kind(), ErrorKind::Model);

        let unwritable = GenerationPlan::new(GeneratorKind::Resume, Volume::Records(1))
            .with_output(Output::Path(dir.path().join("no/such/dir/out.jsonl")));
        assert_eq!(run_plan(&unwritable).unwrap_err().kind(), ErrorKind::Io);

        let zero = GenerationPlan::new(GeneratorKind::Resume, Volume::Bytes(0));
        assert_eq!(run_plan(&zero).unwrap_err().kind(), ErrorKind::Param);
    }

    #[test]
    fn resumes_to_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("r.jsonl");
        let plan = GenerationPlan::new(GeneratorKind::Resume, Volume::Records(100))
            .with_output(Output::Path(path.clone()))
            .with_workers(2);
        let r = run_plan(&plan).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text.lines().count(), 100);
        assert_eq!(r.bytes, text.len() as u64);
    }
}

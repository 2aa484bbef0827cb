//! Acceptance suite: one line per criterion, non-zero exit on any failure.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use common::{chi_square_p, plan, small_model, three_sigma, write_models, Models};
use serde_json::{Map, Value};
use synthgen::graph::{estimate_initiator, generate_graph, FitConfig, InitiatorMatrix};
use synthgen::harness::clock::{Clock, ManualClock};
use synthgen::harness::limiter::rate_limit;
use synthgen::harness::{
    convert_format, run_plan, scaling_experiment, GeneratorKind, Output, OutputFormat, ThroughputReport, Volume,
    BYTES_PER_MB,
};
use synthgen::resume::{PreparedResume, ResumeSchema};
use synthgen::rng::{
    derive_stream, sample_bernoulli, sample_dirichlet, sample_multinomial, sample_poisson, CumulativeTable,
    ZipfTable,
};
use synthgen::text::{generate_document, preprocess_corpus, train_lda, LdaTrainConfig};
use synthgen::Error;

type Outcome = Result<String, String>;
type Check<'a> = Box<dyn Fn() -> Outcome + 'a>;

fn ensure(ok: bool, message: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(message())
    }
}

const MB: u64 = 1 << 20;

fn linear_scaling(models: &Models) -> Outcome {
    let mut detail = Vec::new();
    for kind in [GeneratorKind::Text, GeneratorKind::Table, GeneratorKind::Resume, GeneratorKind::Review] {
        let template = plan(kind, models, Volume::Bytes(16 * MB)).with_workers(1).with_seed(1);
        let result = scaling_experiment(&template, &[16 * MB, 32 * MB, 64 * MB, 128 * MB], 3, run_plan)
            .map_err(|e| format!("{kind}: {e}"))?;
        detail.push(format!("{kind} R²={:.4}", result.fit.r_squared));
        ensure(result.fit.r_squared >= 0.98, || format!("{kind}: R² {:.4} < 0.98 ({:?})", result.fit.r_squared, result.points))?;
    }
    let template = plan(GeneratorKind::Graph, models, Volume::Edges(1 << 16)).with_workers(1).with_seed(1);
    let ladder: Vec<u64> = (16..=20).map(|p| 1u64 << p).collect();
    let result = scaling_experiment(&template, &ladder, 3, run_plan).map_err(|e| format!("graph: {e}"))?;
    detail.push(format!("graph R²={:.4}", result.fit.r_squared));
    ensure(result.fit.r_squared >= 0.98, || format!("graph: R² {:.4} < 0.98 ({:?})", result.fit.r_squared, result.points))?;
    Ok(detail.join(", "))
}

fn metric_arithmetic() -> Outcome {
    let graph = ThroughputReport::new(GeneratorKind::Graph, 0, 100_000, 100.0, 1, 0);
    ensure(graph.rate == 1000.0 && graph.unit.label() == "Edges/s", || format!("graph rate {}", graph.rate))?;
    let text = ThroughputReport::new(GeneratorKind::Text, 102_400 * MB, 1, 10_000.0, 1, 0);
    ensure(text.rate == 10.24 && text.unit.label() == "MB/s", || format!("text rate {}", text.rate))?;
    Ok("1000 Edges/s, 10.24 MB/s".into())
}

fn kronecker_power_sum(t: &InitiatorMatrix, k: u32) -> f64 {
    let n = t.n() as u64;
    let size = n.pow(k);
    let mut total = 0.0;
    for a in 0..size {
        for b in 0..size {
            let (mut x, mut y, mut p) = (a, b, 1.0);
            for _ in 0..k {
                p *= t.get((x % n) as usize, (y % n) as usize);
                x /= n;
                y /= n;
            }
            total += p;
        }
    }
    total
}

fn kronecker_count() -> Outcome {
    let t = InitiatorMatrix::new(vec![vec![0.9, 0.5], vec![0.5, 0.1]], true).unwrap();
    let counts: Vec<f64> = (0..30)
        .map(|seed| generate_graph(&t, 16, &mut derive_stream(seed, 0)).map(|g| g.edge_count() as f64))
        .collect::<synthgen::Result<_>>()
        .map_err(|e| e.to_string())?;
    let mean = counts.iter().sum::<f64>() / 30.0;
    let sigma = 65536f64.sqrt();
    ensure((mean - 65536.0).abs() <= 4.0 * sigma, || format!("mean {mean} outside 65536 ± {}", 4.0 * sigma))?;

    let initiators = [
        InitiatorMatrix::new(vec![vec![0.9, 0.5], vec![0.5, 0.1]], true).unwrap(),
        InitiatorMatrix::new(vec![vec![0.5, 0.5], vec![0.5, 0.5]], true).unwrap(),
        InitiatorMatrix::new(vec![vec![0.99, 0.3, 0.05], vec![0.2, 0.6, 0.4], vec![0.1, 0.0, 0.7]], true).unwrap(),
    ];
    let mut worst: f64 = 0.0;
    for t in &initiators {
        for k in 1..=3 {
            let diff = (kronecker_power_sum(t, k) - t.sum().powi(k as i32)).abs();
            worst = worst.max(diff);
            ensure(diff < 1e-9, || format!("{t:?} k={k}: enumeration differs by {diff}"))?;
            ensure((t.expected_edge_count(k) - t.sum().powi(k as i32)).abs() < 1e-9, || "closed form".into())?;
        }
    }
    Ok(format!("mean {mean:.1} over 30 seeds (|Δ| {:.1} ≤ {:.0}); oracle max |Δ| {worst:.1e}", (mean - 65536.0).abs(), 4.0 * sigma))
}

fn lda_conformance() -> Outcome {
    let model = small_model();
    let alpha_total: f64 = model.alpha().iter().sum();
    let expected: Vec<f64> = (0..4)
        .map(|w| (0..2).map(|k| model.alpha()[k] / alpha_total * model.beta()[k][w]).sum())
        .collect();
    let mut observed = [0u64; 4];
    let (mut words, mut doc) = (0u64, 0u64);
    while words < 100_000 {
        for w in generate_document(&model, &mut derive_stream(101, doc)).words {
            observed[w.word as usize] += 1;
            words += 1;
        }
        doc += 1;
    }
    let p = chi_square_p(&observed, &expected);
    ensure(p > 0.001, || format!("word marginal chi-square p = {p}"))?;

    let docs = ["sun moon sun star", "moon moon", "star sun sun sun comet", "comet"];
    let corpus = preprocess_corpus(docs, 1).map_err(|e| e.to_string())?;
    let eta = 0.01;
    let config = LdaTrainConfig { topics: 1, iterations: 10, alpha: None, eta };
    let trained = train_lda(&corpus, &config, &mut derive_stream(5, 0)).map_err(|e| e.to_string())?;
    let tokens: Vec<&str> = docs.iter().flat_map(|d| d.split(' ')).collect();
    let v = trained.dictionary().len() as f64;
    let mut worst: f64 = 0.0;
    for (i, word) in trained.dictionary().words().iter().enumerate() {
        let count = tokens.iter().filter(|t| *t == word).count() as f64;
        let smoothed = (count + eta) / (tokens.len() as f64 + v * eta);
        worst = worst.max((trained.beta()[0][i] - smoothed).abs());
    }
    ensure(worst < 1e-9, || format!("K=1 beta differs from smoothed frequencies by {worst}"))?;
    Ok(format!("chi-square p = {p:.3} over {words} words; K=1 max |Δ| {worst:.1e}"))
}

fn self_recovery() -> Outcome {
    let truth = InitiatorMatrix::new(vec![vec![0.9, 0.6], vec![0.6, 0.2]], true).unwrap();
    let start = InitiatorMatrix::new(vec![vec![0.7, 0.5], vec![0.5, 0.4]], true).unwrap();
    let config = FitConfig { iterations: 100, init: Some(start), ..FitConfig::default() };
    let mut passes = 0;
    let mut errors = Vec::new();
    for seed in 0..5 {
        let graph = generate_graph(&truth, 10, &mut derive_stream(seed, 0)).map_err(|e| e.to_string())?;
        let fitted = estimate_initiator(&graph, &config, &mut derive_stream(seed, 1)).map_err(|e| e.to_string())?;
        let err = fitted
            .canonical()
            .entries()
            .iter()
            .zip(truth.canonical().entries())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        if err <= 0.15 {
            passes += 1;
        }
        errors.push(format!("{err:.3}"));
    }
    ensure(passes >= 3, || format!("{passes}/5 seeds within 0.15 (max errors {})", errors.join(", ")))?;
    Ok(format!("{passes}/5 seeds within 0.15 (max errors {})", errors.join(", ")))
}

fn determinism(models: &Models) -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let out = dir.path().join("out");
    let run = |p: synthgen::harness::GenerationPlan| -> Result<Vec<u8>, String> {
        run_plan(&p.with_output(Output::Path(out.clone()))).map_err(|e| e.to_string())?;
        std::fs::read(&out).map_err(|e| e.to_string())
    };
    let mut checked = 0;
    for kind in GeneratorKind::ALL {
        let volumes = match kind {
            GeneratorKind::Graph => [Volume::Edges(100_000), Volume::Bytes(2 * MB)],
            _ => [Volume::Records(20_000), Volume::Bytes(2 * MB)],
        };
        for volume in volumes {
            let base = plan(kind, models, volume).with_seed(7);
            let reference = run(base.clone().with_workers(1))?;
            for workers in [2, 8] {
                ensure(run(base.clone().with_workers(workers))? == reference, || {
                    format!("{kind} {volume:?}: {workers} workers differ from 1")
                })?;
            }
            ensure(run(base.clone().with_workers(1))? == reference, || format!("{kind} {volume:?}: rerun differs"))?;
            ensure(run(base.clone().with_seed(8))? != reference, || format!("{kind} {volume:?}: seed ignored"))?;
            checked += 1;
        }
    }
    Ok(format!("{checked} plans identical across workers 1/2/8 and reruns, distinct across seeds"))
}

fn distribution_suite() -> Outcome {
    const N: u64 = 100_000;
    let mut s = derive_stream(2024, 0);

    let hits = (0..N).filter(|_| sample_bernoulli(&mut s, 0.3).unwrap()).count() as f64 / N as f64;
    ensure((hits - 0.3).abs() <= three_sigma(0.3, N), || format!("bernoulli {hits}"))?;

    let mut two = [0u64; 2];
    for _ in 0..N {
        two[sample_multinomial(&mut s, &[1.0, 1.0]).unwrap()] += 1;
    }
    for c in two {
        ensure((c as f64 / N as f64 - 0.5).abs() <= three_sigma(0.5, N), || format!("multinomial {two:?}"))?;
    }
    let weights = [4.0, 0.0, 2.5, 1.0, 0.5];
    let table = CumulativeTable::new(&weights).unwrap();
    let mut counts = [0u64; 5];
    for _ in 0..N {
        counts[table.sample(&mut s)] += 1;
    }
    let p_multi = chi_square_p(&counts, &weights);
    ensure(p_multi > 0.001, || format!("multinomial chi-square p {p_multi}"))?;

    let dmean = (0..N).map(|_| sample_dirichlet(&mut s, &[2.0, 2.0]).unwrap()[0]).sum::<f64>() / N as f64;
    ensure((dmean - 0.5).abs() < 0.01, || format!("dirichlet mean {dmean}"))?;

    let pmean = (0..N).map(|_| sample_poisson(&mut s, 50.0).unwrap() as f64).sum::<f64>() / N as f64;
    ensure((pmean - 50.0).abs() <= 3.0 * (50.0f64 / N as f64).sqrt(), || format!("poisson mean {pmean}"))?;

    let zipf = ZipfTable::new(1.2, 30).unwrap();
    let mut ranks = [0u64; 30];
    for _ in 0..N {
        ranks[zipf.sample(&mut s) as usize - 1] += 1;
    }
    let zipf_probs: Vec<f64> = (1..=30).map(|r| (r as f64).powf(-1.2)).collect();
    let p_zipf = chi_square_p(&ranks, &zipf_probs);
    ensure(p_zipf > 0.001, || format!("zipf chi-square p {p_zipf}"))?;

    let gaussian = synthgen::table::load_table_schema(
        r#"{"table":"t","columns":[{"name":"g","kind":"real","distribution":{"type":"gaussian","mean":100,"sd":10}}]}"#,
    )
    .map_err(|e| e.to_string())?;
    let prepared = synthgen::table::PreparedTable::new(&gaussian).map_err(|e| e.to_string())?;
    let gmean = (0..N)
        .map(|i| match prepared.row(3, i)[0] {
            synthgen::table::Value::Real(x) => x,
            _ => f64::NAN,
        })
        .sum::<f64>()
        / N as f64;
    ensure((gmean - 100.0).abs() <= 3.0 * 10.0 / (N as f64).sqrt(), || format!("gaussian mean {gmean}"))?;

    let schema = ResumeSchema::builtin();
    let resume = PreparedResume::new(&schema).map_err(|e| e.to_string())?;
    let mut present = vec![0u64; schema.fields.len()];
    let mut buf = Vec::new();
    for i in 0..N {
        buf.clear();
        resume.render(&mut derive_stream(4, i), &mut buf);
        let record: Map<String, Value> = serde_json::from_slice(&buf).map_err(|e| e.to_string())?;
        for (j, f) in schema.fields.iter().enumerate() {
            present[j] += u64::from(record.contains_key(&f.name));
        }
    }
    for (f, &c) in schema.fields.iter().zip(&present) {
        let freq = c as f64 / N as f64;
        ensure((freq - f.presence_probability).abs() <= three_sigma(f.presence_probability, N), || {
            format!("resume field {} present {freq} vs {}", f.name, f.presence_probability)
        })?;
    }
    Ok(format!(
        "bernoulli {hits:.4}, dirichlet {dmean:.4}, poisson {pmean:.3}, gaussian {gmean:.3}, multinomial p {p_multi:.3}, zipf p {p_zipf:.3}, {} resume fields",
        schema.fields.len()
    ))
}

fn velocity() -> Outcome {
    let cap = 10.0 * BYTES_PER_MB;
    let clock = ManualClock::new();
    let mut emitted = 0u64;
    for b in rate_limit(std::iter::repeat(64 * 1024u64), cap, &clock, |b| *b).map_err(|e| e.to_string())? {
        if clock.now() > Duration::from_secs(30) {
            break;
        }
        emitted += b;
    }
    let mb = emitted as f64 / BYTES_PER_MB;
    ensure((285.0..=300.0).contains(&mb), || format!("{mb} MB in 30 s"))?;
    ensure((0.95 * 300.0..=300.0 + 10.0).contains(&mb), || format!("{mb} MB outside the burst band"))?;
    Ok(format!("{mb:.2} MB emitted in 30 simulated seconds"))
}

fn conversion_round_trip() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let schema = ResumeSchema::builtin();
    let resume = PreparedResume::new(&schema).map_err(|e| e.to_string())?;
    let (mut flat, mut nested) = (String::new(), String::new());
    let mut records = Vec::new();
    let mut buf = Vec::new();
    for i in 0..10_000u64 {
        buf.clear();
        resume.render(&mut derive_stream(99, i), &mut buf);
        let full: Map<String, Value> = serde_json::from_slice(&buf).map_err(|e| e.to_string())?;
        if i < 100 {
            nested.push_str(&serde_json::to_string(&full).unwrap());
            nested.push('\n');
        }
        let stripped: Map<String, Value> = full.into_iter().filter(|(_, v)| !v.is_array() && !v.is_object()).collect();
        flat.push_str(&serde_json::to_string(&stripped).unwrap());
        flat.push('\n');
        records.push(stripped);
    }
    let path = |n: &str| dir.path().join(n);
    std::fs::write(path("flat.jsonl"), &flat).map_err(|e| e.to_string())?;
    let n = convert_format(&path("flat.jsonl"), OutputFormat::JsonLines, OutputFormat::Csv, &path("flat.csv"))
        .map_err(|e| e.to_string())?;
    ensure(n == 10_000, || format!("{n} records converted to CSV"))?;
    convert_format(&path("flat.csv"), OutputFormat::Csv, OutputFormat::JsonLines, &path("back.jsonl"))
        .map_err(|e| e.to_string())?;
    let back = std::fs::read_to_string(path("back.jsonl")).map_err(|e| e.to_string())?;
    let round: Vec<Map<String, Value>> = back.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    ensure(round == records, || "round trip changed records".into())?;

    std::fs::write(path("nested.jsonl"), &nested).map_err(|e| e.to_string())?;
    match convert_format(&path("nested.jsonl"), OutputFormat::JsonLines, OutputFormat::Csv, &path("nested.csv")) {
        Err(e @ Error::Unsupported(_)) => {
            let message = e.to_string();
            ensure(message.contains("publications"), || format!("rejection does not name publications: {message}"))?;
            Ok(format!("10000 records round-tripped; nested input rejected ({message})"))
        }
        Err(e) => Err(format!("nested input failed with the wrong error: {e}")),
        Ok(_) => Err("nested input was converted".into()),
    }
}

fn main() {
    let dir = tempfile::tempdir().expect("temporary directory");
    let models = write_models(dir.path());
    let criteria: Vec<(&str, Check)> = vec![
        ("linear scaling", Box::new(|| linear_scaling(&models))),
        ("metric arithmetic", Box::new(metric_arithmetic)),
        ("kronecker edge count", Box::new(kronecker_count)),
        ("lda conformance", Box::new(lda_conformance)),
        ("kronecker self-recovery", Box::new(self_recovery)),
        ("determinism", Box::new(|| determinism(&models))),
        ("distribution conformance", Box::new(distribution_suite)),
        ("velocity control", Box::new(velocity)),
        ("format conversion", Box::new(conversion_round_trip)),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|panic| {
            Err(panic
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| panic.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into()))
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS {}. {name} ({secs:.1} s): {detail}", i + 1),
            Err(reason) => {
                failed += 1;
                println!("FAIL {}. {name} ({secs:.1} s): {reason}", i + 1);
            }
        }
    }
    println!("{} of {} acceptance criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}

use std::fs::File;
use std::io::{self, BufReader, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use synthgen::graph::{estimate_initiator, graph_stats, read_edge_list, FitConfig, InitiatorMatrix};
use synthgen::harness::{
    convert_format, run_plan, scaling_experiment, GenerationPlan, GeneratorKind, Output, OutputFormat, Volume,
};
use synthgen::review::{read_scored_corpus, train_review_model};
use synthgen::rng::derive_stream;
use synthgen::table::TableSchema;
use synthgen::text::{preprocess_corpus, train_lda, LdaTrainConfig};
use synthgen::{Error, Result};

#[derive(Parser)]
#[command(name = "synthgen", version, about = "Deterministic parallel synthetic data generators")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate data and print a throughput report.
    Gen(GenArgs),
    /// Train a model from seed data.
    #[command(subcommand)]
    Train(TrainCommand),
    /// Fit a model to seed data.
    #[command(subcommand)]
    Fit(FitCommand),
    /// Summarize a data set.
    #[command(subcommand)]
    Stats(StatsCommand),
    /// Time generation over a ladder of volumes and fit a line.
    Scale(ScaleArgs),
    /// Convert between output formats.
    Convert(ConvertArgs),
}

#[derive(Args)]
struct PlanArgs {
    /// text, graph, table, resume or review.
    kind: String,
    /// Model or schema file (resumes default to a built-in schema).
    #[arg(long)]
    model: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    workers: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// text, csv, jsonl, edgelist, triples or pairs.
    #[arg(long)]
    format: Option<String>,
    /// Kronecker power for graph and review generation.
    #[arg(long)]
    k: Option<u32>,
}

#[derive(Args)]
struct GenArgs {
    #[command(flatten)]
    plan: PlanArgs,
    /// Output file, or `-` for standard output.
    #[arg(long)]
    out: PathBuf,
    #[arg(long, group = "volume")]
    records: Option<u64>,
    #[arg(long, group = "volume")]
    edges: Option<u64>,
    /// Byte target; accepts K, M and G suffixes (powers of 1024).
    #[arg(long, group = "volume", value_parser = parse_size)]
    bytes: Option<u64>,
    /// Rate cap in bytes/s (edges/s for graphs); accepts size suffixes.
    #[arg(long, value_parser = parse_rate)]
    rate: Option<f64>,
}

#[derive(Subcommand)]
enum TrainCommand {
    /// Train an LDA text model from a corpus with one document per line.
    Lda {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        lda: LdaArgs,
    },
    /// Train a review model from `text<TAB>score` lines.
    Review {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Directed initiator JSON for the review graph.
        #[arg(long, conflicts_with = "graph", required_unless_present = "graph")]
        initiator: Option<PathBuf>,
        /// Directed user-product edge list to fit the initiator from.
        #[arg(long)]
        graph: Option<PathBuf>,
        /// Kronecker power of the review graph.
        #[arg(long)]
        k: u32,
        #[command(flatten)]
        lda: LdaArgs,
    },
}

#[derive(Args)]
struct LdaArgs {
    #[arg(long, default_value_t = 20)]
    topics: usize,
    #[arg(long, default_value_t = 200)]
    iterations: usize,
    /// Symmetric document-topic prior; defaults to 50 / topics.
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long, default_value_t = 0.01)]
    eta: f64,
    /// Drop tokens seen fewer times than this.
    #[arg(long, default_value_t = 5)]
    min_freq: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl LdaArgs {
    fn config(&self) -> LdaTrainConfig {
        LdaTrainConfig {
            topics: self.topics,
            iterations: self.iterations,
            alpha: self.alpha,
            eta: self.eta,
        }
    }
}

#[derive(Subcommand)]
enum FitCommand {
    /// Estimate a Kronecker initiator from an edge list.
    Kronecker {
        graph: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Treat a header-less edge list as undirected.
        #[arg(long)]
        undirected: bool,
        #[arg(long, default_value_t = 100)]
        iterations: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Subcommand)]
enum StatsCommand {
    /// Node, edge and degree statistics of an edge list.
    Graph {
        path: PathBuf,
        #[arg(long)]
        undirected: bool,
    },
}

#[derive(Args)]
struct ScaleArgs {
    #[command(flatten)]
    plan: PlanArgs,
    /// Comma-separated volumes: bytes (size suffixes allowed), or edges for graphs.
    #[arg(long, value_delimiter = ',', value_parser = parse_size, required = true)]
    volumes: Vec<u64>,
    #[arg(long, default_value_t = 3)]
    reps: usize,
    /// Measure volumes in records instead of bytes.
    #[arg(long)]
    records: bool,
}

#[derive(Args)]
struct ConvertArgs {
    #[arg(long)]
    from: String,
    #[arg(long)]
    to: String,
    input: PathBuf,
    output: PathBuf,
}

fn parse_size(s: &str) -> std::result::Result<u64, String> {
    let t = s.trim();
    let upper = t.to_ascii_uppercase();
    let digits = upper.trim_end_matches(['B', 'I']);
    let (num, shift) = match digits.chars().last() {
        Some('K') => (&digits[..digits.len() - 1], 10),
        Some('M') => (&digits[..digits.len() - 1], 20),
        Some('G') => (&digits[..digits.len() - 1], 30),
        Some('T') => (&digits[..digits.len() - 1], 40),
        _ => (digits, 0),
    };
    let value: u64 = num.trim().parse().map_err(|_| format!("{s:?} is not a size"))?;
    value
        .checked_mul(1 << shift)
        .ok_or_else(|| format!("{s:?} is too large"))
}

fn parse_rate(s: &str) -> std::result::Result<f64, String> {
    s.trim()
        .parse::<f64>()
        .or_else(|_| parse_size(s).map(|v| v as f64))
}

fn plan_from(args: &PlanArgs, volume: Volume) -> Result<GenerationPlan> {
    let mut plan = GenerationPlan::new(args.kind.parse()?, volume)
        .with_workers(args.workers)
        .with_seed(args.seed);
    if let Some(m) = &args.model {
        plan = plan.with_model(m);
    }
    if let Some(f) = &args.format {
        plan = plan.with_format(f.parse()?);
    }
    if let Some(k) = args.k {
        plan = plan.with_kronecker_power(k);
    }
    Ok(plan)
}

fn gen(args: GenArgs) -> Result<()> {
    let volume = match (args.records, args.edges, args.bytes) {
        (Some(n), _, _) => Volume::Records(n),
        (_, Some(n), _) => Volume::Edges(n),
        (_, _, Some(n)) => Volume::Bytes(n),
        _ => default_volume(&args.plan)?,
    };
    let mut plan = plan_from(&args.plan, volume)?;
    let to_stdout = args.out.as_os_str() == "-";
    plan = plan.with_output(if to_stdout {
        Output::Stdout
    } else {
        Output::Path(args.out.clone())
    });
    if let Some(r) = args.rate {
        plan = plan.with_rate_cap(r);
    }
    let report = run_plan(&plan)?;
    if to_stdout {
        eprintln!("{}", report.to_json_line());
    } else {
        println!("{}", report.to_json_line());
    }
    eprintln!("{}", report.summary());
    Ok(())
}

/// Tables may take their row count from the schema.
fn default_volume(args: &PlanArgs) -> Result<Volume> {
    if args.kind == "table" {
        if let Some(path) = &args.model {
            let schema = TableSchema::load(path).map_err(|e| Error::model(path.display().to_string(), e))?;
            if let Some(rows) = schema.rows {
                return Ok(Volume::Records(rows));
            }
        }
    }
    Err(Error::config("volume", "give one of --records, --edges or --bytes"))
}

fn read_lines(path: &Path) -> Result<Vec<String>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io_at(path.display().to_string(), e))?;
    Ok(text.lines().map(str::to_string).collect())
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io_at(path.display().to_string(), e))
}

fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| Error::io_at(path.display().to_string(), e))
}

fn train(cmd: TrainCommand) -> Result<()> {
    match cmd {
        TrainCommand::Lda { corpus, out, lda } => {
            let docs = read_lines(&corpus)?;
            let bag = preprocess_corpus(&docs, lda.min_freq)?;
            let model = train_lda(&bag, &lda.config(), &mut derive_stream(lda.seed, 0))?;
            model.save(&out)?;
            println!(
                "{}",
                json!({"topics": model.topics(), "vocabulary": model.vocabulary_size(), "xi": model.xi(), "documents": bag.documents().len()})
            );
        }
        TrainCommand::Review {
            corpus,
            out,
            initiator,
            graph,
            k,
            lda,
        } => {
            let theta = match (initiator, graph) {
                (Some(p), _) => InitiatorMatrix::load(&p).map_err(|e| Error::model(p.display().to_string(), e))?,
                (None, Some(g)) => {
                    let edges = read_edge_list(open(&g)?, Some(true))?;
                    if !edges.directed {
                        return Err(Error::config("graph", "review graphs must be directed"));
                    }
                    estimate_initiator(&edges, &FitConfig::default(), &mut derive_stream(lda.seed, 1))?.canonical()
                }
                (None, None) => unreachable!("clap requires one of them"),
            };
            let reviews = read_scored_corpus(open(&corpus)?)?;
            let model = train_review_model(
                &reviews,
                theta,
                k,
                &lda.config(),
                lda.min_freq,
                &mut derive_stream(lda.seed, 0),
            )?;
            model.save(&out)?;
            println!(
                "{}",
                json!({"reviews": reviews.len(), "score_weights": model.score_weights(), "users": model.user_count()})
            );
        }
    }
    Ok(())
}

fn fit(cmd: FitCommand) -> Result<()> {
    let FitCommand::Kronecker {
        graph,
        out,
        undirected,
        iterations,
        seed,
    } = cmd;
    let edges = read_edge_list(open(&graph)?, Some(!undirected))?;
    let config = FitConfig {
        iterations,
        ..FitConfig::default()
    };
    let theta = estimate_initiator(&edges, &config, &mut derive_stream(seed, 0))?.canonical();
    write_text(&out, &theta.to_json())?;
    println!("{}", theta.to_json());
    Ok(())
}

fn stats(cmd: StatsCommand) -> Result<()> {
    let StatsCommand::Graph { path, undirected } = cmd;
    let hint = undirected.then_some(false);
    let g = read_edge_list(open(&path)?, hint)?;
    let s = graph_stats(&g)?;
    let out = serde_json::to_string(&s).expect("stats serialize");
    println!("{out}");
    eprintln!(
        "{} nodes, {} edges, max degree {}, median nonzero degree {}",
        s.node_count,
        s.edge_count,
        s.max_degree(),
        s.median_nonzero_degree().map_or("n/a".to_string(), |d| d.to_string())
    );
    Ok(())
}

fn scale(args: ScaleArgs) -> Result<()> {
    let kind: GeneratorKind = args.plan.kind.parse()?;
    let volume = match kind {
        GeneratorKind::Graph => Volume::Edges(1),
        _ if args.records => Volume::Records(1),
        _ => Volume::Bytes(1),
    };
    let template = plan_from(&args.plan, volume)?.with_output(Output::Discard);
    let result = scaling_experiment(&template, &args.volumes, args.reps, run_plan);
    match result {
        Ok(r) => {
            let points: Vec<_> = r
                .points
                .iter()
                .map(|p| json!({"volume": p.volume, "mean_seconds": p.mean_seconds, "seconds": p.seconds}))
                .collect();
            println!(
                "{}",
                json!({"kind": kind.name(), "points": points, "slope": r.fit.slope, "intercept": r.fit.intercept, "r_squared": r.fit.r_squared})
            );
            eprintln!("{kind}: R² = {:.4} over {} volumes", r.fit.r_squared, r.points.len());
            Ok(())
        }
        Err(partial) => {
            let points: Vec<_> = partial
                .completed
                .iter()
                .map(|p| json!({"volume": p.volume, "mean_seconds": p.mean_seconds}))
                .collect();
            println!("{}", json!({"kind": kind.name(), "partial": true, "points": points}));
            Err(partial.error)
        }
    }
}

fn convert(args: ConvertArgs) -> Result<()> {
    let from: OutputFormat = args.from.parse()?;
    let to: OutputFormat = args.to.parse()?;
    let n = convert_format(&args.input, from, to, &args.output)?;
    eprintln!("converted {n} records");
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Gen(a) => gen(a),
        Command::Train(c) => train(c),
        Command::Fit(c) => fit(c),
        Command::Stats(c) => stats(c),
        Command::Scale(a) => scale(a),
        Command::Convert(a) => convert(a),
    };
    let _ = io::stdout().flush();
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.kind().exit_code() as u8)
        }
    }
}

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use crate::error::{Error, Result};

/// The five generator families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GeneratorKind {
    Text,
    Graph,
    Table,
    Resume,
    Review,
}

impl GeneratorKind {
    pub const ALL: [GeneratorKind; 5] = [
        GeneratorKind::Text,
        GeneratorKind::Graph,
        GeneratorKind::Table,
        GeneratorKind::Resume,
        GeneratorKind::Review,
    ];

    pub fn name(self) -> &'static str {
        match self {
            GeneratorKind::Text => "text",
            GeneratorKind::Graph => "graph",
            GeneratorKind::Table => "table",
            GeneratorKind::Resume => "resume",
            GeneratorKind::Review => "review",
        }
    }

    /// Graphs are measured in edges, everything else in bytes.
    pub fn rate_unit(self) -> RateUnit {
        match self {
            GeneratorKind::Graph => RateUnit::EdgesPerSecond,
            _ => RateUnit::MegabytesPerSecond,
        }
    }

    pub fn default_format(self) -> OutputFormat {
        match self {
            GeneratorKind::Text => OutputFormat::Text,
            GeneratorKind::Graph => OutputFormat::EdgeList,
            GeneratorKind::Table => OutputFormat::Csv,
            GeneratorKind::Resume | GeneratorKind::Review => OutputFormat::JsonLines,
        }
    }

    pub fn supported_formats(self) -> &'static [OutputFormat] {
        match self {
            GeneratorKind::Text => &[OutputFormat::Text],
            GeneratorKind::Graph => &[OutputFormat::EdgeList, OutputFormat::Csv],
            GeneratorKind::Table => &[OutputFormat::Csv],
            GeneratorKind::Resume => &[OutputFormat::JsonLines],
            GeneratorKind::Review => &[
                OutputFormat::JsonLines,
                OutputFormat::Triples,
                OutputFormat::Pairs,
            ],
        }
    }
}

impl fmt::Display for GeneratorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for GeneratorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        GeneratorKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| {
                Error::config(
                    "kind",
                    format!("unknown generator kind {s:?} (expected text, graph, table, resume or review)"),
                )
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RateUnit {
    /// Binary megabytes (2^20 bytes) per second.
    MegabytesPerSecond,
    EdgesPerSecond,
}

impl RateUnit {
    pub fn label(self) -> &'static str {
        match self {
            RateUnit::MegabytesPerSecond => "MB/s",
            RateUnit::EdgesPerSecond => "Edges/s",
        }
    }
}

/// Serialized layouts understood by generators and the converter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OutputFormat {
    /// One document per line, tokens separated by single spaces.
    Text,
    Csv,
    JsonLines,
    /// Tab-separated `src dst` lines under a `# nodes .. edges .. directed ..` header.
    EdgeList,
    /// `userId,productId,score` CSV projection of reviews.
    Triples,
    /// `text<TAB>score` projection of reviews.
    Pairs,
}

impl OutputFormat {
    pub fn name(self) -> &'static str {
        match self {
            OutputFormat::Text => "text",
            OutputFormat::Csv => "csv",
            OutputFormat::JsonLines => "jsonl",
            OutputFormat::EdgeList => "edgelist",
            OutputFormat::Triples => "triples",
            OutputFormat::Pairs => "pairs",
        }
    }
}

impl fmt::Display for OutputFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "text" | "txt" => OutputFormat::Text,
            "csv" => OutputFormat::Csv,
            "jsonl" | "json-lines" | "ndjson" => OutputFormat::JsonLines,
            "edgelist" | "edge-list" | "tsv-edges" => OutputFormat::EdgeList,
            "triples" => OutputFormat::Triples,
            "pairs" => OutputFormat::Pairs,
            other => return Err(Error::config("format", format!("unknown format {other:?}"))),
        })
    }
}

/// How much to generate. Exactly one target is set by construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Volume {
    Records(u64),
    Edges(u64),
    Bytes(u64),
}

impl Volume {
    pub fn amount(self) -> u64 {
        match self {
            Volume::Records(n) | Volume::Edges(n) | Volume::Bytes(n) => n,
        }
    }

    /// Same unit, different amount.
    pub fn with_amount(self, amount: u64) -> Volume {
        match self {
            Volume::Records(_) => Volume::Records(amount),
            Volume::Edges(_) => Volume::Edges(amount),
            Volume::Bytes(_) => Volume::Bytes(amount),
        }
    }
}

/// Volume target of a record-oriented generator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RecordTarget {
    Records(u64),
    /// Stop after the first record that brings the output to at least this many bytes.
    Bytes(u64),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Output {
    Path(PathBuf),
    Stdout,
    /// Generate and measure without keeping the bytes.
    Discard,
}

/// Everything needed to run one generator.
#[derive(Debug, Clone, PartialEq)]
pub struct GenerationPlan {
    pub kind: GeneratorKind,
    /// Model or schema file. Resume plans fall back to the built-in schema.
    pub model: Option<PathBuf>,
    pub volume: Volume,
    /// Optional cap in bytes/s, or edges/s for graphs.
    pub rate_cap: Option<f64>,
    pub workers: usize,
    pub seed: u64,
    pub output: Output,
    pub format: Option<OutputFormat>,
    /// Kronecker power for graph and review plans; graphs otherwise pick the
    /// smallest power whose expected edge count covers the target, and
    /// reviews use the model's own power.
    pub kronecker_power: Option<u32>,
}

impl GenerationPlan {
    pub fn new(kind: GeneratorKind, volume: Volume) -> Self {
        Self {
            kind,
            model: None,
            volume,
            rate_cap: None,
            workers: 1,
            seed: 0,
            output: Output::Discard,
            format: None,
            kronecker_power: None,
        }
    }

    pub fn with_model(mut self, path: impl Into<PathBuf>) -> Self {
        self.model = Some(path.into());
        self
    }

    pub fn with_workers(mut self, workers: usize) -> Self {
        self.workers = workers;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_output(mut self, output: Output) -> Self {
        self.output = output;
        self
    }

    pub fn with_format(mut self, format: OutputFormat) -> Self {
        self.format = Some(format);
        self
    }

    pub fn with_kronecker_power(mut self, k: u32) -> Self {
        self.kronecker_power = Some(k);
        self
    }

    pub fn with_rate_cap(mut self, rate: f64) -> Self {
        self.rate_cap = Some(rate);
        self
    }

    pub fn format(&self) -> OutputFormat {
        self.format.unwrap_or_else(|| self.kind.default_format())
    }

    pub fn validate(&self) -> Result<()> {
        if self.volume.amount() == 0 {
            return Err(Error::param("volume target must be greater than zero"));
        }
        if self.workers == 0 {
            return Err(Error::param("workers must be >= 1"));
        }
        if let Some(rate) = self.rate_cap {
            if !(rate > 0.0 && rate.is_finite()) {
                return Err(Error::param(format!("rate cap {rate} must be > 0")));
            }
        }
        if self.kronecker_power == Some(0) {
            return Err(Error::param("kronecker power must be >= 1"));
        }
        let format = self.format();
        if !self.kind.supported_formats().contains(&format) {
            return Err(Error::config(
                "format",
                format!("{} generator cannot write {format}", self.kind),
            ));
        }
        if matches!(self.volume, Volume::Edges(_))
            && !matches!(self.kind, GeneratorKind::Graph | GeneratorKind::Review)
        {
            return Err(Error::param(format!(
                "{} output is not measured in edges; use a record or byte target",
                self.kind
            )));
        }
        Ok(())
    }

    /// Target for record-oriented generators. Review edges are records.
    pub fn record_target(&self) -> Result<RecordTarget> {
        self.validate()?;
        Ok(match self.volume {
            Volume::Records(n) | Volume::Edges(n) => RecordTarget::Records(n),
            Volume::Bytes(n) => RecordTarget::Bytes(n),
        })
    }
}

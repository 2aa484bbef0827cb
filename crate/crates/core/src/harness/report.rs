use std::fmt::Write as _;

use super::plan::{GeneratorKind, RateUnit};

/// Bytes in a megabyte: the binary convention, so 100 GB is 102,400 MB.
pub const BYTES_PER_MB: f64 = (1u64 << 20) as f64;

/// Outcome of one generation run: amount produced, wall time and the
/// resulting generation rate (amount divided by running time).
#[derive(Debug, Clone, PartialEq)]
pub struct ThroughputReport {
    pub kind: GeneratorKind,
    pub bytes: u64,
    /// Records, documents, rows or edges emitted.
    pub records: u64,
    pub seconds: f64,
    pub rate: f64,
    pub unit: RateUnit,
    pub workers: usize,
    pub seed: u64,
}

impl ThroughputReport {
    pub fn new(
        kind: GeneratorKind,
        bytes: u64,
        records: u64,
        seconds: f64,
        workers: usize,
        seed: u64,
    ) -> Self {
        let unit = kind.rate_unit();
        let amount = match unit {
            RateUnit::MegabytesPerSecond => bytes as f64 / BYTES_PER_MB,
            RateUnit::EdgesPerSecond => records as f64,
        };
        Self {
            kind,
            bytes,
            records,
            seconds,
            rate: generation_rate(amount, seconds),
            unit,
            workers,
            seed,
        }
    }

    /// Amount in the report's own unit (MB or edges).
    pub fn amount(&self) -> f64 {
        match self.unit {
            RateUnit::MegabytesPerSecond => self.bytes as f64 / BYTES_PER_MB,
            RateUnit::EdgesPerSecond => self.records as f64,
        }
    }

    /// Single-line JSON rendering; `seconds` and `rate` use three decimals.
    pub fn to_json_line(&self) -> String {
        let mut s = String::with_capacity(160);
        write!(
            s,
            r#"{{"kind":"{}","bytes":{},"records":{},"seconds":{:.3},"rate":{:.3},"unit":"{}","workers":{},"seed":{}}}"#,
            self.kind,
            self.bytes,
            self.records,
            self.seconds,
            self.rate,
            self.unit.label(),
            self.workers,
            self.seed
        )
        .unwrap();
        s
    }

    pub fn summary(&self) -> String {
        let amount = match self.unit {
            RateUnit::MegabytesPerSecond => format!("{:.3} MB ({} records)", self.amount(), self.records),
            RateUnit::EdgesPerSecond => format!("{} edges ({} bytes)", self.records, self.bytes),
        };
        format!(
            "{}: {} in {:.3} s = {:.3} {} [{} worker(s), seed {}]",
            self.kind,
            amount,
            self.seconds,
            self.rate,
            self.unit.label(),
            self.workers,
            self.seed
        )
    }
}

/// Amount generated divided by the running time.
pub fn generation_rate(amount: f64, seconds: f64) -> f64 {
    amount / seconds
}

//! Plan execution: worker pool, rate capping, throughput measurement,
//! scaling experiments and format conversion.

pub mod clock;
pub mod convert;
mod engine;
pub mod limiter;
mod plan;
mod report;
mod run;
pub mod scaling;

pub use engine::{write_records, Pacer, RecordSource, Totals};
pub(crate) use engine::{build_pool, write_range};
pub use plan::{GenerationPlan, GeneratorKind, Output, OutputFormat, RateUnit, RecordTarget, Volume};
pub use report::{generation_rate, ThroughputReport, BYTES_PER_MB};
pub(crate) use run::{generate_records, generate_with_header};
pub use run::run_plan;
pub use scaling::{linear_fit, scaling_experiment, LinearFit, PartialScaling, ScalingPoint, ScalingResult};
pub use convert::convert_format;

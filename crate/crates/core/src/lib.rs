//! Deterministic, parallel synthetic data generation.
//!
//! Compact statistical models are trained from small seed data and then used
//! to produce arbitrarily large data sets:
//!
//! * [`text`]: LDA topic models, trained by collapsed Gibbs sampling, generate
//!   bag-of-words documents.
//! * [`graph`]: stochastic Kronecker graphs from a fitted initiator matrix.
//! * [`table`]: relational tables from a JSON column schema.
//! * [`resume`]: schema-less resume records with Bernoulli field presence.
//! * [`review`]: user/product reviews composed from a Kronecker graph,
//!   multinomial scores and per-score text models.
//!
//! The [`harness`] module runs generation plans with a worker pool, an
//! optional rate cap and throughput reporting. Every record is generated from
//! its own [`rng::RandomStream`], so output bytes never depend on the number
//! of workers.

pub mod error;
pub mod graph;
pub mod harness;
pub mod resume;
pub mod review;
pub mod rng;
pub mod table;
pub mod text;

pub use error::{Error, ErrorKind, Result};

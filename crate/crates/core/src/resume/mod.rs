//! Schema-less resume records: a random name plus optional fields, each
//! kept or dropped by its own Bernoulli draw.

mod generate;
mod schema;

pub use generate::{generate_resume, generate_resumes, PreparedResume, ResumeSource};
pub use schema::{FieldSpec, NameSpec, ResumeSchema};

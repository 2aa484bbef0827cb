//! Schema-driven CSV tables. Each row is drawn from its own stream so any
//! row can be regenerated in isolation.

mod generate;
mod schema;

pub use generate::{generate_row, generate_table, PreparedTable, TableSource, Value};
pub use schema::{ColumnKind, ColumnSpec, Distribution, ForeignRef, Scalar, TableSchema};

/// Parses and validates a JSON table schema.
pub fn load_table_schema(config_text: &str) -> crate::Result<TableSchema> {
    TableSchema::from_json_str(config_text)
}

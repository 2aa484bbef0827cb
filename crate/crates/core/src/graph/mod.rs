//! Stochastic Kronecker graphs: initiator matrices, linear-time edge
//! sampling, edge-list I/O, degree statistics and initiator fitting.

mod edgelist;
mod fit;
mod generate;
mod initiator;
mod stats;
mod volume;

pub use edgelist::{header_line, read_edge_list, write_edge_csv, write_edge_list};
pub use fit::{admissible_power, default_initiator, estimate_initiator, FitConfig, MAX_ENTRY, MIN_ENTRY};
pub use generate::{generate_edges, generate_graph, power_for_edges, EdgeList, EdgeSampler, CHUNK_EDGES};
pub use initiator::InitiatorMatrix;
pub use volume::generate_graph_volume;
pub use stats::{graph_stats, GraphStats};

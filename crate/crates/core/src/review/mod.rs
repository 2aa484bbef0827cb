//! Product reviews composed from a directed Kronecker graph (user reviews
//! product), a multinomial score and score-specific LDA text.
//!
//! The graph is read as bipartite by offsetting product ids: edge `(u, v)`
//! becomes user `u` and product `v + n^k`. Masking the diagonal blocks to get
//! a strictly bipartite graph was rejected because it changes the expected
//! edge count `(Σθ)^k`.

mod generate;
mod model;

pub use generate::{
    export_for_classification, export_for_filtering, generate_review, generate_reviews, read_review_records,
    PreparedReview, ReviewRecord, TRIPLES_HEADER,
};
pub use model::{read_scored_corpus, train_review_model, ReviewModel, SCORES};

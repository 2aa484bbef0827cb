//! LDA text generation: corpus preprocessing, collapsed Gibbs training and
//! document synthesis.

mod corpus;
mod generate;
mod model;
mod train;

pub use corpus::{preprocess_corpus, tokenize, BagOfWordsCorpus, Dictionary};
pub use generate::{
    generate_document, generate_document_prepared, generate_text_volume, DocumentDraw, TextSource,
    WordDraw,
};
pub(crate) use generate::render_document;
pub use model::{LdaModel, PreparedLda};
pub(crate) use model::LdaModelFile;
pub use train::{train_lda, LdaTrainConfig};

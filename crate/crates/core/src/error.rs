use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("empty input: {0}")]
    EmptyInput(String),

    #[error("missing column `{0}`")]
    MissingColumn(String),

    #[error("duplicate gene id `{0}`")]
    DuplicateGene(String),

    #[error("duplicate feature name `{0}`")]
    DuplicateFeature(String),

    #[error("row {row}, column {column}: cannot parse `{value}` as a category code in 0..=255")]
    BadCell {
        row: usize,
        column: String,
        value: String,
    },

    #[error("row {row}: label `{value}` is not 0 or 1")]
    BadLabel { row: usize, value: String },

    #[error("row {row}: expected {expected} fields, found {found}")]
    RaggedRow {
        row: usize,
        expected: usize,
        found: usize,
    },

    #[error("labels must contain at least one positive and one unlabeled gene ({positives} positives of {total})")]
    SingleClass { positives: usize, total: usize },

    #[error("no genes in common between `{0}` and `{1}`")]
    EmptyIntersection(String, String),

    #[error("gene `{0}` has conflicting labels in the two datasets")]
    LabelConflict(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("fold plan invalid: {0}")]
    FoldPlan(String),

    #[error("model format: {0}")]
    ModelFormat(String),
}

pub type Result<T> = std::result::Result<T, Error>;

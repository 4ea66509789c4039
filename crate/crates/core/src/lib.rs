//! Gene prioritization on binary annotation matrices.
//!
//! The pipeline discretizes a gene × feature matrix into a feature-major byte
//! layout, selects features with greedy minimum-redundancy
//! maximum-relevance ([`mrmr`]), trains a balanced random forest
//! ([`forest`]) and ranks unlabeled genes by out-of-fold probability
//! ([`ranking`]). [`evaluate`] wraps it all in stratified nested
//! cross-validation where every label-dependent step sees only training
//! folds.
//!
//! Numeric code is generic over [`Scalar`] (`f32`/`f64`); the aliases below
//! fix it to `f64`, which is what the command-line tool uses.

pub mod dataset;
pub mod discretize;
pub mod error;
pub mod evaluate;
pub mod forest;
pub mod metrics;
pub mod mi;
pub mod mrmr;
pub mod num;
pub mod ranking;
pub mod seed;
pub mod stats;

pub use dataset::{merge_common, Dataset, Label};
pub use discretize::{discretize, ColumnarMatrix, Discretizer};
pub use error::{Error, Result};
pub use evaluate::{
    nested_cv, select_threshold, CvOptions, EvaluationReport, FoldPlan, SelectionStrategy,
};
pub use forest::{predict_proba, train, ForestConfig, ForestModel};
pub use metrics::{FoldMetrics, Metric};
pub use mi::{batch_relevance, mutual_information, ContingencyTable, Variable};
pub use mrmr::{select, threshold_to_k, SelectionConfig, SelectionResult};
pub use num::Scalar;
pub use ranking::{feature_importance, rank_genes, GeneRanking, ImportanceReport};
pub use stats::{paired_t_test, TTestResult};

pub type Selection = SelectionResult<f64>;
pub type Selection32 = SelectionResult<f32>;
pub type Report = EvaluationReport<f64>;
pub type Report32 = EvaluationReport<f32>;
pub type Ranking = GeneRanking<f64>;
pub type Importance = ImportanceReport<f64>;
pub type TTest = TTestResult<f64>;
pub type Metrics = FoldMetrics<f64>;

//! Filter feature selection built around a conformal ("confidence machine")
//! score: each feature's relevance to the class label is divided by its
//! redundancy with the remaining features, and the resulting nonconformity
//! scores are turned into rank-based p-values.
//!
//! Three baseline scorers (absolute Pearson correlation with the label,
//! Laplacian Score, and first-principal-component loadings) share the same
//! [`FeatureRanking`] output, and the [`eval`] module runs the repeated
//! split / feature-count sweep / k-nearest-neighbour protocol used to compare
//! them.
//!
//! All numerical code is generic over [`Scalar`] (`f32` or `f64`). The
//! `*64` aliases below are what the command-line tool uses.

pub mod dataset;
pub mod error;
pub mod eval;
pub mod linalg;
pub mod scalar;
pub mod scoring;
pub mod stats;

pub use dataset::{
    load_delimited, parse_delimited, stratified_split, DelimitedOptions, LabelColumn, SplitPair,
    Standardization,
};
pub use error::{Error, ErrorKind, Result};
pub use eval::{EvaluationReport, ExperimentConfig};
pub use linalg::{EigenDecomposition, Matrix};
pub use scalar::Scalar;
pub use scoring::{FeatureRanking, FeatureScoreRecord, Method};
pub use stats::CorrelationMatrix;

pub use dataset::Dataset;

pub type Dataset64 = Dataset<f64>;
pub type Dataset32 = Dataset<f32>;
pub type SplitPair64 = SplitPair<f64>;
pub type CorrelationMatrix64 = CorrelationMatrix<f64>;
pub type Matrix64 = Matrix<f64>;
pub type EigenDecomposition64 = EigenDecomposition<f64>;
pub type FeatureRanking64 = FeatureRanking<f64>;
pub type FeatureScoreRecord64 = FeatureScoreRecord<f64>;
pub type Standardization64 = Standardization<f64>;

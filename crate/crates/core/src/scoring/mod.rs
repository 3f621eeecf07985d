//! Feature scorers. Every scorer produces a [`FeatureRanking`]: one record
//! per feature plus a best-first permutation of feature indices.
//!
//! Ordering rules shared by all methods: degenerate (zero-variance) features
//! come last, and equal scores are broken by ascending feature index.

mod confidence;
mod laplacian;
mod pca;

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::stats::correlation_matrix;

pub use confidence::{
    conformal_p_values, nonconformity_scores, rank_confidence_machine, redundancy_scores,
    relevance_scores, NONCONFORMITY_EPSILON,
};
pub use laplacian::{
    laplacian_graph, laplacian_scores, rank_laplacian, Bandwidth, LaplacianParams, NeighborGraph,
};
pub use pca::rank_pca;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    ConfidenceMachine,
    Pearson,
    LaplacianScore,
    Pca,
}

impl Method {
    pub const ALL: [Method; 4] = [
        Method::ConfidenceMachine,
        Method::Pearson,
        Method::LaplacianScore,
        Method::Pca,
    ];

    /// Short name used on the command line and in reports.
    pub fn name(self) -> &'static str {
        match self {
            Method::ConfidenceMachine => "cm",
            Method::Pearson => "pearson",
            Method::LaplacianScore => "laplacian",
            Method::Pca => "pca",
        }
    }

    pub fn direction(self) -> Direction {
        match self {
            Method::LaplacianScore => Direction::Ascending,
            _ => Direction::Descending,
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "cm" | "confidence-machine" => Ok(Method::ConfidenceMachine),
            "pearson" | "per" => Ok(Method::Pearson),
            "laplacian" | "lap" | "laplacian-score" => Ok(Method::LaplacianScore),
            "pca" => Ok(Method::Pca),
            other => Err(Error::InvalidArgument(format!("unknown method {other:?}"))),
        }
    }
}

/// Which way a score improves.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// Larger is better.
    Descending,
    /// Smaller is better.
    Ascending,
}

/// Scores for one feature. The confidence-machine fields are populated only
/// by that method; `baseline_score` only by the others.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FeatureScoreRecord<T> {
    pub feature_index: usize,
    pub feature_name: String,
    pub relevance: Option<T>,
    pub redundancy: Option<T>,
    pub nonconformity: Option<T>,
    pub p_value: Option<T>,
    pub baseline_score: Option<T>,
    pub degenerate: bool,
}

impl<T: Scalar> FeatureScoreRecord<T> {
    fn baseline(data: &Dataset<T>, j: usize, score: T, degenerate: bool) -> Self {
        FeatureScoreRecord {
            feature_index: j,
            feature_name: data.feature_names()[j].clone(),
            relevance: None,
            redundancy: None,
            nonconformity: None,
            p_value: None,
            baseline_score: Some(score),
            degenerate,
        }
    }

    /// The value this feature was ordered by.
    pub fn ranking_score(&self) -> Option<T> {
        self.nonconformity.or(self.baseline_score)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FeatureRanking<T> {
    pub method: Method,
    /// Indexed by feature.
    pub records: Vec<FeatureScoreRecord<T>>,
    /// Feature indices, best first.
    pub order: Vec<usize>,
}

impl<T: Scalar> FeatureRanking<T> {
    pub fn n_features(&self) -> usize {
        self.records.len()
    }

    /// Records in rank order.
    pub fn ranked_records(&self) -> impl Iterator<Item = &FeatureScoreRecord<T>> {
        self.order.iter().map(move |&j| &self.records[j])
    }
}

/// Best-first permutation of `scores`: degenerate entries last, equal
/// scores by ascending index.
pub fn order_by_scores<T: Scalar>(
    scores: &[T],
    degenerate: &[bool],
    direction: Direction,
) -> Vec<usize> {
    assert_eq!(scores.len(), degenerate.len());
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&i, &j| {
        degenerate[i]
            .cmp(&degenerate[j])
            .then_with(|| {
                if degenerate[i] {
                    return Ordering::Equal;
                }
                let c = scores[i].partial_cmp(&scores[j]).unwrap_or(Ordering::Equal);
                match direction {
                    Direction::Descending => c.reverse(),
                    Direction::Ascending => c,
                }
            })
            .then(i.cmp(&j))
    });
    order
}

/// Baseline: `|pearson(feature, label)|`, larger is better.
pub fn rank_pearson<T: Scalar>(data: &Dataset<T>) -> FeatureRanking<T> {
    let corr = correlation_matrix(data, true);
    let with_label = corr.with_label.expect("label correlations requested");
    let (scores, degenerate) = relevance_scores(&with_label);
    let records = (0..data.n_features())
        .map(|j| FeatureScoreRecord::baseline(data, j, scores[j], degenerate[j]))
        .collect();
    FeatureRanking {
        method: Method::Pearson,
        records,
        order: order_by_scores(&scores, &degenerate, Direction::Descending),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct RankOptions {
    pub laplacian: LaplacianParams,
}

pub fn rank<T: Scalar>(
    method: Method,
    data: &Dataset<T>,
    options: &RankOptions,
) -> Result<FeatureRanking<T>> {
    match method {
        Method::ConfidenceMachine => Ok(rank_confidence_machine(data)),
        Method::Pearson => Ok(rank_pearson(data)),
        Method::LaplacianScore => rank_laplacian(data, &options.laplacian),
        Method::Pca => rank_pca(data),
    }
}

/// The `m` best features of `ranking`.
pub fn select_top<T: Scalar>(ranking: &FeatureRanking<T>, m: usize) -> Result<Vec<usize>> {
    if m == 0 || m > ranking.n_features() {
        return Err(Error::InvalidArgument(format!(
            "cannot select {m} of {} features",
            ranking.n_features()
        )));
    }
    Ok(ranking.order[..m].to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn method_names_round_trip() {
        for m in Method::ALL {
            assert_eq!(m.name().parse::<Method>().unwrap(), m);
        }
        assert!("svm".parse::<Method>().is_err());
    }

    #[test]
    fn order_handles_ties_and_degenerates() {
        let s = [0.9, 0.2];
        assert_eq!(
            order_by_scores(&s, &[false, false], Direction::Descending),
            vec![0, 1]
        );
        assert_eq!(
            order_by_scores(&s, &[false, false], Direction::Ascending),
            vec![1, 0]
        );
        let s = [1.0, 5.0, 1.0, 9.0];
        assert_eq!(
            order_by_scores(&s, &[false, false, false, true], Direction::Descending),
            vec![1, 0, 2, 3]
        );
        assert_eq!(
            order_by_scores(&[0.0; 3], &[true; 3], Direction::Ascending),
            vec![0, 1, 2]
        );
    }

    #[test]
    fn pearson_baseline() {
        let label_copy = [0.0, 1.0, 0.0, 1.0, 1.0];
        let noise = [0.3, 0.1, 0.2, 0.5, 0.0];
        let rows: Vec<Vec<f64>> = (0..5).map(|i| vec![noise[i], label_copy[i]]).collect();
        let d = Dataset::from_rows(&rows, vec![0, 1, 0, 1, 1]).unwrap();
        let r = rank_pearson(&d);
        assert_eq!(r.order, vec![1, 0]);
        assert!((r.records[1].baseline_score.unwrap() - 1.0).abs() < 1e-12);
        assert!(r.records[1].nonconformity.is_none());
    }

    #[test]
    fn pearson_all_constant_is_identity() {
        let rows = vec![vec![1.0, 2.0, 3.0]; 4];
        let d = Dataset::<f64>::from_rows(&rows, vec![0, 1, 0, 1]).unwrap();
        let r = rank_pearson(&d);
        assert_eq!(r.order, vec![0, 1, 2]);
        assert!(r.records.iter().all(|rec| rec.degenerate));
    }

    #[test]
    fn select_top_bounds() {
        let rows: Vec<Vec<f64>> = (0..6)
            .map(|i| vec![i as f64, (i * i) as f64 % 5.0, 1.0])
            .collect();
        let d = Dataset::from_rows(&rows, vec![0, 0, 0, 1, 1, 1]).unwrap();
        let r = rank_confidence_machine(&d);
        assert_eq!(select_top(&r, 3).unwrap(), r.order);
        assert_eq!(select_top(&r, 1).unwrap(), vec![r.order[0]]);
        assert!(select_top(&r, 0).is_err());
        assert!(select_top(&r, 4).is_err());
    }
}

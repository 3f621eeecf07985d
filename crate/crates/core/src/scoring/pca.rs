//! PCA-loading baseline: features ranked by the magnitude of their loading
//! on the leading eigenvector of the feature correlation matrix.

use crate::dataset::Dataset;
use crate::error::Result;
use crate::linalg::{eigen_symmetric, Matrix};
use crate::scalar::Scalar;
use crate::stats::correlation_matrix;

use super::{order_by_scores, Direction, FeatureRanking, FeatureScoreRecord, Method};

pub fn rank_pca<T: Scalar>(data: &Dataset<T>) -> Result<FeatureRanking<T>> {
    let d = data.n_features();
    let corr = correlation_matrix(data, false).matrix;
    let mut a = Matrix::zeros(d, d);
    for i in 0..d {
        for j in 0..d {
            a[(i, j)] = corr.get(i, j).unwrap_or_else(T::zero);
        }
        a[(i, i)] = T::one();
    }
    let degenerate: Vec<bool> = (0..d).map(|i| corr.is_degenerate(i)).collect();
    let scores: Vec<T> = if d == 0 {
        Vec::new()
    } else {
        let eig = eigen_symmetric(&a)?;
        eig.eigenvector(0).into_iter().map(T::abs).collect()
    };
    let records = (0..d)
        .map(|j| FeatureScoreRecord::baseline(data, j, scores[j], degenerate[j]))
        .collect();
    Ok(FeatureRanking {
        method: Method::Pca,
        records,
        order: order_by_scores(&scores, &degenerate, Direction::Descending),
    })
}

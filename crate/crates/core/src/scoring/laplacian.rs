//! Laplacian Score on a k-nearest-neighbour heat-kernel graph.
//!
//! Edges join `i` and `j` when either is among the other's `k` nearest
//! neighbours, weighted `exp(-||x_i - x_j||^2 / t)`. For a feature `f` with
//! degree-weighted mean removed (`g = f - (f'D1 / 1'D1) 1`), the score is
//! `g'Lg / g'Dg` with `L = D - W`. Smaller scores mean the feature varies
//! less across graph edges relative to its overall spread.

use serde::Serialize;

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::linalg::{pairwise_sq_distances, Matrix};
use crate::scalar::Scalar;

use super::{order_by_scores, Direction, FeatureRanking, FeatureScoreRecord, Method};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Bandwidth {
    /// Mean of the nonzero squared distances over all directed
    /// nearest-neighbour pairs (1 if there are none).
    Auto,
    Fixed(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LaplacianParams {
    pub k_neighbors: usize,
    pub bandwidth: Bandwidth,
}

impl Default for LaplacianParams {
    fn default() -> Self {
        LaplacianParams {
            k_neighbors: 5,
            bandwidth: Bandwidth::Auto,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NeighborGraph<T> {
    pub weights: Matrix<T>,
    pub degrees: Vec<T>,
    pub bandwidth: T,
}

impl<T: Scalar> NeighborGraph<T> {
    /// `D - W`.
    pub fn laplacian(&self) -> Matrix<T> {
        let n = self.degrees.len();
        let mut l = Matrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                l[(i, j)] = -self.weights[(i, j)];
            }
            l[(i, i)] = l[(i, i)] + self.degrees[i];
        }
        l
    }
}

/// Indices of the `k` nearest other samples of each sample; distance ties go
/// to the lower index.
fn nearest_neighbors<T: Scalar>(dist: &Matrix<T>, k: usize) -> Vec<Vec<usize>> {
    let n = dist.rows();
    (0..n)
        .map(|i| {
            let mut others: Vec<usize> = (0..n).filter(|&j| j != i).collect();
            others.sort_by(|&a, &b| {
                dist[(i, a)]
                    .partial_cmp(&dist[(i, b)])
                    .unwrap_or(std::cmp::Ordering::Equal)
                    .then(a.cmp(&b))
            });
            others.truncate(k);
            others
        })
        .collect()
}

pub fn laplacian_graph<T: Scalar>(
    data: &Dataset<T>,
    params: &LaplacianParams,
) -> Result<NeighborGraph<T>> {
    let n = data.n_samples();
    let k = params.k_neighbors;
    if k == 0 || k >= n {
        return Err(Error::InvalidArgument(format!(
            "laplacian score needs 1 <= k_neighbors < n_samples, got k = {k}, n = {n}"
        )));
    }
    let dist = pairwise_sq_distances(data);
    let neighbors = nearest_neighbors(&dist, k);

    let bandwidth = match params.bandwidth {
        Bandwidth::Fixed(t) if t > 0.0 && t.is_finite() => T::of(t),
        Bandwidth::Fixed(t) => {
            return Err(Error::InvalidArgument(format!(
                "bandwidth must be positive and finite, got {t}"
            )))
        }
        Bandwidth::Auto => {
            let nonzero: Vec<T> = neighbors
                .iter()
                .enumerate()
                .flat_map(|(i, nb)| nb.iter().map(move |&j| (i, j)))
                .map(|(i, j)| dist[(i, j)])
                .filter(|&d| d > T::zero())
                .collect();
            if nonzero.is_empty() {
                T::one()
            } else {
                nonzero.iter().copied().sum::<T>() / T::of_usize(nonzero.len())
            }
        }
    };

    let mut weights = Matrix::zeros(n, n);
    for (i, nb) in neighbors.iter().enumerate() {
        for &j in nb {
            let w = (-dist[(i, j)] / bandwidth).exp();
            weights[(i, j)] = w;
            weights[(j, i)] = w;
        }
    }
    let degrees = (0..n)
        .map(|i| (0..n).map(|j| weights[(i, j)]).sum())
        .collect();
    Ok(NeighborGraph {
        weights,
        degrees,
        bandwidth,
    })
}

/// Per-feature Laplacian scores and degenerate flags (zero weighted variance).
pub fn laplacian_scores<T: Scalar>(
    data: &Dataset<T>,
    params: &LaplacianParams,
) -> Result<(Vec<T>, Vec<bool>)> {
    let graph = laplacian_graph(data, params)?;
    let n = data.n_samples();
    let total_degree: T = graph.degrees.iter().copied().sum();
    let w = &graph.weights;
    let mut scores = Vec::with_capacity(data.n_features());
    let mut degenerate = Vec::with_capacity(data.n_features());
    for f in data.columns() {
        let mean = f
            .iter()
            .zip(&graph.degrees)
            .map(|(&v, &d)| v * d)
            .sum::<T>()
            / total_degree;
        let spread: T = f
            .iter()
            .zip(&graph.degrees)
            .map(|(&v, &d)| d * (v - mean) * (v - mean))
            .sum();
        let scale: T = f.iter().zip(&graph.degrees).map(|(&v, &d)| d * v * v).sum();
        // g'Lg = sum over edges of w_ij (f_i - f_j)^2; the mean shift cancels.
        let mut roughness = T::zero();
        for i in 0..n {
            for j in (i + 1)..n {
                let wij = w[(i, j)];
                if wij > T::zero() {
                    let diff = f[i] - f[j];
                    roughness = roughness + wij * diff * diff;
                }
            }
        }
        let flat = total_degree <= T::zero()
            || spread <= T::zero()
            || spread <= T::epsilon() * T::of(64.0) * scale;
        degenerate.push(flat);
        scores.push(if flat { T::zero() } else { roughness / spread });
    }
    Ok((scores, degenerate))
}

/// Baseline ranking by Laplacian Score, smallest first.
pub fn rank_laplacian<T: Scalar>(
    data: &Dataset<T>,
    params: &LaplacianParams,
) -> Result<FeatureRanking<T>> {
    let (scores, degenerate) = laplacian_scores(data, params)?;
    let records = (0..data.n_features())
        .map(|j| FeatureScoreRecord::baseline(data, j, scores[j], degenerate[j]))
        .collect();
    Ok(FeatureRanking {
        method: Method::LaplacianScore,
        records,
        order: order_by_scores(&scores, &degenerate, Direction::Ascending),
    })
}

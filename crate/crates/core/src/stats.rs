//! Pearson correlation and the pairwise correlation table shared by the scorers.

use serde::Serialize;

use crate::dataset::Dataset;
use crate::scalar::Scalar;

/// Pearson correlation of `x` and `y`, or `None` when either has zero
/// variance (or fewer than two samples).
///
/// Single pass over the data using running co-moments, population
/// normalization. The result is clamped to `[-1, 1]`.
///
/// Panics if the slices differ in length.
pub fn pearson<T: Scalar>(x: &[T], y: &[T]) -> Option<T> {
    assert_eq!(x.len(), y.len(), "pearson: length mismatch");
    let mut mean_x = T::zero();
    let mut mean_y = T::zero();
    let mut m2_x = T::zero();
    let mut m2_y = T::zero();
    let mut co = T::zero();
    for (k, (&a, &b)) in x.iter().zip(y).enumerate() {
        let n = T::of_usize(k + 1);
        let dx = a - mean_x;
        let dy = b - mean_y;
        mean_x = mean_x + dx / n;
        mean_y = mean_y + dy / n;
        m2_x = m2_x + dx * (a - mean_x);
        m2_y = m2_y + dy * (b - mean_y);
        co = co + dx * (b - mean_y);
    }
    if m2_x <= T::zero() || m2_y <= T::zero() {
        return None;
    }
    let r = co / (m2_x.sqrt() * m2_y.sqrt());
    Some(r.max(-T::one()).min(T::one()))
}

/// Symmetric `d x d` table of feature-feature correlations. Entries involving
/// a zero-variance feature are undefined and carried in a separate mask.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorrelationMatrix<T> {
    dim: usize,
    values: Vec<T>,
    defined: Vec<bool>,
}

impl<T: Scalar> CorrelationMatrix<T> {
    /// Builds from a full table; entries that are `None` become undefined.
    /// Panics if the table is not square.
    pub fn from_entries(entries: Vec<Vec<Option<T>>>) -> Self {
        let dim = entries.len();
        let mut values = Vec::with_capacity(dim * dim);
        let mut defined = Vec::with_capacity(dim * dim);
        for row in &entries {
            assert_eq!(row.len(), dim, "correlation table must be square");
            for e in row {
                values.push(e.unwrap_or_else(T::nan));
                defined.push(e.is_some());
            }
        }
        CorrelationMatrix {
            dim,
            values,
            defined,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> Option<T> {
        let k = i * self.dim + j;
        self.defined[k].then_some(self.values[k])
    }

    pub fn is_defined(&self, i: usize, j: usize) -> bool {
        self.defined[i * self.dim + j]
    }

    /// Raw row-major values; undefined entries hold NaN.
    pub fn values(&self) -> &[T] {
        &self.values
    }

    /// True when feature `i` has zero variance.
    pub fn is_degenerate(&self, i: usize) -> bool {
        !self.is_defined(i, i)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FeatureCorrelations<T> {
    pub matrix: CorrelationMatrix<T>,
    /// Correlation of each feature with the numeric label vector, when requested.
    pub with_label: Option<Vec<Option<T>>>,
}

/// All pairwise feature correlations, optionally with the label correlations.
///
/// Each entry is an independent [`pearson`] call; the diagonal is exactly 1
/// for non-degenerate features and the lower triangle mirrors the upper.
pub fn correlation_matrix<T: Scalar>(
    data: &Dataset<T>,
    include_label: bool,
) -> FeatureCorrelations<T> {
    let d = data.n_features();
    let cols = data.columns();
    let mut entries: Vec<Vec<Option<T>>> = vec![vec![None; d]; d];
    let live: Vec<bool> = cols.iter().map(|c| pearson(c, c).is_some()).collect();
    for i in 0..d {
        if live[i] {
            entries[i][i] = Some(T::one());
        }
        for j in (i + 1)..d {
            let r = if live[i] && live[j] {
                pearson(&cols[i], &cols[j])
            } else {
                None
            };
            entries[i][j] = r;
            entries[j][i] = r;
        }
    }
    let with_label = include_label.then(|| {
        let y = data.label_vector();
        cols.iter().map(|c| pearson(c, &y)).collect()
    });
    FeatureCorrelations {
        matrix: CorrelationMatrix::from_entries(entries),
        with_label,
    }
}

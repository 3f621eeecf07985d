//! The confidence-machine scorer: relevance over redundancy, turned into
//! conformal p-values.

use std::cmp::Ordering;

use crate::dataset::Dataset;
use crate::scalar::Scalar;
use crate::stats::{correlation_matrix, CorrelationMatrix};

use super::{order_by_scores, Direction, FeatureRanking, FeatureScoreRecord, Method};

/// Floor applied to the redundancy denominator.
pub const NONCONFORMITY_EPSILON: f64 = 1e-12;

/// Relevance `|corr(feature, label)|` per feature, with a degenerate flag for
/// features whose correlation is undefined (their relevance is 0).
pub fn relevance_scores<T: Scalar>(corr_with_label: &[Option<T>]) -> (Vec<T>, Vec<bool>) {
    corr_with_label
        .iter()
        .map(|c| match c {
            Some(r) => (r.abs(), false),
            None => (T::zero(), true),
        })
        .unzip()
}

/// Redundancy: sum of `|corr(i, j)|` over the other features `j != i`.
/// Undefined correlations contribute 0.
pub fn redundancy_scores<T: Scalar>(corr: &CorrelationMatrix<T>) -> Vec<T> {
    let d = corr.dim();
    (0..d)
        .map(|i| {
            (0..d)
                .filter(|&j| j != i)
                .filter_map(|j| corr.get(i, j))
                .map(|r| r.abs())
                .sum()
        })
        .collect()
}

/// `relevance / max(redundancy, 1e-12)`.
pub fn nonconformity_scores<T: Scalar>(relevance: &[T], redundancy: &[T]) -> Vec<T> {
    assert_eq!(
        relevance.len(),
        redundancy.len(),
        "score vectors differ in length"
    );
    let eps = T::of(NONCONFORMITY_EPSILON);
    relevance
        .iter()
        .zip(redundancy)
        .map(|(&pl, &ps)| pl / ps.max(eps))
        .collect()
}

/// For each score, the fraction of scores strictly greater than it.
///
/// The largest score gets 0 and ties share a value.
pub fn conformal_p_values<T: Scalar>(alpha: &[T]) -> Vec<T> {
    let n = alpha.len();
    let mut sorted = alpha.to_vec();
    sorted.sort_by(|a, b| b.partial_cmp(a).unwrap_or(Ordering::Equal));
    let nf = T::of_usize(n);
    alpha
        .iter()
        .map(|&a| {
            let greater = sorted.partition_point(|&s| s > a);
            T::of_usize(greater) / nf
        })
        .collect()
}

/// Full confidence-machine pipeline on `data`.
///
/// Features are ordered by nonconformity descending, which is the same as
/// p-value ascending under the index tie-break.
pub fn rank_confidence_machine<T: Scalar>(data: &Dataset<T>) -> FeatureRanking<T> {
    let corr = correlation_matrix(data, true);
    let with_label = corr
        .with_label
        .as_deref()
        .expect("label correlations requested");
    let (relevance, degenerate) = relevance_scores(with_label);
    let redundancy = redundancy_scores(&corr.matrix);
    let alpha = nonconformity_scores(&relevance, &redundancy);
    let p = conformal_p_values(&alpha);
    let records = (0..data.n_features())
        .map(|j| FeatureScoreRecord {
            feature_index: j,
            feature_name: data.feature_names()[j].clone(),
            relevance: Some(relevance[j]),
            redundancy: Some(redundancy[j]),
            nonconformity: Some(alpha[j]),
            p_value: Some(p[j]),
            baseline_score: None,
            degenerate: degenerate[j],
        })
        .collect();
    FeatureRanking {
        method: Method::ConfidenceMachine,
        records,
        order: order_by_scores(&alpha, &degenerate, Direction::Descending),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn corr3(r01: f64, r02: f64, r12: f64) -> CorrelationMatrix<f64> {
        CorrelationMatrix::from_entries(vec![
            vec![Some(1.0), Some(r01), Some(r02)],
            vec![Some(r01), Some(1.0), Some(r12)],
            vec![Some(r02), Some(r12), Some(1.0)],
        ])
    }

    #[test]
    fn relevance_uses_magnitude() {
        let (pl, deg) = relevance_scores(&[Some(1.0), Some(-1.0), None, Some(-0.25)]);
        assert_eq!(pl, vec![1.0, 1.0, 0.0, 0.25]);
        assert_eq!(deg, vec![false, false, true, false]);
    }

    #[test]
    fn redundancy_hand_sums() {
        let two = CorrelationMatrix::from_entries(vec![
            vec![Some(1.0), Some(0.5)],
            vec![Some(0.5), Some(1.0)],
        ]);
        assert_eq!(redundancy_scores(&two), vec![0.5, 0.5]);

        // feature 0: |0.1| + |0.2|, feature 1: |0.1| + |0.3|, feature 2: |0.2| + |0.3|
        let ps = redundancy_scores(&corr3(0.1, 0.2, 0.3));
        let expect = [0.1 + 0.2, 0.1 + 0.3, 0.2 + 0.3];
        for (a, b) in ps.iter().zip(expect) {
            assert!((a - b).abs() < 1e-15);
        }
        let ps = redundancy_scores(&corr3(-0.1, 0.2, -0.3));
        assert!((ps[1] - 0.4).abs() < 1e-15);

        assert_eq!(redundancy_scores(&corr3(0.0, 0.0, 0.0)), vec![0.0; 3]);
    }

    #[test]
    fn redundancy_skips_undefined() {
        let c = CorrelationMatrix::from_entries(vec![
            vec![Some(1.0), None, Some(0.4)],
            vec![None, None, None],
            vec![Some(0.4), None, Some(1.0)],
        ]);
        assert_eq!(redundancy_scores(&c), vec![0.4, 0.0, 0.4]);
    }

    #[test]
    fn nonconformity_quotients() {
        assert_eq!(nonconformity_scores(&[0.8], &[0.4]), vec![2.0]);
        assert_eq!(
            nonconformity_scores(&[0.6, 0.3], &[0.0, 0.5]),
            vec![0.6 / 1e-12, 0.6]
        );
        assert_eq!(
            nonconformity_scores(&[0.0; 3], &[0.2, 0.0, 1.0]),
            vec![0.0; 3]
        );
    }

    #[test]
    fn p_values_by_hand() {
        let p = conformal_p_values(&[3.0, 1.0, 2.0]);
        assert_eq!(p, vec![0.0, 2.0 / 3.0, 1.0 / 3.0]);
        assert_eq!(conformal_p_values(&[4.0; 5]), vec![0.0; 5]);
        assert_eq!(conformal_p_values(&[5.0]), vec![0.0]);
        assert_eq!(
            conformal_p_values(&[1.0, 2.0, 2.0, 0.5]),
            vec![0.5, 0.0, 0.0, 0.75]
        );
    }

    #[test]
    fn label_copy_beats_redundant_block() {
        let labels = vec![0, 1, 2, 0, 1, 2, 0, 1];
        let noise = [0.3, -1.1, 0.7, 2.2, -0.4, 0.9, 1.5, -2.0];
        let rows: Vec<Vec<f64>> = (0..8)
            .map(|i| vec![labels[i] as f64, noise[i], noise[i], noise[i]])
            .collect();
        let d = Dataset::from_rows(&rows, labels).unwrap();
        let r = rank_confidence_machine(&d);
        assert_eq!(r.order[0], 0);
        let rec = &r.records[0];
        assert!((rec.relevance.unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(rec.p_value, Some(0.0));
    }

    #[test]
    fn constant_feature_is_degenerate_and_last() {
        let rows: Vec<Vec<f64>> = (0..6)
            .map(|i| vec![3.0, i as f64, ((i * 7) % 4) as f64])
            .collect();
        let d = Dataset::from_rows(&rows, vec![0, 0, 0, 1, 1, 1]).unwrap();
        let r = rank_confidence_machine(&d);
        assert!(r.records[0].degenerate);
        assert_eq!(r.records[0].relevance, Some(0.0));
        assert_eq!(r.records[0].nonconformity, Some(0.0));
        assert_eq!(*r.order.last().unwrap(), 0);
    }

    #[test]
    fn single_feature_gets_zero_p() {
        let d =
            Dataset::<f64>::from_rows(&[vec![1.0], vec![2.0], vec![4.0]], vec![0, 1, 1]).unwrap();
        let r = rank_confidence_machine(&d);
        assert_eq!(r.order, vec![0]);
        assert_eq!(r.records[0].p_value, Some(0.0));
    }
}

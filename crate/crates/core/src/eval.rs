//! Classification-based comparison of scorers: repeated stratified splits,
//! a sweep over the number of selected features, and k-nearest-neighbour
//! accuracy on the held-out half.

use std::cmp::Ordering;

use serde::Serialize;

use crate::dataset::{stratified_split, Dataset, SplitPair, Standardization};
use crate::error::{Error, Result};
use crate::linalg::sq_distance;
use crate::scalar::Scalar;
use crate::scoring::{rank, select_top, FeatureRanking, LaplacianParams, Method, RankOptions};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub repetitions: usize,
    pub train_fraction: f64,
    pub base_seed: u64,
    /// Neighbours used by the KNN classifier.
    pub k_neighbors: usize,
    pub sweep_max_fraction: f64,
    pub lowdim_fraction: f64,
    pub methods: Vec<Method>,
    pub laplacian: LaplacianParams,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            repetitions: 5,
            train_fraction: 0.5,
            base_seed: 1,
            k_neighbors: 5,
            sweep_max_fraction: 0.8,
            lowdim_fraction: 0.4,
            methods: Method::ALL.to_vec(),
            laplacian: LaplacianParams::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidArgument(m));
        if self.repetitions == 0 {
            return bad("repetitions must be at least 1".into());
        }
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return bad(format!(
                "train fraction {} not in (0, 1)",
                self.train_fraction
            ));
        }
        if self.k_neighbors == 0 {
            return bad("k must be at least 1".into());
        }
        if !(self.lowdim_fraction > 0.0
            && self.lowdim_fraction <= self.sweep_max_fraction
            && self.sweep_max_fraction <= 1.0)
        {
            return bad(format!(
                "need 0 < lowdim fraction ({}) <= sweep fraction ({}) <= 1",
                self.lowdim_fraction, self.sweep_max_fraction
            ));
        }
        if self.methods.is_empty() {
            return bad("no methods selected".into());
        }
        Ok(())
    }

    /// Seed of repetition `r`.
    pub fn seed_for(&self, r: usize) -> u64 {
        self.base_seed.wrapping_add(r as u64)
    }

    fn rank_options(&self) -> RankOptions {
        RankOptions {
            laplacian: self.laplacian,
        }
    }
}

/// `max(1, floor(fraction * d))`, capped at `d`.
pub fn feature_count_limit(fraction: f64, n_features: usize) -> usize {
    let m = (fraction * n_features as f64 + 1e-9).floor() as usize;
    m.clamp(1, n_features.max(1))
}

/// Majority vote among the `k` nearest training rows (Euclidean).
///
/// Distance ties go to the lower training index; vote ties go to whichever
/// tied label owns the nearest of the `k` neighbours.
pub fn knn_predict<T: Scalar>(
    train: &Dataset<T>,
    queries: &[Vec<T>],
    k: usize,
) -> Result<Vec<usize>> {
    let n = train.n_samples();
    if n == 0 {
        return Err(Error::InvalidArgument("empty training set".into()));
    }
    if k == 0 || k > n {
        return Err(Error::InvalidArgument(format!(
            "k = {k} must lie in 1..={n} (training size)"
        )));
    }
    let rows = train.rows();
    let labels = train.labels();
    let mut votes = vec![0usize; train.n_classes()];
    let mut by_distance: Vec<(T, usize)> = Vec::with_capacity(n);
    queries
        .iter()
        .map(|q| {
            if q.len() != train.n_features() {
                return Err(Error::InvalidArgument(format!(
                    "query has {} features, training data {}",
                    q.len(),
                    train.n_features()
                )));
            }
            by_distance.clear();
            by_distance.extend(rows.iter().enumerate().map(|(i, r)| (sq_distance(r, q), i)));
            by_distance.sort_by(|a, b| {
                a.0.partial_cmp(&b.0)
                    .unwrap_or(Ordering::Equal)
                    .then(a.1.cmp(&b.1))
            });
            let nearest = &by_distance[..k];
            votes.iter_mut().for_each(|v| *v = 0);
            for &(_, i) in nearest {
                votes[labels[i]] += 1;
            }
            let top = votes.iter().copied().max().unwrap_or(0);
            let winner = nearest
                .iter()
                .map(|&(_, i)| labels[i])
                .find(|&l| votes[l] == top)
                .expect("k >= 1 neighbours");
            Ok(winner)
        })
        .collect()
}

/// Fraction of positions where the two label vectors agree.
pub fn accuracy(predicted: &[usize], actual: &[usize]) -> Result<f64> {
    if predicted.len() != actual.len() || predicted.is_empty() {
        return Err(Error::InvalidArgument(format!(
            "accuracy needs equal, non-zero lengths (got {} and {})",
            predicted.len(),
            actual.len()
        )));
    }
    let hits = predicted.iter().zip(actual).filter(|(a, b)| a == b).count();
    Ok(hits as f64 / predicted.len() as f64)
}

/// Everything computed for one split.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RepetitionOutcome<T> {
    pub seed: u64,
    /// One per configured method, in config order; built from the training half only.
    pub rankings: Vec<FeatureRanking<T>>,
    /// `accuracies[method][m - 1]` for `m` selected features.
    pub accuracies: Vec<Vec<f64>>,
}

/// Ranks on the (standardized) training half and scores the test half for
/// every feature count `1..=floor(sweep_max_fraction * d)`.
pub fn evaluate_split<T: Scalar>(
    split: &SplitPair<T>,
    config: &ExperimentConfig,
) -> Result<RepetitionOutcome<T>> {
    let d = split.train.n_features();
    if d == 0 {
        return Err(Error::InvalidDataset("dataset has no features".into()));
    }
    if split.test.n_samples() == 0 {
        return Err(Error::DegenerateSplit("test half is empty".into()));
    }
    if split.train.n_samples() < config.k_neighbors.max(2) {
        return Err(Error::DegenerateSplit(format!(
            "training half has {} samples, need at least {} for k = {}",
            split.train.n_samples(),
            config.k_neighbors.max(2),
            config.k_neighbors
        )));
    }
    let scaler = Standardization::fit(&split.train)?;
    let train = scaler.apply(&split.train)?;
    let test = scaler.apply(&split.test)?;
    let options = config.rank_options();
    let sweep_max = feature_count_limit(config.sweep_max_fraction, d);

    let mut rankings = Vec::with_capacity(config.methods.len());
    let mut accuracies = Vec::with_capacity(config.methods.len());
    for &method in &config.methods {
        let ranking = rank(method, &train, &options)?;
        let mut curve = Vec::with_capacity(sweep_max);
        for m in 1..=sweep_max {
            let features = select_top(&ranking, m)?;
            let train_m = train.select_features(&features);
            let test_m = test.select_features(&features);
            let predicted = knn_predict(&train_m, &test_m.rows(), config.k_neighbors)?;
            curve.push(accuracy(&predicted, test_m.labels())?);
        }
        rankings.push(ranking);
        accuracies.push(curve);
    }
    Ok(RepetitionOutcome {
        seed: split.seed,
        rankings,
        accuracies,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepPoint {
    pub feature_count: usize,
    pub mean_accuracy: f64,
    /// One per repetition, in repetition order.
    pub accuracies: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MethodCurve {
    pub method: Method,
    pub points: Vec<SweepPoint>,
    pub low_dim_mean: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvaluationReport {
    pub config: ExperimentConfig,
    /// Classifier behind the accuracies, e.g. `"knn"`.
    pub classifier: String,
    pub n_features: usize,
    pub sweep_max: usize,
    pub lowdim_max: usize,
    pub seeds: Vec<u64>,
    pub methods: Vec<MethodCurve>,
}

impl EvaluationReport {
    pub fn curve(&self, method: Method) -> Option<&MethodCurve> {
        self.methods.iter().find(|c| c.method == method)
    }
}

/// Mean of the sweep points with `feature_count` in `1..=upto`; every count
/// must be present.
pub fn low_dim_mean(points: &[SweepPoint], upto: usize) -> Result<f64> {
    if upto == 0 {
        return Err(Error::InvalidArgument(
            "low-dimension range is empty".into(),
        ));
    }
    let mut sum = 0.0;
    for m in 1..=upto {
        let p = points
            .iter()
            .find(|p| p.feature_count == m)
            .ok_or_else(|| {
                Error::InvalidArgument(format!("sweep has no result for {m} features"))
            })?;
        sum += p.mean_accuracy;
    }
    Ok(sum / upto as f64)
}

/// Per-method mean accuracy over feature counts `1..=report.lowdim_max`.
pub fn mean_accuracy_low_dim(report: &EvaluationReport) -> Result<Vec<(Method, f64)>> {
    report
        .methods
        .iter()
        .map(|c| Ok((c.method, low_dim_mean(&c.points, report.lowdim_max)?)))
        .collect()
}

/// Runs the full protocol. Repetition `r` uses seed `base_seed + r`.
pub fn run_sweep<T: Scalar>(
    data: &Dataset<T>,
    config: &ExperimentConfig,
) -> Result<EvaluationReport> {
    config.validate()?;
    let d = data.n_features();
    if d == 0 {
        return Err(Error::InvalidDataset("dataset has no features".into()));
    }
    let sweep_max = feature_count_limit(config.sweep_max_fraction, d);
    let lowdim_max = feature_count_limit(config.lowdim_fraction, d);

    let outcomes = (0..config.repetitions)
        .map(|r| {
            let split = stratified_split(data, config.train_fraction, config.seed_for(r))?;
            evaluate_split(&split, config)
        })
        .collect::<Result<Vec<_>>>()?;

    let methods = config
        .methods
        .iter()
        .enumerate()
        .map(|(mi, &method)| {
            let points: Vec<SweepPoint> = (0..sweep_max)
                .map(|c| {
                    let accuracies: Vec<f64> =
                        outcomes.iter().map(|o| o.accuracies[mi][c]).collect();
                    SweepPoint {
                        feature_count: c + 1,
                        mean_accuracy: accuracies.iter().sum::<f64>() / accuracies.len() as f64,
                        accuracies,
                    }
                })
                .collect();
            let low_dim_mean = low_dim_mean(&points, lowdim_max)?;
            Ok(MethodCurve {
                method,
                points,
                low_dim_mean,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(EvaluationReport {
        config: config.clone(),
        classifier: "knn".into(),
        n_features: d,
        sweep_max,
        lowdim_max,
        seeds: outcomes.iter().map(|o| o.seed).collect(),
        methods,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn planar() -> Dataset<f64> {
        // class 0: (0,0) (1,0) (0,1); class 1: (3,3) (2,3)
        Dataset::from_rows(
            &[
                vec![0.0, 0.0],
                vec![1.0, 0.0],
                vec![0.0, 1.0],
                vec![3.0, 3.0],
                vec![2.0, 3.0],
            ],
            vec![0, 0, 0, 1, 1],
        )
        .unwrap()
    }

    #[test]
    fn knn_single_point_and_coincident_query() {
        let d = planar();
        let single = d.subset_rows(&[3]);
        assert_eq!(
            knn_predict(&single, &[vec![-5.0, 9.0]], 1).unwrap(),
            vec![1]
        );
        assert_eq!(
            knn_predict(&d, &[vec![1.0, 0.0], vec![2.0, 3.0]], 1).unwrap(),
            vec![0, 1]
        );
    }

    #[test]
    fn knn_hand_enumerated_k3() {
        let d = planar();
        // query (2,2): sq dists 8, 5, 5, 2, 1 -> nearest rows 4, 3, 1 -> labels 1, 1, 0
        // query (1,1): sq dists 2, 1, 1, 8, 5 -> rows 1, 2, 0 -> labels 0, 0, 0
        // query (1.5,1.5): 4.5, 2.5, 2.5, 4.5, 2.5 -> rows 1, 2, 4 -> 0, 0, 1
        // query (2.5,2): 10.25, 6.25, 7.25, 1.25, 1.25 -> rows 3, 4, 1 -> 1, 1, 0
        let q = vec![
            vec![2.0, 2.0],
            vec![1.0, 1.0],
            vec![1.5, 1.5],
            vec![2.5, 2.0],
        ];
        assert_eq!(knn_predict(&d, &q, 3).unwrap(), vec![1, 0, 0, 1]);
    }

    #[test]
    fn knn_vote_tie_goes_to_nearest() {
        let d = planar();
        // k=2 at (0.9,2.2): rows 4 (1.85) and 2 (2.25), one vote each, row 4 nearer
        assert_eq!(knn_predict(&d, &[vec![0.9, 2.2]], 2).unwrap(), vec![1]);
        // k=2 at (1,2): rows 2 and 4 both at 2, row 2 wins the distance tie, then the vote tie
        assert_eq!(knn_predict(&d, &[vec![1.0, 2.0]], 2).unwrap(), vec![0]);
        // k=4 at (0.5, 0.5): rows 0,1,2 then 4 -> class 0 majority
        assert_eq!(knn_predict(&d, &[vec![0.5, 0.5]], 4).unwrap(), vec![0]);
    }

    #[test]
    fn knn_rejects_bad_input() {
        let d = planar();
        assert!(knn_predict(&d, &[vec![0.0, 0.0]], 0).is_err());
        assert!(knn_predict(&d, &[vec![0.0, 0.0]], 6).is_err());
        assert!(knn_predict(&d, &[vec![0.0]], 1).is_err());
    }

    #[test]
    fn accuracy_cases() {
        assert_eq!(accuracy(&[1, 2, 0], &[1, 2, 0]).unwrap(), 1.0);
        assert_eq!(accuracy(&[1, 1], &[0, 0]).unwrap(), 0.0);
        assert_eq!(accuracy(&[0, 1, 1, 0], &[0, 1, 0, 0]).unwrap(), 0.75);
        assert!(accuracy(&[0], &[0, 1]).is_err());
        assert!(accuracy(&[], &[]).is_err());
    }

    #[test]
    fn feature_count_rule() {
        assert_eq!(feature_count_limit(0.8, 13), 10);
        assert_eq!(feature_count_limit(0.4, 13), 5);
        assert_eq!(feature_count_limit(0.4, 2), 1);
        assert_eq!(feature_count_limit(0.1, 3), 1);
        assert_eq!(feature_count_limit(0.29, 100), 29);
        assert_eq!(feature_count_limit(1.0, 4), 4);
    }

    #[test]
    fn low_dim_mean_arithmetic() {
        let pts = |v: &[f64]| -> Vec<SweepPoint> {
            v.iter()
                .enumerate()
                .map(|(i, &a)| SweepPoint {
                    feature_count: i + 1,
                    mean_accuracy: a,
                    accuracies: vec![a],
                })
                .collect()
        };
        assert!((low_dim_mean(&pts(&[0.5, 0.7]), 2).unwrap() - 0.6).abs() < 1e-15);
        assert_eq!(low_dim_mean(&pts(&[0.8]), 1).unwrap(), 0.8);
        assert!(low_dim_mean(&pts(&[0.8]), 2).is_err());
    }

    #[test]
    fn config_validation() {
        assert!(ExperimentConfig::default().validate().is_ok());
        let bad = [
            ExperimentConfig {
                repetitions: 0,
                ..Default::default()
            },
            ExperimentConfig {
                lowdim_fraction: 0.9,
                ..Default::default()
            },
            ExperimentConfig {
                sweep_max_fraction: 1.5,
                lowdim_fraction: 0.4,
                ..Default::default()
            },
            ExperimentConfig {
                methods: vec![],
                ..Default::default()
            },
            ExperimentConfig {
                train_fraction: 1.0,
                ..Default::default()
            },
        ];
        for c in bad {
            assert!(c.validate().is_err(), "{c:?}");
        }
    }
}

//! Labelled numeric datasets: delimited-text ingestion, standardization and
//! seeded stratified splitting.

use std::collections::{HashMap, HashSet};
use std::fs::File;
use std::io::Read;
use std::path::Path;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Column-major feature matrix with integer-encoded class labels.
///
/// Labels index into `class_names`. A dataset built through [`Dataset::new`]
/// uses every class at least once; row subsets produced by
/// [`Dataset::subset_rows`] keep the parent's class table and may not.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Dataset<T> {
    columns: Vec<Vec<T>>,
    feature_names: Vec<String>,
    labels: Vec<usize>,
    class_names: Vec<String>,
}

impl<T: Scalar> Dataset<T> {
    pub fn new(
        columns: Vec<Vec<T>>,
        feature_names: Vec<String>,
        labels: Vec<usize>,
        class_names: Vec<String>,
    ) -> Result<Self> {
        let n = labels.len();
        if n == 0 {
            return Err(Error::InvalidDataset("no samples".into()));
        }
        if columns.len() != feature_names.len() {
            return Err(Error::InvalidDataset(format!(
                "{} columns but {} feature names",
                columns.len(),
                feature_names.len()
            )));
        }
        let mut seen = HashSet::new();
        for name in &feature_names {
            if name.is_empty() {
                return Err(Error::InvalidDataset("empty feature name".into()));
            }
            if !seen.insert(name.as_str()) {
                return Err(Error::InvalidDataset(format!(
                    "duplicate feature name {name:?}"
                )));
            }
        }
        for (j, col) in columns.iter().enumerate() {
            if col.len() != n {
                return Err(Error::InvalidDataset(format!(
                    "column {j} has {} values, expected {n}",
                    col.len()
                )));
            }
            if let Some(i) = col.iter().position(|v| !v.is_finite()) {
                return Err(Error::InvalidDataset(format!(
                    "non-finite value at row {i}, column {j}"
                )));
            }
        }
        let mut used = vec![false; class_names.len()];
        for &l in &labels {
            match used.get_mut(l) {
                Some(u) => *u = true,
                None => {
                    return Err(Error::InvalidDataset(format!(
                        "label {l} out of range for {} classes",
                        class_names.len()
                    )))
                }
            }
        }
        if let Some(c) = used.iter().position(|u| !u) {
            return Err(Error::InvalidDataset(format!(
                "class {:?} has no samples",
                class_names[c]
            )));
        }
        Ok(Dataset {
            columns,
            feature_names,
            labels,
            class_names,
        })
    }

    /// Builds a dataset from row-major values. Feature names default to
    /// `f0, f1, ...` and class names to the label codes.
    pub fn from_rows(rows: &[Vec<T>], labels: Vec<usize>) -> Result<Self> {
        let d = rows.first().map_or(0, Vec::len);
        if let Some(i) = rows.iter().position(|r| r.len() != d) {
            return Err(Error::InvalidDataset(format!("row {i} is ragged")));
        }
        if rows.len() != labels.len() {
            return Err(Error::InvalidDataset(format!(
                "{} rows but {} labels",
                rows.len(),
                labels.len()
            )));
        }
        let columns = (0..d)
            .map(|j| rows.iter().map(|r| r[j]).collect())
            .collect();
        let names = (0..d).map(|j| format!("f{j}")).collect();
        let n_classes = labels.iter().max().map_or(0, |m| m + 1);
        let classes = (0..n_classes).map(|c| c.to_string()).collect();
        Self::new(columns, names, labels, classes)
    }

    pub fn n_samples(&self) -> usize {
        self.labels.len()
    }

    pub fn n_features(&self) -> usize {
        self.columns.len()
    }

    pub fn n_classes(&self) -> usize {
        self.class_names.len()
    }

    pub fn columns(&self) -> &[Vec<T>] {
        &self.columns
    }

    pub fn column(&self, j: usize) -> &[T] {
        &self.columns[j]
    }

    pub fn value(&self, row: usize, col: usize) -> T {
        self.columns[col][row]
    }

    pub fn row(&self, i: usize) -> Vec<T> {
        self.columns.iter().map(|c| c[i]).collect()
    }

    pub fn rows(&self) -> Vec<Vec<T>> {
        (0..self.n_samples()).map(|i| self.row(i)).collect()
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn class_names(&self) -> &[String] {
        &self.class_names
    }

    /// The label codes as a numeric vector, the form correlated against
    /// feature columns.
    pub fn label_vector(&self) -> Vec<T> {
        self.labels.iter().map(|&l| T::of_usize(l)).collect()
    }

    /// Rows at `indices`, in the given order, sharing this dataset's class table.
    pub fn subset_rows(&self, indices: &[usize]) -> Self {
        Dataset {
            columns: self
                .columns
                .iter()
                .map(|c| indices.iter().map(|&i| c[i]).collect())
                .collect(),
            feature_names: self.feature_names.clone(),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            class_names: self.class_names.clone(),
        }
    }

    /// Feature columns at `indices`, in the given order.
    pub fn select_features(&self, indices: &[usize]) -> Self {
        Dataset {
            columns: indices.iter().map(|&j| self.columns[j].clone()).collect(),
            feature_names: indices
                .iter()
                .map(|&j| self.feature_names[j].clone())
                .collect(),
            labels: self.labels.clone(),
            class_names: self.class_names.clone(),
        }
    }

    /// Same features with replacement labels (codes must be valid for this
    /// dataset's class table).
    pub fn relabel(&self, labels: Vec<usize>) -> Result<Self> {
        if labels.len() != self.n_samples() {
            return Err(Error::InvalidArgument(format!(
                "{} labels for {} samples",
                labels.len(),
                self.n_samples()
            )));
        }
        if let Some(&l) = labels.iter().find(|&&l| l >= self.n_classes()) {
            return Err(Error::InvalidArgument(format!("label {l} out of range")));
        }
        Ok(Dataset {
            labels,
            ..self.clone()
        })
    }
}

/// Which field holds the class label.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum LabelColumn {
    /// Zero-based field index.
    Index(usize),
    /// Header name; requires a header row.
    Name(String),
    #[default]
    Last,
}

impl FromStr for LabelColumn {
    type Err = std::convert::Infallible;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Ok(if s.eq_ignore_ascii_case("last") {
            LabelColumn::Last
        } else if let Ok(i) = s.parse::<usize>() {
            LabelColumn::Index(i)
        } else {
            LabelColumn::Name(s.to_string())
        })
    }
}

impl std::fmt::Display for LabelColumn {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            LabelColumn::Index(i) => write!(f, "{i}"),
            LabelColumn::Name(n) => write!(f, "{n}"),
            LabelColumn::Last => f.write_str("last"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DelimitedOptions {
    /// Field separator; `None` picks tab if the first line contains one,
    /// comma otherwise.
    pub delimiter: Option<u8>,
    pub has_header: bool,
    pub label: LabelColumn,
}

impl Default for DelimitedOptions {
    fn default() -> Self {
        DelimitedOptions {
            delimiter: None,
            has_header: true,
            label: LabelColumn::Last,
        }
    }
}

pub fn load_delimited<T: Scalar>(
    path: impl AsRef<Path>,
    options: &DelimitedOptions,
) -> Result<Dataset<T>> {
    let path = path.as_ref();
    let io_err = |source| Error::Io {
        path: path.to_path_buf(),
        source,
    };
    let mut bytes = Vec::new();
    File::open(path)
        .and_then(|mut f| f.read_to_end(&mut bytes))
        .map_err(io_err)?;
    parse_delimited(&bytes, options)
}

/// Parses delimited text. Line and column numbers in errors are one-based
/// and refer to the raw input.
pub fn parse_delimited<T: Scalar>(input: &[u8], options: &DelimitedOptions) -> Result<Dataset<T>> {
    let delimiter = options.delimiter.unwrap_or_else(|| {
        let first = input.split(|&b| b == b'\n').next().unwrap_or_default();
        if first.contains(&b'\t') {
            b'\t'
        } else {
            b','
        }
    });
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(delimiter)
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(input);

    let mut records = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| Error::Format {
            line: e.position().map_or(0, |p| p.line() as usize),
            message: e.to_string(),
        })?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        if rec.iter().all(str::is_empty) {
            continue;
        }
        records.push((line, rec));
    }

    let mut records = records.into_iter();
    let header = if options.has_header {
        Some(
            records
                .next()
                .ok_or_else(|| Error::InvalidDataset("input has no header row".into()))?,
        )
    } else {
        None
    };
    let records: Vec<_> = records.collect();
    let width = match (&header, records.first()) {
        (Some((_, h)), _) => h.len(),
        (None, Some((_, r))) => r.len(),
        (None, None) => 0,
    };
    if records.is_empty() {
        return Err(Error::InvalidDataset("input has no data rows".into()));
    }
    if width < 2 {
        return Err(Error::InvalidDataset(
            "need at least one feature column and a label column".into(),
        ));
    }

    let label_idx = match &options.label {
        LabelColumn::Last => width - 1,
        LabelColumn::Index(i) if *i < width => *i,
        LabelColumn::Index(i) => return Err(Error::LabelColumnNotFound(i.to_string())),
        LabelColumn::Name(name) => header
            .as_ref()
            .and_then(|(_, h)| h.iter().position(|f| f == name))
            .ok_or_else(|| Error::LabelColumnNotFound(format!("{name:?}")))?,
    };

    let feature_names: Vec<String> = match &header {
        Some((_, h)) => h
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != label_idx)
            .map(|(_, f)| f.to_string())
            .collect(),
        None => (0..width)
            .filter(|&j| j != label_idx)
            .map(|j| format!("f{j}"))
            .collect(),
    };

    let mut columns: Vec<Vec<T>> = vec![Vec::with_capacity(records.len()); width - 1];
    let mut labels = Vec::with_capacity(records.len());
    let mut class_names: Vec<String> = Vec::new();
    let mut class_codes: HashMap<String, usize> = HashMap::new();
    for (line, rec) in &records {
        if rec.len() != width {
            return Err(Error::Ragged {
                line: *line,
                expected: width,
                found: rec.len(),
            });
        }
        let mut col = 0;
        for (j, field) in rec.iter().enumerate() {
            if j == label_idx {
                let code = *class_codes.entry(field.to_string()).or_insert_with(|| {
                    class_names.push(field.to_string());
                    class_names.len() - 1
                });
                labels.push(code);
                continue;
            }
            let v = field
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .and_then(T::from_f64)
                .filter(|v| v.is_finite())
                .ok_or_else(|| Error::Parse {
                    line: *line,
                    column: j + 1,
                    value: field.to_string(),
                })?;
            columns[col].push(v);
            col += 1;
        }
    }
    if class_names.len() < 2 {
        return Err(Error::SingleClass(class_names.pop().unwrap_or_default()));
    }
    Dataset::new(columns, feature_names, labels, class_names)
}

/// Per-feature affine map to zero mean and unit (population) standard
/// deviation. Zero-variance features map to all-zero columns.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Standardization<T> {
    pub means: Vec<T>,
    pub stds: Vec<T>,
    pub degenerate: Vec<bool>,
}

impl<T: Scalar> Standardization<T> {
    pub fn fit(data: &Dataset<T>) -> Result<Self> {
        let n = data.n_samples();
        if n < 2 {
            return Err(Error::InvalidDataset(
                "standardization needs at least two samples".into(),
            ));
        }
        let nf = T::of_usize(n);
        let mut means = Vec::with_capacity(data.n_features());
        let mut stds = Vec::with_capacity(data.n_features());
        let mut degenerate = Vec::with_capacity(data.n_features());
        for col in data.columns() {
            let mean = col.iter().copied().sum::<T>() / nf;
            let var = col.iter().map(|&x| (x - mean) * (x - mean)).sum::<T>() / nf;
            let std = var.sqrt();
            let scale = col.iter().fold(T::zero(), |m, x| m.max(x.abs()));
            // Constant columns can leave a rounding-level residual variance.
            let flat = std <= T::epsilon() * T::of(16.0) * scale;
            means.push(mean);
            stds.push(if flat { T::zero() } else { std });
            degenerate.push(flat);
        }
        Ok(Standardization {
            means,
            stds,
            degenerate,
        })
    }

    pub fn apply(&self, data: &Dataset<T>) -> Result<Dataset<T>> {
        self.check_width(data)?;
        let columns = data
            .columns()
            .iter()
            .enumerate()
            .map(|(j, col)| {
                if self.degenerate[j] {
                    vec![T::zero(); col.len()]
                } else {
                    col.iter()
                        .map(|&x| (x - self.means[j]) / self.stds[j])
                        .collect()
                }
            })
            .collect();
        Ok(Dataset {
            columns,
            ..data.clone()
        })
    }

    pub fn invert(&self, data: &Dataset<T>) -> Result<Dataset<T>> {
        self.check_width(data)?;
        let columns = data
            .columns()
            .iter()
            .enumerate()
            .map(|(j, col)| {
                col.iter()
                    .map(|&z| z * self.stds[j] + self.means[j])
                    .collect()
            })
            .collect();
        Ok(Dataset {
            columns,
            ..data.clone()
        })
    }

    fn check_width(&self, data: &Dataset<T>) -> Result<()> {
        if data.n_features() != self.means.len() {
            return Err(Error::InvalidArgument(format!(
                "standardization fitted on {} features, applied to {}",
                self.means.len(),
                data.n_features()
            )));
        }
        Ok(())
    }
}

/// Standardizes `data` with its own statistics.
pub fn standardize<T: Scalar>(data: &Dataset<T>) -> Result<(Dataset<T>, Standardization<T>)> {
    let s = Standardization::fit(data)?;
    Ok((s.apply(data)?, s))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SplitPair<T> {
    pub train: Dataset<T>,
    pub test: Dataset<T>,
    /// Source row indices of `train`, ascending.
    pub train_indices: Vec<usize>,
    /// Source row indices of `test`, ascending.
    pub test_indices: Vec<usize>,
    pub seed: u64,
}

/// Number of training rows per class for a stratified split.
///
/// Each class gets `round(train_fraction * m_c)`. Exact halves are rounded
/// up and down alternately (in class order) so tied classes balance out;
/// 178 wine rows at 0.5 give 30 + 35 + 24 = 89. Classes with at least two
/// rows always keep one row on each side.
pub fn stratified_train_counts(class_sizes: &[usize], train_fraction: f64) -> Vec<usize> {
    let mut round_up_next_tie = true;
    class_sizes
        .iter()
        .map(|&m| {
            let exact = train_fraction * m as f64;
            let floor = exact.floor();
            let count = if (exact - floor - 0.5).abs() < 1e-9 {
                let c = if round_up_next_tie {
                    floor + 1.0
                } else {
                    floor
                };
                round_up_next_tie = !round_up_next_tie;
                c
            } else {
                exact.round()
            } as usize;
            if m >= 2 {
                count.clamp(1, m - 1)
            } else {
                count.min(m)
            }
        })
        .collect()
}

/// Seeded stratified split. Identical `(data, train_fraction, seed)` always
/// yields the identical split.
pub fn stratified_split<T: Scalar>(
    data: &Dataset<T>,
    train_fraction: f64,
    seed: u64,
) -> Result<SplitPair<T>> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "train fraction must lie in (0, 1), got {train_fraction}"
        )));
    }
    let mut by_class: Vec<Vec<usize>> = vec![Vec::new(); data.n_classes()];
    for (i, &l) in data.labels().iter().enumerate() {
        by_class[l].push(i);
    }
    let sizes: Vec<usize> = by_class.iter().map(Vec::len).collect();
    let counts = stratified_train_counts(&sizes, train_fraction);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut in_train = vec![false; data.n_samples()];
    for (rows, &count) in by_class.iter_mut().zip(&counts) {
        rows.shuffle(&mut rng);
        for &i in &rows[..count] {
            in_train[i] = true;
        }
    }
    let (train_indices, test_indices): (Vec<usize>, Vec<usize>) =
        (0..data.n_samples()).partition(|&i| in_train[i]);
    Ok(SplitPair {
        train: data.subset_rows(&train_indices),
        test: data.subset_rows(&test_indices),
        train_indices,
        test_indices,
        seed,
    })
}

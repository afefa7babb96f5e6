//! Dataset loading, generation, scaling, balancing, and splitting.
//!
//! Everything here is pure given `(input, seed)`: the same inputs always
//! produce the same outputs, so operations are safe to call concurrently.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// Class identifier attached to each sample.
///
/// Labels are stored as text. The ordering is numeric-aware: labels that
/// parse as finite numbers sort first and compare by value (so `"2" < "10"`),
/// everything else compares as plain text. This is the canonical order used
/// for tie-breaking and for report columns.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Label(String);

impl Label {
    pub fn new(s: impl Into<String>) -> Self {
        Label(s.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    fn numeric(&self) -> Option<f64> {
        self.0.parse::<f64>().ok().filter(|v| v.is_finite())
    }
}

impl Ord for Label {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self.numeric(), other.numeric()) {
            (Some(a), Some(b)) => a.total_cmp(&b).then_with(|| self.0.cmp(&other.0)),
            (Some(_), None) => Ordering::Less,
            (None, Some(_)) => Ordering::Greater,
            (None, None) => self.0.cmp(&other.0),
        }
    }
}

impl PartialOrd for Label {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for Label {
    fn from(s: &str) -> Self {
        Label(s.to_owned())
    }
}

impl From<String> for Label {
    fn from(s: String) -> Self {
        Label(s)
    }
}

/// Labeled numeric feature matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    features: Matrix,
    labels: Vec<Label>,
    feature_names: Vec<String>,
}

impl Dataset {
    pub fn new(features: Matrix, labels: Vec<Label>, feature_names: Vec<String>) -> Result<Self> {
        if features.nrows() != labels.len() {
            return Err(Error::DimensionMismatch {
                expected: features.nrows(),
                found: labels.len(),
            });
        }
        if features.ncols() != feature_names.len() {
            return Err(Error::DimensionMismatch {
                expected: features.ncols(),
                found: feature_names.len(),
            });
        }
        Ok(Dataset {
            features,
            labels,
            feature_names,
        })
    }

    pub fn n_samples(&self) -> usize {
        self.labels.len()
    }

    pub fn n_features(&self) -> usize {
        self.features.ncols()
    }

    pub fn features(&self) -> &Matrix {
        &self.features
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn row(&self, i: usize) -> &[f64] {
        self.features.row(i)
    }

    /// Distinct labels in canonical order.
    pub fn classes(&self) -> Vec<Label> {
        self.class_counts().into_keys().collect()
    }

    pub fn class_counts(&self) -> BTreeMap<Label, usize> {
        let mut counts = BTreeMap::new();
        for l in &self.labels {
            *counts.entry(l.clone()).or_insert(0) += 1;
        }
        counts
    }

    /// Sample indices grouped by class, classes in canonical order.
    pub fn indices_by_class(&self) -> BTreeMap<Label, Vec<usize>> {
        let mut groups: BTreeMap<Label, Vec<usize>> = BTreeMap::new();
        for (i, l) in self.labels.iter().enumerate() {
            groups.entry(l.clone()).or_default().push(i);
        }
        groups
    }

    /// New dataset holding the given rows, in order. Indices may repeat.
    pub fn select(&self, indices: &[usize]) -> Dataset {
        Dataset {
            features: self.features.select_rows(indices),
            labels: indices.iter().map(|&i| self.labels[i].clone()).collect(),
            feature_names: self.feature_names.clone(),
        }
    }
}

/// Which CSV column holds the class label.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum LabelColumn {
    Name(String),
    Index(usize),
    Last,
}

/// Load a labeled dataset from a headered CSV file.
///
/// Every non-label cell must parse as a finite number; the first offending
/// cell is reported with its row (1-based, header excluded) and column name.
pub fn load_csv(path: impl AsRef<Path>, label_column: &LabelColumn) -> Result<Dataset> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path.as_ref())?;
    let headers: Vec<String> = reader.headers()?.iter().map(str::to_owned).collect();
    if headers.is_empty() {
        return Err(Error::MissingLabelColumn(describe_label_column(
            label_column,
        )));
    }

    let label_idx = match label_column {
        LabelColumn::Name(name) => headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::MissingLabelColumn(name.clone()))?,
        LabelColumn::Index(i) => {
            if *i >= headers.len() {
                return Err(Error::MissingLabelColumn(i.to_string()));
            }
            *i
        }
        LabelColumn::Last => headers.len() - 1,
    };

    let feature_names: Vec<String> = headers
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != label_idx)
        .map(|(_, h)| h.clone())
        .collect();
    if feature_names.is_empty() {
        return Err(Error::InvalidParameter(
            "dataset needs at least one feature column".into(),
        ));
    }

    let mut features = Matrix::empty(feature_names.len());
    let mut labels = Vec::new();
    let mut row_buf = Vec::with_capacity(feature_names.len());
    for (row_no, record) in reader.records().enumerate() {
        let record = record?;
        row_buf.clear();
        for (col, cell) in record.iter().enumerate() {
            if col == label_idx {
                labels.push(Label::from(cell));
                continue;
            }
            let value: f64 = cell.trim().parse().unwrap_or(f64::NAN);
            if !value.is_finite() {
                return Err(Error::Parse {
                    row: row_no + 1,
                    column: headers.get(col).cloned().unwrap_or_else(|| col.to_string()),
                    value: cell.to_owned(),
                });
            }
            row_buf.push(value);
        }
        if record.len() != headers.len() {
            return Err(Error::Parse {
                row: row_no + 1,
                column: "<record>".into(),
                value: format!("{} fields, expected {}", record.len(), headers.len()),
            });
        }
        features.push_row(&row_buf)?;
    }

    if labels.len() < 2 {
        return Err(Error::TooFewRows {
            found: labels.len(),
        });
    }
    Dataset::new(features, labels, feature_names)
}

fn describe_label_column(c: &LabelColumn) -> String {
    match c {
        LabelColumn::Name(n) => n.clone(),
        LabelColumn::Index(i) => i.to_string(),
        LabelColumn::Last => "<last>".into(),
    }
}

/// Load a headered CSV of pure numeric columns (no label column), e.g.
/// feature rows to classify.
pub fn load_features_csv(path: impl AsRef<Path>) -> Result<(Matrix, Vec<String>)> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path.as_ref())?;
    let names: Vec<String> = reader.headers()?.iter().map(str::to_owned).collect();
    if names.is_empty() {
        return Err(Error::InvalidParameter(
            "dataset needs at least one feature column".into(),
        ));
    }
    let mut features = Matrix::empty(names.len());
    let mut row_buf = Vec::with_capacity(names.len());
    for (row_no, record) in reader.records().enumerate() {
        let record = record?;
        row_buf.clear();
        for (col, cell) in record.iter().enumerate() {
            let value: f64 = cell.trim().parse().unwrap_or(f64::NAN);
            if !value.is_finite() {
                return Err(Error::Parse {
                    row: row_no + 1,
                    column: names.get(col).cloned().unwrap_or_else(|| col.to_string()),
                    value: cell.to_owned(),
                });
            }
            row_buf.push(value);
        }
        features.push_row(&row_buf)?;
    }
    Ok((features, names))
}

/// Write a dataset as CSV with the label in a trailing column.
pub fn write_csv(data: &Dataset, path: impl AsRef<Path>, label_name: &str) -> Result<()> {
    let mut writer = csv::Writer::from_path(path.as_ref())?;
    let mut header: Vec<&str> = data.feature_names().iter().map(String::as_str).collect();
    header.push(label_name);
    writer.write_record(&header)?;
    let mut record = Vec::with_capacity(header.len());
    for i in 0..data.n_samples() {
        record.clear();
        for v in data.row(i) {
            record.push(v.to_string());
        }
        record.push(data.labels()[i].as_str().to_owned());
        writer.write_record(&record)?;
    }
    writer.flush()?;
    Ok(())
}

/// Per-column min/max captured from training data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingParams {
    mins: Vec<f64>,
    maxs: Vec<f64>,
}

impl ScalingParams {
    /// Identity transform: leaves values untouched.
    pub fn identity(n_features: usize) -> Self {
        ScalingParams {
            mins: vec![0.0; n_features],
            maxs: vec![1.0; n_features],
        }
    }

    pub fn n_features(&self) -> usize {
        self.mins.len()
    }

    /// Scale one feature vector with the stored statistics. Values outside
    /// the training range map outside [0, 1]; nothing is clamped.
    pub fn apply_row(&self, row: &[f64]) -> Result<Vec<f64>> {
        if row.len() != self.mins.len() {
            return Err(Error::DimensionMismatch {
                expected: self.mins.len(),
                found: row.len(),
            });
        }
        Ok(row
            .iter()
            .zip(self.mins.iter().zip(&self.maxs))
            .map(|(&x, (&lo, &hi))| {
                let range = hi - lo;
                if range == 0.0 {
                    0.0
                } else {
                    (x - lo) / range
                }
            })
            .collect())
    }
}

/// Min-max scale every column to [0, 1] and return the parameters so held-out
/// samples can be scaled with the training statistics. Constant columns map
/// to 0.
pub fn minmax_scale(data: &Dataset) -> Result<(Dataset, ScalingParams)> {
    if data.n_samples() == 0 {
        return Err(Error::EmptyDataset);
    }
    let n = data.n_features();
    let mut mins = vec![f64::INFINITY; n];
    let mut maxs = vec![f64::NEG_INFINITY; n];
    for row in data.features().rows() {
        for (j, &v) in row.iter().enumerate() {
            mins[j] = mins[j].min(v);
            maxs[j] = maxs[j].max(v);
        }
    }
    let params = ScalingParams { mins, maxs };
    let scaled = apply_scaling(data, &params)?;
    Ok((scaled, params))
}

/// Scale a dataset with previously captured statistics.
pub fn apply_scaling(data: &Dataset, params: &ScalingParams) -> Result<Dataset> {
    if data.n_features() != params.n_features() {
        return Err(Error::DimensionMismatch {
            expected: params.n_features(),
            found: data.n_features(),
        });
    }
    let mut features = Matrix::empty(data.n_features());
    for i in 0..data.n_samples() {
        features.push_row(&params.apply_row(data.row(i))?)?;
    }
    Dataset::new(
        features,
        data.labels().to_vec(),
        data.feature_names().to_vec(),
    )
}

/// Positions of rows to keep after balancing `labels` by duplication.
///
/// Returns `0..labels.len()` followed by duplicated positions so every class
/// reaches the majority count. Duplicates are drawn uniformly with
/// replacement, per class, in canonical class order.
pub fn oversample_positions(labels: &[Label], seed: u64) -> Result<Vec<usize>> {
    if labels.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let mut groups: BTreeMap<&Label, Vec<usize>> = BTreeMap::new();
    for (i, l) in labels.iter().enumerate() {
        groups.entry(l).or_default().push(i);
    }
    let majority = groups.values().map(Vec::len).max().unwrap_or(0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut positions: Vec<usize> = (0..labels.len()).collect();
    for members in groups.values() {
        for _ in members.len()..majority {
            positions.push(*members.choose(&mut rng).expect("class is nonempty"));
        }
    }
    Ok(positions)
}

/// Balance class counts by duplicating uniformly drawn same-class rows until
/// every class matches the majority count. Deterministic for a fixed seed.
pub fn random_oversample(data: &Dataset, seed: u64) -> Result<Dataset> {
    let positions = oversample_positions(data.labels(), seed)?;
    Ok(data.select(&positions))
}

/// Stratified k-fold partition of sample indices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldAssignment {
    fold_of: Vec<usize>,
    k: usize,
}

impl FoldAssignment {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn fold_of(&self) -> &[usize] {
        &self.fold_of
    }

    /// Indices held out in fold `f`.
    pub fn test_indices(&self, f: usize) -> Vec<usize> {
        (0..self.fold_of.len())
            .filter(|&i| self.fold_of[i] == f)
            .collect()
    }

    /// `(train, test)` index lists for fold `f`.
    pub fn split(&self, f: usize) -> (Vec<usize>, Vec<usize>) {
        let mut train = Vec::new();
        let mut test = Vec::new();
        for (i, &fold) in self.fold_of.iter().enumerate() {
            if fold == f {
                test.push(i);
            } else {
                train.push(i);
            }
        }
        (train, test)
    }
}

/// Stratified k-fold assignment: per-class counts across folds differ by at
/// most one. Deterministic for a fixed seed.
pub fn stratified_kfold(data: &Dataset, k: usize, seed: u64) -> Result<FoldAssignment> {
    if k < 2 {
        return Err(Error::InvalidParameter(format!("k must be >= 2, got {k}")));
    }
    let groups = data.indices_by_class();
    for (label, members) in &groups {
        if members.len() < k {
            return Err(Error::ClassTooSmall {
                label: label.clone(),
                size: members.len(),
                required: k,
            });
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut fold_of = vec![0usize; data.n_samples()];
    for members in groups.values() {
        let mut shuffled = members.clone();
        shuffled.shuffle(&mut rng);
        let start = rng.random_range(0..k);
        for (j, &idx) in shuffled.iter().enumerate() {
            fold_of[idx] = (start + j) % k;
        }
    }
    Ok(FoldAssignment { fold_of, k })
}

/// Single stratified holdout split: `(train, validation)` index lists.
/// Every class contributes at least one sample to each side.
pub fn stratified_holdout(
    labels: &[Label],
    validation_fraction: f64,
    seed: u64,
) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(0.0..1.0).contains(&validation_fraction) || validation_fraction == 0.0 {
        return Err(Error::InvalidParameter(format!(
            "validation fraction must be in (0, 1), got {validation_fraction}"
        )));
    }
    let mut groups: BTreeMap<&Label, Vec<usize>> = BTreeMap::new();
    for (i, l) in labels.iter().enumerate() {
        groups.entry(l).or_default().push(i);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut train = Vec::new();
    let mut validation = Vec::new();
    for (label, members) in &groups {
        if members.len() < 2 {
            return Err(Error::ClassTooSmall {
                label: (*label).clone(),
                size: members.len(),
                required: 2,
            });
        }
        let mut shuffled = members.clone();
        shuffled.shuffle(&mut rng);
        let n_val = ((members.len() as f64 * validation_fraction).round() as usize)
            .clamp(1, members.len() - 1);
        validation.extend_from_slice(&shuffled[..n_val]);
        train.extend_from_slice(&shuffled[n_val..]);
    }
    train.sort_unstable();
    validation.sort_unstable();
    Ok((train, validation))
}

/// Shape drawn for one generated class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ShapeKind {
    Spiral,
    Star,
}

/// One generated class: its shape and sample count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassShape {
    pub kind: ShapeKind,
    pub samples: usize,
}

// Spiral layout: Archimedean r = a*t over t in [0, 3pi], scaled to unit
// outer radius. Points are spaced uniformly in arc length, skipping the
// innermost 5% of arc where all phase-rotated copies crowd the origin.
const SPIRAL_T_MAX: f64 = 3.0 * std::f64::consts::PI;
const SPIRAL_ARC_SKIP: f64 = 0.05;

// Star layout: class center on a ring, points spread along radial arms.
const STAR_RING_RADIUS: f64 = 0.6;
const STAR_ARMS: usize = 5;
const STAR_ARM_LENGTH: f64 = 0.25;

fn spiral_arc_length(a: f64, t: f64) -> f64 {
    0.5 * a * (t * (1.0 + t * t).sqrt() + t.asinh())
}

fn spiral_t_for_arc(a: f64, target: f64) -> f64 {
    let mut lo = 0.0;
    let mut hi = SPIRAL_T_MAX;
    for _ in 0..64 {
        let mid = 0.5 * (lo + hi);
        if spiral_arc_length(a, mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Generate a 2-feature dataset of spiral and star classes with Gaussian
/// noise of standard deviation `overlap`. Class `c` is rotated by `2πc/C`;
/// labels are `0..C-1`. Deterministic for a fixed seed.
pub fn generate_artificial(shapes: &[ClassShape], overlap: f64, seed: u64) -> Result<Dataset> {
    if shapes.is_empty() {
        return Err(Error::InvalidParameter("shape list is empty".into()));
    }
    if shapes.iter().any(|s| s.samples == 0) {
        return Err(Error::InvalidParameter(
            "every class needs a positive sample count".into(),
        ));
    }
    if !(overlap >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "overlap must be >= 0, got {overlap}"
        )));
    }

    let n_classes = shapes.len();
    let spiral_a = 1.0 / SPIRAL_T_MAX;
    let total_arc = spiral_arc_length(spiral_a, SPIRAL_T_MAX);
    let arc_lo = SPIRAL_ARC_SKIP * total_arc;

    let noise = if overlap > 0.0 {
        Some(Normal::new(0.0, overlap).map_err(|e| Error::InvalidParameter(e.to_string()))?)
    } else {
        None
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut features = Matrix::empty(2);
    let mut labels = Vec::new();
    for (c, shape) in shapes.iter().enumerate() {
        let phase = 2.0 * std::f64::consts::PI * c as f64 / n_classes as f64;
        let label = Label::from(c.to_string());
        for i in 0..shape.samples {
            let (mut x, mut y) = match shape.kind {
                ShapeKind::Spiral => {
                    let s = arc_lo
                        + (total_arc - arc_lo) * (i as f64 + 0.5) / shape.samples as f64;
                    let t = spiral_t_for_arc(spiral_a, s);
                    let r = spiral_a * t;
                    ((t + phase).cos() * r, (t + phase).sin() * r)
                }
                ShapeKind::Star => {
                    let arm = i % STAR_ARMS;
                    let step = i / STAR_ARMS;
                    let per_arm = shape.samples.div_ceil(STAR_ARMS);
                    let frac = (step as f64 + 0.5) / per_arm as f64;
                    let arm_angle =
                        phase + 2.0 * std::f64::consts::PI * arm as f64 / STAR_ARMS as f64;
                    let cx = STAR_RING_RADIUS * phase.cos();
                    let cy = STAR_RING_RADIUS * phase.sin();
                    (
                        cx + STAR_ARM_LENGTH * frac * arm_angle.cos(),
                        cy + STAR_ARM_LENGTH * frac * arm_angle.sin(),
                    )
                }
            };
            if let Some(dist) = &noise {
                x += dist.sample(&mut rng);
                y += dist.sample(&mut rng);
            }
            features.push_row(&[x, y])?;
            labels.push(label.clone());
        }
    }
    Dataset::new(features, labels, vec!["x".into(), "y".into()])
}

//! Fit one class network per label and classify by minimum insertion delta.
//!
//! A fitted model is immutable; prediction is read-only and safe to call
//! from many threads.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{apply_scaling, minmax_scale, Dataset, Label, ScalingParams};
use crate::error::{Error, Result};
use crate::graph::{build_network, insertion_delta, ClassNetwork, FeatureWeights};

/// One class network per label, plus the preprocessing that produced them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FittedModel {
    networks: BTreeMap<Label, ClassNetwork>,
    scaling: ScalingParams,
    weights: FeatureWeights,
    theta: f64,
}

/// Predicted label plus the per-class insertion deltas behind it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub label: Label,
    pub deltas: BTreeMap<Label, f64>,
}

/// Classification quality summary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub accuracy: f64,
    /// Unweighted mean of per-class precision over all observed classes.
    pub macro_precision: f64,
    pub per_class_precision: BTreeMap<Label, f64>,
    /// Confusion counts: truth label -> predicted label -> count.
    pub confusion: BTreeMap<Label, BTreeMap<Label, usize>>,
}

const MODEL_FORMAT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct ModelFile {
    version: u32,
    model: FittedModel,
}

impl FittedModel {
    /// Min-max scale the training data, then build one pruned network per
    /// class from that class's samples only. Classes are independent: no
    /// cross-class edges exist.
    pub fn fit(train: &Dataset, weights: &FeatureWeights, theta: f64) -> Result<Self> {
        Self::fit_impl(train, weights, theta, true)
    }

    /// Like [`FittedModel::fit`] but without scaling; stored scaling params
    /// are the identity.
    pub fn fit_unscaled(train: &Dataset, weights: &FeatureWeights, theta: f64) -> Result<Self> {
        Self::fit_impl(train, weights, theta, false)
    }

    fn fit_impl(train: &Dataset, weights: &FeatureWeights, theta: f64, scale: bool) -> Result<Self> {
        if train.n_samples() == 0 {
            return Err(Error::EmptyDataset);
        }
        if weights.len() != train.n_features() {
            return Err(Error::DimensionMismatch {
                expected: train.n_features(),
                found: weights.len(),
            });
        }
        let (scaled, scaling) = if scale {
            minmax_scale(train)?
        } else {
            let params = ScalingParams::identity(train.n_features());
            (apply_scaling(train, &params)?, params)
        };
        let groups = scaled.indices_by_class();
        if groups.len() < 2 {
            return Err(Error::SingleClass);
        }
        let networks: BTreeMap<Label, ClassNetwork> = groups
            .into_iter()
            .collect::<Vec<_>>()
            .into_par_iter()
            .map(|(label, indices)| {
                let points = scaled.features().select_rows(&indices);
                build_network(points, weights, theta).map(|net| (label, net))
            })
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .collect();
        Ok(FittedModel {
            networks,
            scaling,
            weights: weights.clone(),
            theta,
        })
    }

    pub fn networks(&self) -> &BTreeMap<Label, ClassNetwork> {
        &self.networks
    }

    pub fn scaling(&self) -> &ScalingParams {
        &self.scaling
    }

    pub fn weights(&self) -> &FeatureWeights {
        &self.weights
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn n_features(&self) -> usize {
        self.weights.len()
    }

    /// Classes the model was trained on, in canonical order.
    pub fn classes(&self) -> Vec<Label> {
        self.networks.keys().cloned().collect()
    }

    /// Scale `x` with the training statistics, compute the insertion delta
    /// against every class network, and return the class with the smallest
    /// delta. Ties go to the smaller label in canonical order.
    pub fn predict_one(&self, x: &[f64]) -> Result<Prediction> {
        if x.len() != self.n_features() {
            return Err(Error::DimensionMismatch {
                expected: self.n_features(),
                found: x.len(),
            });
        }
        let scaled = self.scaling.apply_row(x)?;
        let mut deltas = BTreeMap::new();
        let mut best: Option<(&Label, f64)> = None;
        for (label, net) in &self.networks {
            let delta = insertion_delta(net, &scaled, &self.weights)?;
            deltas.insert(label.clone(), delta);
            let better = match best {
                None => true,
                Some((_, best_delta)) => delta < best_delta,
            };
            if better {
                best = Some((label, delta));
            }
        }
        let (label, _) = best.expect("model has at least two networks");
        Ok(Prediction {
            label: label.clone(),
            deltas,
        })
    }

    /// Elementwise [`FittedModel::predict_one`] over every row, in order.
    pub fn predict_batch(&self, test: &Dataset) -> Result<Vec<Prediction>> {
        if test.n_features() != self.n_features() {
            return Err(Error::DimensionMismatch {
                expected: self.n_features(),
                found: test.n_features(),
            });
        }
        (0..test.n_samples())
            .into_par_iter()
            .map(|i| self.predict_one(test.row(i)))
            .collect()
    }

    /// Write the model as a versioned JSON container.
    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let file = ModelFile {
            version: MODEL_FORMAT_VERSION,
            model: self.clone(),
        };
        fs::write(path, serde_json::to_string_pretty(&file)?)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let file: ModelFile = serde_json::from_str(&fs::read_to_string(path)?)?;
        if file.version != MODEL_FORMAT_VERSION {
            return Err(Error::ModelFormat(format!(
                "unsupported model format version {}, expected {}",
                file.version, MODEL_FORMAT_VERSION
            )));
        }
        let model = file.model;
        if model.networks.len() < 2 {
            return Err(Error::ModelFormat(
                "model needs at least two class networks".into(),
            ));
        }
        for net in model.networks.values() {
            if net.dim() != model.weights.len() {
                return Err(Error::ModelFormat(
                    "network dimension disagrees with feature weights".into(),
                ));
            }
        }
        if model.scaling.n_features() != model.weights.len() {
            return Err(Error::ModelFormat(
                "scaling dimension disagrees with feature weights".into(),
            ));
        }
        Ok(model)
    }
}

/// Accuracy, per-class precision, macro precision, and confusion counts.
///
/// Precision of a class never predicted is 0; the macro average runs over
/// the union of truth and predicted labels.
pub fn evaluate(predictions: &[Prediction], truth: &[Label]) -> Result<Metrics> {
    if predictions.len() != truth.len() {
        return Err(Error::DimensionMismatch {
            expected: truth.len(),
            found: predictions.len(),
        });
    }
    if predictions.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let mut classes: BTreeSet<Label> = truth.iter().cloned().collect();
    classes.extend(predictions.iter().map(|p| p.label.clone()));

    let mut correct = 0usize;
    let mut confusion: BTreeMap<Label, BTreeMap<Label, usize>> = BTreeMap::new();
    for (pred, t) in predictions.iter().zip(truth) {
        if pred.label == *t {
            correct += 1;
        }
        *confusion
            .entry(t.clone())
            .or_default()
            .entry(pred.label.clone())
            .or_insert(0) += 1;
    }

    let mut per_class_precision = BTreeMap::new();
    for class in &classes {
        let predicted_positives = predictions.iter().filter(|p| p.label == *class).count();
        let true_positives = confusion
            .get(class)
            .and_then(|row| row.get(class))
            .copied()
            .unwrap_or(0);
        let precision = if predicted_positives == 0 {
            0.0
        } else {
            true_positives as f64 / predicted_positives as f64
        };
        per_class_precision.insert(class.clone(), precision);
    }
    let macro_precision =
        per_class_precision.values().sum::<f64>() / per_class_precision.len() as f64;

    Ok(Metrics {
        accuracy: correct as f64 / truth.len() as f64,
        macro_precision,
        per_class_precision,
        confusion,
    })
}

//! Cross-validated experiments and machine-readable reports.
//!
//! A run preprocesses each training fold (scaling, optional oversampling),
//! optionally searches feature weights on a nested holdout carved from the
//! fold, fits, scores the held-out fold, and aggregates. Folds execute in
//! parallel; the report is assembled by fold index, so output does not
//! depend on completion order. Everything except wall times is
//! deterministic for a fixed seed.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classifier::{evaluate, FittedModel};
use crate::data::{
    generate_artificial, load_csv, minmax_scale, oversample_positions, stratified_holdout,
    stratified_kfold, ClassShape, Dataset, Label, LabelColumn, ScalingParams,
};
use crate::error::{Error, Result};
use crate::graph::{weighted_distance, FeatureWeights};
use crate::optimizer::{
    fitness, fitness_unscaled, ga_optimize, ga_optimize_unscaled, grid_search,
    grid_search_unscaled, GAConfig, GridConfig, HistoryPoint,
};

pub const REPORT_SCHEMA_VERSION: u32 = 1;

/// Fraction of a training fold held out for weight optimization.
const NESTED_VALIDATION_FRACTION: f64 = 0.2;

/// Where the experiment's data comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum DataSource {
    Csv {
        path: String,
        label_column: LabelColumn,
    },
    Generated {
        shapes: Vec<ClassShape>,
        overlap: f64,
    },
}

impl DataSource {
    pub fn load(&self, seed: u64) -> Result<Dataset> {
        match self {
            DataSource::Csv { path, label_column } => load_csv(path, label_column),
            DataSource::Generated { shapes, overlap } => {
                generate_artificial(shapes, *overlap, seed)
            }
        }
    }
}

/// Weight-search strategy for an experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum OptimizerChoice {
    None,
    Grid(GridConfig),
    Ga(GAConfig),
}

/// Full experiment description; echoed verbatim into the report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub source: DataSource,
    pub theta: f64,
    pub k: usize,
    pub seed: u64,
    pub optimizer: OptimizerChoice,
    pub oversample: bool,
    pub scale: bool,
}

impl ExperimentConfig {
    pub fn new(source: DataSource) -> Self {
        ExperimentConfig {
            source,
            theta: 0.8,
            k: 10,
            seed: 0,
            optimizer: OptimizerChoice::None,
            oversample: true,
            scale: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.k < 2 {
            return Err(Error::InvalidParameter(format!(
                "k must be >= 2, got {}",
                self.k
            )));
        }
        if !(self.theta > 0.0) || !self.theta.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "theta must be positive, got {}",
                self.theta
            )));
        }
        Ok(())
    }

    /// Report label for the main configuration.
    pub fn primary_config_name(&self) -> &'static str {
        match self.optimizer {
            OptimizerChoice::None => "Proposal",
            _ => "PropOpt",
        }
    }
}

/// Reference classifier rows are labeled with this config name.
pub const REFERENCE_CONFIG_NAME: &str = "1nn";

/// Train/test row indices for one fold, after preprocessing decisions.
#[derive(Debug, Clone, PartialEq)]
pub struct FoldPlan {
    pub fold: usize,
    /// Rows used to fit, as original-dataset indices. With oversampling on,
    /// this is a multiset: duplicated minority rows appear more than once.
    pub train: Vec<usize>,
    /// Training rows before oversampling.
    pub base_train: Vec<usize>,
    pub test: Vec<usize>,
}

fn mix_seed(seed: u64, salt: u64) -> u64 {
    let mut z = seed ^ salt.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

const SALT_FOLD_OVERSAMPLE: u64 = 0x10;
const SALT_HOLDOUT: u64 = 0x20;
const SALT_INNER_OVERSAMPLE: u64 = 0x30;
const SALT_GA: u64 = 0x40;

/// The fold layout a run will use: stratified k-fold, then per-fold
/// oversampling of the training side only, so duplicated rows never
/// straddle the train/test boundary.
pub fn fold_plans(data: &Dataset, config: &ExperimentConfig) -> Result<Vec<FoldPlan>> {
    config.validate()?;
    let folds = stratified_kfold(data, config.k, config.seed)?;
    (0..config.k)
        .map(|f| {
            let (base_train, test) = folds.split(f);
            let train = if config.oversample {
                let labels: Vec<Label> = base_train
                    .iter()
                    .map(|&i| data.labels()[i].clone())
                    .collect();
                let positions =
                    oversample_positions(&labels, mix_seed(config.seed, SALT_FOLD_OVERSAMPLE + f as u64))?;
                positions.into_iter().map(|p| base_train[p]).collect()
            } else {
                base_train.clone()
            };
            Ok(FoldPlan {
                fold: f,
                train,
                base_train,
                test,
            })
        })
        .collect()
}

/// Wall time per phase, in seconds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseTimes {
    pub build_s: f64,
    pub optimize_s: f64,
    pub predict_s: f64,
}

/// What the optimizer did inside one fold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldOptimization {
    pub best_weights: FeatureWeights,
    /// Best fitness on the nested validation split.
    pub validation_fitness: f64,
    /// Uniform-weight fitness on the same split, for dominance checks.
    pub uniform_validation_fitness: f64,
    pub evaluations: usize,
    pub history: Vec<HistoryPoint>,
}

/// Scores of one configuration on one held-out fold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldRecord {
    pub fold: usize,
    pub config: String,
    pub accuracy: f64,
    pub macro_precision: f64,
    pub per_class_precision: BTreeMap<Label, f64>,
    pub confusion: BTreeMap<Label, BTreeMap<Label, usize>>,
    pub wall_time_s: f64,
    pub phase_times: PhaseTimes,
    pub optimization: Option<FoldOptimization>,
}

/// Mean/median/min/max/sample-standard-deviation of per-fold values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub mean: f64,
    pub median: f64,
    pub min: f64,
    pub max: f64,
    pub std_dev: f64,
}

impl Aggregate {
    pub fn from_values(values: &[f64]) -> Self {
        assert!(!values.is_empty(), "cannot aggregate zero values");
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let mut sorted = values.to_vec();
        sorted.sort_unstable_by(f64::total_cmp);
        let mid = sorted.len() / 2;
        let median = if sorted.len() % 2 == 1 {
            sorted[mid]
        } else {
            0.5 * (sorted[mid - 1] + sorted[mid])
        };
        let std_dev = if values.len() < 2 {
            0.0
        } else {
            (values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0)).sqrt()
        };
        Aggregate {
            mean,
            median,
            min: sorted[0],
            max: *sorted.last().unwrap(),
            std_dev,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigAggregates {
    pub accuracy: Aggregate,
    pub macro_precision: Aggregate,
}

/// Everything a cross-validation run produced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub schema_version: u32,
    pub config: ExperimentConfig,
    /// Config name of the main rows: "Proposal" or "PropOpt".
    pub primary_config: String,
    /// Classes of the full dataset, canonical order; fixes CSV columns.
    pub class_labels: Vec<Label>,
    pub folds: Vec<FoldRecord>,
    pub aggregates: BTreeMap<String, ConfigAggregates>,
}

impl ExperimentReport {
    pub fn primary_folds(&self) -> impl Iterator<Item = &FoldRecord> {
        self.folds.iter().filter(|r| r.config == self.primary_config)
    }

    pub fn reference_folds(&self) -> impl Iterator<Item = &FoldRecord> {
        self.folds
            .iter()
            .filter(|r| r.config == REFERENCE_CONFIG_NAME)
    }
}

/// Run the full cross-validated experiment described by `config`.
///
/// Each fold also scores a plain 1-nearest-neighbor reference on the same
/// preprocessed data, reported under the `1nn` config name as a sanity
/// anchor.
pub fn run_cv(config: &ExperimentConfig) -> Result<ExperimentReport> {
    config.validate()?;
    let data = config.source.load(config.seed)?;
    let plans = fold_plans(&data, config)?;
    let outputs: Vec<(FoldRecord, FoldRecord)> = plans
        .par_iter()
        .map(|plan| run_fold(&data, config, plan))
        .collect::<Result<_>>()?;

    let mut folds: Vec<FoldRecord> = outputs.iter().map(|(p, _)| p.clone()).collect();
    folds.extend(outputs.into_iter().map(|(_, r)| r));

    let mut aggregates = BTreeMap::new();
    for name in [config.primary_config_name(), REFERENCE_CONFIG_NAME] {
        let group: Vec<&FoldRecord> = folds.iter().filter(|r| r.config == name).collect();
        let accuracy: Vec<f64> = group.iter().map(|r| r.accuracy).collect();
        let macro_precision: Vec<f64> = group.iter().map(|r| r.macro_precision).collect();
        aggregates.insert(
            name.to_owned(),
            ConfigAggregates {
                accuracy: Aggregate::from_values(&accuracy),
                macro_precision: Aggregate::from_values(&macro_precision),
            },
        );
    }

    Ok(ExperimentReport {
        schema_version: REPORT_SCHEMA_VERSION,
        config: config.clone(),
        primary_config: config.primary_config_name().to_owned(),
        class_labels: data.classes(),
        folds,
        aggregates,
    })
}

fn run_fold(
    data: &Dataset,
    config: &ExperimentConfig,
    plan: &FoldPlan,
) -> Result<(FoldRecord, FoldRecord)> {
    let train_set = data.select(&plan.train);
    let test_set = data.select(&plan.test);

    let optimize_start = Instant::now();
    let (weights, optimization) = match &config.optimizer {
        OptimizerChoice::None => (FeatureWeights::uniform(data.n_features()), None),
        choice => {
            let base_labels: Vec<Label> = plan
                .base_train
                .iter()
                .map(|&i| data.labels()[i].clone())
                .collect();
            let (inner_train_pos, inner_val_pos) = stratified_holdout(
                &base_labels,
                NESTED_VALIDATION_FRACTION,
                mix_seed(config.seed, SALT_HOLDOUT + plan.fold as u64),
            )?;
            let inner_val: Vec<usize> = inner_val_pos
                .iter()
                .map(|&p| plan.base_train[p])
                .collect();
            let mut inner_train: Vec<usize> = inner_train_pos
                .iter()
                .map(|&p| plan.base_train[p])
                .collect();
            if config.oversample {
                let labels: Vec<Label> = inner_train
                    .iter()
                    .map(|&i| data.labels()[i].clone())
                    .collect();
                let positions = oversample_positions(
                    &labels,
                    mix_seed(config.seed, SALT_INNER_OVERSAMPLE + plan.fold as u64),
                )?;
                inner_train = positions.into_iter().map(|p| inner_train[p]).collect();
            }
            let inner_train_set = data.select(&inner_train);
            let inner_val_set = data.select(&inner_val);

            let result = match choice {
                OptimizerChoice::Grid(grid) if config.scale => {
                    grid_search(grid, &inner_train_set, &inner_val_set, config.theta)?
                }
                OptimizerChoice::Grid(grid) => {
                    grid_search_unscaled(grid, &inner_train_set, &inner_val_set, config.theta)?
                }
                OptimizerChoice::Ga(ga) => {
                    let mut fold_ga = ga.clone();
                    fold_ga.seed = mix_seed(config.seed ^ ga.seed, SALT_GA + plan.fold as u64);
                    if config.scale {
                        ga_optimize(&fold_ga, &inner_train_set, &inner_val_set, config.theta)?
                    } else {
                        ga_optimize_unscaled(
                            &fold_ga,
                            &inner_train_set,
                            &inner_val_set,
                            config.theta,
                        )?
                    }
                }
                OptimizerChoice::None => unreachable!(),
            };
            let uniform = FeatureWeights::uniform(data.n_features());
            let uniform_fitness = if config.scale {
                fitness(&uniform, &inner_train_set, &inner_val_set, config.theta)?
            } else {
                fitness_unscaled(&uniform, &inner_train_set, &inner_val_set, config.theta)?
            };
            let weights = result.best_weights.clone();
            (
                weights,
                Some(FoldOptimization {
                    best_weights: result.best_weights,
                    validation_fitness: result.best_fitness,
                    uniform_validation_fitness: uniform_fitness,
                    evaluations: result.evaluations,
                    history: result.history,
                }),
            )
        }
    };
    let optimize_s = optimize_start.elapsed().as_secs_f64();

    let build_start = Instant::now();
    let model = if config.scale {
        FittedModel::fit(&train_set, &weights, config.theta)?
    } else {
        FittedModel::fit_unscaled(&train_set, &weights, config.theta)?
    };
    let build_s = build_start.elapsed().as_secs_f64();

    let predict_start = Instant::now();
    let predictions = model.predict_batch(&test_set)?;
    let predict_s = predict_start.elapsed().as_secs_f64();
    let metrics = evaluate(&predictions, test_set.labels())?;

    let primary = FoldRecord {
        fold: plan.fold,
        config: config.primary_config_name().to_owned(),
        accuracy: metrics.accuracy,
        macro_precision: metrics.macro_precision,
        per_class_precision: metrics.per_class_precision,
        confusion: metrics.confusion,
        wall_time_s: optimize_s + build_s + predict_s,
        phase_times: PhaseTimes {
            build_s,
            optimize_s,
            predict_s,
        },
        optimization,
    };

    let reference = reference_fold_record(config, plan, &train_set, &test_set)?;
    Ok((primary, reference))
}

/// Plain 1-nearest-neighbor on the same preprocessed training data.
fn reference_fold_record(
    config: &ExperimentConfig,
    plan: &FoldPlan,
    train_set: &Dataset,
    test_set: &Dataset,
) -> Result<FoldRecord> {
    let build_start = Instant::now();
    let (train_scaled, params) = if config.scale {
        minmax_scale(train_set)?
    } else {
        let params = ScalingParams::identity(train_set.n_features());
        (train_set.clone(), params)
    };
    let build_s = build_start.elapsed().as_secs_f64();

    let predict_start = Instant::now();
    let uniform = FeatureWeights::uniform(train_set.n_features());
    let labels: Vec<Label> = (0..test_set.n_samples())
        .into_par_iter()
        .map(|i| {
            let x = params.apply_row(test_set.row(i))?;
            let mut best = (0usize, f64::INFINITY);
            for j in 0..train_scaled.n_samples() {
                let d = weighted_distance(&x, train_scaled.row(j), &uniform)?;
                if d < best.1 {
                    best = (j, d);
                }
            }
            Ok(train_scaled.labels()[best.0].clone())
        })
        .collect::<Result<_>>()?;
    let predict_s = predict_start.elapsed().as_secs_f64();

    let predictions: Vec<crate::classifier::Prediction> = labels
        .into_iter()
        .map(|label| crate::classifier::Prediction {
            label,
            deltas: BTreeMap::new(),
        })
        .collect();
    let metrics = evaluate(&predictions, test_set.labels())?;
    Ok(FoldRecord {
        fold: plan.fold,
        config: REFERENCE_CONFIG_NAME.to_owned(),
        accuracy: metrics.accuracy,
        macro_precision: metrics.macro_precision,
        per_class_precision: metrics.per_class_precision,
        confusion: metrics.confusion,
        wall_time_s: build_s + predict_s,
        phase_times: PhaseTimes {
            build_s,
            optimize_s: 0.0,
            predict_s,
        },
        optimization: None,
    })
}

/// Paired per-fold difference between two runs, in metric units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FoldDelta {
    pub fold: usize,
    pub accuracy_delta: f64,
    pub macro_precision_delta: f64,
}

/// Paired comparison of two reports over the same folds. Improvements are
/// `optimized - baseline`, expressed in percentage points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub baseline_config: String,
    pub optimized_config: String,
    pub per_fold: Vec<FoldDelta>,
    pub mean_accuracy_improvement_points: f64,
    pub median_accuracy_improvement_points: f64,
    pub mean_macro_precision_improvement_points: f64,
    pub median_macro_precision_improvement_points: f64,
}

pub fn compare(baseline: &ExperimentReport, optimized: &ExperimentReport) -> Result<Comparison> {
    let same_setup = baseline.config.source == optimized.config.source
        && baseline.config.k == optimized.config.k
        && baseline.config.seed == optimized.config.seed
        && baseline.config.theta == optimized.config.theta
        && baseline.config.oversample == optimized.config.oversample
        && baseline.config.scale == optimized.config.scale;
    if !same_setup {
        return Err(Error::ReportMismatch(
            "reports differ in dataset, folds, seed, or preprocessing".into(),
        ));
    }
    let base: Vec<&FoldRecord> = baseline.primary_folds().collect();
    let opt: Vec<&FoldRecord> = optimized.primary_folds().collect();
    if base.len() != opt.len() || base.is_empty() {
        return Err(Error::ReportMismatch(format!(
            "fold counts differ: {} vs {}",
            base.len(),
            opt.len()
        )));
    }
    let mut per_fold = Vec::with_capacity(base.len());
    for (b, o) in base.iter().zip(&opt) {
        if b.fold != o.fold {
            return Err(Error::ReportMismatch(format!(
                "fold order differs: {} vs {}",
                b.fold, o.fold
            )));
        }
        per_fold.push(FoldDelta {
            fold: b.fold,
            accuracy_delta: o.accuracy - b.accuracy,
            macro_precision_delta: o.macro_precision - b.macro_precision,
        });
    }
    let acc: Vec<f64> = per_fold.iter().map(|d| d.accuracy_delta * 100.0).collect();
    let prec: Vec<f64> = per_fold
        .iter()
        .map(|d| d.macro_precision_delta * 100.0)
        .collect();
    let acc_agg = Aggregate::from_values(&acc);
    let prec_agg = Aggregate::from_values(&prec);
    Ok(Comparison {
        baseline_config: baseline.primary_config.clone(),
        optimized_config: optimized.primary_config.clone(),
        per_fold,
        mean_accuracy_improvement_points: acc_agg.mean,
        median_accuracy_improvement_points: acc_agg.median,
        mean_macro_precision_improvement_points: prec_agg.mean,
        median_macro_precision_improvement_points: prec_agg.median,
    })
}

/// Output encoding for [`emit_report`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    /// Self-describing JSON; floats round-trip exactly.
    Structured,
    /// One CSV row per fold per configuration, for external plotting.
    Tabular,
}

pub fn emit_report(
    report: &ExperimentReport,
    path: impl AsRef<Path>,
    format: ReportFormat,
) -> Result<()> {
    match format {
        ReportFormat::Structured => {
            let mut text = serde_json::to_string_pretty(report)?;
            text.push('\n');
            fs::write(path, text)?;
        }
        ReportFormat::Tabular => {
            let mut buf = Vec::new();
            write_tabular(report, &mut buf)?;
            fs::write(path, buf)?;
        }
    }
    Ok(())
}

/// Tabular schema: `fold,config,accuracy,macro_precision,wall_time_s` plus
/// one `precision_<class>` column per class.
pub fn write_tabular<W: Write>(report: &ExperimentReport, out: W) -> Result<()> {
    let mut writer = csv::Writer::from_writer(out);
    let mut header = vec![
        "fold".to_owned(),
        "config".to_owned(),
        "accuracy".to_owned(),
        "macro_precision".to_owned(),
        "wall_time_s".to_owned(),
    ];
    for label in &report.class_labels {
        header.push(format!("precision_{label}"));
    }
    writer.write_record(&header)?;
    for record in &report.folds {
        let mut row = vec![
            record.fold.to_string(),
            record.config.clone(),
            record.accuracy.to_string(),
            record.macro_precision.to_string(),
            record.wall_time_s.to_string(),
        ];
        for label in &report.class_labels {
            row.push(
                record
                    .per_class_precision
                    .get(label)
                    .copied()
                    .unwrap_or(0.0)
                    .to_string(),
            );
        }
        writer.write_record(&row)?;
    }
    writer.flush()?;
    Ok(())
}

pub fn load_report(path: impl AsRef<Path>) -> Result<ExperimentReport> {
    let report: ExperimentReport = serde_json::from_str(&fs::read_to_string(path)?)?;
    if report.schema_version != REPORT_SCHEMA_VERSION {
        return Err(Error::ModelFormat(format!(
            "unsupported report schema version {}, expected {}",
            report.schema_version, REPORT_SCHEMA_VERSION
        )));
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::ShapeKind;

    fn small_generated_config() -> ExperimentConfig {
        let mut config = ExperimentConfig::new(DataSource::Generated {
            shapes: vec![
                ClassShape {
                    kind: ShapeKind::Spiral,
                    samples: 30
                };
                3
            ],
            overlap: 0.02,
        });
        config.k = 3;
        config.seed = 7;
        config
    }

    #[test]
    fn run_cv_produces_fold_records() {
        let config = small_generated_config();
        let report = run_cv(&config).unwrap();
        assert_eq!(report.primary_config, "Proposal");
        assert_eq!(report.primary_folds().count(), 3);
        assert_eq!(report.reference_folds().count(), 3);
        assert_eq!(report.folds.len(), 6);
        for record in report.primary_folds() {
            // 3 classes x 30 samples, k = 3: every test fold has 30 rows
            let total: usize = record.confusion.values().flat_map(|r| r.values()).sum();
            assert_eq!(total, 30);
        }
        assert!(report.aggregates.contains_key("Proposal"));
        assert!(report.aggregates.contains_key(REFERENCE_CONFIG_NAME));
    }

    #[test]
    fn run_cv_with_ga_records_optimization() {
        let mut config = small_generated_config();
        config.optimizer = OptimizerChoice::Ga(GAConfig {
            population_size: 6,
            generations: 2,
            tournament_size: 2,
            elitism_count: 1,
            ..GAConfig::default()
        });
        let report = run_cv(&config).unwrap();
        assert_eq!(report.primary_config, "PropOpt");
        for record in report.primary_folds() {
            let opt = record.optimization.as_ref().expect("optimization recorded");
            assert!(opt.validation_fitness >= opt.uniform_validation_fitness);
            assert!(opt.evaluations <= 6 * 3);
        }
    }

    #[test]
    fn fold_plans_isolate_test_rows() {
        let config = small_generated_config();
        let data = config.source.load(config.seed).unwrap();
        let plans = fold_plans(&data, &config).unwrap();
        assert_eq!(plans.len(), 3);
        for plan in &plans {
            for test_idx in &plan.test {
                assert!(!plan.train.contains(test_idx));
                assert!(!plan.base_train.contains(test_idx));
            }
        }
    }

    #[test]
    fn aggregates_recompute_from_folds() {
        let report = run_cv(&small_generated_config()).unwrap();
        for (name, agg) in &report.aggregates {
            let values: Vec<f64> = report
                .folds
                .iter()
                .filter(|r| &r.config == name)
                .map(|r| r.accuracy)
                .collect();
            let expected = Aggregate::from_values(&values);
            assert!((agg.accuracy.mean - expected.mean).abs() < 1e-12);
            assert!((agg.accuracy.median - expected.median).abs() < 1e-12);
            assert!((agg.accuracy.std_dev - expected.std_dev).abs() < 1e-12);
        }
    }

    #[test]
    fn report_round_trips_through_json() {
        let report = run_cv(&small_generated_config()).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("report.json");
        emit_report(&report, &path, ReportFormat::Structured).unwrap();
        let back = load_report(&path).unwrap();
        assert_eq!(back, report);
    }

    #[test]
    fn tabular_schema_and_row_count() {
        let report = run_cv(&small_generated_config()).unwrap();
        let mut buf = Vec::new();
        write_tabular(&report, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        // header plus one row per fold per config
        assert_eq!(lines.len(), 1 + 6);
        assert_eq!(
            lines[0],
            "fold,config,accuracy,macro_precision,wall_time_s,precision_0,precision_1,precision_2"
        );
    }

    #[test]
    fn compare_identical_reports_is_zero() {
        let report = run_cv(&small_generated_config()).unwrap();
        let cmp = compare(&report, &report).unwrap();
        for delta in &cmp.per_fold {
            assert_eq!(delta.accuracy_delta, 0.0);
            assert_eq!(delta.macro_precision_delta, 0.0);
        }
        assert_eq!(cmp.mean_accuracy_improvement_points, 0.0);
    }

    #[test]
    fn compare_shift_is_in_points() {
        let baseline = run_cv(&small_generated_config()).unwrap();
        let mut optimized = baseline.clone();
        optimized.primary_config = "PropOpt".into();
        for record in &mut optimized.folds {
            if record.config == "Proposal" {
                record.config = "PropOpt".into();
                record.accuracy += 0.05;
            }
        }
        let cmp = compare(&baseline, &optimized).unwrap();
        assert!((cmp.mean_accuracy_improvement_points - 5.0).abs() < 1e-9);
        assert!((cmp.median_accuracy_improvement_points - 5.0).abs() < 1e-9);
    }

    #[test]
    fn compare_rejects_mismatched_runs() {
        let a = run_cv(&small_generated_config()).unwrap();
        let mut other = small_generated_config();
        other.seed = 99;
        let b = run_cv(&other).unwrap();
        assert!(matches!(compare(&a, &b), Err(Error::ReportMismatch(_))));
    }

    #[test]
    fn run_cv_is_deterministic_up_to_wall_time() {
        let config = small_generated_config();
        let mut a = run_cv(&config).unwrap();
        let mut b = run_cv(&config).unwrap();
        for report in [&mut a, &mut b] {
            for record in &mut report.folds {
                record.wall_time_s = 0.0;
                record.phase_times = PhaseTimes {
                    build_s: 0.0,
                    optimize_s: 0.0,
                    predict_s: 0.0,
                };
            }
        }
        assert_eq!(a, b);
    }
}

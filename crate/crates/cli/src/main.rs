//! Command-line interface: dataset generation, model fitting, prediction,
//! weight optimization, and cross-validated experiments.
//!
//! Exit codes: 0 on success, 1 on runtime failure, 2 on usage errors.

use std::path::{Path, PathBuf};

use clap::{ArgGroup, Parser, Subcommand, ValueEnum};
use serde_json::json;

use mstnet::classifier::{evaluate, FittedModel, Prediction};
use mstnet::data::{
    generate_artificial, load_csv, load_features_csv, oversample_positions, stratified_holdout,
    write_csv, ClassShape, Dataset, Label, LabelColumn, ShapeKind,
};
use mstnet::error::{Error, Result};
use mstnet::graph::FeatureWeights;
use mstnet::harness::{
    compare, emit_report, load_report, run_cv, DataSource, ExperimentConfig, OptimizerChoice,
    ReportFormat,
};
use mstnet::optimizer::{
    ga_optimize, ga_optimize_unscaled, grid_search, grid_search_unscaled, GAConfig, GridConfig,
    OptimizationResult,
};

#[derive(Parser)]
#[command(
    name = "mstnet",
    version,
    about = "Graph-based classification: per-class networks scored by spanning-forest perturbation",
    propagate_version = true
)]
struct Cli {
    /// Worker threads (0 = auto)
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OptimizerKind {
    None,
    Grid,
    Ga,
}

#[derive(Subcommand)]
enum Command {
    /// Generate an artificial 2-feature dataset of spiral/star classes
    Generate {
        /// Class shapes, e.g. "spiral:7" or "spiral:4,star:3"
        #[arg(long)]
        shapes: String,
        /// Samples per class
        #[arg(long, default_value_t = 200)]
        n: usize,
        /// Gaussian noise standard deviation
        #[arg(long, default_value_t = 0.1)]
        overlap: f64,
        #[arg(long, env = "MSTNET_SEED", default_value_t = 0)]
        seed: u64,
        /// Output CSV path (label column "class")
        #[arg(long)]
        out: PathBuf,
    },
    /// Fit a model: one pruned class network per label
    Fit {
        /// Training CSV
        #[arg(long)]
        data: PathBuf,
        /// Label column name (default: last column)
        #[arg(long)]
        label_col: Option<String>,
        /// Pruning factor: edges above theta * median are dropped
        #[arg(long, default_value_t = 0.8)]
        theta: f64,
        /// Per-feature distance weights, e.g. "1,0.5,2" (default: uniform)
        #[arg(long)]
        weights: Option<String>,
        /// Skip min-max scaling
        #[arg(long)]
        no_scale: bool,
        /// Output model path (JSON)
        #[arg(long)]
        out: PathBuf,
    },
    /// Classify rows of a CSV with a fitted model
    Predict {
        #[arg(long)]
        model: PathBuf,
        /// Input CSV; all columns are features unless --label-col is given
        #[arg(long)]
        data: PathBuf,
        /// Label column to strip from the input and score against
        #[arg(long)]
        label_col: Option<String>,
        /// Output CSV of predictions and per-class deltas
        #[arg(long)]
        out: PathBuf,
    },
    /// Cross-validated experiment; writes <out>.json and <out>.csv
    #[command(group(ArgGroup::new("source").required(true).args(["data", "shapes"])))]
    Cv {
        /// Dataset CSV
        #[arg(long)]
        data: Option<PathBuf>,
        /// Label column name (default: last column)
        #[arg(long)]
        label_col: Option<String>,
        /// Generate the dataset instead, e.g. "spiral:7"
        #[arg(long)]
        shapes: Option<String>,
        /// Samples per generated class
        #[arg(long, default_value_t = 200)]
        n: usize,
        /// Noise of the generated dataset
        #[arg(long, default_value_t = 0.1)]
        overlap: f64,
        #[arg(long, default_value_t = 10)]
        k: usize,
        #[arg(long, default_value_t = 0.8)]
        theta: f64,
        #[arg(long, value_enum, default_value_t = OptimizerKind::None)]
        optimizer: OptimizerKind,
        /// GA settings file (key = value lines)
        #[arg(long)]
        ga_config: Option<PathBuf>,
        /// Grid settings file (key = value lines)
        #[arg(long)]
        grid_config: Option<PathBuf>,
        #[arg(long, env = "MSTNET_SEED", default_value_t = 0)]
        seed: u64,
        /// Skip oversampling of training folds
        #[arg(long)]
        no_oversample: bool,
        /// Skip min-max scaling
        #[arg(long)]
        no_scale: bool,
        /// Output path stem for the report files
        #[arg(long)]
        out: PathBuf,
    },
    /// Search feature weights on a stratified holdout split
    Optimize {
        #[arg(long)]
        data: PathBuf,
        /// Label column name (default: last column)
        #[arg(long)]
        label_col: Option<String>,
        #[arg(long, value_enum, default_value_t = OptimizerKind::Ga)]
        optimizer: OptimizerKind,
        #[arg(long)]
        ga_config: Option<PathBuf>,
        #[arg(long)]
        grid_config: Option<PathBuf>,
        #[arg(long, default_value_t = 0.8)]
        theta: f64,
        /// Validation fraction of the holdout split
        #[arg(long, default_value_t = 0.2)]
        holdout: f64,
        /// Experiment seed; combined with the optimizer config seed
        #[arg(long, env = "MSTNET_SEED", default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        no_oversample: bool,
        #[arg(long)]
        no_scale: bool,
        /// Output JSON path
        #[arg(long)]
        out: PathBuf,
    },
    /// Summarize a report, re-emit it as CSV, or compare against a baseline
    Report {
        /// Structured report (JSON) to read
        #[arg(long)]
        input: PathBuf,
        /// Write the tabular (CSV) form here
        #[arg(long)]
        tabular: Option<PathBuf>,
        /// Baseline report to compare against (input - baseline)
        #[arg(long)]
        baseline: Option<PathBuf>,
        /// Write the comparison JSON here
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() {
    let cli = Cli::parse();
    if cli.threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cli.threads)
            .build_global()
            .expect("thread pool is configured once");
    }
    if let Err(e) = run(cli.command) {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}

fn parse_shapes(spec: &str, samples_per_class: usize) -> Result<Vec<ClassShape>> {
    let mut shapes = Vec::new();
    for part in spec.split(',') {
        let part = part.trim();
        let (kind, count) = part
            .split_once(':')
            .ok_or_else(|| Error::InvalidParameter(format!("shape '{part}' is not kind:count")))?;
        let kind = match kind.trim() {
            "spiral" => ShapeKind::Spiral,
            "star" => ShapeKind::Star,
            other => {
                return Err(Error::InvalidParameter(format!(
                    "unknown shape '{other}', expected spiral or star"
                )))
            }
        };
        let count: usize = count.trim().parse().map_err(|_| {
            Error::InvalidParameter(format!("cannot parse class count in '{part}'"))
        })?;
        for _ in 0..count {
            shapes.push(ClassShape {
                kind,
                samples: samples_per_class,
            });
        }
    }
    Ok(shapes)
}

fn parse_weights(spec: &str) -> Result<FeatureWeights> {
    let values: std::result::Result<Vec<f64>, _> =
        spec.split(',').map(|v| v.trim().parse()).collect();
    FeatureWeights::new(
        values.map_err(|_| Error::InvalidParameter(format!("cannot parse weights '{spec}'")))?,
    )
}

fn label_column(name: &Option<String>) -> LabelColumn {
    match name {
        Some(n) => LabelColumn::Name(n.clone()),
        None => LabelColumn::Last,
    }
}

fn optimizer_choice(
    kind: OptimizerKind,
    ga_config: &Option<PathBuf>,
    grid_config: &Option<PathBuf>,
) -> Result<OptimizerChoice> {
    Ok(match kind {
        OptimizerKind::None => OptimizerChoice::None,
        OptimizerKind::Grid => OptimizerChoice::Grid(match grid_config {
            Some(path) => GridConfig::from_kv_file(path)?,
            None => GridConfig::default(),
        }),
        OptimizerKind::Ga => OptimizerChoice::Ga(match ga_config {
            Some(path) => GAConfig::from_kv_file(path)?,
            None => GAConfig::default(),
        }),
    })
}

fn print_effective_config(command: &str, config: &serde_json::Value) {
    println!(
        "{}",
        json!({ "command": command, "effective_config": config })
    );
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Generate {
            shapes,
            n,
            overlap,
            seed,
            out,
        } => {
            let class_shapes = parse_shapes(&shapes, n)?;
            print_effective_config(
                "generate",
                &json!({
                    "shapes": class_shapes,
                    "samples_per_class": n,
                    "overlap": overlap,
                    "seed": seed,
                    "out": out,
                }),
            );
            let data = generate_artificial(&class_shapes, overlap, seed)?;
            write_csv(&data, &out, "class")?;
            println!(
                "wrote {} samples, {} classes to {}",
                data.n_samples(),
                data.classes().len(),
                out.display()
            );
            Ok(())
        }
        Command::Fit {
            data,
            label_col,
            theta,
            weights,
            no_scale,
            out,
        } => {
            let dataset = load_csv(&data, &label_column(&label_col))?;
            let weights = match &weights {
                Some(spec) => parse_weights(spec)?,
                None => FeatureWeights::uniform(dataset.n_features()),
            };
            print_effective_config(
                "fit",
                &json!({
                    "data": data,
                    "label_col": label_col.as_deref().unwrap_or("<last>"),
                    "theta": theta,
                    "weights": weights,
                    "scale": !no_scale,
                    "out": out,
                }),
            );
            let model = if no_scale {
                FittedModel::fit_unscaled(&dataset, &weights, theta)?
            } else {
                FittedModel::fit(&dataset, &weights, theta)?
            };
            model.save(&out)?;
            println!(
                "fitted {} class networks over {} samples; model at {}",
                model.networks().len(),
                dataset.n_samples(),
                out.display()
            );
            Ok(())
        }
        Command::Predict {
            model,
            data,
            label_col,
            out,
        } => {
            print_effective_config(
                "predict",
                &json!({
                    "model": model,
                    "data": data,
                    "label_col": label_col.as_deref().unwrap_or("<none>"),
                    "out": out,
                }),
            );
            let model = FittedModel::load(&model)?;
            let (predictions, truth) = match &label_col {
                Some(name) => {
                    let dataset = load_csv(&data, &LabelColumn::Name(name.clone()))?;
                    let predictions = model.predict_batch(&dataset)?;
                    (predictions, Some(dataset.labels().to_vec()))
                }
                None => {
                    let (features, names) = load_features_csv(&data)?;
                    let placeholder = vec![Label::from("?"); features.nrows()];
                    let dataset = Dataset::new(features, placeholder, names)?;
                    (model.predict_batch(&dataset)?, None)
                }
            };
            write_predictions(&predictions, &model.classes(), &out)?;
            if let Some(truth) = truth {
                let metrics = evaluate(&predictions, &truth)?;
                println!(
                    "{}",
                    json!({
                        "accuracy": metrics.accuracy,
                        "macro_precision": metrics.macro_precision,
                    })
                );
            }
            println!("wrote {} predictions to {}", predictions.len(), out.display());
            Ok(())
        }
        Command::Cv {
            data,
            label_col,
            shapes,
            n,
            overlap,
            k,
            theta,
            optimizer,
            ga_config,
            grid_config,
            seed,
            no_oversample,
            no_scale,
            out,
        } => {
            let source = match (&data, &shapes) {
                (Some(path), None) => DataSource::Csv {
                    path: path.to_string_lossy().into_owned(),
                    label_column: label_column(&label_col),
                },
                (None, Some(spec)) => DataSource::Generated {
                    shapes: parse_shapes(spec, n)?,
                    overlap,
                },
                _ => unreachable!("clap enforces exactly one source"),
            };
            let config = ExperimentConfig {
                source,
                theta,
                k,
                seed,
                optimizer: optimizer_choice(optimizer, &ga_config, &grid_config)?,
                oversample: !no_oversample,
                scale: !no_scale,
            };
            print_effective_config("cv", &serde_json::to_value(&config)?);
            let report = run_cv(&config)?;
            let json_path = out.with_extension("json");
            let csv_path = out.with_extension("csv");
            emit_report(&report, &json_path, ReportFormat::Structured)?;
            emit_report(&report, &csv_path, ReportFormat::Tabular)?;
            for (name, aggregate) in &report.aggregates {
                println!(
                    "{name}: accuracy mean {:.4} (min {:.4}, max {:.4}), macro precision mean {:.4}",
                    aggregate.accuracy.mean,
                    aggregate.accuracy.min,
                    aggregate.accuracy.max,
                    aggregate.macro_precision.mean,
                );
            }
            println!(
                "wrote report to {} and {}",
                json_path.display(),
                csv_path.display()
            );
            Ok(())
        }
        Command::Optimize {
            data,
            label_col,
            optimizer,
            ga_config,
            grid_config,
            theta,
            holdout,
            seed,
            no_oversample,
            no_scale,
            out,
        } => {
            if optimizer == OptimizerKind::None {
                return Err(Error::InvalidParameter(
                    "optimize needs --optimizer ga or grid".into(),
                ));
            }
            let dataset = load_csv(&data, &label_column(&label_col))?;
            let choice = optimizer_choice(optimizer, &ga_config, &grid_config)?;
            print_effective_config(
                "optimize",
                &json!({
                    "data": data,
                    "label_col": label_col.as_deref().unwrap_or("<last>"),
                    "optimizer": &choice,
                    "theta": theta,
                    "holdout": holdout,
                    "seed": seed,
                    "oversample": !no_oversample,
                    "scale": !no_scale,
                    "out": out,
                }),
            );
            let (train_idx, val_idx) = stratified_holdout(dataset.labels(), holdout, seed)?;
            let train_idx = if no_oversample {
                train_idx
            } else {
                let labels: Vec<Label> = train_idx
                    .iter()
                    .map(|&i| dataset.labels()[i].clone())
                    .collect();
                oversample_positions(&labels, seed)?
                    .into_iter()
                    .map(|p| train_idx[p])
                    .collect()
            };
            let train = dataset.select(&train_idx);
            let validation = dataset.select(&val_idx);
            let result: OptimizationResult = match &choice {
                OptimizerChoice::Grid(grid) if no_scale => {
                    grid_search_unscaled(grid, &train, &validation, theta)?
                }
                OptimizerChoice::Grid(grid) => grid_search(grid, &train, &validation, theta)?,
                OptimizerChoice::Ga(ga) => {
                    let mut ga = ga.clone();
                    ga.seed ^= seed;
                    if no_scale {
                        ga_optimize_unscaled(&ga, &train, &validation, theta)?
                    } else {
                        ga_optimize(&ga, &train, &validation, theta)?
                    }
                }
                OptimizerChoice::None => unreachable!(),
            };
            let document = json!({
                "optimizer": choice,
                "theta": theta,
                "holdout": holdout,
                "seed": seed,
                "result": result,
            });
            std::fs::write(&out, format!("{:#}\n", document))?;
            println!(
                "best fitness {:.4} with weights {:?} after {} evaluations; result at {}",
                result.best_fitness,
                result.best_weights.values(),
                result.evaluations,
                out.display()
            );
            Ok(())
        }
        Command::Report {
            input,
            tabular,
            baseline,
            out,
        } => {
            print_effective_config(
                "report",
                &json!({
                    "input": input,
                    "tabular": tabular,
                    "baseline": baseline,
                    "out": out,
                }),
            );
            let report = load_report(&input)?;
            if let Some(path) = &tabular {
                emit_report(&report, path, ReportFormat::Tabular)?;
                println!("wrote tabular report to {}", path.display());
            }
            match &baseline {
                Some(base_path) => {
                    let base = load_report(base_path)?;
                    let comparison = compare(&base, &report)?;
                    println!(
                        "mean improvement: accuracy {:+.2} points, macro precision {:+.2} points",
                        comparison.mean_accuracy_improvement_points,
                        comparison.mean_macro_precision_improvement_points,
                    );
                    if let Some(path) = &out {
                        std::fs::write(path, format!("{:#}\n", serde_json::to_value(&comparison)?))?;
                        println!("wrote comparison to {}", path.display());
                    }
                }
                None => {
                    for (name, aggregate) in &report.aggregates {
                        println!(
                            "{name}: accuracy mean {:.4} +- {:.4}, macro precision mean {:.4}",
                            aggregate.accuracy.mean,
                            aggregate.accuracy.std_dev,
                            aggregate.macro_precision.mean,
                        );
                    }
                }
            }
            Ok(())
        }
    }
}

fn write_predictions(
    predictions: &[Prediction],
    classes: &[Label],
    path: &Path,
) -> Result<()> {
    let mut writer = csv::Writer::from_path(path)?;
    let mut header = vec!["row".to_owned(), "predicted".to_owned()];
    for class in classes {
        header.push(format!("delta_{class}"));
    }
    writer.write_record(&header)?;
    for (i, pred) in predictions.iter().enumerate() {
        let mut row = vec![i.to_string(), pred.label.to_string()];
        for class in classes {
            row.push(
                pred.deltas
                    .get(class)
                    .map(|d| d.to_string())
                    .unwrap_or_default(),
            );
        }
        writer.write_record(&row)?;
    }
    writer.flush()?;
    Ok(())
}

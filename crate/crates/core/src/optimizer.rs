//! Feature-weight search: exhaustive grid and a real-coded genetic
//! algorithm, both maximizing validation macro precision.
//!
//! Fitness evaluations are pure, so batches run in parallel; selection and
//! replacement are sequential, and all randomness comes from a seeded
//! generator, so results do not depend on scheduling.

use std::cmp::Ordering;
use std::fs;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classifier::{evaluate, FittedModel};
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::graph::FeatureWeights;

/// Genetic-algorithm settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GAConfig {
    pub population_size: usize,
    pub generations: usize,
    pub crossover_rate: f64,
    /// Per-gene mutation probability.
    pub mutation_rate: f64,
    /// Standard deviation of the additive Gaussian mutation.
    pub mutation_sigma: f64,
    pub tournament_size: usize,
    pub elitism_count: usize,
    /// Inclusive `(lo, hi)` bounds for every gene, `0 <= lo < hi`.
    pub weight_bounds: (f64, f64),
    pub seed: u64,
}

impl Default for GAConfig {
    fn default() -> Self {
        GAConfig {
            population_size: 30,
            generations: 50,
            crossover_rate: 0.9,
            mutation_rate: 0.1,
            mutation_sigma: 0.1,
            tournament_size: 3,
            elitism_count: 2,
            weight_bounds: (0.0, 1.0),
            seed: 0,
        }
    }
}

impl GAConfig {
    pub fn validate(&self) -> Result<()> {
        let (lo, hi) = self.weight_bounds;
        let checks = [
            (self.tournament_size >= 2, "tournament_size must be >= 2"),
            (
                self.population_size >= self.tournament_size,
                "population_size must be >= tournament_size",
            ),
            (
                self.elitism_count < self.population_size,
                "elitism_count must be < population_size",
            ),
            (
                (0.0..=1.0).contains(&self.crossover_rate),
                "crossover_rate must be in [0, 1]",
            ),
            (
                (0.0..=1.0).contains(&self.mutation_rate),
                "mutation_rate must be in [0, 1]",
            ),
            (
                self.mutation_sigma > 0.0 && self.mutation_sigma.is_finite(),
                "mutation_sigma must be positive",
            ),
            (
                lo >= 0.0 && lo < hi && hi.is_finite(),
                "weight_bounds must satisfy 0 <= lo < hi",
            ),
        ];
        for (ok, msg) in checks {
            if !ok {
                return Err(Error::InvalidParameter(msg.into()));
            }
        }
        Ok(())
    }

    /// Read settings from a `key = value` text file. Unset keys keep their
    /// defaults; unknown keys are an error.
    pub fn from_kv_file(path: impl AsRef<Path>) -> Result<Self> {
        let mut config = GAConfig::default();
        for (key, value) in parse_kv_file(path.as_ref())? {
            match key.as_str() {
                "population_size" => config.population_size = parse_num(&key, &value)?,
                "generations" => config.generations = parse_num(&key, &value)?,
                "crossover_rate" => config.crossover_rate = parse_num(&key, &value)?,
                "mutation_rate" => config.mutation_rate = parse_num(&key, &value)?,
                "mutation_sigma" => config.mutation_sigma = parse_num(&key, &value)?,
                "tournament_size" => config.tournament_size = parse_num(&key, &value)?,
                "elitism_count" => config.elitism_count = parse_num(&key, &value)?,
                "seed" => config.seed = parse_num(&key, &value)?,
                "weight_bounds" => {
                    let parts: Vec<&str> = value.split(',').map(str::trim).collect();
                    if parts.len() != 2 {
                        return Err(Error::InvalidParameter(format!(
                            "weight_bounds expects 'lo,hi', got '{value}'"
                        )));
                    }
                    config.weight_bounds =
                        (parse_num(&key, parts[0])?, parse_num(&key, parts[1])?);
                }
                other => {
                    return Err(Error::InvalidParameter(format!(
                        "unknown key '{other}' in GA config"
                    )))
                }
            }
        }
        config.validate()?;
        Ok(config)
    }
}

/// Grid-search settings: candidate per-feature values and an evaluation cap.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridConfig {
    grid_values: Vec<f64>,
    max_evaluations: Option<usize>,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig {
            grid_values: vec![0.25, 0.5, 0.75, 1.0],
            max_evaluations: Some(4096),
        }
    }
}

impl GridConfig {
    /// Values are sorted and deduplicated; they must be finite, nonnegative,
    /// and nonempty.
    pub fn new(values: Vec<f64>, max_evaluations: Option<usize>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidParameter("grid values cannot be empty".into()));
        }
        if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::InvalidParameter(
                "grid values must be finite and nonnegative".into(),
            ));
        }
        let mut values = values;
        values.sort_unstable_by(f64::total_cmp);
        values.dedup();
        Ok(GridConfig {
            grid_values: values,
            max_evaluations,
        })
    }

    pub fn grid_values(&self) -> &[f64] {
        &self.grid_values
    }

    pub fn max_evaluations(&self) -> Option<usize> {
        self.max_evaluations
    }

    /// Read settings from a `key = value` text file; see
    /// [`GAConfig::from_kv_file`].
    pub fn from_kv_file(path: impl AsRef<Path>) -> Result<Self> {
        let mut values = GridConfig::default().grid_values;
        let mut max_evaluations = GridConfig::default().max_evaluations;
        for (key, value) in parse_kv_file(path.as_ref())? {
            match key.as_str() {
                "grid_values" => {
                    values = value
                        .split(',')
                        .map(|v| parse_num(&key, v.trim()))
                        .collect::<Result<_>>()?;
                }
                "max_evaluations" => {
                    max_evaluations = if value.eq_ignore_ascii_case("none") {
                        None
                    } else {
                        Some(parse_num(&key, &value)?)
                    };
                }
                other => {
                    return Err(Error::InvalidParameter(format!(
                        "unknown key '{other}' in grid config"
                    )))
                }
            }
        }
        GridConfig::new(values, max_evaluations)
    }
}

fn parse_kv_file(path: &Path) -> Result<Vec<(String, String)>> {
    let text = fs::read_to_string(path)?;
    let mut pairs = Vec::new();
    for (line_no, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(Error::InvalidParameter(format!(
                "line {}: expected 'key = value', got '{line}'",
                line_no + 1
            )));
        };
        pairs.push((key.trim().to_owned(), value.trim().to_owned()));
    }
    Ok(pairs)
}

fn parse_num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::InvalidParameter(format!("cannot parse '{value}' for key '{key}'")))
}

/// `(evaluation_count, best_fitness_so_far)` sample of an optimization run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HistoryPoint {
    pub evaluations: usize,
    pub best_fitness: f64,
}

/// Outcome of a weight search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizationResult {
    pub best_weights: FeatureWeights,
    pub best_fitness: f64,
    pub history: Vec<HistoryPoint>,
    pub evaluations: usize,
}

/// Fitness of a candidate weight vector: fit on `train`, predict
/// `validation`, return macro precision. Pure in its inputs.
pub fn fitness(
    weights: &FeatureWeights,
    train: &Dataset,
    validation: &Dataset,
    theta: f64,
) -> Result<f64> {
    fitness_impl(weights, train, validation, theta, true)
}

/// [`fitness`] for pipelines that skip min-max scaling.
pub fn fitness_unscaled(
    weights: &FeatureWeights,
    train: &Dataset,
    validation: &Dataset,
    theta: f64,
) -> Result<f64> {
    fitness_impl(weights, train, validation, theta, false)
}

fn fitness_impl(
    weights: &FeatureWeights,
    train: &Dataset,
    validation: &Dataset,
    theta: f64,
    scale: bool,
) -> Result<f64> {
    let model = if scale {
        FittedModel::fit(train, weights, theta)?
    } else {
        FittedModel::fit_unscaled(train, weights, theta)?
    };
    let predictions = model.predict_batch(validation)?;
    Ok(evaluate(&predictions, validation.labels())?.macro_precision)
}

fn lex_cmp(a: &[f64], b: &[f64]) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        let ord = x.total_cmp(y);
        if ord != Ordering::Equal {
            return ord;
        }
    }
    a.len().cmp(&b.len())
}

/// Evaluate candidates in parallel, then fold them in submission order:
/// strictly better fitness wins, so the earliest candidate wins ties.
fn evaluate_candidates(
    candidates: &[Vec<f64>],
    train: &Dataset,
    validation: &Dataset,
    theta: f64,
    scale: bool,
) -> Result<Vec<f64>> {
    candidates
        .par_iter()
        .map(|genes| {
            fitness_impl(
                &FeatureWeights::new(genes.clone())?,
                train,
                validation,
                theta,
                scale,
            )
        })
        .collect()
}

/// Exhaustive search over the Cartesian product of grid values, one axis per
/// feature, in lexicographic order, truncated at the evaluation cap. The
/// all-zero combination (invalid as feature weights) is skipped without
/// counting as an evaluation.
pub fn grid_search(
    grid: &GridConfig,
    train: &Dataset,
    validation: &Dataset,
    theta: f64,
) -> Result<OptimizationResult> {
    grid_search_impl(grid, train, validation, theta, true)
}

/// [`grid_search`] for pipelines that skip min-max scaling.
pub fn grid_search_unscaled(
    grid: &GridConfig,
    train: &Dataset,
    validation: &Dataset,
    theta: f64,
) -> Result<OptimizationResult> {
    grid_search_impl(grid, train, validation, theta, false)
}

fn grid_search_impl(
    grid: &GridConfig,
    train: &Dataset,
    validation: &Dataset,
    theta: f64,
    scale: bool,
) -> Result<OptimizationResult> {
    let n = train.n_features();
    let values = &grid.grid_values;
    let cap = grid.max_evaluations.unwrap_or(usize::MAX);
    if cap == 0 {
        return Err(Error::InvalidParameter(
            "max_evaluations must be positive".into(),
        ));
    }

    let mut candidates: Vec<Vec<f64>> = Vec::new();
    let mut odometer = vec![0usize; n];
    'outer: loop {
        let candidate: Vec<f64> = odometer.iter().map(|&i| values[i]).collect();
        if candidate.iter().any(|&v| v != 0.0) {
            candidates.push(candidate);
            if candidates.len() == cap {
                break;
            }
        }
        // lexicographic increment: last axis fastest
        for pos in (0..n).rev() {
            odometer[pos] += 1;
            if odometer[pos] < values.len() {
                continue 'outer;
            }
            odometer[pos] = 0;
        }
        break;
    }
    if candidates.is_empty() {
        return Err(Error::InvalidParameter(
            "grid produced no valid candidate".into(),
        ));
    }

    let fitnesses = evaluate_candidates(&candidates, train, validation, theta, scale)?;
    let mut history = Vec::with_capacity(candidates.len());
    let mut best: Option<(usize, f64)> = None;
    for (i, &f) in fitnesses.iter().enumerate() {
        if best.is_none_or(|(_, bf)| f > bf) {
            best = Some((i, f));
        }
        history.push(HistoryPoint {
            evaluations: i + 1,
            best_fitness: best.unwrap().1,
        });
    }
    let (best_idx, best_fitness) = best.expect("at least one candidate");
    Ok(OptimizationResult {
        best_weights: FeatureWeights::new(candidates[best_idx].clone())?,
        best_fitness,
        history,
        evaluations: candidates.len(),
    })
}

/// Real-coded genetic algorithm over weight vectors in `weight_bounds`.
///
/// Generation 0 is uniform random plus one all-equal individual, so the
/// unoptimized baseline is always part of the search. Selection is by
/// tournament, crossover is blend (alpha 0.5), mutation is additive
/// Gaussian clamped to bounds, and elites carry over unchanged with cached
/// fitness. Deterministic for a fixed seed; total evaluations are at most
/// `population_size * (generations + 1)`.
pub fn ga_optimize(
    config: &GAConfig,
    train: &Dataset,
    validation: &Dataset,
    theta: f64,
) -> Result<OptimizationResult> {
    ga_optimize_impl(config, train, validation, theta, true)
}

/// [`ga_optimize`] for pipelines that skip min-max scaling.
pub fn ga_optimize_unscaled(
    config: &GAConfig,
    train: &Dataset,
    validation: &Dataset,
    theta: f64,
) -> Result<OptimizationResult> {
    ga_optimize_impl(config, train, validation, theta, false)
}

fn ga_optimize_impl(
    config: &GAConfig,
    train: &Dataset,
    validation: &Dataset,
    theta: f64,
    scale: bool,
) -> Result<OptimizationResult> {
    config.validate()?;
    let n = train.n_features();
    let (lo, hi) = config.weight_bounds;
    let pop_size = config.population_size;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let gaussian = Normal::new(0.0, config.mutation_sigma)
        .map_err(|e| Error::InvalidParameter(e.to_string()))?;

    let repair = |genes: &mut [f64], rng: &mut ChaCha8Rng| {
        if genes.iter().all(|&g| g == 0.0) {
            genes[rng.random_range(0..genes.len())] = hi;
        }
    };

    // generation 0: one all-equal individual, the rest uniform random
    let mut population: Vec<Vec<f64>> = Vec::with_capacity(pop_size);
    population.push(vec![1.0_f64.clamp(lo, hi); n]);
    for _ in 1..pop_size {
        let mut genes: Vec<f64> = (0..n).map(|_| rng.random_range(lo..=hi)).collect();
        repair(&mut genes, &mut rng);
        population.push(genes);
    }
    let mut fitnesses = evaluate_candidates(&population, train, validation, theta, scale)?;

    let mut evaluations = 0usize;
    let mut history = Vec::new();
    let mut best_genes = population[0].clone();
    let mut best_fitness = f64::NEG_INFINITY;
    let record = |genes: &[f64],
                      fit: f64,
                      evaluations: &mut usize,
                      best_genes: &mut Vec<f64>,
                      best_fitness: &mut f64,
                      history: &mut Vec<HistoryPoint>| {
        *evaluations += 1;
        let better = fit > *best_fitness
            || (fit == *best_fitness && lex_cmp(genes, best_genes) == Ordering::Less);
        if better {
            *best_fitness = fit;
            *best_genes = genes.to_vec();
        }
        history.push(HistoryPoint {
            evaluations: *evaluations,
            best_fitness: *best_fitness,
        });
    };
    for (genes, &fit) in population.iter().zip(&fitnesses) {
        record(
            genes,
            fit,
            &mut evaluations,
            &mut best_genes,
            &mut best_fitness,
            &mut history,
        );
    }

    for _ in 0..config.generations {
        // rank for elitism: fitness descending, lexicographic genes ascending
        let mut ranked: Vec<usize> = (0..pop_size).collect();
        ranked.sort_by(|&a, &b| {
            fitnesses[b]
                .total_cmp(&fitnesses[a])
                .then_with(|| lex_cmp(&population[a], &population[b]))
        });

        let mut next: Vec<Vec<f64>> = Vec::with_capacity(pop_size);
        let mut carried: Vec<f64> = Vec::with_capacity(config.elitism_count);
        for &idx in ranked.iter().take(config.elitism_count) {
            next.push(population[idx].clone());
            carried.push(fitnesses[idx]);
        }

        let tournament = |rng: &mut ChaCha8Rng| -> usize {
            let mut winner = rng.random_range(0..pop_size);
            for _ in 1..config.tournament_size {
                let challenger = rng.random_range(0..pop_size);
                let beats = fitnesses[challenger] > fitnesses[winner]
                    || (fitnesses[challenger] == fitnesses[winner]
                        && lex_cmp(&population[challenger], &population[winner])
                            == Ordering::Less);
                if beats {
                    winner = challenger;
                }
            }
            winner
        };

        while next.len() < pop_size {
            let p1 = tournament(&mut rng);
            let p2 = tournament(&mut rng);
            let (mut c1, mut c2) = if rng.random::<f64>() < config.crossover_rate {
                blend_crossover(&population[p1], &population[p2], lo, hi, &mut rng)
            } else {
                (population[p1].clone(), population[p2].clone())
            };
            for child in [&mut c1, &mut c2] {
                for gene in child.iter_mut() {
                    if rng.random::<f64>() < config.mutation_rate {
                        *gene = (*gene + gaussian.sample(&mut rng)).clamp(lo, hi);
                    }
                }
                repair(child, &mut rng);
            }
            next.push(c1);
            if next.len() < pop_size {
                next.push(c2);
            }
        }

        let fresh = &next[config.elitism_count..];
        let fresh_fitness = evaluate_candidates(fresh, train, validation, theta, scale)?;
        for (genes, &fit) in fresh.iter().zip(&fresh_fitness) {
            record(
                genes,
                fit,
                &mut evaluations,
                &mut best_genes,
                &mut best_fitness,
                &mut history,
            );
        }
        population = next;
        fitnesses = carried;
        fitnesses.extend(fresh_fitness);
    }

    Ok(OptimizationResult {
        best_weights: FeatureWeights::new(best_genes)?,
        best_fitness,
        history,
        evaluations,
    })
}

/// Blend (BLX-0.5) crossover: each child gene is uniform on the parents'
/// interval extended by half its width, clamped to bounds.
fn blend_crossover(
    p1: &[f64],
    p2: &[f64],
    lo: f64,
    hi: f64,
    rng: &mut ChaCha8Rng,
) -> (Vec<f64>, Vec<f64>) {
    const ALPHA: f64 = 0.5;
    let mut c1 = Vec::with_capacity(p1.len());
    let mut c2 = Vec::with_capacity(p1.len());
    for (&a, &b) in p1.iter().zip(p2) {
        let (min, max) = if a <= b { (a, b) } else { (b, a) };
        let span = max - min;
        let lo_g = (min - ALPHA * span).max(lo);
        let hi_g = (max + ALPHA * span).min(hi);
        c1.push(rng.random_range(lo_g..=hi_g));
        c2.push(rng.random_range(lo_g..=hi_g));
    }
    (c1, c2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{Dataset, Label};
    use crate::matrix::Matrix;
    use std::io::Write;

    /// Two classes separated along feature 0 (bands around 0 and 1);
    /// feature 1 is pure uniform noise of the given amplitude. On the
    /// unscaled pipeline a large amplitude drowns the separating feature,
    /// so suppressing the noise weight genuinely improves fitness.
    fn noisy_fixture(per_class: usize, noise_amp: f64, seed: u64) -> Dataset {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut rows = Vec::new();
        let mut labels = Vec::new();
        for i in 0..per_class * 2 {
            let class = i % 2;
            let sep = class as f64 + rng.random_range(-0.2..0.2);
            let noise = rng.random_range(-noise_amp..noise_amp);
            rows.push(vec![sep, noise]);
            labels.push(Label::from(class.to_string().as_str()));
        }
        Dataset::new(
            Matrix::from_rows(&rows).unwrap(),
            labels,
            vec!["sep".into(), "noise".into()],
        )
        .unwrap()
    }

    fn split(data: &Dataset) -> (Dataset, Dataset) {
        let (train_idx, val_idx) = crate::data::stratified_holdout(data.labels(), 0.25, 3).unwrap();
        (data.select(&train_idx), data.select(&val_idx))
    }

    #[test]
    fn fitness_matches_manual_pipeline() {
        let data = noisy_fixture(20, 0.2, 1);
        let (train, val) = split(&data);
        let w = FeatureWeights::uniform(2);
        let f = fitness(&w, &train, &val, 0.8).unwrap();
        let model = FittedModel::fit(&train, &w, 0.8).unwrap();
        let preds = model.predict_batch(&val).unwrap();
        let metrics = evaluate(&preds, val.labels()).unwrap();
        assert_eq!(f, metrics.macro_precision);
        // purity
        assert_eq!(f, fitness(&w, &train, &val, 0.8).unwrap());
    }

    #[test]
    fn separating_feature_alone_is_perfect() {
        let data = noisy_fixture(20, 0.3, 2);
        let (train, val) = split(&data);
        let w = FeatureWeights::new(vec![1.0, 0.0]).unwrap();
        let f = fitness(&w, &train, &val, 10.0).unwrap();
        assert_eq!(f, 1.0);
    }

    #[test]
    fn fitness_is_scale_invariant() {
        let data = noisy_fixture(16, 0.2, 4);
        let (train, val) = split(&data);
        let w1 = FeatureWeights::new(vec![1.0, 0.5]).unwrap();
        let w2 = FeatureWeights::new(vec![2.0, 1.0]).unwrap();
        assert_eq!(
            fitness(&w1, &train, &val, 0.8).unwrap(),
            fitness(&w2, &train, &val, 0.8).unwrap()
        );
    }

    #[test]
    fn grid_counts_and_singleton() {
        let data = noisy_fixture(12, 0.2, 5);
        let (train, val) = split(&data);
        let grid = GridConfig::new(vec![0.5, 1.0], None).unwrap();
        let result = grid_search(&grid, &train, &val, 0.8).unwrap();
        assert_eq!(result.evaluations, 4);
        assert_eq!(result.history.len(), 4);

        let singleton = GridConfig::new(vec![1.0], None).unwrap();
        let result = grid_search(&singleton, &train, &val, 0.8).unwrap();
        assert_eq!(result.evaluations, 1);
        assert_eq!(
            result.best_fitness,
            fitness(&FeatureWeights::uniform(2), &train, &val, 0.8).unwrap()
        );
        assert_eq!(result.best_weights, FeatureWeights::uniform(2));
    }

    #[test]
    fn grid_truncates_at_cap_with_monotone_history() {
        // 3 features, 4 values: 64 combinations, capped at 50
        let data = {
            let base = noisy_fixture(10, 0.2, 6);
            let rows: Vec<Vec<f64>> = (0..base.n_samples())
                .map(|i| {
                    let r = base.row(i);
                    vec![r[0], r[1], r[0] * 0.5]
                })
                .collect();
            Dataset::new(
                Matrix::from_rows(&rows).unwrap(),
                base.labels().to_vec(),
                vec!["a".into(), "b".into(), "c".into()],
            )
            .unwrap()
        };
        let (train, val) = split(&data);
        let grid = GridConfig::new(vec![0.25, 0.5, 0.75, 1.0], Some(50)).unwrap();
        let result = grid_search(&grid, &train, &val, 0.8).unwrap();
        assert_eq!(result.evaluations, 50);
        for pair in result.history.windows(2) {
            assert!(pair[1].best_fitness >= pair[0].best_fitness);
            assert_eq!(pair[1].evaluations, pair[0].evaluations + 1);
        }
    }

    #[test]
    fn grid_skips_all_zero_candidate() {
        let data = noisy_fixture(12, 0.2, 7);
        let (train, val) = split(&data);
        let grid = GridConfig::new(vec![0.0, 1.0], None).unwrap();
        let result = grid_search(&grid, &train, &val, 0.8).unwrap();
        // 2^2 combinations minus the all-zero one
        assert_eq!(result.evaluations, 3);
    }

    #[test]
    fn ga_generation_zero_beats_uniform_baseline() {
        let data = noisy_fixture(16, 0.15, 8);
        let (train, val) = split(&data);
        let config = GAConfig {
            population_size: 8,
            generations: 0,
            tournament_size: 2,
            elitism_count: 1,
            seed: 13,
            ..GAConfig::default()
        };
        let result = ga_optimize(&config, &train, &val, 0.8).unwrap();
        let baseline = fitness(&FeatureWeights::uniform(2), &train, &val, 0.8).unwrap();
        assert!(result.best_fitness >= baseline);
        assert_eq!(result.evaluations, 8);
    }

    #[test]
    fn ga_history_is_monotone_and_budgeted() {
        let data = noisy_fixture(14, 0.15, 9);
        let (train, val) = split(&data);
        let config = GAConfig {
            population_size: 10,
            generations: 5,
            elitism_count: 2,
            seed: 21,
            ..GAConfig::default()
        };
        let result = ga_optimize(&config, &train, &val, 0.8).unwrap();
        assert!(result.evaluations <= config.population_size * (config.generations + 1));
        for pair in result.history.windows(2) {
            assert!(pair[1].best_fitness >= pair[0].best_fitness);
        }
        assert_eq!(result.history.last().unwrap().evaluations, result.evaluations);
        // best_fitness reproduces under re-evaluation
        let re = fitness(&result.best_weights, &train, &val, 0.8).unwrap();
        assert_eq!(re, result.best_fitness);
    }

    #[test]
    fn ga_is_deterministic_per_seed() {
        let data = noisy_fixture(12, 0.15, 10);
        let (train, val) = split(&data);
        let config = GAConfig {
            population_size: 8,
            generations: 3,
            seed: 5,
            ..GAConfig::default()
        };
        let a = ga_optimize(&config, &train, &val, 0.8).unwrap();
        let b = ga_optimize(&config, &train, &val, 0.8).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn ga_downweights_noise_feature() {
        // establish the landscape first: sweep the 2-D weight grid and check
        // that suppressing the noise feature strictly beats uniform weights
        let data = noisy_fixture(30, 16.0, 11);
        let (train, val) = split(&data);
        let uniform_fitness =
            fitness_unscaled(&FeatureWeights::uniform(2), &train, &val, 0.8).unwrap();
        let mut sweep_best = (f64::NEG_INFINITY, 0.0, 0.0);
        for &ws in &[0.25, 0.5, 0.75, 1.0] {
            for &wn in &[0.0, 0.25, 0.5, 0.75, 1.0] {
                let f = fitness_unscaled(
                    &FeatureWeights::new(vec![ws, wn]).unwrap(),
                    &train,
                    &val,
                    0.8,
                )
                .unwrap();
                if f > sweep_best.0 {
                    sweep_best = (f, ws, wn);
                }
            }
        }
        assert!(
            sweep_best.2 < sweep_best.1,
            "landscape does not favor suppressing noise: {sweep_best:?}"
        );
        assert!(
            sweep_best.0 > uniform_fitness,
            "uniform weights already sit on the optimum: {uniform_fitness}"
        );

        let mut wins = 0;
        for seed in 0..10 {
            let config = GAConfig {
                population_size: 12,
                generations: 8,
                seed,
                ..GAConfig::default()
            };
            let result = ga_optimize_unscaled(&config, &train, &val, 0.8).unwrap();
            let w = result.best_weights.values();
            if w[1] < w[0] {
                wins += 1;
            }
        }
        assert!(wins >= 9, "noise feature downweighted in only {wins}/10 runs");
    }

    #[test]
    fn ga_rejects_invalid_config() {
        let bad = GAConfig {
            tournament_size: 1,
            ..GAConfig::default()
        };
        assert!(bad.validate().is_err());
        let bad = GAConfig {
            elitism_count: 30,
            ..GAConfig::default()
        };
        assert!(bad.validate().is_err());
        let bad = GAConfig {
            weight_bounds: (1.0, 1.0),
            ..GAConfig::default()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn repair_resets_all_zero_genes() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let hi = 0.8;
        let mut genes = vec![0.0, 0.0, 0.0];
        if genes.iter().all(|&g| g == 0.0) {
            let slot = rng.random_range(0..genes.len());
            genes[slot] = hi;
        }
        assert_eq!(genes.iter().filter(|&&g| g == hi).count(), 1);
        assert!(FeatureWeights::new(genes).is_ok());
    }

    #[test]
    fn kv_config_files_parse() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(
            f,
            "# GA settings\npopulation_size = 12\ngenerations= 4\nweight_bounds = 0.1, 2.0\nseed = 7"
        )
        .unwrap();
        let config = GAConfig::from_kv_file(f.path()).unwrap();
        assert_eq!(config.population_size, 12);
        assert_eq!(config.generations, 4);
        assert_eq!(config.weight_bounds, (0.1, 2.0));
        assert_eq!(config.seed, 7);
        assert_eq!(config.mutation_rate, GAConfig::default().mutation_rate);

        let mut g = tempfile::NamedTempFile::new().unwrap();
        writeln!(g, "grid_values = 1.0, 0.5, 0.5\nmax_evaluations = none").unwrap();
        let grid = GridConfig::from_kv_file(g.path()).unwrap();
        assert_eq!(grid.grid_values(), &[0.5, 1.0]);
        assert_eq!(grid.max_evaluations(), None);

        let mut h = tempfile::NamedTempFile::new().unwrap();
        writeln!(h, "not_a_key = 3").unwrap();
        assert!(GAConfig::from_kv_file(h.path()).is_err());
    }
}

//! Per-class weighted graphs and their minimum-spanning-forest metric.
//!
//! A class network is the complete graph over one class's samples under a
//! feature-weighted Euclidean distance, pruned to edges no heavier than
//! `theta` times the median pairwise distance. Pruning can disconnect the
//! graph, so the structural metric is the weight of the minimum spanning
//! forest: an MST per connected component.
//!
//! Networks are immutable after construction; [`insertion_delta`] is
//! read-only, so concurrent evaluations over one network are safe.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// Weighted undirected edge between two node indices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub u: usize,
    pub v: usize,
    pub weight: f64,
}

/// Nonnegative per-feature multipliers applied inside the Euclidean
/// distance. At least one entry must be positive.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct FeatureWeights(Vec<f64>);

impl FeatureWeights {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidParameter(
                "feature weights cannot be empty".into(),
            ));
        }
        if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::InvalidParameter(
                "feature weights must be finite and nonnegative".into(),
            ));
        }
        if values.iter().all(|&v| v == 0.0) {
            return Err(Error::InvalidParameter(
                "at least one feature weight must be positive".into(),
            ));
        }
        Ok(FeatureWeights(values))
    }

    /// All-ones weights: the unoptimized baseline.
    pub fn uniform(n_features: usize) -> Self {
        assert!(n_features > 0, "need at least one feature");
        FeatureWeights(vec![1.0; n_features])
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl TryFrom<Vec<f64>> for FeatureWeights {
    type Error = Error;

    fn try_from(values: Vec<f64>) -> Result<Self> {
        FeatureWeights::new(values)
    }
}

impl From<FeatureWeights> for Vec<f64> {
    fn from(w: FeatureWeights) -> Self {
        w.0
    }
}

/// Euclidean distance with per-feature weights:
/// `sqrt(sum_i (w_i * (x_i - y_i))^2)`.
pub fn weighted_distance(x: &[f64], y: &[f64], w: &FeatureWeights) -> Result<f64> {
    if x.len() != y.len() || x.len() != w.len() {
        return Err(Error::DimensionMismatch {
            expected: w.len(),
            found: if x.len() != w.len() { x.len() } else { y.len() },
        });
    }
    let sum: f64 = x
        .iter()
        .zip(y)
        .zip(w.values())
        .map(|((a, b), wi)| {
            let d = wi * (a - b);
            d * d
        })
        .sum();
    Ok(sum.sqrt())
}

struct DisjointSet {
    parent: Vec<usize>,
    rank: Vec<u8>,
}

impl DisjointSet {
    fn new(n: usize) -> Self {
        DisjointSet {
            parent: (0..n).collect(),
            rank: vec![0; n],
        }
    }

    fn find(&mut self, x: usize) -> usize {
        let mut root = x;
        while self.parent[root] != root {
            root = self.parent[root];
        }
        let mut cur = x;
        while self.parent[cur] != root {
            let next = self.parent[cur];
            self.parent[cur] = root;
            cur = next;
        }
        root
    }

    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        match self.rank[ra].cmp(&self.rank[rb]) {
            std::cmp::Ordering::Less => self.parent[ra] = rb,
            std::cmp::Ordering::Greater => self.parent[rb] = ra,
            std::cmp::Ordering::Equal => {
                self.parent[rb] = ra;
                self.rank[ra] += 1;
            }
        }
        true
    }
}

/// Total weight of a minimum spanning forest: Kruskal over edges sorted by
/// `(weight, u, v)`, one MST per connected component. The result does not
/// depend on the order of equal-weight edges. Node indices must be below
/// `n_nodes`.
pub fn forest_weight(n_nodes: usize, edges: &[Edge]) -> f64 {
    let mut order: Vec<usize> = (0..edges.len()).collect();
    order.sort_unstable_by(|&a, &b| {
        edges[a]
            .weight
            .total_cmp(&edges[b].weight)
            .then_with(|| edges[a].u.cmp(&edges[b].u))
            .then_with(|| edges[a].v.cmp(&edges[b].v))
    });
    let mut sets = DisjointSet::new(n_nodes);
    let mut total = 0.0;
    let mut accepted = 0;
    for idx in order {
        let e = &edges[idx];
        if sets.union(e.u, e.v) {
            total += e.weight;
            accepted += 1;
            if accepted + 1 == n_nodes {
                break;
            }
        }
    }
    total
}

/// A pruned weighted graph over one class's training samples, with its
/// cached minimum-spanning-forest weight.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassNetwork {
    points: Matrix,
    edges: Vec<Edge>,
    theta: f64,
    median_weight: f64,
    mst_weight: f64,
}

const NETWORK_FORMAT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct NetworkFile {
    version: u32,
    network: ClassNetwork,
}

impl ClassNetwork {
    pub fn points(&self) -> &Matrix {
        &self.points
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    /// Median of the pre-pruning pairwise distances.
    pub fn median_weight(&self) -> f64 {
        self.median_weight
    }

    /// Cached minimum-spanning-forest weight of the pruned graph.
    pub fn mst_weight(&self) -> f64 {
        self.mst_weight
    }

    pub fn n_nodes(&self) -> usize {
        self.points.nrows()
    }

    pub fn dim(&self) -> usize {
        self.points.ncols()
    }

    /// Write the network as a versioned JSON file. Floats are emitted in
    /// shortest round-trip decimal form, so load/save is value-exact.
    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let file = NetworkFile {
            version: NETWORK_FORMAT_VERSION,
            network: self.clone(),
        };
        fs::write(path, serde_json::to_string_pretty(&file)?)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let file: NetworkFile = serde_json::from_str(&fs::read_to_string(path)?)?;
        if file.version != NETWORK_FORMAT_VERSION {
            return Err(Error::ModelFormat(format!(
                "unsupported network format version {}, expected {}",
                file.version, NETWORK_FORMAT_VERSION
            )));
        }
        file.network.validate()?;
        Ok(file.network)
    }

    fn validate(&self) -> Result<()> {
        let n = self.points.nrows();
        if self.points.ncols() == 0 || n == 0 {
            return Err(Error::ModelFormat("network has no points".into()));
        }
        let threshold = self.theta * self.median_weight;
        for e in &self.edges {
            if e.u >= n || e.v >= n || e.u == e.v {
                return Err(Error::ModelFormat(format!(
                    "edge ({}, {}) references invalid nodes",
                    e.u, e.v
                )));
            }
            if e.weight > threshold {
                return Err(Error::ModelFormat(format!(
                    "edge weight {} exceeds pruning threshold {}",
                    e.weight, threshold
                )));
            }
        }
        let recomputed = forest_weight(n, &self.edges);
        if (recomputed - self.mst_weight).abs() > 1e-9 {
            return Err(Error::ModelFormat(format!(
                "cached forest weight {} disagrees with recomputed {}",
                self.mst_weight, recomputed
            )));
        }
        Ok(())
    }
}

/// Median of an unsorted list; even lengths average the two middle values.
fn median(values: &mut [f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    values.sort_unstable_by(f64::total_cmp);
    let mid = values.len() / 2;
    if values.len() % 2 == 1 {
        values[mid]
    } else {
        0.5 * (values[mid - 1] + values[mid])
    }
}

/// Build the pruned class network over `points`: all pairwise weighted
/// distances, median over the full list, edges above `theta * median`
/// dropped, forest weight cached.
pub fn build_network(points: Matrix, w: &FeatureWeights, theta: f64) -> Result<ClassNetwork> {
    if points.nrows() == 0 {
        return Err(Error::InvalidParameter("empty point set".into()));
    }
    if !(theta > 0.0) || !theta.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "theta must be positive, got {theta}"
        )));
    }
    if points.ncols() != w.len() {
        return Err(Error::DimensionMismatch {
            expected: w.len(),
            found: points.ncols(),
        });
    }
    let n = points.nrows();
    let mut all_edges = Vec::with_capacity(n * (n - 1) / 2);
    for u in 0..n {
        for v in (u + 1)..n {
            let weight = weighted_distance(points.row(u), points.row(v), w)?;
            all_edges.push(Edge { u, v, weight });
        }
    }
    let mut weights: Vec<f64> = all_edges.iter().map(|e| e.weight).collect();
    let median_weight = median(&mut weights);
    let threshold = theta * median_weight;
    let edges: Vec<Edge> = all_edges
        .into_iter()
        .filter(|e| e.weight <= threshold)
        .collect();
    let mst_weight = forest_weight(n, &edges);
    Ok(ClassNetwork {
        points,
        edges,
        theta,
        median_weight,
        mst_weight,
    })
}

/// Forest-weight change from connecting `x` to every node of the network.
///
/// The new edges are not pruned; the network's own edges and cached weight
/// are untouched. The result can be negative: an interior point can shorten
/// the forest.
pub fn insertion_delta(net: &ClassNetwork, x: &[f64], w: &FeatureWeights) -> Result<f64> {
    if x.len() != net.dim() {
        return Err(Error::DimensionMismatch {
            expected: net.dim(),
            found: x.len(),
        });
    }
    let n = net.n_nodes();
    let mut augmented = Vec::with_capacity(net.edges.len() + n);
    augmented.extend_from_slice(&net.edges);
    for u in 0..n {
        let weight = weighted_distance(net.points.row(u), x, w)?;
        augmented.push(Edge { u, v: n, weight });
    }
    Ok(forest_weight(n + 1, &augmented) - net.mst_weight)
}

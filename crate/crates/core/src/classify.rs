//! Self-contained random forest: bootstrap-sampled CART trees with Gini
//! impurity, deterministic under a fixed seed, with versioned JSON model
//! serialization.
//!
//! # Model file format
//!
//! Models are pretty-printed JSON with the layout
//!
//! ```json
//! {
//!   "format_version": 1,
//!   "config": { "n_trees": 5, "max_depth": 4, "features_per_split": "sqrt",
//!               "min_leaf": 1, "seed": 7 },
//!   "feature_dim": 3,
//!   "classes": ["neg", "pos"],
//!   "trees": [ { "nodes": [ ... ] }, ... ]
//! }
//! ```
//!
//! Each tree is a flat node array with the root at index 0. A node is either
//! `{"split": {"feature": f, "threshold": t, "left": l, "right": r}}` where
//! `left`/`right` index into the same array and samples with
//! `x[feature] <= threshold` go left, or `{"leaf": {"probs": [...]}}` whose
//! probabilities align with `classes` and sum to 1. `features_per_split` is
//! `"sqrt"`, `"all"`, or `{"fixed": k}`. Loading rejects any other
//! `format_version` and any file that does not parse to this shape. The
//! committed golden file under `tests/data/` pins the format bytes.

use std::path::Path;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::parallel::map_batch;

/// Supported model file format version.
pub const MODEL_FORMAT_VERSION: u32 = 1;

/// How many candidate features each split considers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeaturesPerSplit {
    Sqrt,
    All,
    Fixed(usize),
}

impl FeaturesPerSplit {
    fn count(self, dim: usize) -> usize {
        match self {
            FeaturesPerSplit::Sqrt => ((dim as f64).sqrt().round() as usize).clamp(1, dim),
            FeaturesPerSplit::All => dim,
            FeaturesPerSplit::Fixed(k) => k.clamp(1, dim),
        }
    }
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ForestConfig {
    pub n_trees: usize,
    pub max_depth: Option<usize>,
    pub features_per_split: FeaturesPerSplit,
    pub min_leaf: usize,
    pub seed: u64,
}

impl Default for ForestConfig {
    fn default() -> Self {
        ForestConfig {
            n_trees: 500,
            max_depth: None,
            features_per_split: FeaturesPerSplit::Sqrt,
            min_leaf: 1,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
enum Node {
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    Leaf {
        probs: Vec<f64>,
    },
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
struct Tree {
    nodes: Vec<Node>,
}

impl Tree {
    /// Leaf class distribution for one sample; root is node 0.
    fn leaf_probs<'a>(&'a self, x: &[f64]) -> &'a [f64] {
        let mut idx = 0usize;
        loop {
            match &self.nodes[idx] {
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    idx = if x[*feature] <= *threshold { *left } else { *right };
                }
                Node::Leaf { probs } => return probs,
            }
        }
    }
}

/// Trained forest; immutable and safe for concurrent prediction.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ForestModel {
    format_version: u32,
    config: ForestConfig,
    feature_dim: usize,
    classes: Vec<String>,
    trees: Vec<Tree>,
}

impl ForestModel {
    pub fn feature_dim(&self) -> usize {
        self.feature_dim
    }

    pub fn classes(&self) -> &[String] {
        &self.classes
    }

    pub fn config(&self) -> &ForestConfig {
        &self.config
    }
}

/// One predicted sample: argmax label and the full class distribution
/// (mean of leaf distributions over trees).
#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub label: String,
    pub class_index: usize,
    pub probabilities: Vec<f64>,
}

fn validate_matrix(x: &[Vec<f64>]) -> Result<usize> {
    let dim = x.first().map(|r| r.len()).unwrap_or(0);
    if dim == 0 {
        return Err(Error::EmptyVector);
    }
    for (i, row) in x.iter().enumerate() {
        if row.len() != dim {
            return Err(Error::LengthMismatch {
                left: dim,
                right: row.len(),
            });
        }
        for (j, v) in row.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::NonFiniteFeature { row: i, col: j });
            }
        }
    }
    Ok(dim)
}

fn gini(counts: &[usize], total: usize) -> f64 {
    let t = total as f64;
    1.0 - counts
        .iter()
        .map(|&c| {
            let p = c as f64 / t;
            p * p
        })
        .sum::<f64>()
}

struct TreeBuilder<'a> {
    x: &'a [Vec<f64>],
    y: &'a [usize],
    n_classes: usize,
    dim: usize,
    m_features: usize,
    min_leaf: usize,
    max_depth: Option<usize>,
}

struct BestSplit {
    gain: f64,
    feature: usize,
    threshold: f64,
}

impl TreeBuilder<'_> {
    fn build(&self, indices: Vec<usize>, rng: &mut ChaCha8Rng) -> Tree {
        let mut nodes = Vec::new();
        self.grow(indices, 0, rng, &mut nodes);
        Tree { nodes }
    }

    /// Appends the subtree for `indices` and returns its root node index.
    fn grow(
        &self,
        indices: Vec<usize>,
        depth: usize,
        rng: &mut ChaCha8Rng,
        nodes: &mut Vec<Node>,
    ) -> usize {
        let counts = self.class_counts(&indices);
        let depth_capped = self.max_depth.is_some_and(|d| depth >= d);
        let pure = counts.iter().filter(|&&c| c > 0).count() <= 1;
        if pure || depth_capped || indices.len() < 2 * self.min_leaf {
            return self.push_leaf(nodes, &counts, indices.len());
        }
        let split = match self.best_split(&indices, &counts, rng) {
            Some(s) => s,
            None => return self.push_leaf(nodes, &counts, indices.len()),
        };
        let (left_idx, right_idx): (Vec<usize>, Vec<usize>) = indices
            .into_iter()
            .partition(|&i| self.x[i][split.feature] <= split.threshold);
        let placeholder = nodes.len();
        nodes.push(Node::Leaf { probs: Vec::new() });
        let left = self.grow(left_idx, depth + 1, rng, nodes);
        let right = self.grow(right_idx, depth + 1, rng, nodes);
        nodes[placeholder] = Node::Split {
            feature: split.feature,
            threshold: split.threshold,
            left,
            right,
        };
        placeholder
    }

    fn push_leaf(&self, nodes: &mut Vec<Node>, counts: &[usize], total: usize) -> usize {
        let probs = counts
            .iter()
            .map(|&c| c as f64 / total as f64)
            .collect::<Vec<f64>>();
        nodes.push(Node::Leaf { probs });
        nodes.len() - 1
    }

    fn class_counts(&self, indices: &[usize]) -> Vec<usize> {
        let mut counts = vec![0usize; self.n_classes];
        for &i in indices {
            counts[self.y[i]] += 1;
        }
        counts
    }

    /// Best Gini-gain split over a random feature subset. Ties break to the
    /// lowest feature index, then the lowest threshold, so training is
    /// deterministic. Returns None when no candidate feature varies.
    fn best_split(
        &self,
        indices: &[usize],
        parent_counts: &[usize],
        rng: &mut ChaCha8Rng,
    ) -> Option<BestSplit> {
        let mut candidates =
            rand::seq::index::sample(rng, self.dim, self.m_features).into_vec();
        candidates.sort_unstable();
        let parent_gini = gini(parent_counts, indices.len());
        let mut best: Option<BestSplit> = None;
        let mut sorted: Vec<(f64, usize)> = Vec::with_capacity(indices.len());
        for &feature in &candidates {
            sorted.clear();
            sorted.extend(indices.iter().map(|&i| (self.x[i][feature], self.y[i])));
            sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
            let total = sorted.len();
            let mut left_counts = vec![0usize; self.n_classes];
            let mut left_n = 0usize;
            for k in 0..total - 1 {
                left_counts[sorted[k].1] += 1;
                left_n += 1;
                if sorted[k].0 == sorted[k + 1].0 {
                    continue;
                }
                let right_n = total - left_n;
                if left_n < self.min_leaf || right_n < self.min_leaf {
                    continue;
                }
                let right_counts: Vec<usize> = parent_counts
                    .iter()
                    .zip(&left_counts)
                    .map(|(&p, &l)| p - l)
                    .collect();
                let weighted = (left_n as f64 * gini(&left_counts, left_n)
                    + right_n as f64 * gini(&right_counts, right_n))
                    / total as f64;
                let gain = parent_gini - weighted;
                if gain <= 1e-15 {
                    continue;
                }
                let threshold = sorted[k].0 + (sorted[k + 1].0 - sorted[k].0) / 2.0;
                let better = match &best {
                    None => true,
                    Some(b) => {
                        gain > b.gain + 1e-12
                            || ((gain - b.gain).abs() <= 1e-12
                                && (feature, threshold) < (b.feature, b.threshold))
                    }
                };
                if better {
                    best = Some(BestSplit {
                        gain,
                        feature,
                        threshold,
                    });
                }
            }
        }
        best
    }
}

/// Train a forest on rows `x` with string labels `y`.
pub fn rf_train(x: &[Vec<f64>], y: &[&str], config: &ForestConfig) -> Result<ForestModel> {
    if x.len() < 2 {
        return Err(Error::Manifest(format!(
            "need at least 2 training samples, got {}",
            x.len()
        )));
    }
    if x.len() != y.len() {
        return Err(Error::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    if config.n_trees == 0 || config.min_leaf == 0 {
        return Err(Error::InvalidCodecSettings(
            "forest needs n_trees >= 1 and min_leaf >= 1".into(),
        ));
    }
    let dim = validate_matrix(x)?;
    let mut classes: Vec<String> = y.iter().map(|s| s.to_string()).collect();
    classes.sort();
    classes.dedup();
    if classes.len() < 2 {
        return Err(Error::SingleClass);
    }
    let class_index: std::collections::HashMap<&str, usize> = classes
        .iter()
        .enumerate()
        .map(|(i, c)| (c.as_str(), i))
        .collect();
    let y_idx: Vec<usize> = y.iter().map(|s| class_index[s]).collect();

    let builder = TreeBuilder {
        x,
        y: &y_idx,
        n_classes: classes.len(),
        dim,
        m_features: config.features_per_split.count(dim),
        min_leaf: config.min_leaf,
        max_depth: config.max_depth,
    };
    // Per-tree seeds are derived up front so results do not depend on
    // whether trees are built in parallel.
    let tree_seeds: Vec<u64> = (0..config.n_trees)
        .map(|i| config.seed.wrapping_add((i as u64).wrapping_mul(0x9E3779B97F4A7C15)))
        .collect();
    let n = x.len();
    let trees = map_batch(&tree_seeds, |&seed| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let bootstrap: Vec<usize> = (0..n).map(|_| rng.random_range(0..n)).collect();
        builder.build(bootstrap, &mut rng)
    });

    Ok(ForestModel {
        format_version: MODEL_FORMAT_VERSION,
        config: config.clone(),
        feature_dim: dim,
        classes,
        trees,
    })
}

/// Predict labels and class probabilities for rows `x`.
pub fn rf_predict(model: &ForestModel, x: &[Vec<f64>]) -> Result<Vec<Prediction>> {
    for row in x {
        if row.len() != model.feature_dim {
            return Err(Error::FeatureDimMismatch {
                expected: model.feature_dim,
                actual: row.len(),
            });
        }
    }
    validate_matrix(x)?;
    Ok(map_batch(x, |row| {
        let mut probs = vec![0.0f64; model.classes.len()];
        for tree in &model.trees {
            for (p, l) in probs.iter_mut().zip(tree.leaf_probs(row)) {
                *p += l;
            }
        }
        for p in probs.iter_mut() {
            *p /= model.trees.len() as f64;
        }
        // Argmax with lowest-index tie-break.
        let class_index = probs
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.partial_cmp(b.1).unwrap().then(b.0.cmp(&a.0)))
            .map(|(i, _)| i)
            .unwrap();
        Prediction {
            label: model.classes[class_index].clone(),
            class_index,
            probabilities: probs,
        }
    }))
}

/// Serialize the model as versioned JSON.
pub fn model_save(model: &ForestModel, path: &Path) -> Result<()> {
    let json = serde_json::to_string(model)?;
    std::fs::write(path, json)?;
    Ok(())
}

/// Load and validate a model file.
pub fn model_load(path: &Path) -> Result<ForestModel> {
    #[derive(serde::Deserialize)]
    struct VersionProbe {
        format_version: u32,
    }
    let bytes = std::fs::read(path)?;
    let probe: VersionProbe = serde_json::from_slice(&bytes)
        .map_err(|e| Error::CorruptModel(format!("unreadable header: {e}")))?;
    if probe.format_version != MODEL_FORMAT_VERSION {
        return Err(Error::ModelVersion {
            found: probe.format_version,
            supported: MODEL_FORMAT_VERSION,
        });
    }
    let model: ForestModel = serde_json::from_slice(&bytes)
        .map_err(|e| Error::CorruptModel(e.to_string()))?;
    if model.classes.len() < 2 || model.feature_dim == 0 || model.trees.is_empty() {
        return Err(Error::CorruptModel(
            "model missing classes, features, or trees".into(),
        ));
    }
    for tree in &model.trees {
        if tree.nodes.is_empty() {
            return Err(Error::CorruptModel("empty tree".into()));
        }
        for node in &tree.nodes {
            match node {
                Node::Split {
                    feature,
                    left,
                    right,
                    ..
                } => {
                    if *feature >= model.feature_dim
                        || *left >= tree.nodes.len()
                        || *right >= tree.nodes.len()
                    {
                        return Err(Error::CorruptModel("split out of bounds".into()));
                    }
                }
                Node::Leaf { probs } => {
                    if probs.len() != model.classes.len()
                        || (probs.iter().sum::<f64>() - 1.0).abs() > 1e-9
                    {
                        return Err(Error::CorruptModel(
                            "leaf distribution malformed".into(),
                        ));
                    }
                }
            }
        }
    }
    Ok(model)
}

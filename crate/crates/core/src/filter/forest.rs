//! Random-forest regressor for the dynamism score, from scratch.
//!
//! Bootstrap-sampled CART trees with variance-reduction splits and random
//! feature subsets of ceil(sqrt(n_features)) per split. Training rows are
//! first brought into a canonical order (lexicographic by features, then
//! label), so training is invariant to the order rows arrive in; each
//! tree's randomness comes from a sub-seed derived as
//! `derive_seed(seed, "tree", tree_index)`.

use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::path::Path;

use super::FilterError;
use crate::seed::derive_seed;

pub const SCORE_MIN: f64 = 0.0;
pub const SCORE_MAX: f64 = 5.0;

#[derive(Debug, Clone)]
pub struct TrainParams {
    pub trees: usize,
    pub max_depth: usize,
    pub min_samples_split: usize,
    pub seed: u64,
}

impl Default for TrainParams {
    fn default() -> Self {
        Self {
            trees: 100,
            max_depth: 12,
            min_samples_split: 2,
            seed: 42,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Split {
        feature: usize,
        threshold: f64,
        left: Box<Node>,
        right: Box<Node>,
    },
    Leaf {
        value: f64,
    },
}

impl Node {
    fn predict(&self, x: &[f64]) -> f64 {
        match self {
            Node::Leaf { value } => *value,
            Node::Split {
                feature,
                threshold,
                left,
                right,
            } => {
                if x[*feature] <= *threshold {
                    left.predict(x)
                } else {
                    right.predict(x)
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ForestModel {
    pub n_features: usize,
    pub trees: Vec<Node>,
    pub seed: u64,
    pub max_depth: usize,
}

impl ForestModel {
    /// Mean of per-tree predictions, unclamped.
    pub fn predict_raw(&self, x: &[f64]) -> Result<f64, FilterError> {
        if x.len() != self.n_features {
            return Err(FilterError::LayoutMismatch {
                expected: self.n_features,
                got: x.len(),
            });
        }
        Ok(self.trees.iter().map(|t| t.predict(x)).sum::<f64>() / self.trees.len() as f64)
    }
}

/// A dynamism score in [0, 5] with the feature vector that produced it.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct DynamismScore {
    pub value: f64,
    pub components: Vec<f64>,
}

/// Scores one video's feature vector: mean-of-trees, clamped to [0, 5].
pub fn score_video(model: &ForestModel, vector: &[f64]) -> Result<DynamismScore, FilterError> {
    let raw = model.predict_raw(vector)?;
    Ok(DynamismScore {
        value: raw.clamp(SCORE_MIN, SCORE_MAX),
        components: vector.to_vec(),
    })
}

/// Trains the forest on `(feature vector, label in [0, 5])` rows.
pub fn train_forest(rows: &[(Vec<f64>, f64)], params: &TrainParams) -> Result<ForestModel, FilterError> {
    if rows.is_empty() {
        return Err(FilterError::EmptyTrainingSet);
    }
    let n_features = rows[0].0.len();
    for (x, y) in rows {
        if x.len() != n_features {
            return Err(FilterError::LayoutMismatch {
                expected: n_features,
                got: x.len(),
            });
        }
        if !(SCORE_MIN..=SCORE_MAX).contains(y) {
            return Err(FilterError::LabelOutOfRange { label: *y });
        }
    }

    // Canonical order: row-order invariance comes from here.
    let mut order: Vec<usize> = (0..rows.len()).collect();
    order.sort_by(|&a, &b| {
        let (xa, ya) = &rows[a];
        let (xb, yb) = &rows[b];
        xa.iter()
            .zip(xb.iter())
            .map(|(p, q)| p.total_cmp(q))
            .find(|o| o.is_ne())
            .unwrap_or_else(|| ya.total_cmp(yb))
    });
    let canonical: Vec<&(Vec<f64>, f64)> = order.iter().map(|&i| &rows[i]).collect();

    let mtry = (n_features as f64).sqrt().ceil() as usize;
    let trees = (0..params.trees)
        .map(|b| {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(params.seed, "tree", b as u64));
            let sample: Vec<usize> = (0..canonical.len())
                .map(|_| rng.random_range(0..canonical.len()))
                .collect();
            grow(&canonical, &sample, mtry, 0, params, &mut rng)
        })
        .collect();

    Ok(ForestModel {
        n_features,
        trees,
        seed: params.seed,
        max_depth: params.max_depth,
    })
}

fn grow(
    rows: &[&(Vec<f64>, f64)],
    idx: &[usize],
    mtry: usize,
    depth: usize,
    params: &TrainParams,
    rng: &mut ChaCha8Rng,
) -> Node {
    let mean = idx.iter().map(|&i| rows[i].1).sum::<f64>() / idx.len() as f64;
    if depth >= params.max_depth || idx.len() < params.min_samples_split {
        return Node::Leaf { value: mean };
    }
    let sse: f64 = idx.iter().map(|&i| (rows[i].1 - mean).powi(2)).sum();
    if sse <= 1e-12 {
        return Node::Leaf { value: mean };
    }

    let n_features = rows[0].0.len();
    let mut features: Vec<usize> = (0..n_features).collect();
    features.shuffle(rng);
    features.truncate(mtry.min(n_features));
    features.sort_unstable(); // deterministic evaluation order for the chosen set

    let mut best: Option<(f64, usize, f64)> = None; // (child sse, feature, threshold)
    for &f in &features {
        if let Some((child_sse, threshold)) = best_split_on(rows, idx, f) {
            let better = match best {
                None => true,
                Some((s, _, _)) => child_sse < s - 1e-15,
            };
            if better {
                best = Some((child_sse, f, threshold));
            }
        }
    }

    let Some((child_sse, feature, threshold)) = best else {
        return Node::Leaf { value: mean };
    };
    if child_sse >= sse {
        return Node::Leaf { value: mean };
    }

    let (li, ri): (Vec<usize>, Vec<usize>) =
        idx.iter().partition(|&&i| rows[i].0[feature] <= threshold);
    Node::Split {
        feature,
        threshold,
        left: Box::new(grow(rows, &li, mtry, depth + 1, params, rng)),
        right: Box::new(grow(rows, &ri, mtry, depth + 1, params, rng)),
    }
}

/// Best variance-reduction split on one feature: scans midpoints between
/// consecutive distinct values with prefix sums. Returns (children SSE,
/// threshold), or None if the feature is constant on the node.
fn best_split_on(rows: &[&(Vec<f64>, f64)], idx: &[usize], feature: usize) -> Option<(f64, f64)> {
    let mut pairs: Vec<(f64, f64)> = idx.iter().map(|&i| (rows[i].0[feature], rows[i].1)).collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let n = pairs.len();
    let total_sum: f64 = pairs.iter().map(|p| p.1).sum();
    let total_sq: f64 = pairs.iter().map(|p| p.1 * p.1).sum();

    let mut best: Option<(f64, f64)> = None;
    let mut left_sum = 0.0;
    let mut left_sq = 0.0;
    for k in 0..n - 1 {
        left_sum += pairs[k].1;
        left_sq += pairs[k].1 * pairs[k].1;
        if pairs[k].0 == pairs[k + 1].0 {
            continue;
        }
        let nl = (k + 1) as f64;
        let nr = (n - k - 1) as f64;
        let right_sum = total_sum - left_sum;
        let right_sq = total_sq - left_sq;
        let child_sse =
            (left_sq - left_sum * left_sum / nl) + (right_sq - right_sum * right_sum / nr);
        let threshold = 0.5 * (pairs[k].0 + pairs[k + 1].0);
        if best.is_none_or(|(s, _)| child_sse < s) {
            best = Some((child_sse, threshold));
        }
    }
    best
}

const FOREST_HEADER: &str = "dyncog-forest v1";

/// Persists the model as structured text: a versioned header followed by
/// each tree in pre-order, one node per line.
pub fn save_forest(model: &ForestModel, path: &Path) -> Result<(), FilterError> {
    let mut out = String::new();
    out.push_str(FOREST_HEADER);
    out.push('\n');
    out.push_str(&format!("n_features {}\n", model.n_features));
    out.push_str(&format!("trees {}\n", model.trees.len()));
    out.push_str(&format!("max_depth {}\n", model.max_depth));
    out.push_str(&format!("seed {}\n", model.seed));
    for (i, tree) in model.trees.iter().enumerate() {
        out.push_str(&format!("tree {i}\n"));
        write_preorder(tree, &mut out);
    }
    out.push_str("end\n");
    std::fs::write(path, out)?;
    Ok(())
}

fn write_preorder(node: &Node, out: &mut String) {
    match node {
        Node::Leaf { value } => out.push_str(&format!("leaf {value}\n")),
        Node::Split {
            feature,
            threshold,
            left,
            right,
        } => {
            out.push_str(&format!("split {feature} {threshold}\n"));
            write_preorder(left, out);
            write_preorder(right, out);
        }
    }
}

pub fn load_forest(path: &Path) -> Result<ForestModel, FilterError> {
    let text = std::fs::read_to_string(path)?;
    let bad = |detail: String| FilterError::ModelParse { detail };
    let mut lines = text.lines();
    if lines.next() != Some(FOREST_HEADER) {
        return Err(bad("missing header".into()));
    }
    let mut kv = |key: &str| -> Result<u64, FilterError> {
        let line = lines.next().ok_or_else(|| bad(format!("missing {key}")))?;
        let rest = line
            .strip_prefix(key)
            .ok_or_else(|| bad(format!("expected {key}, got {line:?}")))?;
        rest.trim()
            .parse()
            .map_err(|_| bad(format!("bad value in {line:?}")))
    };
    let n_features = kv("n_features")? as usize;
    let n_trees = kv("trees")? as usize;
    let max_depth = kv("max_depth")? as usize;
    let seed = kv("seed")?;

    let mut rest: Vec<&str> = lines.collect();
    rest.retain(|l| !l.trim().is_empty());
    let mut pos = 0usize;
    let mut trees = Vec::with_capacity(n_trees);
    for i in 0..n_trees {
        let expect = format!("tree {i}");
        if rest.get(pos) != Some(&expect.as_str()) {
            return Err(bad(format!("expected {expect:?} at line {pos}")));
        }
        pos += 1;
        trees.push(read_preorder(&rest, &mut pos, n_features)?);
    }
    if rest.get(pos) != Some(&"end") {
        return Err(bad("missing end marker".into()));
    }
    Ok(ForestModel {
        n_features,
        trees,
        seed,
        max_depth,
    })
}

fn read_preorder(lines: &[&str], pos: &mut usize, n_features: usize) -> Result<Node, FilterError> {
    let bad = |detail: String| FilterError::ModelParse { detail };
    let line = lines
        .get(*pos)
        .ok_or_else(|| bad("truncated tree".into()))?;
    *pos += 1;
    let mut parts = line.split_whitespace();
    match parts.next() {
        Some("leaf") => {
            let value: f64 = parts
                .next()
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| bad(format!("bad leaf line {line:?}")))?;
            Ok(Node::Leaf { value })
        }
        Some("split") => {
            let feature: usize = parts
                .next()
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| bad(format!("bad split line {line:?}")))?;
            let threshold: f64 = parts
                .next()
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| bad(format!("bad split line {line:?}")))?;
            if feature >= n_features {
                return Err(bad(format!(
                    "split feature {feature} out of range (n_features {n_features})"
                )));
            }
            let left = Box::new(read_preorder(lines, pos, n_features)?);
            let right = Box::new(read_preorder(lines, pos, n_features)?);
            Ok(Node::Split {
                feature,
                threshold,
                left,
                right,
            })
        }
        other => Err(bad(format!("unexpected node tag {other:?}"))),
    }
}

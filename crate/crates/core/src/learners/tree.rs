//! Binary decision trees over numeric predictors.
//!
//! Rows go left when `x[feature] <= threshold`. Classification trees use Gini
//! impurity and store Laplace-smoothed positive-class probabilities in their
//! leaves; regression trees (used by boosting) split on squared error of the
//! gradients and store Newton-step leaf values.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::matrix::Matrix;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Node {
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    Leaf {
        value: f64,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecisionTree {
    nodes: Vec<Node>,
    n_features: usize,
}

impl DecisionTree {
    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    /// Index of the leaf reached by `x`.
    pub fn leaf_index(&self, x: &[f64]) -> usize {
        let mut id = 0;
        loop {
            match self.nodes[id] {
                Node::Leaf { .. } => return id,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => id = if x[feature] <= threshold { left } else { right },
            }
        }
    }

    pub fn predict_row(&self, x: &[f64]) -> f64 {
        match self.nodes[self.leaf_index(x)] {
            Node::Leaf { value } => value,
            Node::Split { .. } => unreachable!("leaf_index returns leaves"),
        }
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], id: usize) -> usize {
            match nodes[id] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + walk(nodes, left).max(walk(nodes, right)),
            }
        }
        walk(&self.nodes, 0)
    }

    pub(crate) fn scale_leaves(&mut self, factor: f64) {
        for n in &mut self.nodes {
            if let Node::Leaf { value } = n {
                *value *= factor;
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TreeParams {
    /// `None` grows until leaves are pure.
    pub max_depth: Option<usize>,
    pub min_leaf: usize,
    /// Predictors examined per node; `None` examines all of them.
    pub features_per_split: Option<usize>,
}

impl Default for TreeParams {
    fn default() -> Self {
        Self {
            max_depth: None,
            min_leaf: 1,
            features_per_split: None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SplitChoice {
    pub feature: usize,
    pub threshold: f64,
    /// Split score; lower is better.
    pub score: f64,
    /// Rows (of the sorted node sample) that go left.
    n_left: usize,
}

pub fn gini(n: f64, pos: f64) -> f64 {
    if n == 0.0 {
        return 0.0;
    }
    let p = pos / n;
    1.0 - p * p - (1.0 - p) * (1.0 - p)
}

fn midpoint(a: f64, b: f64) -> f64 {
    let m = a + (b - a) / 2.0;
    if m >= b {
        a
    } else {
        m
    }
}

/// Gini-optimal split of `samples` on `feature`: minimizes
/// `n_left * gini_left + n_right * gini_right`. `samples` is sorted by the
/// feature on return.
fn best_gini_on_feature(
    x: &Matrix,
    y: &[bool],
    samples: &mut [usize],
    feature: usize,
    min_leaf: usize,
) -> Option<SplitChoice> {
    samples.sort_by(|&a, &b| {
        x.get(a, feature)
            .total_cmp(&x.get(b, feature))
            .then(a.cmp(&b))
    });
    let n = samples.len();
    let total_pos = samples.iter().filter(|&&i| y[i]).count() as f64;
    let mut left_pos = 0.0;
    let mut best: Option<SplitChoice> = None;
    for k in 0..n - 1 {
        if y[samples[k]] {
            left_pos += 1.0;
        }
        let n_left = k + 1;
        let (a, b) = (x.get(samples[k], feature), x.get(samples[k + 1], feature));
        if a == b || n_left < min_leaf || n - n_left < min_leaf {
            continue;
        }
        let nl = n_left as f64;
        let nr = (n - n_left) as f64;
        let score = nl * gini(nl, left_pos) + nr * gini(nr, total_pos - left_pos);
        if best.is_none_or(|bst| score < bst.score) {
            best = Some(SplitChoice {
                feature,
                threshold: midpoint(a, b),
                score,
                n_left,
            });
        }
    }
    best
}

/// Squared-error split on gradient targets: maximizes
/// `sum_left^2 / n_left + sum_right^2 / n_right`, reported negated.
fn best_sse_on_feature(
    x: &Matrix,
    target: &[f64],
    samples: &mut [usize],
    feature: usize,
    min_leaf: usize,
) -> Option<SplitChoice> {
    samples.sort_by(|&a, &b| {
        x.get(a, feature)
            .total_cmp(&x.get(b, feature))
            .then(a.cmp(&b))
    });
    let n = samples.len();
    let total: f64 = samples.iter().map(|&i| target[i]).sum();
    let mut left = 0.0;
    let mut best: Option<SplitChoice> = None;
    for k in 0..n - 1 {
        left += target[samples[k]];
        let n_left = k + 1;
        let (a, b) = (x.get(samples[k], feature), x.get(samples[k + 1], feature));
        if a == b || n_left < min_leaf || n - n_left < min_leaf {
            continue;
        }
        let right = total - left;
        let gain = left * left / n_left as f64 + right * right / (n - n_left) as f64;
        let score = -gain;
        if best.is_none_or(|bst| score < bst.score) {
            best = Some(SplitChoice {
                feature,
                threshold: midpoint(a, b),
                score,
                n_left,
            });
        }
    }
    best
}

struct Pending {
    id: usize,
    samples: Vec<usize>,
    depth: usize,
}

/// Grows a Gini tree on `samples` (row indices into `x`, repeats allowed).
pub fn fit_classifier<R: Rng>(
    x: &Matrix,
    y: &[bool],
    samples: Vec<usize>,
    params: &TreeParams,
    rng: &mut R,
) -> DecisionTree {
    let d = x.n_cols();
    let mtry = params.features_per_split.unwrap_or(d).clamp(1, d);
    let min_leaf = params.min_leaf.max(1);
    let mut nodes = vec![Node::Leaf { value: 0.0 }];
    let mut stack = vec![Pending {
        id: 0,
        samples,
        depth: 0,
    }];
    let mut features: Vec<usize> = (0..d).collect();

    while let Some(Pending {
        id,
        mut samples,
        depth,
    }) = stack.pop()
    {
        let n = samples.len();
        let pos = samples.iter().filter(|&&i| y[i]).count();
        let leaf = Node::Leaf {
            value: (pos as f64 + 1.0) / (n as f64 + 2.0),
        };
        let at_limit = params.max_depth.is_some_and(|m| depth >= m);
        if pos == 0 || pos == n || at_limit || n < 2 * min_leaf {
            nodes[id] = leaf;
            continue;
        }

        // examine a random subset first; fall back to the rest only when the
        // subset admits no split at all
        features.shuffle(rng);
        let mut best: Option<SplitChoice> = None;
        let mut start = 0;
        while best.is_none() && start < d {
            let end = if start == 0 { mtry } else { d };
            let mut batch = features[start..end].to_vec();
            batch.sort_unstable();
            for f in batch {
                if let Some(c) = best_gini_on_feature(x, y, &mut samples, f, min_leaf) {
                    if best.is_none_or(|b| c.score < b.score) {
                        best = Some(c);
                    }
                }
            }
            start = end;
        }

        let Some(choice) = best else {
            nodes[id] = leaf;
            continue;
        };
        let (left, right) = partition(x, &samples, choice.feature, choice.threshold);
        debug_assert_eq!(left.len(), choice.n_left);
        let (l, r) = (nodes.len(), nodes.len() + 1);
        nodes.push(Node::Leaf { value: 0.0 });
        nodes.push(Node::Leaf { value: 0.0 });
        nodes[id] = Node::Split {
            feature: choice.feature,
            threshold: choice.threshold,
            left: l,
            right: r,
        };
        stack.push(Pending {
            id: r,
            samples: right,
            depth: depth + 1,
        });
        stack.push(Pending {
            id: l,
            samples: left,
            depth: depth + 1,
        });
    }
    DecisionTree {
        nodes,
        n_features: d,
    }
}

/// Grows a squared-error tree on `gradient`, with leaf values
/// `sum(gradient) / sum(hessian)` over the leaf's rows.
pub fn fit_regressor(
    x: &Matrix,
    gradient: &[f64],
    hessian: &[f64],
    samples: Vec<usize>,
    max_depth: usize,
    min_leaf: usize,
) -> DecisionTree {
    let d = x.n_cols();
    let min_leaf = min_leaf.max(1);
    let mut nodes = vec![Node::Leaf { value: 0.0 }];
    let mut stack = vec![Pending {
        id: 0,
        samples,
        depth: 0,
    }];
    while let Some(Pending {
        id,
        mut samples,
        depth,
    }) = stack.pop()
    {
        let g: f64 = samples.iter().map(|&i| gradient[i]).sum();
        let h: f64 = samples.iter().map(|&i| hessian[i]).sum();
        let leaf = Node::Leaf {
            value: if h > 1e-12 { g / h } else { 0.0 },
        };
        if depth >= max_depth || samples.len() < 2 * min_leaf {
            nodes[id] = leaf;
            continue;
        }
        let parent = g * g / samples.len() as f64;
        let mut best: Option<SplitChoice> = None;
        for f in 0..d {
            if let Some(c) = best_sse_on_feature(x, gradient, &mut samples, f, min_leaf) {
                if best.is_none_or(|b| c.score < b.score) {
                    best = Some(c);
                }
            }
        }
        let Some(choice) = best.filter(|c| -c.score > parent * (1.0 + 1e-12) + 1e-15) else {
            nodes[id] = leaf;
            continue;
        };
        let (left, right) = partition(x, &samples, choice.feature, choice.threshold);
        let (l, r) = (nodes.len(), nodes.len() + 1);
        nodes.push(Node::Leaf { value: 0.0 });
        nodes.push(Node::Leaf { value: 0.0 });
        nodes[id] = Node::Split {
            feature: choice.feature,
            threshold: choice.threshold,
            left: l,
            right: r,
        };
        stack.push(Pending {
            id: r,
            samples: right,
            depth: depth + 1,
        });
        stack.push(Pending {
            id: l,
            samples: left,
            depth: depth + 1,
        });
    }
    DecisionTree {
        nodes,
        n_features: d,
    }
}

fn partition(
    x: &Matrix,
    samples: &[usize],
    feature: usize,
    threshold: f64,
) -> (Vec<usize>, Vec<usize>) {
    samples
        .iter()
        .partition(|&&i| x.get(i, feature) <= threshold)
}

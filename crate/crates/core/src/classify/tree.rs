// SPDX-License-Identifier: MIT OR Apache-2.0

//! Binary decision trees shared by the forest and the booster.
//!
//! A split sends `x[feature] <= threshold` left. Thresholds sit halfway
//! between adjacent distinct training values.

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::rng::Rng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Node {
    Split {
        feature: usize,
        threshold: f64,
        left: Box<Node>,
        right: Box<Node>,
    },
    Leaf(f64),
}

impl Node {
    pub fn predict(&self, x: &[f64]) -> f64 {
        let mut node = self;
        loop {
            match node {
                Node::Leaf(v) => return *v,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    node = if x[*feature] <= *threshold { left } else { right };
                }
            }
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            Node::Leaf(_) => 0,
            Node::Split { left, right, .. } => 1 + left.depth().max(right.depth()),
        }
    }
}

fn midpoint(a: f64, b: f64) -> f64 {
    let m = a + (b - a) / 2.0;
    if m >= b {
        a
    } else {
        m
    }
}

struct SplitCandidate {
    feature: usize,
    threshold: f64,
    score: f64,
}

/// Sorts `idx` by feature `f` (stable, so ties keep sample order).
fn sort_by_feature(x: &[Vec<f64>], idx: &mut [usize], f: usize) {
    idx.sort_by(|&a, &b| x[a][f].total_cmp(&x[b][f]));
}

fn gini(pos: f64, total: f64) -> f64 {
    if total == 0.0 {
        return 0.0;
    }
    let p = pos / total;
    2.0 * p * (1.0 - p)
}

pub(crate) struct ClassificationTreeParams {
    pub max_features: usize,
    pub max_depth: Option<usize>,
    pub min_samples_split: usize,
    pub min_samples_leaf: usize,
}

/// CART with Gini impurity over a (possibly repeating) bootstrap index set.
/// Leaves hold the recall fraction of their samples.
pub(crate) fn grow_classification_tree(
    x: &[Vec<f64>],
    y: &[bool],
    indices: &mut [usize],
    params: &ClassificationTreeParams,
    rng: &mut Rng,
) -> Node {
    grow_cls(x, y, indices, params, rng, 0)
}

fn grow_cls(
    x: &[Vec<f64>],
    y: &[bool],
    idx: &mut [usize],
    params: &ClassificationTreeParams,
    rng: &mut Rng,
    depth: usize,
) -> Node {
    let n = idx.len();
    let pos = idx.iter().filter(|&&i| y[i]).count();
    let leaf = Node::Leaf(pos as f64 / n as f64);
    if pos == 0 || pos == n || n < params.min_samples_split || params.max_depth.is_some_and(|d| depth >= d) {
        return leaf;
    }

    let dim = x[0].len();
    let mut order: Vec<usize> = (0..dim).collect();
    order.shuffle(rng);

    let mut best: Option<SplitCandidate> = None;
    let mut tried = 0;
    for &f in &order {
        if tried >= params.max_features {
            break;
        }
        let first = x[idx[0]][f];
        if idx.iter().all(|&i| x[i][f] == first) {
            continue;
        }
        tried += 1;
        sort_by_feature(x, idx, f);
        let mut left_pos = 0usize;
        for k in 0..n - 1 {
            if y[idx[k]] {
                left_pos += 1;
            }
            let (a, b) = (x[idx[k]][f], x[idx[k + 1]][f]);
            let left_n = k + 1;
            if a == b || left_n < params.min_samples_leaf || n - left_n < params.min_samples_leaf {
                continue;
            }
            let (ln, rn) = (left_n as f64, (n - left_n) as f64);
            let score = ln * gini(left_pos as f64, ln) + rn * gini((pos - left_pos) as f64, rn);
            if best.as_ref().is_none_or(|b| score < b.score) {
                best = Some(SplitCandidate {
                    feature: f,
                    threshold: midpoint(a, b),
                    score,
                });
            }
        }
    }

    let Some(split) = best else { return leaf };
    let (left, right) = partition(x, idx, split.feature, split.threshold);
    Node::Split {
        feature: split.feature,
        threshold: split.threshold,
        left: Box::new(grow_cls(x, y, left, params, rng, depth + 1)),
        right: Box::new(grow_cls(x, y, right, params, rng, depth + 1)),
    }
}

fn partition<'a>(
    x: &[Vec<f64>],
    idx: &'a mut [usize],
    feature: usize,
    threshold: f64,
) -> (&'a mut [usize], &'a mut [usize]) {
    sort_by_feature(x, idx, feature);
    let cut = idx.partition_point(|&i| x[i][feature] <= threshold);
    idx.split_at_mut(cut)
}

/// Least-squares regression tree on `targets`, with leaf values supplied by
/// `leaf_value` over the samples that reach each leaf.
pub(crate) fn grow_regression_tree(
    x: &[Vec<f64>],
    targets: &[f64],
    indices: &mut [usize],
    max_depth: usize,
    min_samples_leaf: usize,
    leaf_value: &dyn Fn(&[usize]) -> f64,
) -> Node {
    grow_reg(x, targets, indices, max_depth, min_samples_leaf, leaf_value, 0)
}

fn grow_reg(
    x: &[Vec<f64>],
    t: &[f64],
    idx: &mut [usize],
    max_depth: usize,
    min_leaf: usize,
    leaf_value: &dyn Fn(&[usize]) -> f64,
    depth: usize,
) -> Node {
    let n = idx.len();
    if depth >= max_depth || n < 2 * min_leaf.max(1) {
        return Node::Leaf(leaf_value(idx));
    }
    let total: f64 = idx.iter().map(|&i| t[i]).sum();
    let total_sq: f64 = idx.iter().map(|&i| t[i] * t[i]).sum();
    let parent_sse = total_sq - total * total / n as f64;
    if parent_sse <= 0.0 {
        return Node::Leaf(leaf_value(idx));
    }

    let dim = x[0].len();
    let mut best: Option<SplitCandidate> = None;
    for f in 0..dim {
        sort_by_feature(x, idx, f);
        let (mut ls, mut lsq) = (0.0, 0.0);
        for k in 0..n - 1 {
            let v = t[idx[k]];
            ls += v;
            lsq += v * v;
            let (a, b) = (x[idx[k]][f], x[idx[k + 1]][f]);
            let left_n = k + 1;
            if a == b || left_n < min_leaf || n - left_n < min_leaf {
                continue;
            }
            let (ln, rn) = (left_n as f64, (n - left_n) as f64);
            let rs = total - ls;
            let rsq = total_sq - lsq;
            let score = (lsq - ls * ls / ln) + (rsq - rs * rs / rn);
            if best.as_ref().is_none_or(|b| score < b.score) {
                best = Some(SplitCandidate {
                    feature: f,
                    threshold: midpoint(a, b),
                    score,
                });
            }
        }
    }

    let Some(split) = best else {
        return Node::Leaf(leaf_value(idx));
    };
    let (left, right) = partition(x, idx, split.feature, split.threshold);
    Node::Split {
        feature: split.feature,
        threshold: split.threshold,
        left: Box::new(grow_reg(x, t, left, max_depth, min_leaf, leaf_value, depth + 1)),
        right: Box::new(grow_reg(x, t, right, max_depth, min_leaf, leaf_value, depth + 1)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classify::rng::member_rng;

    #[test]
    fn classification_tree_separates_one_feature() {
        let x: Vec<Vec<f64>> = (0..10).map(|i| vec![i as f64, 0.0]).collect();
        let y: Vec<bool> = (0..10).map(|i| i >= 5).collect();
        let mut idx: Vec<usize> = (0..10).collect();
        let params = ClassificationTreeParams {
            max_features: 2,
            max_depth: None,
            min_samples_split: 2,
            min_samples_leaf: 1,
        };
        let tree = grow_classification_tree(&x, &y, &mut idx, &params, &mut member_rng(0, 0));
        assert_eq!(
            tree,
            Node::Split {
                feature: 0,
                threshold: 4.5,
                left: Box::new(Node::Leaf(0.0)),
                right: Box::new(Node::Leaf(1.0)),
            }
        );
        assert_eq!(tree.predict(&[7.0, 0.0]), 1.0);
        assert_eq!(tree.depth(), 1);
    }

    #[test]
    fn constant_features_give_a_leaf() {
        let x = vec![vec![1.0]; 4];
        let y = vec![true, false, true, true];
        let mut idx: Vec<usize> = (0..4).collect();
        let params = ClassificationTreeParams {
            max_features: 1,
            max_depth: None,
            min_samples_split: 2,
            min_samples_leaf: 1,
        };
        let tree = grow_classification_tree(&x, &y, &mut idx, &params, &mut member_rng(0, 0));
        assert_eq!(tree, Node::Leaf(0.75));
    }

    #[test]
    fn regression_tree_respects_depth() {
        let x: Vec<Vec<f64>> = (0..16).map(|i| vec![i as f64]).collect();
        let t: Vec<f64> = (0..16).map(|i| (i * i) as f64).collect();
        let mut idx: Vec<usize> = (0..16).collect();
        let mean = |s: &[usize]| s.iter().map(|&i| t[i]).sum::<f64>() / s.len() as f64;
        let tree = grow_regression_tree(&x, &t, &mut idx, 3, 1, &mean);
        assert_eq!(tree.depth(), 3);
    }

    #[test]
    fn midpoint_never_reaches_upper_value() {
        let a = 1.0f64;
        let b = f64::from_bits(a.to_bits() + 1);
        assert_eq!(midpoint(a, b), a);
        assert_eq!(midpoint(1.0, 2.0), 1.5);
    }
}

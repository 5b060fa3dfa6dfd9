//! Regression forest used to pick supervised neighbourhoods.
//!
//! Trees are grown CART style on bootstrap resamples. Each split considers
//! a random subset of `ceil(sqrt(k))` features, falling back to further
//! features when none of the drawn ones admits a valid split, and maximizes
//! the reduction in target variance. Growth stops when a node is pure or too
//! small to produce two children of `min_samples_leaf`. After growth every
//! training point is routed through the tree so that each leaf records the
//! full set of training points that fall into it.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::silo::SiloConfig;
use super::suite::instance_seed;
use crate::error::{check_len, Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum TreeNode {
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    Leaf {
        /// Training points routed here, sorted and without repeats.
        samples: Vec<usize>,
        /// Bootstrap draws (with multiplicity) the leaf was grown from.
        in_bag: usize,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecisionTree {
    nodes: Vec<TreeNode>,
}

impl DecisionTree {
    pub fn nodes(&self) -> &[TreeNode] {
        &self.nodes
    }

    /// Index of the leaf `x` falls into; `x <= threshold` goes left.
    pub fn leaf_index(&self, x: &[f64]) -> usize {
        let mut i = 0;
        loop {
            match &self.nodes[i] {
                TreeNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => i = if x[*feature] <= *threshold { *left } else { *right },
                TreeNode::Leaf { .. } => return i,
            }
        }
    }

    /// Training points sharing `x`'s leaf.
    pub fn leaf_samples(&self, x: &[f64]) -> &[usize] {
        match &self.nodes[self.leaf_index(x)] {
            TreeNode::Leaf { samples, .. } => samples,
            TreeNode::Split { .. } => unreachable!("leaf_index stops at a leaf"),
        }
    }

    pub fn num_leaves(&self) -> usize {
        self.nodes
            .iter()
            .filter(|n| matches!(n, TreeNode::Leaf { .. }))
            .count()
    }

    pub fn depth(&self) -> usize {
        fn go(nodes: &[TreeNode], i: usize) -> usize {
            match &nodes[i] {
                TreeNode::Split { left, right, .. } => 1 + go(nodes, *left).max(go(nodes, *right)),
                TreeNode::Leaf { .. } => 0,
            }
        }
        go(&self.nodes, 0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RandomForest {
    trees: Vec<DecisionTree>,
    num_features: usize,
    num_samples: usize,
}

impl RandomForest {
    pub fn trees(&self) -> &[DecisionTree] {
        &self.trees
    }

    pub fn num_features(&self) -> usize {
        self.num_features
    }

    /// Number of training points the forest was fitted on.
    pub fn num_samples(&self) -> usize {
        self.num_samples
    }
}

/// Grows `cfg.num_trees` regression trees on `rows` / `targets`.
///
/// Tree `t` draws its bootstrap sample and feature subsets from a stream
/// seeded by `(cfg.seed, t)`, so the result does not depend on how trees
/// are scheduled across threads.
pub fn fit_random_forest(rows: &[Vec<f64>], targets: &[f64], cfg: &SiloConfig) -> Result<RandomForest> {
    cfg.validate()?;
    check_len(rows.len(), targets.len())?;
    let n = rows.len();
    if n == 0 {
        return Err(Error::data("cannot fit a forest on an empty dataset"));
    }
    let k = rows[0].len();
    if k == 0 {
        return Err(Error::data("cannot fit a forest without features"));
    }
    for r in rows {
        check_len(k, r.len())?;
    }
    // Fewer than 2 * min_samples_leaf rows is allowed: every tree is then a
    // single leaf.
    let trees = (0..cfg.num_trees)
        .into_par_iter()
        .map(|t| {
            let mut rng = ChaCha8Rng::seed_from_u64(instance_seed(cfg.seed, t as u64));
            grow_tree(rows, targets, cfg.min_samples_leaf, &mut rng)
        })
        .collect();
    Ok(RandomForest {
        trees,
        num_features: k,
        num_samples: n,
    })
}

fn grow_tree(rows: &[Vec<f64>], targets: &[f64], min_leaf: usize, rng: &mut ChaCha8Rng) -> DecisionTree {
    let n = rows.len();
    let k = rows[0].len();
    let subset = (k as f64).sqrt().ceil() as usize;
    let bag: Vec<usize> = (0..n).map(|_| rng.random_range(0..n)).collect();

    let mut nodes = Vec::new();
    // (node slot, bootstrap indices reaching it)
    let mut stack = vec![(0usize, bag)];
    nodes.push(TreeNode::Leaf {
        samples: Vec::new(),
        in_bag: 0,
    });
    let mut features: Vec<usize> = (0..k).collect();
    while let Some((slot, idx)) = stack.pop() {
        let split = if idx.len() >= 2 * min_leaf && !is_pure(&idx, targets) {
            features.shuffle(rng);
            best_split(rows, targets, &idx, &features, subset, min_leaf)
        } else {
            None
        };
        match split {
            Some((feature, threshold)) => {
                let (l, r): (Vec<usize>, Vec<usize>) =
                    idx.iter().partition(|&&j| rows[j][feature] <= threshold);
                let left = nodes.len();
                let right = left + 1;
                nodes.push(TreeNode::Leaf {
                    samples: Vec::new(),
                    in_bag: 0,
                });
                nodes.push(TreeNode::Leaf {
                    samples: Vec::new(),
                    in_bag: 0,
                });
                nodes[slot] = TreeNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                };
                stack.push((right, r));
                stack.push((left, l));
            }
            None => {
                nodes[slot] = TreeNode::Leaf {
                    samples: Vec::new(),
                    in_bag: idx.len(),
                };
            }
        }
    }

    let mut tree = DecisionTree { nodes };
    for (j, row) in rows.iter().enumerate() {
        let leaf = tree.leaf_index(row);
        if let TreeNode::Leaf { samples, .. } = &mut tree.nodes[leaf] {
            samples.push(j);
        }
    }
    tree
}

fn is_pure(idx: &[usize], targets: &[f64]) -> bool {
    let first = targets[idx[0]];
    idx.iter().all(|&j| targets[j] == first)
}

/// Best `(feature, threshold)` by variance reduction. Features are tried in
/// the given order; the search stops once `subset` features have been
/// examined and at least one valid split was seen.
fn best_split(
    rows: &[Vec<f64>],
    targets: &[f64],
    idx: &[usize],
    features: &[usize],
    subset: usize,
    min_leaf: usize,
) -> Option<(usize, f64)> {
    let n = idx.len();
    let total: f64 = idx.iter().map(|&j| targets[j]).sum();
    let parent = total * total / n as f64;
    let mut best: Option<(f64, usize, f64)> = None;
    let mut order: Vec<(f64, f64)> = Vec::with_capacity(n);

    for (tried, &f) in features.iter().enumerate() {
        if tried >= subset && best.is_some() {
            break;
        }
        order.clear();
        order.extend(idx.iter().map(|&j| (rows[j][f], targets[j])));
        order.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut left_sum = 0.0;
        for i in 0..n - 1 {
            left_sum += order[i].1;
            let nl = i + 1;
            if nl < min_leaf || n - nl < min_leaf || order[i].0 == order[i + 1].0 {
                continue;
            }
            let right_sum = total - left_sum;
            // Maximizing this proxy minimizes the children's squared error.
            let proxy = left_sum * left_sum / nl as f64 + right_sum * right_sum / (n - nl) as f64;
            let gain = proxy - parent;
            if gain <= 1e-12 * parent.abs().max(1e-300) {
                continue;
            }
            if best.is_none_or(|(g, _, _)| gain > g) {
                let mut threshold = 0.5 * (order[i].0 + order[i + 1].0);
                if threshold >= order[i + 1].0 {
                    threshold = order[i].0;
                }
                best = Some((gain, f, threshold));
            }
        }
    }
    best.map(|(_, f, t)| (f, t))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(trees: usize, leaf: usize) -> SiloConfig {
        SiloConfig {
            num_trees: trees,
            min_samples_leaf: leaf,
            ..SiloConfig::default()
        }
    }

    #[test]
    fn min_leaf_of_n_gives_single_leaf() {
        let rows: Vec<Vec<f64>> = (0..30).map(|i| vec![i as f64]).collect();
        let y: Vec<f64> = (0..30).map(|i| (i % 2) as f64).collect();
        let forest = fit_random_forest(&rows, &y, &cfg(1, 30)).unwrap();
        let tree = &forest.trees()[0];
        assert_eq!(tree.num_leaves(), 1);
        assert_eq!(tree.leaf_samples(&[3.0]).len(), 30);
    }

    #[test]
    fn pure_split_found_near_zero() {
        let rows: Vec<Vec<f64>> = (0..200)
            .map(|i| vec![(i as f64 - 99.5) / 50.0, ((i * 17) % 13) as f64])
            .collect();
        let y: Vec<f64> = rows.iter().map(|r| f64::from(u8::from(r[0] > 0.0))).collect();
        let forest = fit_random_forest(&rows, &y, &cfg(20, 5)).unwrap();
        for tree in forest.trees() {
            assert_eq!(tree.depth(), 1);
            match &tree.nodes()[0] {
                TreeNode::Split {
                    feature, threshold, ..
                } => {
                    assert_eq!(*feature, 0);
                    assert!(threshold.abs() < 0.05, "{threshold}");
                }
                TreeNode::Leaf { .. } => panic!("expected a split"),
            }
        }
    }

    #[test]
    fn every_point_in_exactly_one_leaf() {
        let rows: Vec<Vec<f64>> = (0..120)
            .map(|i| vec![(i as f64 * 0.37).sin(), (i as f64 * 0.11).cos(), i as f64 / 120.0])
            .collect();
        let y: Vec<f64> = rows.iter().map(|r| r[0] * r[1] + r[2]).collect();
        let forest = fit_random_forest(&rows, &y, &cfg(10, 4)).unwrap();
        for tree in forest.trees() {
            let mut seen = vec![0; rows.len()];
            for node in tree.nodes() {
                if let TreeNode::Leaf { samples, in_bag } = node {
                    assert!(*in_bag >= 4);
                    for &j in samples {
                        seen[j] += 1;
                    }
                }
            }
            assert!(seen.iter().all(|&c| c == 1));
        }
    }

    #[test]
    fn same_seed_same_forest() {
        let rows: Vec<Vec<f64>> = (0..80).map(|i| vec![(i as f64).sqrt(), (i % 7) as f64]).collect();
        let y: Vec<f64> = rows.iter().map(|r| r[0] - r[1]).collect();
        let a = fit_random_forest(&rows, &y, &cfg(8, 3)).unwrap();
        let b = fit_random_forest(&rows, &y, &cfg(8, 3)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn empty_dataset_rejected() {
        assert!(fit_random_forest(&[], &[], &cfg(1, 1)).is_err());
    }
}

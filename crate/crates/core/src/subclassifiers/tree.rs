//! CART classification tree with weighted Gini splits, a false-positive
//! loss folded into class weights, and cost-complexity pruning.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{check_dim, TrainingSet};
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::stats::Label;

/// `cp = -1` grows the full tree; otherwise the grown tree is pruned so that
/// every retained split lowers the loss-weighted risk by more than
/// `cp × root risk` per extra leaf.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TreeParams {
    pub cp: f64,
    /// Cost of calling a `not_elite` lineup `elite`, relative to the reverse error.
    pub loss_fp: f64,
    #[serde(default = "default_min_split")]
    pub min_split: usize,
    #[serde(default = "default_min_bucket")]
    pub min_bucket: usize,
    #[serde(default = "default_max_depth")]
    pub max_depth: usize,
}

fn default_min_split() -> usize {
    20
}

fn default_min_bucket() -> usize {
    7
}

fn default_max_depth() -> usize {
    30
}

impl TreeParams {
    pub fn new(cp: f64, loss_fp: f64) -> TreeParams {
        TreeParams {
            cp,
            loss_fp,
            min_split: default_min_split(),
            min_bucket: default_min_bucket(),
            max_depth: default_max_depth(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.cp == -1.0 || (0.0..=1.0).contains(&self.cp)) {
            return Err(Error::InvalidParameter(alloc::format!(
                "tree cp {} must be -1 or in [0, 1]",
                self.cp
            )));
        }
        if !(self.loss_fp >= 1.0) {
            return Err(Error::InvalidParameter(alloc::format!(
                "tree loss {} must be >= 1",
                self.loss_fp
            )));
        }
        if self.min_bucket == 0 || self.max_depth == 0 {
            return Err(Error::InvalidParameter(
                "min_bucket and max_depth must be positive".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NodeKind {
    Leaf {
        label: Label,
    },
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
        /// Weighted Gini decrease of this split.
        improvement: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Node {
    pub kind: NodeKind,
    /// Loss-weighted class masses reaching the node.
    pub elite_mass: f64,
    pub not_elite_mass: f64,
    pub count: usize,
}

impl Node {
    fn leaf_label(&self) -> Label {
        Label::from_bool(self.elite_mass > self.not_elite_mass)
    }

    /// Loss-weighted misclassification risk if the node were a leaf.
    fn risk(&self) -> f64 {
        self.elite_mass.min(self.not_elite_mass)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeModel {
    pub dim: usize,
    pub nodes: Vec<Node>,
}

pub(crate) struct GrowConfig {
    pub loss_fp: f64,
    pub min_split: usize,
    pub min_bucket: usize,
    pub max_depth: usize,
    /// Features tried per split; `None` tries all.
    pub mtry: Option<usize>,
}

/// Weighted Gini impurity times node mass: `W (1 - pe² - pn²) = 2 e n / W`.
fn gini_mass(e: f64, n: f64) -> f64 {
    let w = e + n;
    if w > 0.0 {
        2.0 * e * n / w
    } else {
        0.0
    }
}

pub fn fit_decision_tree(train: &TrainingSet, params: &TreeParams) -> Result<TreeModel> {
    params.validate()?;
    let cfg = GrowConfig {
        loss_fp: params.loss_fp,
        min_split: params.min_split,
        min_bucket: params.min_bucket,
        max_depth: params.max_depth,
        mtry: None,
    };
    let sample: Vec<usize> = (0..train.len()).collect();
    let mut tree = grow(
        &train.features,
        &train.labels,
        &train.weights,
        &sample,
        &cfg,
        None::<&mut rand_chacha::ChaCha8Rng>,
    );
    if params.cp >= 0.0 {
        tree.prune(params.cp);
    }
    Ok(tree)
}

struct Pending {
    node: usize,
    members: Vec<usize>,
    depth: usize,
}

pub(crate) fn grow<R: Rng>(
    x: &Matrix,
    labels: &[Label],
    weights: &[f64],
    sample: &[usize],
    cfg: &GrowConfig,
    mut rng: Option<&mut R>,
) -> TreeModel {
    let d = x.cols();
    let class_weight = |i: usize| {
        if labels[i].is_elite() {
            (weights[i], 0.0)
        } else {
            (0.0, weights[i] * cfg.loss_fp)
        }
    };
    let masses = |members: &[usize]| {
        members.iter().fold((0.0, 0.0), |(e, n), &i| {
            let (de, dn) = class_weight(i);
            (e + de, n + dn)
        })
    };
    let make_node = |members: &[usize]| {
        let (e, n) = masses(members);
        let mut node = Node {
            kind: NodeKind::Leaf {
                label: Label::NotElite,
            },
            elite_mass: e,
            not_elite_mass: n,
            count: members.len(),
        };
        node.kind = NodeKind::Leaf {
            label: node.leaf_label(),
        };
        node
    };

    let mut nodes = vec![make_node(sample)];
    let mut stack = vec![Pending {
        node: 0,
        members: sample.to_vec(),
        depth: 0,
    }];
    let mut features: Vec<usize> = (0..d).collect();
    let mut pairs: Vec<(f64, usize)> = Vec::with_capacity(sample.len());

    while let Some(Pending {
        node,
        members,
        depth,
    }) = stack.pop()
    {
        let (e, n) = (nodes[node].elite_mass, nodes[node].not_elite_mass);
        if members.len() < cfg.min_split || depth >= cfg.max_depth || e <= 0.0 || n <= 0.0 {
            continue;
        }
        let candidates: &[usize] = match (cfg.mtry, rng.as_deref_mut()) {
            (Some(m), Some(rng)) if m < d => {
                for k in 0..m {
                    let j = rng.random_range(k..d);
                    features.swap(k, j);
                }
                features[..m].sort_unstable();
                &features[..m]
            }
            _ => {
                features.sort_unstable();
                &features[..]
            }
        };

        let parent = gini_mass(e, n);
        let min_gain = 1e-12 * (e + n);
        let mut best: Option<(f64, usize, f64)> = None;
        for &f in candidates {
            pairs.clear();
            pairs.extend(members.iter().map(|&i| (x[(i, f)], i)));
            pairs.sort_unstable_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            let (mut le, mut ln) = (0.0, 0.0);
            let m = pairs.len();
            for k in 0..m - 1 {
                let (de, dn) = class_weight(pairs[k].1);
                le += de;
                ln += dn;
                if pairs[k].0 == pairs[k + 1].0
                    || k + 1 < cfg.min_bucket
                    || m - k - 1 < cfg.min_bucket
                {
                    continue;
                }
                let gain = parent - gini_mass(le, ln) - gini_mass(e - le, n - ln);
                if gain > min_gain && best.is_none_or(|(g, _, _)| gain > g) {
                    let (a, b) = (pairs[k].0, pairs[k + 1].0);
                    let mid = a + (b - a) / 2.0;
                    let threshold = if mid < b { mid } else { a };
                    best = Some((gain, f, threshold));
                }
            }
        }
        let Some((gain, feature, threshold)) = best else {
            continue;
        };
        let (left_members, right_members): (Vec<usize>, Vec<usize>) =
            members.iter().partition(|&&i| x[(i, feature)] <= threshold);
        let left = nodes.len();
        nodes.push(make_node(&left_members));
        let right = nodes.len();
        nodes.push(make_node(&right_members));
        nodes[node].kind = NodeKind::Split {
            feature,
            threshold,
            left,
            right,
            improvement: gain,
        };
        stack.push(Pending {
            node: right,
            members: right_members,
            depth: depth + 1,
        });
        stack.push(Pending {
            node: left,
            members: left_members,
            depth: depth + 1,
        });
    }
    let mut tree = TreeModel { dim: d, nodes };
    tree.compact();
    tree
}

impl TreeModel {
    pub fn predict(&self, x: &[f64]) -> Result<Label> {
        check_dim(self.dim, x)?;
        Ok(self.predict_unchecked(x))
    }

    pub(crate) fn predict_unchecked(&self, x: &[f64]) -> Label {
        let mut i = 0;
        loop {
            match self.nodes[i].kind {
                NodeKind::Leaf { label } => return label,
                NodeKind::Split {
                    feature,
                    threshold,
                    left,
                    right,
                    ..
                } => i = if x[feature] <= threshold { left } else { right },
            }
        }
    }

    pub fn root_split(&self) -> Option<(usize, f64)> {
        match self.nodes[0].kind {
            NodeKind::Split {
                feature, threshold, ..
            } => Some((feature, threshold)),
            NodeKind::Leaf { .. } => None,
        }
    }

    pub fn leaf_count(&self) -> usize {
        self.nodes
            .iter()
            .filter(|n| matches!(n.kind, NodeKind::Leaf { .. }))
            .count()
    }

    pub fn splits(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.nodes.iter().filter_map(|n| match n.kind {
            NodeKind::Split {
                feature,
                improvement,
                ..
            } => Some((feature, improvement)),
            NodeKind::Leaf { .. } => None,
        })
    }

    /// Summed Gini decrease per feature.
    pub fn gini_importance(&self) -> Vec<f64> {
        let mut imp = vec![0.0; self.dim];
        for (f, g) in self.splits() {
            imp[f] += g;
        }
        imp
    }

    /// Weakest-link pruning: collapse the internal node with the smallest
    /// risk reduction per extra leaf while that reduction is at most
    /// `cp × root risk`.
    pub fn prune(&mut self, cp: f64) {
        let alpha = cp * self.nodes[0].risk();
        loop {
            let mut subtree = vec![(0.0f64, 0usize); self.nodes.len()];
            // Children always follow their parent, so a reverse sweep is bottom-up.
            for i in (0..self.nodes.len()).rev() {
                subtree[i] = match self.nodes[i].kind {
                    NodeKind::Leaf { .. } => (self.nodes[i].risk(), 1),
                    NodeKind::Split { left, right, .. } => (
                        subtree[left].0 + subtree[right].0,
                        subtree[left].1 + subtree[right].1,
                    ),
                };
            }
            let weakest = self
                .nodes
                .iter()
                .enumerate()
                .filter(|(_, n)| matches!(n.kind, NodeKind::Split { .. }))
                .map(|(i, n)| (i, (n.risk() - subtree[i].0) / (subtree[i].1 - 1) as f64))
                .fold(None, |acc: Option<(usize, f64)>, (i, g)| match acc {
                    Some((_, best)) if best <= g => acc,
                    _ => Some((i, g)),
                });
            match weakest {
                Some((i, g)) if g <= alpha => {
                    let label = self.nodes[i].leaf_label();
                    self.nodes[i].kind = NodeKind::Leaf { label };
                    self.compact();
                }
                _ => break,
            }
        }
    }

    /// Drops unreachable nodes, renumbering in pre-order.
    fn compact(&mut self) {
        let mut out: Vec<Node> = Vec::with_capacity(self.nodes.len());
        let mut stack = vec![(0usize, None::<(usize, bool)>)];
        while let Some((old, parent)) = stack.pop() {
            let new = out.len();
            out.push(self.nodes[old]);
            if let Some((p, is_left)) = parent {
                if let NodeKind::Split { left, right, .. } = &mut out[p].kind {
                    if is_left {
                        *left = new;
                    } else {
                        *right = new;
                    }
                }
            }
            if let NodeKind::Split { left, right, .. } = self.nodes[old].kind {
                stack.push((right, Some((new, false))));
                stack.push((left, Some((new, true))));
            }
        }
        self.nodes = out;
    }
}

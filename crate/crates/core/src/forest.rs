//! Balanced random forest over dense category codes.
//!
//! Every tree sees all `P` positives plus `P` negatives drawn uniformly
//! without replacement (with replacement only when fewer than `P` negatives
//! exist). Trees are CART-style with Gini impurity and `code <= threshold`
//! splits.

use rand::seq::index;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::discretize::ColumnarMatrix;
use crate::error::{Error, Result};
use crate::num::Scalar;
use crate::seed;

pub const MODEL_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestConfig {
    pub n_trees: usize,
    /// `None` grows until purity or the leaf-size limit.
    pub max_depth: Option<usize>,
    pub min_samples_leaf: usize,
    /// `None` means `floor(sqrt(n_features))`, at least 1.
    pub features_per_split: Option<usize>,
    pub seed: u64,
    /// Retain per-tree training indices in the model.
    #[serde(default)]
    pub keep_samples: bool,
}

impl Default for ForestConfig {
    fn default() -> Self {
        Self {
            n_trees: 500,
            max_depth: None,
            min_samples_leaf: 1,
            features_per_split: None,
            seed: 0,
            keep_samples: false,
        }
    }
}

impl ForestConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_trees == 0 {
            return Err(Error::InvalidParameter("n_trees must be at least 1".into()));
        }
        if self.min_samples_leaf == 0 {
            return Err(Error::InvalidParameter(
                "min_samples_leaf must be at least 1".into(),
            ));
        }
        if self.features_per_split == Some(0) {
            return Err(Error::InvalidParameter(
                "features_per_split must be at least 1".into(),
            ));
        }
        Ok(())
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        Self {
            seed,
            ..self.clone()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Node {
    /// Genes with `code <= threshold` go left.
    Split {
        feature: u32,
        threshold: u8,
        left: u32,
        right: u32,
    },
    Leaf {
        positives: u32,
        total: u32,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecisionTree {
    nodes: Vec<Node>,
}

impl DecisionTree {
    /// A tree that is a single leaf.
    pub fn leaf(positives: u32, total: u32) -> Self {
        Self {
            nodes: vec![Node::Leaf { positives, total }],
        }
    }

    /// Build from nodes; node 0 is the root.
    pub fn from_nodes(nodes: Vec<Node>) -> Result<Self> {
        if nodes.is_empty() {
            return Err(Error::ModelFormat("tree without nodes".into()));
        }
        for n in &nodes {
            match *n {
                Node::Split { left, right, .. } => {
                    if left as usize >= nodes.len() || right as usize >= nodes.len() {
                        return Err(Error::ModelFormat("child index out of range".into()));
                    }
                }
                Node::Leaf { total: 0, .. } => {
                    return Err(Error::ModelFormat("empty leaf".into()));
                }
                _ => {}
            }
        }
        Ok(Self { nodes })
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    fn leaf_for(&self, code_of: impl Fn(usize) -> u8) -> (u32, u32) {
        let mut i = 0usize;
        loop {
            match self.nodes[i] {
                Node::Leaf { positives, total } => return (positives, total),
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    i = if code_of(feature as usize) <= threshold {
                        left as usize
                    } else {
                        right as usize
                    };
                }
            }
        }
    }

    /// Positive fraction of the leaf gene `gene` of `m` lands in.
    pub fn score<T: Scalar>(&self, m: &ColumnarMatrix, subset: &[usize], gene: usize) -> T {
        let (p, t) = self.leaf_for(|f| m.column(subset[f])[gene]);
        T::from_count(p as usize) / T::from_count(t as usize)
    }

    /// Like [`score`](Self::score) with codes supplied by `code_of(position)`.
    pub fn score_with<T: Scalar>(&self, code_of: impl Fn(usize) -> u8) -> T {
        let (p, t) = self.leaf_for(code_of);
        T::from_count(p as usize) / T::from_count(t as usize)
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], i: usize) -> usize {
            match nodes[i] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => {
                    1 + walk(nodes, left as usize).max(walk(nodes, right as usize))
                }
            }
        }
        walk(&self.nodes, 0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestModel {
    pub format_version: u32,
    trees: Vec<DecisionTree>,
    per_tree_seed: Vec<u64>,
    n_features_expected: usize,
    /// Training row indices per tree, when requested.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    samples: Option<Vec<Vec<u32>>>,
}

impl ForestModel {
    pub fn new(
        trees: Vec<DecisionTree>,
        per_tree_seed: Vec<u64>,
        n_features_expected: usize,
    ) -> Result<Self> {
        let model = Self {
            format_version: MODEL_FORMAT_VERSION,
            trees,
            per_tree_seed,
            n_features_expected,
            samples: None,
        };
        model.validate()?;
        Ok(model)
    }

    /// Structural checks, also used after deserializing.
    pub fn validate(&self) -> Result<()> {
        if self.format_version != MODEL_FORMAT_VERSION {
            return Err(Error::ModelFormat(format!(
                "unsupported model version {}",
                self.format_version
            )));
        }
        if self.trees.is_empty() || self.trees.len() != self.per_tree_seed.len() {
            return Err(Error::ModelFormat("tree/seed count mismatch".into()));
        }
        for t in &self.trees {
            for n in &t.nodes {
                if let Node::Split { feature, .. } = n {
                    if *feature as usize >= self.n_features_expected {
                        return Err(Error::ModelFormat(format!(
                            "split on feature {feature} but model expects {}",
                            self.n_features_expected
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn trees(&self) -> &[DecisionTree] {
        &self.trees
    }

    pub fn per_tree_seed(&self) -> &[u64] {
        &self.per_tree_seed
    }

    pub fn n_features_expected(&self) -> usize {
        self.n_features_expected
    }

    pub fn samples(&self) -> Option<&[Vec<u32>]> {
        self.samples.as_deref()
    }

    /// Feature positions (into the training subset) used by any split.
    pub fn used_features(&self) -> Vec<bool> {
        let mut used = vec![false; self.n_features_expected];
        for t in &self.trees {
            for n in &t.nodes {
                if let Node::Split { feature, .. } = n {
                    used[*feature as usize] = true;
                }
            }
        }
        used
    }
}

/// Train a forest on every gene of `m`, using only the columns in `subset`.
pub fn train(m: &ColumnarMatrix, subset: &[usize], cfg: &ForestConfig) -> Result<ForestModel> {
    cfg.validate()?;
    if subset.is_empty() {
        return Err(Error::InvalidParameter("empty feature subset".into()));
    }
    if let Some(&bad) = subset.iter().find(|&&j| j >= m.n_features()) {
        return Err(Error::InvalidParameter(format!(
            "feature index {bad} out of range for {} features",
            m.n_features()
        )));
    }
    let positives: Vec<u32> = (0..m.n_genes() as u32)
        .filter(|&g| m.labels()[g as usize] == 1)
        .collect();
    let negatives: Vec<u32> = (0..m.n_genes() as u32)
        .filter(|&g| m.labels()[g as usize] == 0)
        .collect();
    if positives.is_empty() || negatives.is_empty() {
        return Err(Error::SingleClass {
            positives: positives.len(),
            total: m.n_genes(),
        });
    }
    let mtry = cfg
        .features_per_split
        .unwrap_or_else(|| (subset.len() as f64).sqrt().floor() as usize)
        .clamp(1, subset.len());

    let grower = Grower {
        m,
        subset,
        mtry,
        min_leaf: cfg.min_samples_leaf,
        max_depth: cfg.max_depth.unwrap_or(usize::MAX),
    };
    let seeds: Vec<u64> = (0..cfg.n_trees as u64)
        .map(|t| seed::derive(cfg.seed, t))
        .collect();
    let grown: Vec<(DecisionTree, Vec<u32>)> = seeds
        .par_iter()
        .map(|&s| {
            let mut rng = seed::rng(s);
            let mut rows = balanced_sample(&positives, &negatives, &mut rng);
            let kept = if cfg.keep_samples {
                rows.clone()
            } else {
                Vec::new()
            };
            (grower.grow(&mut rows, &mut rng), kept)
        })
        .collect();

    let (trees, samples): (Vec<_>, Vec<_>) = grown.into_iter().unzip();
    Ok(ForestModel {
        format_version: MODEL_FORMAT_VERSION,
        trees,
        per_tree_seed: seeds,
        n_features_expected: subset.len(),
        samples: cfg.keep_samples.then_some(samples),
    })
}

fn balanced_sample<R: Rng>(positives: &[u32], negatives: &[u32], rng: &mut R) -> Vec<u32> {
    let p = positives.len();
    let mut rows = Vec::with_capacity(2 * p);
    rows.extend_from_slice(positives);
    if negatives.len() >= p {
        let mut picked: Vec<usize> = index::sample(rng, negatives.len(), p).into_vec();
        picked.sort_unstable();
        rows.extend(picked.into_iter().map(|i| negatives[i]));
    } else {
        rows.extend((0..p).map(|_| negatives[rng.gen_range(0..negatives.len())]));
    }
    rows
}

struct Grower<'a> {
    m: &'a ColumnarMatrix,
    subset: &'a [usize],
    mtry: usize,
    min_leaf: usize,
    max_depth: usize,
}

#[inline]
fn gini_weighted(pos: u32, total: u32) -> f64 {
    // total × gini(node), so children can be summed directly
    if total == 0 {
        return 0.0;
    }
    let p = pos as f64;
    let t = total as f64;
    2.0 * p * (t - p) / t
}

impl Grower<'_> {
    fn grow<R: Rng>(&self, rows: &mut [u32], rng: &mut R) -> DecisionTree {
        let mut nodes = Vec::new();
        let mut order: Vec<usize> = (0..self.subset.len()).collect();
        self.build(rows, 0, &mut nodes, &mut order, rng);
        DecisionTree { nodes }
    }

    fn build<R: Rng>(
        &self,
        rows: &mut [u32],
        depth: usize,
        nodes: &mut Vec<Node>,
        order: &mut [usize],
        rng: &mut R,
    ) -> u32 {
        let labels = self.m.labels();
        let total = rows.len() as u32;
        let pos = rows.iter().filter(|&&r| labels[r as usize] == 1).count() as u32;
        let id = nodes.len() as u32;
        nodes.push(Node::Leaf {
            positives: pos,
            total,
        });
        if pos == 0 || pos == total || rows.len() < 2 * self.min_leaf || depth >= self.max_depth
        {
            return id;
        }
        let Some((feature, threshold)) = self.best_split(rows, order, rng) else {
            return id;
        };

        let col = self.m.column(self.subset[feature]);
        let mut left = 0;
        for i in 0..rows.len() {
            if col[rows[i] as usize] <= threshold {
                rows.swap(i, left);
                left += 1;
            }
        }
        let (l_rows, r_rows) = rows.split_at_mut(left);
        let l = self.build(l_rows, depth + 1, nodes, order, rng);
        let r = self.build(r_rows, depth + 1, nodes, order, rng);
        nodes[id as usize] = Node::Split {
            feature: feature as u32,
            threshold,
            left: l,
            right: r,
        };
        id
    }

    /// Lowest weighted Gini split over up to `mtry` features that vary in
    /// this node. Features are visited in a random order; the first best wins.
    fn best_split<R: Rng>(
        &self,
        rows: &[u32],
        order: &mut [usize],
        rng: &mut R,
    ) -> Option<(usize, u8)> {
        let labels = self.m.labels();
        let n = rows.len() as u32;
        let mut best: Option<(f64, usize, u8)> = None;
        let mut informative = 0usize;
        let mut pos_by_code = [0u32; 256];
        let mut tot_by_code = [0u32; 256];

        // Lazy Fisher-Yates: position i is fixed only when reached.
        for i in 0..order.len() {
            if informative >= self.mtry {
                break;
            }
            let j = rng.gen_range(i..order.len());
            order.swap(i, j);
            let f = order[i];
            let col = self.m.column(self.subset[f]);
            let card = self.m.cardinality(self.subset[f]);
            pos_by_code[..card].fill(0);
            tot_by_code[..card].fill(0);
            for &r in rows {
                let c = col[r as usize] as usize;
                tot_by_code[c] += 1;
                pos_by_code[c] += labels[r as usize] as u32;
            }
            if tot_by_code[..card].iter().filter(|&&t| t > 0).count() < 2 {
                continue;
            }
            informative += 1;

            let n_pos: u32 = pos_by_code[..card].iter().sum();
            let mut lt = 0u32;
            let mut lp = 0u32;
            for c in 0..card - 1 {
                lt += tot_by_code[c];
                lp += pos_by_code[c];
                if tot_by_code[c] == 0 {
                    continue;
                }
                let rt = n - lt;
                if (lt as usize) < self.min_leaf || (rt as usize) < self.min_leaf {
                    continue;
                }
                if rt == 0 {
                    break;
                }
                let imp = gini_weighted(lp, lt) + gini_weighted(n_pos - lp, rt);
                if best.is_none_or(|(b, _, _)| imp < b) {
                    best = Some((imp, f, c as u8));
                }
            }
        }
        best.map(|(_, f, c)| (f, c))
    }
}

/// Mean positive-leaf fraction over trees, per gene of `m`.
pub fn predict_proba<T: Scalar>(
    model: &ForestModel,
    m: &ColumnarMatrix,
    subset: &[usize],
) -> Result<Vec<T>> {
    if subset.len() != model.n_features_expected {
        return Err(Error::ShapeMismatch(format!(
            "model expects {} features, subset has {}",
            model.n_features_expected,
            subset.len()
        )));
    }
    if let Some(&bad) = subset.iter().find(|&&j| j >= m.n_features()) {
        return Err(Error::ShapeMismatch(format!(
            "feature index {bad} out of range for {} features",
            m.n_features()
        )));
    }
    let n_trees = T::from_count(model.trees.len());
    Ok((0..m.n_genes())
        .into_par_iter()
        .map(|g| {
            let mut acc = T::zero();
            for t in &model.trees {
                acc = acc + t.score::<T>(m, subset, g);
            }
            acc / n_trees
        })
        .collect())
}

//! Candidate-gene rankings and permutation feature importance.

use std::cmp::Ordering;
use std::io::Write;

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::{Dataset, Label};
use crate::discretize::ColumnarMatrix;
use crate::error::{Error, Result};
use crate::evaluate::{self, CvOptions, FoldPlan, SelectionStrategy};
use crate::forest::{self, ForestConfig, ForestModel};
use crate::metrics;
use crate::num::Scalar;
use crate::seed::{self, stream};

pub const DEFAULT_TOP_GENES: usize = 7;
pub const DEFAULT_TOP_FEATURES: usize = 5;
pub const DEFAULT_PERMUTATION_REPEATS: usize = 10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedGene<T> {
    pub gene_id: String,
    pub probability: T,
    pub label: Label,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneRanking<T> {
    pub entries: Vec<RankedGene<T>>,
    pub novel_only: bool,
}

impl<T: Scalar> GeneRanking<T> {
    /// Sort by probability descending, then gene id ascending.
    ///
    /// With `novel_only`, positives are dropped.
    pub fn from_scores(
        gene_ids: &[String],
        probabilities: &[T],
        labels: &[Label],
        novel_only: bool,
    ) -> Result<Self> {
        if gene_ids.len() != probabilities.len() || gene_ids.len() != labels.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} genes, {} probabilities, {} labels",
                gene_ids.len(),
                probabilities.len(),
                labels.len()
            )));
        }
        let mut entries: Vec<RankedGene<T>> = gene_ids
            .iter()
            .zip(probabilities)
            .zip(labels)
            .filter(|(_, l)| !novel_only || !l.is_positive())
            .map(|((g, &p), &l)| RankedGene {
                gene_id: g.clone(),
                probability: p,
                label: l,
            })
            .collect();
        entries.sort_by(|a, b| {
            b.probability
                .partial_cmp(&a.probability)
                .unwrap_or(Ordering::Equal)
                .then_with(|| a.gene_id.cmp(&b.gene_id))
        });
        Ok(Self {
            entries,
            novel_only,
        })
    }

    /// `rank<TAB>gene_id<TAB>probability<TAB>label`, ranks from 1.
    pub fn write_tsv<W: Write>(&self, top: Option<usize>, mut out: W) -> std::io::Result<()> {
        let n = top.unwrap_or(self.entries.len()).min(self.entries.len());
        for (i, e) in self.entries[..n].iter().enumerate() {
            writeln!(
                out,
                "{}\t{}\t{}\t{}",
                i + 1,
                e.gene_id,
                e.probability,
                e.label.as_str()
            )?;
        }
        Ok(())
    }
}

/// Rank genes by out-of-fold probability under the outer folds of `plan`.
///
/// Every gene is scored once, by the model whose training folds excluded it.
pub fn rank_genes<T: Scalar>(
    d: &Dataset,
    strategy: &SelectionStrategy,
    fcfg: &ForestConfig,
    plan: &FoldPlan,
    opts: &CvOptions,
    novel_only: bool,
) -> Result<GeneRanking<T>> {
    let run = evaluate::cross_validate::<T>(d, strategy, fcfg, plan, opts)?;
    let probs = run.out_of_fold();
    if probs.iter().any(|p| p.is_nan()) {
        return Err(Error::FoldPlan("fold plan left genes unscored".into()));
    }
    GeneRanking::from_scores(d.gene_ids(), &probs, d.labels(), novel_only)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImportanceEntry<T> {
    pub feature: String,
    pub raw: T,
    /// 100 × raw / max raw, 0 when raw ≤ 0.
    pub score: T,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImportanceReport<T> {
    pub entries: Vec<ImportanceEntry<T>>,
}

impl<T: Scalar> ImportanceReport<T> {
    /// Build from raw importances; entries end up sorted by score descending
    /// (input order on ties).
    pub fn from_raw(names: Vec<String>, raw: Vec<T>) -> Self {
        let scores = normalize_scores(&raw);
        let mut entries: Vec<ImportanceEntry<T>> = names
            .into_iter()
            .zip(raw)
            .zip(scores)
            .map(|((feature, raw), score)| ImportanceEntry {
                feature,
                raw,
                score,
            })
            .collect();
        entries.sort_by(|a, b| b.score.partial_cmp(&a.score).unwrap_or(Ordering::Equal));
        Self { entries }
    }

    /// Re-derive scores treating the current scores as raw values.
    pub fn renormalized(&self) -> Self {
        let scores: Vec<T> = self.entries.iter().map(|e| e.score).collect();
        let fresh = normalize_scores(&scores);
        Self {
            entries: self
                .entries
                .iter()
                .zip(fresh)
                .map(|(e, s)| ImportanceEntry {
                    score: s,
                    ..e.clone()
                })
                .collect(),
        }
    }

    /// `rank<TAB>feature_name<TAB>score`, ranks from 1, scores to 2 decimals.
    pub fn write_tsv<W: Write>(&self, top: Option<usize>, mut out: W) -> std::io::Result<()> {
        let n = top.unwrap_or(self.entries.len()).min(self.entries.len());
        for (i, e) in self.entries[..n].iter().enumerate() {
            writeln!(out, "{}\t{}\t{:.2}", i + 1, e.feature, e.score.to_f64_lossy())?;
        }
        Ok(())
    }
}

/// Scale so the largest positive value maps to exactly 100.
pub fn normalize_scores<T: Scalar>(raw: &[T]) -> Vec<T> {
    let max = raw.iter().copied().fold(T::zero(), T::max);
    let hundred = T::lit(100.0);
    raw.iter()
        .map(|&r| {
            if max <= T::zero() || r <= T::zero() {
                T::zero()
            } else if r == max {
                hundred
            } else {
                (r / max * hundred).min(hundred)
            }
        })
        .collect()
}

/// Permutation importance with AUC-ROC as the score.
///
/// For each feature position in `subset`, its codes are shuffled `repeats`
/// times and the drop in AUC-ROC is averaged. Features no tree splits on
/// cannot change any prediction and get exactly 0.
pub fn feature_importance<T: Scalar>(
    model: &ForestModel,
    m: &ColumnarMatrix,
    subset: &[usize],
    names: &[String],
    labels: &[bool],
    seed: u64,
    repeats: usize,
) -> Result<ImportanceReport<T>> {
    if names.len() != m.n_features() {
        return Err(Error::ShapeMismatch(format!(
            "{} names for {} features",
            names.len(),
            m.n_features()
        )));
    }
    if repeats == 0 {
        return Err(Error::InvalidParameter("repeats must be at least 1".into()));
    }
    let base_scores = forest::predict_proba::<T>(model, m, subset)?;
    let baseline = metrics::auc_roc(&base_scores, labels)?;
    let used = model.used_features();
    let n_trees = T::from_count(model.trees().len());

    let raw: Vec<T> = (0..subset.len())
        .into_par_iter()
        .map(|pos| -> Result<T> {
            if !used[pos] {
                return Ok(T::zero());
            }
            let col = m.column(subset[pos]);
            let mut drop_sum = T::zero();
            for r in 0..repeats {
                let mut rng = seed::rng(seed::derive_path(
                    seed,
                    &[stream::IMPORTANCE, pos as u64, r as u64],
                ));
                let mut perm = col.to_vec();
                perm.shuffle(&mut rng);
                let scores: Vec<T> = (0..m.n_genes())
                    .map(|g| {
                        let mut acc = T::zero();
                        for t in model.trees() {
                            acc = acc + t.score_with::<T>(|f| {
                                if f == pos {
                                    perm[g]
                                } else {
                                    m.column(subset[f])[g]
                                }
                            });
                        }
                        acc / n_trees
                    })
                    .collect();
                drop_sum = drop_sum + (baseline - metrics::auc_roc(&scores, labels)?);
            }
            Ok(drop_sum / T::from_count(repeats))
        })
        .collect::<Result<_>>()?;

    let subset_names = subset.iter().map(|&j| names[j].clone()).collect();
    Ok(ImportanceReport::from_raw(subset_names, raw))
}

//! Imbalanced-classification metrics: F1, G-Mean, AUC-ROC and AUC-PR.
//!
//! Labels are booleans (`true` = positive). Threshold metrics call a gene
//! positive when `score >= threshold`.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::num::Scalar;

pub const DEFAULT_THRESHOLD: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Confusion {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    pub fn_: usize,
}

fn check<T: Scalar>(scores: &[T], labels: &[bool]) -> Result<(usize, usize)> {
    if scores.len() != labels.len() {
        return Err(Error::ShapeMismatch(format!(
            "{} scores for {} labels",
            scores.len(),
            labels.len()
        )));
    }
    if scores.iter().any(|s| s.is_nan()) {
        return Err(Error::InvalidParameter("NaN score".into()));
    }
    let p = labels.iter().filter(|&&l| l).count();
    let n = labels.len() - p;
    if p == 0 || n == 0 {
        return Err(Error::SingleClass {
            positives: p,
            total: labels.len(),
        });
    }
    Ok((p, n))
}

pub fn confusion<T: Scalar>(scores: &[T], labels: &[bool], threshold: T) -> Confusion {
    let mut c = Confusion::default();
    for (&s, &l) in scores.iter().zip(labels) {
        match (s >= threshold, l) {
            (true, true) => c.tp += 1,
            (true, false) => c.fp += 1,
            (false, false) => c.tn += 1,
            (false, true) => c.fn_ += 1,
        }
    }
    c
}

/// F1 at a fixed threshold; 0 when precision and recall are both 0.
pub fn f1<T: Scalar>(scores: &[T], labels: &[bool], threshold: T) -> Result<T> {
    check(scores, labels)?;
    let c = confusion(scores, labels, threshold);
    let denom = 2 * c.tp + c.fp + c.fn_;
    if c.tp == 0 || denom == 0 {
        return Ok(T::zero());
    }
    Ok(T::from_count(2 * c.tp) / T::from_count(denom))
}

/// sqrt(sensitivity × specificity) at a fixed threshold.
pub fn g_mean<T: Scalar>(scores: &[T], labels: &[bool], threshold: T) -> Result<T> {
    let (p, n) = check(scores, labels)?;
    let c = confusion(scores, labels, threshold);
    let sens = T::from_count(c.tp) / T::from_count(p);
    let spec = T::from_count(c.tn) / T::from_count(n);
    Ok((sens * spec).sqrt())
}

/// Mid-ranks (1-based) of `scores`, ties sharing their average rank.
fn mid_ranks<T: Scalar>(scores: &[T]) -> Vec<T> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].partial_cmp(&scores[b]).unwrap_or(Ordering::Equal));
    let mut ranks = vec![T::zero(); scores.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && scores[order[j + 1]] == scores[order[i]] {
            j += 1;
        }
        // positions i..=j hold ranks i+1..=j+1
        let r = T::from_count(i + j + 2) / T::lit(2.0);
        for &o in &order[i..=j] {
            ranks[o] = r;
        }
        i = j + 1;
    }
    ranks
}

/// Area under the ROC curve via the Mann-Whitney U statistic.
pub fn auc_roc<T: Scalar>(scores: &[T], labels: &[bool]) -> Result<T> {
    let (p, n) = check(scores, labels)?;
    let ranks = mid_ranks(scores);
    let mut rank_sum = T::zero();
    for (&r, &l) in ranks.iter().zip(labels) {
        if l {
            rank_sum = rank_sum + r;
        }
    }
    let pf = T::from_count(p);
    let u = rank_sum - pf * (pf + T::one()) / T::lit(2.0);
    Ok(u / (pf * T::from_count(n)))
}

/// Average precision: Σ (R_i − R_{i−1}) · P_i over descending distinct scores.
pub fn auc_pr<T: Scalar>(scores: &[T], labels: &[bool]) -> Result<T> {
    let (p, _) = check(scores, labels)?;
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].partial_cmp(&scores[a]).unwrap_or(Ordering::Equal));
    let pf = T::from_count(p);
    let mut tp = 0usize;
    let mut seen = 0usize;
    let mut prev_recall = T::zero();
    let mut ap = T::zero();
    let mut i = 0;
    while i < order.len() {
        let s = scores[order[i]];
        while i < order.len() && scores[order[i]] == s {
            if labels[order[i]] {
                tp += 1;
            }
            seen += 1;
            i += 1;
        }
        let recall = T::from_count(tp) / pf;
        let precision = T::from_count(tp) / T::from_count(seen);
        ap = ap + (recall - prev_recall) * precision;
        prev_recall = recall;
    }
    Ok(ap)
}

/// The four reported metrics for one evaluation fold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FoldMetrics<T> {
    pub f1: T,
    pub auc_roc: T,
    pub auc_pr: T,
    pub g_mean: T,
}

impl<T: Scalar> FoldMetrics<T> {
    pub fn compute(scores: &[T], labels: &[bool], threshold: T) -> Result<Self> {
        Ok(Self {
            f1: f1(scores, labels, threshold)?,
            auc_roc: auc_roc(scores, labels)?,
            auc_pr: auc_pr(scores, labels)?,
            g_mean: g_mean(scores, labels, threshold)?,
        })
    }

    pub fn get(&self, metric: Metric) -> T {
        match metric {
            Metric::F1 => self.f1,
            Metric::AucRoc => self.auc_roc,
            Metric::AucPr => self.auc_pr,
            Metric::GMean => self.g_mean,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    F1,
    AucRoc,
    AucPr,
    GMean,
}

impl Metric {
    pub const ALL: [Metric; 4] = [Metric::AucRoc, Metric::F1, Metric::GMean, Metric::AucPr];

    pub fn name(self) -> &'static str {
        match self {
            Metric::F1 => "f1",
            Metric::AucRoc => "auc_roc",
            Metric::AucPr => "auc_pr",
            Metric::GMean => "g_mean",
        }
    }
}

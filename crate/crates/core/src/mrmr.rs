//! Greedy minimum-redundancy maximum-relevance selection (difference form).
//!
//! Each candidate keeps a running sum of its mutual information with every
//! feature picked so far. After a pick only the new term `I(f; last)` is
//! added, so every round costs one MI evaluation per remaining candidate.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::discretize::ColumnarMatrix;
use crate::error::{Error, Result};
use crate::mi;
use crate::num::Scalar;

/// How many features to keep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SelectionConfig {
    /// Keep `ceil(fraction × n_features)`, at least one.
    Fraction(f64),
    /// Keep exactly this many (truncated to the feature count).
    Count(usize),
}

impl SelectionConfig {
    pub fn validate(&self) -> Result<()> {
        match *self {
            SelectionConfig::Fraction(f) if !(f > 0.0 && f <= 1.0) => Err(
                Error::InvalidParameter(format!("fraction must be in (0, 1], got {f}")),
            ),
            SelectionConfig::Count(0) => {
                Err(Error::InvalidParameter("feature count must be at least 1".into()))
            }
            _ => Ok(()),
        }
    }

    /// Requested number of picks for a matrix with `n_features` columns.
    pub fn k_for(&self, n_features: usize) -> usize {
        match *self {
            SelectionConfig::Fraction(f) => threshold_to_k(f, n_features),
            SelectionConfig::Count(k) => k,
        }
    }
}

/// `ceil(fraction × n_features)`, minimum 1.
///
/// A 1e-9 slack absorbs products like `0.07 × 100 = 7.000000000000001`.
pub fn threshold_to_k(fraction: f64, n_features: usize) -> usize {
    let raw = fraction * n_features as f64;
    ((raw - 1e-9).ceil() as usize).max(1)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PickScore<T> {
    pub relevance: T,
    pub mean_redundancy: T,
    pub criterion: T,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionResult<T> {
    /// Feature indices in pick order.
    pub selected: Vec<usize>,
    pub scores: Vec<PickScore<T>>,
    pub requested_k: usize,
    /// Set when `requested_k` exceeded the number of features.
    pub truncated: bool,
}

impl<T: Scalar> SelectionResult<T> {
    /// The first `j` picks. Valid because greedy selection is prefix-stable.
    pub fn prefix(&self, j: usize) -> Self {
        let j = j.min(self.selected.len());
        Self {
            selected: self.selected[..j].to_vec(),
            scores: self.scores[..j].to_vec(),
            requested_k: j,
            truncated: false,
        }
    }

    /// One `name<TAB>relevance<TAB>mean_redundancy<TAB>criterion` line per pick.
    pub fn write_tsv<W: Write>(&self, feature_names: &[String], mut out: W) -> std::io::Result<()> {
        for (&j, s) in self.selected.iter().zip(&self.scores) {
            writeln!(
                out,
                "{}\t{}\t{}\t{}",
                feature_names[j], s.relevance, s.mean_redundancy, s.criterion
            )?;
        }
        Ok(())
    }
}

/// Incremental selector. [`select`] drives it to completion; tests and
/// callers that want the intermediate redundancy sums can step it by hand.
#[derive(Debug, Clone)]
pub struct MrmrState<'m, T> {
    matrix: &'m ColumnarMatrix,
    relevance: Vec<T>,
    accumulated: Vec<T>,
    chosen: Vec<bool>,
    selected: Vec<usize>,
    scores: Vec<PickScore<T>>,
}

impl<'m, T: Scalar> MrmrState<'m, T> {
    pub fn new(matrix: &'m ColumnarMatrix) -> Self {
        let f = matrix.n_features();
        Self {
            matrix,
            relevance: mi::batch_relevance(matrix),
            accumulated: vec![T::zero(); f],
            chosen: vec![false; f],
            selected: Vec::new(),
            scores: Vec::new(),
        }
    }

    pub fn relevance(&self) -> &[T] {
        &self.relevance
    }

    /// Running Σ_{s∈S} I(f; s) for every feature (including picked ones,
    /// whose sums stop updating once they are picked).
    pub fn accumulated_redundancy(&self) -> &[T] {
        &self.accumulated
    }

    pub fn selected(&self) -> &[usize] {
        &self.selected
    }

    pub fn is_exhausted(&self) -> bool {
        self.selected.len() == self.matrix.n_features()
    }

    /// Pick the next feature and fold its redundancy into every remaining
    /// candidate. Returns `None` once all features are taken.
    pub fn step(&mut self) -> Option<usize> {
        if self.is_exhausted() {
            return None;
        }
        let s = self.selected.len();
        let denom = T::from_count(s.max(1));
        let mut best: Option<(usize, T)> = None;
        for j in 0..self.matrix.n_features() {
            if self.chosen[j] {
                continue;
            }
            let crit = if s == 0 {
                self.relevance[j]
            } else {
                self.relevance[j] - self.accumulated[j] / denom
            };
            // strict > keeps the lowest index on ties
            if best.is_none_or(|(_, b)| crit > b) {
                best = Some((j, crit));
            }
        }
        let (pick, criterion) = best?;
        let mean_redundancy = if s == 0 {
            T::zero()
        } else {
            self.accumulated[pick] / denom
        };
        self.chosen[pick] = true;
        self.selected.push(pick);
        self.scores.push(PickScore {
            relevance: self.relevance[pick],
            mean_redundancy,
            criterion,
        });

        let remaining: Vec<usize> = (0..self.matrix.n_features())
            .filter(|&j| !self.chosen[j])
            .collect();
        let terms: Vec<T> = mi::batch_against(self.matrix, &remaining, pick);
        for (&j, t) in remaining.iter().zip(terms) {
            self.accumulated[j] = self.accumulated[j] + t;
        }
        Some(pick)
    }

    pub fn into_result(self, requested_k: usize) -> SelectionResult<T> {
        let truncated = requested_k > self.matrix.n_features();
        SelectionResult {
            selected: self.selected,
            scores: self.scores,
            requested_k,
            truncated,
        }
    }
}

/// Run greedy mRMR until `cfg` picks are made.
pub fn select<T: Scalar>(m: &ColumnarMatrix, cfg: &SelectionConfig) -> Result<SelectionResult<T>> {
    cfg.validate()?;
    if m.n_features() == 0 {
        return Err(Error::EmptyInput("matrix has no features".into()));
    }
    let requested_k = cfg.k_for(m.n_features());
    if requested_k > m.n_features() {
        log::warn!(
            "requested {requested_k} features but only {} exist; truncating",
            m.n_features()
        );
    }
    let k = requested_k.min(m.n_features());
    let mut state = MrmrState::new(m);
    for _ in 0..k {
        state.step();
    }
    Ok(state.into_result(requested_k))
}

//! Nested cross-validation with fold-local feature selection.
//!
//! Everything that looks at labels (discretization fit, mRMR, forest
//! training, threshold search) sees only the training genes of the fold
//! being evaluated.

use std::time::Instant;

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::discretize::{Discretizer, DEFAULT_MAX_LEVELS};
use crate::error::{Error, Result};
use crate::forest::{self, ForestConfig};
use crate::metrics::{self, FoldMetrics, Metric};
use crate::mrmr::{self, SelectionConfig, SelectionResult};
use crate::num::{self, Scalar};
use crate::seed::{self, stream};
use crate::stats::{self, TTestResult};

/// Fixed feature budget, or a grid of fractions tuned by inner CV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SelectionStrategy {
    Fixed(SelectionConfig),
    Search(Vec<f64>),
}

impl SelectionStrategy {
    pub fn validate(&self) -> Result<()> {
        match self {
            SelectionStrategy::Fixed(c) => c.validate(),
            SelectionStrategy::Search(grid) => {
                if grid.is_empty() {
                    return Err(Error::InvalidParameter("empty fraction grid".into()));
                }
                for &f in grid {
                    SelectionConfig::Fraction(f).validate()?;
                }
                Ok(())
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CvOptions {
    pub outer_folds: usize,
    pub inner_folds: usize,
    /// Decision threshold for F1 and G-Mean.
    pub threshold: f64,
    pub max_levels: usize,
}

impl Default for CvOptions {
    fn default() -> Self {
        Self {
            outer_folds: 10,
            inner_folds: 5,
            threshold: metrics::DEFAULT_THRESHOLD,
            max_levels: DEFAULT_MAX_LEVELS,
        }
    }
}

/// Stratified `k`-way split of positions `0..labels.len()`.
///
/// Positives and negatives are shuffled separately, laid end to end and
/// dealt round-robin, so fold sizes and per-class counts differ by at most
/// one. Each fold is returned sorted.
pub fn stratified_folds(labels: &[bool], k: usize, seed: u64) -> Vec<Vec<usize>> {
    let mut rng = seed::rng(seed);
    let mut pos: Vec<usize> = (0..labels.len()).filter(|&i| labels[i]).collect();
    let mut neg: Vec<usize> = (0..labels.len()).filter(|&i| !labels[i]).collect();
    pos.shuffle(&mut rng);
    neg.shuffle(&mut rng);
    let mut folds = vec![Vec::new(); k];
    for (i, g) in pos.into_iter().chain(neg).enumerate() {
        folds[i % k].push(g);
    }
    for f in &mut folds {
        f.sort_unstable();
    }
    folds
}

fn check_folds(folds: &[Vec<usize>], labels: &[bool], what: &str) -> Result<()> {
    for (i, f) in folds.iter().enumerate() {
        let p = f.iter().filter(|&&g| labels[g]).count();
        if p == 0 || p == f.len() {
            return Err(Error::FoldPlan(format!(
                "{what} fold {i} has {p} positives among {} genes; both classes are required",
                f.len()
            )));
        }
    }
    Ok(())
}

/// Outer test folds and, per outer fold, the inner test folds of its
/// training genes. All indices are dataset rows.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldPlan {
    pub seed: u64,
    pub outer: Vec<Vec<usize>>,
    pub inner: Vec<Vec<Vec<usize>>>,
}

impl FoldPlan {
    pub fn new(labels: &[bool], outer_k: usize, inner_k: usize, seed: u64) -> Result<Self> {
        if outer_k < 2 || inner_k < 2 {
            return Err(Error::FoldPlan("need at least 2 outer and 2 inner folds".into()));
        }
        if outer_k > labels.len() {
            return Err(Error::FoldPlan(format!(
                "{outer_k} folds for {} genes",
                labels.len()
            )));
        }
        let outer = stratified_folds(labels, outer_k, seed::derive(seed, stream::FOLDS));
        check_folds(&outer, labels, "outer")?;
        let inner = (0..outer_k)
            .map(|i| {
                let train = complement(&outer[i], labels.len());
                let local: Vec<bool> = train.iter().map(|&g| labels[g]).collect();
                stratified_folds(&local, inner_k, inner_seed(seed, i))
                    .into_iter()
                    .map(|f| f.into_iter().map(|p| train[p]).collect())
                    .collect()
            })
            .collect();
        Ok(Self { seed, outer, inner })
    }

    pub fn for_dataset(d: &Dataset, opts: &CvOptions, seed: u64) -> Result<Self> {
        Self::new(&bool_labels(d), opts.outer_folds, opts.inner_folds, seed)
    }

    pub fn n_genes(&self) -> usize {
        self.outer.iter().map(Vec::len).sum()
    }

    pub fn train_rows(&self, fold: usize) -> Vec<usize> {
        complement(&self.outer[fold], self.n_genes())
    }

    /// FNV-1a over the fold assignment; equal digests mean paired folds.
    pub fn digest(&self) -> String {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for (i, f) in self.outer.iter().enumerate() {
            for &g in f {
                for b in (i as u64).to_le_bytes().iter().chain(&(g as u64).to_le_bytes()) {
                    h ^= *b as u64;
                    h = h.wrapping_mul(0x0100_0000_01b3);
                }
            }
        }
        format!("{h:016x}")
    }
}

fn inner_seed(seed: u64, outer_fold: usize) -> u64 {
    seed::derive_path(seed, &[stream::INNER_FOLDS, outer_fold as u64])
}

fn complement(fold: &[usize], n: usize) -> Vec<usize> {
    let mut in_fold = vec![false; n];
    for &g in fold {
        in_fold[g] = true;
    }
    (0..n).filter(|&g| !in_fold[g]).collect()
}

pub fn bool_labels(d: &Dataset) -> Vec<bool> {
    d.labels().iter().map(|l| l.is_positive()).collect()
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub selection: f64,
    pub training: f64,
    pub inference: f64,
}

impl Timing {
    fn add(&mut self, o: &Timing) {
        self.selection += o.selection;
        self.training += o.training;
        self.inference += o.inference;
    }
}

/// Wall-clock seconds per phase, per outer fold and summed.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PhaseTimings {
    pub per_fold: Vec<Timing>,
    pub total: Timing,
}

/// Select → train → score on one train/test split.
pub struct SplitOutcome<T> {
    pub selection: SelectionResult<T>,
    pub test_scores: Vec<T>,
    pub timing: Timing,
}

/// Run the pipeline with `cfg` on `train` rows and score `test` rows.
pub fn fit_and_score<T: Scalar>(
    d: &Dataset,
    train: &[usize],
    test: &[usize],
    cfg: &SelectionConfig,
    fcfg: &ForestConfig,
    max_levels: usize,
) -> Result<SplitOutcome<T>> {
    let train_d = d.subset_rows(train)?;
    let test_d = d.subset_rows(test)?;
    let t0 = Instant::now();
    let disc = Discretizer::fit(&train_d, max_levels)?;
    let m_train = disc.transform(&train_d)?;
    let selection = mrmr::select::<T>(&m_train, cfg)?;
    let t1 = Instant::now();
    let model = forest::train(&m_train, &selection.selected, fcfg)?;
    let t2 = Instant::now();
    let m_test = disc.transform(&test_d)?;
    let test_scores = forest::predict_proba::<T>(&model, &m_test, &selection.selected)?;
    let t3 = Instant::now();
    Ok(SplitOutcome {
        selection,
        test_scores,
        timing: Timing {
            selection: (t1 - t0).as_secs_f64(),
            training: (t2 - t1).as_secs_f64(),
            inference: (t3 - t2).as_secs_f64(),
        },
    })
}

/// Inner-CV result for a fraction grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdChoice<T> {
    pub fraction: f64,
    /// (fraction, mean inner AUC-ROC), ascending by fraction.
    pub scores: Vec<(f64, T)>,
}

/// Pick the fraction with the best mean inner-CV AUC-ROC; ties go to the
/// smaller fraction.
///
/// One mRMR run per inner fold serves every candidate, since the selection
/// for a smaller budget is a prefix of the selection for a larger one.
pub fn select_threshold<T: Scalar>(
    d: &Dataset,
    candidates: &[f64],
    fcfg: &ForestConfig,
    seed: u64,
    opts: &CvOptions,
) -> Result<ThresholdChoice<T>> {
    SelectionStrategy::Search(candidates.to_vec()).validate()?;
    let mut grid = candidates.to_vec();
    grid.sort_by(|a, b| a.total_cmp(b));
    grid.dedup();
    if grid.len() == 1 {
        return Ok(ThresholdChoice {
            fraction: grid[0],
            scores: vec![(grid[0], T::nan())],
        });
    }

    let labels = bool_labels(d);
    let folds = stratified_folds(&labels, opts.inner_folds, seed);
    check_folds(&folds, &labels, "inner")?;
    let n_features = d.n_features();
    let ks: Vec<usize> = grid
        .iter()
        .map(|&f| mrmr::threshold_to_k(f, n_features).min(n_features))
        .collect();
    let k_max = *ks.iter().max().expect("non-empty grid");

    let per_fold: Vec<Vec<T>> = folds
        .par_iter()
        .enumerate()
        .map(|(i, test)| -> Result<Vec<T>> {
            let train = complement(test, d.n_genes());
            let train_d = d.subset_rows(&train)?;
            let test_d = d.subset_rows(test)?;
            let disc = Discretizer::fit(&train_d, opts.max_levels)?;
            let m_train = disc.transform(&train_d)?;
            let m_test = disc.transform(&test_d)?;
            let full = mrmr::select::<T>(&m_train, &SelectionConfig::Count(k_max))?;
            let test_labels: Vec<bool> = test.iter().map(|&g| labels[g]).collect();
            let fold_cfg = fcfg.with_seed(seed::derive_path(
                fcfg.seed,
                &[stream::THRESHOLD, seed, i as u64],
            ));
            ks.iter()
                .map(|&k| {
                    let subset = &full.selected[..k];
                    let model = forest::train(&m_train, subset, &fold_cfg)?;
                    let scores = forest::predict_proba::<T>(&model, &m_test, subset)?;
                    metrics::auc_roc(&scores, &test_labels)
                })
                .collect()
        })
        .collect::<Result<_>>()?;

    let scores: Vec<(f64, T)> = grid
        .iter()
        .enumerate()
        .map(|(c, &f)| {
            let col: Vec<T> = per_fold.iter().map(|v| v[c]).collect();
            (f, num::mean(&col).unwrap_or_else(T::zero))
        })
        .collect();
    let mut best = 0;
    for (c, s) in scores.iter().enumerate() {
        if s.1 > scores[best].1 {
            best = c;
        }
    }
    Ok(ThresholdChoice {
        fraction: grid[best],
        scores,
    })
}

/// Outcome of one outer fold.
#[derive(Debug, Clone)]
pub struct OuterFold<T> {
    pub test_rows: Vec<usize>,
    pub test_scores: Vec<T>,
    pub selection: SelectionResult<T>,
    pub chosen_fraction: Option<f64>,
    pub metrics: FoldMetrics<T>,
    pub timing: Timing,
}

/// All outer folds of one cross-validation run.
#[derive(Debug, Clone)]
pub struct CvRun<T> {
    pub plan: FoldPlan,
    pub folds: Vec<OuterFold<T>>,
}

impl<T: Scalar> CvRun<T> {
    /// Out-of-fold probability for every dataset row.
    pub fn out_of_fold(&self) -> Vec<T> {
        let mut out = vec![T::nan(); self.plan.n_genes()];
        for f in &self.folds {
            for (&g, &s) in f.test_rows.iter().zip(&f.test_scores) {
                out[g] = s;
            }
        }
        out
    }
}

/// Run every outer fold of `plan`.
pub fn cross_validate<T: Scalar>(
    d: &Dataset,
    strategy: &SelectionStrategy,
    fcfg: &ForestConfig,
    plan: &FoldPlan,
    opts: &CvOptions,
) -> Result<CvRun<T>> {
    strategy.validate()?;
    fcfg.validate()?;
    if plan.n_genes() != d.n_genes() {
        return Err(Error::FoldPlan(format!(
            "plan covers {} genes, dataset has {}",
            plan.n_genes(),
            d.n_genes()
        )));
    }
    let labels = bool_labels(d);
    let threshold = T::lit(opts.threshold);
    let folds = (0..plan.outer.len())
        .into_par_iter()
        .map(|i| -> Result<OuterFold<T>> {
            let test = &plan.outer[i];
            let train = plan.train_rows(i);
            let t0 = Instant::now();
            let (cfg, chosen) = match strategy {
                SelectionStrategy::Fixed(c) => (*c, None),
                SelectionStrategy::Search(grid) => {
                    let train_d = d.subset_rows(&train)?;
                    let choice = select_threshold::<T>(
                        &train_d,
                        grid,
                        fcfg,
                        inner_seed(plan.seed, i),
                        opts,
                    )?;
                    (SelectionConfig::Fraction(choice.fraction), Some(choice.fraction))
                }
            };
            let search_time = t0.elapsed().as_secs_f64();
            let fold_fcfg =
                fcfg.with_seed(seed::derive_path(fcfg.seed, &[stream::FOREST, i as u64]));
            let mut out =
                fit_and_score::<T>(d, &train, test, &cfg, &fold_fcfg, opts.max_levels)?;
            out.timing.selection += search_time;
            let test_labels: Vec<bool> = test.iter().map(|&g| labels[g]).collect();
            let metrics = FoldMetrics::compute(&out.test_scores, &test_labels, threshold)?;
            Ok(OuterFold {
                test_rows: test.clone(),
                test_scores: out.test_scores,
                selection: out.selection,
                chosen_fraction: chosen,
                metrics,
                timing: out.timing,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CvRun {
        plan: plan.clone(),
        folds,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetSummary {
    pub provenance: String,
    pub n_genes: usize,
    pub n_features: usize,
    pub n_positives: usize,
}

impl From<&Dataset> for DatasetSummary {
    fn from(d: &Dataset) -> Self {
        Self {
            provenance: d.provenance().to_string(),
            n_genes: d.n_genes(),
            n_features: d.n_features(),
            n_positives: d.n_positives(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TTestRecord<T> {
    pub metric: Metric,
    pub baseline: String,
    pub t: T,
    pub p: T,
    pub degenerate: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport<T> {
    pub dataset: DatasetSummary,
    pub seed: u64,
    pub fold_plan_digest: String,
    pub options: CvOptions,
    pub strategy: SelectionStrategy,
    pub forest: ForestConfig,
    pub per_fold: Vec<FoldMetrics<T>>,
    pub mean: FoldMetrics<T>,
    pub std: FoldMetrics<T>,
    pub selected_feature_counts: Vec<usize>,
    pub chosen_fractions: Vec<Option<f64>>,
    pub t_tests: Vec<TTestRecord<T>>,
    /// Kept out of the serialized report so reruns are byte-identical.
    #[serde(skip)]
    pub phase_timings: PhaseTimings,
}

impl<T: Scalar> EvaluationReport<T> {
    pub fn from_run(
        d: &Dataset,
        run: &CvRun<T>,
        strategy: &SelectionStrategy,
        fcfg: &ForestConfig,
        opts: &CvOptions,
    ) -> Self {
        let per_fold: Vec<FoldMetrics<T>> = run.folds.iter().map(|f| f.metrics).collect();
        let agg = |f: fn(&[T]) -> T| {
            let col = |m: Metric| -> Vec<T> { per_fold.iter().map(|x| x.get(m)).collect() };
            FoldMetrics {
                f1: f(&col(Metric::F1)),
                auc_roc: f(&col(Metric::AucRoc)),
                auc_pr: f(&col(Metric::AucPr)),
                g_mean: f(&col(Metric::GMean)),
            }
        };
        let mut total = Timing::default();
        let per_fold_t: Vec<Timing> = run.folds.iter().map(|f| f.timing).collect();
        for t in &per_fold_t {
            total.add(t);
        }
        Self {
            dataset: DatasetSummary::from(d),
            seed: run.plan.seed,
            fold_plan_digest: run.plan.digest(),
            options: *opts,
            strategy: strategy.clone(),
            forest: fcfg.clone(),
            mean: agg(|xs| num::mean(xs).unwrap_or_else(T::zero)),
            std: agg(num::sample_std),
            per_fold,
            selected_feature_counts: run.folds.iter().map(|f| f.selection.selected.len()).collect(),
            chosen_fractions: run.folds.iter().map(|f| f.chosen_fraction).collect(),
            t_tests: Vec::new(),
            phase_timings: PhaseTimings {
                per_fold: per_fold_t,
                total,
            },
        }
    }

    pub fn metric_vector(&self, m: Metric) -> Vec<T> {
        self.per_fold.iter().map(|f| f.get(m)).collect()
    }
}

/// Stratified outer CV (with inner threshold search when `strategy` asks).
pub fn nested_cv<T: Scalar>(
    d: &Dataset,
    strategy: &SelectionStrategy,
    fcfg: &ForestConfig,
    seed: u64,
    opts: &CvOptions,
) -> Result<EvaluationReport<T>> {
    let plan = FoldPlan::for_dataset(d, opts, seed)?;
    let run = cross_validate::<T>(d, strategy, fcfg, &plan, opts)?;
    Ok(EvaluationReport::from_run(d, &run, strategy, fcfg, opts))
}

/// Paired t-tests of `candidate` against `baseline`, one per metric.
///
/// Both reports must come from the same fold assignment.
pub fn compare_reports<T: Scalar>(
    candidate: &EvaluationReport<T>,
    baseline: &EvaluationReport<T>,
    baseline_name: &str,
) -> Result<Vec<TTestRecord<T>>> {
    if candidate.fold_plan_digest != baseline.fold_plan_digest
        || candidate.per_fold.len() != baseline.per_fold.len()
    {
        return Err(Error::FoldPlan(
            "reports were produced on different fold plans and cannot be paired".into(),
        ));
    }
    Metric::ALL
        .iter()
        .map(|&m| {
            let r: TTestResult<T> =
                stats::paired_t_test(&candidate.metric_vector(m), &baseline.metric_vector(m))?;
            Ok(TTestRecord {
                metric: m,
                baseline: baseline_name.to_string(),
                t: r.t,
                p: r.p,
                degenerate: r.degenerate,
            })
        })
        .collect()
}

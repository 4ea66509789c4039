use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use geneprio::evaluate::{self, bool_labels, FoldPlan, SelectionStrategy};
use geneprio::ranking::feature_importance;
use geneprio::seed::{self, stream};
use geneprio::{
    discretize, merge_common, rank_genes, select, select_threshold, Dataset, ForestModel,
    Importance, Metric, Ranking, Report, Selection, SelectionConfig,
};
use serde::{Deserialize, Serialize};

use crate::config::{RunConfig, CONFIG_LINE_PREFIX};
use crate::error::{CliError, Result};

pub const FEATURES_FILE: &str = "features.tsv";
pub const REPORT_FILE: &str = "report.json";
pub const TIMINGS_FILE: &str = "timings.json";
pub const RANKING_FILE: &str = "ranking.tsv";
pub const IMPORTANCE_FILE: &str = "importance.tsv";
pub const MODEL_FILE: &str = "model.json";
pub const MERGED_FILE: &str = "merged.csv";
pub const COMPARISON_FILE: &str = "comparison.json";

#[derive(Debug, Serialize, Deserialize)]
pub struct ReportFile {
    pub config: RunConfig,
    pub report: Report,
}

#[derive(Debug, Serialize)]
struct TimingsFile<'a> {
    config: &'a RunConfig,
    timings: &'a evaluate::PhaseTimings,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ModelFile {
    pub config: RunConfig,
    pub selected_features: Vec<String>,
    pub model: ForestModel,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareConfig {
    pub command: String,
    pub candidate: PathBuf,
    pub baseline: PathBuf,
    pub baseline_name: String,
    pub out_dir: PathBuf,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ComparisonFile {
    pub config: CompareConfig,
    pub t_tests: Vec<evaluate::TTestRecord<f64>>,
}

fn load_input(cfg: &RunConfig) -> Result<Dataset> {
    let a = Dataset::load(cfg.dataset()?, &cfg.id_col, &cfg.label_col)?;
    match &cfg.dataset_b {
        Some(path) => {
            let b = Dataset::load(path, &cfg.id_col, &cfg.label_col)?;
            let merged = merge_common(&a, &b)?;
            log::info!(
                "merged {} and {} genes into {}",
                a.n_genes(),
                b.n_genes(),
                merged.n_genes()
            );
            Ok(merged)
        }
        None => Ok(a),
    }
}

fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}

/// Create `path`, hand a buffered writer to `body`, flush.
fn write_file(path: &Path, body: impl FnOnce(&mut dyn Write) -> std::io::Result<()>) -> Result<()> {
    let file = File::create(path).map_err(|e| CliError::io(path, e))?;
    let mut w = BufWriter::new(file);
    body(&mut w)
        .and_then(|_| w.flush())
        .map_err(|e| CliError::io(path, e))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    write_file(path, |w| {
        serde_json::to_writer_pretty(&mut *w, value).map_err(std::io::Error::other)?;
        writeln!(w)
    })
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| CliError::artifact(path, e))
}

/// Text outputs start with the config line so they can be re-run from.
fn write_tsv(
    path: &Path,
    cfg: &RunConfig,
    header: &str,
    body: impl FnOnce(&mut dyn Write) -> std::io::Result<()>,
) -> Result<()> {
    write_file(path, |w| {
        writeln!(w, "{CONFIG_LINE_PREFIX}{}", cfg.to_json_line())?;
        writeln!(w, "{header}")?;
        body(w)
    })
}

fn check_tsv(path: &Path, expected_rows: usize) -> Result<()> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let rows = text.lines().filter(|l| !l.starts_with('#')).count();
    if rows != expected_rows + 1 {
        return Err(CliError::artifact(
            path,
            format!("expected {} data rows, found {}", expected_rows, rows.saturating_sub(1)),
        ));
    }
    Ok(())
}

fn cap(top: usize, len: usize) -> usize {
    if top == 0 {
        len
    } else {
        top.min(len)
    }
}

/// Choose a selection budget on the full dataset (used by select and rank).
fn full_data_selection(d: &Dataset, cfg: &RunConfig) -> Result<(SelectionConfig, Selection)> {
    let m = discretize(d, cfg.max_levels)?;
    let sc = match cfg.strategy() {
        SelectionStrategy::Fixed(sc) => sc,
        SelectionStrategy::Search(grid) => {
            let choice = select_threshold::<f64>(
                d,
                &grid,
                &cfg.forest(),
                seed::derive(cfg.seed, stream::THRESHOLD),
                &cfg.cv_options(),
            )?;
            log::info!("inner CV chose fraction {}", choice.fraction);
            SelectionConfig::Fraction(choice.fraction)
        }
    };
    let sel: Selection = select(&m, &sc)?;
    Ok((sc, sel))
}

pub fn cmd_select(cfg: &RunConfig) -> Result<()> {
    let d = load_input(cfg)?;
    let (_, sel) = full_data_selection(&d, cfg)?;
    ensure_dir(&cfg.out_dir)?;
    let path = cfg.out_dir.join(FEATURES_FILE);
    write_tsv(&path, cfg, "feature\trelevance\tmean_redundancy\tcriterion", |w| {
        sel.write_tsv(d.feature_names(), w)
    })?;
    check_tsv(&path, sel.selected.len())?;
    println!(
        "selected {} of {} features -> {}",
        sel.selected.len(),
        d.n_features(),
        path.display()
    );
    Ok(())
}

pub fn cmd_evaluate(cfg: &RunConfig) -> Result<()> {
    let d = load_input(cfg)?;
    let report: Report =
        geneprio::nested_cv(&d, &cfg.strategy(), &cfg.forest(), cfg.seed, &cfg.cv_options())?;
    ensure_dir(&cfg.out_dir)?;
    let path = cfg.out_dir.join(REPORT_FILE);
    let file = ReportFile {
        config: cfg.clone(),
        report,
    };
    write_json(&path, &file)?;
    read_json::<ReportFile>(&path)?;
    write_json(
        &cfg.out_dir.join(TIMINGS_FILE),
        &TimingsFile {
            config: cfg,
            timings: &file.report.phase_timings,
        },
    )?;

    println!(
        "{} genes ({} positive), {} features, {} outer folds",
        d.n_genes(),
        d.n_positives(),
        d.n_features(),
        cfg.outer_folds
    );
    println!("{:<10} {:>8} {:>8}", "metric", "mean", "std");
    for m in Metric::ALL {
        println!(
            "{:<10} {:>8.4} {:>8.4}",
            m.name(),
            file.report.mean.get(m),
            file.report.std.get(m)
        );
    }
    println!("report -> {}", path.display());
    Ok(())
}

pub fn cmd_rank(cfg: &RunConfig) -> Result<()> {
    let d = load_input(cfg)?;
    let opts = cfg.cv_options();
    let plan = FoldPlan::for_dataset(&d, &opts, cfg.seed)?;
    let ranking: Ranking = rank_genes(
        &d,
        &cfg.strategy(),
        &cfg.forest(),
        &plan,
        &opts,
        !cfg.include_positives,
    )?;

    let (_, sel) = full_data_selection(&d, cfg)?;
    let m = discretize(&d, cfg.max_levels)?;
    let fcfg = cfg.forest();
    let model = geneprio::train(&m, &sel.selected, &fcfg)?;
    let importance: Importance = feature_importance(
        &model,
        &m,
        &sel.selected,
        d.feature_names(),
        &bool_labels(&d),
        seed::derive(cfg.seed, stream::IMPORTANCE),
        cfg.permutation_repeats,
    )?;

    ensure_dir(&cfg.out_dir)?;
    let n_genes = cap(cfg.top_genes, ranking.entries.len());
    let rank_path = cfg.out_dir.join(RANKING_FILE);
    write_tsv(&rank_path, cfg, "rank\tgene_id\tprobability\tlabel", |w| {
        ranking.write_tsv(Some(n_genes), w)
    })?;
    check_tsv(&rank_path, n_genes)?;

    let n_feats = cap(cfg.top_features, importance.entries.len());
    let imp_path = cfg.out_dir.join(IMPORTANCE_FILE);
    write_tsv(&imp_path, cfg, "rank\tfeature_name\tscore", |w| {
        importance.write_tsv(Some(n_feats), w)
    })?;
    check_tsv(&imp_path, n_feats)?;

    let model_path = cfg.out_dir.join(MODEL_FILE);
    write_json(
        &model_path,
        &ModelFile {
            config: cfg.clone(),
            selected_features: sel
                .selected
                .iter()
                .map(|&j| d.feature_names()[j].clone())
                .collect(),
            model,
        },
    )?;
    read_json::<ModelFile>(&model_path)?
        .model
        .validate()
        .map_err(|e| CliError::artifact(&model_path, e))?;

    println!("top candidate genes");
    for (i, e) in ranking.entries[..n_genes].iter().enumerate() {
        println!("{:>3}  {:<16} {:.4}", i + 1, e.gene_id, e.probability);
    }
    println!("top features");
    for (i, e) in importance.entries[..n_feats].iter().enumerate() {
        println!("{:>3}  {:<32} {:>6.2}", i + 1, e.feature, e.score);
    }
    Ok(())
}

pub fn cmd_merge(cfg: &RunConfig) -> Result<()> {
    let a = Dataset::load(cfg.dataset()?, &cfg.id_col, &cfg.label_col)?;
    let b_path = cfg
        .dataset_b
        .as_deref()
        .ok_or_else(|| CliError::Config("merge needs a second dataset".into()))?;
    let b = Dataset::load(b_path, &cfg.id_col, &cfg.label_col)?;
    let merged = merge_common(&a, &b)?;
    ensure_dir(&cfg.out_dir)?;
    let path = cfg.out_dir.join(MERGED_FILE);
    let file = File::create(&path).map_err(|e| CliError::io(&path, e))?;
    let mut w = BufWriter::new(file);
    writeln!(w, "{CONFIG_LINE_PREFIX}{}", cfg.to_json_line()).map_err(|e| CliError::io(&path, e))?;
    merged.write(&mut w, b',', &cfg.id_col, &cfg.label_col)?;
    drop(w);
    let back = Dataset::load(&path, &cfg.id_col, &cfg.label_col)?;
    if back.n_genes() != merged.n_genes() || back.n_features() != merged.n_features() {
        return Err(CliError::artifact(&path, "merged file does not reload"));
    }
    println!(
        "{} common genes, {} + {} features -> {}",
        merged.n_genes(),
        a.n_features(),
        b.n_features(),
        path.display()
    );
    Ok(())
}

pub fn cmd_compare(cfg: &CompareConfig) -> Result<()> {
    let cand: ReportFile = read_json(&cfg.candidate)?;
    let base: ReportFile = read_json(&cfg.baseline)?;
    let t_tests = evaluate::compare_reports(&cand.report, &base.report, &cfg.baseline_name)?;
    ensure_dir(&cfg.out_dir)?;
    let path = cfg.out_dir.join(COMPARISON_FILE);
    let out = ComparisonFile {
        config: cfg.clone(),
        t_tests,
    };
    write_json(&path, &out)?;
    println!("{:<10} {:>10} {:>10}", "metric", "t", "p");
    for t in &out.t_tests {
        println!("{:<10} {:>10.4} {:>10.4}", t.metric.name(), t.t, t.p);
    }
    println!("comparison -> {}", path.display());
    Ok(())
}

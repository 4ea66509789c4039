//! Run configuration: built-in defaults, then a config file, then flags.

use std::fs;
use std::path::{Path, PathBuf};

use geneprio::evaluate::{CvOptions, SelectionStrategy};
use geneprio::{ForestConfig, SelectionConfig};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

pub const THREADS_ENV: &str = "GENEPRIO_THREADS";
pub const CONFIG_LINE_PREFIX: &str = "# config: ";

/// Everything that determines a run's outputs. Echoed into every artifact.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: String,
    pub dataset: Option<PathBuf>,
    pub dataset_b: Option<PathBuf>,
    pub id_col: String,
    pub label_col: String,
    /// One value selects a fixed fraction; several are searched by inner CV.
    pub fractions: Vec<f64>,
    pub trees: usize,
    pub max_depth: Option<usize>,
    pub min_samples_leaf: usize,
    pub features_per_split: Option<usize>,
    pub seed: u64,
    pub outer_folds: usize,
    pub inner_folds: usize,
    pub max_levels: usize,
    pub out_dir: PathBuf,
    pub top_genes: usize,
    pub top_features: usize,
    pub include_positives: bool,
    pub permutation_repeats: usize,
}

impl RunConfig {
    pub fn defaults(command: &str) -> Self {
        let cv = CvOptions::default();
        let forest = ForestConfig::default();
        Self {
            command: command.to_string(),
            dataset: None,
            dataset_b: None,
            id_col: "gene".into(),
            label_col: "label".into(),
            fractions: vec![0.05],
            trees: forest.n_trees,
            max_depth: forest.max_depth,
            min_samples_leaf: forest.min_samples_leaf,
            features_per_split: forest.features_per_split,
            seed: 0,
            outer_folds: cv.outer_folds,
            inner_folds: cv.inner_folds,
            max_levels: cv.max_levels,
            out_dir: PathBuf::from("."),
            top_genes: geneprio::ranking::DEFAULT_TOP_GENES,
            top_features: geneprio::ranking::DEFAULT_TOP_FEATURES,
            include_positives: false,
            permutation_repeats: geneprio::ranking::DEFAULT_PERMUTATION_REPEATS,
        }
    }

    /// Layer `file` then `flags` over the defaults and validate.
    pub fn resolve(command: &str, file: Option<&Overrides>, flags: &Overrides) -> Result<Self> {
        let mut cfg = Self::defaults(command);
        if let Some(f) = file {
            cfg.apply(f);
        }
        cfg.apply(flags);
        cfg.validate()?;
        Ok(cfg)
    }

    fn apply(&mut self, o: &Overrides) {
        macro_rules! set {
            ($($field:ident),*) => {$(
                if let Some(v) = &o.$field {
                    self.$field = v.clone();
                }
            )*};
        }
        set!(
            id_col,
            label_col,
            fractions,
            trees,
            min_samples_leaf,
            seed,
            outer_folds,
            inner_folds,
            max_levels,
            out_dir,
            top_genes,
            top_features,
            include_positives,
            permutation_repeats
        );
        if o.dataset.is_some() {
            self.dataset = o.dataset.clone();
        }
        if o.dataset_b.is_some() {
            self.dataset_b = o.dataset_b.clone();
        }
        if o.max_depth.is_some() {
            self.max_depth = o.max_depth;
        }
        if o.features_per_split.is_some() {
            self.features_per_split = o.features_per_split;
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.fractions.is_empty() {
            return Err(CliError::Config("no selection fraction given".into()));
        }
        self.strategy().validate()?;
        self.forest().validate()?;
        if self.outer_folds < 2 || self.inner_folds < 2 {
            return Err(CliError::Config("fold counts must be at least 2".into()));
        }
        if !(2..=256).contains(&self.max_levels) {
            return Err(CliError::Config("max_levels must be in 2..=256".into()));
        }
        if self.permutation_repeats == 0 {
            return Err(CliError::Config("permutation_repeats must be at least 1".into()));
        }
        Ok(())
    }

    pub fn dataset(&self) -> Result<&Path> {
        self.dataset
            .as_deref()
            .ok_or_else(|| CliError::Config("--dataset is required".into()))
    }

    pub fn strategy(&self) -> SelectionStrategy {
        match self.fractions.as_slice() {
            [f] => SelectionStrategy::Fixed(SelectionConfig::Fraction(*f)),
            grid => SelectionStrategy::Search(grid.to_vec()),
        }
    }

    pub fn forest(&self) -> ForestConfig {
        ForestConfig {
            n_trees: self.trees,
            max_depth: self.max_depth,
            min_samples_leaf: self.min_samples_leaf,
            features_per_split: self.features_per_split,
            seed: self.seed,
            keep_samples: false,
        }
    }

    pub fn cv_options(&self) -> CvOptions {
        CvOptions {
            outer_folds: self.outer_folds,
            inner_folds: self.inner_folds,
            max_levels: self.max_levels,
            ..CvOptions::default()
        }
    }

    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }
}

/// A partial [`RunConfig`]; the shape of config files and of parsed flags.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Overrides {
    pub command: Option<String>,
    pub dataset: Option<PathBuf>,
    pub dataset_b: Option<PathBuf>,
    pub id_col: Option<String>,
    pub label_col: Option<String>,
    pub fractions: Option<Vec<f64>>,
    pub trees: Option<usize>,
    pub max_depth: Option<usize>,
    pub min_samples_leaf: Option<usize>,
    pub features_per_split: Option<usize>,
    pub seed: Option<u64>,
    pub outer_folds: Option<usize>,
    pub inner_folds: Option<usize>,
    pub max_levels: Option<usize>,
    pub out_dir: Option<PathBuf>,
    pub top_genes: Option<usize>,
    pub top_features: Option<usize>,
    pub include_positives: Option<bool>,
    pub permutation_repeats: Option<usize>,
    pub threads: Option<usize>,
}

/// Read a config file.
///
/// Accepts a bare JSON object, any JSON artifact with a top-level `config`
/// object, or a text artifact carrying a `# config: ` line.
pub fn load_overrides(path: &Path) -> Result<Overrides> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let bad = |e: serde_json::Error| CliError::Config(format!("{}: {e}", path.display()));
    if let Some(line) = text.lines().find_map(|l| l.strip_prefix(CONFIG_LINE_PREFIX)) {
        return serde_json::from_str(line).map_err(bad);
    }
    let value: serde_json::Value = serde_json::from_str(&text).map_err(bad)?;
    match value.get("config") {
        Some(inner) if value.is_object() => serde_json::from_value(inner.clone()).map_err(bad),
        _ => serde_json::from_value(value).map_err(bad),
    }
}

/// Worker count: flag, then config file, then the environment, then all cores.
pub fn resolve_threads(flag: Option<usize>, file: Option<&Overrides>) -> Result<usize> {
    if let Some(n) = flag.or(file.and_then(|f| f.threads)) {
        return Ok(n);
    }
    match std::env::var(THREADS_ENV) {
        Ok(v) if !v.trim().is_empty() => v
            .trim()
            .parse()
            .map_err(|_| CliError::Config(format!("{THREADS_ENV}={v} is not a thread count"))),
        _ => Ok(0),
    }
}

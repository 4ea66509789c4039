//! Seeded synthetic gene × feature datasets.

use geneprio::dataset::{Dataset, Label};
use geneprio::discretize::ColumnarMatrix;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Dataset from feature columns and boolean labels.
pub fn dataset_from_columns(
    columns: &[Vec<u8>],
    labels: &[bool],
    feature_prefix: &str,
    provenance: &str,
) -> Dataset {
    let n = labels.len();
    let f = columns.len();
    let mut values = Vec::with_capacity(n * f);
    for g in 0..n {
        for c in columns {
            values.push(c[g]);
        }
    }
    Dataset::new(
        (0..n).map(|g| format!("G{g:05}")).collect(),
        (0..f).map(|j| format!("{feature_prefix}{j:05}")).collect(),
        values,
        labels
            .iter()
            .map(|&l| if l { Label::Positive } else { Label::Unlabeled })
            .collect(),
        provenance,
    )
    .expect("synthetic dataset is valid")
}

pub fn bernoulli_column<R: Rng>(rng: &mut R, n: usize, p: f64) -> Vec<u8> {
    (0..n).map(|_| rng.gen_bool(p) as u8).collect()
}

/// Sparse-ish binary noise with per-feature density drawn from [0.05, 0.5].
pub fn noise_columns<R: Rng>(rng: &mut R, n_genes: usize, n_features: usize) -> Vec<Vec<u8>> {
    (0..n_features)
        .map(|_| {
            let p = rng.gen_range(0.05..0.5);
            bernoulli_column(rng, n_genes, p)
        })
        .collect()
}

/// Random matrix with up to `max_card` categories per feature and a label
/// vector holding both classes.
pub fn random_matrix<R: Rng>(
    rng: &mut R,
    n_genes: usize,
    n_features: usize,
    max_card: u8,
) -> ColumnarMatrix {
    let columns: Vec<Vec<u8>> = (0..n_features)
        .map(|_| {
            let card = rng.gen_range(1..=max_card);
            (0..n_genes).map(|_| rng.gen_range(0..card)).collect()
        })
        .collect();
    let mut labels: Vec<u8> = (0..n_genes).map(|_| rng.gen_bool(0.3) as u8).collect();
    labels[0] = 1;
    labels[n_genes - 1] = 0;
    ColumnarMatrix::from_columns(columns, labels).expect("valid random matrix")
}

/// `n_informative` Bernoulli(½) features decide the label (positive iff at
/// least `min_hits` are set); `n_noise` features are independent noise.
/// Informative features come first.
pub fn planted(
    seed: u64,
    n_genes: usize,
    n_informative: usize,
    n_noise: usize,
    min_hits: usize,
) -> Dataset {
    let mut r = rng(seed);
    let mut columns: Vec<Vec<u8>> = (0..n_informative)
        .map(|_| bernoulli_column(&mut r, n_genes, 0.5))
        .collect();
    let labels: Vec<bool> = (0..n_genes)
        .map(|g| columns.iter().filter(|c| c[g] == 1).count() >= min_hits)
        .collect();
    columns.extend(noise_columns(&mut r, n_genes, n_noise));
    dataset_from_columns(&columns, &labels, "f", "planted")
}

/// Binary noise with labels that carry no signal at all.
pub fn null_dataset(seed: u64, n_genes: usize, n_features: usize, positive_rate: f64) -> Dataset {
    let mut r = rng(seed);
    let columns = noise_columns(&mut r, n_genes, n_features);
    let n_pos = ((n_genes as f64) * positive_rate).round() as usize;
    let mut labels: Vec<bool> = (0..n_genes).map(|g| g < n_pos).collect();
    labels.shuffle(&mut r);
    dataset_from_columns(&columns, &labels, "f", "null")
}

/// Two feature sets over the same genes. Each holds half of the signal
/// (`n_informative` label-driving features), plus independent noise that is
/// repeated `copies` times to create redundancy. Positive iff at least
/// `min_hits` of all `2 × n_informative` drivers are set.
pub struct ComplementaryPair {
    pub a: Dataset,
    pub b: Dataset,
}

pub fn complementary_pair(
    seed: u64,
    n_genes: usize,
    n_informative: usize,
    n_noise: usize,
    copies: usize,
    min_hits: usize,
) -> ComplementaryPair {
    let mut r = rng(seed);
    let drivers: Vec<Vec<u8>> = (0..2 * n_informative)
        .map(|_| bernoulli_column(&mut r, n_genes, 0.5))
        .collect();
    let labels: Vec<bool> = (0..n_genes)
        .map(|g| drivers.iter().filter(|c| c[g] == 1).count() >= min_hits)
        .collect();
    let mut build = |own: &[Vec<u8>], tag: &str| {
        let base = noise_columns(&mut r, n_genes, n_noise);
        let mut cols: Vec<Vec<u8>> = own.to_vec();
        for _ in 0..copies {
            cols.extend(base.iter().cloned());
        }
        dataset_from_columns(&cols, &labels, &format!("{tag}_"), tag)
    };
    let a = build(&drivers[..n_informative], "setA");
    let b = build(&drivers[n_informative..], "setB");
    ComplementaryPair { a, b }
}

/// Exactly `n_positives` positives; the first `n_informative` features are
/// set with probability 0.6 in positives and 0.2 elsewhere, the rest is noise.
pub fn class_shifted(
    seed: u64,
    n_genes: usize,
    n_positives: usize,
    n_informative: usize,
    n_features: usize,
) -> Dataset {
    let mut r = rng(seed);
    let mut labels: Vec<bool> = (0..n_genes).map(|g| g < n_positives).collect();
    labels.shuffle(&mut r);
    let mut columns: Vec<Vec<u8>> = (0..n_informative)
        .map(|_| {
            labels
                .iter()
                .map(|&l| r.gen_bool(if l { 0.6 } else { 0.2 }) as u8)
                .collect()
        })
        .collect();
    columns.extend(noise_columns(&mut r, n_genes, n_features - n_informative));
    dataset_from_columns(&columns, &labels, "f", "shifted")
}

//! Feature-major byte layout used by the mutual-information kernel.

use crate::dataset::Dataset;
use crate::error::{Error, Result};

/// Default number of levels: the full byte range.
pub const DEFAULT_MAX_LEVELS: usize = 256;

/// Dense-coded feature-major matrix plus the label column.
///
/// All `n_genes` codes of feature 0 come first, then feature 1, and so on.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColumnarMatrix {
    data: Vec<u8>,
    n_genes: usize,
    n_features: usize,
    cardinality: Vec<u16>,
    label_codes: Vec<u8>,
}

impl ColumnarMatrix {
    /// Assemble from already dense-coded columns.
    ///
    /// Cardinalities are taken as `max code + 1` per column.
    pub fn from_columns(columns: Vec<Vec<u8>>, label_codes: Vec<u8>) -> Result<Self> {
        let n_genes = label_codes.len();
        if n_genes == 0 {
            return Err(Error::EmptyInput("matrix has no genes".into()));
        }
        if label_codes.iter().any(|&c| c > 1) {
            return Err(Error::InvalidParameter("label codes must be 0 or 1".into()));
        }
        let positives = label_codes.iter().filter(|&&c| c == 1).count();
        if positives == 0 || positives == n_genes {
            return Err(Error::SingleClass {
                positives,
                total: n_genes,
            });
        }
        let n_features = columns.len();
        let mut data = Vec::with_capacity(n_genes * n_features);
        let mut cardinality = Vec::with_capacity(n_features);
        for (j, col) in columns.into_iter().enumerate() {
            if col.len() != n_genes {
                return Err(Error::ShapeMismatch(format!(
                    "column {j} has {} values, expected {n_genes}",
                    col.len()
                )));
            }
            let max = col.iter().copied().max().unwrap_or(0);
            cardinality.push(max as u16 + 1);
            data.extend_from_slice(&col);
        }
        Ok(Self {
            data,
            n_genes,
            n_features,
            cardinality,
            label_codes,
        })
    }

    #[inline]
    pub fn n_genes(&self) -> usize {
        self.n_genes
    }

    #[inline]
    pub fn n_features(&self) -> usize {
        self.n_features
    }

    #[inline]
    pub fn column(&self, j: usize) -> &[u8] {
        &self.data[j * self.n_genes..(j + 1) * self.n_genes]
    }

    #[inline]
    pub fn cardinality(&self, j: usize) -> usize {
        self.cardinality[j] as usize
    }

    pub fn cardinalities(&self) -> &[u16] {
        &self.cardinality
    }

    #[inline]
    pub fn labels(&self) -> &[u8] {
        &self.label_codes
    }

    pub fn n_positives(&self) -> usize {
        self.label_codes.iter().filter(|&&c| c == 1).count()
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    /// Copy with one column replaced; used for permutation probes.
    pub fn with_column(&self, j: usize, values: &[u8]) -> Result<Self> {
        if values.len() != self.n_genes {
            return Err(Error::ShapeMismatch(format!(
                "replacement column has {} values, expected {}",
                values.len(),
                self.n_genes
            )));
        }
        let mut out = self.clone();
        out.data[j * self.n_genes..(j + 1) * self.n_genes].copy_from_slice(values);
        let max = values.iter().copied().max().unwrap_or(0) as u16 + 1;
        out.cardinality[j] = out.cardinality[j].max(max);
        Ok(out)
    }
}

/// Per-feature raw value -> code lookup, fitted on one set of genes and
/// applicable to others.
///
/// Distinct values map to `0..cardinality` in ascending order. Features with
/// more than `max_levels` distinct values are first put into `max_levels`
/// equal-frequency bins; equal raw values always share a bin. Values never
/// seen during fitting take the code of the nearest smaller seen value (or 0).
#[derive(Debug, Clone)]
pub struct Discretizer {
    maps: Vec<[u8; 256]>,
}

impl Discretizer {
    pub fn fit(d: &Dataset, max_levels: usize) -> Result<Self> {
        if !(2..=256).contains(&max_levels) {
            return Err(Error::InvalidParameter(format!(
                "max_levels must be in 2..=256, got {max_levels}"
            )));
        }
        let maps = (0..d.n_features())
            .map(|j| code_map(&d.column(j), max_levels))
            .collect();
        Ok(Self { maps })
    }

    pub fn n_features(&self) -> usize {
        self.maps.len()
    }

    pub fn transform(&self, d: &Dataset) -> Result<ColumnarMatrix> {
        if d.n_features() != self.maps.len() {
            return Err(Error::ShapeMismatch(format!(
                "discretizer fitted on {} features, dataset has {}",
                self.maps.len(),
                d.n_features()
            )));
        }
        let columns: Vec<Vec<u8>> = self
            .maps
            .iter()
            .enumerate()
            .map(|(j, map)| (0..d.n_genes()).map(|g| map[d.value(g, j) as usize]).collect())
            .collect();
        let labels = d.labels().iter().map(|l| l.code()).collect();
        ColumnarMatrix::from_columns(columns, labels)
    }
}

/// Dense-code every feature of `d` using `d` itself to fit the codes.
pub fn discretize(d: &Dataset, max_levels: usize) -> Result<ColumnarMatrix> {
    Discretizer::fit(d, max_levels)?.transform(d)
}

/// Lookup table raw value -> dense code for one column.
fn code_map(raw: &[u8], max_levels: usize) -> [u8; 256] {
    let mut counts = [0usize; 256];
    for &v in raw {
        counts[v as usize] += 1;
    }
    let distinct = counts.iter().filter(|&&c| c > 0).count();
    let mut map = [0u8; 256];

    if distinct <= max_levels {
        let mut code = 0u8;
        let mut last = 0u8;
        for (v, &c) in counts.iter().enumerate() {
            if c > 0 {
                map[v] = code;
                last = code;
                code = code.wrapping_add(1);
            } else {
                map[v] = last;
            }
        }
        return map;
    }

    // Equal-frequency: a value goes to the bin its first occurrence in sorted
    // order falls into. Empty bins are squeezed out afterwards.
    let n = raw.len();
    let mut before = 0usize;
    let mut last_bin: Option<usize> = None;
    let mut code = 0u8;
    for (v, &c) in counts.iter().enumerate() {
        if c == 0 {
            map[v] = code;
            continue;
        }
        let bin = (before * max_levels / n).min(max_levels - 1);
        if let Some(prev) = last_bin {
            if bin != prev {
                code += 1;
            }
        }
        last_bin = Some(bin);
        map[v] = code;
        before += c;
    }
    map
}

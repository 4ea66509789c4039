//! Gene × feature annotation matrices with positive/unlabeled labels.
//!
//! Input files are delimiter-separated text with a header row. The delimiter
//! (comma or tab) is detected from the header line. Lines starting with `#`
//! are treated as comments, which lets output files carry provenance.

use std::collections::{HashMap, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Gene label. Unlabeled genes are treated as negatives by every classifier.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Label {
    Positive,
    Unlabeled,
}

impl Label {
    #[inline]
    pub fn is_positive(self) -> bool {
        matches!(self, Label::Positive)
    }

    #[inline]
    pub fn code(self) -> u8 {
        match self {
            Label::Positive => 1,
            Label::Unlabeled => 0,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Label::Positive => "positive",
            Label::Unlabeled => "unlabeled",
        }
    }
}

/// Validated, immutable gene × feature matrix.
///
/// Values are stored row-major (one gene per row) as byte category codes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dataset {
    gene_ids: Vec<String>,
    feature_names: Vec<String>,
    values: Vec<u8>,
    labels: Vec<Label>,
    provenance: String,
}

impl Dataset {
    /// Build a dataset from row-major values, checking every invariant.
    pub fn new(
        gene_ids: Vec<String>,
        feature_names: Vec<String>,
        values: Vec<u8>,
        labels: Vec<Label>,
        provenance: impl Into<String>,
    ) -> Result<Self> {
        let n = gene_ids.len();
        if n == 0 {
            return Err(Error::EmptyInput("dataset has no genes".into()));
        }
        if labels.len() != n {
            return Err(Error::ShapeMismatch(format!(
                "{} labels for {} genes",
                labels.len(),
                n
            )));
        }
        if values.len() != n * feature_names.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} values for {} genes × {} features",
                values.len(),
                n,
                feature_names.len()
            )));
        }
        let mut seen = HashSet::with_capacity(n);
        for id in &gene_ids {
            if !seen.insert(id.as_str()) {
                return Err(Error::DuplicateGene(id.clone()));
            }
        }
        let mut seen = HashSet::with_capacity(feature_names.len());
        for name in &feature_names {
            if !seen.insert(name.as_str()) {
                return Err(Error::DuplicateFeature(name.clone()));
            }
        }
        let positives = labels.iter().filter(|l| l.is_positive()).count();
        if positives == 0 || positives == n {
            return Err(Error::SingleClass {
                positives,
                total: n,
            });
        }
        Ok(Self {
            gene_ids,
            feature_names,
            values,
            labels,
            provenance: provenance.into(),
        })
    }

    pub fn n_genes(&self) -> usize {
        self.gene_ids.len()
    }

    pub fn n_features(&self) -> usize {
        self.feature_names.len()
    }

    pub fn n_positives(&self) -> usize {
        self.labels.iter().filter(|l| l.is_positive()).count()
    }

    pub fn gene_ids(&self) -> &[String] {
        &self.gene_ids
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn provenance(&self) -> &str {
        &self.provenance
    }

    /// Row-major value buffer.
    pub fn values(&self) -> &[u8] {
        &self.values
    }

    #[inline]
    pub fn value(&self, gene: usize, feature: usize) -> u8 {
        self.values[gene * self.n_features() + feature]
    }

    pub fn row(&self, gene: usize) -> &[u8] {
        let f = self.n_features();
        &self.values[gene * f..(gene + 1) * f]
    }

    /// Copy of feature `j` across all genes.
    pub fn column(&self, feature: usize) -> Vec<u8> {
        (0..self.n_genes()).map(|g| self.value(g, feature)).collect()
    }

    /// Restrict to the given rows, in the given order.
    ///
    /// Fails if the subset loses one of the two label classes.
    pub fn subset_rows(&self, rows: &[usize]) -> Result<Self> {
        let f = self.n_features();
        let mut values = Vec::with_capacity(rows.len() * f);
        let mut ids = Vec::with_capacity(rows.len());
        let mut labels = Vec::with_capacity(rows.len());
        for &r in rows {
            if r >= self.n_genes() {
                return Err(Error::ShapeMismatch(format!(
                    "row {r} out of range for {} genes",
                    self.n_genes()
                )));
            }
            values.extend_from_slice(self.row(r));
            ids.push(self.gene_ids[r].clone());
            labels.push(self.labels[r]);
        }
        Self::new(
            ids,
            self.feature_names.clone(),
            values,
            labels,
            self.provenance.clone(),
        )
    }

    /// Same genes and labels, different label vector. Used by permutation probes.
    pub fn with_labels(&self, labels: Vec<Label>) -> Result<Self> {
        Self::new(
            self.gene_ids.clone(),
            self.feature_names.clone(),
            self.values.clone(),
            labels,
            self.provenance.clone(),
        )
    }

    /// Parse a dataset from a file; provenance defaults to the file stem.
    pub fn load(path: impl AsRef<Path>, id_column: &str, label_column: &str) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        })?;
        let provenance = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        Self::from_reader(BufReader::new(file), id_column, label_column, &provenance)
    }

    pub fn from_reader<R: Read>(
        reader: R,
        id_column: &str,
        label_column: &str,
        provenance: &str,
    ) -> Result<Self> {
        let mut text = String::new();
        BufReader::new(reader)
            .read_to_string(&mut text)
            .map_err(|source| Error::Io {
                path: provenance.to_string(),
                source,
            })?;
        Self::parse(&text, id_column, label_column, provenance)
    }

    fn parse(text: &str, id_column: &str, label_column: &str, provenance: &str) -> Result<Self> {
        let header_line = text
            .lines()
            .map(|l| l.trim_end_matches('\r'))
            .find(|l| !l.starts_with('#') && !l.trim().is_empty())
            .ok_or_else(|| Error::EmptyInput("no header row".into()))?;
        let delimiter = if header_line.contains('\t') { b'\t' } else { b',' };

        let mut rdr = csv::ReaderBuilder::new()
            .delimiter(delimiter)
            .comment(Some(b'#'))
            .has_headers(true)
            .flexible(true)
            .from_reader(text.as_bytes());

        let header: Vec<String> = rdr
            .headers()
            .map_err(|e| Error::EmptyInput(e.to_string()))?
            .iter()
            .map(|h| h.trim().to_string())
            .collect();
        let id_idx = header
            .iter()
            .position(|h| h == id_column)
            .ok_or_else(|| Error::MissingColumn(id_column.to_string()))?;
        let label_idx = header
            .iter()
            .position(|h| h == label_column)
            .ok_or_else(|| Error::MissingColumn(label_column.to_string()))?;
        let feature_cols: Vec<usize> = (0..header.len())
            .filter(|&i| i != id_idx && i != label_idx)
            .collect();
        let feature_names: Vec<String> = feature_cols.iter().map(|&i| header[i].clone()).collect();

        let mut gene_ids = Vec::new();
        let mut labels = Vec::new();
        let mut values = Vec::new();
        for (row, record) in rdr.records().enumerate() {
            let record = record.map_err(|e| Error::EmptyInput(e.to_string()))?;
            // 1-based data row numbering
            let row = row + 1;
            if record.len() != header.len() {
                return Err(Error::RaggedRow {
                    row,
                    expected: header.len(),
                    found: record.len(),
                });
            }
            gene_ids.push(record[id_idx].trim().to_string());
            let raw_label = record[label_idx].trim();
            labels.push(match raw_label {
                "1" => Label::Positive,
                "0" => Label::Unlabeled,
                _ => {
                    return Err(Error::BadLabel {
                        row,
                        value: raw_label.to_string(),
                    })
                }
            });
            for &c in &feature_cols {
                let cell = record[c].trim();
                let v: u8 = cell.parse().map_err(|_| Error::BadCell {
                    row,
                    column: header[c].clone(),
                    value: cell.to_string(),
                })?;
                values.push(v);
            }
        }
        Self::new(gene_ids, feature_names, values, labels, provenance)
    }

    /// Write in the loadable format: id column, label column, then features.
    pub fn write<W: Write>(
        &self,
        out: W,
        delimiter: u8,
        id_column: &str,
        label_column: &str,
    ) -> Result<()> {
        let io_err = |source| Error::Io {
            path: self.provenance.clone(),
            source,
        };
        let mut wtr = csv::WriterBuilder::new()
            .delimiter(delimiter)
            .from_writer(out);
        let mut header = Vec::with_capacity(self.n_features() + 2);
        header.push(id_column);
        header.push(label_column);
        header.extend(self.feature_names.iter().map(String::as_str));
        wtr.write_record(&header)
            .map_err(|e| io_err(std::io::Error::other(e)))?;
        let mut rec: Vec<String> = Vec::with_capacity(self.n_features() + 2);
        for g in 0..self.n_genes() {
            rec.clear();
            rec.push(self.gene_ids[g].clone());
            rec.push(self.labels[g].code().to_string());
            rec.extend(self.row(g).iter().map(|v| v.to_string()));
            wtr.write_record(&rec)
                .map_err(|e| io_err(std::io::Error::other(e)))?;
        }
        wtr.flush().map_err(io_err)?;
        Ok(())
    }
}

/// Read the first non-comment line of a file; used to sniff headers.
pub fn sniff_header(path: impl AsRef<Path>) -> Result<String> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })?;
    for line in BufReader::new(file).lines() {
        let line = line.map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        })?;
        if !line.starts_with('#') && !line.trim().is_empty() {
            return Ok(line);
        }
    }
    Err(Error::EmptyInput(path.display().to_string()))
}

/// Join two datasets on their common genes.
///
/// Gene order follows `a`. Feature columns are `a`'s followed by `b`'s, each
/// name prefixed with its dataset's provenance tag. Shared genes must carry
/// the same label in both inputs.
pub fn merge_common(a: &Dataset, b: &Dataset) -> Result<Dataset> {
    let b_index: HashMap<&str, usize> = b
        .gene_ids
        .iter()
        .enumerate()
        .map(|(i, g)| (g.as_str(), i))
        .collect();

    let pairs: Vec<(usize, usize)> = a
        .gene_ids
        .iter()
        .enumerate()
        .filter_map(|(i, g)| b_index.get(g.as_str()).map(|&j| (i, j)))
        .collect();
    if pairs.is_empty() {
        return Err(Error::EmptyIntersection(
            a.provenance.clone(),
            b.provenance.clone(),
        ));
    }

    let (tag_a, tag_b) = if a.provenance == b.provenance {
        (format!("{}.1", a.provenance), format!("{}.2", b.provenance))
    } else {
        (a.provenance.clone(), b.provenance.clone())
    };
    let prefix = |tag: &str, name: &str| {
        if tag.is_empty() {
            name.to_string()
        } else {
            format!("{tag}:{name}")
        }
    };
    let feature_names: Vec<String> = a
        .feature_names
        .iter()
        .map(|n| prefix(&tag_a, n))
        .chain(b.feature_names.iter().map(|n| prefix(&tag_b, n)))
        .collect();

    let width = a.n_features() + b.n_features();
    let mut values = Vec::with_capacity(pairs.len() * width);
    let mut gene_ids = Vec::with_capacity(pairs.len());
    let mut labels = Vec::with_capacity(pairs.len());
    for &(i, j) in &pairs {
        if a.labels[i] != b.labels[j] {
            return Err(Error::LabelConflict(a.gene_ids[i].clone()));
        }
        gene_ids.push(a.gene_ids[i].clone());
        labels.push(a.labels[i]);
        values.extend_from_slice(a.row(i));
        values.extend_from_slice(b.row(j));
    }
    Dataset::new(
        gene_ids,
        feature_names,
        values,
        labels,
        format!("{}+{}", a.provenance, b.provenance),
    )
}

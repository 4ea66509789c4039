//! Plug-in mutual information over contingency tables, in bits.

use rayon::prelude::*;

use crate::discretize::ColumnarMatrix;
use crate::num::Scalar;

/// A column of a [`ColumnarMatrix`]: either a feature or the label.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variable {
    Feature(usize),
    Label,
}

impl Variable {
    #[inline]
    fn codes(self, m: &ColumnarMatrix) -> (&[u8], usize) {
        match self {
            Variable::Feature(j) => (m.column(j), m.cardinality(j)),
            Variable::Label => (m.labels(), 2),
        }
    }
}

/// Joint counts of two code vectors, row-major `card_x × card_y`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContingencyTable {
    counts: Vec<u32>,
    card_x: usize,
    card_y: usize,
    total: u32,
}

impl ContingencyTable {
    /// Count co-occurrences. Codes must be below their cardinalities.
    pub fn from_codes(x: &[u8], card_x: usize, y: &[u8], card_y: usize) -> Self {
        debug_assert_eq!(x.len(), y.len());
        let mut counts = vec![0u32; card_x * card_y];
        for (&a, &b) in x.iter().zip(y) {
            counts[a as usize * card_y + b as usize] += 1;
        }
        Self {
            counts,
            card_x,
            card_y,
            total: x.len() as u32,
        }
    }

    pub fn total(&self) -> u32 {
        self.total
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.card_x, self.card_y)
    }

    #[inline]
    pub fn get(&self, a: usize, b: usize) -> u32 {
        self.counts[a * self.card_y + b]
    }

    pub fn row_sums(&self) -> Vec<u32> {
        self.counts
            .chunks_exact(self.card_y)
            .map(|r| r.iter().sum())
            .collect()
    }

    pub fn col_sums(&self) -> Vec<u32> {
        let mut out = vec![0u32; self.card_y];
        for row in self.counts.chunks_exact(self.card_y) {
            for (o, &c) in out.iter_mut().zip(row) {
                *o += c;
            }
        }
        out
    }

    /// I(X;Y) in bits, clamped at zero.
    pub fn mutual_information<T: Scalar>(&self) -> T {
        if self.total == 0 {
            return T::zero();
        }
        let rows = self.row_sums();
        let cols = self.col_sums();
        let n = T::from_count(self.total as usize);
        let mut mi = T::zero();
        for (a, &ra) in rows.iter().enumerate() {
            if ra == 0 {
                continue;
            }
            let ra = T::from_count(ra as usize);
            for (b, &cb) in cols.iter().enumerate() {
                let c = self.get(a, b);
                if c == 0 {
                    continue;
                }
                let c = T::from_count(c as usize);
                let cb = T::from_count(cb as usize);
                mi = mi + (c / n) * ((c * n) / (ra * cb)).log2();
            }
        }
        mi.max(T::zero())
    }
}

/// Plug-in entropy of a code vector in bits.
pub fn entropy_of<T: Scalar>(codes: &[u8], cardinality: usize) -> T {
    let mut counts = vec![0u32; cardinality.max(1)];
    for &c in codes {
        counts[c as usize] += 1;
    }
    let n = T::from_count(codes.len());
    let mut h = T::zero();
    for &c in &counts {
        if c > 0 {
            let p = T::from_count(c as usize) / n;
            h = h - p * p.log2();
        }
    }
    h.max(T::zero())
}

pub fn entropy<T: Scalar>(m: &ColumnarMatrix, v: Variable) -> T {
    let (codes, card) = v.codes(m);
    entropy_of(codes, card)
}

pub fn contingency(m: &ColumnarMatrix, x: Variable, y: Variable) -> ContingencyTable {
    let (xc, xk) = x.codes(m);
    let (yc, yk) = y.codes(m);
    ContingencyTable::from_codes(xc, xk, yc, yk)
}

/// I(X;Y) between two columns of `m`, in bits.
pub fn mutual_information<T: Scalar>(m: &ColumnarMatrix, x: Variable, y: Variable) -> T {
    contingency(m, x, y).mutual_information()
}

/// Relevance I(f_j; label) for every feature.
///
/// Each value is computed independently, so the output does not depend on
/// the thread count.
pub fn batch_relevance<T: Scalar>(m: &ColumnarMatrix) -> Vec<T> {
    (0..m.n_features())
        .into_par_iter()
        .map(|j| mutual_information(m, Variable::Feature(j), Variable::Label))
        .collect()
}

/// I(f_j; f_target) for each `j` in `candidates`, in the given order.
pub fn batch_against<T: Scalar>(m: &ColumnarMatrix, candidates: &[usize], target: usize) -> Vec<T> {
    candidates
        .par_iter()
        .map(|&j| mutual_information(m, Variable::Feature(j), Variable::Feature(target)))
        .collect()
}

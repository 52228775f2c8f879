//! Minimal compressed-row storage for the real DG blocks.

use faer::c64;

#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    nrows: usize,
    ncols: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<f64>,
}

/// Triplet accumulator; duplicates are summed on conversion.
#[derive(Debug, Clone, Default)]
pub struct Triplets {
    pub entries: Vec<(usize, usize, f64)>,
}

impl Triplets {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn push(&mut self, r: usize, c: usize, v: f64) {
        self.entries.push((r, c, v));
    }

    pub fn extend(&mut self, other: Triplets) {
        self.entries.extend(other.entries);
    }
}

impl CsrMatrix {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        CsrMatrix {
            nrows,
            ncols,
            indptr: vec![0; nrows + 1],
            indices: Vec::new(),
            values: Vec::new(),
        }
    }

    /// Stable sort by (row, col) keeps the summation order of duplicates
    /// equal to their insertion order.
    pub fn from_triplets(nrows: usize, ncols: usize, mut t: Triplets) -> Self {
        t.entries.sort_by_key(|&(r, c, _)| (r, c));
        let mut indptr = vec![0; nrows + 1];
        let mut indices = Vec::with_capacity(t.entries.len());
        let mut values: Vec<f64> = Vec::with_capacity(t.entries.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in t.entries {
            assert!(r < nrows && c < ncols, "triplet ({r}, {c}) out of bounds");
            if last == Some((r, c)) {
                *values.last_mut().unwrap() += v;
            } else {
                indices.push(c);
                values.push(v);
                indptr[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for r in 0..nrows {
            indptr[r + 1] += indptr[r];
        }
        CsrMatrix {
            nrows,
            ncols,
            indptr,
            indices,
            values,
        }
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// `(col, value)` pairs of row `r`.
    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let range = self.indptr[r]..self.indptr[r + 1];
        self.indices[range.clone()]
            .iter()
            .copied()
            .zip(self.values[range].iter().copied())
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.nrows).flat_map(move |r| self.row(r).map(move |(c, v)| (r, c, v)))
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.row(r).filter(|&(j, _)| j == c).map(|(_, v)| v).sum()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Triplets::new();
        for (r, c, v) in self.iter() {
            t.push(c, r, v);
        }
        CsrMatrix::from_triplets(self.ncols, self.nrows, t)
    }

    pub fn scaled(&self, s: f64) -> Self {
        let mut m = self.clone();
        m.values.iter_mut().for_each(|v| *v *= s);
        m
    }

    pub fn mul_vec(&self, x: &[c64]) -> Vec<c64> {
        assert_eq!(x.len(), self.ncols);
        (0..self.nrows)
            .map(|r| self.row(r).map(|(c, v)| x[c] * v).sum())
            .collect()
    }

    /// `x^H A y`.
    pub fn form(&self, x: &[c64], y: &[c64]) -> c64 {
        let ay = self.mul_vec(y);
        x.iter().zip(&ay).map(|(a, b)| a.conj() * b).sum()
    }

    pub fn to_dense(&self) -> faer::Mat<f64> {
        let mut m = faer::Mat::<f64>::zeros(self.nrows, self.ncols);
        for (r, c, v) in self.iter() {
            m[(r, c)] += v;
        }
        m
    }

    /// Largest `|A_ij - A_ji|` relative to the largest entry.
    pub fn asymmetry(&self) -> f64 {
        let t = self.transpose();
        let scale = self.values.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        let mut d = 0.0f64;
        for (r, c, v) in self.iter() {
            d = d.max((v - t.get(r, c)).abs());
        }
        if scale > 0.0 {
            d / scale
        } else {
            0.0
        }
    }
}

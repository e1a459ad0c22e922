//! Compressed sparse row matrices over `C64` and a few dense helpers.
//!
//! Only what the operator models need: products, sums, adjoints, Kronecker
//! products, restriction to index subsets and dense export.

use nalgebra::{DMatrix, DVector};

use crate::error::{domain, Result};
use crate::C64;

/// Entries with modulus at or below this are dropped when assembling.
pub const DROP_TOL: f64 = 1e-15;

#[derive(Clone, Debug, PartialEq)]
pub struct Csr {
    nrows: usize,
    ncols: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    data: Vec<C64>,
}

impl Csr {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        Csr {
            nrows,
            ncols,
            indptr: vec![0; nrows + 1],
            indices: Vec::new(),
            data: Vec::new(),
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::diagonal(&vec![C64::new(1.0, 0.0); n])
    }

    pub fn diagonal(diag: &[C64]) -> Self {
        let n = diag.len();
        let mut rows = Vec::with_capacity(n);
        for (i, &v) in diag.iter().enumerate() {
            rows.push(if v.norm() > DROP_TOL {
                vec![(i, v)]
            } else {
                Vec::new()
            });
        }
        Self::from_rows(n, n, rows)
    }

    /// Assembles from `(row, col, value)` triplets, summing duplicates.
    pub fn from_triplets(
        nrows: usize,
        ncols: usize,
        mut triplets: Vec<(usize, usize, C64)>,
    ) -> Self {
        triplets.sort_unstable_by_key(|&(r, c, _)| (r, c));
        let mut indptr = vec![0; nrows + 1];
        let mut indices = Vec::with_capacity(triplets.len());
        let mut data: Vec<C64> = Vec::with_capacity(triplets.len());
        let mut k = 0;
        for r in 0..nrows {
            while k < triplets.len() && triplets[k].0 == r {
                let c = triplets[k].1;
                let mut v = C64::new(0.0, 0.0);
                while k < triplets.len() && triplets[k].0 == r && triplets[k].1 == c {
                    v += triplets[k].2;
                    k += 1;
                }
                debug_assert!(c < ncols);
                if v.norm() > DROP_TOL {
                    indices.push(c);
                    data.push(v);
                }
            }
            indptr[r + 1] = indices.len();
        }
        Csr {
            nrows,
            ncols,
            indptr,
            indices,
            data,
        }
    }

    /// Assembles from per-row entry lists (columns need not be sorted or unique).
    pub fn from_rows(nrows: usize, ncols: usize, rows: Vec<Vec<(usize, C64)>>) -> Self {
        debug_assert_eq!(rows.len(), nrows);
        let mut indptr = Vec::with_capacity(nrows + 1);
        indptr.push(0);
        let mut indices = Vec::new();
        let mut data = Vec::new();
        for mut row in rows {
            row.sort_unstable_by_key(|e| e.0);
            let mut k = 0;
            while k < row.len() {
                let c = row[k].0;
                let mut v = C64::new(0.0, 0.0);
                while k < row.len() && row[k].0 == c {
                    v += row[k].1;
                    k += 1;
                }
                if v.norm() > DROP_TOL {
                    indices.push(c);
                    data.push(v);
                }
            }
            indptr.push(indices.len());
        }
        Csr {
            nrows,
            ncols,
            indptr,
            indices,
            data,
        }
    }

    pub fn from_dense(m: &DMatrix<C64>) -> Self {
        let rows = (0..m.nrows())
            .map(|i| (0..m.ncols()).map(|j| (j, m[(i, j)])).collect())
            .collect();
        Self::from_rows(m.nrows(), m.ncols(), rows)
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.data.len()
    }

    /// Nonzero entries of row `i` as `(col, value)`.
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, C64)> + '_ {
        let span = self.indptr[i]..self.indptr[i + 1];
        self.indices[span.clone()]
            .iter()
            .copied()
            .zip(self.data[span].iter().copied())
    }

    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, C64)> + '_ {
        (0..self.nrows).flat_map(move |i| self.row(i).map(move |(j, v)| (i, j, v)))
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        let span = self.indptr[i]..self.indptr[i + 1];
        match self.indices[span.clone()].binary_search(&j) {
            Ok(k) => self.data[span.start + k],
            Err(_) => C64::new(0.0, 0.0),
        }
    }

    pub fn mul_vec(&self, x: &[C64]) -> Vec<C64> {
        assert_eq!(x.len(), self.ncols, "dimension mismatch in mul_vec");
        (0..self.nrows)
            .map(|i| self.row(i).map(|(j, v)| v * x[j]).sum())
            .collect()
    }

    pub fn matmul(&self, other: &Csr) -> Csr {
        assert_eq!(self.ncols, other.nrows, "dimension mismatch in matmul");
        let mut acc = vec![C64::new(0.0, 0.0); other.ncols];
        let mut mark = vec![usize::MAX; other.ncols];
        let mut touched = Vec::new();
        let mut rows = Vec::with_capacity(self.nrows);
        for i in 0..self.nrows {
            touched.clear();
            for (k, a) in self.row(i) {
                for (j, b) in other.row(k) {
                    if mark[j] != i {
                        mark[j] = i;
                        acc[j] = C64::new(0.0, 0.0);
                        touched.push(j);
                    }
                    acc[j] += a * b;
                }
            }
            rows.push(touched.iter().map(|&j| (j, acc[j])).collect());
        }
        Self::from_rows(self.nrows, other.ncols, rows)
    }

    /// `alpha * self + beta * other`.
    pub fn lincomb(&self, alpha: C64, other: &Csr, beta: C64) -> Csr {
        assert_eq!((self.nrows, self.ncols), (other.nrows, other.ncols));
        let rows = (0..self.nrows)
            .map(|i| {
                self.row(i)
                    .map(|(j, v)| (j, alpha * v))
                    .chain(other.row(i).map(|(j, v)| (j, beta * v)))
                    .collect()
            })
            .collect();
        Self::from_rows(self.nrows, self.ncols, rows)
    }

    pub fn add(&self, other: &Csr) -> Csr {
        self.lincomb(C64::new(1.0, 0.0), other, C64::new(1.0, 0.0))
    }

    pub fn sub(&self, other: &Csr) -> Csr {
        self.lincomb(C64::new(1.0, 0.0), other, C64::new(-1.0, 0.0))
    }

    pub fn scale(&self, s: C64) -> Csr {
        let mut out = self.clone();
        out.data.iter_mut().for_each(|v| *v *= s);
        out
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Csr {
        let mut rows = vec![Vec::new(); self.ncols];
        for (i, j, v) in self.triplets() {
            rows[j].push((i, v.conj()));
        }
        Self::from_rows(self.ncols, self.nrows, rows)
    }

    pub fn transpose(&self) -> Csr {
        let mut rows = vec![Vec::new(); self.ncols];
        for (i, j, v) in self.triplets() {
            rows[j].push((i, v));
        }
        Self::from_rows(self.ncols, self.nrows, rows)
    }

    /// Kronecker product with `self` as the slow (outer) index.
    pub fn kron(&self, other: &Csr) -> Csr {
        let nr = self.nrows * other.nrows;
        let nc = self.ncols * other.ncols;
        let mut rows = Vec::with_capacity(nr);
        for i in 0..self.nrows {
            for k in 0..other.nrows {
                let mut row = Vec::new();
                for (j, a) in self.row(i) {
                    for (l, b) in other.row(k) {
                        row.push((j * other.ncols + l, a * b));
                    }
                }
                rows.push(row);
            }
        }
        Self::from_rows(nr, nc, rows)
    }

    /// Restriction to the given rows and columns (in the given order).
    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> Csr {
        let mut colmap = vec![usize::MAX; self.ncols];
        for (k, &c) in cols.iter().enumerate() {
            colmap[c] = k;
        }
        let out = rows
            .iter()
            .map(|&r| {
                self.row(r)
                    .filter(|&(j, _)| colmap[j] != usize::MAX)
                    .map(|(j, v)| (colmap[j], v))
                    .collect()
            })
            .collect();
        Self::from_rows(rows.len(), cols.len(), out)
    }

    pub fn to_dense(&self) -> DMatrix<C64> {
        let mut m = DMatrix::zeros(self.nrows, self.ncols);
        for (i, j, v) in self.triplets() {
            m[(i, j)] = v;
        }
        m
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &Csr) -> f64 {
        self.sub(other).max_abs()
    }

    /// Frobenius norm.
    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
    }
}

/// Lifts a real matrix to complex entries.
pub fn complexify(m: &DMatrix<f64>) -> DMatrix<C64> {
    m.map(|x| C64::new(x, 0.0))
}

/// Largest singular value.
pub fn operator_norm(m: &DMatrix<C64>) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.singular_values().max()
}

/// Eigenvalues of a Hermitian matrix, ascending.
pub fn hermitian_eigenvalues(m: &DMatrix<C64>) -> Vec<f64> {
    let mut ev: Vec<f64> = m.clone().symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// Square root of a positive semidefinite Hermitian matrix; small negative
/// eigenvalues from rounding are clamped to zero.
pub fn psd_sqrt(m: &DMatrix<C64>) -> Result<DMatrix<C64>> {
    let eig = m.clone().symmetric_eigen();
    if eig.eigenvalues.iter().any(|&l| l < -1e-10) {
        return domain("matrix is not positive semidefinite");
    }
    let roots = DVector::from_iterator(
        eig.eigenvalues.len(),
        eig.eigenvalues
            .iter()
            .map(|&l| C64::new(l.max(0.0).sqrt(), 0.0)),
    );
    let v = &eig.eigenvectors;
    Ok(v * DMatrix::from_diagonal(&roots) * v.adjoint())
}

pub fn max_abs_dense(m: &DMatrix<C64>) -> f64 {
    m.iter().map(|v| v.norm()).fold(0.0, f64::max)
}

pub fn vec_norm(v: &[C64]) -> f64 {
    v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

pub fn vec_max_abs_diff(a: &[C64], b: &[C64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

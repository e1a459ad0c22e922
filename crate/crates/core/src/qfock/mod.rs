//! Truncated q-Fock spaces over `ℂ^d` with the q-deformed inner product.
//!
//! Vectors are stored in raw tensor-word coordinates and the metric is carried
//! separately by [`QGram`]. Operators are sparse matrices on the whole
//! truncated basis; the q-adjoint is `G⁻¹ X^H G`.
//!
//! Truncation: creation sends top-degree words to zero, so identities hold
//! only on inputs whose intermediate degrees stay within the cutoff.

mod basis;
mod gram;
mod wordvec;

use std::ops::{Add, Mul, Sub};

use nalgebra::DMatrix;

pub use basis::{basis_size, FockBasis, Word, BASIS_LIMIT};
pub use gram::{gram, q_inner_words, QGram};
pub use wordvec::WordVec;

use crate::error::{domain, Error, Result};
use crate::linalg::{self, Csr};
use crate::partitions::{crossings, pair_partitions};
use crate::C64;

/// Largest basis for which an operator may be exported densely.
pub const DENSE_LIMIT: usize = 20_000;

const UNITARY_TOL: f64 = 1e-10;

/// A linear operator on a truncated Fock space (or any finite model space).
#[derive(Clone, Debug, PartialEq)]
pub struct FockOperator {
    mat: Csr,
}

impl FockOperator {
    pub fn from_csr(mat: Csr) -> Self {
        FockOperator { mat }
    }

    pub fn csr(&self) -> &Csr {
        &self.mat
    }

    pub fn into_csr(self) -> Csr {
        self.mat
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        self.mat.mul_vec(v)
    }

    pub fn scale(&self, s: C64) -> Self {
        FockOperator {
            mat: self.mat.scale(s),
        }
    }

    pub fn max_abs_diff(&self, other: &FockOperator) -> f64 {
        self.mat.max_abs_diff(&other.mat)
    }

    /// Vacuum expectation `⟨Ω, XΩ⟩`.
    pub fn vacuum_trace(&self) -> C64 {
        self.mat.get(0, 0)
    }

    pub fn to_dense(&self) -> Result<DMatrix<C64>> {
        if self.dim() > DENSE_LIMIT {
            return Err(Error::Resource {
                what: "dense operator",
                needed: self.dim(),
                limit: DENSE_LIMIT,
            });
        }
        Ok(self.mat.to_dense())
    }
}

impl Mul for &FockOperator {
    type Output = FockOperator;
    fn mul(self, rhs: &FockOperator) -> FockOperator {
        FockOperator {
            mat: self.mat.matmul(&rhs.mat),
        }
    }
}

impl Add for &FockOperator {
    type Output = FockOperator;
    fn add(self, rhs: &FockOperator) -> FockOperator {
        FockOperator {
            mat: self.mat.add(&rhs.mat),
        }
    }
}

impl Sub for &FockOperator {
    type Output = FockOperator;
    fn sub(self, rhs: &FockOperator) -> FockOperator {
        FockOperator {
            mat: self.mat.sub(&rhs.mat),
        }
    }
}

/// `F_q^{≤N}(ℂ^d)`: basis, metric and the operator constructors.
#[derive(Clone, Debug)]
pub struct FockSpace {
    basis: FockBasis,
    gram: QGram,
}

impl FockSpace {
    /// Requires `|q| < 1`.
    pub fn new(dim: usize, cutoff: usize, q: f64) -> Result<Self> {
        let basis = FockBasis::new(dim, cutoff)?;
        let gram = QGram::new(&basis, q)?;
        Ok(FockSpace { basis, gram })
    }

    pub fn basis(&self) -> &FockBasis {
        &self.basis
    }

    pub fn gram(&self) -> &QGram {
        &self.gram
    }

    pub fn q(&self) -> f64 {
        self.gram.q()
    }

    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    pub fn cutoff(&self) -> usize {
        self.basis.cutoff()
    }

    pub fn size(&self) -> usize {
        self.basis.size()
    }

    pub fn vacuum(&self) -> Vec<C64> {
        self.basis_vector(&[])
    }

    pub fn basis_vector(&self, word: &[u16]) -> Vec<C64> {
        let mut v = vec![C64::new(0.0, 0.0); self.size()];
        v[self.basis.index(word)] = C64::new(1.0, 0.0);
        v
    }

    /// q-inner product, conjugate-linear in `u`.
    pub fn inner(&self, u: &[C64], v: &[C64]) -> C64 {
        let gv = self.gram.matrix().mul_vec(v);
        u.iter().zip(&gv).map(|(a, b)| a.conj() * b).sum()
    }

    pub fn norm(&self, u: &[C64]) -> f64 {
        self.inner(u, u).re.max(0.0).sqrt()
    }

    pub fn identity(&self) -> FockOperator {
        FockOperator::from_csr(Csr::identity(self.size()))
    }

    fn check_ambient(&self, z: &[C64]) -> Result<()> {
        if z.len() != self.dim() {
            return domain(format!(
                "ambient vector has length {}, expected {}",
                z.len(),
                self.dim()
            ));
        }
        Ok(())
    }

    /// `l(z)`: prepends `z`; top-degree words go to zero.
    pub fn creation(&self, z: &[C64]) -> Result<FockOperator> {
        self.check_ambient(z)?;
        let b = &self.basis;
        let mut trip = Vec::new();
        for n in 0..b.cutoff() {
            for rank in 0..b.degree_size(n) {
                let col = b.offset(n) + rank;
                for (a, &za) in z.iter().enumerate() {
                    if za != C64::new(0.0, 0.0) {
                        trip.push((b.prepend_index(a as u16, n, rank), col, za));
                    }
                }
            }
        }
        Ok(FockOperator::from_csr(Csr::from_triplets(
            self.size(),
            self.size(),
            trip,
        )))
    }

    fn deletion(&self, coef: impl Fn(u16) -> C64) -> FockOperator {
        let b = &self.basis;
        let q = self.q();
        let mut trip = Vec::new();
        let mut rest = Vec::new();
        for n in 1..=b.cutoff() {
            for col in b.degree_range(n) {
                let w = b.word(col);
                let mut qj = 1.0;
                for j in 0..n {
                    let c = coef(w[j]);
                    if c != C64::new(0.0, 0.0) && qj != 0.0 {
                        rest.clear();
                        rest.extend_from_slice(&w[..j]);
                        rest.extend_from_slice(&w[j + 1..]);
                        trip.push((b.index(&rest), col, c * qj));
                    }
                    qj *= q;
                }
            }
        }
        FockOperator::from_csr(Csr::from_triplets(self.size(), self.size(), trip))
    }

    /// `l*(z)`: `w ↦ Σ_j q^{j−1} (z, e_{w_j}) w∖j`, conjugate-linear in `z`.
    pub fn annihilation(&self, z: &[C64]) -> Result<FockOperator> {
        self.check_ambient(z)?;
        Ok(self.deletion(|a| z[a as usize].conj()))
    }

    /// `s(z) = l(z) + l*(z̄)`, complex-linear in `z`; self-adjoint for real `z`.
    pub fn field(&self, z: &[C64]) -> Result<FockOperator> {
        let l = self.creation(z)?;
        let lstar = self.deletion(|a| z[a as usize]);
        Ok(&l + &lstar)
    }

    /// Adjoint for the q-inner product.
    pub fn adjoint(&self, x: &FockOperator) -> FockOperator {
        let m = self
            .gram
            .inverse()
            .matmul(&x.mat.adjoint())
            .matmul(self.gram.matrix());
        FockOperator::from_csr(m)
    }

    /// `τ(s(h₁)⋯s(hₘ))` by applying the fields to the vacuum.
    pub fn field_moment(&self, hs: &[Vec<C64>]) -> Result<C64> {
        let mut v = self.vacuum();
        for h in hs.iter().rev() {
            v = self.field(h)?.apply(&v);
        }
        Ok(v[0])
    }

    /// Projection onto degree `n`.
    pub fn number_projection(&self, n: usize) -> FockOperator {
        let diag: Vec<C64> = (0..self.size())
            .map(|i| {
                let on = self.basis.degree_range(n).contains(&i);
                C64::new(if on { 1.0 } else { 0.0 }, 0.0)
            })
            .collect();
        FockOperator::from_csr(Csr::diagonal(&diag))
    }

    /// `T_t = Σₙ e^{−tn} Pₙ`.
    pub fn semigroup(&self, t: f64) -> FockOperator {
        let diag: Vec<C64> = (0..self.size())
            .map(|i| C64::new((-t * self.basis.degree(i) as f64).exp(), 0.0))
            .collect();
        FockOperator::from_csr(Csr::diagonal(&diag))
    }

    /// `⊕ₙ o^{⊗n}` with no checks on `o`.
    pub fn tensor_power_sum(&self, o: &DMatrix<C64>) -> Result<FockOperator> {
        let d = self.dim();
        if o.nrows() != d || o.ncols() != d {
            return domain(format!("expected a {d}×{d} matrix"));
        }
        let columns: Vec<Vec<(usize, C64)>> = (0..d)
            .map(|c| {
                (0..d)
                    .filter(|&r| o[(r, c)] != C64::new(0.0, 0.0))
                    .map(|r| (r, o[(r, c)]))
                    .collect()
            })
            .collect();
        let b = &self.basis;
        let mut trip = Vec::new();
        for n in 0..=b.cutoff() {
            for col in b.degree_range(n) {
                let w = b.word(col);
                let mut partial = vec![(0usize, C64::new(1.0, 0.0))];
                for &a in &w {
                    let mut next = Vec::with_capacity(partial.len() * columns[a as usize].len());
                    for &(rank, c) in &partial {
                        for &(r, v) in &columns[a as usize] {
                            next.push((rank * d + r, c * v));
                        }
                    }
                    partial = next;
                }
                trip.extend(
                    partial
                        .into_iter()
                        .map(|(rank, c)| (b.offset(n) + rank, col, c)),
                );
            }
        }
        Ok(FockOperator::from_csr(Csr::from_triplets(
            self.size(),
            self.size(),
            trip,
        )))
    }

    /// `Γ_q(o)` for orthogonal (or unitary) `o`.
    pub fn second_quantize_orthogonal(&self, o: &DMatrix<C64>) -> Result<FockOperator> {
        let d = o.nrows();
        if o.ncols() != d {
            return domain("matrix is not square");
        }
        let defect = linalg::max_abs_dense(&(o.adjoint() * o - DMatrix::identity(d, d)));
        if defect > UNITARY_TOL {
            return domain(format!("matrix is not orthogonal (defect {defect:.2e})"));
        }
        self.tensor_power_sum(o)
    }

    /// `Γ_q(v)` for a contraction, acting as `v^{⊗n}` on degree `n`.
    pub fn second_quantize_contraction(&self, v: &DMatrix<C64>) -> Result<FockOperator> {
        check_contraction(v)?;
        self.tensor_power_sum(v)
    }

    /// `Γ_q(v)` through the unitary dilation
    /// `o = [[v, √(1−vv*)], [−√(1−v*v), v*]]` on `ℂ^d ⊕ ℂ^d`:
    /// builds `Γ_q(o)` on the doubled space and compresses to words in the
    /// first summand.
    pub fn second_quantize_contraction_by_dilation(
        &self,
        v: &DMatrix<C64>,
    ) -> Result<FockOperator> {
        check_contraction(v)?;
        let d = self.dim();
        if v.nrows() != d {
            return domain(format!("expected a {d}×{d} matrix"));
        }
        let id = DMatrix::<C64>::identity(d, d);
        let top = linalg::psd_sqrt(&(&id - v * v.adjoint()))?;
        let bottom = linalg::psd_sqrt(&(&id - v.adjoint() * v))?;
        let mut o = DMatrix::zeros(2 * d, 2 * d);
        o.view_mut((0, 0), (d, d)).copy_from(v);
        o.view_mut((0, d), (d, d)).copy_from(&top);
        o.view_mut((d, 0), (d, d)).copy_from(&(-bottom));
        o.view_mut((d, d), (d, d)).copy_from(&v.adjoint());
        let doubled = FockSpace::new(2 * d, self.cutoff(), self.q())?;
        let big = doubled.second_quantize_orthogonal(&o)?;
        let embed: Vec<usize> = (0..self.size())
            .map(|i| doubled.basis.index(&self.basis.word(i)))
            .collect();
        Ok(FockOperator::from_csr(big.mat.submatrix(&embed, &embed)))
    }

    /// `E = Γ_q(P)` for an orthogonal projection `P` on the ambient space.
    pub fn conditional_expectation(&self, p: &DMatrix<C64>) -> Result<FockOperator> {
        let idem = linalg::max_abs_dense(&(p * p - p));
        let herm = linalg::max_abs_dense(&(p.adjoint() - p));
        if idem > UNITARY_TOL || herm > UNITARY_TOL {
            return domain("matrix is not an orthogonal projection");
        }
        self.tensor_power_sum(p)
    }

    fn half_dim(&self) -> Result<usize> {
        if !self.dim().is_multiple_of(2) {
            return domain("rotation dilation needs a doubled ambient space (even dimension)");
        }
        Ok(self.dim() / 2)
    }

    /// `α_θ = Γ_q(o_θ ⊗ id_d)` with `o_θ = [[cos θ, sin θ], [−sin θ, cos θ]]`;
    /// ambient index `summand·d + i`.
    pub fn rotation_dilation(&self, theta: f64) -> Result<FockOperator> {
        let o = rotation_matrix(self.half_dim()?, theta);
        self.second_quantize_orthogonal(&o)
    }

    /// `β = Γ_q(id ⊕ −id)`.
    pub fn flip(&self) -> Result<FockOperator> {
        let d = self.half_dim()?;
        let diag: Vec<C64> = (0..2 * d)
            .map(|i| C64::new(if i < d { 1.0 } else { -1.0 }, 0.0))
            .collect();
        let o = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(diag));
        self.second_quantize_orthogonal(&o)
    }

    /// Basis indices of words using only the first-summand letters `0..d`.
    pub fn first_summand_indices(&self) -> Result<Vec<usize>> {
        let d = self.half_dim()?;
        Ok((0..self.size())
            .filter(|&i| self.basis.word(i).iter().all(|&a| (a as usize) < d))
            .collect())
    }
}

/// `[[cos θ, sin θ], [−sin θ, cos θ]] ⊗ id_d`.
pub fn rotation_matrix(d: usize, theta: f64) -> DMatrix<C64> {
    let (s, c) = theta.sin_cos();
    let mut o = DMatrix::zeros(2 * d, 2 * d);
    for i in 0..d {
        o[(i, i)] = C64::new(c, 0.0);
        o[(i, d + i)] = C64::new(s, 0.0);
        o[(d + i, i)] = C64::new(-s, 0.0);
        o[(d + i, d + i)] = C64::new(c, 0.0);
    }
    o
}

fn check_contraction(v: &DMatrix<C64>) -> Result<()> {
    if v.nrows() != v.ncols() {
        return domain("matrix is not square");
    }
    let norm = linalg::operator_norm(v);
    if norm > 1.0 + 1e-12 {
        return domain(format!("operator norm {norm} exceeds 1"));
    }
    Ok(())
}

/// Bilinear pairing `Σ_a h_a k_a` (the complex extension of the real inner
/// product, as it enters moments of complexified fields).
pub fn bilinear(h: &[C64], k: &[C64]) -> C64 {
    h.iter().zip(k).map(|(a, b)| a * b).sum()
}

/// `Σ_{σ∈P₂(m)} q^{cr σ} Π_{{i,j}∈σ} (hᵢ, hⱼ)`; any `q ∈ [−1, 1]`.
pub fn moment_combinatorial(hs: &[Vec<C64>], q: f64) -> Result<C64> {
    if !(-1.0..=1.0).contains(&q) {
        return domain(format!("q = {q} outside [-1, 1]"));
    }
    let mut total = C64::new(0.0, 0.0);
    for sigma in pair_partitions(hs.len()) {
        let cr = crossings(&sigma)?;
        let weight: C64 = sigma
            .pairs()
            .map(|(a, b)| bilinear(&hs[a - 1], &hs[b - 1]))
            .product();
        total += weight * q.powi(cr as i32);
    }
    Ok(total)
}

/// Standard basis vector `e_a` of `ℂ^d`.
pub fn unit(d: usize, a: usize) -> Vec<C64> {
    let mut v = vec![C64::new(0.0, 0.0); d];
    v[a] = C64::new(1.0, 0.0);
    v
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    #[test]
    fn creation_annihilation_examples() {
        let q = 0.4;
        let f = FockSpace::new(2, 3, q).unwrap();
        let h = unit(2, 0);
        let k = unit(2, 1);
        let l = f.creation(&h).unwrap();
        assert_eq!(l.apply(&f.vacuum()), f.basis_vector(&[0]));
        assert_eq!(
            f.creation(&h).unwrap().apply(&f.basis_vector(&[1])),
            f.basis_vector(&[0, 1])
        );
        assert!(l
            .apply(&f.basis_vector(&[1, 1, 0]))
            .iter()
            .all(|z| z.norm() == 0.0));
        let ls = f.annihilation(&h).unwrap();
        assert!(ls.apply(&f.vacuum()).iter().all(|z| z.norm() == 0.0));
        assert_eq!(ls.apply(&f.basis_vector(&[0])), f.vacuum());
        let out = ls.apply(&f.basis_vector(&[1, 0]));
        assert_eq!(
            out,
            f.basis_vector(&[1])
                .iter()
                .map(|z| z * q)
                .collect::<Vec<_>>()
        );
        let _ = k;
    }

    #[test]
    fn field_examples() {
        let f = FockSpace::new(2, 4, 0.25).unwrap();
        let h = unit(2, 0);
        let s = f.field(&h).unwrap();
        assert_eq!(s.apply(&f.vacuum()), f.basis_vector(&[0]));
        let v = s.apply(&f.basis_vector(&[0]));
        let expect: Vec<C64> = f
            .basis_vector(&[0, 0])
            .iter()
            .zip(f.vacuum())
            .map(|(a, b)| a + b)
            .collect();
        assert_eq!(v, expect);
        let s4 = &(&s * &s) * &(&s * &s);
        assert!((s4.vacuum_trace() - c(2.25)).norm() < 1e-14);
        assert!(f.adjoint(&s).max_abs_diff(&s) < 1e-12);
    }

    #[test]
    fn adjoint_of_creation_is_annihilation() {
        let f = FockSpace::new(2, 3, -0.6).unwrap();
        let z = vec![C64::new(0.3, -1.0), C64::new(0.5, 0.2)];
        let l = f.creation(&z).unwrap();
        let ls = f.annihilation(&z).unwrap();
        // the q-adjoint is exact on the range that does not touch the cutoff
        let adj = f.adjoint(&l);
        let low: Vec<usize> = (0..f.size()).filter(|&i| f.basis().degree(i) < 3).collect();
        let all: Vec<usize> = (0..f.size()).collect();
        let a = adj.csr().submatrix(&low, &all);
        let b = ls.csr().submatrix(&low, &all);
        assert!(a.max_abs_diff(&b) < 1e-12);
    }

    #[test]
    fn combinatorial_moments() {
        let h = unit(2, 0);
        assert!(
            (moment_combinatorial(&[h.clone(), h.clone()], 0.7).unwrap() - c(1.0)).norm() < 1e-15
        );
        let four = vec![h.clone(); 4];
        assert!((moment_combinatorial(&four, 0.5).unwrap() - c(2.5)).norm() < 1e-15);
        assert!((moment_combinatorial(&vec![h.clone(); 6], 0.0).unwrap() - c(5.0)).norm() < 1e-15);
        assert_eq!(moment_combinatorial(&vec![h; 3], 0.5).unwrap(), c(0.0));
        assert!(moment_combinatorial(&[], 1.5).is_err());
    }

    #[test]
    fn second_quantization_examples() {
        let f = FockSpace::new(2, 3, 0.3).unwrap();
        let id = DMatrix::<C64>::identity(2, 2);
        assert!(
            f.second_quantize_orthogonal(&id)
                .unwrap()
                .max_abs_diff(&f.identity())
                < 1e-15
        );
        let minus = f.second_quantize_orthogonal(&(-id.clone())).unwrap();
        for i in 0..f.size() {
            let sign = if f.basis().degree(i).is_multiple_of(2) {
                1.0
            } else {
                -1.0
            };
            assert_eq!(minus.csr().get(i, i), c(sign));
        }
        let zero = f
            .second_quantize_contraction(&DMatrix::zeros(2, 2))
            .unwrap();
        assert_eq!(zero.csr().nnz(), 1);
        assert_eq!(zero.csr().get(0, 0), c(1.0));
        let big = id.scale(1.5);
        assert!(f.second_quantize_contraction(&big).is_err());
        assert!(f.second_quantize_orthogonal(&big).is_err());
        assert!(f.conditional_expectation(&big).is_err());
    }
}

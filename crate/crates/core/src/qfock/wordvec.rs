//! Sparse vectors in tensor-word coordinates, for Fock spaces whose full
//! truncated basis is too large to index (replicated ambient spaces).

use std::collections::BTreeMap;

use super::basis::{FockBasis, Word};
use super::gram::q_inner_words;
use crate::C64;

/// A finite combination of tensor words. Ordered storage keeps every
/// reduction deterministic.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct WordVec {
    terms: BTreeMap<Word, C64>,
}

impl WordVec {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn vacuum() -> Self {
        Self::from_word(Vec::new(), C64::new(1.0, 0.0))
    }

    pub fn from_word(word: Word, coef: C64) -> Self {
        let mut v = Self::zero();
        v.add_term(word, coef);
        v
    }

    /// The pure tensor `h₁⊗⋯⊗hₘ` of ambient vectors.
    pub fn tensor(vectors: &[Vec<C64>]) -> Self {
        let mut v = Self::vacuum();
        for h in vectors {
            let mut next = Self::zero();
            for (w, c) in &v.terms {
                for (a, &z) in h.iter().enumerate() {
                    if z != C64::new(0.0, 0.0) {
                        let mut nw = w.clone();
                        nw.push(a as u16);
                        next.add_term(nw, c * z);
                    }
                }
            }
            v = next;
        }
        v
    }

    pub fn add_term(&mut self, word: Word, coef: C64) {
        let e = self.terms.entry(word).or_insert(C64::new(0.0, 0.0));
        *e += coef;
    }

    pub fn get(&self, word: &[u16]) -> C64 {
        self.terms.get(word).copied().unwrap_or_default()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Word, &C64)> {
        self.terms.iter()
    }

    pub fn max_degree(&self) -> usize {
        self.terms.keys().map(Vec::len).max().unwrap_or(0)
    }

    pub fn scale(&self, s: C64) -> Self {
        WordVec {
            terms: self.terms.iter().map(|(w, c)| (w.clone(), c * s)).collect(),
        }
    }

    pub fn axpy(&mut self, s: C64, other: &WordVec) {
        for (w, c) in &other.terms {
            self.add_term(w.clone(), s * c);
        }
    }

    /// Drops coefficients with modulus at or below `tol`.
    pub fn pruned(mut self, tol: f64) -> Self {
        self.terms.retain(|_, c| c.norm() > tol);
        self
    }

    /// Keeps only words of degree `n`.
    pub fn degree_part(&self, n: usize) -> Self {
        WordVec {
            terms: self
                .terms
                .iter()
                .filter(|(w, _)| w.len() == n)
                .map(|(w, c)| (w.clone(), *c))
                .collect(),
        }
    }

    /// Scales each degree-`n` component by `e^{−tn}`.
    pub fn number_semigroup(&self, t: f64) -> Self {
        WordVec {
            terms: self
                .terms
                .iter()
                .map(|(w, c)| (w.clone(), c * (-t * w.len() as f64).exp()))
                .collect(),
        }
    }

    /// Applies `s(z) = l(z) + l*(z̄)`, discarding words longer than `max_degree`.
    /// The deletion coefficient at position `j` is `q^j z_{w_j}`.
    pub fn apply_field(&self, z: &[C64], q: f64, max_degree: usize) -> Self {
        let nz: Vec<(u16, C64)> = z
            .iter()
            .enumerate()
            .filter(|(_, c)| **c != C64::new(0.0, 0.0))
            .map(|(a, &c)| (a as u16, c))
            .collect();
        let mut out = Self::zero();
        for (w, &c) in &self.terms {
            if w.len() < max_degree {
                for &(a, za) in &nz {
                    let mut nw = Vec::with_capacity(w.len() + 1);
                    nw.push(a);
                    nw.extend_from_slice(w);
                    out.add_term(nw, c * za);
                }
            }
            if !w.is_empty() && w.len() - 1 <= max_degree {
                let mut qj = 1.0;
                for j in 0..w.len() {
                    let zj = z[w[j] as usize];
                    if zj != C64::new(0.0, 0.0) && qj != 0.0 {
                        let mut nw = Vec::with_capacity(w.len() - 1);
                        nw.extend_from_slice(&w[..j]);
                        nw.extend_from_slice(&w[j + 1..]);
                        out.add_term(nw, c * zj * qj);
                    }
                    qj *= q;
                }
            }
        }
        out
    }

    /// `l*(h)` with `(h, e_a)` conjugate-linear in `h`.
    pub fn apply_annihilation(&self, h: &[C64], q: f64) -> Self {
        let conj: Vec<C64> = h.iter().map(|c| c.conj()).collect();
        let mut out = Self::zero();
        for (w, &c) in &self.terms {
            let mut qj = 1.0;
            for j in 0..w.len() {
                let zj = conj[w[j] as usize];
                if zj != C64::new(0.0, 0.0) {
                    let mut nw = w.clone();
                    nw.remove(j);
                    out.add_term(nw, c * zj * qj);
                }
                qj *= q;
            }
        }
        out
    }

    /// q-inner product, conjugate-linear in `self`.
    pub fn q_inner(&self, other: &WordVec, q: f64) -> C64 {
        let mut by_content: BTreeMap<Word, (Vec<(&Word, C64)>, Vec<(&Word, C64)>)> =
            BTreeMap::new();
        for (w, c) in &self.terms {
            let mut k = w.clone();
            k.sort_unstable();
            by_content.entry(k).or_default().0.push((w, *c));
        }
        for (w, c) in &other.terms {
            let mut k = w.clone();
            k.sort_unstable();
            if let Some(e) = by_content.get_mut(&k) {
                e.1.push((w, *c));
            }
        }
        let mut total = C64::new(0.0, 0.0);
        for (left, right) in by_content.values() {
            for (u, cu) in left {
                for (v, cv) in right {
                    total += cu.conj() * cv * q_inner_words(u, v, q);
                }
            }
        }
        total
    }

    pub fn q_norm(&self, q: f64) -> f64 {
        self.q_inner(self, q).re.max(0.0).sqrt()
    }

    /// Dense coordinates on `basis`; words that do not fit are dropped.
    pub fn to_dense(&self, basis: &FockBasis) -> Vec<C64> {
        let mut out = vec![C64::new(0.0, 0.0); basis.size()];
        for (w, c) in &self.terms {
            if let Some(i) = basis.try_index(w) {
                out[i] += c;
            }
        }
        out
    }

    pub fn from_dense(basis: &FockBasis, v: &[C64]) -> Self {
        let mut out = Self::zero();
        for (i, &c) in v.iter().enumerate() {
            if c != C64::new(0.0, 0.0) {
                out.add_term(basis.word(i), c);
            }
        }
        out
    }
}

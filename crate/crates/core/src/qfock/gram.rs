use std::collections::HashMap;

use nalgebra::DMatrix;

use super::basis::FockBasis;
use crate::error::{domain, Result};
use crate::linalg::Csr;
use crate::partitions::permutations_with_inversions;
use crate::C64;

/// `⟨u, v⟩_q = Σ_{σ∈Sₙ} q^{inv σ} Π_i [u_{σ(i)} = v_i]` for basis words.
///
/// Evaluated by peeling the first letter of `u` through the annihilation
/// rule, so repeated letters cost far less than `n!`.
pub fn q_inner_words(u: &[u16], v: &[u16], q: f64) -> f64 {
    if u.len() != v.len() {
        return 0.0;
    }
    if u.is_empty() {
        return 1.0;
    }
    let a = u[0];
    let mut total = 0.0;
    let mut qj = 1.0;
    let mut rest = Vec::with_capacity(v.len() - 1);
    for j in 0..v.len() {
        if v[j] == a {
            rest.clear();
            rest.extend_from_slice(&v[..j]);
            rest.extend_from_slice(&v[j + 1..]);
            total += qj * q_inner_words(&u[1..], &rest, q);
        }
        qj *= q;
    }
    total
}

/// Gram matrix of all degree-`n` words over `d` letters; any real `q`.
pub fn gram(n: usize, d: usize, q: f64) -> DMatrix<f64> {
    let size = d.pow(n as u32);
    let perms = permutations_with_inversions(n);
    let mut g = DMatrix::zeros(size, size);
    let mut word = vec![0usize; n];
    for r in 0..size {
        let mut x = r;
        for slot in word.iter_mut().rev() {
            *slot = x % d;
            x /= d;
        }
        for (p, inv) in &perms {
            let c = p.iter().fold(0, |acc, &i| acc * d + word[i]);
            g[(r, c)] += q.powi(*inv as i32);
        }
    }
    g
}

#[derive(Clone, Debug)]
struct Orbit {
    members: Vec<usize>,
    g: DMatrix<f64>,
    ginv: DMatrix<f64>,
}

/// The q-Gram metric on a truncated Fock basis, stored as small dense blocks
/// over letter-multiset orbits (words in different orbits are orthogonal).
#[derive(Clone, Debug)]
pub struct QGram {
    q: f64,
    orbits: Vec<Orbit>,
    g: Csr,
    ginv: Csr,
}

impl QGram {
    /// Requires `|q| < 1` so that every block is positive definite.
    pub fn new(basis: &FockBasis, q: f64) -> Result<Self> {
        if !(q.abs() < 1.0) {
            return domain(format!("q = {q} must satisfy |q| < 1"));
        }
        let mut orbits = Vec::new();
        for n in 0..=basis.cutoff() {
            let perms: Vec<(Vec<usize>, f64)> = permutations_with_inversions(n)
                .into_iter()
                .map(|(p, inv)| (p, q.powi(inv as i32)))
                .collect();
            let mut by_content: HashMap<Vec<u16>, usize> = HashMap::new();
            let mut groups: Vec<Vec<usize>> = Vec::new();
            for idx in basis.degree_range(n) {
                let mut key = basis.word(idx);
                key.sort_unstable();
                let k = *by_content.entry(key).or_insert_with(|| {
                    groups.push(Vec::new());
                    groups.len() - 1
                });
                groups[k].push(idx);
            }
            for members in groups {
                let pos: HashMap<usize, usize> =
                    members.iter().enumerate().map(|(k, &i)| (i, k)).collect();
                let size = members.len();
                let mut g = DMatrix::zeros(size, size);
                let mut image = vec![0u16; n];
                for (a, &idx) in members.iter().enumerate() {
                    let w = basis.word(idx);
                    for (p, weight) in &perms {
                        for (slot, &i) in image.iter_mut().zip(p) {
                            *slot = w[i];
                        }
                        g[(a, pos[&basis.index(&image)])] += weight;
                    }
                }
                let ginv = g
                    .clone()
                    .cholesky()
                    .ok_or_else(|| {
                        crate::Error::Domain(format!("Gram block not positive definite at q = {q}"))
                    })?
                    .inverse();
                orbits.push(Orbit { members, g, ginv });
            }
        }
        let g = Self::assemble(basis.size(), &orbits, |o| &o.g);
        let ginv = Self::assemble(basis.size(), &orbits, |o| &o.ginv);
        Ok(QGram { q, orbits, g, ginv })
    }

    fn assemble(size: usize, orbits: &[Orbit], pick: impl Fn(&Orbit) -> &DMatrix<f64>) -> Csr {
        let mut trip = Vec::new();
        for o in orbits {
            let m = pick(o);
            for (a, &i) in o.members.iter().enumerate() {
                for (b, &j) in o.members.iter().enumerate() {
                    trip.push((i, j, C64::new(m[(a, b)], 0.0)));
                }
            }
        }
        Csr::from_triplets(size, size, trip)
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    /// The metric as a sparse matrix on the whole truncated basis.
    pub fn matrix(&self) -> &Csr {
        &self.g
    }

    pub fn inverse(&self) -> &Csr {
        &self.ginv
    }

    /// Smallest eigenvalue over all orbit blocks of degree `n`.
    pub fn min_eigenvalue(&self, basis: &FockBasis, n: usize) -> f64 {
        let range = basis.degree_range(n);
        self.orbits
            .iter()
            .filter(|o| range.contains(&o.members[0]))
            .map(|o| o.g.clone().symmetric_eigenvalues().min())
            .fold(f64::INFINITY, f64::min)
    }
}

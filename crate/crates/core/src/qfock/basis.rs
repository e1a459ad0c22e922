use std::ops::Range;

use crate::error::{domain, Error, Result};

/// A tensor word `e_{w₁}⊗⋯⊗e_{wₙ}`; letters are zero-based ambient indices.
pub type Word = Vec<u16>;

/// Largest truncated Fock basis the sparse constructions will allocate.
pub const BASIS_LIMIT: usize = 4_000_000;

/// Degree-graded basis of all words of length `0..=cutoff` over `dim` letters.
///
/// Words of degree `n` occupy the contiguous range `degree_range(n)`; inside a
/// degree they are ordered by their big-endian base-`dim` rank, so prepending
/// letter `a` to a word of degree `n` with rank `r` gives rank `a·dimⁿ + r`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FockBasis {
    dim: usize,
    cutoff: usize,
    offsets: Vec<usize>,
    powers: Vec<usize>,
}

/// `Σ_{n=0}^{cutoff} dimⁿ`, or `None` on overflow.
pub fn basis_size(dim: usize, cutoff: usize) -> Option<usize> {
    let mut total: usize = 0;
    let mut p: usize = 1;
    for n in 0..=cutoff {
        total = total.checked_add(p)?;
        if n < cutoff {
            p = p.checked_mul(dim)?;
        }
    }
    Some(total)
}

impl FockBasis {
    pub fn new(dim: usize, cutoff: usize) -> Result<Self> {
        if dim == 0 {
            return domain("ambient dimension must be positive");
        }
        if dim > u16::MAX as usize {
            return domain("ambient dimension exceeds the letter range");
        }
        let size = basis_size(dim, cutoff).unwrap_or(usize::MAX);
        if size > BASIS_LIMIT {
            return Err(Error::Resource {
                what: "Fock basis",
                needed: size,
                limit: BASIS_LIMIT,
            });
        }
        let mut offsets = vec![0];
        let mut powers = vec![1];
        for n in 0..=cutoff {
            offsets.push(offsets[n] + powers[n]);
            powers.push(powers[n] * dim);
        }
        Ok(FockBasis {
            dim,
            cutoff,
            offsets,
            powers,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn size(&self) -> usize {
        self.offsets[self.cutoff + 1]
    }

    pub fn degree_range(&self, n: usize) -> Range<usize> {
        self.offsets[n]..self.offsets[n + 1]
    }

    /// Number of words of degree `n`, i.e. `dimⁿ`.
    pub fn degree_size(&self, n: usize) -> usize {
        self.powers[n]
    }

    pub fn offset(&self, n: usize) -> usize {
        self.offsets[n]
    }

    /// Rank of a word inside its degree.
    pub fn rank(&self, word: &[u16]) -> usize {
        word.iter().fold(0, |r, &a| r * self.dim + a as usize)
    }

    /// Global index of a word; panics when the word is longer than the cutoff.
    pub fn index(&self, word: &[u16]) -> usize {
        assert!(word.len() <= self.cutoff, "word longer than the cutoff");
        self.offsets[word.len()] + self.rank(word)
    }

    /// Global index, or `None` if the word does not fit.
    pub fn try_index(&self, word: &[u16]) -> Option<usize> {
        if word.len() > self.cutoff || word.iter().any(|&a| a as usize >= self.dim) {
            None
        } else {
            Some(self.index(word))
        }
    }

    pub fn degree(&self, index: usize) -> usize {
        assert!(index < self.size());
        self.offsets.partition_point(|&o| o <= index) - 1
    }

    pub fn word(&self, index: usize) -> Word {
        let n = self.degree(index);
        let mut r = index - self.offsets[n];
        let mut w = vec![0u16; n];
        for slot in w.iter_mut().rev() {
            *slot = (r % self.dim) as u16;
            r /= self.dim;
        }
        w
    }

    /// Words of degree `n` in index order.
    pub fn words(&self, n: usize) -> impl Iterator<Item = Word> + '_ {
        self.degree_range(n).map(move |i| self.word(i))
    }

    /// Index of `a ⊗ w` given the degree and rank of `w`.
    pub fn prepend_index(&self, a: u16, degree: usize, rank: usize) -> usize {
        self.offsets[degree + 1] + a as usize * self.powers[degree] + rank
    }
}

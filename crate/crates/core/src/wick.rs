//! Wick words, the product expansion of two Wick words, and finite replica
//! surrogates `u_n` and `x_σⁿ` for ultraproduct statements.

use std::cell::RefCell;
use std::collections::HashMap;

use crate::error::{domain, Result};
use crate::partitions::{crossings, p12_partitions, Partition};
use crate::qfock::{bilinear, FockOperator, FockSpace, Word, WordVec};
use crate::C64;

/// Builds `W(ξ)` on a fixed Fock space, memoizing basis words.
///
/// Uses `W(h⊗ξ') = s(h)W(ξ') − W(l*(h)ξ')`, which follows from
/// `s(h)W(ξ')Ω = h⊗ξ' + l*(h)ξ'`. On inputs of degree at most
/// `cutoff − deg ξ` the truncated matrix agrees with the untruncated operator.
#[derive(Debug)]
pub struct WickCalculus<'a> {
    space: &'a FockSpace,
    fields: Vec<FockOperator>,
    memo: RefCell<HashMap<Word, FockOperator>>,
}

impl<'a> WickCalculus<'a> {
    pub fn new(space: &'a FockSpace) -> Result<Self> {
        let d = space.dim();
        let fields = (0..d)
            .map(|a| space.field(&crate::qfock::unit(d, a)))
            .collect::<Result<_>>()?;
        Ok(WickCalculus {
            space,
            fields,
            memo: RefCell::new(HashMap::new()),
        })
    }

    pub fn space(&self) -> &FockSpace {
        self.space
    }

    /// `W(e_{w₁}⊗⋯⊗e_{wₙ})`.
    pub fn basis_word(&self, w: &[u16]) -> Result<FockOperator> {
        if w.len() > self.space.cutoff() {
            return domain(format!(
                "word of degree {} exceeds the cutoff {}",
                w.len(),
                self.space.cutoff()
            ));
        }
        if let Some(op) = self.memo.borrow().get(w) {
            return Ok(op.clone());
        }
        let op = if w.is_empty() {
            self.space.identity()
        } else {
            let a = w[0];
            let tail = &w[1..];
            let mut op = &self.fields[a as usize] * &self.basis_word(tail)?;
            let q = self.space.q();
            let mut qj = 1.0;
            for j in 0..tail.len() {
                if tail[j] == a && qj != 0.0 {
                    let mut rest = tail.to_vec();
                    rest.remove(j);
                    op = &op - &self.basis_word(&rest)?.scale(C64::new(qj, 0.0));
                }
                qj *= q;
            }
            op
        };
        self.memo.borrow_mut().insert(w.to_vec(), op.clone());
        Ok(op)
    }

    /// `W(ξ)` for a combination of words.
    pub fn wick_word(&self, xi: &WordVec) -> Result<FockOperator> {
        let mut acc: Option<FockOperator> = None;
        for (w, &c) in xi.iter() {
            let term = self.basis_word(w)?.scale(c);
            acc = Some(match acc {
                None => term,
                Some(a) => &a + &term,
            });
        }
        Ok(acc.unwrap_or_else(|| self.space.identity().scale(C64::new(0.0, 0.0))))
    }

    /// The tensor `ζ` with `W(ξ)W(η) = W(ζ)`, checked against the cutoff.
    pub fn product(&self, xi: &WordVec, eta: &WordVec) -> Result<WordVec> {
        let total = xi.max_degree() + eta.max_degree();
        if total > self.space.cutoff() {
            return domain(format!(
                "product of degrees summing to {total} exceeds the cutoff {}",
                self.space.cutoff()
            ));
        }
        Ok(wick_product_expansion(xi, eta, self.space.q()))
    }
}

/// `f_σ = q^{cr σ} Π_{{l,r}∈σ} (h_l, h_r)`, with the pairing bilinear.
pub fn f_sigma(sigma: &Partition, hs: &[Vec<C64>], q: f64) -> Result<C64> {
    if hs.len() != sigma.m() {
        return domain("one vector per point of the partition is required");
    }
    let cr = crossings(sigma)?;
    let pairs: C64 = sigma
        .pairs()
        .map(|(l, r)| bilinear(&hs[l - 1], &hs[r - 1]))
        .product();
    Ok(pairs * q.powi(cr as i32))
}

/// One summand `coef · W(word)` of a product of two basis Wick words.
#[derive(Clone, Debug, PartialEq)]
pub struct ExpansionTerm {
    pub sigma: Partition,
    pub coef: C64,
    pub word: Word,
}

/// Partitions of `{1, …, m+m'}` into singletons and pairs whose pairs all
/// join a point `≤ m` with a point `> m`.
pub fn bipartite_p12(m: usize, mp: usize) -> impl Iterator<Item = Partition> {
    p12_partitions(m + mp).filter(move |s| s.pairs().all(|(a, b)| a <= m && b > m))
}

/// Expansion of `W(x)W(y)` for basis words `x`, `y`: one term per bipartite
/// singleton/pair partition, keeping the unpaired letters in order.
pub fn product_expansion_words(x: &[u16], y: &[u16], q: f64) -> Vec<ExpansionTerm> {
    let m = x.len();
    let letter = |i: usize| if i <= m { x[i - 1] } else { y[i - m - 1] };
    bipartite_p12(m, y.len())
        .filter(|s| s.pairs().all(|(a, b)| letter(a) == letter(b)))
        .map(|sigma| {
            let cr = crossings(&sigma).expect("blocks have size at most two");
            let word = sigma.singletons().into_iter().map(letter).collect();
            ExpansionTerm {
                coef: C64::new(q.powi(cr as i32), 0.0),
                word,
                sigma,
            }
        })
        .collect()
}

/// Bilinear extension of [`product_expansion_words`], merged by word.
pub fn wick_product_expansion(xi: &WordVec, eta: &WordVec, q: f64) -> WordVec {
    let mut out = WordVec::zero();
    for (x, &cx) in xi.iter() {
        for (y, &cy) in eta.iter() {
            for t in product_expansion_words(x, y, q) {
                out.add_term(t.word, cx * cy * t.coef);
            }
        }
    }
    out
}

/// `h ⊗ e_j` in `ℂ^{d·n}` with replicated index `(i, j) ↦ j·d + i`.
pub fn replicate(h: &[C64], j: usize, n: usize) -> Vec<C64> {
    let d = h.len();
    let mut v = vec![C64::new(0.0, 0.0); d * n];
    v[j * d..(j + 1) * d].copy_from_slice(h);
    v
}

/// `h ⊗ f` with `f = (1, …, 1)/√n`, so that `s(h⊗f) = n^{−1/2} Σ_j s(h⊗e_j)`.
pub fn replicate_average(h: &[C64], n: usize) -> Vec<C64> {
    let s = C64::new(1.0 / (n as f64).sqrt(), 0.0);
    (0..n).flat_map(|_| h.iter().map(move |z| z * s)).collect()
}

/// `u_n(s(h₁)⋯s(hₘ))` as an operator on a replicated space of dimension `d·n`.
pub fn un_embed(replicated: &FockSpace, hs: &[Vec<C64>], n: usize) -> Result<FockOperator> {
    let mut op = replicated.identity();
    for h in hs {
        if h.len() * n != replicated.dim() {
            return domain("replicated space has the wrong dimension");
        }
        op = &op * &replicated.field(&replicate_average(h, n))?;
    }
    Ok(op)
}

/// `τ(u_n(s(h₁)⋯s(hₘ)))` evaluated on sparse word vectors.
pub fn un_moment(hs: &[Vec<C64>], n: usize, q: f64) -> C64 {
    let mut v = WordVec::vacuum();
    for (k, h) in hs.iter().enumerate().rev() {
        v = v.apply_field(&replicate_average(h, n), q, k);
    }
    v.get(&[])
}

/// `x_σⁿ(h₁, …, hₘ) = n^{−m/2} Σ_{⟨j⟩=σ} s(h₁⊗e_{j₁})⋯s(hₘ⊗e_{jₘ})`, stored as
/// its list of monomials (one per injective labelling of the blocks).
#[derive(Clone, Debug)]
pub struct SigmaWord {
    sigma: Partition,
    n: usize,
    scale: C64,
    monomials: Vec<Vec<Vec<C64>>>,
}

impl SigmaWord {
    pub fn new(sigma: &Partition, hs: &[Vec<C64>], n: usize) -> Result<Self> {
        let m = sigma.m();
        if hs.len() != m {
            return domain("one vector per point of the partition is required");
        }
        if n == 0 {
            return domain("replica count must be positive");
        }
        let owner = sigma.block_of();
        let blocks = sigma.num_blocks();
        let mut monomials = Vec::new();
        let mut labels = vec![0usize; blocks];
        let mut used = vec![false; n];
        fn rec(k: usize, labels: &mut [usize], used: &mut [bool], emit: &mut dyn FnMut(&[usize])) {
            if k == labels.len() {
                emit(labels);
                return;
            }
            for j in 0..used.len() {
                if !used[j] {
                    used[j] = true;
                    labels[k] = j;
                    rec(k + 1, labels, used, emit);
                    used[j] = false;
                }
            }
        }
        rec(0, &mut labels, &mut used, &mut |lab| {
            monomials.push(
                (1..=m)
                    .map(|i| replicate(&hs[i - 1], lab[owner[i]], n))
                    .collect(),
            );
        });
        Ok(SigmaWord {
            sigma: sigma.clone(),
            n,
            scale: C64::new((n as f64).powf(-(m as f64) / 2.0), 0.0),
            monomials,
        })
    }

    pub fn sigma(&self) -> &Partition {
        &self.sigma
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn num_monomials(&self) -> usize {
        self.monomials.len()
    }

    /// `x*`: reversed monomials with conjugated vectors.
    pub fn adjoint(&self) -> SigmaWord {
        SigmaWord {
            sigma: self.sigma.reversed(),
            n: self.n,
            scale: self.scale.conj(),
            monomials: self
                .monomials
                .iter()
                .map(|mono| {
                    mono.iter()
                        .rev()
                        .map(|h| h.iter().map(|z| z.conj()).collect())
                        .collect()
                })
                .collect(),
        }
    }

    /// Applies `x` to `v`; `after` is the number of field operators that
    /// will still act afterwards, used to drop words that cannot return to Ω.
    pub fn apply(&self, v: &WordVec, q: f64, after: usize) -> WordVec {
        let mut out = WordVec::zero();
        for mono in &self.monomials {
            let mut w = v.clone();
            for (k, h) in mono.iter().enumerate().rev() {
                w = w.apply_field(h, q, after + k);
            }
            out.axpy(self.scale, &w);
        }
        out
    }

    /// `x Ω` with no pruning.
    pub fn vacuum_vector(&self, q: f64) -> WordVec {
        self.apply(&WordVec::vacuum(), q, usize::MAX / 2)
    }

    /// `‖x‖₄ = τ((x*x)²)^{1/4}`.
    pub fn norm4(&self, q: f64) -> f64 {
        let m = self.sigma.m();
        let xs = self.adjoint();
        let mut v = WordVec::vacuum();
        v = self.apply(&v, q, 3 * m);
        v = xs.apply(&v, q, 2 * m);
        v = self.apply(&v, q, m);
        v = xs.apply(&v, q, 0);
        v.get(&[]).re.max(0.0).powf(0.25)
    }

    /// The operator on a replicated Fock space of dimension `d·n`.
    pub fn operator(&self, replicated: &FockSpace) -> Result<FockOperator> {
        let mut acc = replicated.identity().scale(C64::new(0.0, 0.0));
        for mono in &self.monomials {
            let mut op = replicated.identity();
            for h in mono {
                op = &op * &replicated.field(h)?;
            }
            acc = &acc + &op;
        }
        Ok(acc.scale(self.scale))
    }
}

/// Least-squares slope of `log ‖x_σⁿ‖₄` against `log n`.
#[derive(Clone, Debug, PartialEq)]
pub struct DecayFit {
    pub ns: Vec<usize>,
    pub norms: Vec<f64>,
    pub slope: f64,
}

/// Ordinary least-squares slope of `y` against `x`.
pub fn ols_slope(x: &[f64], y: &[f64]) -> f64 {
    let k = x.len() as f64;
    let mx = x.iter().sum::<f64>() / k;
    let my = y.iter().sum::<f64>() / k;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

/// Empirical decay of `‖x_σⁿ‖₄` for a partition with a block of size ≥ 3.
pub fn decay_probe(sigma: &Partition, hs: &[Vec<C64>], ns: &[usize], q: f64) -> Result<DecayFit> {
    if sigma.max_block_size() < 3 {
        return domain(format!("{sigma} has no block of size at least three"));
    }
    if ns.len() < 2 {
        return domain("at least two replica counts are needed for a fit");
    }
    let norms = ns
        .iter()
        .map(|&n| Ok(SigmaWord::new(sigma, hs, n)?.norm4(q)))
        .collect::<Result<Vec<f64>>>()?;
    let lx: Vec<f64> = ns.iter().map(|&n| (n as f64).ln()).collect();
    let ly: Vec<f64> = norms.iter().map(|v| v.ln()).collect();
    Ok(DecayFit {
        ns: ns.to_vec(),
        norms,
        slope: ols_slope(&lx, &ly),
    })
}

/// Outcome of [`eigenvector_check`].
#[derive(Clone, Debug, PartialEq)]
pub struct EigenReport {
    pub singletons: usize,
    pub expected_factor: f64,
    /// `f_σ` for the partition and vectors.
    pub coefficient: C64,
    /// `‖T_t ζ − e^{−ts} ζ‖` for `ζ = W(f_σ ⊗_{i∈σ_s} hᵢ)Ω`.
    pub exact_residual: f64,
    /// `(n, ‖T_t x_σⁿΩ − e^{−ts} x_σⁿΩ‖)` for each replica count; the last
    /// must lie below the first.
    pub finite_residuals: Vec<(usize, f64)>,
    pub pass: bool,
}

/// Checks that the singleton-reduced Wick word of `σ` is an eigenvector of the
/// number semigroup with eigenvalue `e^{−t·#singletons}`, and that the finite
/// surrogates `x_σⁿΩ` approach that eigenspace as `n` grows.
pub fn eigenvector_check(
    sigma: &Partition,
    hs: &[Vec<C64>],
    q: f64,
    t: f64,
    ns: &[usize],
) -> Result<EigenReport> {
    if !sigma.is_p12() {
        return domain(format!("{sigma} has a block of size at least three"));
    }
    if let Some(n) = ns.iter().find(|&&n| n < sigma.num_blocks()) {
        return domain(format!(
            "{n} replicas cannot label the {} blocks of {sigma} injectively",
            sigma.num_blocks()
        ));
    }
    let singles = sigma.singletons();
    let s = singles.len();
    let d = hs.first().map_or(1, Vec::len);
    let coefficient = f_sigma(sigma, hs, q)?;
    let factor = (-t * s as f64).exp();

    let space = FockSpace::new(d, s, q)?;
    let calc = WickCalculus::new(&space)?;
    let legs: Vec<Vec<C64>> = singles.iter().map(|&i| hs[i - 1].clone()).collect();
    let xi = WordVec::tensor(&legs).scale(coefficient);
    let zeta = calc.wick_word(&xi)?.apply(&space.vacuum());
    let moved = space.semigroup(t).apply(&zeta);
    let diff: Vec<C64> = moved
        .iter()
        .zip(&zeta)
        .map(|(a, b)| a - b * factor)
        .collect();
    let exact_residual = space.norm(&diff);

    let mut finite_residuals = Vec::new();
    for &n in ns {
        let v = SigmaWord::new(sigma, hs, n)?.vacuum_vector(q);
        let mut r = v.number_semigroup(t);
        r.axpy(C64::new(-factor, 0.0), &v);
        finite_residuals.push((n, r.q_norm(q)));
    }
    // the residual decays like n^{-1/2} but may rise for the smallest counts
    let approaching = match (finite_residuals.first(), finite_residuals.last()) {
        (Some(first), Some(last)) if finite_residuals.len() > 1 => last.1 < first.1 + 1e-12,
        _ => true,
    };
    Ok(EigenReport {
        singletons: s,
        expected_factor: factor,
        coefficient,
        exact_residual,
        finite_residuals,
        pass: exact_residual <= 1e-10 && approaching,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qfock::unit;

    fn c(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    #[test]
    fn low_degree_wick_words() {
        let q = 0.35;
        let f = FockSpace::new(2, 4, q).unwrap();
        let w = WickCalculus::new(&f).unwrap();
        assert_eq!(w.basis_word(&[]).unwrap(), f.identity());
        let s0 = f.field(&unit(2, 0)).unwrap();
        let s1 = f.field(&unit(2, 1)).unwrap();
        assert!(w.basis_word(&[0]).unwrap().max_abs_diff(&s0) < 1e-15);
        assert!(w.basis_word(&[0, 1]).unwrap().max_abs_diff(&(&s0 * &s1)) < 1e-15);
        let hh = &(&s0 * &s0) - &f.identity();
        assert!(w.basis_word(&[0, 0]).unwrap().max_abs_diff(&hh) < 1e-15);
        assert!(w.basis_word(&[0, 0, 0, 0, 0]).is_err());
    }

    #[test]
    fn expansion_examples() {
        let q = 0.5;
        let hk = product_expansion_words(&[0], &[1], q);
        assert_eq!(hk.len(), 1);
        assert_eq!(hk[0].word, vec![0, 1]);
        let hh = wick_product_expansion(
            &WordVec::from_word(vec![0], c(1.0)),
            &WordVec::from_word(vec![0], c(1.0)),
            q,
        );
        assert_eq!(hh.get(&[0, 0]), c(1.0));
        assert_eq!(hh.get(&[]), c(1.0));
        let hkh = wick_product_expansion(
            &WordVec::from_word(vec![0, 1], c(1.0)),
            &WordVec::from_word(vec![0], c(1.0)),
            q,
        );
        assert_eq!(hkh.get(&[0, 1, 0]), c(1.0));
        assert_eq!(hkh.get(&[1]), c(q));
    }

    #[test]
    fn f_sigma_examples() {
        let h = unit(2, 0);
        let k = unit(2, 1);
        let p = |b: Vec<Vec<usize>>, m| Partition::new(m, b).unwrap();
        assert_eq!(
            f_sigma(&Partition::singletons_of(2), &[h.clone(), k.clone()], 0.3).unwrap(),
            c(1.0)
        );
        assert_eq!(
            f_sigma(&p(vec![vec![1, 2]], 2), &[h.clone(), h.clone()], 0.3).unwrap(),
            c(1.0)
        );
        let s = p(vec![vec![1, 3], vec![2]], 3);
        assert_eq!(f_sigma(&s, &[h.clone(), k, h], 0.3).unwrap(), c(0.3));
    }

    #[test]
    fn sigma_word_small_cases() {
        let h = unit(1, 0);
        let x = SigmaWord::new(&Partition::singletons_of(1), &[h.clone()], 2).unwrap();
        let v = x.vacuum_vector(0.2);
        let r = 1.0 / 2f64.sqrt();
        assert!((v.get(&[0]) - c(r)).norm() < 1e-15);
        assert!((v.get(&[1]) - c(r)).norm() < 1e-15);
        let pair = Partition::new(2, vec![vec![1, 2]]).unwrap();
        let x = SigmaWord::new(&pair, &[h.clone(), h.clone()], 1).unwrap();
        assert!((x.vacuum_vector(0.2).get(&[]) - c(1.0)).norm() < 1e-15);
    }

    #[test]
    fn replica_moment_matches_base() {
        let h = unit(2, 0);
        let k = unit(2, 1);
        let hs = vec![h.clone(), k.clone(), h.clone(), k.clone()];
        let base = crate::qfock::moment_combinatorial(&hs, 0.4).unwrap();
        for n in 1..=3 {
            assert!((un_moment(&hs, n, 0.4) - base).norm() < 1e-12);
        }
    }
}

//! Relations of the crossed-product model checked as matrices or on the
//! cyclic vector.

use nalgebra::DMatrix;
use serde::Serialize;

use super::group::GroupAction;
use super::model::{CrossedProductModel, ModelOp, RepChoice};
use crate::error::{domain, Result};
use crate::linalg::{self, vec_max_abs_diff, Csr};
use crate::partitions::noncrossing_pair_partitions;
use crate::C64;

const ONE: C64 = C64::new(1.0, 0.0);
const ZERO: C64 = C64::new(0.0, 0.0);

/// Standard basis vector of `K = ℝ^d`.
pub fn k_unit(d: usize, i: usize) -> Vec<f64> {
    let mut k = vec![0.0; d];
    k[i] = 1.0;
    k
}

fn max_diff(x: &ModelOp, y: &ModelOp) -> Result<f64> {
    Ok(x.materialize()?.max_abs_diff(&y.materialize()?))
}

/// `max ‖S_q(g⊗k)a − σ_g(a)S_q(g⊗k)‖` over all `g`, basis `k`, and indicators `a`.
pub fn covariance_defect(model: &CrossedProductModel) -> Result<f64> {
    let mut worst = 0.0f64;
    for g in 0..model.group().order() {
        for i in 0..model.kdim() {
            let s = model
                .generator(g, &k_unit(model.kdim(), i))?
                .materialize()?;
            for x in 0..model.points() {
                let a = model.indicator(x);
                let left = s.matmul(&model.multiplier(&a)?.materialize()?);
                let right = model
                    .multiplier(&model.act(g, &a))?
                    .materialize()?
                    .matmul(&s);
                worst = worst.max(left.max_abs_diff(&right));
            }
        }
    }
    Ok(worst)
}

/// `max ‖S_q(g⊗k)* − S_q(g⁻¹⊗k)‖` over all `g` and basis `k`.
pub fn adjoint_defect(model: &CrossedProductModel) -> Result<f64> {
    let mut worst = 0.0f64;
    for g in 0..model.group().order() {
        for i in 0..model.kdim() {
            let k = k_unit(model.kdim(), i);
            let s = model.generator(g, &k)?;
            let t = model.generator(model.group().inv(g), &k)?;
            worst = worst.max(max_diff(&model.adjoint(&s), &t)?);
        }
    }
    Ok(worst)
}

/// Worst defect among `u_g u_h = u_{gh}`, `u_g a u_g* = σ_g(a)` and
/// `u_g s(ξ) u_g* = s((π_g⊗id)ξ)`, with `ξ` ranging over the `δ_h⊗k`.
pub fn covariant_system_defect(model: &CrossedProductModel) -> Result<f64> {
    let group = model.group();
    let n = group.order();
    let us: Vec<Csr> = (0..n)
        .map(|g| model.unitary(g).materialize())
        .collect::<Result<_>>()?;
    let mut worst = 0.0f64;
    for g in 0..n {
        for h in 0..n {
            worst = worst.max(us[g].matmul(&us[h]).max_abs_diff(&us[group.mul(g, h)]));
        }
    }
    for g in 0..n {
        let ug_adj = model.adjoint(&model.unitary(g)).materialize()?;
        for x in 0..model.points() {
            let a = model.indicator(x);
            let lhs = us[g]
                .matmul(&model.multiplier(&a)?.materialize()?)
                .matmul(&ug_adj);
            let rhs = model.multiplier(&model.act(g, &a))?.materialize()?;
            worst = worst.max(lhs.max_abs_diff(&rhs));
        }
        for h in 0..n {
            for i in 0..model.kdim() {
                let xi = model.delta_vector(h, &k_unit(model.kdim(), i))?;
                let lhs = us[g]
                    .matmul(&model.field(&xi)?.materialize()?)
                    .matmul(&ug_adj);
                let rhs = model.field(&model.rotate_vector(g, &xi))?.materialize()?;
                worst = worst.max(lhs.max_abs_diff(&rhs));
            }
        }
    }
    Ok(worst)
}

/// An element `Σ_g c_g u_g` of `A ⋊ G`; `coeffs[g]` is the function `c_g` on `X`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CrossedElement {
    pub coeffs: Vec<Vec<C64>>,
}

impl CrossedElement {
    pub fn zero(order: usize, points: usize) -> Self {
        CrossedElement {
            coeffs: vec![vec![ZERO; points]; order],
        }
    }

    /// `c · u_g`.
    pub fn unitary(order: usize, points: usize, g: usize, c: C64) -> Self {
        let mut e = Self::zero(order, points);
        e.coeffs[g].iter_mut().for_each(|v| *v = c);
        e
    }

    pub fn max_abs_diff(&self, other: &CrossedElement) -> f64 {
        self.coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| vec_max_abs_diff(a, b))
            .fold(0.0, f64::max)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CommutatorExtraction {
    pub commutator: usize,
    pub value: CrossedElement,
    pub expected: CrossedElement,
    pub defect: f64,
}

/// Degree-zero part of `S(g₁⊗h₁)S(g₂⊗h₂)S(g₁⁻¹⊗h₁)S(g₂⁻¹⊗h₂)`, read off the
/// cyclic vector, against `q·u_{[g₁,g₂]}`.
///
/// Only the trivial representation is accepted. Paths returning to degree
/// zero after four fields never exceed degree two, so cutoff 2 is exact.
pub fn commutator_extraction(
    model: &CrossedProductModel,
    g1: usize,
    g2: usize,
    h1: &[f64],
    h2: &[f64],
) -> Result<CommutatorExtraction> {
    if model.rep() != RepChoice::Trivial {
        return domain("commutator extraction needs the trivial representation");
    }
    if model.fock().cutoff() < 2 {
        return domain("commutator extraction needs cutoff at least 2");
    }
    let inner: f64 = h1.iter().zip(h2).map(|(a, b)| a * b).sum();
    let unit = |h: &[f64]| (h.iter().map(|a| a * a).sum::<f64>() - 1.0).abs() < 1e-12;
    if inner.abs() > 1e-12 || !unit(h1) || !unit(h2) {
        return domain("h₁ and h₂ must be orthonormal");
    }
    let group = model.group();
    let gs = [g1, g2, group.inv(g1), group.inv(g2)];
    let ks = [h1.to_vec(), h2.to_vec(), h1.to_vec(), h2.to_vec()];
    let x = model.generator_product(&gs, &ks)?;
    let v = x.apply(&model.cyclic_vector());
    let value = CrossedElement {
        coeffs: model.degree_zero_coefficients(&v),
    };
    let commutator = group.commutator(g1, g2);
    let expected = CrossedElement::unitary(
        group.order(),
        model.points(),
        commutator,
        C64::new(model.q(), 0.0),
    );
    let defect = value.max_abs_diff(&expected);
    Ok(CommutatorExtraction {
        commutator,
        value,
        expected,
        defect,
    })
}

/// `S(g₁⊗k₁)⋯S(gₘ⊗kₘ)` with `g₁⋯gₘ = e`, an element of the relative commutant of `A`.
pub fn c0_element(model: &CrossedProductModel, gs: &[usize], ks: &[Vec<f64>]) -> Result<ModelOp> {
    if model.group().product(gs) != model.group().identity() {
        return domain("group labels must multiply to the identity");
    }
    model.generator_product(gs, ks)
}

/// `max ‖[x, a]‖` over indicator functions `a`.
pub fn centrality_defect(model: &CrossedProductModel, x: &ModelOp) -> Result<f64> {
    let m = x.materialize()?;
    let mut worst = 0.0f64;
    for p in 0..model.points() {
        let a = model.multiplier(&model.indicator(p))?.materialize()?;
        worst = worst.max(m.matmul(&a).max_abs_diff(&a.matmul(&m)));
    }
    Ok(worst)
}

/// `max |E_A(T_t x) − E_A(x)|` and `|τ(E_A(x)) − τ(x)|` for one operator.
pub fn expectation_defects(model: &CrossedProductModel, x: &ModelOp, t: f64) -> (f64, f64) {
    let ea = model.conditional_expectation_a(x);
    let v = model.semigroup(t).apply(&x.apply(&model.cyclic_vector()));
    let eat = model
        .degree_zero_coefficients(&v)
        .swap_remove(model.group().identity());
    let tau_ea: C64 = ea.iter().sum::<C64>() / model.points() as f64;
    (
        vec_max_abs_diff(&ea, &eat),
        (tau_ea - model.trace(x)).norm(),
    )
}

/// Largest entry of `T_t S(g⊗k)Ω̂ − e^{−t} S(g⊗k)Ω̂` over all `g` and basis `k`.
pub fn first_eigenvector_defect(model: &CrossedProductModel, t: f64) -> Result<f64> {
    let omega = model.cyclic_vector();
    let tt = model.semigroup(t);
    let mut worst = 0.0f64;
    for g in 0..model.group().order() {
        for i in 0..model.kdim() {
            let v = model.generator(g, &k_unit(model.kdim(), i))?.apply(&omega);
            let lhs = tt.apply(&v);
            let rhs: Vec<C64> = v.iter().map(|z| z * (-t).exp()).collect();
            worst = worst.max(vec_max_abs_diff(&lhs, &rhs));
        }
    }
    Ok(worst)
}

/// `E ∘ (α_θ ⋊ 1_G)` against `T_t` with `cos θ = e^{−t}`.
///
/// The doubled model uses `K ⊕ K` (letter `summand·d + i`); `α_θ` rotates the
/// two copies and `E` compresses to words in the first copy. Returns the
/// largest entry of the difference together with the largest entry of
/// `[α_θ, u_g]`.
pub fn semigroup_factorization_defect(
    action: &GroupAction,
    rep: RepChoice,
    kdim: usize,
    cutoff: usize,
    q: f64,
    t: f64,
) -> Result<(f64, f64)> {
    if t < 0.0 {
        return domain("t must be nonnegative");
    }
    let small = CrossedProductModel::new(action.clone(), rep, kdim, cutoff, q)?;
    let big = CrossedProductModel::new(action.clone(), rep, 2 * kdim, cutoff, q)?;
    let order = action.group().order();
    let theta = (-t).exp().acos();
    let (s, c) = theta.sin_cos();
    let half = DMatrix::from_fn(2 * kdim, 2 * kdim, |r, col| {
        let (rs, ri) = (r / kdim, r % kdim);
        let (cs, ci) = (col / kdim, col % kdim);
        if ri != ci {
            return ZERO;
        }
        C64::new(
            match (rs, cs) {
                (0, 0) | (1, 1) => c,
                (0, 1) => s,
                _ => -s,
            },
            0.0,
        )
    });
    let rot = DMatrix::<C64>::identity(order, order).kronecker(&half);
    let gamma = big.fock().second_quantize_orthogonal(&rot)?.into_csr();
    let (na, _, nc) = big.dims();
    let alpha = ModelOp::single(ONE, Csr::identity(na), gamma, Csr::identity(nc));

    let sb = small.fock().basis();
    let bb = big.fock().basis();
    let fock_map: Vec<usize> = (0..sb.size())
        .map(|i| {
            let w: Vec<u16> = sb
                .word(i)
                .iter()
                .map(|&a| {
                    let (slot, k) = (a as usize / kdim, a as usize % kdim);
                    (slot * 2 * kdim + k) as u16
                })
                .collect();
            bb.index(&w)
        })
        .collect();
    let mut idx = Vec::with_capacity(small.size());
    for x in 0..na {
        for &w in &fock_map {
            for h in 0..nc {
                idx.push(big.index(x, w, h));
            }
        }
    }
    let compressed = alpha.materialize()?.submatrix(&idx, &idx);
    let defect = compressed.max_abs_diff(&small.semigroup(t).materialize()?);

    let a = alpha.materialize()?;
    let mut commute = 0.0f64;
    for g in 0..order {
        let u = big.unitary(g).materialize()?;
        commute = commute.max(a.matmul(&u).max_abs_diff(&u.matmul(&a)));
    }
    Ok((defect, commute))
}

/// Group components of a vector violating `(g₁⋯gₙ)g⁻¹ ∈ [G,G]`.
#[derive(Clone, Debug, Serialize)]
pub struct LabelReport {
    pub components: usize,
    pub violations: usize,
    pub worst_violation: f64,
}

/// Rewrites each degree-`n` component of `v` in the `δ_{g₁}⊗k⊗⋯⊗δ_{gₙ}⊗k`
/// basis and checks the group labels of every nonzero coefficient against the
/// `ℓ²(G)` index.
pub fn eigenspace_labels(model: &CrossedProductModel, v: &[C64], tol: f64) -> LabelReport {
    let group = model.group();
    let order = group.order();
    let kdim = model.kdim();
    let commutators = group.commutator_subgroup();
    let basis = model.fock().basis();
    let uh = model.delta_matrix().adjoint();
    let mut report = LabelReport {
        components: 0,
        violations: 0,
        worst_violation: 0.0,
    };
    for x in 0..model.points() {
        for h in 0..order {
            for n in 0..=basis.cutoff() {
                // coefficient vector over slot words of degree n, moved letter by letter to δ-labels
                let mut coef: Vec<C64> = basis
                    .degree_range(n)
                    .map(|w| v[model.index(x, w, h)])
                    .collect();
                if coef.iter().all(|c| c.norm() <= tol) {
                    continue;
                }
                let dim = order * kdim;
                for pos in 0..n {
                    let stride = dim.pow((n - 1 - pos) as u32);
                    let mut next = vec![ZERO; coef.len()];
                    for (rank, &c) in coef.iter().enumerate() {
                        if c == ZERO {
                            continue;
                        }
                        let letter = (rank / stride) % dim;
                        let (slot, k) = (letter / kdim, letter % kdim);
                        let base = rank - letter * stride;
                        for g in 0..order {
                            let m = uh[(g, slot)];
                            if m != ZERO {
                                next[base + (g * kdim + k) * stride] += m * c;
                            }
                        }
                    }
                    coef = next;
                }
                for (rank, c) in coef.iter().enumerate() {
                    if c.norm() <= tol {
                        continue;
                    }
                    report.components += 1;
                    let labels: Vec<usize> = (0..n)
                        .map(|pos| (rank / dim.pow((n - 1 - pos) as u32)) % dim / kdim)
                        .collect();
                    let g = group.mul(group.product(&labels), group.inv(h));
                    if !commutators.contains(&g) {
                        report.violations += 1;
                        report.worst_violation = report.worst_violation.max(c.norm());
                    }
                }
            }
        }
    }
    report
}

/// Polar decomposition `S(g⊗k) = w|S|` computed on the Fock leg in
/// orthonormal coordinates, with its structural checks.
#[derive(Clone, Debug, Serialize)]
pub struct PolarReport {
    /// Most negative eigenvalue of `|S|` (zero when positive semidefinite).
    pub modulus_negativity: f64,
    pub modulus_commutes_with_a: f64,
    /// Largest eigenvalue of `ww*` minus one, clamped at zero.
    pub partial_isometry_excess: f64,
    pub support_defect: f64,
    pub covariance_on_support: f64,
    /// `max |E_A(w_g w_h*)|` over `h ≠ g`.
    pub relative_orthogonality: f64,
}

struct PolarParts {
    w: ModelOp,
    modulus: ModelOp,
    support: ModelOp,
    w_fock: DMatrix<C64>,
    modulus_fock: DMatrix<C64>,
    support_fock: DMatrix<C64>,
}

fn polar_parts(
    model: &CrossedProductModel,
    chol: &DMatrix<C64>,
    g: usize,
    k: &[f64],
) -> Result<PolarParts> {
    let lh = chol.adjoint();
    let lh_inv = lh
        .clone()
        .try_inverse()
        .ok_or_else(|| crate::Error::Invalid("singular Gram factor".into()))?;
    let op = model.generator(g, k)?;
    let term = &op.terms()[0];
    let f = lh.clone() * term.f.to_dense() * &lh_inv;
    let svd = f.clone().svd(true, true);
    let (u, vt) = (svd.u.unwrap(), svd.v_t.unwrap());
    let tol = 1e-10 * svd.singular_values.max().max(1.0);
    let sig = DMatrix::from_diagonal(&svd.singular_values.map(|s| C64::new(s, 0.0)));
    let keep = DMatrix::from_diagonal(
        &svd.singular_values
            .map(|s| C64::new(if s > tol { 1.0 } else { 0.0 }, 0.0)),
    );
    let modulus_fock = vt.adjoint() * sig * &vt;
    let support_fock = vt.adjoint() * &keep * &vt;
    let w_fock = u * keep * vt;
    let wrap = |m: &DMatrix<C64>, a: &Csr, c: &Csr| {
        ModelOp::single(term.coef, a.clone(), Csr::from_dense(m), c.clone())
    };
    let (na, _, nc) = model.dims();
    let (ia, ic) = (Csr::identity(na), Csr::identity(nc));
    Ok(PolarParts {
        w: wrap(&w_fock, &term.a, &term.c),
        modulus: ModelOp::single(ONE, ia.clone(), Csr::from_dense(&modulus_fock), ic.clone()),
        support: ModelOp::single(ONE, ia, Csr::from_dense(&support_fock), ic),
        w_fock,
        modulus_fock,
        support_fock,
    })
}

fn gram_cholesky(model: &CrossedProductModel) -> Result<DMatrix<C64>> {
    let g = model.fock().gram().matrix().to_dense();
    g.cholesky()
        .map(|c| c.l())
        .ok_or_else(|| crate::Error::Invalid("Gram matrix is not positive definite".into()))
}

/// Polar-decomposition covariance of `S(g⊗k)`: `w a f = σ_g(a) w f` with `f`
/// the support of `|S|`, plus the orthogonality of the `w_h` relative to `A`.
/// All operators live in orthonormal coordinates on the Fock leg.
pub fn polar_covariance(model: &CrossedProductModel, g: usize, k: &[f64]) -> Result<PolarReport> {
    let chol = gram_cholesky(model)?;
    let p = polar_parts(model, &chol, g, k)?;
    let modulus_negativity = linalg::hermitian_eigenvalues(&p.modulus_fock)
        .first()
        .map_or(0.0, |&l| (-l).max(0.0));
    let wwh = &p.w_fock * p.w_fock.adjoint();
    let partial_isometry_excess = linalg::hermitian_eigenvalues(&wwh)
        .last()
        .map_or(0.0, |&l| (l - 1.0).max(0.0));
    let support_defect = linalg::max_abs_dense(&(p.w_fock.adjoint() * &p.w_fock - &p.support_fock));

    let modulus = p.modulus.materialize()?;
    let wf = p.w.compose(&p.support);
    let mut commutes = 0.0f64;
    let mut covariance = 0.0f64;
    for x in 0..model.points() {
        let a = model.indicator(x);
        let am = model.multiplier(&a)?;
        let amat = am.materialize()?;
        commutes = commutes.max(modulus.matmul(&amat).max_abs_diff(&amat.matmul(&modulus)));
        let lhs = p.w.compose(&am).compose(&p.support);
        let rhs = model.multiplier(&model.act(g, &a))?.compose(&wf);
        covariance = covariance.max(max_diff(&lhs, &rhs)?);
    }

    let mut relative_orthogonality = 0.0f64;
    let wg_adj = ModelOp::single(
        ONE,
        p.w.terms()[0].a.adjoint(),
        Csr::from_dense(&p.w_fock.adjoint()),
        p.w.terms()[0].c.adjoint(),
    )
    .scale(p.w.terms()[0].coef.conj());
    for h in (0..model.group().order()).filter(|&h| h != g) {
        let ph = polar_parts(model, &chol, h, k)?;
        let e = model.conditional_expectation_a(&ph.w.compose(&wg_adj));
        relative_orthogonality =
            relative_orthogonality.max(e.iter().map(|z| z.norm()).fold(0.0, f64::max));
    }
    Ok(PolarReport {
        modulus_negativity,
        modulus_commutes_with_a: commutes,
        partial_isometry_excess,
        support_defect,
        covariance_on_support: covariance,
        relative_orthogonality,
    })
}

/// `E_A(S₀(g₁⊗k₁)a₁⋯S₀(gₘ⊗kₘ)aₘ)` at `q = 0` by the noncrossing rule.
///
/// Moving every `u_g` to the right turns the word into
/// `s(δ_{g̃₁}⊗k₁)⋯s(δ_{g̃ₘ}⊗kₘ) · Πⱼ σ_{g₁⋯gⱼ}(aⱼ) · u_{g₁⋯gₘ}` where `g̃ⱼ` is
/// `gⱼ` (trivial representation) or its conjugate by `g₁⋯gⱼ₋₁`. The free
/// vacuum state sums, over noncrossing pairings, products of
/// `[g̃ᵢg̃ⱼ = e]⟨kᵢ,kⱼ⟩`; this is the same as erasing adjacent matching pairs
/// in every possible way.
pub fn free_moment_nc(
    action: &GroupAction,
    rep: RepChoice,
    q: f64,
    gs: &[usize],
    ks: &[Vec<f64>],
    coeffs: &[Vec<C64>],
) -> Result<Vec<C64>> {
    if q != 0.0 {
        return domain("the noncrossing rule holds only at q = 0");
    }
    let m = gs.len();
    if ks.len() != m || coeffs.len() != m {
        return domain("one K vector and one coefficient per group label is required");
    }
    let group = action.group();
    let points = action.points();
    if coeffs.iter().any(|a| a.len() != points) {
        return domain("coefficient function has the wrong length");
    }
    if m % 2 == 1 || group.product(gs) != group.identity() {
        return Ok(vec![ZERO; points]);
    }
    let mut prefix = group.identity();
    let mut twisted = Vec::with_capacity(m);
    let mut coef = vec![ONE; points];
    for (j, &g) in gs.iter().enumerate() {
        twisted.push(match rep {
            RepChoice::Trivial => g,
            RepChoice::Conjugation => group.conjugate(prefix, g),
        });
        prefix = group.mul(prefix, g);
        let moved = action.act_on_function(prefix, &coeffs[j]);
        coef.iter_mut().zip(moved).for_each(|(c, a)| *c *= a);
    }
    let weight: f64 = noncrossing_pair_partitions(m)
        .map(|p| {
            p.pairs()
                .map(|(i, j)| {
                    let (i, j) = (i - 1, j - 1);
                    if group.mul(twisted[i], twisted[j]) != group.identity() {
                        return 0.0;
                    }
                    ks[i].iter().zip(&ks[j]).map(|(a, b)| a * b).sum::<f64>()
                })
                .product::<f64>()
        })
        .sum();
    Ok(coef.into_iter().map(|c| c * weight).collect())
}

/// `E_A(S(g₁⊗k₁)a₁⋯S(gₘ⊗kₘ)aₘ)` read from the model.
pub fn model_moment(
    model: &CrossedProductModel,
    gs: &[usize],
    ks: &[Vec<f64>],
    coeffs: &[Vec<C64>],
) -> Result<Vec<C64>> {
    if gs.len() != ks.len() || gs.len() != coeffs.len() {
        return domain("one K vector and one coefficient per group label is required");
    }
    let mut v = model.cyclic_vector();
    for ((g, k), a) in gs.iter().zip(ks).zip(coeffs).rev() {
        v = model.multiplier(a)?.apply(&v);
        v = model.generator(*g, k)?.apply(&v);
    }
    Ok(model
        .degree_zero_coefficients(&v)
        .swap_remove(model.group().identity()))
}

/// Summary of [`free_moment_sweep`].
#[derive(Clone, Debug, Serialize)]
pub struct SweepReport {
    pub words: usize,
    pub nonzero: usize,
    pub max_defect: f64,
}

/// Compares [`free_moment_nc`] with the `q = 0` model on every word of
/// length `1..=max_len` over the group, with `K = ℝ` and `k = 1`. The word's
/// coefficient at position `j` from the right is `coeffs[j]`; words are
/// visited depth first from the right so each model vector is one generator
/// application away from its parent.
pub fn free_moment_sweep(
    model: &CrossedProductModel,
    max_len: usize,
    coeffs: &[Vec<C64>],
) -> Result<SweepReport> {
    if model.q() != 0.0 || model.kdim() != 1 {
        return domain("the sweep needs a q = 0 model with one-dimensional K");
    }
    if coeffs.len() < max_len {
        return domain("one coefficient per position is required");
    }
    if 2 * model.fock().cutoff() < max_len {
        return domain("cutoff too small for exact moments of this length");
    }
    let order = model.group().order();
    let mults: Vec<Csr> = coeffs[..max_len]
        .iter()
        .map(|a| model.multiplier(a)?.materialize())
        .collect::<Result<_>>()?;
    let gens: Vec<Csr> = (0..order)
        .map(|g| model.generator(g, &[1.0])?.materialize())
        .collect::<Result<_>>()?;
    let mut report = SweepReport {
        words: 0,
        nonzero: 0,
        max_defect: 0.0,
    };
    let mut word = Vec::with_capacity(max_len);
    let omega = model.cyclic_vector();
    sweep_rec(
        model,
        &gens,
        &mults,
        coeffs,
        max_len,
        &mut word,
        &omega,
        &mut report,
    )?;
    Ok(report)
}

#[allow(clippy::too_many_arguments)]
fn sweep_rec(
    model: &CrossedProductModel,
    gens: &[Csr],
    mults: &[Csr],
    coeffs: &[Vec<C64>],
    max_len: usize,
    word: &mut Vec<usize>,
    v: &[C64],
    report: &mut SweepReport,
) -> Result<()> {
    if word.len() == max_len {
        return Ok(());
    }
    let pos = word.len();
    let scaled = mults[pos].mul_vec(v);
    for g in 0..gens.len() {
        let next = gens[g].mul_vec(&scaled);
        // word is stored right to left
        word.push(g);
        let gs: Vec<usize> = word.iter().rev().copied().collect();
        let ks = vec![vec![1.0]; gs.len()];
        let cs: Vec<Vec<C64>> = (0..gs.len()).rev().map(|j| coeffs[j].clone()).collect();
        let expected = free_moment_nc(model.action(), model.rep(), 0.0, &gs, &ks, &cs)?;
        let got = model
            .degree_zero_coefficients(&next)
            .swap_remove(model.group().identity());
        report.words += 1;
        if expected.iter().any(|z| z.norm() > 1e-12) {
            report.nonzero += 1;
        }
        report.max_defect = report.max_defect.max(vec_max_abs_diff(&expected, &got));
        sweep_rec(model, gens, mults, coeffs, max_len, word, &next, report)?;
        word.pop();
    }
    Ok(())
}

use nalgebra::DMatrix;

use super::group::{FiniteGroup, GroupAction};
use crate::error::{domain, Error, Result};
use crate::linalg::Csr;
use crate::qfock::{basis_size, FockSpace};
use crate::C64;

/// Largest model space `|X| · dim F · |G|` that may be materialized.
pub const MODEL_LIMIT: usize = 50_000;

/// How `G` acts on `ℓ²(G)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RepChoice {
    Trivial,
    /// `π_g(δ_h) = δ_{ghg⁻¹}`.
    Conjugation,
}

/// `coef · (a ⊗ f ⊗ c)` on `L²(X) ⊗ F ⊗ ℓ²(G)`.
#[derive(Clone, Debug)]
pub struct KronTerm {
    pub coef: C64,
    pub a: Csr,
    pub f: Csr,
    pub c: Csr,
}

/// A finite sum of Kronecker terms. Products of generators stay single
/// terms, so most operators never need the full matrix.
#[derive(Clone, Debug)]
pub struct ModelOp {
    dims: (usize, usize, usize),
    terms: Vec<KronTerm>,
}

impl ModelOp {
    pub fn single(coef: C64, a: Csr, f: Csr, c: Csr) -> Self {
        ModelOp {
            dims: (a.nrows(), f.nrows(), c.nrows()),
            terms: vec![KronTerm { coef, a, f, c }],
        }
    }

    pub fn terms(&self) -> &[KronTerm] {
        &self.terms
    }

    pub fn size(&self) -> usize {
        self.dims.0 * self.dims.1 * self.dims.2
    }

    pub fn scale(&self, s: C64) -> Self {
        let mut out = self.clone();
        out.terms.iter_mut().for_each(|t| t.coef *= s);
        out
    }

    pub fn add(&self, other: &ModelOp) -> Self {
        let mut out = self.clone();
        out.terms.extend(other.terms.iter().cloned());
        out
    }

    pub fn sub(&self, other: &ModelOp) -> Self {
        self.add(&other.scale(C64::new(-1.0, 0.0)))
    }

    /// `self · other`.
    pub fn compose(&self, other: &ModelOp) -> Self {
        let mut terms = Vec::with_capacity(self.terms.len() * other.terms.len());
        for s in &self.terms {
            for o in &other.terms {
                terms.push(KronTerm {
                    coef: s.coef * o.coef,
                    a: s.a.matmul(&o.a),
                    f: s.f.matmul(&o.f),
                    c: s.c.matmul(&o.c),
                });
            }
        }
        ModelOp {
            dims: self.dims,
            terms,
        }
    }

    /// Applies the operator without forming the Kronecker products.
    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        let (na, nf, nc) = self.dims;
        assert_eq!(
            v.len(),
            na * nf * nc,
            "vector length does not match the model"
        );
        let zero = C64::new(0.0, 0.0);
        let mut out = vec![zero; v.len()];
        for t in &self.terms {
            let mut t1 = vec![zero; v.len()];
            for xw in 0..na * nf {
                for h2 in 0..nc {
                    let mut s = zero;
                    for (h, val) in t.c.row(h2) {
                        s += val * v[xw * nc + h];
                    }
                    t1[xw * nc + h2] = s;
                }
            }
            let mut t2 = vec![zero; v.len()];
            for x in 0..na {
                for w2 in 0..nf {
                    let dst = (x * nf + w2) * nc;
                    for (w, val) in t.f.row(w2) {
                        let src = (x * nf + w) * nc;
                        for h in 0..nc {
                            t2[dst + h] += val * t1[src + h];
                        }
                    }
                }
            }
            let block = nf * nc;
            for x2 in 0..na {
                for (x, val) in t.a.row(x2) {
                    let scaled = val * t.coef;
                    for k in 0..block {
                        out[x2 * block + k] += scaled * t2[x * block + k];
                    }
                }
            }
        }
        out
    }

    /// Full sparse matrix; refused above [`MODEL_LIMIT`].
    pub fn materialize(&self) -> Result<Csr> {
        let n = self.size();
        if n > MODEL_LIMIT {
            return Err(Error::Resource {
                what: "crossed-product model",
                needed: n,
                limit: MODEL_LIMIT,
            });
        }
        let mut acc = Csr::zeros(n, n);
        for t in &self.terms {
            let m = t.a.kron(&t.f).kron(&t.c);
            acc = acc.lincomb(C64::new(1.0, 0.0), &m, t.coef);
        }
        Ok(acc)
    }
}

/// `L²(X) ⊗ F_q^{≤N}(ℝ^{|G|·d}) ⊗ ℓ²(G)` carrying `A = ℓ^∞(X)`, the covariant
/// unitaries `u_g` and the fields `s_q(δ_g⊗k)`.
///
/// The picture is the standard form of `(A ⊗ Γ_q) ⋊ G`: vectors `x u_h Ω̂`
/// correspond to `x̂ ⊗ δ_h`, so left multiplication by `a` is `M_a ⊗ 1 ⊗ 1`,
/// by `s(ξ)` is `1 ⊗ s(ξ) ⊗ 1`, and `u_g = P_g ⊗ Γ_q(π_g⊗id) ⊗ λ_g`.
///
/// `ℓ²_ℝ(G)` is given the real basis in which `conj(δ_g) = δ_{g⁻¹}`:
/// involutions keep `δ_g`; for a pair `g < g⁻¹` slot `g` holds
/// `(δ_g + δ_{g⁻¹})/√2` and slot `g⁻¹` holds `(δ_g − δ_{g⁻¹})/(i√2)`.
/// Fock letters are `slot·d + k`.
#[derive(Clone, Debug)]
pub struct CrossedProductModel {
    action: GroupAction,
    rep: RepChoice,
    kdim: usize,
    fock: FockSpace,
    delta: DMatrix<C64>,
    rep_mats: Vec<DMatrix<C64>>,
    gammas: Vec<Csr>,
    shifts: Vec<Csr>,
    lambdas: Vec<Csr>,
}

/// `|X| · Σ_{n≤N} (|G|d)ⁿ · |G|`, or `None` on overflow.
pub fn model_size(points: usize, order: usize, kdim: usize, cutoff: usize) -> Option<usize> {
    basis_size(order.checked_mul(kdim)?, cutoff)?
        .checked_mul(points)?
        .checked_mul(order)
}

/// Columns are `δ_g` in the real slot basis.
fn delta_matrix(group: &FiniteGroup) -> DMatrix<C64> {
    let n = group.order();
    let r = 1.0 / 2f64.sqrt();
    let mut u = DMatrix::zeros(n, n);
    for g in 0..n {
        let gi = group.inv(g);
        if gi == g {
            u[(g, g)] = C64::new(1.0, 0.0);
        } else {
            let (lo, hi) = (g.min(gi), g.max(gi));
            u[(lo, g)] = C64::new(r, 0.0);
            let sign = if g == lo { 1.0 } else { -1.0 };
            u[(hi, g)] = C64::new(0.0, sign * r);
        }
    }
    u
}

fn permutation_csr(n: usize, image: impl Fn(usize) -> usize) -> Csr {
    Csr::from_triplets(
        n,
        n,
        (0..n).map(|i| (image(i), i, C64::new(1.0, 0.0))).collect(),
    )
}

impl CrossedProductModel {
    pub fn new(
        action: GroupAction,
        rep: RepChoice,
        kdim: usize,
        cutoff: usize,
        q: f64,
    ) -> Result<Self> {
        if kdim == 0 {
            return domain("K dimension must be positive");
        }
        let group = action.group().clone();
        let n = group.order();
        let points = action.points();
        let size = model_size(points, n, kdim, cutoff).unwrap_or(usize::MAX);
        if size > MODEL_LIMIT {
            return Err(Error::Resource {
                what: "crossed-product model",
                needed: size,
                limit: MODEL_LIMIT,
            });
        }
        let fock = FockSpace::new(n * kdim, cutoff, q)?;
        let delta = delta_matrix(&group);
        let mut rep_mats = Vec::with_capacity(n);
        let mut gammas = Vec::with_capacity(n);
        for g in 0..n {
            let perm = DMatrix::from_fn(n, n, |i, j| {
                let target = match rep {
                    RepChoice::Trivial => j,
                    RepChoice::Conjugation => group.conjugate(g, j),
                };
                C64::new(if i == target { 1.0 } else { 0.0 }, 0.0)
            });
            let o = &delta * perm * delta.adjoint();
            let ambient = o.kronecker(&DMatrix::<C64>::identity(kdim, kdim));
            gammas.push(fock.second_quantize_orthogonal(&ambient)?.into_csr());
            rep_mats.push(o);
        }
        let shifts = (0..n)
            .map(|g| permutation_csr(points, |x| action.apply(g, x)))
            .collect();
        let lambdas = (0..n)
            .map(|g| permutation_csr(n, |h| group.mul(g, h)))
            .collect();
        Ok(CrossedProductModel {
            action,
            rep,
            kdim,
            fock,
            delta,
            rep_mats,
            gammas,
            shifts,
            lambdas,
        })
    }

    pub fn action(&self) -> &GroupAction {
        &self.action
    }

    pub fn group(&self) -> &FiniteGroup {
        self.action.group()
    }

    pub fn rep(&self) -> RepChoice {
        self.rep
    }

    pub fn kdim(&self) -> usize {
        self.kdim
    }

    pub fn fock(&self) -> &FockSpace {
        &self.fock
    }

    pub fn q(&self) -> f64 {
        self.fock.q()
    }

    pub fn points(&self) -> usize {
        self.action.points()
    }

    pub fn dims(&self) -> (usize, usize, usize) {
        (self.points(), self.fock.size(), self.group().order())
    }

    pub fn size(&self) -> usize {
        let (a, f, c) = self.dims();
        a * f * c
    }

    /// Column `g` gives `δ_g` in the real slot basis.
    pub fn delta_matrix(&self) -> &DMatrix<C64> {
        &self.delta
    }

    /// `π_g` on `ℓ²(G)` in the slot basis (a real orthogonal matrix).
    pub fn rep_matrix(&self, g: usize) -> &DMatrix<C64> {
        &self.rep_mats[g]
    }

    /// Index of the basis vector `e_x ⊗ w ⊗ δ_h`.
    pub fn index(&self, x: usize, word_index: usize, h: usize) -> usize {
        let (_, nf, nc) = self.dims();
        (x * nf + word_index) * nc + h
    }

    /// Ambient Fock vector `δ_g ⊗ k`.
    pub fn delta_vector(&self, g: usize, k: &[f64]) -> Result<Vec<C64>> {
        if k.len() != self.kdim {
            return domain(format!(
                "K vector has length {}, expected {}",
                k.len(),
                self.kdim
            ));
        }
        let n = self.group().order();
        let mut v = vec![C64::new(0.0, 0.0); n * self.kdim];
        for s in 0..n {
            for (i, &ki) in k.iter().enumerate() {
                v[s * self.kdim + i] = self.delta[(s, g)] * ki;
            }
        }
        Ok(v)
    }

    fn ident(&self) -> (Csr, Csr, Csr) {
        let (a, f, c) = self.dims();
        (Csr::identity(a), Csr::identity(f), Csr::identity(c))
    }

    pub fn identity(&self) -> ModelOp {
        let (a, f, c) = self.ident();
        ModelOp::single(C64::new(1.0, 0.0), a, f, c)
    }

    /// Multiplication by a function on `X`.
    pub fn multiplier(&self, a: &[C64]) -> Result<ModelOp> {
        if a.len() != self.points() {
            return domain("function on X has the wrong length");
        }
        let (_, f, c) = self.ident();
        Ok(ModelOp::single(C64::new(1.0, 0.0), Csr::diagonal(a), f, c))
    }

    /// Indicator of point `x`, a basis of `A`.
    pub fn indicator(&self, x: usize) -> Vec<C64> {
        let mut a = vec![C64::new(0.0, 0.0); self.points()];
        a[x] = C64::new(1.0, 0.0);
        a
    }

    /// `σ_g(a)(x) = a(g⁻¹x)`.
    pub fn act(&self, g: usize, a: &[C64]) -> Vec<C64> {
        self.action.act_on_function(g, a)
    }

    pub fn unitary(&self, g: usize) -> ModelOp {
        ModelOp::single(
            C64::new(1.0, 0.0),
            self.shifts[g].clone(),
            self.gammas[g].clone(),
            self.lambdas[g].clone(),
        )
    }

    /// `1 ⊗ s_q(ξ) ⊗ 1` for an ambient Fock vector `ξ`.
    pub fn field(&self, xi: &[C64]) -> Result<ModelOp> {
        let (a, _, c) = self.ident();
        Ok(ModelOp::single(
            C64::new(1.0, 0.0),
            a,
            self.fock.field(xi)?.into_csr(),
            c,
        ))
    }

    /// `1 ⊗ Γ_q(π_g ⊗ id) ⊗ 1`.
    pub fn fock_rotation(&self, g: usize) -> ModelOp {
        let (a, _, c) = self.ident();
        ModelOp::single(C64::new(1.0, 0.0), a, self.gammas[g].clone(), c)
    }

    /// `(π_g ⊗ id) ξ` on ambient Fock vectors.
    pub fn rotate_vector(&self, g: usize, xi: &[C64]) -> Vec<C64> {
        let n = self.group().order();
        let o = &self.rep_mats[g];
        let mut out = vec![C64::new(0.0, 0.0); xi.len()];
        for s in 0..n {
            for t in 0..n {
                if o[(s, t)] != C64::new(0.0, 0.0) {
                    for i in 0..self.kdim {
                        out[s * self.kdim + i] += o[(s, t)] * xi[t * self.kdim + i];
                    }
                }
            }
        }
        out
    }

    /// `S_q(g⊗k) = s_q(δ_g⊗k) u_g`.
    pub fn generator(&self, g: usize, k: &[f64]) -> Result<ModelOp> {
        Ok(self
            .field(&self.delta_vector(g, k)?)?
            .compose(&self.unitary(g)))
    }

    /// `S_q(g₁⊗k₁)⋯S_q(gₘ⊗kₘ)`.
    pub fn generator_product(&self, gs: &[usize], ks: &[Vec<f64>]) -> Result<ModelOp> {
        if gs.len() != ks.len() {
            return domain("one K vector per group label is required");
        }
        let mut op = self.identity();
        for (g, k) in gs.iter().zip(ks) {
            op = op.compose(&self.generator(*g, k)?);
        }
        Ok(op)
    }

    /// Adjoint for the model inner product (q-metric on the Fock leg).
    pub fn adjoint(&self, x: &ModelOp) -> ModelOp {
        let g = self.fock.gram().matrix();
        let ginv = self.fock.gram().inverse();
        ModelOp {
            dims: x.dims,
            terms: x
                .terms
                .iter()
                .map(|t| KronTerm {
                    coef: t.coef.conj(),
                    a: t.a.adjoint(),
                    f: ginv.matmul(&t.f.adjoint()).matmul(g),
                    c: t.c.adjoint(),
                })
                .collect(),
        }
    }

    /// `1 ⊗ Pₙ ⊗ 1`.
    pub fn number_projection(&self, n: usize) -> ModelOp {
        let (a, _, c) = self.ident();
        ModelOp::single(
            C64::new(1.0, 0.0),
            a,
            self.fock.number_projection(n).into_csr(),
            c,
        )
    }

    /// `1 ⊗ T_t ⊗ 1`.
    pub fn semigroup(&self, t: f64) -> ModelOp {
        let (a, _, c) = self.ident();
        ModelOp::single(C64::new(1.0, 0.0), a, self.fock.semigroup(t).into_csr(), c)
    }

    /// `Ω̂ = 1 ⊗ Ω ⊗ δ_e` with `1` the unit vector of `L²(X)` (normalized counting measure).
    pub fn cyclic_vector(&self) -> Vec<C64> {
        let mut v = vec![C64::new(0.0, 0.0); self.size()];
        let w = 1.0 / (self.points() as f64).sqrt();
        let e = self.group().identity();
        for x in 0..self.points() {
            v[self.index(x, 0, e)] = C64::new(w, 0.0);
        }
        v
    }

    /// Reads `Σ_g c_g u_g` (with `c_g ∈ A`) off a vector in `L²(A) ⊗ Ω ⊗ ℓ²(G)`;
    /// row `g` holds the function `c_g`.
    pub fn degree_zero_coefficients(&self, v: &[C64]) -> Vec<Vec<C64>> {
        let w = (self.points() as f64).sqrt();
        (0..self.group().order())
            .map(|g| {
                (0..self.points())
                    .map(|x| v[self.index(x, 0, g)] * w)
                    .collect()
            })
            .collect()
    }

    /// `E_A(x)` as a function on `X`.
    pub fn conditional_expectation_a(&self, x: &ModelOp) -> Vec<C64> {
        let v = x.apply(&self.cyclic_vector());
        self.degree_zero_coefficients(&v)
            .swap_remove(self.group().identity())
    }

    /// `τ(x) = ⟨Ω̂, xΩ̂⟩`.
    pub fn trace(&self, x: &ModelOp) -> C64 {
        let omega = self.cyclic_vector();
        let v = x.apply(&omega);
        omega.iter().zip(&v).map(|(a, b)| a.conj() * b).sum()
    }
}

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::linalg::{self, Csr};
use crate::qfock::{unit, FockSpace};
use crate::C64;

/// Eigenvalues above this count as strictly positive.
pub const POSITIVITY_TOL: f64 = 1e-9;

#[derive(Clone, Debug, Serialize)]
pub struct GapReport {
    pub f_size: usize,
    pub q: f64,
    pub cutoff: usize,
    /// Smallest eigenvalue of `T` on degrees `1..=cutoff`, relative to the q-metric.
    pub lambda_min: f64,
    /// `max_g |τ(x_g)|`.
    pub trace_defect: f64,
    pub positive: bool,
}

/// Right multiplication `ξ ↦ ξx` as `J L(x*) J`, where `J` reverses words and
/// conjugates coefficients.
pub fn right_multiplication(space: &FockSpace, left_of_adjoint: &Csr) -> Csr {
    let basis = space.basis();
    let rev: Vec<usize> = (0..space.size())
        .map(|i| {
            let mut w = basis.word(i);
            w.reverse();
            basis.index(&w)
        })
        .collect();
    let trip = left_of_adjoint
        .triplets()
        .map(|(r, c, v)| (rev[r], rev[c], v.conj()))
        .collect();
    Csr::from_triplets(space.size(), space.size(), trip)
}

/// `x_g = s(a_g)² + s(b_g)² − 2` for `g < f_size`, with `a_g = e_{2g}`,
/// `b_g = e_{2g+1}` in `ℝ^{2|F|}`.
pub fn gap_generators(space: &FockSpace, f_size: usize) -> Result<Vec<Csr>> {
    let d = space.dim();
    if d < 2 * f_size {
        return domain("Fock space too small for the requested F");
    }
    let id = space.identity();
    (0..f_size)
        .map(|g| {
            let sa = space.field(&unit(d, 2 * g))?;
            let sb = space.field(&unit(d, 2 * g + 1))?;
            let x = &(&(&sa * &sa) + &(&sb * &sb)) - &id.scale(C64::new(2.0, 0.0));
            Ok(x.into_csr())
        })
        .collect()
}

/// Smallest eigenvalue of `T = Σ_{g∈F} |L(x_g) − R(x_g*)|²` on the
/// orthogonal complement of the vacuum, truncated to degrees `1..=cutoff`.
///
/// The operators are built at cutoff `cutoff + 2` so that `x_g` acts exactly
/// on every input vector; `T = Σ A_g* A_g` is then compared with the q-Gram
/// form by Cholesky whitening.
pub fn spectral_gap(f_size: usize, q: f64, cutoff: usize) -> Result<GapReport> {
    if f_size == 0 {
        return domain("F must be nonempty");
    }
    if cutoff == 0 {
        return domain("cutoff must be positive");
    }
    let space = FockSpace::new(2 * f_size, cutoff + 2, q)?;
    let basis = space.basis();
    let cols: Vec<usize> = (1..=cutoff).flat_map(|n| basis.degree_range(n)).collect();
    let all: Vec<usize> = (0..space.size()).collect();
    let gram = space.gram().matrix();
    let mut t = DMatrix::<C64>::zeros(cols.len(), cols.len());
    let mut trace_defect = 0.0f64;
    for x in gap_generators(&space, f_size)? {
        trace_defect = trace_defect.max(x.get(0, 0).norm());
        let x_adj = space
            .adjoint(&crate::qfock::FockOperator::from_csr(x.clone()))
            .into_csr();
        let r = right_multiplication(&space, &x_adj);
        let a = x.sub(&r).submatrix(&all, &cols);
        t += (a.adjoint().matmul(gram).matmul(&a)).to_dense();
    }
    let g = gram.submatrix(&cols, &cols).to_dense();
    let l = g
        .cholesky()
        .ok_or_else(|| Error::Invalid("Gram matrix is not positive definite".into()))?
        .l();
    let l_inv = l
        .try_inverse()
        .ok_or_else(|| Error::Invalid("singular Gram factor".into()))?;
    let m = &l_inv * t * l_inv.adjoint();
    let m = (&m + m.adjoint()) * C64::new(0.5, 0.0);
    let lambda_min = linalg::hermitian_eigenvalues(&m)[0];
    Ok(GapReport {
        f_size,
        q,
        cutoff,
        lambda_min,
        trace_defect,
        positive: lambda_min > POSITIVITY_TOL,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qfock::FockOperator;

    fn setup(q: f64) -> (FockSpace, Vec<Csr>) {
        let space = FockSpace::new(4, 4, q).unwrap();
        let xs = gap_generators(&space, 2).unwrap();
        (space, xs)
    }

    fn right(space: &FockSpace, x: &Csr) -> Csr {
        let adj = space.adjoint(&FockOperator::from_csr(x.clone())).into_csr();
        right_multiplication(space, &adj)
    }

    #[test]
    fn right_multiplication_agrees_on_vacuum() {
        let (space, xs) = setup(0.4);
        let omega = space.vacuum();
        for x in &xs {
            let diff =
                linalg::vec_max_abs_diff(&x.mul_vec(&omega), &right(&space, x).mul_vec(&omega));
            assert!(diff < 1e-13);
        }
    }

    #[test]
    fn left_and_right_commute_on_low_degrees() {
        let (space, xs) = setup(-0.3);
        let r = right(&space, &xs[1]);
        let lr = xs[0].matmul(&r);
        let rl = r.matmul(&xs[0]);
        let low = space.basis().degree_range(0).start..space.basis().degree_range(0).end + 4;
        for c in low {
            let mut e = vec![C64::new(0.0, 0.0); space.size()];
            e[c] = C64::new(1.0, 0.0);
            assert!(linalg::vec_max_abs_diff(&lr.mul_vec(&e), &rl.mul_vec(&e)) < 1e-12);
        }
    }

    #[test]
    fn generators_are_centered() {
        for q in [0.0, 0.3, -0.5] {
            let r = spectral_gap(2, q, 2).unwrap();
            assert!(r.trace_defect < 1e-14);
        }
    }

    #[test]
    fn single_generator_has_kernel_in_vacuum_complement() {
        // x_g Ω commutes with x_g, so L(x_g) − R(x_g) annihilates it
        for q in [0.0, 0.3] {
            let r = spectral_gap(1, q, 3).unwrap();
            assert!(r.lambda_min.abs() < 1e-10);
            assert!(!r.positive);
        }
    }

    #[test]
    fn two_generators_are_positive() {
        let r0 = spectral_gap(2, 0.0, 3).unwrap();
        let r3 = spectral_gap(2, 0.3, 3).unwrap();
        assert!(r0.positive && r3.positive);
    }

    #[test]
    fn rejects_empty_f() {
        assert!(spectral_gap(0, 0.0, 3).is_err());
    }
}

//! Acceptance suite: one line per criterion, exit status 1 if any fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use nalgebra::DMatrix;
use qgauss::gqg::{
    adjoint_defect, builtin_action, commutator_extraction, covariance_defect, free_moment_sweep,
    semigroup_factorization_defect, spectral_gap, CrossedProductModel, RepChoice,
};
use qgauss::linalg::{complexify, Csr};
use qgauss::partitions::{crossings, pair_partitions, Partition};
use qgauss::qfock::{gram, moment_combinatorial, unit, FockSpace, WordVec};
use qgauss::rigidity::{
    far_mass_family, standard_defect, tpp_concentration, zero_mass_adversary, GridMeasure,
};
use qgauss::wick::{decay_probe, un_embed, WickCalculus};
use qgauss::{Result, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Criterion = fn() -> Result<Outcome>;

struct Outcome {
    pass: bool,
    detail: String,
}

fn c(x: f64) -> C64 {
    C64::new(x, 0.0)
}

/// Words over `{0, 1}` of every length up to `max_len`.
fn binary_words(max_len: usize) -> impl Iterator<Item = Vec<usize>> {
    (0..=max_len)
        .flat_map(|m| (0..1usize << m).map(move |code| (0..m).map(|k| (code >> k) & 1).collect()))
}

fn moment_identity() -> Result<Outcome> {
    let start = Instant::now();
    let mut worst = 0.0f64;
    let mut words = 0;
    for q in [-0.5, 0.0, 0.5] {
        let space = FockSpace::new(2, 6, q)?;
        let fields = [space.field(&unit(2, 0))?, space.field(&unit(2, 1))?];
        for w in binary_words(6) {
            let op = w.iter().fold(space.identity(), |acc, &i| &acc * &fields[i]);
            let hs: Vec<Vec<C64>> = w.iter().map(|&i| unit(2, i)).collect();
            worst = worst.max((op.vacuum_trace() - moment_combinatorial(&hs, q)?).norm());
            words += 1;
        }
    }
    let elapsed = start.elapsed();
    Ok(Outcome {
        pass: worst <= 1e-10 && elapsed < Duration::from_secs(30),
        detail: format!("{words} words, max |vacuum_trace - pair sum| = {worst:.2e} (tol 1e-10), {elapsed:.2?} (limit 30 s)"),
    })
}

fn special_values() -> Result<Outcome> {
    let mut worst = 0.0f64;
    // two nested pairings and one crossing pairing of four points
    let four_point: Vec<usize> = pair_partitions(4)
        .map(|p| crossings(&p))
        .collect::<Result<_>>()?;
    assert_eq!(four_point.iter().filter(|&&k| k == 1).count(), 1);
    for q in [-0.9, -0.5, 0.0, 0.3, 0.5, 0.9] {
        let space = FockSpace::new(1, 4, q)?;
        let s = space.field(&[c(1.0)])?;
        let s4 = &(&s * &s) * &(&s * &s);
        let oracle: f64 = four_point.iter().map(|&k| q.powi(k as i32)).sum();
        worst = worst.max((s4.vacuum_trace() - c(2.0 + q)).norm());
        worst = worst.max((oracle - (2.0 + q)).abs());
    }
    let space = FockSpace::new(1, 8, 0.0)?;
    let s = space.field(&[c(1.0)])?;
    let mut catalan = 1u64;
    let mut power = space.identity();
    for k in 1..=4u64 {
        catalan = catalan * 2 * (2 * k - 1) / (k + 1);
        power = &(&power * &s) * &s;
        worst = worst.max((power.vacuum_trace() - c(catalan as f64)).norm());
    }
    Ok(Outcome {
        pass: worst <= 1e-10,
        detail: format!("tau(s^4) = 2+q for six q, tau(s^2k) = Catalan(k) for k <= 4 at q = 0; max error {worst:.2e} (tol 1e-10)"),
    })
}

fn q_relation() -> Result<Outcome> {
    let mut worst = 0.0f64;
    for q in [-0.7, 0.7] {
        let space = FockSpace::new(3, 4, q)?;
        let cols = space.basis().degree_range(3).end;
        for f in 0..3 {
            let lf_adj = space.annihilation(&unit(3, f))?;
            for g in 0..3 {
                let lg = space.creation(&unit(3, g))?;
                let mut d = &(&lf_adj * &lg) - &(&lg * &lf_adj).scale(c(q));
                if f == g {
                    d = &d - &space.identity();
                }
                for col in 0..cols {
                    let mut xi = vec![c(0.0); space.size()];
                    xi[col] = c(1.0);
                    worst = worst.max(space.norm(&d.apply(&xi)));
                }
            }
        }
    }
    Ok(Outcome {
        pass: worst <= 1e-12,
        detail: format!("N = 4, d = 3, q = +-0.7, all basis f, g and xi of degree <= 3; max norm {worst:.2e} (tol 1e-12)"),
    })
}

fn gram_positivity() -> Result<Outcome> {
    let mut worst = f64::INFINITY;
    for q in [-0.9, 0.9] {
        for d in 1..=3 {
            for n in 1..=5 {
                let g = gram(n, d, q);
                let min = g.symmetric_eigenvalues().min();
                worst = worst.min(min);
            }
        }
    }
    Ok(Outcome {
        pass: worst >= -1e-12,
        detail: format!(
            "n <= 5, d <= 3, q = +-0.9; smallest eigenvalue {worst:.3e} (must be >= -1e-12)"
        ),
    })
}

fn random_orthogonal(d: usize, rng: &mut ChaCha8Rng) -> DMatrix<C64> {
    let m = DMatrix::from_fn(d, d, |_, _| rng.gen_range(-1.0..1.0));
    complexify(&m.qr().q())
}

fn functoriality() -> Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut functor = 0.0f64;
    for _ in 0..20 {
        let q = rng.gen_range(-0.9..0.9);
        let space = FockSpace::new(3, 4, q)?;
        let o1 = random_orthogonal(3, &mut rng);
        let o2 = random_orthogonal(3, &mut rng);
        let lhs = space.second_quantize_orthogonal(&(&o1 * &o2))?;
        let rhs =
            &space.second_quantize_orthogonal(&o1)? * &space.second_quantize_orthogonal(&o2)?;
        functor = functor.max(lhs.max_abs_diff(&rhs));
    }
    let mut dilation = 0.0f64;
    for q in [-0.5, 0.3, 0.8] {
        let big = FockSpace::new(4, 4, q)?;
        let small = FockSpace::new(2, 4, q)?;
        let first = big.first_summand_indices()?;
        for _ in 0..7 {
            let theta = rng.gen_range(0.0..1.5);
            let e_alpha: Csr = big
                .rotation_dilation(theta)?
                .csr()
                .submatrix(&first, &first);
            let t = -theta.cos().ln();
            dilation = dilation.max(e_alpha.max_abs_diff(small.semigroup(t).csr()));
        }
    }
    Ok(Outcome {
        pass: functor <= 1e-10 && dilation <= 1e-10,
        detail: format!(
            "20 random orthogonal pairs: max {functor:.2e}; E o alpha_theta vs T_t, 21 angles: max {dilation:.2e} (tol 1e-10)"
        ),
    })
}

fn wick_calculus() -> Result<Outcome> {
    let mut vacuum = 0.0f64;
    let mut product = 0.0f64;
    for q in [0.0, 0.5] {
        let space = FockSpace::new(2, 6, q)?;
        let calc = WickCalculus::new(&space)?;
        for n in 0..=4 {
            for w in space.basis().words(n) {
                let v = calc.basis_word(&w)?.apply(&space.vacuum());
                vacuum = vacuum.max(qgauss::linalg::vec_max_abs_diff(
                    &v,
                    &space.basis_vector(&w),
                ));
            }
        }
        let rows: Vec<usize> = (0..space.size()).collect();
        for m in 0..=4 {
            for mp in 0..=(4 - m) {
                let cols: Vec<usize> = (0..space.basis().degree_range(6 - m - mp).end).collect();
                for x in space.basis().words(m) {
                    for y in space.basis().words(mp) {
                        let lhs = &calc.basis_word(&x)? * &calc.basis_word(&y)?;
                        let zeta = calc.product(
                            &WordVec::from_word(x.clone(), c(1.0)),
                            &WordVec::from_word(y.clone(), c(1.0)),
                        )?;
                        let rhs = calc.wick_word(&zeta)?;
                        let d = lhs
                            .csr()
                            .submatrix(&rows, &cols)
                            .max_abs_diff(&rhs.csr().submatrix(&rows, &cols));
                        product = product.max(d);
                    }
                }
            }
        }
    }
    Ok(Outcome {
        pass: vacuum == 0.0 && product <= 1e-10,
        detail: format!(
            "W(xi)Omega = xi on all words of degree <= 4: max {vacuum:.1e} (exact); product expansion, m+m' <= 4, d = 2, q in {{0, 0.5}}: max {product:.2e} (tol 1e-10)"
        ),
    })
}

fn ultraproduct_surrogate() -> Result<Outcome> {
    let mut moments = 0.0f64;
    for q in [-0.5, 0.0, 0.5] {
        for n in 1..=3 {
            let space = FockSpace::new(2 * n, 4, q)?;
            for w in binary_words(4) {
                let hs: Vec<Vec<C64>> = w.iter().map(|&i| unit(2, i)).collect();
                let lifted = un_embed(&space, &hs, n)?.vacuum_trace();
                moments = moments.max((lifted - moment_combinatorial(&hs, q)?).norm());
            }
        }
    }
    let sigma = Partition::new(3, vec![vec![1, 2, 3]])?;
    let fit = decay_probe(&sigma, &vec![vec![c(1.0)]; 3], &[2, 4, 8, 16], 0.0)?;
    let in_band = (-0.75..=-0.25).contains(&fit.slope);
    Ok(Outcome {
        pass: moments <= 1e-10 && in_band,
        detail: format!(
            "u_n moments, n <= 3, words <= 4: max {moments:.2e} (tol 1e-10) [{}]; decay slope for {{{{1,2,3}}}} over n = 2,4,8,16: {:.3} (band [-0.75, -0.25]) [{}], norms {:?}",
            if moments <= 1e-10 { "ok" } else { "FAIL" },
            fit.slope,
            if in_band { "ok" } else { "FAIL" },
            fit.norms.iter().map(|x| format!("{x:.4}")).collect::<Vec<_>>()
        ),
    })
}

fn crossed_product() -> Result<Outcome> {
    let start = Instant::now();
    let act = builtin_action("s3")?;
    let group = act.group().clone();
    let (mut cov, mut adj, mut comm, mut fact, mut commute) =
        (0.0f64, 0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for rep in [RepChoice::Trivial, RepChoice::Conjugation] {
        let model = CrossedProductModel::new(act.clone(), rep, 2, 3, 0.6)?;
        cov = cov.max(covariance_defect(&model)?);
        adj = adj.max(adjoint_defect(&model)?);
        for t in [0.3, 1.2] {
            let (d, cm) = semigroup_factorization_defect(&act, rep, 2, 2, 0.6, t)?;
            fact = fact.max(d);
            commute = commute.max(cm);
        }
    }
    let mut nontrivial = false;
    for q in [-0.4, 0.0, 0.7] {
        let model = CrossedProductModel::new(act.clone(), RepChoice::Trivial, 2, 2, q)?;
        for g1 in 0..group.order() {
            for g2 in 0..group.order() {
                let r = commutator_extraction(&model, g1, g2, &[1.0, 0.0], &[0.0, 1.0])?;
                comm = comm.max(r.defect);
                nontrivial |= r.commutator != group.identity() && q != 0.0;
            }
        }
    }
    let (a, b) = (
        group.find("(12)").expect("S3 label"),
        group.find("(13)").expect("S3 label"),
    );
    let named = group.label(group.commutator(a, b)).to_string();
    let elapsed = start.elapsed();
    let pass = cov <= 1e-12
        && adj <= 1e-12
        && comm <= 1e-10
        && fact <= 1e-10
        && commute <= 1e-10
        && nontrivial
        && elapsed < Duration::from_secs(300);
    Ok(Outcome {
        pass,
        detail: format!(
            "S3, d = 2: covariance {cov:.1e}, S(g)* = S(g^-1) {adj:.1e} (tol 1e-12, N = 3); P0 commutator word = q u_[g1,g2] over all 36 pairs, 3 q values {comm:.1e} (tol 1e-10, [(12),(13)] = {named}); T_t factorization {fact:.1e}, [alpha, u_g] {commute:.1e} (tol 1e-10); {elapsed:.2?} (limit 5 min)"
        ),
    })
}

fn spectral_gap_criterion() -> Result<Outcome> {
    let mut parts = Vec::new();
    let mut pass = true;
    let mut at_03 = Vec::new();
    for q in [0.0, 0.3] {
        for f in [1, 2, 4] {
            let r = spectral_gap(f, q, 3)?;
            pass &= r.positive;
            parts.push(format!(
                "|F|={f} q={q}: {:.4e}{}",
                r.lambda_min,
                if r.positive { "" } else { " [FAIL]" }
            ));
            if q == 0.3 {
                at_03.push(r.lambda_min);
            }
        }
    }
    let increasing = at_03.windows(2).all(|w| w[1] > w[0]);
    pass &= increasing;
    Ok(Outcome {
        pass,
        detail: format!(
            "lambda_min on Omega-perp, cutoff 3: {}; strictly increasing in |F| at q = 0.3: {}",
            parts.join(", "),
            if increasing { "ok" } else { "FAIL" }
        ),
    })
}

fn free_nc_rule() -> Result<Outcome> {
    let act = builtin_action("s3")?;
    let coeffs: Vec<Vec<C64>> = (0..6)
        .map(|j| {
            (0..3)
                .map(|x| {
                    C64::new(
                        1.0 + 0.25 * ((j + 2 * x) % 5) as f64,
                        0.1 * (x as f64 - 1.0),
                    )
                })
                .collect()
        })
        .collect();
    let mut words = 0;
    let mut nonzero = 0;
    let mut worst = 0.0f64;
    for rep in [RepChoice::Trivial, RepChoice::Conjugation] {
        let model = CrossedProductModel::new(act.clone(), rep, 1, 3, 0.0)?;
        let r = free_moment_sweep(&model, 6, &coeffs)?;
        words += r.words;
        nonzero += r.nonzero;
        worst = worst.max(r.max_defect);
    }
    Ok(Outcome {
        pass: worst <= 1e-10,
        detail: format!("all {words} words of length 1..6 over S3 (both reps, {nonzero} nonzero): max |E_A(model) - NC rule| = {worst:.2e} (tol 1e-10)"),
    })
}

fn rigidity_criterion() -> Result<Outcome> {
    let start = Instant::now();
    let dirac = standard_defect(&GridMeasure::dirac(16));
    let adversary = zero_mass_adversary(16, 10_000, 0x5eed)?;
    let mut ratio = 0.0f64;
    let mut family = true;
    for beta in [1e-3, 1e-2, 0.1, 0.5] {
        let r = tpp_concentration(&far_mass_family(16, beta)?, 0.5)?;
        family &= r.l1_distance <= r.bound_40delta;
        ratio = ratio.max(r.l1_distance / r.defect);
    }
    let elapsed = start.elapsed();
    Ok(Outcome {
        pass: dirac == 0.0 && adversary.min_defect >= 0.05 && family && elapsed < Duration::from_secs(120),
        detail: format!(
            "delta_0 defect {dirac}; adversary (10^4 trials, L = 16, seed {}) min defect {:.4} (must be >= 0.05); mu_beta max |mu-delta_0|/defect = {ratio:.3} (must be <= 40); {elapsed:.2?} (limit 2 min)",
            adversary.seed, adversary.min_defect
        ),
    })
}

fn main() -> ExitCode {
    let criteria: [(&str, Criterion); 11] = [
        ("moment identity", moment_identity),
        ("special values", special_values),
        ("q-commutation relation", q_relation),
        ("Gram positivity", gram_positivity),
        ("functoriality and dilation", functoriality),
        ("Wick calculus", wick_calculus),
        ("replica surrogate", ultraproduct_surrogate),
        ("crossed product relations", crossed_product),
        ("spectral gap", spectral_gap_criterion),
        ("free noncrossing rule", free_nc_rule),
        ("torus rigidity", rigidity_criterion),
    ];
    let mut failed = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        let (pass, detail) = match run() {
            Ok(o) => (o.pass, o.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        if !pass {
            failed += 1;
        }
        println!(
            "criterion {:>2} {} {name}: {detail}",
            k + 1,
            if pass { "PASS" } else { "FAIL" }
        );
    }
    println!(
        "acceptance: {} of {} criteria pass",
        criteria.len() - failed,
        criteria.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

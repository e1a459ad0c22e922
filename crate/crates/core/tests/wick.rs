use proptest::prelude::*;
use qgauss::linalg::{vec_max_abs_diff, Csr};
use qgauss::partitions::{pair_partitions, Partition};
use qgauss::qfock::*;
use qgauss::wick::*;
use qgauss::C64;

fn c(x: f64) -> C64 {
    C64::new(x, 0.0)
}

fn low_columns(space: &FockSpace, max_degree: usize) -> Vec<usize> {
    (0..space.basis().degree_range(max_degree).end).collect()
}

fn restricted_diff(space: &FockSpace, a: &Csr, b: &Csr, max_degree: usize) -> f64 {
    let rows: Vec<usize> = (0..space.size()).collect();
    let cols = low_columns(space, max_degree);
    a.submatrix(&rows, &cols)
        .max_abs_diff(&b.submatrix(&rows, &cols))
}

#[test]
fn wick_words_reproduce_their_tensor() {
    for q in [-0.6, 0.0, 0.5] {
        let space = FockSpace::new(2, 4, q).unwrap();
        let calc = WickCalculus::new(&space).unwrap();
        for n in 0..=4 {
            for w in space.basis().words(n) {
                let got = calc.basis_word(&w).unwrap().apply(&space.vacuum());
                assert_eq!(
                    vec_max_abs_diff(&got, &space.basis_vector(&w)) < 1e-13,
                    true,
                    "{w:?}"
                );
            }
        }
    }
}

#[test]
fn wick_words_of_one_letter_are_hermite_like() {
    // W(e⊗e) = s(e)² − 1 and W(e⊗e⊗e) = s(e)³ − (2 + q)s(e)
    let q = 0.3;
    let space = FockSpace::new(1, 5, q).unwrap();
    let calc = WickCalculus::new(&space).unwrap();
    let s = space.field(&[c(1.0)]).unwrap();
    let id = space.identity();
    let w2 = &(&s * &s) - &id;
    let w3 = &(&(&s * &s) * &s) - &s.scale(c(2.0 + q));
    assert!(restricted_diff(&space, calc.basis_word(&[0, 0]).unwrap().csr(), w2.csr(), 3) < 1e-12);
    assert!(
        restricted_diff(
            &space,
            calc.basis_word(&[0, 0, 0]).unwrap().csr(),
            w3.csr(),
            2
        ) < 1e-12
    );
}

#[test]
fn product_expansion_matches_matrix_products() {
    for q in [0.0, 0.5, -0.4] {
        let space = FockSpace::new(2, 6, q).unwrap();
        let calc = WickCalculus::new(&space).unwrap();
        for m in 0..=4 {
            for mp in 0..=(4 - m) {
                for x in space.basis().words(m) {
                    for y in space.basis().words(mp) {
                        let lhs = &calc.basis_word(&x).unwrap() * &calc.basis_word(&y).unwrap();
                        let zeta = calc
                            .product(
                                &WordVec::from_word(x.clone(), c(1.0)),
                                &WordVec::from_word(y.clone(), c(1.0)),
                            )
                            .unwrap();
                        let rhs = calc.wick_word(&zeta).unwrap();
                        let d = restricted_diff(&space, lhs.csr(), rhs.csr(), 6 - m - mp);
                        assert!(d < 1e-10, "{x:?} {y:?} q={q}: {d}");
                    }
                }
            }
        }
    }
}

#[test]
fn expansion_of_two_letters() {
    // W(e_a)W(e_b) = W(e_a⊗e_b) + δ_ab
    let terms = product_expansion_words(&[0], &[0], 0.7);
    assert_eq!(terms.len(), 2);
    let terms = product_expansion_words(&[0], &[1], 0.7);
    assert_eq!(terms.len(), 1);
    assert_eq!(terms[0].word, vec![0, 1]);
}

#[test]
fn f_sigma_counts_crossings() {
    let h = vec![c(1.0)];
    let crossing = Partition::new(4, vec![vec![1, 3], vec![2, 4]]).unwrap();
    let nested = Partition::new(4, vec![vec![1, 4], vec![2, 3]]).unwrap();
    assert!((f_sigma(&crossing, &vec![h.clone(); 4], 0.4).unwrap() - c(0.4)).norm() < 1e-15);
    assert!((f_sigma(&nested, &vec![h.clone(); 4], 0.4).unwrap() - c(1.0)).norm() < 1e-15);
    let over = Partition::new(3, vec![vec![1, 3], vec![2]]).unwrap();
    assert!((f_sigma(&over, &vec![h; 3], 0.4).unwrap() - c(0.4)).norm() < 1e-15);
}

#[test]
fn bipartite_partitions_only_pair_across() {
    for p in bipartite_p12(3, 2) {
        assert!(p.pairs().all(|(a, b)| a <= 3 && b > 3));
    }
    // Σ_k C(3,k)C(2,k)k! = 1 + 6 + 6 = 13
    assert_eq!(bipartite_p12(3, 2).count(), 13);
}

#[test]
fn replicas_preserve_moments() {
    let h = [vec![c(1.0), c(0.0)], vec![c(0.0), c(1.0)]];
    for q in [-0.5, 0.0, 0.5] {
        for n in 1..=3 {
            for m in 0..=4usize {
                for code in 0..(1usize << m) {
                    let hs: Vec<Vec<C64>> = (0..m).map(|k| h[(code >> k) & 1].clone()).collect();
                    let a = un_moment(&hs, n, q);
                    let b = moment_combinatorial(&hs, q).unwrap();
                    assert!((a - b).norm() < 1e-10);
                }
            }
        }
    }
}

#[test]
fn replica_embedding_as_matrices() {
    let q = 0.25;
    let n = 2;
    let space = FockSpace::new(2 * n, 4, q).unwrap();
    let hs = vec![vec![c(0.6), c(0.8)]; 4];
    let op = un_embed(&space, &hs, n).unwrap();
    assert!((op.vacuum_trace() - moment_combinatorial(&hs, q).unwrap()).norm() < 1e-12);
}

#[test]
fn sigma_word_operator_agrees_with_sparse_route() {
    let q = 0.3;
    let n = 2;
    let sigma = Partition::new(3, vec![vec![1, 3], vec![2]]).unwrap();
    let hs = vec![vec![c(1.0)]; 3];
    let x = SigmaWord::new(&sigma, &hs, n).unwrap();
    assert_eq!(x.num_monomials(), 2);
    let space = FockSpace::new(n, 3, q).unwrap();
    let dense = x.operator(&space).unwrap().apply(&space.vacuum());
    let sparse = x.vacuum_vector(q).to_dense(space.basis());
    assert!(vec_max_abs_diff(&dense, &sparse) < 1e-13);
}

#[test]
fn decay_is_at_least_the_bound() {
    let sigma = Partition::new(3, vec![vec![1, 2, 3]]).unwrap();
    let hs = vec![vec![c(1.0)]; 3];
    for q in [0.0, 0.5] {
        let fit = decay_probe(&sigma, &hs, &[2, 4, 8], q).unwrap();
        assert!(fit.slope <= -0.25, "{fit:?}");
        assert!(fit.norms.windows(2).all(|w| w[1] < w[0]));
    }
    let pairs = Partition::new(2, vec![vec![1, 2]]).unwrap();
    assert!(decay_probe(&pairs, &hs[..2], &[2, 4], 0.0).is_err());
}

#[test]
fn free_three_block_norm_closed_form() {
    // at q = 0, τ((x*x)²) = n⁻⁶ (132n + 50n(n−1)) for σ = {{1,2,3}}
    let sigma = Partition::new(3, vec![vec![1, 2, 3]]).unwrap();
    let hs = vec![vec![c(1.0)]; 3];
    for n in [1usize, 2, 3, 5] {
        let nf = n as f64;
        let expected = ((132.0 * nf + 50.0 * nf * (nf - 1.0)) / nf.powi(6)).powf(0.25);
        let got = SigmaWord::new(&sigma, &hs, n).unwrap().norm4(0.0);
        assert!((got - expected).abs() < 1e-12, "n={n}");
    }
}

#[test]
fn singleton_reduction_is_an_eigenvector() {
    let hs = vec![
        vec![c(1.0), c(0.0)],
        vec![c(0.6), c(0.8)],
        vec![c(0.6), c(0.8)],
        vec![c(0.0), c(1.0)],
    ];
    for sigma in [
        Partition::new(4, vec![vec![1], vec![2, 3], vec![4]]).unwrap(),
        Partition::new(4, vec![vec![1, 4], vec![2], vec![3]]).unwrap(),
    ] {
        let r = eigenvector_check(&sigma, &hs, 0.4, 0.5, &[3, 8, 16]).unwrap();
        assert!(r.pass, "{r:?}");
        assert_eq!(r.singletons, 2);
        assert!(eigenvector_check(&sigma, &hs, 0.4, 0.5, &[2]).is_err());
    }
    let all_pairs = Partition::new(2, vec![vec![1, 2]]).unwrap();
    let r = eigenvector_check(&all_pairs, &hs[..2], 0.2, 0.5, &[1, 2]).unwrap();
    assert_eq!(r.expected_factor, 1.0);
    assert!(r.pass);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn f_sigma_is_rotation_invariant(
        q in -1.0f64..1.0,
        theta in 0.0f64..6.3,
        pick in any::<prop::sample::Index>(),
        raw in prop::collection::vec(prop::collection::vec(-1.0f64..1.0, 2), 4),
    ) {
        let all: Vec<Partition> = qgauss::partitions::p12_partitions(4).collect();
        let sigma = pick.get(&all);
        let hs: Vec<Vec<C64>> = raw.iter().map(|h| vec![c(h[0]), c(h[1])]).collect();
        let (s, co) = theta.sin_cos();
        let rotated: Vec<Vec<C64>> = raw.iter().map(|h| vec![c(co * h[0] - s * h[1]), c(s * h[0] + co * h[1])]).collect();
        let a = f_sigma(sigma, &hs, q).unwrap();
        let b = f_sigma(sigma, &rotated, q).unwrap();
        prop_assert!((a - b).norm() < 1e-12);
    }

    #[test]
    fn wick_word_of_combination_maps_vacuum_to_it(
        q in -0.9f64..0.9,
        coeffs in prop::collection::vec(-1.0f64..1.0, 15),
    ) {
        let space = FockSpace::new(2, 3, q).unwrap();
        let calc = WickCalculus::new(&space).unwrap();
        let xi_dense: Vec<C64> = coeffs.iter().map(|&x| c(x)).collect();
        let xi = WordVec::from_dense(space.basis(), &xi_dense);
        let got = calc.wick_word(&xi).unwrap().apply(&space.vacuum());
        prop_assert!(vec_max_abs_diff(&got, &xi_dense) < 1e-12);
    }

    #[test]
    fn pair_partition_sum_is_moment_of_one_field(q in -1.0f64..1.0, k in 0usize..5) {
        // Σ_{P₂(2k)} f_σ(h,…,h) with |h| = 1 equals τ(s(h)^{2k})
        let hs = vec![vec![c(1.0)]; 2 * k];
        let total: C64 = pair_partitions(2 * k).map(|p| f_sigma(&p, &hs, q).unwrap()).sum();
        prop_assert!((total - moment_combinatorial(&hs, q).unwrap()).norm() < 1e-12);
    }
}

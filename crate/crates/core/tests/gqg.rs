use qgauss::gqg::*;
use qgauss::C64;

fn write_temp(name: &str, body: &str) -> std::path::PathBuf {
    let path = std::env::temp_dir().join(format!("qgauss-{}-{name}", std::process::id()));
    std::fs::write(&path, body).unwrap();
    path
}

#[test]
fn group_file_round_trip() {
    let body = r#"{"order": 2, "mul": [[0, 1], [1, 0]], "action": [[0, 1, 2, 3], [1, 0, 3, 2]], "labels": ["e", "t"]}"#;
    let path = write_temp("z2.json", body);
    let act = load_action(&path).unwrap();
    assert_eq!(act.group().order(), 2);
    assert_eq!(act.points(), 4);
    assert_eq!(act.apply(1, 2), 3);
    assert_eq!(act.group().label(1), "t");
    std::fs::remove_file(path).unwrap();
}

#[test]
fn group_file_errors() {
    let not_assoc = r#"{"order": 3, "mul": [[0, 1, 2], [1, 0, 2], [2, 2, 0]]}"#;
    let path = write_temp("bad.json", not_assoc);
    assert!(load_action(&path).is_err());
    std::fs::remove_file(path).unwrap();
    let bad_action = r#"{"order": 2, "mul": [[0, 1], [1, 0]], "action": [[1, 0], [1, 0]]}"#;
    let path = write_temp("badact.json", bad_action);
    assert!(load_action(&path).is_err());
    std::fs::remove_file(path).unwrap();
    assert!(load_action(std::path::Path::new("/nonexistent/group.json")).is_err());
}

#[test]
fn builtins_have_expected_commutator_subgroups() {
    assert_eq!(
        builtin_action("s3")
            .unwrap()
            .group()
            .commutator_subgroup()
            .len(),
        3
    );
    assert_eq!(
        builtin_action("d4")
            .unwrap()
            .group()
            .commutator_subgroup()
            .len(),
        2
    );
    assert_eq!(
        builtin_action("klein")
            .unwrap()
            .group()
            .commutator_subgroup()
            .len(),
        1
    );
    assert_eq!(
        builtin_action("z5")
            .unwrap()
            .group()
            .commutator_subgroup()
            .len(),
        1
    );
    assert!(builtin_action("a7").is_err());
}

#[test]
fn covariant_system_on_dihedral_group() {
    let act = builtin_action("d4").unwrap();
    let m = CrossedProductModel::new(act, RepChoice::Conjugation, 1, 1, 0.4).unwrap();
    assert!(covariant_system_defect(&m).unwrap() < 1e-12);
    assert!(covariance_defect(&m).unwrap() < 1e-12);
    assert!(adjoint_defect(&m).unwrap() < 1e-12);
}

#[test]
fn first_degree_vectors_are_eigenvectors() {
    let m = CrossedProductModel::new(
        builtin_action("s3").unwrap(),
        RepChoice::Trivial,
        1,
        2,
        -0.3,
    )
    .unwrap();
    assert!(first_eigenvector_defect(&m, 0.8).unwrap() < 1e-14);
}

#[test]
fn model_guard_refuses_large_models() {
    let act = builtin_action("s3").unwrap();
    let err = CrossedProductModel::new(act, RepChoice::Trivial, 2, 4, 0.1).unwrap_err();
    assert!(matches!(err, qgauss::Error::Resource { .. }));
    assert_eq!(model_size(3, 6, 2, 3), Some(33_930));
}

#[test]
fn lazy_and_materialized_products_agree() {
    let m = CrossedProductModel::new(
        builtin_action("s3").unwrap(),
        RepChoice::Conjugation,
        1,
        2,
        0.5,
    )
    .unwrap();
    let a: Vec<C64> = (0..3).map(|x| C64::new(x as f64, 1.0)).collect();
    let x = m
        .generator(4, &[1.0])
        .unwrap()
        .compose(&m.multiplier(&a).unwrap())
        .add(&m.unitary(2).scale(C64::new(0.0, 2.0)));
    let v: Vec<C64> = (0..m.size())
        .map(|i| C64::new((i % 7) as f64, (i % 3) as f64))
        .collect();
    let lazy = x.apply(&v);
    let dense = x.materialize().unwrap().mul_vec(&v);
    assert!(qgauss::linalg::vec_max_abs_diff(&lazy, &dense) < 1e-12);
}

#[test]
fn free_moments_vanish_off_the_identity() {
    let m = CrossedProductModel::new(builtin_action("s3").unwrap(), RepChoice::Trivial, 1, 2, 0.0)
        .unwrap();
    let ones = vec![C64::new(1.0, 0.0); 3];
    for g in 0..6 {
        for h in 0..6 {
            let k = vec![vec![1.0]; 2];
            let coeffs = vec![ones.clone(), ones.clone()];
            let nc = free_moment_nc(m.action(), m.rep(), 0.0, &[g, h], &k, &coeffs).unwrap();
            let model = model_moment(&m, &[g, h], &k, &coeffs).unwrap();
            assert!(qgauss::linalg::vec_max_abs_diff(&nc, &model) < 1e-13);
        }
    }
}

#[test]
fn labels_hold_at_q_zero_as_well() {
    let m = CrossedProductModel::new(builtin_action("s3").unwrap(), RepChoice::Trivial, 1, 3, 0.0)
        .unwrap();
    let omega = m.cyclic_vector();
    for word in [[1usize, 2, 1], [4, 4, 1], [5, 3, 2]] {
        let x = m.generator_product(&word, &vec![vec![1.0]; 3]).unwrap();
        assert_eq!(eigenspace_labels(&m, &x.apply(&omega), 1e-12).violations, 0);
    }
}

use std::collections::BTreeMap;
use std::path::Path;

use nalgebra::DMatrix;
use qgauss::gqg::{
    adjoint_defect, builtin_action, commutator_extraction, covariance_defect,
    covariant_system_defect, eigenspace_labels, first_eigenvector_defect, free_moment_sweep,
    k_unit, load_action, polar_covariance, semigroup_factorization_defect, spectral_gap,
    CrossedElement, CrossedProductModel, FiniteGroup, GroupAction, RepChoice, POSITIVITY_TOL,
};
use qgauss::linalg::{complexify, vec_max_abs_diff};
use qgauss::partitions::Partition;
use qgauss::qfock::{moment_combinatorial, unit, FockSpace, WordVec};
use qgauss::rigidity::{
    far_mass_family, standard_defect, tpp_concentration, zero_mass_adversary, GridMeasure,
};
use qgauss::wick::{decay_probe, eigenvector_check, un_embed, WickCalculus};
use qgauss::C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::{derive_seed, RunConfig};
use crate::guard::{self, Guard};
use crate::report::{GapRow, MomentRow, Record, Relation};
use crate::CliError;

#[derive(Debug, Default)]
pub struct SuiteOutput {
    pub records: Vec<Record>,
    pub seeds: BTreeMap<String, u64>,
}

impl SuiteOutput {
    pub fn extend(&mut self, other: SuiteOutput) {
        self.records.extend(other.records);
        self.seeds.extend(other.seeds);
    }
}

const PAIR_SUM: &str = "vacuum moments of q-Gaussian fields equal the sum over pair partitions of q^crossings times the pairings";

fn c(x: f64) -> C64 {
    C64::new(x, 0.0)
}

/// Words over `{0, .., letters-1}` of lengths `1..=max_len`.
fn words(letters: usize, max_len: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut layer = vec![Vec::new()];
    for _ in 0..max_len {
        layer = layer
            .iter()
            .flat_map(|w: &Vec<usize>| {
                (0..letters).map(move |a| {
                    let mut v = w.clone();
                    v.push(a);
                    v
                })
            })
            .collect();
        out.extend(layer.iter().cloned());
    }
    out
}

fn field_word_trace(space: &FockSpace, fields: &[qgauss::qfock::FockOperator], w: &[usize]) -> C64 {
    w.iter()
        .fold(space.identity(), |acc, &i| &acc * &fields[i])
        .vacuum_trace()
}

pub fn moments(cfg: &RunConfig, guard: &Guard) -> Result<(SuiteOutput, Vec<MomentRow>), CliError> {
    cfg.check_q()?;
    cfg.check_dim(2)?;
    if cfg.max_len == 0 {
        return Err(CliError::Config("max_len must be positive".into()));
    }
    let cutoff = cfg.cutoff_or(cfg.max_len.div_ceil(2));
    guard.check("moment table operators", guard::fock_bytes(cfg.dim, cutoff))?;
    let space = FockSpace::new(cfg.dim, cutoff, cfg.q)?;
    let pair = [unit(cfg.dim, 0), unit(cfg.dim, 1)];
    let fields = [space.field(&pair[0])?, space.field(&pair[1])?];
    let mut out = SuiteOutput::default();
    let mut rows = Vec::new();
    for w in words(2, cfg.max_len) {
        let name: String = w.iter().map(|&i| if i == 0 { 'h' } else { 'k' }).collect();
        let hs: Vec<Vec<C64>> = w.iter().map(|&i| pair[i].clone()).collect();
        let comb = moment_combinatorial(&hs, cfg.q)?;
        let mat = field_word_trace(&space, &fields, &w);
        let delta = (comb - mat).norm();
        out.records.push(Record::number(
            format!("moments.{name}"),
            Relation::Eq,
            comb.re,
            mat.re,
            1e-10,
            PAIR_SUM,
        ));
        rows.push(MomentRow {
            word: name,
            combinatorial: comb.re,
            matrix: mat.re,
            delta,
        });
    }
    Ok((out, rows))
}

fn random_orthogonal(d: usize, rng: &mut ChaCha8Rng) -> DMatrix<C64> {
    let m = DMatrix::from_fn(d, d, |_, _| rng.gen_range(-1.0..1.0));
    complexify(&m.qr().q())
}

pub fn fock(cfg: &RunConfig, guard: &Guard) -> Result<SuiteOutput, CliError> {
    cfg.check_q()?;
    cfg.check_dim(1)?;
    let (d, n, q) = (cfg.dim, cfg.cutoff_or(4), cfg.q);
    if n == 0 {
        return Err(CliError::Config("cutoff must be positive".into()));
    }
    guard.check("Fock operators", guard::fock_bytes(2 * d, n))?;
    guard.check("Gram blocks", guard::gram_bytes(d, n))?;
    let mut out = SuiteOutput::default();
    let space = FockSpace::new(d, n, q)?;

    let min_eig = (1..=n)
        .map(|k| space.gram().min_eigenvalue(space.basis(), k))
        .fold(f64::INFINITY, f64::min);
    out.records.push(Record::number(
        "fock.gram_min_eigenvalue",
        Relation::Ge,
        0.0,
        min_eig,
        1e-12,
        "the q-Gram form is positive semidefinite for |q| < 1",
    ));

    let below_top = space.basis().degree_range(n - 1).end;
    let mut relation = 0.0f64;
    let mut self_adjoint = 0.0f64;
    for f in 0..d {
        let lf_adj = space.annihilation(&unit(d, f))?;
        let sf = space.field(&unit(d, f))?;
        self_adjoint = self_adjoint.max(space.adjoint(&sf).max_abs_diff(&sf));
        for g in 0..d {
            let lg = space.creation(&unit(d, g))?;
            let mut diff = &(&lf_adj * &lg) - &(&lg * &lf_adj).scale(c(q));
            if f == g {
                diff = &diff - &space.identity();
            }
            for col in 0..below_top {
                let mut xi = vec![c(0.0); space.size()];
                xi[col] = c(1.0);
                relation = relation.max(space.norm(&diff.apply(&xi)));
            }
        }
    }
    out.records.push(Record::defect(
        "fock.q_relation",
        relation,
        1e-12,
        "l*(f) l(g) - q l(g) l*(f) = <f, g> on vectors below the top degree",
    ));
    out.records.push(Record::defect(
        "fock.field_self_adjoint",
        self_adjoint,
        1e-12,
        "s(h) = l(h) + l*(h) is self-adjoint for the q-inner product",
    ));

    let letters = d.min(2);
    let fields: Vec<_> = (0..letters)
        .map(|a| space.field(&unit(d, a)))
        .collect::<Result<_, _>>()?;
    let mut moments = 0.0f64;
    for w in words(letters, (2 * n).min(6)) {
        let hs: Vec<Vec<C64>> = w.iter().map(|&i| unit(d, i)).collect();
        moments = moments
            .max((field_word_trace(&space, &fields, &w) - moment_combinatorial(&hs, q)?).norm());
    }
    out.records
        .push(Record::defect("fock.moments", moments, 1e-10, PAIR_SUM));

    if n >= 2 {
        let s4 = field_word_trace(&space, &fields, &[0, 0, 0, 0]);
        out.records.push(Record::number(
            "fock.fourth_moment",
            Relation::Eq,
            2.0 + q,
            s4.re,
            1e-10,
            "two nested pairings and one crossing pairing give tau(s(h)^4) = 2 + q",
        ));
    }

    let seed = derive_seed(cfg.seed, "fock.orthogonal");
    out.seeds.insert("fock.orthogonal".into(), seed);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut functor = 0.0f64;
    for _ in 0..5 {
        let o1 = random_orthogonal(d, &mut rng);
        let o2 = random_orthogonal(d, &mut rng);
        let lhs = space.second_quantize_orthogonal(&(&o1 * &o2))?;
        let rhs =
            &space.second_quantize_orthogonal(&o1)? * &space.second_quantize_orthogonal(&o2)?;
        functor = functor.max(lhs.max_abs_diff(&rhs));
    }
    out.records.push(Record::defect(
        "fock.functoriality",
        functor,
        1e-10,
        "second quantization is multiplicative on orthogonal matrices",
    ));

    let big = FockSpace::new(2 * d, n, q)?;
    let first = big.first_summand_indices()?;
    let mut dilation = 0.0f64;
    for _ in 0..3 {
        let theta: f64 = rng.gen_range(0.0..1.5);
        let compressed = big
            .rotation_dilation(theta)?
            .csr()
            .submatrix(&first, &first);
        dilation = dilation.max(compressed.max_abs_diff(space.semigroup(-theta.cos().ln()).csr()));
    }
    out.records.push(Record::defect(
        "fock.rotation_dilation",
        dilation,
        1e-10,
        "compressing the second quantized rotation by theta to the first summand gives the number semigroup at t = -log cos theta",
    ));
    Ok(out)
}

pub fn wick(cfg: &RunConfig, guard: &Guard) -> Result<SuiteOutput, CliError> {
    cfg.check_q()?;
    cfg.check_dim(1)?;
    let (d, n, q) = (cfg.dim, cfg.cutoff_or(4), cfg.q);
    if n == 0 {
        return Err(CliError::Config("cutoff must be positive".into()));
    }
    guard.check("Wick words", guard::fock_bytes(2 * d, n))?;
    let mut out = SuiteOutput::default();
    let space = FockSpace::new(d, n, q)?;
    let calc = WickCalculus::new(&space)?;

    let mut vacuum = 0.0f64;
    for k in 0..=n {
        for w in space.basis().words(k) {
            let v = calc.basis_word(&w)?.apply(&space.vacuum());
            vacuum = vacuum.max(vec_max_abs_diff(&v, &space.basis_vector(&w)));
        }
    }
    out.records.push(Record::defect(
        "wick.vacuum_reproduction",
        vacuum,
        1e-12,
        "the Wick word W(xi) maps the vacuum to xi",
    ));

    let rows: Vec<usize> = (0..space.size()).collect();
    let mut product = 0.0f64;
    for m in 0..=n.min(4) {
        for mp in 0..=(n.min(4) - m) {
            let cols: Vec<usize> = (0..space.basis().degree_range(n - m - mp).end).collect();
            for x in space.basis().words(m) {
                for y in space.basis().words(mp) {
                    let lhs = &calc.basis_word(&x)? * &calc.basis_word(&y)?;
                    let zeta = calc.product(
                        &WordVec::from_word(x.clone(), c(1.0)),
                        &WordVec::from_word(y.clone(), c(1.0)),
                    )?;
                    let rhs = calc.wick_word(&zeta)?;
                    product = product.max(
                        lhs.csr()
                            .submatrix(&rows, &cols)
                            .max_abs_diff(&rhs.csr().submatrix(&rows, &cols)),
                    );
                }
            }
        }
    }
    out.records.push(Record::defect(
        "wick.product_expansion",
        product,
        1e-10,
        "W(x)W(y) is the sum over singleton-pair partitions between x and y of q^crossings times contracted Wick words",
    ));

    let replicas = 2;
    let rcut = n.min(4);
    let replicated = FockSpace::new(d * replicas, rcut, q)?;
    let letters = d.min(2);
    let mut surrogate = 0.0f64;
    for w in words(letters, (2 * rcut).min(4)) {
        let hs: Vec<Vec<C64>> = w.iter().map(|&i| unit(d, i)).collect();
        let lifted = un_embed(&replicated, &hs, replicas)?.vacuum_trace();
        surrogate = surrogate.max((lifted - moment_combinatorial(&hs, q)?).norm());
    }
    out.records.push(Record::defect(
        "wick.replica_moments",
        surrogate,
        1e-10,
        "averaging n orthogonal replicas of each vector preserves all mixed moments",
    ));

    let block = Partition::new(3, vec![vec![1, 2, 3]])?;
    let fit = decay_probe(&block, &vec![unit(1, 0); 3], &[2, 4, 8, 16], q)?;
    out.records.push(Record::number(
        "wick.decay_slope",
        Relation::Le,
        -0.25,
        fit.slope,
        0.0,
        "the L4 norm of the replica sum of a three-element block decays at least like n^(-1/4)",
    ));

    let hs = if d >= 2 {
        vec![
            unit(d, 0),
            vec![c(0.6), c(0.8)]
                .into_iter()
                .chain(std::iter::repeat(c(0.0)))
                .take(d)
                .collect(),
            unit(d, 1),
            unit(d, 0),
        ]
    } else {
        vec![unit(1, 0); 4]
    };
    let sigma = Partition::new(4, vec![vec![1], vec![2, 3], vec![4]])?;
    let eig = eigenvector_check(&sigma, &hs, q, 0.5, &[3, 8, 16])?;
    out.records.push(Record::defect(
        "wick.eigenvector",
        eig.exact_residual,
        1e-10,
        "the Wick word of a partition with s singletons is an eigenvector of the number semigroup with eigenvalue e^(-ts)",
    ));
    let (first, last) = (
        eig.finite_residuals[0].1,
        eig.finite_residuals[eig.finite_residuals.len() - 1].1,
    );
    out.records.push(Record::number(
        "wick.eigenvector_surrogates",
        Relation::Le,
        first,
        last,
        0.0,
        "finite replica surrogates approach the eigenspace as the replica count grows",
    ));
    Ok(out)
}

/// Built-in name or path to a JSON group file.
pub fn resolve_group(spec: &str) -> Result<GroupAction, CliError> {
    match builtin_action(spec) {
        Ok(a) => Ok(a),
        Err(_) if Path::new(spec).exists() => Ok(load_action(Path::new(spec))?),
        Err(_) => Err(CliError::Config(format!(
            "'{spec}' is neither a built-in group nor a readable group file"
        ))),
    }
}

fn describe(element: &CrossedElement, group: &FiniteGroup) -> String {
    let terms: Vec<String> = element
        .coeffs
        .iter()
        .enumerate()
        .filter(|(_, cs)| cs.iter().any(|z| z.norm() > 1e-9))
        .map(|(g, cs)| format!("{:.6}·u_{}", cs[0].re, group.label(g)))
        .collect();
    if terms.is_empty() {
        "0".into()
    } else {
        terms.join(" + ")
    }
}

pub fn gqg(cfg: &RunConfig, guard: &Guard) -> Result<SuiteOutput, CliError> {
    cfg.check_q()?;
    cfg.check_dim(1)?;
    let action = resolve_group(&cfg.group)?;
    let group = action.group().clone();
    let (kdim, n, q) = (cfg.dim, cfg.cutoff_or(3), cfg.q);
    let (points, order) = (action.points(), group.order());
    guard.check(
        "crossed-product model",
        guard::model_bytes(points, order, kdim, n),
    )?;
    guard.check(
        "doubled model",
        guard::model_bytes(points, order, 2 * kdim, 2),
    )?;
    let mut out = SuiteOutput::default();

    for rep in [RepChoice::Trivial, RepChoice::Conjugation] {
        let tag = match rep {
            RepChoice::Trivial => "trivial",
            RepChoice::Conjugation => "conjugation",
        };
        let model = CrossedProductModel::new(action.clone(), rep, kdim, n, q)?;
        out.records.push(Record::defect(
            format!("gqg.{tag}.covariance"),
            covariance_defect(&model)?,
            1e-12,
            "S(g⊗k) a = sigma_g(a) S(g⊗k) for every multiplier a",
        ));
        out.records.push(Record::defect(
            format!("gqg.{tag}.adjoint"),
            adjoint_defect(&model)?,
            1e-12,
            "S(g⊗k)* = S(g^-1⊗k)",
        ));
        out.records.push(Record::defect(
            format!("gqg.{tag}.covariant_system"),
            covariant_system_defect(&model)?,
            1e-12,
            "u_g a u_g* = sigma_g(a) and u_g s(xi) u_g* = s(pi_g xi)",
        ));
        out.records.push(Record::defect(
            format!("gqg.{tag}.first_eigenvector"),
            first_eigenvector_defect(&model, 0.7)?,
            1e-10,
            "T_t S(g⊗k) applied to the cyclic vector equals e^(-t) S(g⊗k) applied to it",
        ));
        let (fact, commute) = semigroup_factorization_defect(&action, rep, kdim, 2, q, 0.4)?;
        out.records.push(Record::defect(
            format!("gqg.{tag}.semigroup_factorization"),
            fact,
            1e-10,
            "the conditional expectation of the rotated doubled model equals T_t with cos theta = e^(-t)",
        ));
        out.records.push(Record::defect(
            format!("gqg.{tag}.rotation_commutes"),
            commute,
            1e-10,
            "the rotation of the doubled model commutes with every u_g",
        ));

        let free = CrossedProductModel::new(action.clone(), rep, 1, 3, 0.0)?;
        let coeffs: Vec<Vec<C64>> = (0..6)
            .map(|j| {
                (0..points)
                    .map(|x| {
                        C64::new(
                            1.0 + 0.25 * ((j + 2 * x) % 5) as f64,
                            0.1 * (x as f64 - 1.0),
                        )
                    })
                    .collect()
            })
            .collect();
        let sweep = free_moment_sweep(&free, 6, &coeffs)?;
        out.records.push(Record::defect(
            format!("gqg.{tag}.free_rule"),
            sweep.max_defect,
            1e-10,
            "at q = 0 the A-valued moments count noncrossing pairings with matching group labels",
        ));

        if let Some(g) = (0..order).find(|&g| g != group.identity()) {
            let small = CrossedProductModel::new(action.clone(), rep, 1, 2, q)?;
            let polar = polar_covariance(&small, g, &[1.0])?;
            let worst = polar
                .modulus_negativity
                .max(polar.partial_isometry_excess)
                .max(polar.support_defect)
                .max(polar.relative_orthogonality);
            out.records.push(Record::defect(
                format!("gqg.{tag}.polar_parts"),
                worst,
                1e-10,
                "the polar decomposition of S(g⊗k) has a positive modulus and a partial isometry supported on it",
            ));
            out.records.push(Record::defect(
                format!("gqg.{tag}.polar_covariance"),
                polar.covariance_on_support,
                1e-8,
                "the partial isometry of S(g⊗k) is sigma_g-covariant on its support",
            ));
        }
    }

    if q != 0.0 {
        let model = CrossedProductModel::new(action.clone(), RepChoice::Trivial, kdim, n, q)?;
        let omega = model.cyclic_vector();
        let ks = [k_unit(kdim, 0), k_unit(kdim, kdim.min(2) - 1)];
        let mut violations = 0;
        for g1 in 0..order {
            for g2 in 0..order {
                let v = model.generator_product(&[g1, g2], &ks)?.apply(&omega);
                violations += eigenspace_labels(&model, &v, 1e-12).violations;
            }
        }
        out.records.push(Record::number(
            "gqg.eigenspace_labels",
            Relation::Eq,
            0.0,
            violations as f64,
            0.0,
            "each component of a generator word lies in the eigenspace labelled by its group product modulo [G, G]",
        ));
    }

    let ck = kdim.max(2);
    guard.check("commutator model", guard::model_bytes(points, order, ck, 2))?;
    let model = CrossedProductModel::new(action.clone(), RepChoice::Trivial, ck, 2, q)?;
    let (h1, h2) = (k_unit(ck, 0), k_unit(ck, 1));
    for g1 in 0..order {
        for g2 in 0..order {
            let r = commutator_extraction(&model, g1, g2, &h1, &h2)?;
            out.records.push(Record::text(
                format!("gqg.commutator[{},{}]", group.label(g1), group.label(g2)),
                describe(&r.expected, &group),
                describe(&r.value, &group),
                r.defect,
                1e-10,
                "the degree-zero part of S(g1⊗h1)S(g2⊗h2)S(g1^-1⊗h1)S(g2^-1⊗h2) is q u_[g1,g2] for orthonormal h1, h2",
            ));
        }
    }
    Ok(out)
}

pub fn rigidity(cfg: &RunConfig, guard: &Guard) -> Result<SuiteOutput, CliError> {
    let l = cfg.resolution;
    if l < 4 || !l.is_multiple_of(2) {
        return Err(CliError::Config(format!(
            "resolution {l} must be even and at least 4"
        )));
    }
    if cfg.trials == 0 {
        return Err(CliError::Config("trials must be positive".into()));
    }
    guard.check("grid measures", guard::rigidity_bytes(l))?;
    let mut out = SuiteOutput::default();
    let seed = derive_seed(cfg.seed, "rigidity.adversary");
    out.seeds.insert("rigidity.adversary".into(), seed);

    out.records.push(Record::defect(
        "rigidity.dirac_defect",
        standard_defect(&GridMeasure::dirac(l)),
        0.0,
        "the point mass at the origin is invariant",
    ));
    let adv = zero_mass_adversary(l, cfg.trials, seed)?;
    out.records.push(Record::number(
        "rigidity.adversary_min_defect",
        Relation::Ge,
        0.05,
        adv.min_defect,
        0.0,
        "a probability measure with no mass at the origin has invariance defect at least 1/20",
    ));
    for beta in [1e-3, 1e-2, 0.1, 0.5] {
        let r = tpp_concentration(&far_mass_family(l, beta)?, 0.5)?;
        out.records.push(Record::number(
            format!("rigidity.concentration[beta={beta}]"),
            Relation::Le,
            r.bound_40delta,
            r.l1_distance,
            1e-12,
            "the distance to the point mass at the origin is at most 40 times the invariance defect",
        ));
        out.records.push(Record::number(
            format!("rigidity.decomposition[beta={beta}]"),
            Relation::Eq,
            2.0 * (1.0 - r.beta),
            r.l1_distance,
            1e-12,
            "a measure with origin mass beta lies at distance 2(1 - beta) from the point mass",
        ));
    }
    Ok(out)
}

pub fn gap(cfg: &RunConfig, guard: &Guard) -> Result<(SuiteOutput, Vec<GapRow>), CliError> {
    cfg.check_q()?;
    let cutoff = cfg.cutoff_or(3);
    if cutoff == 0 {
        return Err(CliError::Config("cutoff must be positive".into()));
    }
    let mut sizes = cfg.f_sizes.clone();
    sizes.sort_unstable();
    sizes.dedup();
    if sizes.is_empty() {
        return Err(CliError::Config("the list of |F| values is empty".into()));
    }
    if sizes[0] == 0 {
        return Err(CliError::Config("|F| must be positive".into()));
    }
    for &f in &sizes {
        guard.check("spectral gap form", guard::gap_bytes(f, cutoff))?;
    }
    let mut out = SuiteOutput::default();
    let mut rows = Vec::new();
    for &f in &sizes {
        let r = spectral_gap(f, cfg.q, cutoff)?;
        out.records.push(Record::number(
            format!("gap.lambda_min[|F|={f}]"),
            Relation::Gt,
            0.0,
            r.lambda_min,
            POSITIVITY_TOL,
            "sum over F of |L(x_g) - R(x_g)|^2 is strictly positive on the complement of the vacuum",
        ));
        out.records.push(Record::defect(
            format!("gap.trace[|F|={f}]"),
            r.trace_defect,
            1e-12,
            "x_g = s(a_g)^2 + s(b_g)^2 - 2 is centered",
        ));
        rows.push(GapRow {
            f_size: f,
            lambda_min: r.lambda_min,
        });
    }
    if rows.len() >= 2 {
        let step = rows
            .windows(2)
            .map(|w| w[1].lambda_min - w[0].lambda_min)
            .fold(f64::INFINITY, f64::min);
        out.records.push(Record::number(
            "gap.monotone",
            Relation::Gt,
            0.0,
            step,
            0.0,
            "the smallest eigenvalue strictly increases with |F|",
        ));
    }
    Ok((out, rows))
}

//! Acceptance suite: one test per criterion, exact integer equality
//! throughout, with the stated runtime budgets enforced. Run with
//! `cargo test -p cobord --test acceptance -- --nocapture` to see one
//! pass line per criterion.

use cobord::chern::{self, Sp2RootConfig};
use cobord::coeff::{CoeffGenerator, CoeffPoly};
use cobord::fgl::{log_image_hom, log_images, FGLModel};
use cobord::presentations::{
    bq_relations, chow_specialize, graded_component, kunneth, present, relation_rows,
    series_vector, CoeffDescriptor, GradedPresentation, Group,
};
use cobord::series::{SeriesVar, TruncatedSeries};
use cobord::{cellular, snf};
use num_bigint::BigInt;
use std::collections::BTreeMap;
use std::time::{Duration, Instant};

const DC: u32 = 6;

fn budget(name: &str, t: Instant, limit: Duration) {
    let elapsed = t.elapsed();
    assert!(
        elapsed < limit,
        "{name} exceeded its runtime budget: {elapsed:?} > {limit:?}"
    );
    println!("PASS {name} in {elapsed:?}");
}

#[test]
fn c01_n_series_golden_values() {
    let t = Instant::now();
    let free = FGLModel::universal_free(3, DC).unwrap();
    assert_eq!(
        free.n_series(2).unwrap().to_text(),
        "2*x + a[1,1]*x^2 + 2*a[1,2]*x^3"
    );
    assert_eq!(
        free.n_series(3).unwrap().to_text(),
        "3*x + 3*a[1,1]*x^2 + (a[1,1]^2 + 8*a[1,2])*x^3"
    );
    budget(
        "criterion 1: n-series golden values [2](x), [3](x)",
        t,
        Duration::from_secs(1),
    );
}

#[test]
fn c02_axiom_suite() {
    let t = Instant::now();
    let models = [
        FGLModel::universal_free(6, DC).unwrap(),
        FGLModel::universal_log(6, DC).unwrap(),
        FGLModel::additive(6, DC).unwrap(),
        FGLModel::multiplicative(6, DC).unwrap(),
    ];
    for m in &models {
        let report = m.check_axioms().unwrap();
        assert_eq!(report.residual_degree("left-unit"), None, "{}", m.kind());
        assert_eq!(report.residual_degree("right-unit"), None, "{}", m.kind());
        assert_eq!(
            report.residual_degree("commutativity"),
            None,
            "{}",
            m.kind()
        );
    }
    for m in &models[1..] {
        assert_eq!(
            m.check_axioms().unwrap().residual_degree("associativity"),
            None,
            "{}",
            m.kind()
        );
    }
    // free model: associativity exact through total degree 3 only
    let free = &models[0];
    let assoc_failure = free
        .check_axioms()
        .unwrap()
        .residual_degree("associativity");
    assert_eq!(assoc_failure, Some(4));

    // the degree-3 cross coefficient agrees on both association orders
    let free3 = FGLModel::universal_free(3, DC).unwrap();
    let y = TruncatedSeries::variable(SeriesVar::w1("y"), 3, DC);
    let z = TruncatedSeries::variable(SeriesVar::w1("z"), 3, DC);
    let fyz = free3
        .formal_series()
        .substitute(&[(SeriesVar::w1("x"), y), (SeriesVar::w1("y"), z.clone())])
        .unwrap();
    let lhs = free3
        .formal_series()
        .substitute(&[
            (SeriesVar::w1("x"), free3.formal_series().clone()),
            (SeriesVar::w1("y"), z),
        ])
        .unwrap();
    let rhs = free3
        .formal_series()
        .substitute(&[(SeriesVar::w1("y"), fyz)])
        .unwrap();
    let a11 = CoeffPoly::generator(CoeffGenerator::a(1, 1), DC);
    let a12 = CoeffPoly::generator(CoeffGenerator::a(1, 2), DC);
    let expect = a11.pow(2).add(&a12.scale(&2.into()));
    let key = [("x", 1u32), ("y", 1), ("z", 1)];
    assert_eq!(lhs.coeff_at(&key), expect);
    assert_eq!(rhs.coeff_at(&key), expect);
    budget(
        "criterion 2: axiom suite at D=6 (free associativity exact through degree 3)",
        t,
        Duration::from_secs(30),
    );
}

#[test]
fn c03_inverse_series_contract() {
    let t = Instant::now();
    for m in [
        FGLModel::universal_free(6, DC).unwrap(),
        FGLModel::universal_log(6, DC).unwrap(),
        FGLModel::additive(6, DC).unwrap(),
        FGLModel::multiplicative(6, DC).unwrap(),
    ] {
        let x = TruncatedSeries::variable(SeriesVar::w1("x"), 6, DC);
        let inv = m.inverse_series().unwrap();
        assert!(
            m.formal_sum(&x, &inv).unwrap().is_zero(),
            "F(x, [-1](x)) != 0 for {}",
            m.kind()
        );
    }
    let free3 = FGLModel::universal_free(3, DC).unwrap();
    assert_eq!(
        free3.inverse_series().unwrap().to_text(),
        "-x + a[1,1]*x^2 - a[1,1]^2*x^3"
    );
    budget(
        "criterion 3: inverse-series contract at D=6",
        t,
        Duration::from_secs(1),
    );
}

#[test]
fn c04_one_variable_elimination() {
    let t = Instant::now();
    let log = FGLModel::universal_log(6, DC).unwrap();
    let out = chern::p_series(&log).unwrap();
    assert!(out.residual.is_zero(), "log-model residual must vanish");

    let add = chern::p_series(&FGLModel::additive(6, DC).unwrap()).unwrap();
    assert!(add.series.is_zero());
    assert!(add.residual.is_zero());

    let mult = chern::p_series(&FGLModel::multiplicative(6, DC).unwrap()).unwrap();
    assert!(mult.residual.is_zero());
    assert_eq!(mult.series.to_text(), "-b*u");
    budget(
        "criterion 4: x + [-1](x) = P(x*[-1](x)) at D=6 in the log model",
        t,
        Duration::from_secs(30),
    );
}

#[test]
fn c05_four_root_audit() {
    let t = Instant::now();
    let add = chern::sp2_series(
        &FGLModel::additive(4, DC).unwrap(),
        Sp2RootConfig::DualOfProduct,
    )
    .unwrap();
    assert!(add.residual1.is_zero());
    assert!(add.p1.is_zero());
    assert!(!add.residual3.is_zero(), "d3 must be obstructed additively");

    // evaluation oracle: two root tuples share (d2, d4) yet differ in d3
    let eval = |vals: [i64; 3], s: &TruncatedSeries| -> BigInt {
        let mut map = BTreeMap::new();
        for (name, v) in ["r", "s", "t"].iter().zip(vals) {
            map.insert(name.to_string(), BigInt::from(v));
        }
        s.eval_integers(&map).unwrap()
    };
    for tuple in [[2i64, -1, 0], [1, 1, 0]] {
        assert_eq!(eval(tuple, &add.d[1]), BigInt::from(-3));
        assert_eq!(eval(tuple, &add.d[3]), BigInt::from(0));
    }
    assert_eq!(eval([2, -1, 0], &add.d[2]), BigInt::from(2));
    assert_eq!(eval([1, 1, 0], &add.d[2]), BigInt::from(-2));

    // archive the universal-model residuals without asserting a sign
    let describe = |s: &TruncatedSeries| {
        if s.is_zero() {
            "= 0".to_string()
        } else {
            format!("!= 0 (lowest degree {:?})", s.min_weighted_degree())
        }
    };
    for (label, model) in [
        ("universal-free", FGLModel::universal_free(4, DC).unwrap()),
        ("universal-log", FGLModel::universal_log(4, DC).unwrap()),
    ] {
        match chern::sp2_series(&model, Sp2RootConfig::DualOfProduct) {
            Ok(out) => println!(
                "  archive {label}: residual1 {} | residual3 {}",
                describe(&out.residual1),
                describe(&out.residual3),
            ),
            // without associativity the fourth root need not be symmetric;
            // that failure is itself the archived outcome
            Err(e) => println!("  archive {label}: {e}"),
        }
    }
    budget(
        "criterion 5: four-root audit (additive counterexample reproduced)",
        t,
        Duration::from_secs(60),
    );
}

#[test]
fn c06_bq_chow_images() {
    let t = Instant::now();
    let expected = [
        "x^2",
        "y^2",
        "2*x",
        "2*y",
        "x^2 + 3*x*y + y^2 - 4*z",
        "-8*z",
    ];
    let mut chow_presentations = Vec::new();
    for model in [
        FGLModel::universal_free(4, DC).unwrap(),
        FGLModel::universal_log(4, DC).unwrap(),
    ] {
        let p = chow_specialize(&present(&Group::Q8, &model).unwrap()).unwrap();
        assert_eq!(
            p.relation_texts(),
            expected.to_vec(),
            "chow images over {}",
            model.kind()
        );
        chow_presentations.push(p);
    }
    // modulo the lattice of the first four images, the fifth reduces to
    // x*y - 4*z
    let p = &chow_presentations[0];
    let rows = relation_rows(p, 2, &[0, 1, 2, 3]).unwrap();
    let r5 = series_vector(p, &p.relations()[4], 2).unwrap();
    let gen_vars: Vec<SeriesVar> = p
        .generators()
        .iter()
        .map(|(n, d)| SeriesVar::new(n, *d))
        .collect();
    let x = TruncatedSeries::variable(gen_vars[0].clone(), 4, DC);
    let y = TruncatedSeries::variable(gen_vars[1].clone(), 4, DC);
    let z = TruncatedSeries::variable(gen_vars[2].clone(), 4, DC);
    let target = series_vector(p, &x.mul(&y).sub(&z.scale_int(4)), 2).unwrap();
    let diff: Vec<BigInt> = r5.iter().zip(&target).map(|(a, b)| a - b).collect();
    assert!(snf::row_lattice_contains(&rows, &diff));
    budget(
        "criterion 6: quaternion Chow images at D=4",
        t,
        Duration::from_secs(60),
    );
}

#[test]
fn c07_graded_components() {
    let t = Instant::now();
    let model = FGLModel::universal_free(6, DC).unwrap();
    let q8 = chow_specialize(&present(&Group::Q8, &model).unwrap()).unwrap();
    let expect: [(u32, usize, Vec<i64>); 3] =
        [(1, 0, vec![2, 2]), (2, 0, vec![8]), (3, 0, vec![2, 2])];
    for (d, rank, torsion) in expect {
        let c = graded_component(&q8, d).unwrap();
        assert_eq!(c.rank, rank, "degree {d}");
        let got: Vec<BigInt> = c.torsion;
        let want: Vec<BigInt> = torsion.into_iter().map(BigInt::from).collect();
        assert_eq!(got, want, "degree {d}");
    }
    for n in [2u64, 3, 4, 8] {
        let p = chow_specialize(&present(&Group::CyclicProduct(vec![n]), &model).unwrap()).unwrap();
        for d in 1..=6u32 {
            let c = graded_component(&p, d).unwrap();
            assert_eq!(c.rank, 0, "n {n} degree {d}");
            assert_eq!(c.torsion, vec![BigInt::from(n)], "n {n} degree {d}");
        }
    }
    budget(
        "criterion 7: graded components (quaternion and cyclic)",
        t,
        Duration::from_secs(10),
    );
}

#[test]
fn c08_classical_groups() {
    let t = Instant::now();
    let model = FGLModel::universal_free(6, DC).unwrap();
    for n in 1..=5u32 {
        let p = present(&Group::GL(n), &model).unwrap();
        assert!(p.relations().is_empty());
        let degrees: Vec<u32> = p.generators().iter().map(|(_, d)| *d).collect();
        assert_eq!(degrees, (1..=n).collect::<Vec<_>>());
    }
    for n in 2..=5u32 {
        let p = present(&Group::SL(n), &model).unwrap();
        assert!(p.relations().is_empty());
        let degrees: Vec<u32> = p.generators().iter().map(|(_, d)| *d).collect();
        assert_eq!(degrees, (2..=n).collect::<Vec<_>>());
    }
    for n in [2u32, 4, 6] {
        let p = present(&Group::Sp(n), &model).unwrap();
        assert!(p.relations().is_empty());
        let degrees: Vec<u32> = p.generators().iter().map(|(_, d)| *d).collect();
        assert_eq!(degrees, (1..=n / 2).map(|i| 2 * i).collect::<Vec<_>>());
    }
    for n in 1..=5u32 {
        let chow = chow_specialize(&present(&Group::O(n), &model).unwrap()).unwrap();
        let expect: Vec<String> = (1..=n)
            .filter(|i| i % 2 == 1)
            .map(|i| format!("2*c{i}"))
            .collect();
        assert_eq!(chow.relation_texts(), expect, "O({n})");
    }
    budget(
        "criterion 8: classical-group presentations and orthogonal torsion",
        t,
        Duration::from_secs(30),
    );
}

#[test]
fn c09_kunneth() {
    let t = Instant::now();
    let model = FGLModel::universal_free(6, DC).unwrap();
    let cases: [(&[u64], &[i64]); 4] = [
        (&[2, 2], &[2, 2]),
        (&[2, 3], &[6]),
        (&[2, 3, 4], &[2, 12]),
        (&[2, 4, 8], &[2, 4, 8]),
    ];
    for (orders, chain) in cases {
        let mut k = present(&Group::CyclicProduct(vec![orders[0]]), &model).unwrap();
        for &n in &orders[1..] {
            let next = present(&Group::CyclicProduct(vec![n]), &model).unwrap();
            k = kunneth(&k, &next).unwrap();
        }
        let direct = present(&Group::CyclicProduct(orders.to_vec()), &model).unwrap();
        assert!(
            k.structurally_equal(&direct),
            "tensor vs direct for {orders:?}"
        );
        let c = graded_component(&chow_specialize(&k).unwrap(), 1).unwrap();
        assert_eq!(c.rank, 0);
        let want: Vec<BigInt> = chain.iter().map(|&n| BigInt::from(n)).collect();
        assert_eq!(c.torsion, want, "divisor chain for {orders:?}");
    }
    budget("criterion 9: Kunneth products", t, Duration::from_secs(5));
}

/// Independent q-binomial recursion, coefficientwise.
fn q_binomial(n: u32, k: u32) -> Vec<u64> {
    if k > n {
        return vec![0];
    }
    if k == 0 || k == n {
        return vec![1];
    }
    let a = q_binomial(n - 1, k - 1);
    let b = q_binomial(n - 1, k);
    let mut out = vec![0u64; (k * (n - k)) as usize + 1];
    for (i, v) in a.iter().enumerate() {
        out[i] += v;
    }
    for (i, v) in b.iter().enumerate() {
        out[i + k as usize] += v;
    }
    out
}

#[test]
fn c10_cellular() {
    let t = Instant::now();
    let gr24 = cellular::build_complex(&cellular::Space::Grassmannian(2, 4)).unwrap();
    assert_eq!(gr24.cells.len(), 6);
    assert_eq!(
        cellular::module_presentation(&gr24).ranks,
        vec![1, 1, 2, 1, 1]
    );
    for n in 0..=8u32 {
        for k in 0..=n {
            let c = cellular::build_complex(&cellular::Space::Grassmannian(k, n)).unwrap();
            let mut counts = vec![0u64; (k * (n - k)) as usize + 1];
            for (_, d) in &c.cells {
                counts[*d as usize] += 1;
            }
            assert_eq!(counts, q_binomial(n, k), "gr({k},{n})");
        }
    }
    // projective rank table against the graded monomial count of the
    // truncated polynomial ring
    for n in 1..=6u32 {
        let c = cellular::build_complex(&cellular::Space::Projective(n)).unwrap();
        let ranks = cellular::module_presentation(&c).ranks;
        let x = TruncatedSeries::variable(SeriesVar::w1("x"), n + 2, DC);
        let p = GradedPresentation::new(
            CoeffDescriptor::Integers,
            format!("p({n})"),
            vec![("x".to_string(), 1)],
            vec![x.pow(n + 1)],
        )
        .unwrap();
        for d in 0..=n {
            let comp = graded_component(&p, d).unwrap();
            assert_eq!(comp.rank, ranks[d as usize], "p({n}) degree {d}");
            assert!(comp.torsion.is_empty());
        }
        let beyond = graded_component(&p, n + 1).unwrap();
        assert_eq!((beyond.rank, beyond.torsion.len()), (0, 0));
    }
    budget(
        "criterion 10: cellular rank tables",
        t,
        Duration::from_secs(5),
    );
}

#[test]
fn c11_free_log_coherence() {
    let t = Instant::now();
    let free = FGLModel::universal_free(4, DC).unwrap();
    let log = FGLModel::universal_log(4, DC).unwrap();
    let images = log_images(4, DC).unwrap();
    let hom = log_image_hom(&images, DC);
    for n in -5i64..=5 {
        let via_free = free.n_series(n).unwrap().apply_hom(&hom, true).unwrap();
        let direct = log.n_series(n).unwrap();
        assert_eq!(via_free, direct, "n-series coherence at n = {n}");
    }
    let bq_free = bq_relations(&free).unwrap();
    let bq_log = bq_relations(&log).unwrap();
    for (i, (f, l)) in bq_free
        .relations
        .iter()
        .zip(bq_log.relations.iter())
        .enumerate()
    {
        let mapped = f.apply_hom(&hom, true).unwrap();
        assert_eq!(mapped, *l, "relation {} coherence", i + 1);
    }
    budget(
        "criterion 11: free/log coherence at D=4",
        t,
        Duration::from_secs(120),
    );
}

/// Archive (not a criterion): the two implied quaternion comparisons are
/// computed and reduced against the six-relation lattice, with the outcome
/// recorded but not asserted.
#[test]
fn audit_bq_comparison_relations() {
    let model = FGLModel::additive(4, DC).unwrap();
    let bq = bq_relations(&model).unwrap();
    println!("  archive r5a (additive image): {}", bq.r5a.to_text());
    println!("  archive r5c (additive image): {}", bq.r5c.to_text());
    let p = chow_specialize(&present(&Group::Q8, &model).unwrap()).unwrap();
    for (label, series) in [("r5a", &bq.r5a), ("r5c", &bq.r5c)] {
        let d = series.min_weighted_degree().unwrap_or(0);
        let indices: Vec<usize> = (0..p.relations().len()).collect();
        let rows = relation_rows(&p, d, &indices).unwrap();
        let vec = series_vector(&p, series, d).unwrap();
        let inside = snf::row_lattice_contains(&rows, &vec);
        println!("  archive {label}: degree {d}, image lies in the six-relation lattice: {inside}");
    }
}

mod common;

use std::collections::BTreeMap;
use std::sync::Arc;

use f2factor::apps::{decompose_dnf, decompose_table, minimize_monotone, DataTable, DnfFormula, DnfMode, MergeConstants};
use f2factor::factor::{factor_complete, partition_fd, partition_modfd, Driver, FactorConfig};
use f2factor::poly::format;
use f2factor::precheck::{precheck, Verdict};
use f2factor::{is_equal, parse, IsEqualConfig, PivotRule, Polynomial};
use proptest::prelude::*;
use rand::Rng;

use common::{brute_force_partition, factor_partition, random_poly, random_quad, rng, table};

fn three(seed: u64, n: usize) -> (Polynomial, Polynomial, Polynomial) {
    let mut r = rng(seed);
    let t = table(n);
    (random_poly(&mut r, &t, 12), random_poly(&mut r, &t, 12), random_poly(&mut r, &t, 12))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn addition_is_a_group(seed in any::<u64>(), n in 1usize..12) {
        let (f, g, h) = three(seed, n);
        let zero = Polynomial::zero(f.vars().clone());
        prop_assert_eq!(f.add(&g).unwrap(), g.add(&f).unwrap());
        prop_assert_eq!(f.add(&g).unwrap().add(&h).unwrap(), f.add(&g.add(&h).unwrap()).unwrap());
        prop_assert_eq!(f.add(&zero).unwrap(), f.clone());
        prop_assert!(f.add(&f).unwrap().is_zero());
    }

    #[test]
    fn multiplication_distributes(seed in any::<u64>(), n1 in 1usize..6, n2 in 1usize..6) {
        let mut r = rng(seed);
        let t = table(n1 + n2);
        let left: Vec<usize> = (0..n1).collect();
        let right: Vec<usize> = (n1..n1 + n2).collect();
        let f = common::poly_over(&mut r, &t, &left, 8);
        let g = common::poly_over(&mut r, &t, &right, 8);
        let h = common::poly_over(&mut r, &t, &right, 8);
        let lhs = f.multiply_disjoint(&g.add(&h).unwrap()).unwrap();
        let rhs = f.multiply_disjoint(&g).unwrap().add(&f.multiply_disjoint(&h).unwrap()).unwrap();
        prop_assert_eq!(lhs, rhs);
        prop_assert_eq!(f.multiply(&g).unwrap(), g.multiply(&f).unwrap());
    }

    #[test]
    fn derivative_laws(seed in any::<u64>(), n in 2usize..12) {
        let (f, g, _) = three(seed, n);
        let mut r = rng(seed ^ 1);
        let x = r.gen_range(0..n);
        let y = r.gen_range(0..n);
        let sum = f.add(&g).unwrap().derivative(x).unwrap();
        prop_assert_eq!(sum, f.derivative(x).unwrap().add(&g.derivative(x).unwrap()).unwrap());
        let dxy = f.derivative(x).unwrap().derivative(y).unwrap();
        let dyx = f.derivative(y).unwrap().derivative(x).unwrap();
        prop_assert_eq!(dxy, dyx);
    }

    #[test]
    fn shannon_expansion(seed in any::<u64>(), n in 1usize..12) {
        let (f, _, _) = three(seed, n);
        let x = rng(seed ^ 2).gen_range(0..n);
        let var = Polynomial::variable(f.vars().clone(), x).unwrap();
        let dx = f.derivative(x).unwrap();
        let f0 = f.evaluate(x, false).unwrap();
        prop_assert_eq!(var.multiply_disjoint(&dx).unwrap().add(&f0).unwrap(), f.clone());
        prop_assert_eq!(f.evaluate(x, true).unwrap(), dx.add(&f0).unwrap());
    }

    #[test]
    fn text_round_trip(seed in any::<u64>(), n in 1usize..70) {
        let (f, _, _) = three(seed, n);
        prop_assert_eq!(parse(&format(&f), Some(f.vars().clone())).unwrap(), f);
    }

    #[test]
    fn disjoint_product_counts(seed in any::<u64>(), n1 in 1usize..8, n2 in 1usize..8) {
        let mut r = rng(seed);
        let t = table(n1 + n2);
        let left: Vec<usize> = (0..n1).collect();
        let right: Vec<usize> = (n1..n1 + n2).collect();
        let f = common::poly_over(&mut r, &t, &left, 8);
        let g = common::poly_over(&mut r, &t, &right, 8);
        let p = f.multiply_disjoint(&g).unwrap();
        prop_assert_eq!(p.num_monomials(), f.num_monomials() * g.num_monomials());
        let degrees = |q: &Polynomial| q.monomials().map(|m| m.degree()).sum::<usize>();
        prop_assert_eq!(degrees(&p), degrees(&f) * g.num_monomials() + degrees(&g) * f.num_monomials());
    }

    #[test]
    fn identity_test_matches_multiplication(seed in any::<u64>(), n in 1usize..=12) {
        let q = random_quad(&mut rng(seed), n, 16);
        let want = q.holds_by_multiplication().unwrap();
        for cutoff in [0, 64, 512, 4096] {
            for rule in [PivotRule::BalancedMedian, PivotRule::FirstAvailable] {
                let cfg = IsEqualConfig::default().with_cutoff(cutoff).with_pivot_rule(rule);
                prop_assert_eq!(is_equal(&q, &cfg).unwrap(), want);
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn factorization_matches_brute_force(seed in any::<u64>(), n in 2usize..=8) {
        let mut r = rng(seed);
        let t = table(n);
        let f = if r.gen_bool(0.5) {
            let k = r.gen_range(1..n);
            let left: Vec<usize> = (0..k).collect();
            let right: Vec<usize> = (k..n).collect();
            let g = common::poly_over(&mut r, &t, &left, 5);
            let h = common::poly_over(&mut r, &t, &right, 5);
            g.multiply_disjoint(&h).unwrap()
        } else {
            random_poly(&mut r, &t, 10)
        };
        prop_assume!(!f.is_constant());
        let cfg = FactorConfig::default();
        let fz = factor_complete(&f, Driver::ModFd, &cfg).unwrap();
        prop_assert_eq!(fz.product().unwrap(), f.clone());
        let (_, core) = f.strip_trivial_divisors();
        let want = if core.is_constant() { Vec::new() } else { brute_force_partition(&core) };
        prop_assert_eq!(factor_partition(&fz), want.clone());

        for d in [Driver::Fd, Driver::Gcd] {
            prop_assert_eq!(factor_complete(&f, d, &cfg).unwrap().sorted(), fz.sorted());
        }
        let with_precheck = cfg.clone().with_precheck(true).with_parallel(false);
        prop_assert_eq!(factor_complete(&f, Driver::ModFd, &with_precheck).unwrap().sorted(), fz.sorted());

        if !core.is_constant() {
            let report = precheck(&core).unwrap();
            if report.verdict == Verdict::CertifiedIrreducible {
                prop_assert!(want.len() <= 1);
            }
            for c in &report.cooccurrence_classes {
                prop_assert!(want.iter().any(|w| c.is_subset(w)));
            }
            if core.support().len() >= 2 {
                let x = core.support().first().unwrap();
                let fd = partition_fd(&core, x).unwrap();
                let modfd = partition_modfd(&core, x, &IsEqualConfig::default()).unwrap();
                prop_assert_eq!(fd, modfd);
            }
        }
    }
}

fn random_monotone(seed: u64) -> DnfFormula {
    let mut r = rng(seed);
    let names = ["a", "b", "c", "d", "e", "f"];
    let terms: Vec<String> = (0..r.gen_range(1..6))
        .map(|_| {
            let mut lits: Vec<&str> = names.iter().copied().filter(|_| r.gen_bool(0.4)).collect();
            if lits.is_empty() {
                lits.push(names[r.gen_range(0..names.len())]);
            }
            lits.join("&")
        })
        .collect();
    DnfFormula::parse(&terms.join(" | "), DnfMode::Monotone).unwrap()
}

fn equivalent(f: &DnfFormula, parts: &[DnfFormula]) -> bool {
    let vars: Vec<String> = f.variables().into_iter().collect();
    (0u32..1 << vars.len()).all(|bits| {
        let a: BTreeMap<String, bool> = vars
            .iter()
            .enumerate()
            .map(|(i, v)| (v.clone(), bits >> i & 1 == 1))
            .collect();
        f.eval(&a) == parts.iter().all(|p| p.eval(&a))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn monotone_dnf_properties(seed in any::<u64>()) {
        let f = random_monotone(seed);
        let min = minimize_monotone(&f).unwrap();
        prop_assert_eq!(minimize_monotone(&min).unwrap(), min.clone());
        prop_assert!(equivalent(&f, std::slice::from_ref(&min)));
        let parts = decompose_dnf(&f, &FactorConfig::default()).unwrap();
        prop_assert!(equivalent(&f, &parts));
    }
}

fn rows(seed: u64, attrs: usize, count: usize) -> Vec<Vec<String>> {
    let mut r = rng(seed);
    let mut out: Vec<Vec<String>> = Vec::new();
    while out.len() < count {
        let row: Vec<String> = (0..attrs).map(|_| format!("v{}", r.gen_range(0..4))).collect();
        if !out.contains(&row) {
            out.push(row);
        }
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn table_cross_product_is_recovered(seed in any::<u64>(), k1 in 2usize..5, k2 in 2usize..5) {
        let t1 = rows(seed, 2, k1);
        let t2 = rows(seed ^ 7, 2, k2);
        let attrs: Vec<String> = ["A", "B", "C", "D"].iter().map(|s| s.to_string()).collect();
        let product: Vec<Vec<String>> = t1
            .iter()
            .flat_map(|a| t2.iter().map(move |b| a.iter().chain(b).cloned().collect()))
            .collect();
        let t = DataTable::new(attrs.clone(), product).unwrap();
        for merge in [MergeConstants::Auto, MergeConstants::Separate] {
            let d = decompose_table(&t, merge, &FactorConfig::default()).unwrap();
            prop_assert!(d.tables.len() >= 2 || !d.constant_columns.is_empty());
            prop_assert_eq!(d.reconstruct(&attrs).unwrap().normalized(), t.normalized());
            if merge != MergeConstants::Separate {
                continue;
            }
            for part in &d.tables {
                let left = part.attributes.iter().all(|a| a == "A" || a == "B");
                let right = part.attributes.iter().all(|a| a == "C" || a == "D");
                prop_assert!(left || right);
            }
        }
    }
}

#[test]
fn precheck_classes_are_shared_with_factor() {
    let f = parse("x*u + x*v + y*u + y*v", None).unwrap();
    let fz = factor_complete(&f, Driver::ModFd, &FactorConfig::default().with_precheck(true)).unwrap();
    assert_eq!(fz.factors.len(), 2);
    assert!(Arc::ptr_eq(fz.factors[0].vars(), f.vars()));
}

//! Acceptance suite: one PASS/FAIL line per criterion.

mod common;

use std::collections::BTreeSet;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use f2factor::apps::{decompose_dnf, decompose_table, DataTable, DnfFormula, DnfMode, MergeConstants};
use f2factor::bench::{self, BenchConfig, ANALYTIC_EXPONENT, REFERENCE_DISPARITY};
use f2factor::factor::{factor_complete, Driver, FactorConfig, Factorization};
use f2factor::gen::{generate, GenSpec};
use f2factor::precheck::{precheck, Verdict};
use f2factor::{is_equal, parse, IsEqualConfig, Polynomial, VarSet};
use rand::Rng;

use common::{brute_force_partition, factor_partition, random_quad, rng};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn within(elapsed: Duration, limit_s: f64) -> bool {
    elapsed.as_secs_f64() <= limit_s
}

fn strings(fz: &Factorization) -> BTreeSet<String> {
    fz.factors.iter().map(ToString::to_string).collect()
}

fn set_of(items: &[&str]) -> BTreeSet<String> {
    items.iter().map(|s| s.to_string()).collect()
}

fn table(attrs: &[&str], rows: &[&[&str]]) -> DataTable {
    DataTable::new(
        attrs.iter().map(|s| s.to_string()).collect(),
        rows.iter().map(|r| r.iter().map(|s| s.to_string()).collect()).collect(),
    )
    .unwrap()
}

fn golden() -> Outcome {
    let start = Instant::now();
    let cfg = FactorConfig::default();
    let mut failures = Vec::new();

    let f = parse("x*u + x*v + y*u + y*v", None).unwrap();
    let fz = factor_complete(&f, Driver::ModFd, &cfg).unwrap();
    if strings(&fz) != set_of(&["u + v", "x + y"]) || !fz.trivial.is_empty() {
        failures.push(format!("monotone example gave {:?}", strings(&fz)));
    }

    let f = parse(
        "x*y_neg*u*v_neg + x*y_neg*u_neg*v + x_neg*y*u*v_neg + x_neg*y*u_neg*v",
        None,
    )
    .unwrap();
    let fz = factor_complete(&f, Driver::ModFd, &cfg).unwrap();
    let want = [
        parse("x*y_neg + x_neg*y", Some(f.vars().clone())).unwrap(),
        parse("u*v_neg + u_neg*v", Some(f.vars().clone())).unwrap(),
    ];
    let got: BTreeSet<String> = fz.factors.iter().map(ToString::to_string).collect();
    let expected: BTreeSet<String> = want.iter().map(ToString::to_string).collect();
    if got != expected {
        failures.push(format!("full DNF polynomial gave {got:?}"));
    }
    let full = DnfFormula::parse(
        "x&!y&u&!v | x&!y&!u&v | !x&y&u&!v | !x&y&!u&v",
        DnfMode::FullDnf,
    )
    .unwrap();
    let parts: BTreeSet<String> = decompose_dnf(&full, &cfg)
        .unwrap()
        .iter()
        .map(ToString::to_string)
        .collect();
    if parts != set_of(&["!u&v | u&!v", "!x&y | x&!y"]) {
        failures.push(format!("full DNF components {parts:?}"));
    }

    let source = table(
        &["B", "E", "D", "A", "C"],
        &[
            &["z", "q", "u", "x", "y"],
            &["y", "q", "u", "x", "y"],
            &["y", "r", "v", "x", "z"],
            &["z", "r", "v", "x", "z"],
            &["y", "p", "u", "x", "x"],
            &["z", "p", "u", "x", "x"],
        ],
    );
    let d = decompose_table(&source, MergeConstants::Auto, &cfg).unwrap();
    let got: Vec<DataTable> = d.tables.iter().map(DataTable::normalized).collect();
    let want = vec![
        table(&["A", "B"], &[&["x", "y"], &["x", "z"]]),
        table(&["C", "D", "E"], &[&["x", "u", "p"], &["y", "u", "q"], &["z", "v", "r"]]),
    ];
    if got != want || !d.constant_columns.is_empty() {
        failures.push("table decomposition differs".to_string());
    }

    let elapsed = start.elapsed();
    let pass = failures.is_empty() && within(elapsed, 1.0);
    let detail = if failures.is_empty() {
        format!("3 examples exact in {:.3} s", elapsed.as_secs_f64())
    } else {
        failures.join("; ")
    };
    outcome(pass, detail)
}

fn identity_oracle() -> Outcome {
    let start = Instant::now();
    let cfg = IsEqualConfig::default();
    let mut r = rng(2);
    let (mut mismatches, mut holding) = (0, 0);
    let total = 10_000;
    for _ in 0..total {
        let n = r.gen_range(1..=12);
        let q = random_quad(&mut r, n, 16);
        let want = q.holds_by_multiplication().unwrap();
        holding += want as usize;
        if is_equal(&q, &cfg).unwrap() != want {
            mismatches += 1;
        }
    }
    let elapsed = start.elapsed();
    outcome(
        mismatches == 0 && within(elapsed, 60.0),
        format!(
            "{total} quads ({holding} identities), {mismatches} mismatches, {:.1} s",
            elapsed.as_secs_f64()
        ),
    )
}

fn small_corpus() -> Vec<GenSpec> {
    let mut r = rng(3);
    (0..1000u64)
        .map(|seed| loop {
            let spec = if seed % 3 == 0 {
                let n1 = r.gen_range(2..=5);
                let n2 = r.gen_range(2..=(10 - n1).min(5));
                let m1 = r.gen_range(2..=(1usize << n1).min(6));
                let m2 = r.gen_range(2..=(1usize << n2).min(6));
                GenSpec::planted(n1, m1, n2, m2, seed)
            } else {
                let n = r.gen_range(2..=10);
                let m = r.gen_range(1..=(1usize << n).min(24));
                GenSpec::random(n, m, seed)
            };
            if generate(&spec).is_ok() {
                break spec;
            }
        })
        .collect()
}

fn factor_oracle() -> Outcome {
    let start = Instant::now();
    let cfg = FactorConfig::default();
    let (mut mismatches, mut factorable) = (0, 0);
    let corpus = small_corpus();
    for spec in &corpus {
        let g = generate(spec).unwrap();
        if g.poly.is_constant() {
            continue;
        }
        let fz = factor_complete(&g.poly, Driver::ModFd, &cfg).unwrap();
        let (_, core) = g.poly.strip_trivial_divisors();
        let want = if core.is_constant() {
            Vec::new()
        } else {
            brute_force_partition(&core)
        };
        factorable += (want.len() > 1) as usize;
        let got = factor_partition(&fz);
        if got != want || (got.len() <= 1) != (want.len() <= 1) {
            mismatches += 1;
        }
    }
    let elapsed = start.elapsed();
    outcome(
        mismatches == 0 && within(elapsed, 120.0),
        format!(
            "{} polynomials ({factorable} factorable cores), {mismatches} mismatches, {:.1} s",
            corpus.len(),
            elapsed.as_secs_f64()
        ),
    )
}

fn planted_corpus(count: u64) -> Vec<GenSpec> {
    let mut r = rng(4);
    (0..count)
        .map(|seed| loop {
            let n1 = r.gen_range(2..=30);
            let n2 = r.gen_range(2..=30);
            let m1 = r.gen_range(2..=20usize.min(1 << n1));
            let m2 = r.gen_range(2..=(400 / m1).min(1 << n2));
            let spec = GenSpec::planted(n1, m1, n2, m2, 1000 + seed);
            if generate(&spec).is_ok() {
                break spec;
            }
        })
        .collect()
}

/// Every emitted polynomial stays on one planted side.
fn respects(fz: &Factorization, sides: &[VarSet; 2]) -> bool {
    fz.iter().all(|p| sides.iter().any(|s| p.support().is_subset(s)))
}

fn reconstruction() -> Outcome {
    let start = Instant::now();
    let cfg = FactorConfig::default();
    let corpus = planted_corpus(500);
    let (mut failures, mut exact) = (0, 0);
    for spec in &corpus {
        let g = generate(spec).unwrap();
        let truth = g.planted.as_ref().unwrap();
        let fz = factor_complete(&g.poly, Driver::ModFd, &cfg).unwrap();
        let sides = truth.partition();
        let product_ok = fz.product().is_ok_and(|p| p == g.poly);
        if !product_ok || !respects(&fz, &sides) {
            failures += 1;
        }
        if fz.trivial.is_empty() && factor_partition(&fz) == common::sorted_sets(sides.to_vec()) {
            exact += 1;
        }
    }
    let elapsed = start.elapsed();
    outcome(
        failures == 0 && within(elapsed, 120.0),
        format!(
            "{} planted products (n <= 60, M <= 400), {failures} failures, \
             {exact} with exactly two factors, {:.1} s",
            corpus.len(),
            elapsed.as_secs_f64()
        ),
    )
}

fn full_corpus() -> Vec<GenSpec> {
    let mut specs = small_corpus();
    specs.truncate(300);
    specs.extend(planted_corpus(100));
    let mut r = rng(5);
    specs.extend((0..100u64).map(|seed| {
        let n = r.gen_range(10..=40);
        GenSpec::random(n, r.gen_range(2..=60), 5000 + seed)
    }));
    specs
}

fn driver_agreement() -> Outcome {
    let cfg = FactorConfig::default();
    let corpus = full_corpus();
    let mut disagreements = 0;
    for spec in &corpus {
        let g = generate(spec).unwrap();
        if g.poly.is_constant() {
            continue;
        }
        let sets: Vec<Vec<Polynomial>> = [Driver::Fd, Driver::ModFd, Driver::Gcd]
            .iter()
            .map(|&d| factor_complete(&g.poly, d, &cfg).unwrap().sorted())
            .collect();
        if sets[0] != sets[1] || sets[1] != sets[2] {
            disagreements += 1;
        }
    }
    outcome(
        disagreements == 0,
        format!("{} instances, fd/modfd/gcd disagree on {disagreements}", corpus.len()),
    )
}

fn precheck_soundness() -> Outcome {
    let cfg = FactorConfig::default();
    let mut specs = planted_corpus(300);
    specs.extend(small_corpus().into_iter().filter(|s| s.planted.is_some()));
    let (mut false_certs, mut bad_classes, mut checked) = (0, 0, 0);
    for spec in &specs {
        let g = generate(spec).unwrap();
        let (_, core) = g.poly.strip_trivial_divisors();
        if core.is_constant() {
            continue;
        }
        checked += 1;
        let truth = if core.support().len() <= 12 {
            brute_force_partition(&core)
        } else {
            factor_partition(&factor_complete(&core, Driver::ModFd, &cfg).unwrap())
        };
        let report = precheck(&core).unwrap();
        if truth.len() > 1 && report.verdict == Verdict::CertifiedIrreducible {
            false_certs += 1;
        }
        let refines = report
            .cooccurrence_classes
            .iter()
            .all(|c| truth.iter().any(|t| c.is_subset(t)));
        if !refines {
            bad_classes += 1;
        }
    }
    outcome(
        false_certs == 0 && bad_classes == 0,
        format!(
            "{checked} planted cores, {false_certs} false irreducibility certificates, \
             {bad_classes} non-refining class sets"
        ),
    )
}

fn scale_smoke() -> Outcome {
    let spec = GenSpec::planted(500, 100, 500, 100, 7);
    let g = generate(&spec).unwrap();
    let truth = g.planted.as_ref().unwrap();
    let start = Instant::now();
    let fz = factor_complete(&g.poly, Driver::ModFd, &FactorConfig::default());
    let elapsed = start.elapsed();
    let correct = fz.as_ref().is_ok_and(|fz| {
        fz.trivial.is_empty()
            && factor_partition(fz) == common::sorted_sets(truth.partition().to_vec())
            && fz.product().is_ok_and(|p| p == g.poly)
    });
    outcome(
        correct && within(elapsed, 60.0),
        format!(
            "n = {}, M = {}, |F| = {}, correct = {correct}, {:.2} s on {} thread(s)",
            g.poly.support().len(),
            g.poly.num_monomials(),
            g.poly.length(),
            elapsed.as_secs_f64(),
            rayon::current_num_threads()
        ),
    )
}

fn disparity() -> Outcome {
    let corpus: Vec<GenSpec> = (0..2).map(|s| GenSpec::planted(50, 100, 50, 100, 80 + s)).collect();
    let cfg = BenchConfig {
        drivers: vec![Driver::ModFd],
        ..BenchConfig::default()
    };
    let results = bench::bench(&corpus, &cfg);
    match bench::disparity(&results) {
        Some(d) => outcome(
            d.ratio >= 2.0,
            format!(
                "same-factor mean {:.2e} s, cross-factor mean {:.2e} s, ratio {:.1}x \
                 ({} slower; reference {REFERENCE_DISPARITY})",
                d.same_factor_mean_s, d.cross_factor_mean_s, d.ratio, d.slower
            ),
        ),
        None => outcome(false, "no classification timings collected"),
    }
}

fn cutoff_invariance() -> Outcome {
    let mut corpus: Vec<GenSpec> = small_corpus()
        .into_iter()
        .filter(|s| !generate(s).unwrap().poly.is_constant())
        .take(200)
        .collect();
    corpus.extend(planted_corpus(100));
    let sweep = bench::cutoff_sweep(&corpus, &[0, 64, 512, 4096], &FactorConfig::default());
    let ok = sweep.iter().all(|p| p.identical);
    let deltas: Vec<String> = sweep
        .iter()
        .map(|p| format!("{}: {:.3} s ({:+.1}%)", p.cutoff, p.total_time_s, 100.0 * p.time_delta))
        .collect();
    outcome(
        ok,
        format!("{} instances identical = {ok}; {}", corpus.len(), deltas.join(", ")),
    )
}

fn asymptotics() -> Outcome {
    let ladder: Vec<GenSpec> = [(8, 8), (16, 8), (16, 16), (32, 16), (32, 32), (64, 32)]
        .iter()
        .map(|&(m1, m2)| GenSpec::planted(40, m1, 40, m2, 10))
        .collect();
    let cfg = FactorConfig::default().with_parallel(false);
    match bench::scaling(&ladder, &cfg) {
        Ok(r) => outcome(
            true,
            format!(
                "log-log slope {:.3} beside analytic exponent {ANALYTIC_EXPONENT} over |F| = {:?}",
                r.slope,
                r.points.iter().map(|p| p.0).collect::<Vec<_>>()
            ),
        ),
        Err(e) => outcome(false, format!("scaling failed: {e}")),
    }
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("golden examples", golden),
        ("identity test oracle", identity_oracle),
        ("factorization oracle", factor_oracle),
        ("planted reconstruction", reconstruction),
        ("driver agreement", driver_agreement),
        ("precheck soundness", precheck_soundness),
        ("scale smoke", scale_smoke),
        ("classification disparity", disparity),
        ("cutoff invariance", cutoff_invariance),
        ("asymptotic report", asymptotics),
    ];
    let mut all = true;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let o = run();
        all &= o.pass;
        println!(
            "criterion {:>2} {}: {name}: {}",
            i + 1,
            if o.pass { "PASS" } else { "FAIL" },
            o.detail
        );
    }
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

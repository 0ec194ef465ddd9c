//! Complete factorization drivers.
//!
//! All drivers first split off trivial divisors (`x`, `x + 1`). The FD and
//! ModFD drivers then repeatedly partition the variables of the remaining
//! core around a pivot `x`: with `A = ∂F/∂x` and `B = F|x=0`, a variable
//! `y` lies in a different factor than `x` iff `∂(A·B)/∂y = 0`. FD forms the
//! product explicitly; ModFD decides `A·∂B/∂y = B·∂A/∂y` with
//! [`is_equal`](crate::identity::is_equal). The GCD driver peels off
//! `F / gcd(F|x=0, ∂F/∂x)`.

use std::sync::Arc;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::identity::{is_equal_budgeted, is_equal_rec, IsEqualConfig};
use crate::poly::{Polynomial, PolynomialJson, VarSet};
use crate::precheck;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Driver {
    Fd,
    #[default]
    ModFd,
    Gcd,
}

impl Driver {
    pub fn name(self) -> &'static str {
        match self {
            Driver::Fd => "fd",
            Driver::ModFd => "modfd",
            Driver::Gcd => "gcd",
        }
    }
}

impl std::str::FromStr for Driver {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fd" => Ok(Driver::Fd),
            "modfd" => Ok(Driver::ModFd),
            "gcd" => Ok(Driver::Gcd),
            _ => Err(Error::data(format!("unknown driver `{s}`"))),
        }
    }
}

/// Which variable of the current core serves as the partition pivot.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum PivotVar {
    #[default]
    Lowest,
    Highest,
}

#[derive(Clone, Debug)]
pub struct FactorConfig {
    pub identity: IsEqualConfig,
    /// Run the necessary-condition checks and classify whole co-occurrence
    /// classes by one representative.
    pub precheck: bool,
    /// Classify variables on the rayon pool.
    pub parallel: bool,
    pub pivot: PivotVar,
    /// Inputs with more monomials than this skip the multiply-back check.
    pub verify_limit: usize,
}

impl Default for FactorConfig {
    fn default() -> Self {
        FactorConfig {
            identity: IsEqualConfig::default(),
            precheck: false,
            parallel: true,
            pivot: PivotVar::Lowest,
            verify_limit: 1 << 22,
        }
    }
}

impl FactorConfig {
    pub fn with_identity(mut self, identity: IsEqualConfig) -> Self {
        self.identity = identity;
        self
    }

    pub fn with_precheck(mut self, on: bool) -> Self {
        self.precheck = on;
        self
    }

    pub fn with_parallel(mut self, on: bool) -> Self {
        self.parallel = on;
        self
    }
}

/// Split of `Var(F)` around a pivot. An empty `sigma_other` means `F` has
/// no factor avoiding the pivot, i.e. it is irreducible.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VariablePartition {
    pub pivot: usize,
    pub sigma_same: VarSet,
    pub sigma_other: VarSet,
}

impl VariablePartition {
    pub fn is_irreducible(&self) -> bool {
        self.sigma_other.is_empty()
    }
}

/// Irreducible factors over pairwise disjoint variable sets.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Factorization {
    /// Degree-one factors `x` and `x + 1`.
    pub trivial: Vec<Polynomial>,
    pub factors: Vec<Polynomial>,
}

impl Factorization {
    pub fn len(&self) -> usize {
        self.trivial.len() + self.factors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// At least two non-constant factors.
    pub fn is_factorable(&self) -> bool {
        self.len() >= 2
    }

    pub fn iter(&self) -> impl Iterator<Item = &Polynomial> {
        self.trivial.iter().chain(&self.factors)
    }

    /// All factors in a canonical order, for order-insensitive comparison.
    pub fn sorted(&self) -> Vec<Polynomial> {
        let mut all: Vec<Polynomial> = self.iter().cloned().collect();
        all.sort();
        all
    }

    /// Variable sets of all factors, sorted by smallest variable.
    pub fn var_partition(&self) -> Vec<VarSet> {
        let mut sets: Vec<VarSet> = self.iter().map(Polynomial::support).collect();
        sets.sort_by_key(|s| s.first());
        sets
    }

    /// Product of all factors.
    pub fn product(&self) -> Result<Polynomial> {
        let mut it = self.iter();
        let Some(first) = it.next() else {
            return Err(Error::pre("empty factorization"));
        };
        it.try_fold(first.clone(), |acc, f| acc.multiply_disjoint(f))
    }

    pub fn to_json(&self) -> FactorizationJson {
        FactorizationJson {
            trivial: self.trivial.iter().map(PolynomialJson::from).collect(),
            factors: self.factors.iter().map(PolynomialJson::from).collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FactorizationJson {
    pub trivial: Vec<PolynomialJson>,
    pub factors: Vec<PolynomialJson>,
}

fn check_partition_input(f: &Polynomial, x: usize) -> Result<()> {
    f.vars().check(x)?;
    let support = f.support();
    if support.len() < 2 {
        return Err(Error::pre("partition needs at least two variables"));
    }
    if !support.contains(x) {
        return Err(Error::pre(format!(
            "pivot `{}` does not occur in the polynomial",
            f.vars().name(x)
        )));
    }
    if !f.strip_trivial_divisors().0.is_empty() {
        return Err(Error::pre("polynomial has trivial divisors"));
    }
    Ok(())
}

/// Partition by forming `G = F|x=0 · ∂F/∂x` and testing each `∂G/∂y`.
pub fn partition_fd(f: &Polynomial, x: usize) -> Result<VariablePartition> {
    check_partition_input(f, x)?;
    Ok(fd_unchecked(f, x))
}

fn fd_unchecked(f: &Polynomial, x: usize) -> VariablePartition {
    let g = f.eval0(x).multiply(&f.d(x)).expect("same table");
    let n = f.vars().len();
    let mut same = VarSet::from_indices(n, [x]);
    let mut other = VarSet::empty(n);
    for y in f.support().iter().filter(|&y| y != x) {
        if g.derivative_is_zero(y) {
            other.insert(y);
        } else {
            same.insert(y);
        }
    }
    VariablePartition {
        pivot: x,
        sigma_same: same,
        sigma_other: other,
    }
}

/// Partition without forming the product, deciding each variable with the
/// recursive identity test.
pub fn partition_modfd(f: &Polynomial, x: usize, cfg: &IsEqualConfig) -> Result<VariablePartition> {
    check_partition_input(f, x)?;
    Ok(modfd_unchecked(f, x, cfg, None, true).0)
}

/// Time spent deciding one variable.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Classification {
    pub var: usize,
    pub same_factor: bool,
    pub elapsed: Duration,
}

/// [`partition_modfd`] that also records how long each variable took.
/// Runs sequentially so the timings are not skewed by contention.
pub fn partition_modfd_timed(
    f: &Polynomial,
    x: usize,
    cfg: &IsEqualConfig,
) -> Result<(VariablePartition, Vec<Classification>)> {
    check_partition_input(f, x)?;
    let a = f.d(x);
    let b = f.eval0(x);
    let n = f.vars().len();
    let mut same = VarSet::from_indices(n, [x]);
    let mut other = VarSet::empty(n);
    let mut times = Vec::new();
    for y in f.support().iter().filter(|&y| y != x) {
        let start = Instant::now();
        let eq = classify_other(&a, &b, y, cfg);
        let elapsed = start.elapsed();
        if eq {
            other.insert(y);
        } else {
            same.insert(y);
        }
        times.push(Classification {
            var: y,
            same_factor: !eq,
            elapsed,
        });
    }
    let part = VariablePartition {
        pivot: x,
        sigma_same: same,
        sigma_other: other,
    };
    Ok((part, times))
}

/// True when `y` is in a different factor than the pivot, i.e.
/// `A·∂B/∂y = B·∂A/∂y`.
fn classify_other(a: &Polynomial, b: &Polynomial, y: usize, cfg: &IsEqualConfig) -> bool {
    let d = b.d(y);
    let c = a.d(y);
    is_equal_rec([a, &d, b, &c], cfg, 1)
}

/// Call budgets tried before the exact test.
const BUDGETS: [u64; 3] = [1 << 10, 1 << 14, 1 << 18];

/// [`classify_other`] under an optional call budget; `None` when undecided.
fn classify_budgeted(
    a: &Polynomial,
    b: &Polynomial,
    y: usize,
    cfg: &IsEqualConfig,
    budget: Option<u64>,
) -> Option<bool> {
    match budget {
        Some(calls) => {
            let d = b.d(y);
            let c = a.d(y);
            is_equal_budgeted([a, &d, b, &c], cfg, calls)
        }
        None => Some(classify_other(a, b, y, cfg)),
    }
}

/// Whether `f` is the product of its projections onto `s` and `o`.
///
/// When it is, the factor through any variable of `s` lies inside `s`, so
/// every variable of `o` belongs to a different factor.
fn splits_as(f: &Polynomial, s: &VarSet, o: &VarSet) -> bool {
    let (g, h) = (f.projection(s), f.projection(o));
    g.num_monomials() * h.num_monomials() == f.num_monomials()
        && g.multiply_disjoint(&h).is_ok_and(|p| p == *f)
}

/// `classes`: groups known to share a factor; only one member per group is
/// tested. Variables are first tested under growing call budgets: a refuted
/// identity is exact, and the undecided rest is settled at once when `f`
/// splits accordingly.
fn modfd_unchecked(
    f: &Polynomial,
    x: usize,
    cfg: &IsEqualConfig,
    classes: Option<&[VarSet]>,
    parallel: bool,
) -> (VariablePartition, usize) {
    let a = f.d(x);
    let b = f.eval0(x);
    let n = f.vars().len();
    let groups: Vec<VarSet> = match classes {
        Some(cs) => cs.to_vec(),
        None => f
            .support()
            .iter()
            .map(|y| VarSet::from_indices(n, [y]))
            .collect(),
    };
    let (pivot_group, rest): (Vec<VarSet>, Vec<VarSet>) =
        groups.into_iter().partition(|g| g.contains(x));
    let mut same = VarSet::from_indices(n, [x]);
    for g in &pivot_group {
        same = same.union(g);
    }
    let mut other = VarSet::empty(n);
    let mut pending: Vec<&VarSet> = rest.iter().collect();
    for budget in BUDGETS.iter().map(Some).chain([None]) {
        let verdicts: Vec<Option<bool>> = if parallel {
            pending
                .par_iter()
                .map(|g| classify_budgeted(&a, &b, g.first().unwrap(), cfg, budget.copied()))
                .collect()
        } else {
            pending
                .iter()
                .map(|g| classify_budgeted(&a, &b, g.first().unwrap(), cfg, budget.copied()))
                .collect()
        };
        let mut unknown = Vec::new();
        for (g, v) in pending.iter().zip(verdicts) {
            match v {
                Some(true) => other = other.union(g),
                Some(false) => same = same.union(g),
                None => unknown.push(*g),
            }
        }
        pending = unknown;
        if pending.is_empty() {
            break;
        }
        let rest = pending.iter().fold(other.clone(), |acc, g| acc.union(g));
        if splits_as(f, &same, &rest) {
            other = rest;
            break;
        }
    }
    let part = VariablePartition {
        pivot: x,
        sigma_same: same,
        sigma_other: other,
    };
    (part, rest.len())
}

fn pick_pivot(core: &Polynomial, rule: PivotVar) -> usize {
    let s = core.support();
    match rule {
        PivotVar::Lowest => s.first(),
        PivotVar::Highest => s.iter().last(),
    }
    .expect("non-constant core")
}

/// Factors `f` completely into irreducibles.
pub fn factor_complete(f: &Polynomial, driver: Driver, cfg: &FactorConfig) -> Result<Factorization> {
    if f.is_constant() {
        return Err(Error::pre("cannot factor a constant polynomial"));
    }
    let (trivial, core) = f.strip_trivial_divisors();
    let factors = if core.is_constant() {
        Vec::new()
    } else {
        match driver {
            Driver::Fd | Driver::ModFd => partition_loop(core, driver, cfg)?,
            Driver::Gcd => factor_gcd_unchecked(core, &|p, q| gcd_multilinear_with(p, q, cfg), cfg)?,
        }
    };
    let out = Factorization { trivial, factors };
    if f.num_monomials() <= cfg.verify_limit {
        verify(f, &out)?;
    }
    Ok(out)
}

fn verify(f: &Polynomial, fz: &Factorization) -> Result<()> {
    let expected: usize = fz.iter().map(Polynomial::num_monomials).product();
    if expected != f.num_monomials() || fz.product()? != *f {
        return Err(Error::defect("product of factors differs from the input"));
    }
    Ok(())
}

fn partition_loop(mut core: Polynomial, driver: Driver, cfg: &FactorConfig) -> Result<Vec<Polynomial>> {
    let mut factors = Vec::new();
    while !core.is_constant() {
        let classes = if cfg.precheck {
            let report = precheck::precheck(&core)?;
            if report.verdict == precheck::Verdict::CertifiedIrreducible {
                break;
            }
            Some(report.cooccurrence_classes)
        } else {
            None
        };
        let x = pick_pivot(&core, cfg.pivot);
        let part = match driver {
            Driver::Fd => fd_unchecked(&core, x),
            _ => modfd_unchecked(&core, x, &cfg.identity, classes.as_deref(), cfg.parallel).0,
        };
        if part.is_irreducible() {
            break;
        }
        factors.push(core.projection(&part.sigma_same));
        core = core.projection(&part.sigma_other);
    }
    if !core.is_constant() {
        factors.push(core);
    }
    Ok(factors)
}

/// The GCD driver on a core without trivial divisors: while
/// `G = gcd(F|x=0, ∂F/∂x) ≠ 1`, emit `F / G` and continue with `G`.
///
/// `F / G` is the projection onto `Var(F) \ Var(G)`, checked by
/// multiplication.
pub fn factor_gcd<G>(f: &Polynomial, gcd_fn: G) -> Result<Vec<Polynomial>>
where
    G: Fn(&Polynomial, &Polynomial) -> Result<Polynomial>,
{
    if f.support().len() < 2 {
        return Err(Error::pre("GCD driver needs at least two variables"));
    }
    if !f.strip_trivial_divisors().0.is_empty() {
        return Err(Error::pre("polynomial has trivial divisors"));
    }
    factor_gcd_unchecked(f.clone(), &gcd_fn, &FactorConfig::default())
}

fn factor_gcd_unchecked(
    mut f: Polynomial,
    gcd_fn: &dyn Fn(&Polynomial, &Polynomial) -> Result<Polynomial>,
    cfg: &FactorConfig,
) -> Result<Vec<Polynomial>> {
    let mut out = Vec::new();
    loop {
        let x = pick_pivot(&f, cfg.pivot);
        let g = gcd_fn(&f.eval0(x), &f.d(x))?;
        if g.is_one() {
            out.push(f);
            return Ok(out);
        }
        let quotient = f.projection(&f.support().difference(&g.support()));
        if !matches!(quotient.multiply_disjoint(&g), Ok(ref back) if *back == f) {
            return Err(Error::defect("gcd procedure returned a non-divisor"));
        }
        out.push(quotient);
        f = g;
    }
}

/// Greatest common divisor of multilinear polynomials, from their complete
/// factorizations: the product of the irreducible factors they share.
pub fn gcd_multilinear(p: &Polynomial, q: &Polynomial) -> Result<Polynomial> {
    gcd_multilinear_with(p, q, &FactorConfig::default())
}

fn gcd_multilinear_with(p: &Polynomial, q: &Polynomial, cfg: &FactorConfig) -> Result<Polynomial> {
    if p.is_zero() || q.is_zero() {
        return Err(Error::pre("gcd of the zero polynomial"));
    }
    let one = Polynomial::one(Arc::clone(p.vars()));
    if p.is_one() || q.is_one() {
        return Ok(one);
    }
    let fp = factor_complete(p, Driver::ModFd, cfg)?;
    let fq = factor_complete(q, Driver::ModFd, cfg)?;
    let theirs = fq.sorted();
    fp.sorted()
        .into_iter()
        .filter(|x| theirs.binary_search(x).is_ok())
        .try_fold(one, |acc, x| acc.multiply_disjoint(&x))
}

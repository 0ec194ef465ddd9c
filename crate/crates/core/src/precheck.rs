//! Cheap necessary conditions for factorability.
//!
//! For `F` without trivial divisors and `M` monomials, a factorable `F`
//! satisfies `gcd(μx, M) > 1` for every variable, where `μx` is the number
//! of monomials containing `x`. Two variables that never occur together in
//! a monomial always belong to the same factor.

use petgraph::unionfind::UnionFind;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::poly::{iter_bits, Polynomial, VarSet};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    CertifiedIrreducible,
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PrecheckReport {
    pub monomial_count: usize,
    /// `(variable, μ)` for every variable of `F`, ascending by index.
    pub mu: Vec<(usize, usize)>,
    pub gcd_condition_holds: bool,
    pub cooccurrence_classes: Vec<VarSet>,
    pub verdict: Verdict,
}

fn gcd(mut a: usize, mut b: usize) -> usize {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Checks `∀x: gcd(μx, M) > 1`. A `false` result certifies irreducibility.
pub fn gcd_condition(f: &Polynomial) -> Result<(bool, Vec<(usize, usize)>)> {
    if f.is_constant() {
        return Err(Error::pre("precheck of a constant polynomial"));
    }
    let m = f.num_monomials();
    let mu: Vec<(usize, usize)> = f
        .var_counts()
        .into_iter()
        .enumerate()
        .filter(|&(_, c)| c > 0)
        .collect();
    let holds = mu.iter().all(|&(_, c)| gcd(c, m) > 1);
    Ok((holds, mu))
}

/// Groups variables that must share a factor: the transitive closure of
/// "never occur in a common monomial". Classes are ordered by their
/// smallest variable.
pub fn cooccurrence_classes(f: &Polynomial) -> Vec<VarSet> {
    let n = f.vars().len();
    let support = f.support();
    let words = support.words().len();
    let mut seen_with = vec![0u64; n * words];
    for m in f.masks() {
        for i in iter_bits(m) {
            for (acc, w) in seen_with[i * words..(i + 1) * words].iter_mut().zip(m) {
                *acc |= w;
            }
        }
    }
    let mut uf = UnionFind::<usize>::new(n);
    let sw = support.words();
    for x in support.iter() {
        let row = &seen_with[x * words..(x + 1) * words];
        let never: Vec<u64> = sw.iter().zip(row).map(|(s, r)| s & !r).collect();
        for y in iter_bits(&never) {
            if y > x {
                uf.union(x, y);
            }
        }
    }
    let mut classes: Vec<VarSet> = Vec::new();
    let mut slot_of_root = vec![usize::MAX; n];
    for x in support.iter() {
        let r = uf.find(x);
        if slot_of_root[r] == usize::MAX {
            slot_of_root[r] = classes.len();
            classes.push(VarSet::empty(n));
        }
        classes[slot_of_root[r]].insert(x);
    }
    classes
}

/// Runs both conditions on a polynomial without trivial divisors.
pub fn precheck(f: &Polynomial) -> Result<PrecheckReport> {
    let (holds, mu) = gcd_condition(f)?;
    let classes = cooccurrence_classes(f);
    let verdict = if !holds || classes.len() == 1 {
        Verdict::CertifiedIrreducible
    } else {
        Verdict::Inconclusive
    };
    Ok(PrecheckReport {
        monomial_count: f.num_monomials(),
        mu,
        gcd_condition_holds: holds,
        cooccurrence_classes: classes,
        verdict,
    })
}

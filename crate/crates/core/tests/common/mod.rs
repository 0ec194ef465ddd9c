#![allow(dead_code)]

use std::collections::BTreeSet;
use std::sync::Arc;

use f2factor::gen::var_table;
use f2factor::{Factorization, Polynomial, Quad, VarSet, VarTable};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn table(n: usize) -> Arc<VarTable> {
    var_table(n)
}

/// Up to `m` random monomials over `vars`, each variable present with
/// probability one half.
pub fn poly_over(rng: &mut ChaCha8Rng, t: &Arc<VarTable>, vars: &[usize], m: usize) -> Polynomial {
    let monos: Vec<Vec<usize>> = (0..m)
        .map(|_| vars.iter().copied().filter(|_| rng.gen_bool(0.5)).collect())
        .collect();
    // Repeated draws cancel in pairs.
    Polynomial::from_monomials(Arc::clone(t), monos).unwrap()
}

pub fn random_poly(rng: &mut ChaCha8Rng, t: &Arc<VarTable>, max_m: usize) -> Polynomial {
    let vars: Vec<usize> = (0..t.len()).collect();
    let m = rng.gen_range(0..=max_m);
    poly_over(rng, t, &vars, m)
}

/// A random quad over at most `n` variables; half the time it is built as a
/// true identity `A = PQ, D = RS, B = PR, C = QS` with `P, S` over one half
/// of the variables and `Q, R` over the other, optionally perturbed.
pub fn random_quad(rng: &mut ChaCha8Rng, n: usize, max_m: usize) -> Quad {
    let t = table(n);
    if rng.gen_bool(0.5) {
        let a = random_poly(rng, &t, max_m);
        let d = random_poly(rng, &t, max_m);
        let b = random_poly(rng, &t, max_m);
        let c = random_poly(rng, &t, max_m);
        return Quad::new(a, d, b, c);
    }
    let mut all: Vec<usize> = (0..n).collect();
    all.shuffle(rng);
    let (x, y) = all.split_at(n / 2);
    let small = (max_m / 4).max(1);
    let mut part = |vs: &[usize]| {
        let m = rng.gen_range(1..=small);
        poly_over(rng, &t, vs, m)
    };
    let (p, s, q, r) = (part(x), part(x), part(y), part(y));
    let mul = |f: &Polynomial, g: &Polynomial| f.multiply_disjoint(g).unwrap();
    let mut params = [mul(&p, &q), mul(&r, &s), mul(&p, &r), mul(&q, &s)];
    if rng.gen_bool(0.3) {
        let k = rng.gen_range(0..4);
        let extra = poly_over(rng, &t, &all, 1);
        params[k] = params[k].add(&extra).unwrap();
    }
    let [a, d, b, c] = params;
    Quad::new(a, d, b, c)
}

pub fn sorted_sets(mut v: Vec<VarSet>) -> Vec<VarSet> {
    v.sort();
    v
}

/// Supports of the non-trivial factors.
pub fn factor_partition(fz: &Factorization) -> Vec<VarSet> {
    sorted_sets(fz.factors.iter().map(Polynomial::support).collect())
}

/// Finest variable partition of a core without trivial divisors, by testing
/// every bipartition with projection and multiplication.
pub fn brute_force_partition(f: &Polynomial) -> Vec<VarSet> {
    let support: Vec<usize> = f.support().iter().collect();
    let k = support.len();
    let n = f.vars().len();
    let mut cuts: Vec<VarSet> = Vec::new();
    for mask in 1u64..(1 << (k - 1)) {
        // The last variable always stays on the complement side.
        let s = VarSet::from_indices(n, (0..k - 1).filter(|i| mask >> i & 1 == 1).map(|i| support[i]));
        let o = f.support().difference(&s);
        let (g, h) = (f.projection(&s), f.projection(&o));
        if g.multiply_disjoint(&h).is_ok_and(|p| p == *f) {
            cuts.push(s);
        }
    }
    // Two variables share a factor iff no valid cut separates them.
    let mut classes: Vec<BTreeSet<usize>> = Vec::new();
    for &v in &support {
        let home = classes.iter_mut().find(|c| {
            let u = *c.iter().next().unwrap();
            cuts.iter().all(|s| s.contains(u) == s.contains(v))
        });
        match home {
            Some(c) => {
                c.insert(v);
            }
            None => classes.push(BTreeSet::from([v])),
        }
    }
    sorted_sets(classes.into_iter().map(|c| VarSet::from_indices(n, c)).collect())
}

//! Deterministic random instances.
//!
//! Monomials are drawn with every variable included independently with
//! probability `p`. Duplicates are rejected, trivial divisors are stripped
//! and the set is topped up until it has exactly `M` monomials again.
//!
//! The generator is `ChaCha8Rng` seeded through `SeedableRng::seed_from_u64`
//! (rand_chacha 0.3 / rand 0.8); inclusion uses `Rng::gen_bool(p)` once per
//! variable in index order.

use std::collections::HashSet;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::poly::{Polynomial, PolynomialJson, VarSet, VarTable};
use crate::precheck::{precheck, Verdict};

pub const RNG_ALGORITHM: &str = "ChaCha8Rng(seed_from_u64), rand_chacha 0.3";

const MAX_ROUNDS: usize = 10_000;
const IRREDUCIBLE_TRIES: usize = 64;

fn default_p() -> f64 {
    0.5
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Planted {
    pub n1: usize,
    pub m1: usize,
    pub n2: usize,
    pub m2: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenSpec {
    pub n: usize,
    #[serde(rename = "M", alias = "m")]
    pub m: usize,
    #[serde(default = "default_p")]
    pub p: f64,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub planted: Option<Planted>,
}

impl GenSpec {
    pub fn random(n: usize, m: usize, seed: u64) -> Self {
        GenSpec {
            n,
            m,
            p: 0.5,
            seed,
            planted: None,
        }
    }

    pub fn planted(n1: usize, m1: usize, n2: usize, m2: usize, seed: u64) -> Self {
        GenSpec {
            n: n1 + n2,
            m: m1 * m2,
            p: 0.5,
            seed,
            planted: Some(Planted { n1, m1, n2, m2 }),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.p > 0.0 && self.p < 1.0) {
            return Err(Error::data(format!("inclusion probability {} not in (0, 1)", self.p)));
        }
        if let Some(pl) = &self.planted {
            if pl.n1 + pl.n2 != self.n || pl.m1 * pl.m2 != self.m {
                return Err(Error::data("planted sizes inconsistent with n and M"));
            }
            if pl.m1 < 2 || pl.m2 < 2 {
                return Err(Error::data("planted components need at least two monomials"));
            }
            check_feasible(pl.n1, pl.m1)?;
            check_feasible(pl.n2, pl.m2)?;
        } else {
            check_feasible(self.n, self.m)?;
        }
        Ok(())
    }

    pub fn describe(&self) -> String {
        match &self.planted {
            Some(p) => format!(
                "planted({},{})x({},{}) p={} seed={}",
                p.n1, p.m1, p.n2, p.m2, self.p, self.seed
            ),
            None => format!("random n={} M={} p={} seed={}", self.n, self.m, self.p, self.seed),
        }
    }
}

fn check_feasible(n: usize, m: usize) -> Result<()> {
    if m == 0 {
        return Err(Error::data("M must be positive"));
    }
    if n < 64 && (m as u128) > (1u128 << n) {
        return Err(Error::data(format!("{m} distinct monomials impossible over {n} variables")));
    }
    Ok(())
}

/// Ground truth of a planted product `F = G·H`.
#[derive(Clone, Debug)]
pub struct PlantedTruth {
    pub left: Polynomial,
    pub right: Polynomial,
    /// Both components were certified irreducible by the precheck.
    pub certified_irreducible: bool,
}

impl PlantedTruth {
    pub fn partition(&self) -> [VarSet; 2] {
        [self.left.support(), self.right.support()]
    }
}

#[derive(Clone, Debug)]
pub struct Generated {
    pub poly: Polynomial,
    pub planted: Option<PlantedTruth>,
}

/// File format of generated instances.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GeneratedJson {
    pub generator: GenSpec,
    pub rng: String,
    pub polynomial: PolynomialJson,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub planted: Option<[PolynomialJson; 2]>,
}

impl Generated {
    pub fn to_json(&self, spec: &GenSpec) -> GeneratedJson {
        GeneratedJson {
            generator: spec.clone(),
            rng: RNG_ALGORITHM.to_string(),
            polynomial: PolynomialJson::from(&self.poly),
            planted: self
                .planted
                .as_ref()
                .map(|t| [PolynomialJson::from(&t.left), PolynomialJson::from(&t.right)]),
        }
    }
}

pub fn var_table(n: usize) -> Arc<VarTable> {
    let width = n.saturating_sub(1).to_string().len();
    Arc::new(VarTable::with_order((0..n).map(|i| format!("x{i:0width$}"))).expect("distinct names"))
}

/// Builds the instance described by `spec`.
pub fn generate(spec: &GenSpec) -> Result<Generated> {
    spec.validate()?;
    let vars = var_table(spec.n);
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    match spec.planted {
        None => {
            let poly = component(&mut rng, &vars, 0..spec.n, spec.m, spec.p)?;
            Ok(Generated { poly, planted: None })
        }
        Some(pl) => {
            let (left, ok_l) = irreducible_component(&mut rng, &vars, 0..pl.n1, pl.m1, spec.p)?;
            let (right, ok_r) =
                irreducible_component(&mut rng, &vars, pl.n1..spec.n, pl.m2, spec.p)?;
            let poly = left.multiply_disjoint(&right)?;
            Ok(Generated {
                poly,
                planted: Some(PlantedTruth {
                    left,
                    right,
                    certified_irreducible: ok_l && ok_r,
                }),
            })
        }
    }
}

fn irreducible_component(
    rng: &mut ChaCha8Rng,
    vars: &Arc<VarTable>,
    range: std::ops::Range<usize>,
    m: usize,
    p: f64,
) -> Result<(Polynomial, bool)> {
    let mut last = None;
    for _ in 0..IRREDUCIBLE_TRIES {
        let c = component(rng, vars, range.clone(), m, p)?;
        if c.is_constant() {
            continue;
        }
        if precheck(&c)?.verdict == Verdict::CertifiedIrreducible {
            return Ok((c, true));
        }
        last = Some(c);
    }
    last.map(|c| (c, false))
        .ok_or_else(|| Error::data("could not generate a non-constant component"))
}

fn component(
    rng: &mut ChaCha8Rng,
    vars: &Arc<VarTable>,
    range: std::ops::Range<usize>,
    m: usize,
    p: f64,
) -> Result<Polynomial> {
    let stride = vars.words();
    let mut masks: HashSet<Vec<u64>> = HashSet::with_capacity(m);
    // Insertion order keeps the draw sequence reproducible.
    let mut order: Vec<Vec<u64>> = Vec::with_capacity(m);
    for _ in 0..MAX_ROUNDS {
        while order.len() < m {
            let mut mask = vec![0u64; stride];
            for i in range.clone() {
                if rng.gen_bool(p) {
                    mask[i / 64] |= 1 << (i % 64);
                }
            }
            if masks.insert(mask.clone()) {
                order.push(mask);
            }
        }
        let poly = Polynomial::from_raw(Arc::clone(vars), order.concat(), false);
        let (trivial, core) = poly.strip_trivial_divisors();
        if trivial.is_empty() {
            return Ok(poly);
        }
        order = core.masks().map(<[u64]>::to_vec).collect();
        masks = order.iter().cloned().collect();
    }
    Err(Error::data(format!(
        "could not reach {m} monomials without trivial divisors over {} variables",
        range.len()
    )))
}

//! AND-decomposition of Boolean formulas in disjunctive normal form.
//!
//! A monotone DNF maps to the polynomial with one monomial per term. A full
//! DNF maps each negative literal `!x` to its own variable `x_neg`. Factors
//! of the polynomial map back to the conjunctive components.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::factor::{factor_complete, Driver, FactorConfig};
use crate::poly::{Polynomial, VarTable};

const NEG_SUFFIX: &str = "_neg";

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum DnfMode {
    Monotone,
    FullDnf,
}

impl std::str::FromStr for DnfMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "monotone" => Ok(DnfMode::Monotone),
            "full" | "full_dnf" => Ok(DnfMode::FullDnf),
            _ => Err(Error::data(format!("unknown DNF mode `{s}`"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Literal {
    pub name: String,
    pub positive: bool,
}

pub type Term = BTreeSet<Literal>;

/// A disjunction of conjunctive terms.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DnfFormula {
    pub terms: BTreeSet<Term>,
    pub mode: DnfMode,
}

fn is_ident(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

impl DnfFormula {
    /// Parses `x&u | x&v | !y&u`. Validates the mode's invariants.
    pub fn parse(text: &str, mode: DnfMode) -> Result<Self> {
        let mut terms = BTreeSet::new();
        let mut offset = 0;
        for raw_term in text.split('|') {
            let mut term = Term::new();
            for raw_lit in raw_term.split('&') {
                let lit = raw_lit.trim();
                let (positive, name) = match lit.strip_prefix('!') {
                    Some(rest) => (false, rest.trim()),
                    None => (true, lit),
                };
                if !is_ident(name) {
                    return Err(Error::Syntax {
                        pos: offset,
                        msg: format!("bad literal `{lit}`"),
                    });
                }
                term.insert(Literal {
                    name: name.to_string(),
                    positive,
                });
            }
            offset += raw_term.len() + 1;
            terms.insert(term);
        }
        let f = DnfFormula { terms, mode };
        f.validate()?;
        Ok(f)
    }

    pub fn validate(&self) -> Result<()> {
        if self.terms.is_empty() {
            return Err(Error::data("formula has no terms"));
        }
        match self.mode {
            DnfMode::Monotone => {
                if self.terms.iter().flatten().any(|l| !l.positive) {
                    return Err(Error::data("negative literal in monotone mode"));
                }
            }
            DnfMode::FullDnf => {
                let vars = self.variables();
                for name in &vars {
                    if name.ends_with(NEG_SUFFIX) {
                        return Err(Error::data(format!(
                            "variable `{name}` clashes with the `{NEG_SUFFIX}` encoding"
                        )));
                    }
                }
                for t in &self.terms {
                    let names: Vec<&str> = t.iter().map(|l| l.name.as_str()).collect();
                    let distinct: BTreeSet<&str> = names.iter().copied().collect();
                    if names.len() != distinct.len() || distinct.len() != vars.len() {
                        return Err(Error::data(
                            "full DNF terms must mention every variable exactly once",
                        ));
                    }
                }
            }
        }
        Ok(())
    }

    /// Underlying Boolean variables.
    pub fn variables(&self) -> BTreeSet<String> {
        self.terms.iter().flatten().map(|l| l.name.clone()).collect()
    }

    /// Truth value under `assignment` (missing variables read as false).
    pub fn eval(&self, assignment: &BTreeMap<String, bool>) -> bool {
        self.terms.iter().any(|t| {
            t.iter()
                .all(|l| assignment.get(&l.name).copied().unwrap_or(false) == l.positive)
        })
    }
}

impl fmt::Display for DnfFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, t) in self.terms.iter().enumerate() {
            if i > 0 {
                f.write_str(" | ")?;
            }
            for (j, l) in t.iter().enumerate() {
                if j > 0 {
                    f.write_str("&")?;
                }
                if !l.positive {
                    f.write_str("!")?;
                }
                f.write_str(&l.name)?;
            }
        }
        Ok(())
    }
}

/// Drops every term that strictly contains another term.
pub fn minimize_monotone(f: &DnfFormula) -> Result<DnfFormula> {
    if f.mode != DnfMode::Monotone {
        return Err(Error::pre("absorption applies to monotone formulas"));
    }
    let terms = f
        .terms
        .iter()
        .filter(|t| !f.terms.iter().any(|s| s != *t && s.is_subset(t)))
        .cloned()
        .collect();
    Ok(DnfFormula {
        terms,
        mode: DnfMode::Monotone,
    })
}

fn literal_var(l: &Literal) -> String {
    if l.positive {
        l.name.clone()
    } else {
        format!("{}{NEG_SUFFIX}", l.name)
    }
}

/// One monomial per term; negative literals become `x_neg` variables.
///
/// A monotone formula must be absorption-free unless `minimize` is set.
pub fn dnf_to_polynomial(f: &DnfFormula, minimize: bool) -> Result<Polynomial> {
    f.validate()?;
    let f = match (f.mode, minimize) {
        (DnfMode::Monotone, true) => minimize_monotone(f)?,
        (DnfMode::Monotone, false) => {
            if minimize_monotone(f)?.terms.len() != f.terms.len() {
                return Err(Error::pre("monotone formula has absorbable terms; minimize first"));
            }
            f.clone()
        }
        (DnfMode::FullDnf, _) => f.clone(),
    };
    let names: BTreeSet<String> = f.terms.iter().flatten().map(literal_var).collect();
    let vars = Arc::new(VarTable::new(names)?);
    let monomials: Vec<Vec<usize>> = f
        .terms
        .iter()
        .map(|t| t.iter().map(|l| vars.lookup(&literal_var(l)).unwrap()).collect())
        .collect();
    Polynomial::from_monomials(vars, monomials)
}

fn decode_var(name: &str, mode: DnfMode) -> Literal {
    match (mode, name.strip_suffix(NEG_SUFFIX)) {
        (DnfMode::FullDnf, Some(base)) => Literal {
            name: base.to_string(),
            positive: false,
        },
        _ => Literal {
            name: name.to_string(),
            positive: true,
        },
    }
}

fn polynomial_to_dnf(p: &Polynomial, mode: DnfMode) -> Result<DnfFormula> {
    let vars = p.vars();
    let mut terms = BTreeSet::new();
    for m in p.monomial_indices() {
        if m.is_empty() {
            return Err(Error::defect("constant monomial has no DNF term"));
        }
        terms.insert(m.iter().map(|&i| decode_var(vars.name(i), mode)).collect());
    }
    Ok(DnfFormula { terms, mode })
}

/// Conjunctive components of `f` over disjoint variables, one per factor.
pub fn decompose_dnf(f: &DnfFormula, cfg: &FactorConfig) -> Result<Vec<DnfFormula>> {
    let poly = dnf_to_polynomial(f, true)?;
    if poly.is_one() {
        return Ok(vec![f.clone()]);
    }
    let fz = factor_complete(&poly, Driver::ModFd, cfg)?;
    fz.iter().map(|p| polynomial_to_dnf(p, f.mode)).collect()
}

//! Text and JSON forms of polynomials.
//!
//! Text grammar: monomials joined by `+`, each monomial either `1` or
//! identifiers joined by `*`. Whitespace is ignored. `0` denotes the zero
//! polynomial.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::polynomial::Polynomial;
use super::vars::{iter_bits, VarTable};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
enum Factor<'a> {
    One,
    Zero,
    Ident(&'a str),
}

struct Lexer<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn skip_ws(&mut self) {
        while let Some(c) = self.src[self.pos..].chars().next() {
            if c.is_whitespace() {
                self.pos += c.len_utf8();
            } else {
                break;
            }
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.src[self.pos..].chars().next()
    }

    fn err(&self, msg: impl Into<String>) -> Error {
        Error::Syntax {
            pos: self.pos,
            msg: msg.into(),
        }
    }

    fn factor(&mut self) -> Result<Factor<'a>> {
        match self.peek() {
            Some(c) if c.is_ascii_alphabetic() || c == '_' => {
                let start = self.pos;
                let len = self.src[start..]
                    .find(|c: char| !(c.is_ascii_alphanumeric() || c == '_'))
                    .unwrap_or(self.src.len() - start);
                self.pos += len;
                Ok(Factor::Ident(&self.src[start..start + len]))
            }
            Some('1') => {
                self.pos += 1;
                self.no_trailing_digit()?;
                Ok(Factor::One)
            }
            Some('0') => {
                self.pos += 1;
                self.no_trailing_digit()?;
                Ok(Factor::Zero)
            }
            Some(c) => Err(self.err(format!("unexpected `{c}`"))),
            None => Err(self.err("unexpected end of input")),
        }
    }

    fn no_trailing_digit(&self) -> Result<()> {
        match self.src[self.pos..].chars().next() {
            Some(c) if c.is_ascii_alphanumeric() || c == '_' => {
                Err(self.err("only the constants 0 and 1 are allowed"))
            }
            _ => Ok(()),
        }
    }
}

/// Parses a polynomial. When `vars` is given every identifier must belong to
/// it; otherwise a table of the encountered identifiers is built, sorted
/// alphabetically.
pub fn parse(text: &str, vars: Option<Arc<VarTable>>) -> Result<Polynomial> {
    let mut lx = Lexer { src: text, pos: 0 };
    // Each term: None for a zero term, otherwise its identifiers.
    let mut terms: Vec<Option<Vec<&str>>> = Vec::new();
    loop {
        let mut term = Some(Vec::new());
        loop {
            match lx.factor()? {
                Factor::One => {}
                Factor::Zero => term = None,
                Factor::Ident(name) => {
                    if let Some(t) = term.as_mut() {
                        t.push(name);
                    }
                }
            }
            if lx.peek() == Some('*') {
                lx.pos += 1;
            } else {
                break;
            }
        }
        terms.push(term);
        match lx.peek() {
            Some('+') => lx.pos += 1,
            None => break,
            Some(c) => return Err(lx.err(format!("expected `+` or `*`, found `{c}`"))),
        }
    }

    let vars = match vars {
        Some(v) => v,
        None => {
            let names: BTreeSet<&str> = terms.iter().flatten().flatten().copied().collect();
            Arc::new(VarTable::with_order(names)?)
        }
    };
    let mut monomials = Vec::with_capacity(terms.len());
    for term in terms.into_iter().flatten() {
        let mut idx = Vec::with_capacity(term.len());
        for name in term {
            idx.push(vars.lookup(name)?);
        }
        monomials.push(idx);
    }
    Polynomial::from_monomials(vars, monomials)
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        for (k, m) in self.masks().enumerate() {
            if k > 0 {
                f.write_str(" + ")?;
            }
            let mut first = true;
            for i in iter_bits(m) {
                if !first {
                    f.write_str("*")?;
                }
                first = false;
                f.write_str(self.vars().name(i))?;
            }
            if first {
                f.write_str("1")?;
            }
        }
        Ok(())
    }
}

/// Canonical text form; inverse of [`parse`] on canonical polynomials.
pub fn format(f: &Polynomial) -> String {
    f.to_string()
}

/// Machine-readable form: `{"vars": [...], "monomials": [[indices...], ...]}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PolynomialJson {
    pub vars: Vec<String>,
    pub monomials: Vec<Vec<usize>>,
}

impl From<&Polynomial> for PolynomialJson {
    fn from(f: &Polynomial) -> Self {
        PolynomialJson {
            vars: f.vars().names().to_vec(),
            monomials: f.monomial_indices(),
        }
    }
}

impl PolynomialJson {
    /// Keeps the listed variable order as the table order.
    pub fn to_polynomial(&self) -> Result<Polynomial> {
        let vars = Arc::new(VarTable::with_order(self.vars.iter().cloned())?);
        for m in &self.monomials {
            if m.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::data("monomial indices must be strictly ascending"));
            }
        }
        Polynomial::from_monomials(vars, self.monomials.iter().cloned())
    }
}

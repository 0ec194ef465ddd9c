use std::cmp::Ordering;
use std::fmt;
use std::sync::Arc;

use super::product::Product;
use super::vars::{iter_bits, VarSet, VarTable};
use crate::error::{Error, Result};

/// A single multilinear monomial: bit `i` set means variable `i` occurs.
///
/// The all-zero mask is the constant monomial `1`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct Monomial {
    mask: Vec<u64>,
}

impl Monomial {
    pub fn one(n: usize) -> Self {
        Monomial {
            mask: vec![0; super::vars::words_for(n)],
        }
    }

    pub fn from_indices<I: IntoIterator<Item = usize>>(n: usize, it: I) -> Self {
        let mut m = Self::one(n);
        for i in it {
            m.mask[i / 64] |= 1 << (i % 64);
        }
        m
    }

    pub fn from_mask(mask: &[u64]) -> Self {
        Monomial { mask: mask.to_vec() }
    }

    pub fn mask(&self) -> &[u64] {
        &self.mask
    }

    pub fn contains(&self, i: usize) -> bool {
        has_bit(&self.mask, i)
    }

    pub fn vars(&self) -> impl Iterator<Item = usize> + '_ {
        iter_bits(&self.mask)
    }

    pub fn degree(&self) -> usize {
        popcount(&self.mask)
    }
}

#[inline]
pub(crate) fn has_bit(mask: &[u64], i: usize) -> bool {
    mask[i / 64] & (1 << (i % 64)) != 0
}

#[inline]
pub(crate) fn popcount(mask: &[u64]) -> usize {
    mask.iter().map(|w| w.count_ones() as usize).sum()
}

/// Length contribution of one monomial; the constant monomial counts 1.
#[inline]
pub(crate) fn mono_len(mask: &[u64]) -> usize {
    popcount(mask).max(1)
}

/// Sorts `stride`-word chunks and collapses runs of equal chunks. With
/// `mod2` a run survives iff its length is odd, otherwise one copy is kept.
pub(crate) fn canonicalize(stride: usize, data: Vec<u64>, mod2: bool) -> Vec<u64> {
    let count = data.len() / stride;
    if count <= 1 {
        return data;
    }
    let mut order: Vec<&[u64]> = data.chunks_exact(stride).collect();
    order.sort_unstable();
    let mut out = Vec::with_capacity(data.len());
    let mut i = 0;
    while i < order.len() {
        let mut j = i + 1;
        while j < order.len() && order[j] == order[i] {
            j += 1;
        }
        if !mod2 || (j - i) % 2 == 1 {
            out.extend_from_slice(order[i]);
        }
        i = j;
    }
    out
}

/// Merges two canonical sequences, dropping chunks present in both.
pub(crate) fn symmetric_merge(stride: usize, a: &[u64], b: &[u64]) -> Vec<u64> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let mut ia = a.chunks_exact(stride).peekable();
    let mut ib = b.chunks_exact(stride).peekable();
    loop {
        match (ia.peek(), ib.peek()) {
            (Some(x), Some(y)) => match x.cmp(y) {
                Ordering::Less => out.extend_from_slice(ia.next().unwrap()),
                Ordering::Greater => out.extend_from_slice(ib.next().unwrap()),
                Ordering::Equal => {
                    ia.next();
                    ib.next();
                }
            },
            (Some(_), None) => out.extend_from_slice(ia.next().unwrap()),
            (None, Some(_)) => out.extend_from_slice(ib.next().unwrap()),
            (None, None) => break,
        }
    }
    out
}

/// A multilinear polynomial over GF(2) in canonical form: a strictly
/// ascending sequence of monomial bitsets over a shared [`VarTable`].
///
/// Monomials are ordered by comparing their mask words as unsigned integers,
/// lowest word first. Canonical form makes structural equality coincide with
/// polynomial equality.
#[derive(Clone)]
pub struct Polynomial {
    vars: Arc<VarTable>,
    stride: usize,
    data: Vec<u64>,
}

impl Polynomial {
    pub fn zero(vars: Arc<VarTable>) -> Self {
        let stride = vars.words();
        Polynomial {
            vars,
            stride,
            data: Vec::new(),
        }
    }

    pub fn one(vars: Arc<VarTable>) -> Self {
        let stride = vars.words();
        Polynomial {
            vars,
            stride,
            data: vec![0; stride],
        }
    }

    /// The polynomial consisting of the single variable `i`.
    pub fn variable(vars: Arc<VarTable>, i: usize) -> Result<Self> {
        vars.check(i)?;
        let n = vars.len();
        Ok(Self::from_canonical(
            vars,
            Monomial::from_indices(n, [i]).mask,
        ))
    }

    /// Builds a polynomial from monomials given as variable-index lists.
    /// Repeated monomials cancel in pairs.
    pub fn from_monomials<I, M>(vars: Arc<VarTable>, monomials: I) -> Result<Self>
    where
        I: IntoIterator<Item = M>,
        M: IntoIterator<Item = usize>,
    {
        let stride = vars.words();
        let mut data = Vec::new();
        for m in monomials {
            let start = data.len();
            data.resize(start + stride, 0);
            for i in m {
                vars.check(i)?;
                data[start + i / 64] |= 1 << (i % 64);
            }
        }
        Ok(Self::from_raw(vars, data, true))
    }

    /// Builds a polynomial from raw masks (any order). `mod2` selects
    /// cancellation of duplicates versus set collapse.
    pub(crate) fn from_raw(vars: Arc<VarTable>, data: Vec<u64>, mod2: bool) -> Self {
        let stride = vars.words();
        debug_assert_eq!(data.len() % stride, 0);
        let data = canonicalize(stride, data, mod2);
        Polynomial { vars, stride, data }
    }

    /// Wraps data that is already strictly ascending.
    pub(crate) fn from_canonical(vars: Arc<VarTable>, data: Vec<u64>) -> Self {
        let stride = vars.words();
        let p = Polynomial { vars, stride, data };
        debug_assert!(p.is_canonical());
        p
    }

    pub(crate) fn with_data(&self, data: Vec<u64>) -> Self {
        let p = Polynomial {
            vars: Arc::clone(&self.vars),
            stride: self.stride,
            data,
        };
        debug_assert!(p.is_canonical());
        p
    }

    pub fn vars(&self) -> &Arc<VarTable> {
        &self.vars
    }

    pub(crate) fn stride(&self) -> usize {
        self.stride
    }

    pub(crate) fn raw_data(&self) -> &[u64] {
        &self.data
    }

    pub fn is_zero(&self) -> bool {
        self.data.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.data.len() == self.stride && self.data.iter().all(|&w| w == 0)
    }

    pub fn is_constant(&self) -> bool {
        self.is_zero() || self.is_one()
    }

    /// Number of monomials.
    pub fn num_monomials(&self) -> usize {
        self.data.len() / self.stride
    }

    pub fn masks(&self) -> impl ExactSizeIterator<Item = &[u64]> + '_ {
        self.data.chunks_exact(self.stride)
    }

    pub fn monomials(&self) -> impl ExactSizeIterator<Item = Monomial> + '_ {
        self.masks().map(Monomial::from_mask)
    }

    /// Monomials as ascending variable-index lists.
    pub fn monomial_indices(&self) -> Vec<Vec<usize>> {
        self.masks().map(|m| iter_bits(m).collect()).collect()
    }

    /// Symbol length: the sum of monomial lengths, where the constant
    /// monomial counts one.
    pub fn length(&self) -> usize {
        self.masks().map(mono_len).sum()
    }

    /// Variables occurring in at least one monomial.
    pub fn support(&self) -> VarSet {
        let mut acc = vec![0u64; self.stride];
        for m in self.masks() {
            for (a, w) in acc.iter_mut().zip(m) {
                *a |= w;
            }
        }
        VarSet::from_words(acc)
    }

    /// Variables occurring in every monomial (empty for the zero polynomial).
    pub fn common_vars(&self) -> VarSet {
        if self.is_zero() {
            return VarSet::from_words(vec![0; self.stride]);
        }
        let mut acc = vec![!0u64; self.stride];
        for m in self.masks() {
            for (a, w) in acc.iter_mut().zip(m) {
                *a &= w;
            }
        }
        VarSet::from_words(acc)
    }

    /// Per-variable monomial counts (`mu` in the precheck).
    pub fn var_counts(&self) -> Vec<usize> {
        let mut counts = vec![0usize; self.vars.len()];
        for m in self.masks() {
            for i in iter_bits(m) {
                counts[i] += 1;
            }
        }
        counts
    }

    fn check_same_table(&self, other: &Polynomial) -> Result<()> {
        if Arc::ptr_eq(&self.vars, &other.vars) || self.vars == other.vars {
            Ok(())
        } else {
            Err(Error::VarTableMismatch)
        }
    }

    pub fn add(&self, other: &Polynomial) -> Result<Polynomial> {
        self.check_same_table(other)?;
        Ok(self.with_data(symmetric_merge(self.stride, &self.data, &other.data)))
    }

    /// Full product. Shared variables produce squares, so the result is a
    /// [`Product`] rather than a multilinear polynomial.
    pub fn multiply(&self, other: &Polynomial) -> Result<Product> {
        self.check_same_table(other)?;
        Ok(Product::of(self, other))
    }

    /// Product of polynomials over disjoint variable sets, which is again
    /// multilinear with exactly `M_F * M_G` monomials.
    pub fn multiply_disjoint(&self, other: &Polynomial) -> Result<Polynomial> {
        self.check_same_table(other)?;
        if !self.support().is_disjoint(&other.support()) {
            return Err(Error::pre("factors share variables"));
        }
        let s = self.stride;
        let mut data = Vec::with_capacity(self.data.len() * other.num_monomials());
        for a in self.masks() {
            for b in other.masks() {
                data.extend(a.iter().zip(b).map(|(x, y)| x | y));
            }
        }
        Ok(Polynomial::from_raw(Arc::clone(&self.vars), data, true)).inspect(|p| {
            debug_assert_eq!(p.data.len() / s, self.num_monomials() * other.num_monomials());
        })
    }

    /// Formal derivative: monomials containing `x`, with `x` removed.
    pub fn derivative(&self, x: usize) -> Result<Polynomial> {
        self.vars.check(x)?;
        Ok(self.d(x))
    }

    /// Substitution `x := a`.
    pub fn evaluate(&self, x: usize, a: bool) -> Result<Polynomial> {
        self.vars.check(x)?;
        Ok(if a { self.eval1(x) } else { self.eval0(x) })
    }

    /// `z | F`: `z` occurs in every monomial.
    pub fn divides_var(&self, z: usize) -> Result<bool> {
        self.vars.check(z)?;
        if self.is_zero() {
            return Err(Error::pre("divisibility of the zero polynomial"));
        }
        Ok(self.masks().all(|m| has_bit(m, z)))
    }

    /// Projection onto `sigma`: each monomial restricted to `sigma`, with
    /// duplicates collapsed to one occurrence (set semantics, no cancellation).
    pub fn projection(&self, sigma: &VarSet) -> Polynomial {
        let sw = sigma.words();
        let mut data = Vec::with_capacity(self.data.len());
        for m in self.masks() {
            data.extend(
                m.iter()
                    .enumerate()
                    .map(|(i, w)| w & sw.get(i).copied().unwrap_or(0)),
            );
        }
        Polynomial::from_raw(Arc::clone(&self.vars), data, false)
    }

    /// Splits off trivial divisors `x` and `x + 1` until none remain.
    /// Returns the divisors in discovery order and the remaining core.
    pub fn strip_trivial_divisors(&self) -> (Vec<Polynomial>, Polynomial) {
        let mut factors = Vec::new();
        let mut core = self.clone();
        if core.is_zero() {
            return (factors, core);
        }
        loop {
            let mut changed = false;
            let common = core.common_vars();
            if !common.is_empty() {
                for x in common.iter() {
                    factors.push(Polynomial::variable(Arc::clone(&self.vars), x).unwrap());
                }
                core = core.clear_vars(&common);
                changed = true;
            }
            // (x + 1) | F needs exactly half of the monomials to contain x.
            let m = core.num_monomials();
            if m.is_multiple_of(2) {
                let counts = core.var_counts();
                for (x, &c) in counts.iter().enumerate() {
                    if 2 * c == m && core.eval1(x).is_zero() {
                        let mut d = Polynomial::variable(Arc::clone(&self.vars), x).unwrap();
                        d = d.add(&Polynomial::one(Arc::clone(&self.vars))).unwrap();
                        factors.push(d);
                        core = core.eval0(x);
                        changed = true;
                        break;
                    }
                }
            }
            if !changed {
                break;
            }
        }
        (factors, core)
    }

    // Unchecked primitives used on hot paths.

    pub(crate) fn d(&self, x: usize) -> Polynomial {
        let (w, bit) = (x / 64, 1u64 << (x % 64));
        let mut data = Vec::new();
        for m in self.masks() {
            if m[w] & bit != 0 {
                let start = data.len();
                data.extend_from_slice(m);
                data[start + w] &= !bit;
            }
        }
        self.with_data(data)
    }

    pub(crate) fn eval0(&self, x: usize) -> Polynomial {
        let (w, bit) = (x / 64, 1u64 << (x % 64));
        let mut data = Vec::new();
        for m in self.masks() {
            if m[w] & bit == 0 {
                data.extend_from_slice(m);
            }
        }
        self.with_data(data)
    }

    /// Derivative and zero-substitution in one pass.
    pub(crate) fn split(&self, x: usize) -> (Polynomial, Polynomial) {
        let (w, bit) = (x / 64, 1u64 << (x % 64));
        let hits = self.masks().filter(|m| m[w] & bit != 0).count() * self.stride;
        let mut with = Vec::with_capacity(hits);
        let mut without = Vec::with_capacity(self.data.len() - hits);
        for m in self.masks() {
            if m[w] & bit != 0 {
                let start = with.len();
                with.extend_from_slice(m);
                with[start + w] &= !bit;
            } else {
                without.extend_from_slice(m);
            }
        }
        (self.with_data(with), self.with_data(without))
    }

    pub(crate) fn eval1(&self, x: usize) -> Polynomial {
        let (d, e0) = self.split(x);
        self.with_data(symmetric_merge(self.stride, &d.data, &e0.data))
    }

    /// Removes the variables of `set` from every monomial. Only canonical
    /// when every variable of `set` is common to all monomials or absent.
    pub(crate) fn clear_vars(&self, set: &VarSet) -> Polynomial {
        let sw = set.words();
        let mut data = self.data.clone();
        for m in data.chunks_exact_mut(self.stride) {
            for (a, b) in m.iter_mut().zip(sw) {
                *a &= !b;
            }
        }
        self.with_data(data)
    }

    pub(crate) fn is_canonical(&self) -> bool {
        self.data.len().is_multiple_of(self.stride)
            && self
                .data
                .chunks_exact(self.stride)
                .zip(self.data.chunks_exact(self.stride).skip(1))
                .all(|(a, b)| a < b)
    }
}

impl PartialEq for Polynomial {
    fn eq(&self, other: &Self) -> bool {
        self.data == other.data
            && (Arc::ptr_eq(&self.vars, &other.vars) || self.vars == other.vars)
    }
}

impl Eq for Polynomial {}

impl std::hash::Hash for Polynomial {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.data.hash(state);
    }
}

impl PartialOrd for Polynomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Orders by monomial sequence; used to sort factor lists deterministically.
impl Ord for Polynomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.data.cmp(&other.data)
    }
}

impl fmt::Debug for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Polynomial({self})")
    }
}

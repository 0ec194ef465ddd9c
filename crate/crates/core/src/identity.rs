//! Deciding `A·D = B·C` for multilinear polynomials without forming the
//! products.
//!
//! Each step picks a variable `z`, writes every parameter `Q` as
//! `Q₁·z + Q₂` (`Q₁ = ∂Q/∂z`, `Q₂ = Q|z=0`) and compares coefficients of
//! `z²`, `z` and `1`. The `z²` and `1` coefficients give two smaller
//! instances of the same question. The `z` coefficient is reduced, after
//! multiplying by a nonzero `Q₁·Q₂`, to a disjunction of two more instances
//! that each omit one parameter.

use std::cell::{Cell, RefCell};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::poly::{self, iter_bits, mono_len, Polynomial};

/// One of the four parameters of the query `A·D = B·C`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Param {
    A,
    D,
    B,
    C,
}

impl Param {
    pub const ALL: [Param; 4] = [Param::A, Param::D, Param::B, Param::C];

    /// The parameter sharing a side of the identity with this one.
    pub fn partner(self) -> Param {
        match self {
            Param::A => Param::D,
            Param::D => Param::A,
            Param::B => Param::C,
            Param::C => Param::B,
        }
    }

    fn slot(self) -> usize {
        match self {
            Param::A => 0,
            Param::D => 1,
            Param::B => 2,
            Param::C => 3,
        }
    }
}

/// Which half of the split `Q = Q₁·z + Q₂` a part refers to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Half {
    /// `Q₁ = ∂Q/∂z`
    Derivative,
    /// `Q₂ = Q|z=0`
    AtZero,
}

/// A part `Q₁` or `Q₂` of a split parameter.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Part(pub Param, pub Half);

/// The identity `lhs.0 · lhs.1 = rhs.0 · rhs.1` between split parts.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct CrossIdentity {
    pub lhs: (Part, Part),
    pub rhs: (Part, Part),
}

impl CrossIdentity {
    const fn new(l0: Part, l1: Part, r0: Part, r1: Part) -> Self {
        CrossIdentity {
            lhs: (l0, l1),
            rhs: (r0, r1),
        }
    }

    /// Parameters mentioned by this identity.
    pub fn params(&self) -> [Param; 4] {
        [self.lhs.0 .0, self.lhs.1 .0, self.rhs.0 .0, self.rhs.1 .0]
    }
}

use Half::{AtZero as Z2, Derivative as Z1};
use Param::{A, B, C, D};

/// The two cross identities whose disjunction settles the `z`-coefficient
/// once both outer coefficients agree, for the multiplier `Q₁·Q₂`.
///
/// Each identity omits the partner of `q`.
pub fn subidentities_for(q: Param) -> [CrossIdentity; 2] {
    let p = |x, h| Part(x, h);
    match q {
        A => [
            CrossIdentity::new(p(A, Z1), p(C, Z2), p(A, Z2), p(C, Z1)),
            CrossIdentity::new(p(A, Z1), p(B, Z2), p(A, Z2), p(B, Z1)),
        ],
        B => [
            CrossIdentity::new(p(B, Z1), p(D, Z2), p(B, Z2), p(D, Z1)),
            CrossIdentity::new(p(A, Z1), p(B, Z2), p(A, Z2), p(B, Z1)),
        ],
        C => [
            CrossIdentity::new(p(C, Z1), p(D, Z2), p(C, Z2), p(D, Z1)),
            CrossIdentity::new(p(A, Z1), p(C, Z2), p(A, Z2), p(C, Z1)),
        ],
        D => [
            CrossIdentity::new(p(C, Z1), p(D, Z2), p(C, Z2), p(D, Z1)),
            CrossIdentity::new(p(B, Z1), p(D, Z2), p(B, Z2), p(D, Z1)),
        ],
    }
}

/// The query `A·D = B·C`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Quad {
    pub a: Polynomial,
    pub d: Polynomial,
    pub b: Polynomial,
    pub c: Polynomial,
}

impl Quad {
    pub fn new(a: Polynomial, d: Polynomial, b: Polynomial, c: Polynomial) -> Self {
        Quad { a, d, b, c }
    }

    pub fn get(&self, p: Param) -> &Polynomial {
        match p {
            A => &self.a,
            D => &self.d,
            B => &self.b,
            C => &self.c,
        }
    }

    fn as_array(&self) -> [&Polynomial; 4] {
        [&self.a, &self.d, &self.b, &self.c]
    }

    fn check_tables(&self) -> Result<()> {
        let t = self.a.vars();
        if self
            .as_array()
            .iter()
            .all(|p| Arc::ptr_eq(p.vars(), t) || **p.vars() == **t)
        {
            Ok(())
        } else {
            Err(Error::VarTableMismatch)
        }
    }

    /// Direct comparison of the two products.
    pub fn holds_by_multiplication(&self) -> Result<bool> {
        Ok(self.a.multiply(&self.d)? == self.b.multiply(&self.c)?)
    }
}

/// Rule for choosing the splitting variable within the multiplier source.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum PivotRule {
    /// Variable that splits the largest parameter most evenly.
    #[default]
    BalancedMedian,
    /// Lowest-index variable of the multiplier source.
    FirstAvailable,
}

impl std::str::FromStr for PivotRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "balanced_median" | "balanced-median" | "median" => Ok(PivotRule::BalancedMedian),
            "first_available" | "first-available" | "first" => Ok(PivotRule::FirstAvailable),
            _ => Err(Error::data(format!("unknown pivot rule `{s}`"))),
        }
    }
}

/// Counters describing a run of the recursion. Safe to share across threads.
#[derive(Debug, Default)]
pub struct RecursionStats {
    calls: AtomicU64,
    max_depth: AtomicU64,
    cutoff_hits: AtomicU64,
}

impl RecursionStats {
    pub fn calls(&self) -> u64 {
        self.calls.load(Ordering::Relaxed)
    }

    pub fn max_depth(&self) -> u64 {
        self.max_depth.load(Ordering::Relaxed)
    }

    pub fn cutoff_hits(&self) -> u64 {
        self.cutoff_hits.load(Ordering::Relaxed)
    }

    pub fn reset(&self) {
        self.calls.store(0, Ordering::Relaxed);
        self.max_depth.store(0, Ordering::Relaxed);
        self.cutoff_hits.store(0, Ordering::Relaxed);
    }
}

#[derive(Clone, Debug)]
pub struct IsEqualConfig {
    /// Total parameter length at or below which the products are compared
    /// directly.
    pub cutoff_length: usize,
    pub pivot_rule: PivotRule,
    pub stats: Option<Arc<RecursionStats>>,
}

impl Default for IsEqualConfig {
    fn default() -> Self {
        IsEqualConfig {
            cutoff_length: 512,
            pivot_rule: PivotRule::BalancedMedian,
            stats: None,
        }
    }
}

impl IsEqualConfig {
    pub fn with_cutoff(mut self, cutoff_length: usize) -> Self {
        self.cutoff_length = cutoff_length;
        self
    }

    pub fn with_pivot_rule(mut self, rule: PivotRule) -> Self {
        self.pivot_rule = rule;
        self
    }

    pub fn with_stats(mut self, stats: Arc<RecursionStats>) -> Self {
        self.stats = Some(stats);
        self
    }
}

/// Decides whether `A·D = B·C`.
pub fn is_equal(q: &Quad, cfg: &IsEqualConfig) -> Result<bool> {
    q.check_tables()?;
    Ok(is_equal_rec([&q.a, &q.d, &q.b, &q.c], cfg, 1))
}

pub(crate) fn is_equal_rec(p: [&Polynomial; 4], cfg: &IsEqualConfig, depth: u64) -> bool {
    rec(p.map(View::of), cfg, depth)
}

thread_local! {
    /// Remaining calls for a budgeted test, and whether it ran out.
    static BUDGET: Cell<Option<u64>> = const { Cell::new(None) };
    static EXHAUSTED: Cell<bool> = const { Cell::new(false) };
}

/// [`is_equal_rec`] limited to `calls` recursive calls.
///
/// An exhausted branch answers `true`. The verdict is monotone in the
/// sub-verdicts, so `Some(false)` is always exact; `None` means the budget ran
/// out before an inequality was found.
pub(crate) fn is_equal_budgeted(
    p: [&Polynomial; 4],
    cfg: &IsEqualConfig,
    calls: u64,
) -> Option<bool> {
    BUDGET.set(Some(calls));
    EXHAUSTED.set(false);
    let verdict = rec(p.map(View::of), cfg, 1);
    BUDGET.set(None);
    match (verdict, EXHAUSTED.take()) {
        (true, true) => None,
        (v, _) => Some(v),
    }
}

/// Borrowed canonical monomial sequence; the recursion works on these so
/// that each node needs one buffer for all of its sub-instances.
#[derive(Clone, Copy)]
struct View<'a> {
    data: &'a [u64],
    stride: usize,
}

impl<'a> View<'a> {
    fn of(p: &'a Polynomial) -> Self {
        View {
            data: p.raw_data(),
            stride: p.stride(),
        }
    }

    fn is_zero(self) -> bool {
        self.data.is_empty()
    }

    fn num_monomials(self) -> usize {
        self.data.len() / self.stride
    }

    fn is_constant(self) -> bool {
        self.data.len() <= self.stride && self.data.iter().all(|&w| w == 0)
    }

    fn masks(self) -> std::slice::ChunksExact<'a, u64> {
        self.data.chunks_exact(self.stride)
    }

    fn first(self) -> &'a [u64] {
        &self.data[..self.stride]
    }

    fn last(self) -> &'a [u64] {
        &self.data[self.data.len() - self.stride..]
    }

    fn length(self) -> usize {
        self.masks().map(mono_len).sum()
    }

    fn common_into(self, acc: &mut [u64]) {
        acc.fill(!0);
        for m in self.masks() {
            let mut rest = 0;
            for (a, w) in acc.iter_mut().zip(m) {
                *a &= w;
                rest |= *a;
            }
            if rest == 0 {
                return;
            }
        }
    }

    fn support_into(self, acc: &mut [u64]) {
        acc.fill(0);
        for m in self.masks() {
            for (a, w) in acc.iter_mut().zip(m) {
                *a |= w;
            }
        }
    }
}

/// Parameters in slot order `[A, D, B, C]`.
type Params<'a> = [View<'a>; 4];

fn rec(p: Params<'_>, cfg: &IsEqualConfig, depth: u64) -> bool {
    if let Some(s) = &cfg.stats {
        s.calls.fetch_add(1, Ordering::Relaxed);
        s.max_depth.fetch_max(depth, Ordering::Relaxed);
    }
    if let Some(left) = BUDGET.get() {
        if left == 0 {
            EXHAUSTED.set(true);
            return true;
        }
        BUDGET.set(Some(left - 1));
    }
    let [a, d, b, c] = p;

    // Zero cases.
    if a.is_zero() || d.is_zero() {
        return b.is_zero() || c.is_zero();
    }
    if b.is_zero() || c.is_zero() {
        return false;
    }

    // The canonical order is a monomial order, so extreme monomials multiply.
    let stride = a.stride;
    let extremes_match = |[ma, md, mb, mc]: [&[u64]; 4]| {
        (0..stride).all(|w| exponents_equal(ma[w], md[w], mb[w], mc[w]))
    };
    if !extremes_match(p.map(View::first)) || !extremes_match(p.map(View::last)) {
        return false;
    }

    // Dividing variables must divide both sides equally often.
    let mut stack = [0u64; 64];
    let mut heap = Vec::new();
    let common: &mut [u64] = if 4 * stride <= stack.len() {
        &mut stack[..4 * stride]
    } else {
        heap.resize(4 * stride, 0);
        &mut heap
    };
    for (x, acc) in p.iter().zip(common.chunks_exact_mut(stride)) {
        x.common_into(acc);
    }
    let mut any = false;
    for w in 0..stride {
        let (da, dd, db, dc) = (
            common[w],
            common[stride + w],
            common[2 * stride + w],
            common[3 * stride + w],
        );
        if !exponents_equal(da, dd, db, dc) {
            return false;
        }
        any |= (da | dd | db | dc) != 0;
    }
    let common: &[u64] = common;
    let cleared: [&[u64]; 4] = std::array::from_fn(|i| &common[i * stride..(i + 1) * stride]);
    if let Some(v) = constant_case(p, cleared) {
        return v;
    }
    if !any {
        return reduce(p, cfg, depth);
    }
    // Removing bits set in every monomial keeps the canonical order.
    let mut buf = Vec::with_capacity(p.iter().map(|x| x.data.len()).sum());
    let mut ends = [0usize; 4];
    for (i, x) in p.iter().enumerate() {
        for m in x.masks() {
            buf.extend(m.iter().zip(cleared[i]).map(|(w, c)| w & !c));
        }
        ends[i] = buf.len();
    }
    let q: Params<'_> = std::array::from_fn(|i| View {
        data: &buf[if i == 0 { 0 } else { ends[i - 1] }..ends[i]],
        stride,
    });
    reduce(q, cfg, depth)
}

/// Whether the exponent vectors `a + d` and `b + c` agree on one word.
fn exponents_equal(a: u64, d: u64, b: u64, c: u64) -> bool {
    ((a ^ d) ^ (b ^ c)) | ((a & d) ^ (b & c)) == 0
}

/// Whether `x` and `y` agree once the `cx` and `cy` bits are removed.
fn equal_cleared(x: View<'_>, cx: &[u64], y: View<'_>, cy: &[u64]) -> bool {
    x.num_monomials() == y.num_monomials()
        && x.masks().zip(y.masks()).all(|(mx, my)| {
            mx.iter()
                .zip(cx)
                .zip(my.iter().zip(cy))
                .all(|((a, ca), (b, cb))| a & !ca == b & !cb)
        })
}

/// Constant cases on the stripped parameters, evaluated without stripping:
/// a nonzero parameter becomes 1 iff it is a single monomial.
fn constant_case(p: Params<'_>, cleared: [&[u64]; 4]) -> Option<bool> {
    let [a1, d1, b1, c1] = p.map(|x| x.num_monomials() == 1);
    let eq = |i: usize, j: usize| equal_cleared(p[i], cleared[i], p[j], cleared[j]);
    let (a, d, b, c) = (0, 1, 2, 3);
    if a1 && d1 {
        return Some(b1 && c1);
    }
    if b1 && c1 {
        return Some(false);
    }
    if a1 && b1 {
        return Some(eq(d, c));
    }
    if d1 && c1 {
        return Some(eq(a, b));
    }
    if a1 && c1 {
        return Some(eq(d, b));
    }
    if d1 && b1 {
        return Some(eq(a, c));
    }
    None
}

/// Cutoff and the recursive step on parameters without dividing variables
/// and outside the constant cases.
fn reduce(p: Params<'_>, cfg: &IsEqualConfig, depth: u64) -> bool {
    let lens = p.map(View::length);
    if lens.iter().sum::<usize>() <= cfg.cutoff_length {
        if let Some(s) = &cfg.stats {
            s.cutoff_hits.fetch_add(1, Ordering::Relaxed);
        }
        return poly::products_equal(p[0].stride, p.map(|x| x.data));
    }

    let (q, z) = pick(p, &lens, cfg.pivot_rule);
    let stride = p[0].stride;
    let (w, bit) = (z / 64, 1u64 << (z % 64));
    // Per parameter: derivative monomials, then those without z.
    let mut buf = Vec::with_capacity(p.iter().map(|x| x.data.len()).sum());
    let mut cuts = [(0usize, 0usize, 0usize); 4];
    for (i, x) in p.iter().enumerate() {
        let start = buf.len();
        for m in x.masks().filter(|m| m[w] & bit != 0) {
            let at = buf.len();
            buf.extend_from_slice(m);
            buf[at + w] &= !bit;
        }
        let mid = buf.len();
        buf.extend(x.masks().filter(|m| m[w] & bit == 0).flatten());
        cuts[i] = (start, mid, buf.len());
    }
    let part = |Part(param, half): Part| {
        let (start, mid, end) = cuts[param.slot()];
        let data = match half {
            Half::Derivative => &buf[start..mid],
            Half::AtZero => &buf[mid..end],
        };
        View { data, stride }
    };
    let sub = |h: Half| Param::ALL.map(|x| part(Part(x, h)));

    if !rec(sub(Half::AtZero), cfg, depth + 1) {
        return false;
    }
    if !rec(sub(Half::Derivative), cfg, depth + 1) {
        return false;
    }
    let mut cross = subidentities_for(q)
        .map(|id| [part(id.lhs.0), part(id.lhs.1), part(id.rhs.0), part(id.rhs.1)]);
    // Smaller instance first; either one succeeding settles the question.
    let size = |ps: &Params<'_>| ps.iter().map(|x| x.length()).sum::<usize>();
    if size(&cross[1]) < size(&cross[0]) {
        cross.swap(0, 1);
    }
    cross.iter().any(|&ps| rec(ps, cfg, depth + 1))
}

/// Chooses the multiplier source `Q` and splitting variable `z`.
///
/// Expects normalized parameters: none divisible by a variable, at least one
/// non-constant.
pub fn select_pivot(q: &Quad, rule: PivotRule) -> Result<(Param, usize)> {
    q.check_tables()?;
    let p = q.as_array().map(View::of);
    if p.iter().all(|x| x.is_constant()) {
        return Err(Error::pre("all four parameters are constant"));
    }
    Ok(pick(p, &p.map(View::length), rule))
}

fn pick(p: Params<'_>, lens: &[usize; 4], rule: PivotRule) -> (Param, usize) {
    let mut by_size = Param::ALL;
    // Stable: ties keep A, D, B, C order.
    by_size.sort_by(|x, y| lens[y.slot()].cmp(&lens[x.slot()]));
    let largest = by_size[0];
    let q = by_size
        .iter()
        .map(|x| x.partner())
        .find(|x| !p[x.slot()].is_constant())
        .expect("at least one non-constant parameter");
    let mut candidates = vec![0u64; p[0].stride];
    p[q.slot()].support_into(&mut candidates);
    let z = match rule {
        PivotRule::FirstAvailable => iter_bits(&candidates).next(),
        PivotRule::BalancedMedian => {
            balanced_var(p[largest.slot()], lens[largest.slot()], &candidates)
        }
    };
    (q, z.expect("non-constant source has a variable"))
}

thread_local! {
    static SPLIT_WEIGHTS: RefCell<Vec<i64>> = const { RefCell::new(Vec::new()) };
}

/// Candidate minimizing `||P₁| - |P₂||`, ties to the lowest index.
///
/// With `P₁ = ∂P/∂z` and `P₂ = P|z=0`, a monomial `m ∋ z` of length `l`
/// moves `l` out of `P₂` and adds `max(l - 1, 1)` to `P₁`, so
/// `|P₁| - |P₂| = Σ_{m∋z} w(m) - |P|` with `w(m) = 2l - 1`, or 2 when `l = 1`.
fn balanced_var(big: View<'_>, total: usize, candidates: &[u64]) -> Option<usize> {
    let total = total as i64;
    SPLIT_WEIGHTS.with_borrow_mut(|acc| {
        if acc.len() < 64 * big.stride {
            acc.resize(64 * big.stride, 0);
        }
        for m in big.masks() {
            if !m.iter().zip(candidates).any(|(w, c)| w & c != 0) {
                continue;
            }
            let l = mono_len(m) as i64;
            let weight = if l == 1 { 2 } else { 2 * l - 1 };
            for (wi, (w, c)) in m.iter().zip(candidates).enumerate() {
                let mut bits = w & c;
                let base = wi * 64;
                while bits != 0 {
                    acc[base + bits.trailing_zeros() as usize] += weight;
                    bits &= bits - 1;
                }
            }
        }
        let mut best: Option<(i64, usize)> = None;
        for z in iter_bits(candidates) {
            let key = (std::mem::take(&mut acc[z]) - total).abs();
            if best.is_none_or(|(k, _)| key < k) {
                best = Some((key, z));
            }
        }
        best.map(|(_, z)| z)
    })
}

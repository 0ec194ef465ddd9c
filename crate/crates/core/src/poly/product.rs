use std::fmt;
use std::sync::Arc;

use super::polynomial::{canonicalize, has_bit, Polynomial};
use super::vars::{iter_bits, VarTable};

/// Product of two multilinear polynomials. Exponents are capped at two, so
/// each term is stored as a pair of bitsets: the support and the squared
/// variables (squared is a subset of support).
#[derive(Clone, PartialEq, Eq)]
pub struct Product {
    vars: Arc<VarTable>,
    stride: usize,
    // Each term occupies 2 * stride words: support then squared.
    data: Vec<u64>,
}

impl Product {
    pub(crate) fn of(f: &Polynomial, g: &Polynomial) -> Product {
        let s = f.stride();
        let mut data = Vec::with_capacity(2 * s * f.num_monomials() * g.num_monomials());
        for a in f.masks() {
            for b in g.masks() {
                data.extend(a.iter().zip(b).map(|(x, y)| x | y));
                data.extend(a.iter().zip(b).map(|(x, y)| x & y));
            }
        }
        Product {
            vars: Arc::clone(f.vars()),
            stride: s,
            data: canonicalize(2 * s, data, true),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.data.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.data.len() / (2 * self.stride)
    }

    fn terms(&self) -> impl Iterator<Item = (&[u64], &[u64])> {
        self.data
            .chunks_exact(2 * self.stride)
            .map(|t| t.split_at(self.stride))
    }

    pub fn is_multilinear(&self) -> bool {
        self.terms().all(|(_, sq)| sq.iter().all(|&w| w == 0))
    }

    /// Converts back to a multilinear polynomial when no term has a square.
    pub fn into_multilinear(self) -> Option<Polynomial> {
        if !self.is_multilinear() {
            return None;
        }
        let data = self.terms().flat_map(|(s, _)| s.iter().copied()).collect();
        // Sorting by (support, 0) equals sorting by support.
        Some(Polynomial::from_canonical(self.vars, data))
    }

    /// Whether the standard formal derivative by `y` vanishes, i.e. no term
    /// carries `y` with exponent exactly one.
    pub fn derivative_is_zero(&self, y: usize) -> bool {
        self.terms()
            .all(|(s, sq)| !has_bit(s, y) || has_bit(sq, y))
    }
}

/// Decides `a·d = b·c` by direct expansion without materializing either
/// product.
///
/// Every pair product gets a fingerprint; after sorting by fingerprint each
/// run of equal fingerprints is resolved exactly, and the identity holds iff
/// every distinct term occurs an even number of times across both sides.
pub(crate) fn products_equal(stride: usize, p: [&[u64]; 4]) -> bool {
    let [a, d, b, c] = p;
    // Words where any operand has a variable; the rest are zero everywhere.
    let mut any = vec![0u64; stride];
    for m in p.iter().flat_map(|x| x.chunks_exact(stride)) {
        for (x, y) in any.iter_mut().zip(m) {
            *x |= y;
        }
    }
    let active: Vec<usize> = (0..stride).filter(|&w| any[w] != 0).collect();

    let sides = [(a, d), (b, c)];
    let count = |x: &[u64]| x.len() / stride;
    let total = count(a) * count(d) + count(b) * count(c);
    let mut keys: Vec<(u64, u32, u32, bool)> = Vec::with_capacity(total);
    for (side, (f, g)) in sides.iter().enumerate() {
        for (i, x) in f.chunks_exact(stride).enumerate() {
            for (j, y) in g.chunks_exact(stride).enumerate() {
                keys.push((fingerprint(x, y, &active), i as u32, j as u32, side == 1));
            }
        }
    }
    keys.sort_unstable_by_key(|k| k.0);

    let term = |&(_, i, j, side): &(u64, u32, u32, bool)| {
        let (f, g) = sides[side as usize];
        let (i, j) = (i as usize * stride, j as usize * stride);
        (&f[i..i + stride], &g[j..j + stride])
    };
    let same = |(x1, y1): (&[u64], &[u64]), (x2, y2): (&[u64], &[u64])| {
        active.iter().all(|&w| {
            x1[w] | y1[w] == x2[w] | y2[w] && x1[w] & y1[w] == x2[w] & y2[w]
        })
    };
    for run in keys.chunk_by(|p, q| p.0 == q.0) {
        let first = term(&run[0]);
        if run[1..].iter().all(|k| same(first, term(k))) {
            if run.len() % 2 == 1 {
                return false;
            }
            continue;
        }
        // Fingerprint collision between distinct terms: count each class.
        let mut rest: Vec<(&[u64], &[u64])> = run.iter().map(term).collect();
        while let Some(t) = rest.pop() {
            let before = rest.len();
            rest.retain(|&u| !same(t, u));
            if (before - rest.len()).is_multiple_of(2) {
                return false;
            }
        }
    }
    true
}

fn fingerprint(x: &[u64], y: &[u64], active: &[usize]) -> u64 {
    const K1: u64 = 0x9e37_79b9_7f4a_7c15;
    const K2: u64 = 0xc2b2_ae3d_27d4_eb4f;
    let mut h = 0u64;
    for &w in active {
        h = (h ^ (x[w] | y[w])).wrapping_mul(K1).rotate_left(29);
        h = (h ^ (x[w] & y[w])).wrapping_mul(K2).rotate_left(31);
    }
    h ^ (h >> 32)
}

impl fmt::Display for Product {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        for (k, (s, sq)) in self.terms().enumerate() {
            if k > 0 {
                f.write_str(" + ")?;
            }
            if s.iter().all(|&w| w == 0) {
                f.write_str("1")?;
                continue;
            }
            for (j, i) in iter_bits(s).enumerate() {
                if j > 0 {
                    f.write_str("*")?;
                }
                f.write_str(self.vars.name(i))?;
                if has_bit(sq, i) {
                    f.write_str("^2")?;
                }
            }
        }
        Ok(())
    }
}

impl fmt::Debug for Product {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Product({self})")
    }
}

#[cfg(test)]
mod tests {
    use crate::poly::parse;
    use std::sync::Arc;

    #[test]
    fn disjoint_product_of_sums() {
        let f = parse("x*u + x*v + y*u + y*v", None).unwrap();
        let t = Some(Arc::clone(f.vars()));
        let a = parse("x + y", t.clone()).unwrap();
        let b = parse("u + v", t.clone()).unwrap();
        let prod = a.multiply(&b).unwrap();
        assert_eq!(prod.clone().into_multilinear().unwrap(), f);
        assert_eq!(a.multiply_disjoint(&b).unwrap(), f);
    }

    #[test]
    fn square_cross_terms_cancel() {
        let a = parse("u + v", None).unwrap();
        let sq = a.multiply(&a).unwrap();
        assert_eq!(sq.to_string(), "u^2 + v^2");
        assert!(!sq.is_multilinear());
        assert!(sq.derivative_is_zero(0));
    }

    #[test]
    fn multiply_by_one() {
        let f = parse("x*y + y + 1", None).unwrap();
        let one = parse("1", Some(Arc::clone(f.vars()))).unwrap();
        assert_eq!(f.multiply(&one).unwrap().into_multilinear().unwrap(), f);
    }
}

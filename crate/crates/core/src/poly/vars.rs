use std::collections::HashMap;
use std::fmt;

use crate::error::{Error, Result};

/// Number of 64-bit words needed for a mask over `n` variables. Never zero.
pub(crate) fn words_for(n: usize) -> usize {
    n.div_ceil(64).max(1)
}

/// Ordered table of variable identifiers shared by all polynomials derived
/// from one input.
#[derive(Clone, Default)]
pub struct VarTable {
    names: Vec<String>,
    index: HashMap<String, usize>,
}

impl VarTable {
    /// Builds a table sorted alphabetically. Repeated names are merged.
    pub fn new<I, S>(names: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut names: Vec<String> = names.into_iter().map(Into::into).collect();
        names.sort();
        names.dedup();
        Self::with_order(names)
    }

    /// Builds a table keeping the given order. Duplicates are an error.
    pub fn with_order<I, S>(names: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let names: Vec<String> = names.into_iter().map(Into::into).collect();
        let mut index = HashMap::with_capacity(names.len());
        for (i, name) in names.iter().enumerate() {
            if name.is_empty() {
                return Err(Error::VarTable("empty identifier".into()));
            }
            if index.insert(name.clone(), i).is_some() {
                return Err(Error::VarTable(format!("duplicate identifier `{name}`")));
            }
        }
        Ok(VarTable { names, index })
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, i: usize) -> &str {
        &self.names[i]
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    /// Like [`VarTable::index_of`] but reports unknown names as errors.
    pub fn lookup(&self, name: &str) -> Result<usize> {
        self.index_of(name)
            .ok_or_else(|| Error::UnknownVariable(name.to_string()))
    }

    pub(crate) fn words(&self) -> usize {
        words_for(self.names.len())
    }

    pub(crate) fn check(&self, i: usize) -> Result<()> {
        if i < self.names.len() {
            Ok(())
        } else {
            Err(Error::VariableIndex(i))
        }
    }
}

impl PartialEq for VarTable {
    fn eq(&self, other: &Self) -> bool {
        self.names == other.names
    }
}

impl Eq for VarTable {}

impl fmt::Debug for VarTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(&self.names).finish()
    }
}

/// A set of variable indices stored as a bitset.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct VarSet {
    bits: Vec<u64>,
}

impl VarSet {
    /// Empty set able to hold indices below `n`.
    pub fn empty(n: usize) -> Self {
        VarSet {
            bits: vec![0; words_for(n)],
        }
    }

    pub fn from_indices<I: IntoIterator<Item = usize>>(n: usize, it: I) -> Self {
        let mut s = Self::empty(n);
        for i in it {
            s.insert(i);
        }
        s
    }

    pub(crate) fn from_words(bits: Vec<u64>) -> Self {
        VarSet { bits }
    }

    pub(crate) fn words(&self) -> &[u64] {
        &self.bits
    }

    pub fn insert(&mut self, i: usize) {
        self.bits[i / 64] |= 1 << (i % 64);
    }

    pub fn remove(&mut self, i: usize) {
        self.bits[i / 64] &= !(1 << (i % 64));
    }

    pub fn contains(&self, i: usize) -> bool {
        self.bits
            .get(i / 64)
            .is_some_and(|w| w & (1 << (i % 64)) != 0)
    }

    pub fn len(&self) -> usize {
        self.bits.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.iter().all(|&w| w == 0)
    }

    /// Indices in ascending order.
    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        iter_bits(&self.bits)
    }

    pub fn first(&self) -> Option<usize> {
        self.iter().next()
    }

    pub fn union(&self, other: &VarSet) -> VarSet {
        self.zip(other, |a, b| a | b)
    }

    pub fn intersection(&self, other: &VarSet) -> VarSet {
        self.zip(other, |a, b| a & b)
    }

    pub fn difference(&self, other: &VarSet) -> VarSet {
        self.zip(other, |a, b| a & !b)
    }

    pub fn is_disjoint(&self, other: &VarSet) -> bool {
        self.bits.iter().zip(&other.bits).all(|(a, b)| a & b == 0)
    }

    pub fn is_subset(&self, other: &VarSet) -> bool {
        self.bits.iter().zip(&other.bits).all(|(a, b)| a & !b == 0)
            && self.bits.iter().skip(other.bits.len()).all(|&a| a == 0)
    }

    fn zip(&self, other: &VarSet, f: impl Fn(u64, u64) -> u64) -> VarSet {
        let n = self.bits.len().max(other.bits.len());
        let get = |v: &[u64], i: usize| v.get(i).copied().unwrap_or(0);
        VarSet {
            bits: (0..n).map(|i| f(get(&self.bits, i), get(&other.bits, i))).collect(),
        }
    }
}

impl fmt::Debug for VarSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

pub(crate) fn iter_bits(words: &[u64]) -> impl Iterator<Item = usize> + '_ {
    words.iter().enumerate().flat_map(|(wi, &w)| {
        let mut w = w;
        std::iter::from_fn(move || {
            if w == 0 {
                None
            } else {
                let b = w.trailing_zeros() as usize;
                w &= w - 1;
                Some(wi * 64 + b)
            }
        })
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_is_sorted_and_indexed() {
        let t = VarTable::new(["y", "x", "v", "u", "x"]).unwrap();
        assert_eq!(t.names(), ["u", "v", "x", "y"]);
        for (i, n) in t.names().iter().enumerate() {
            assert_eq!(t.index_of(n), Some(i));
        }
    }

    #[test]
    fn table_rejects_duplicates_and_empty() {
        assert!(VarTable::with_order(["a", "a"]).is_err());
        assert!(VarTable::with_order([""]).is_err());
    }

    #[test]
    fn varset_ops() {
        let a = VarSet::from_indices(130, [0, 5, 64, 129]);
        let b = VarSet::from_indices(130, [5, 129]);
        assert_eq!(a.iter().collect::<Vec<_>>(), vec![0, 5, 64, 129]);
        assert!(b.is_subset(&a));
        assert_eq!(a.difference(&b).iter().collect::<Vec<_>>(), vec![0, 64]);
        assert_eq!(a.len(), 4);
        assert!(!a.is_disjoint(&b));
    }
}

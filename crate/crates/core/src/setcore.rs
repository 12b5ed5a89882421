//! Finite sets over a bounded universe, disjoint families and their
//! finite-union closures, plus the bridge between natural numbers under
//! addition and finite sets under disjoint union (a number is identified
//! with the set of positions of the 1-bits in its binary expansion).

use std::fmt;

use serde::{Serialize, Serializer};
use thiserror::Error;

/// Largest supported universe; a [`FinSet`] is one machine word.
pub const MAX_UNIVERSE: u32 = 64;

/// Largest family accepted by closure computations (2^20 - 1 unions).
pub const MAX_CLOSURE_MEMBERS: usize = 20;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SetError {
    #[error("universe size {0} outside 1..={MAX_UNIVERSE}")]
    BadUniverse(u32),
    #[error("element {element} outside universe of size {n}")]
    OutOfRange { element: u64, n: u32 },
    #[error("sets {0} and {1} are not disjoint")]
    NotDisjoint(FinSet, FinSet),
    #[error("sets live in different universes ({0} vs {1})")]
    UniverseMismatch(u32, u32),
    #[error("empty set is not allowed here")]
    Empty,
    #[error("family has {0} members, closure limit is {MAX_CLOSURE_MEMBERS}")]
    TooLarge(usize),
    #[error("empty family")]
    EmptyFamily,
    #[error("zero has no binary support")]
    ZeroSupport,
}

/// The ground set `{0, .., n-1}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Universe {
    n: u32,
}

impl Universe {
    pub fn new(n: u32) -> Result<Self, SetError> {
        if n == 0 || n > MAX_UNIVERSE {
            return Err(SetError::BadUniverse(n));
        }
        Ok(Universe { n })
    }

    pub fn size(self) -> u32 {
        self.n
    }

    /// Bit mask with every element of the universe set.
    pub fn full_mask(self) -> u64 {
        if self.n == 64 {
            u64::MAX
        } else {
            (1u64 << self.n) - 1
        }
    }

    pub fn full(self) -> FinSet {
        FinSet { bits: self.full_mask(), universe: self }
    }

    pub fn empty(self) -> FinSet {
        FinSet { bits: 0, universe: self }
    }

    /// Wraps a raw bit pattern, rejecting bits outside the universe.
    pub fn set_from_bits(self, bits: u64) -> Result<FinSet, SetError> {
        let stray = bits & !self.full_mask();
        if stray != 0 {
            return Err(SetError::OutOfRange { element: stray.trailing_zeros() as u64, n: self.n });
        }
        Ok(FinSet { bits, universe: self })
    }

    /// `make_set`: the set with exactly the listed elements. Duplicates collapse.
    pub fn make_set<I>(self, elements: I) -> Result<FinSet, SetError>
    where
        I: IntoIterator<Item = u64>,
    {
        let mut bits = 0u64;
        for e in elements {
            if e >= self.n as u64 {
                return Err(SetError::OutOfRange { element: e, n: self.n });
            }
            bits |= 1 << e;
        }
        Ok(FinSet { bits, universe: self })
    }

    /// All nonempty subsets of the universe, in increasing bit-pattern order.
    ///
    /// Only sensible for small universes; the iterator length is `2^n - 1`.
    pub fn nonempty_subsets(self) -> impl DoubleEndedIterator<Item = FinSet> {
        let full = self.full_mask();
        (1..=full).map(move |bits| FinSet { bits, universe: self })
    }

    /// `binary_support`: positions of the 1-bits of `m`.
    pub fn binary_support(self, m: u64) -> Result<FinSet, SetError> {
        if m == 0 {
            return Err(SetError::ZeroSupport);
        }
        self.set_from_bits(m)
    }
}

/// A finite subset of a [`Universe`], stored as a bit vector.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct FinSet {
    bits: u64,
    universe: Universe,
}

impl FinSet {
    pub fn bits(self) -> u64 {
        self.bits
    }

    pub fn universe(self) -> Universe {
        self.universe
    }

    pub fn size(self) -> u32 {
        self.bits.count_ones()
    }

    pub fn is_empty(self) -> bool {
        self.bits == 0
    }

    pub fn contains(self, element: u64) -> bool {
        element < 64 && self.bits & (1 << element) != 0
    }

    pub fn min_element(self) -> Option<u64> {
        (self.bits != 0).then(|| self.bits.trailing_zeros() as u64)
    }

    /// Sorted element list; this is the serialized form.
    pub fn elements(self) -> Vec<u64> {
        let mut out = Vec::with_capacity(self.size() as usize);
        let mut b = self.bits;
        while b != 0 {
            out.push(b.trailing_zeros() as u64);
            b &= b - 1;
        }
        out
    }

    pub fn is_disjoint(self, other: FinSet) -> bool {
        self.bits & other.bits == 0
    }

    fn same_universe(self, other: FinSet) -> Result<(), SetError> {
        if self.universe != other.universe {
            return Err(SetError::UniverseMismatch(self.universe.n, other.universe.n));
        }
        Ok(())
    }

    /// Union of two disjoint sets. Overlap is an error: finite unions are
    /// only ever taken over pairwise disjoint families.
    pub fn disjoint_union(self, other: FinSet) -> Result<FinSet, SetError> {
        self.same_universe(other)?;
        if !self.is_disjoint(other) {
            return Err(SetError::NotDisjoint(self, other));
        }
        Ok(FinSet { bits: self.bits | other.bits, universe: self.universe })
    }

    /// Bitwise exclusive-or: the group operation of the Boolean group of
    /// finite sets. Agrees with [`FinSet::disjoint_union`] on disjoint input.
    pub fn sym_diff(self, other: FinSet) -> Result<FinSet, SetError> {
        self.same_universe(other)?;
        Ok(FinSet { bits: self.bits ^ other.bits, universe: self.universe })
    }

    /// The unique `k` with `2^k <= |x| < 2^(k+1)`.
    pub fn log_block(self) -> Result<u32, SetError> {
        log_block_of(self.size() as u64).ok_or(SetError::Empty)
    }

    /// `Σ_{i ∈ x} 2^i`, the inverse of [`Universe::binary_support`].
    pub fn from_binary_support(self) -> u64 {
        self.bits
    }
}

/// `⌊log₂ size⌋` in integer arithmetic; `None` for zero.
pub fn log_block_of(size: u64) -> Option<u32> {
    (size != 0).then(|| 63 - size.leading_zeros())
}

impl fmt::Debug for FinSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for FinSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, e) in self.elements().into_iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{e}")?;
        }
        write!(f, "}}")
    }
}

impl Serialize for FinSet {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.elements().serialize(serializer)
    }
}

/// A pairwise disjoint family of nonempty sets, kept sorted by minimum
/// element so that families compare by value.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DisjointFamily {
    members: Vec<FinSet>,
}

impl DisjointFamily {
    pub fn new(mut members: Vec<FinSet>) -> Result<Self, SetError> {
        let Some(first) = members.first().copied() else {
            return Err(SetError::EmptyFamily);
        };
        for (i, &m) in members.iter().enumerate() {
            first.same_universe(m)?;
            if m.is_empty() {
                return Err(SetError::Empty);
            }
            if let Some(&clash) = members[..i].iter().find(|o| !o.is_disjoint(m)) {
                return Err(SetError::NotDisjoint(clash, m));
            }
        }
        members.sort_by_key(|m| m.bits.trailing_zeros());
        Ok(DisjointFamily { members })
    }

    pub fn members(&self) -> &[FinSet] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn universe(&self) -> Universe {
        self.members[0].universe
    }

    /// Union of all members.
    pub fn support(&self) -> FinSet {
        let bits = self.members.iter().fold(0, |acc, m| acc | m.bits);
        FinSet { bits, universe: self.universe() }
    }

    /// Member sizes in family order.
    pub fn sizes(&self) -> Vec<u32> {
        self.members.iter().map(|m| m.size()).collect()
    }

    /// All `2^m - 1` unions of nonempty subfamilies. The union at position
    /// `mask - 1` is taken over the members whose index bit is set in `mask`.
    pub fn fu_closure(&self) -> Result<Vec<FinSet>, SetError> {
        let m = self.members.len();
        if m > MAX_CLOSURE_MEMBERS {
            return Err(SetError::TooLarge(m));
        }
        let universe = self.universe();
        let mut out: Vec<FinSet> = Vec::with_capacity((1 << m) - 1);
        for mask in 1u32..(1 << m) {
            // lowest set bit peeled off; the rest was computed earlier
            let low = mask.trailing_zeros() as usize;
            let rest = mask & (mask - 1);
            let bits =
                if rest == 0 { self.members[low].bits } else { out[rest as usize - 1].bits | self.members[low].bits };
            out.push(FinSet { bits, universe });
        }
        Ok(out)
    }
}

impl Serialize for DisjointFamily {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.members.serialize(serializer)
    }
}

impl fmt::Display for DisjointFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, m) in self.members.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{m}")?;
        }
        write!(f, "]")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn u(n: u32) -> Universe {
        Universe::new(n).unwrap()
    }

    #[test]
    fn make_set_examples() {
        let s = u(8).make_set([1, 2, 3]).unwrap();
        assert_eq!(s.elements(), vec![1, 2, 3]);
        assert!(u(8).make_set([]).unwrap().is_empty());
        let d = u(8).make_set([7, 7]).unwrap();
        assert_eq!(d.elements(), vec![7]);
        assert_eq!(d.size(), 1);
        assert_eq!(u(8).make_set([8]), Err(SetError::OutOfRange { element: 8, n: 8 }));
    }

    #[test]
    fn universe_bounds() {
        assert!(Universe::new(0).is_err());
        assert!(Universe::new(65).is_err());
        assert_eq!(u(64).full().size(), 64);
    }

    #[test]
    fn disjoint_union_examples() {
        let n = u(8);
        let a = n.make_set([0, 2]).unwrap();
        let b = n.make_set([1]).unwrap();
        assert_eq!(a.disjoint_union(b).unwrap().elements(), vec![0, 1, 2]);
        let c = n.make_set([5]).unwrap().disjoint_union(n.make_set([6]).unwrap()).unwrap();
        assert_eq!(c.elements(), vec![5, 6]);
        let x = n.make_set([0, 1]).unwrap();
        let y = n.make_set([1, 2]).unwrap();
        assert!(matches!(x.disjoint_union(y), Err(SetError::NotDisjoint(..))));
        let other = u(9).make_set([3]).unwrap();
        assert_eq!(b.disjoint_union(other), Err(SetError::UniverseMismatch(8, 9)));
    }

    #[test]
    fn fu_closure_examples() {
        let n = u(8);
        let fam = DisjointFamily::new(vec![n.make_set([0]).unwrap(), n.make_set([1]).unwrap()]).unwrap();
        let cl: Vec<_> = fam.fu_closure().unwrap().iter().map(|s| s.elements()).collect();
        assert_eq!(cl, vec![vec![0], vec![1], vec![0, 1]]);

        let single = DisjointFamily::new(vec![n.make_set([3]).unwrap()]).unwrap();
        assert_eq!(single.fu_closure().unwrap(), vec![n.make_set([3]).unwrap()]);
    }

    #[test]
    fn fu_closure_sizes_1_4_16() {
        // oracle: popcounts of every submask union, computed independently
        let n = u(21);
        let a = n.make_set([0]).unwrap();
        let b = n.make_set(1..5).unwrap();
        let c = n.make_set(5..21).unwrap();
        let fam = DisjointFamily::new(vec![a, b, c]).unwrap();
        let sizes: Vec<u32> = fam.fu_closure().unwrap().iter().map(|s| s.size()).collect();
        let members = [1u32, 4, 16];
        let oracle: Vec<u32> =
            (1u32..8).map(|mask| (0..3).filter(|i| mask & (1 << i) != 0).map(|i| members[i]).sum()).collect();
        assert_eq!(sizes, oracle);
        let mut sorted = sizes.clone();
        sorted.sort();
        assert_eq!(sorted, vec![1, 4, 5, 16, 17, 20, 21]);
    }

    #[test]
    fn fu_closure_size_guard() {
        let n = u(21);
        let members = (0..21).map(|i| n.make_set([i]).unwrap()).collect();
        let fam = DisjointFamily::new(members).unwrap();
        assert_eq!(fam.fu_closure(), Err(SetError::TooLarge(21)));
    }

    #[test]
    fn family_validation() {
        let n = u(6);
        assert_eq!(DisjointFamily::new(vec![]), Err(SetError::EmptyFamily));
        assert_eq!(DisjointFamily::new(vec![n.empty()]), Err(SetError::Empty));
        let bad = vec![n.make_set([0, 1]).unwrap(), n.make_set([1, 2]).unwrap()];
        assert!(matches!(DisjointFamily::new(bad), Err(SetError::NotDisjoint(..))));
        let fam = DisjointFamily::new(vec![n.make_set([4, 5]).unwrap(), n.make_set([1]).unwrap()]).unwrap();
        assert_eq!(fam.members()[0].elements(), vec![1]);
    }

    #[test]
    fn log_block_examples() {
        let n = u(21);
        assert_eq!(n.make_set([3]).unwrap().log_block(), Ok(0));
        assert_eq!(n.make_set(0..5).unwrap().log_block(), Ok(2));
        assert_eq!(n.make_set(0..16).unwrap().log_block(), Ok(4));
        assert_eq!(n.empty().log_block(), Err(SetError::Empty));
    }

    #[test]
    fn binary_support_examples() {
        let n = u(8);
        assert_eq!(n.binary_support(5).unwrap().elements(), vec![0, 2]);
        assert_eq!(n.binary_support(8).unwrap().elements(), vec![3]);
        assert_eq!(n.binary_support(7).unwrap().elements(), vec![0, 1, 2]);
        assert_eq!(n.binary_support(0), Err(SetError::ZeroSupport));
        assert!(matches!(n.binary_support(256), Err(SetError::OutOfRange { .. })));

        assert_eq!(n.make_set([0, 2]).unwrap().from_binary_support(), 5);
        assert_eq!(n.empty().from_binary_support(), 0);
        let x = n.make_set([0, 2]).unwrap();
        let y = n.make_set([1]).unwrap();
        assert_eq!(x.from_binary_support() + y.from_binary_support(), 7);
        assert_eq!(x.disjoint_union(y).unwrap().from_binary_support(), 7);
    }

    #[test]
    fn serializes_as_sorted_lists() {
        let n = u(8);
        let fam = DisjointFamily::new(vec![n.make_set([1, 2, 3, 4]).unwrap(), n.make_set([0]).unwrap()]).unwrap();
        assert_eq!(serde_json::to_string(&fam).unwrap(), "[[0],[1,2,3,4]]");
    }

    proptest! {
        #[test]
        fn log_block_brackets_size(bits in 1u64..) {
            let s = u(64).set_from_bits(bits).unwrap();
            let k = s.log_block().unwrap();
            let size = s.size() as u128;
            prop_assert!(1u128 << k <= size && size < 1u128 << (k + 1));
        }

        #[test]
        fn disjoint_union_adds_sizes_and_numbers(a in any::<u64>(), b in any::<u64>()) {
            let n = u(64);
            let x = n.set_from_bits(a & !b).unwrap();
            let y = n.set_from_bits(b).unwrap();
            let z = x.disjoint_union(y).unwrap();
            prop_assert_eq!(z.size(), x.size() + y.size());
            prop_assert_eq!(z.from_binary_support(), x.from_binary_support() + y.from_binary_support());
            prop_assert_eq!(x.sym_diff(y).unwrap(), z);
        }

        #[test]
        fn fu_closure_is_duplicate_free(parts in proptest::collection::vec(0usize..6, 12)) {
            // assign each of 12 elements to one of up to 5 members (6 = unused)
            let n = u(12);
            let mut bits = [0u64; 6];
            for (e, p) in parts.iter().enumerate() {
                bits[*p] |= 1 << e;
            }
            let members: Vec<_> = bits[..5].iter().filter(|b| **b != 0)
                .map(|b| n.set_from_bits(*b).unwrap()).collect();
            prop_assume!(!members.is_empty());
            let fam = DisjointFamily::new(members).unwrap();
            let cl = fam.fu_closure().unwrap();
            prop_assert_eq!(cl.len(), (1 << fam.len()) - 1);
            let distinct: std::collections::HashSet<_> = cl.iter().map(|s| s.bits()).collect();
            prop_assert_eq!(distinct.len(), cl.len());
        }
    }
}

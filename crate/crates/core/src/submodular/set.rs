use std::fmt;

use serde::{Deserialize, Serialize};

/// Largest ground set representable as a bitmask.
pub const MAX_ITEMS: usize = 64;

/// Subset of a ground set, stored as a bitmask over item indices.
///
/// Iteration order is ascending index.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
#[serde(into = "Vec<usize>", from = "Vec<usize>")]
pub struct ItemSet(pub u64);

impl ItemSet {
    pub const EMPTY: ItemSet = ItemSet(0);

    pub fn full(n: usize) -> Self {
        debug_assert!(n <= MAX_ITEMS);
        if n == MAX_ITEMS {
            ItemSet(u64::MAX)
        } else {
            ItemSet((1u64 << n) - 1)
        }
    }

    pub fn singleton(i: usize) -> Self {
        ItemSet(1u64 << i)
    }

    pub fn bits(self) -> u64 {
        self.0
    }

    pub fn contains(self, i: usize) -> bool {
        i < MAX_ITEMS && self.0 >> i & 1 == 1
    }

    pub fn with(self, i: usize) -> Self {
        ItemSet(self.0 | 1u64 << i)
    }

    pub fn without(self, i: usize) -> Self {
        ItemSet(self.0 & !(1u64 << i))
    }

    pub fn insert(&mut self, i: usize) {
        self.0 |= 1u64 << i;
    }

    pub fn remove(&mut self, i: usize) {
        self.0 &= !(1u64 << i);
    }

    pub fn union(self, other: Self) -> Self {
        ItemSet(self.0 | other.0)
    }

    pub fn intersection(self, other: Self) -> Self {
        ItemSet(self.0 & other.0)
    }

    pub fn difference(self, other: Self) -> Self {
        ItemSet(self.0 & !other.0)
    }

    pub fn is_subset_of(self, other: Self) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    /// Highest index plus one, or 0 for the empty set.
    pub fn span(self) -> usize {
        (u64::BITS - self.0.leading_zeros()) as usize
    }

    pub fn iter(self) -> impl Iterator<Item = usize> {
        let mut bits = self.0;
        std::iter::from_fn(move || {
            if bits == 0 {
                return None;
            }
            let i = bits.trailing_zeros() as usize;
            bits &= bits - 1;
            Some(i)
        })
    }

    pub fn to_vec(self) -> Vec<usize> {
        self.iter().collect()
    }
}

impl FromIterator<usize> for ItemSet {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        let mut s = ItemSet::EMPTY;
        for i in iter {
            s.insert(i);
        }
        s
    }
}

impl From<ItemSet> for Vec<usize> {
    fn from(s: ItemSet) -> Self {
        s.to_vec()
    }
}

impl From<Vec<usize>> for ItemSet {
    fn from(v: Vec<usize>) -> Self {
        v.into_iter().collect()
    }
}

impl fmt::Debug for ItemSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

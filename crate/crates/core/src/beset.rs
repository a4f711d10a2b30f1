//! Fixed-width bit sets over a basic-event universe.

use std::fmt;

/// Largest supported universe. Complete datasets need `2^w` rows, so real
/// inference problems sit far below this.
pub const MAX_BES: usize = 128;

/// A set of basic events, stored as a bit mask indexed by universe position.
#[derive(Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BeSet(pub u128);

impl BeSet {
    pub const EMPTY: BeSet = BeSet(0);

    pub fn singleton(index: usize) -> Self {
        debug_assert!(index < MAX_BES);
        BeSet(1u128 << index)
    }

    /// The set `{0, .., width - 1}`.
    pub fn full(width: usize) -> Self {
        debug_assert!(width <= MAX_BES);
        if width == MAX_BES {
            BeSet(u128::MAX)
        } else {
            BeSet((1u128 << width) - 1)
        }
    }

    #[inline]
    pub fn contains(self, index: usize) -> bool {
        self.0 >> index & 1 == 1
    }

    #[inline]
    pub fn insert(&mut self, index: usize) {
        self.0 |= 1u128 << index;
    }

    #[inline]
    pub fn remove(&mut self, index: usize) {
        self.0 &= !(1u128 << index);
    }

    #[inline]
    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    #[inline]
    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    #[inline]
    pub fn union(self, other: BeSet) -> BeSet {
        BeSet(self.0 | other.0)
    }

    #[inline]
    pub fn intersection(self, other: BeSet) -> BeSet {
        BeSet(self.0 & other.0)
    }

    #[inline]
    pub fn is_subset(self, other: BeSet) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn iter(self) -> impl Iterator<Item = usize> {
        let mut bits = self.0;
        std::iter::from_fn(move || {
            if bits == 0 {
                None
            } else {
                let i = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                Some(i)
            }
        })
    }

    /// Key that orders sets of the same width lexicographically by their
    /// 0/1 vector `[b0, b1, .., b(w-1)]`.
    #[inline]
    pub fn lex_key(self) -> u128 {
        self.0.reverse_bits()
    }
}

impl fmt::Debug for BeSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

impl FromIterator<usize> for BeSet {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        let mut set = BeSet::EMPTY;
        for i in iter {
            set.insert(i);
        }
        set
    }
}

//! Pair indices `N_ik` of the triangular algebra and their flat ordering.
//!
//! Pairs are 1-based (`1 <= i < k <= n`); flat positions are 0-based. The
//! flat order lists the first superdiagonal, then the second, and so on:
//! `N_12, N_23, ..., N_(n-1)n, N_13, ..., N_1n`. Within a superdiagonal the
//! row index increases.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PairIdx {
    pub i: usize,
    pub k: usize,
}

impl PairIdx {
    pub const fn new(i: usize, k: usize) -> Self {
        Self { i, k }
    }

    /// Superdiagonal distance `k - i`.
    pub fn distance(&self) -> usize {
        self.k.saturating_sub(self.i)
    }

    pub fn is_valid(&self, n: usize) -> bool {
        1 <= self.i && self.i < self.k && self.k <= n
    }

    /// Compact label such as `12` or `1_10` (the latter once an index has two digits).
    pub fn label(&self) -> String {
        if self.i < 10 && self.k < 10 {
            format!("{}{}", self.i, self.k)
        } else {
            format!("{}_{}", self.i, self.k)
        }
    }

    /// Generators `p(p+1)` whose sum gives the diagonal entry of this pair.
    pub fn covers(&self, p: usize) -> bool {
        self.i <= p && p < self.k
    }
}

impl fmt::Display for PairIdx {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.i, self.k)
    }
}

/// `n(n-1)/2`.
pub fn tn_dim(n: usize) -> usize {
    n * n.saturating_sub(1) / 2
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BasisOrder {
    n: usize,
    pairs: Vec<PairIdx>,
    // row-major (i-1)*n + (k-1) -> flat position
    lookup: Vec<Option<usize>>,
}

impl BasisOrder {
    pub fn new(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::SizeTooSmall { n, min: 2, what: "a pair basis" });
        }
        let mut pairs = Vec::with_capacity(tn_dim(n));
        for d in 1..n {
            for i in 1..=n - d {
                pairs.push(PairIdx::new(i, i + d));
            }
        }
        let mut lookup = vec![None; n * n];
        for (idx, p) in pairs.iter().enumerate() {
            lookup[(p.i - 1) * n + (p.k - 1)] = Some(idx);
        }
        Ok(Self { n, pairs, lookup })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// `r = n(n-1)/2`.
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn pairs(&self) -> &[PairIdx] {
        &self.pairs
    }

    pub fn pair_to_index(&self, p: PairIdx) -> Result<usize> {
        if !p.is_valid(self.n) {
            return Err(Error::InvalidPair { pair: p, n: self.n });
        }
        Ok(self.lookup[(p.i - 1) * self.n + (p.k - 1)].expect("valid pairs are tabulated"))
    }

    pub fn index_to_pair(&self, idx: usize) -> Result<PairIdx> {
        self.pairs.get(idx).copied().ok_or(Error::IndexOutOfRange {
            idx,
            n: self.n,
            r: self.len(),
        })
    }

    /// Flat position of `(i,k)`; panics on an invalid pair.
    pub fn idx(&self, i: usize, k: usize) -> usize {
        self.pair_to_index(PairIdx::new(i, k))
            .unwrap_or_else(|e| panic!("{e}"))
    }

    /// Flat position of `(i,k)` when it is a valid pair.
    pub fn try_idx(&self, i: usize, k: usize) -> Option<usize> {
        let p = PairIdx::new(i, k);
        p.is_valid(self.n).then(|| self.lookup[(i - 1) * self.n + (k - 1)].unwrap())
    }

    pub fn pair(&self, idx: usize) -> PairIdx {
        self.pairs[idx]
    }

    /// Position of the central element `N_1n`.
    pub fn top(&self) -> usize {
        self.len() - 1
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn n4_order_matches_column_vector() {
        let o = BasisOrder::new(4).unwrap();
        let expected = [(1, 2), (2, 3), (3, 4), (1, 3), (2, 4), (1, 4)];
        for (idx, (i, k)) in expected.into_iter().enumerate() {
            assert_eq!(o.pair_to_index(PairIdx::new(i, k)).unwrap(), idx);
            assert_eq!(o.index_to_pair(idx).unwrap(), PairIdx::new(i, k));
        }
    }

    #[test]
    fn enumerated_positions() {
        // oracle: list pairs by (k-i, i) and read positions
        let brute = |n: usize| {
            let mut v: Vec<PairIdx> = (1..=n)
                .flat_map(|i| (i + 1..=n).map(move |k| PairIdx::new(i, k)))
                .collect();
            v.sort_by_key(|p| (p.k - p.i, p.i));
            v
        };
        let o5 = BasisOrder::new(5).unwrap();
        assert_eq!(o5.pair_to_index(PairIdx::new(1, 2)).unwrap(), 0);
        let b5 = brute(5);
        assert_eq!(b5.iter().position(|p| *p == PairIdx::new(1, 5)), Some(9));
        assert_eq!(o5.pair_to_index(PairIdx::new(1, 5)).unwrap(), 9);
        let b6 = brute(6);
        assert_eq!(b6[14], PairIdx::new(1, 6));
        assert_eq!(BasisOrder::new(6).unwrap().index_to_pair(14).unwrap(), PairIdx::new(1, 6));
    }

    #[test]
    fn invalid_inputs() {
        let o = BasisOrder::new(4).unwrap();
        let err = o.pair_to_index(PairIdx::new(3, 2)).unwrap_err();
        assert!(err.to_string().contains("(3,2)"));
        assert!(o.pair_to_index(PairIdx::new(1, 5)).is_err());
        assert!(o.pair_to_index(PairIdx::new(0, 2)).is_err());
        assert!(o.index_to_pair(6).is_err());
    }

    #[test]
    fn round_trip_and_monotone() {
        for n in 3..=10 {
            let o = BasisOrder::new(n).unwrap();
            assert_eq!(o.len(), tn_dim(n));
            for idx in 0..o.len() {
                let p = o.index_to_pair(idx).unwrap();
                assert_eq!(o.pair_to_index(p).unwrap(), idx);
            }
            for w in o.pairs().windows(2) {
                assert!((w[0].distance(), w[0].i) < (w[1].distance(), w[1].i));
            }
            assert_eq!(o.pair(o.top()), PairIdx::new(1, n));
        }
    }
}

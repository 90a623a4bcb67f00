//! Fixed-magnetization sector bases.
//!
//! The Hamiltonian conserves total `S_z`, so the 2^N spin space splits into
//! sectors of fixed up-spin count. A sector basis enumerates its bit
//! patterns in increasing integer order and ranks them back by
//! combinatorial (lexicographic) ranking rather than a hash map, which
//! keeps the matvec hot loop cache-friendly and allocation-free.
//!
//! Bit convention: bit `i` of a [`BasisState`] set means spin `i` is up.

use thiserror::Error;

/// Largest supported site count; sector dimensions beyond this are outside
/// desk scale anyway.
pub const MAX_SITES: usize = 32;

/// One computational basis ket as a bit pattern.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BasisState(pub u64);

impl BasisState {
    #[inline]
    pub fn spin_up(self, site: usize) -> bool {
        (self.0 >> site) & 1 == 1
    }

    /// Z eigenvalue of the given spin: +1 up, −1 down.
    #[inline]
    pub fn z(self, site: usize) -> f64 {
        if self.spin_up(site) {
            1.0
        } else {
            -1.0
        }
    }

    #[inline]
    pub fn popcount(self) -> usize {
        self.0.count_ones() as usize
    }

    /// All spins flipped within the low `n_sites` bits.
    #[inline]
    pub fn flipped(self, n_sites: usize) -> BasisState {
        BasisState(!self.0 & mask(n_sites))
    }

    /// Bits rearranged so bit `i` moves to `perm[i]`.
    pub fn permuted(self, perm: &[usize]) -> BasisState {
        let mut out = 0u64;
        let mut bits = self.0;
        while bits != 0 {
            let i = bits.trailing_zeros() as usize;
            out |= 1 << perm[i];
            bits &= bits - 1;
        }
        BasisState(out)
    }
}

#[inline]
pub fn mask(n_sites: usize) -> u64 {
    if n_sites == 64 {
        !0
    } else {
        (1u64 << n_sites) - 1
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum BasisError {
    #[error("n_up = {n_up} outside [0, {n_sites}]")]
    BadFilling { n_sites: usize, n_up: usize },
    #[error("n_sites = {0} exceeds the supported maximum {MAX_SITES}")]
    TooManySites(usize),
    #[error("state {state:#b} has popcount {actual}, sector expects {expected}")]
    WrongPopcount { state: u64, actual: usize, expected: usize },
}

/// Enumerated basis of one fixed-`n_up` sector with O(popcount) rank lookup.
#[derive(Debug, Clone)]
pub struct SectorBasis {
    n_sites: usize,
    n_up: usize,
    states: Vec<u64>,
    /// `binom[p*(n_up+1) + k]` = C(p, k), p ≤ n_sites, k ≤ n_up
    binom: Vec<u64>,
}

impl SectorBasis {
    /// Enumerate all C(n_sites, n_up) patterns in increasing order.
    pub fn new(n_sites: usize, n_up: usize) -> Result<SectorBasis, BasisError> {
        if n_sites > MAX_SITES {
            return Err(BasisError::TooManySites(n_sites));
        }
        if n_up > n_sites {
            return Err(BasisError::BadFilling { n_sites, n_up });
        }
        let dim = binomial(n_sites, n_up);
        let mut states = Vec::with_capacity(dim as usize);
        if n_up == 0 {
            states.push(0);
        } else {
            // Gosper's hack: next larger integer with the same popcount
            let mut v: u64 = (1 << n_up) - 1;
            let limit = mask(n_sites);
            while v <= limit {
                states.push(v);
                let t = v | (v - 1);
                let next = (t + 1) | (((!t & (t + 1)) - 1) >> (v.trailing_zeros() + 1));
                if next <= v {
                    break;
                }
                v = next;
            }
        }
        debug_assert_eq!(states.len() as u64, dim);
        let cols = n_up + 1;
        let mut binom = vec![0u64; (n_sites + 1) * cols];
        for p in 0..=n_sites {
            for k in 0..=n_up.min(p) {
                binom[p * cols + k] = binomial(p, k);
            }
        }
        Ok(SectorBasis { n_sites, n_up, states, binom })
    }

    #[inline]
    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    #[inline]
    pub fn n_up(&self) -> usize {
        self.n_up
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.states.len()
    }

    #[inline]
    pub fn state(&self, rank: usize) -> BasisState {
        BasisState(self.states[rank])
    }

    pub fn states(&self) -> impl Iterator<Item = BasisState> + '_ {
        self.states.iter().map(|&s| BasisState(s))
    }

    /// Index of `state` in this sector; inverse of [`SectorBasis::state`].
    pub fn rank_of(&self, state: BasisState) -> Result<usize, BasisError> {
        let actual = state.popcount();
        if actual != self.n_up || state.0 & !mask(self.n_sites) != 0 {
            return Err(BasisError::WrongPopcount {
                state: state.0,
                actual,
                expected: self.n_up,
            });
        }
        Ok(self.rank_unchecked(state))
    }

    /// Rank lookup for in-sector states; the matvec hot path.
    ///
    /// Counts, per set bit scanned from the top, the patterns that agree
    /// above it and keep it clear.
    #[inline]
    pub fn rank_unchecked(&self, state: BasisState) -> usize {
        debug_assert_eq!(state.popcount(), self.n_up);
        let cols = self.n_up + 1;
        let mut rank = 0u64;
        let mut remaining = self.n_up;
        let mut bits = state.0;
        while bits != 0 {
            let p = 63 - bits.leading_zeros() as usize;
            rank += self.binom[p * cols + remaining];
            remaining -= 1;
            bits &= !(1u64 << p);
        }
        rank as usize
    }
}

/// C(n, k) in u64; exact for n ≤ 64 where the result fits.
pub fn binomial(n: usize, k: usize) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc as u64
}

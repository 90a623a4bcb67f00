//! Many-body state vectors over either a fixed-`S_z` sector basis or the
//! full 2^N space.
//!
//! Observables and reduced densities are written against [`SpinState`] so
//! the same code measures sector-restricted eigenvectors (the production
//! path) and full-space vectors (needed for states that mix sectors, e.g.
//! globally rotated ones in the SU(2)-covariance checks).

use std::sync::Arc;

use ndarray::Array1;
use num_complex::Complex64 as C64;

use crate::hilbert::{mask, BasisState, SectorBasis};

/// Read/accumulate access to a state's amplitudes by bit pattern.
pub trait SpinState {
    fn n_sites(&self) -> usize;

    /// Number of stored amplitudes.
    fn len(&self) -> usize;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// The `idx`-th stored (bit pattern, amplitude) entry.
    fn entry(&self, idx: usize) -> (BasisState, C64);

    /// Amplitude of an arbitrary bit pattern (zero when unrepresentable).
    fn amplitude(&self, bits: BasisState) -> C64;

    /// Accumulate onto an amplitude. Panics if the pattern cannot be
    /// represented (an operator left the sector — a contract violation for
    /// every operator used here, all of which conserve `S_z`).
    fn accumulate(&mut self, bits: BasisState, amp: C64);

    /// Same shape, all amplitudes zero.
    fn zero_like(&self) -> Self
    where
        Self: Sized;

    fn norm(&self) -> f64 {
        (0..self.len())
            .map(|i| self.entry(i).1.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }
}

/// ⟨a|b⟩ with the conjugate on `a`.
pub fn inner<S: SpinState>(a: &S, b: &S) -> C64 {
    debug_assert_eq!(a.n_sites(), b.n_sites());
    let mut acc = C64::new(0.0, 0.0);
    for i in 0..b.len() {
        let (bits, amp) = b.entry(i);
        if amp != C64::new(0.0, 0.0) {
            acc += a.amplitude(bits).conj() * amp;
        }
    }
    acc
}

/// Amplitudes over one fixed-magnetization sector.
#[derive(Debug, Clone)]
pub struct SectorVector {
    pub basis: Arc<SectorBasis>,
    pub amps: Array1<C64>,
}

impl SectorVector {
    pub fn new(basis: Arc<SectorBasis>, amps: Array1<C64>) -> Self {
        assert_eq!(basis.dim(), amps.len());
        SectorVector { basis, amps }
    }

    pub fn n_up(&self) -> usize {
        self.basis.n_up()
    }

    /// The same physical state with every spin flipped, expressed in the
    /// mirror sector `N − n_up`.
    pub fn spin_flipped(&self) -> SectorVector {
        let n = self.basis.n_sites();
        let flipped = Arc::new(
            SectorBasis::new(n, n - self.basis.n_up()).expect("mirror sector exists"),
        );
        let mut amps = Array1::zeros(flipped.dim());
        for (i, amp) in self.amps.iter().enumerate() {
            let t = self.basis.state(i).flipped(n);
            amps[flipped.rank_unchecked(t)] = *amp;
        }
        SectorVector { basis: flipped, amps }
    }

    /// Basis states permuted by a site permutation (`perm[i]` is where site
    /// `i` moves); used for lattice translations.
    pub fn site_permuted(&self, perm: &[usize]) -> SectorVector {
        let mut amps = Array1::zeros(self.basis.dim());
        for (i, amp) in self.amps.iter().enumerate() {
            let t = self.basis.state(i).permuted(perm);
            amps[self.basis.rank_unchecked(t)] = *amp;
        }
        SectorVector { basis: Arc::clone(&self.basis), amps }
    }
}

impl SpinState for SectorVector {
    fn n_sites(&self) -> usize {
        self.basis.n_sites()
    }

    fn len(&self) -> usize {
        self.amps.len()
    }

    fn entry(&self, idx: usize) -> (BasisState, C64) {
        (self.basis.state(idx), self.amps[idx])
    }

    fn amplitude(&self, bits: BasisState) -> C64 {
        if bits.popcount() == self.basis.n_up() {
            self.amps[self.basis.rank_unchecked(bits)]
        } else {
            C64::new(0.0, 0.0)
        }
    }

    fn accumulate(&mut self, bits: BasisState, amp: C64) {
        assert_eq!(
            bits.popcount(),
            self.basis.n_up(),
            "operator left the S_z sector"
        );
        self.amps[self.basis.rank_unchecked(bits)] += amp;
    }

    fn zero_like(&self) -> Self {
        SectorVector {
            basis: Arc::clone(&self.basis),
            amps: Array1::zeros(self.amps.len()),
        }
    }
}

/// Dense amplitudes over the full 2^N space, indexed by bit pattern.
#[derive(Debug, Clone)]
pub struct FullVector {
    pub n_sites: usize,
    pub amps: Array1<C64>,
}

impl FullVector {
    pub fn new(n_sites: usize, amps: Array1<C64>) -> Self {
        assert_eq!(amps.len(), 1usize << n_sites);
        FullVector { n_sites, amps }
    }

    pub fn zeros(n_sites: usize) -> Self {
        FullVector { n_sites, amps: Array1::zeros(1usize << n_sites) }
    }

    /// Embed a sector vector into the full space.
    pub fn from_sector(v: &SectorVector) -> Self {
        let mut out = FullVector::zeros(v.basis.n_sites());
        for (i, amp) in v.amps.iter().enumerate() {
            out.amps[v.basis.state(i).0 as usize] = *amp;
        }
        out
    }
}

impl SpinState for FullVector {
    fn n_sites(&self) -> usize {
        self.n_sites
    }

    fn len(&self) -> usize {
        self.amps.len()
    }

    fn entry(&self, idx: usize) -> (BasisState, C64) {
        (BasisState(idx as u64), self.amps[idx])
    }

    fn amplitude(&self, bits: BasisState) -> C64 {
        debug_assert_eq!(bits.0 & !mask(self.n_sites), 0);
        self.amps[bits.0 as usize]
    }

    fn accumulate(&mut self, bits: BasisState, amp: C64) {
        self.amps[bits.0 as usize] += amp;
    }

    fn zero_like(&self) -> Self {
        FullVector::zeros(self.n_sites)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn basis(n: usize, n_up: usize) -> Arc<SectorBasis> {
        Arc::new(SectorBasis::new(n, n_up).unwrap())
    }

    #[test]
    fn sector_amplitude_lookup() {
        let b = basis(4, 2);
        let mut amps = Array1::zeros(b.dim());
        amps[1] = C64::new(0.5, -0.25); // state 0b0101
        let v = SectorVector::new(b, amps);
        assert_eq!(v.amplitude(BasisState(0b0101)), C64::new(0.5, -0.25));
        assert_eq!(v.amplitude(BasisState(0b0111)), C64::new(0.0, 0.0));
    }

    #[test]
    fn spin_flip_round_trip() {
        let b = basis(5, 2);
        let mut amps = Array1::zeros(b.dim());
        for i in 0..b.dim() {
            amps[i] = C64::new(i as f64, -(i as f64));
        }
        let v = SectorVector::new(b, amps.clone());
        let back = v.spin_flipped().spin_flipped();
        assert_eq!(back.amps, amps);
    }

    #[test]
    fn embedding_preserves_inner_products() {
        let b = basis(4, 2);
        let mut amps = Array1::zeros(b.dim());
        amps[0] = C64::new(0.6, 0.0);
        amps[3] = C64::new(0.0, 0.8);
        let v = SectorVector::new(b, amps);
        let f = FullVector::from_sector(&v);
        let d = inner(&v, &v) - inner(&f, &f);
        assert!(d.norm() < 1e-15);
    }
}

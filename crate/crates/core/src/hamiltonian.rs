//! Sector-restricted assembly of
//!
//! ```text
//! H(λ) = − Σ_bonds J_ij σ⃗_i·σ⃗_j  +  λ Σ_plaq X_ijk σ⃗_i·(σ⃗_j × σ⃗_k)
//! ```
//!
//! and its matrix-vector product.
//!
//! The Heisenberg pair works through the swap identity
//! `σ⃗_i·σ⃗_j = 2·SWAP_ij − 1`: diagonal ±1 by spin alignment plus amplitude
//! 2 to the bit-swapped state. The chiral triple is applied through its
//! three `S_z`-conserving antisymmetric blocks
//!
//! ```text
//! σ⃗_i·(σ⃗_j × σ⃗_k) = Z_i A_jk − Z_j A_ik + Z_k A_ij,
//! A_ab = X_a Y_b − Y_a X_b = 2i (σ⁺_a σ⁻_b − σ⁻_a σ⁺_b),
//! ```
//!
//! so no intermediate Pauli string ever leaves the magnetization sector.
//! Everything is complex: the chiral term is imaginary in the computational
//! basis.
//!
//! Operators are Hermitian by construction; each stored row holds
//! `H[r, c] = conj(⟨c|H|r⟩)` from the ket application on the row state.
//! Explicit sparse storage is used up to a nonzero budget and a matrix-free
//! term-streaming backend past it, behind the same `matvec` contract.

use std::sync::Arc;

use arrayvec::ArrayVec;
use ndarray::Array1;
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use thiserror::Error;

use crate::hilbert::{BasisState, BasisError, SectorBasis};
use crate::lattice::LatticeSpec;

/// Explicit-storage budget: beyond this many nonzeros, assembly switches to
/// the matrix-free backend.
pub const DEFAULT_MAX_EXPLICIT_NNZ: usize = 1 << 26;

/// σ⃗_i·σ⃗_j applied to one basis ket.
///
/// Aligned pair: `{(s, +1)}`. Anti-aligned: `{(s, −1), (swap(s), +2)}`.
#[inline]
pub fn heisenberg_apply(i: usize, j: usize, s: BasisState) -> ArrayVec<(BasisState, C64), 2> {
    let mut out = ArrayVec::new();
    if s.spin_up(i) == s.spin_up(j) {
        out.push((s, C64::new(1.0, 0.0)));
    } else {
        out.push((s, C64::new(-1.0, 0.0)));
        let t = BasisState(s.0 ^ ((1 << i) | (1 << j)));
        out.push((t, C64::new(2.0, 0.0)));
    }
    out
}

/// σ⃗_i·(σ⃗_j × σ⃗_k) applied to one basis ket; purely off-diagonal, at most
/// one exchange per antisymmetric block, total `S_z` conserved.
#[inline]
pub fn chiral_apply(i: usize, j: usize, k: usize, s: BasisState) -> ArrayVec<(BasisState, C64), 3> {
    let mut out = ArrayVec::new();
    for (a, b, z) in [(j, k, s.z(i)), (i, k, -s.z(j)), (i, j, s.z(k))] {
        let (ua, ub) = (s.spin_up(a), s.spin_up(b));
        if ua != ub {
            let t = BasisState(s.0 ^ ((1 << a) | (1 << b)));
            // A_ab: +2i for σ⁺_a σ⁻_b, −2i for σ⁻_a σ⁺_b
            let amp = if ub { C64::new(0.0, 2.0 * z) } else { C64::new(0.0, -2.0 * z) };
            out.push((t, amp));
        }
    }
    out
}

/// Precompiled coupling terms of one `H(λ)`.
#[derive(Debug, Clone)]
pub struct TermTable {
    bonds: Vec<(usize, usize, f64)>, // (i, j, −J)
    chirals: Vec<(usize, usize, usize, f64)>, // (i, j, k, λ·X)
}

impl TermTable {
    pub fn new(spec: &LatticeSpec, lambda: f64) -> TermTable {
        let bonds = spec
            .bonds
            .iter()
            .map(|b| (b.i, b.j, -f64::from(b.sign)))
            .collect();
        let chirals = if lambda == 0.0 {
            Vec::new()
        } else {
            spec.plaquettes
                .iter()
                .map(|p| (p.i, p.j, p.k, lambda * f64::from(p.sign)))
                .collect()
        };
        TermTable { bonds, chirals }
    }

    /// Ket application `H|s⟩`, emitted as `(t, ⟨t|H|s⟩)` pairs with the
    /// diagonal folded into a single entry.
    #[inline]
    fn ket_apply(&self, s: BasisState, mut emit: impl FnMut(BasisState, C64)) {
        let mut diag = 0.0;
        for &(i, j, minus_j) in &self.bonds {
            if s.spin_up(i) == s.spin_up(j) {
                diag += minus_j;
            } else {
                diag -= minus_j;
                let t = BasisState(s.0 ^ ((1 << i) | (1 << j)));
                emit(t, C64::new(2.0 * minus_j, 0.0));
            }
        }
        emit(s, C64::new(diag, 0.0));
        for &(i, j, k, coeff) in &self.chirals {
            for (t, amp) in chiral_apply(i, j, k, s) {
                emit(t, coeff * amp);
            }
        }
    }

    /// Upper bound on nonzeros per row.
    fn row_width(&self) -> usize {
        1 + self.bonds.len() + 3 * self.chirals.len()
    }
}

/// Sector label plus couplings: everything `assemble` needs.
#[derive(Debug, Clone, Copy)]
pub struct AssemblyRequest<'a> {
    pub spec: &'a LatticeSpec,
    pub lambda: f64,
    pub n_up: usize,
}

#[derive(Debug, Error)]
pub enum AssembleError {
    #[error(transparent)]
    Basis(#[from] BasisError),
    #[error("coupling λ must be finite, got {0}")]
    NonFiniteLambda(f64),
}

enum OpKind {
    Csr {
        row_ptr: Vec<usize>,
        cols: Vec<u32>,
        vals: Vec<C64>,
    },
    MatrixFree {
        terms: TermTable,
        basis: Arc<SectorBasis>,
    },
}

/// Hermitian sector-restricted operator with a parallel, deterministic
/// matrix-vector product.
pub struct SparseOperator {
    dim: usize,
    kind: OpKind,
}

/// Assemble with the default explicit-storage budget.
pub fn assemble(req: AssemblyRequest) -> Result<SparseOperator, AssembleError> {
    assemble_with_budget(req, DEFAULT_MAX_EXPLICIT_NNZ)
}

/// Assemble, streaming terms instead of storing them once the estimated
/// nonzero count exceeds `max_explicit_nnz`.
pub fn assemble_with_budget(
    req: AssemblyRequest,
    max_explicit_nnz: usize,
) -> Result<SparseOperator, AssembleError> {
    if !req.lambda.is_finite() {
        return Err(AssembleError::NonFiniteLambda(req.lambda));
    }
    let basis = Arc::new(SectorBasis::new(req.spec.n_sites, req.n_up)?);
    assemble_on_basis(req.spec, req.lambda, basis, max_explicit_nnz)
}

/// Assemble on a shared, pre-built sector basis.
pub fn assemble_on_basis(
    spec: &LatticeSpec,
    lambda: f64,
    basis: Arc<SectorBasis>,
    max_explicit_nnz: usize,
) -> Result<SparseOperator, AssembleError> {
    if !lambda.is_finite() {
        return Err(AssembleError::NonFiniteLambda(lambda));
    }
    let terms = TermTable::new(spec, lambda);
    let dim = basis.dim();
    if dim.saturating_mul(terms.row_width()) > max_explicit_nnz {
        return Ok(SparseOperator { dim, kind: OpKind::MatrixFree { terms, basis } });
    }

    // row r holds conj of the ket application on its basis state; colliding
    // columns (bond swap and chiral exchange on the same pair) are merged
    let rows: Vec<Vec<(u32, C64)>> = (0..dim)
        .into_par_iter()
        .map(|r| {
            let s = basis.state(r);
            let mut row: Vec<(u32, C64)> = Vec::with_capacity(terms.row_width());
            terms.ket_apply(s, |t, a| {
                let c = basis
                    .rank_of(t)
                    .expect("assembly produced an out-of-sector state: [H, S_z] violated");
                row.push((c as u32, a.conj()));
            });
            row.sort_unstable_by_key(|&(c, _)| c);
            let mut merged: Vec<(u32, C64)> = Vec::with_capacity(row.len());
            for (c, v) in row {
                match merged.last_mut() {
                    Some((lc, lv)) if *lc == c => *lv += v,
                    _ => merged.push((c, v)),
                }
            }
            merged.retain(|&(_, v)| v != C64::new(0.0, 0.0));
            merged
        })
        .collect();

    let mut row_ptr = Vec::with_capacity(dim + 1);
    row_ptr.push(0);
    let mut nnz = 0;
    for row in &rows {
        nnz += row.len();
        row_ptr.push(nnz);
    }
    let mut cols = Vec::with_capacity(nnz);
    let mut vals = Vec::with_capacity(nnz);
    for row in rows {
        for (c, v) in row {
            cols.push(c);
            vals.push(v);
        }
    }
    Ok(SparseOperator { dim, kind: OpKind::Csr { row_ptr, cols, vals } })
}

impl SparseOperator {
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// All operators assembled here are Hermitian.
    pub fn hermitian(&self) -> bool {
        true
    }

    pub fn is_matrix_free(&self) -> bool {
        matches!(self.kind, OpKind::MatrixFree { .. })
    }

    /// Stored nonzeros (CSR) or the per-row streaming bound (matrix-free).
    pub fn nnz(&self) -> usize {
        match &self.kind {
            OpKind::Csr { vals, .. } => vals.len(),
            OpKind::MatrixFree { terms, .. } => self.dim * terms.row_width(),
        }
    }

    /// `y = H·x`. Rows are computed independently (and in parallel); each
    /// row sum is sequential, so the result is deterministic.
    pub fn matvec_into(&self, x: &[C64], y: &mut [C64]) {
        assert_eq!(x.len(), self.dim, "matvec input length mismatch");
        assert_eq!(y.len(), self.dim, "matvec output length mismatch");
        match &self.kind {
            OpKind::Csr { row_ptr, cols, vals } => {
                y.par_iter_mut().enumerate().for_each(|(r, yr)| {
                    let mut acc = C64::new(0.0, 0.0);
                    for idx in row_ptr[r]..row_ptr[r + 1] {
                        acc += vals[idx] * x[cols[idx] as usize];
                    }
                    *yr = acc;
                });
            }
            OpKind::MatrixFree { terms, basis } => {
                y.par_iter_mut().enumerate().for_each(|(r, yr)| {
                    let s = basis.state(r);
                    let mut acc = C64::new(0.0, 0.0);
                    terms.ket_apply(s, |t, a| {
                        acc += a.conj() * x[basis.rank_unchecked(t)];
                    });
                    *yr = acc;
                });
            }
        }
    }

    pub fn matvec(&self, x: &Array1<C64>) -> Array1<C64> {
        let mut y = Array1::zeros(self.dim);
        self.matvec_into(
            x.as_slice().expect("contiguous input"),
            y.as_slice_mut().expect("contiguous output"),
        );
        y
    }

    /// Densify for the direct eigensolver path and small-system checks.
    pub fn to_dense(&self) -> faer::Mat<C64> {
        let mut m = faer::Mat::zeros(self.dim, self.dim);
        match &self.kind {
            OpKind::Csr { row_ptr, cols, vals } => {
                for r in 0..self.dim {
                    for idx in row_ptr[r]..row_ptr[r + 1] {
                        m[(r, cols[idx] as usize)] = vals[idx];
                    }
                }
            }
            OpKind::MatrixFree { terms, basis } => {
                for r in 0..self.dim {
                    terms.ket_apply(basis.state(r), |t, a| {
                        m[(r, basis.rank_unchecked(t))] += a.conj();
                    });
                }
            }
        }
        m
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::build_ladder_c;
    use approx::assert_abs_diff_eq;

    const SQRT3: f64 = 1.732_050_807_568_877_2;

    #[test]
    fn heisenberg_on_aligned_pair() {
        let out = heisenberg_apply(0, 1, BasisState(0b11));
        assert_eq!(out.len(), 1);
        assert_eq!(out[0], (BasisState(0b11), C64::new(1.0, 0.0)));
    }

    #[test]
    fn heisenberg_on_antialigned_pair() {
        // |↑↓⟩ = site0 up, site1 down = bits 0b01
        let out = heisenberg_apply(0, 1, BasisState(0b01));
        assert_eq!(out[0], (BasisState(0b01), C64::new(-1.0, 0.0)));
        assert_eq!(out[1], (BasisState(0b10), C64::new(2.0, 0.0)));
    }

    #[test]
    fn chiral_annihilates_polarized_triple() {
        assert!(chiral_apply(0, 1, 2, BasisState(0b111)).is_empty());
        assert!(chiral_apply(0, 1, 2, BasisState(0)).is_empty());
    }

    #[test]
    fn single_triangle_polarized_sector() {
        let spec = build_ladder_c(3).unwrap();
        let op = assemble(AssemblyRequest { spec: &spec, lambda: 0.0, n_up: 3 }).unwrap();
        assert_eq!(op.dim(), 1);
        let d = op.to_dense();
        assert_abs_diff_eq!(d[(0, 0)].re, -3.0, epsilon = 1e-14);
    }

    /// Full triangle spectrum across all sectors: {−3 ×4, 3−2√3λ ×2, 3+2√3λ ×2}.
    #[test]
    fn single_triangle_full_spectrum() {
        let spec = build_ladder_c(3).unwrap();
        let lambda = 0.7;
        let mut eigs = Vec::new();
        for n_up in 0..=3 {
            let op = assemble(AssemblyRequest { spec: &spec, lambda, n_up }).unwrap();
            let evd = op.to_dense().self_adjoint_eigen(faer::Side::Lower).unwrap();
            for i in 0..op.dim() {
                eigs.push(evd.S().column_vector()[i].re);
            }
        }
        eigs.sort_by(f64::total_cmp);
        let mut expect = vec![-3.0, -3.0, -3.0, -3.0];
        expect.extend([3.0 - 2.0 * SQRT3 * lambda; 2]);
        expect.extend([3.0 + 2.0 * SQRT3 * lambda; 2]);
        expect.sort_by(f64::total_cmp);
        for (a, b) in eigs.iter().zip(&expect) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-12);
        }
    }

    #[test]
    fn spectrum_even_in_lambda() {
        let spec = build_ladder_c(3).unwrap();
        for n_up in 0..=3 {
            let plus = assemble(AssemblyRequest { spec: &spec, lambda: 1.3, n_up }).unwrap();
            let minus = assemble(AssemblyRequest { spec: &spec, lambda: -1.3, n_up }).unwrap();
            let ep = plus.to_dense().self_adjoint_eigen(faer::Side::Lower).unwrap();
            let em = minus.to_dense().self_adjoint_eigen(faer::Side::Lower).unwrap();
            for i in 0..plus.dim() {
                assert_abs_diff_eq!(
                    ep.S().column_vector()[i].re,
                    em.S().column_vector()[i].re,
                    epsilon = 1e-12
                );
            }
        }
    }

    #[test]
    fn matvec_zero_and_hermitian_quadratic_form() {
        use rand::prelude::*;
        let spec = crate::lattice::build_ladder_a(8, true).unwrap();
        let op = assemble(AssemblyRequest { spec: &spec, lambda: 1.2, n_up: 4 }).unwrap();
        let zero = Array1::zeros(op.dim());
        assert!(op.matvec(&zero).iter().all(|v| *v == C64::new(0.0, 0.0)));

        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let v: Array1<C64> =
            Array1::from_shape_fn(op.dim(), |_| C64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5));
        let hv = op.matvec(&v);
        let q: C64 = v.iter().zip(hv.iter()).map(|(a, b)| a.conj() * b).sum();
        assert!(q.im.abs() < 1e-10 * q.norm().max(1.0));
    }

    #[test]
    fn matrix_free_matches_explicit() {
        use rand::prelude::*;
        let spec = crate::lattice::build_torus(2, 4).unwrap();
        let req = AssemblyRequest { spec: &spec, lambda: 0.9, n_up: 4 };
        let explicit = assemble(req).unwrap();
        let streaming = assemble_with_budget(req, 0).unwrap();
        assert!(!explicit.is_matrix_free());
        assert!(streaming.is_matrix_free());
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let v: Array1<C64> = Array1::from_shape_fn(explicit.dim(), |_| {
            C64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)
        });
        let a = explicit.matvec(&v);
        let b = streaming.matvec(&v);
        for (x, y) in a.iter().zip(b.iter()) {
            assert!((x - y).norm() < 1e-12);
        }
    }

    #[test]
    fn hermiticity_entrywise() {
        let spec = crate::lattice::build_ring(6).unwrap();
        let op = assemble(AssemblyRequest { spec: &spec, lambda: 2.4, n_up: 3 }).unwrap();
        let d = op.to_dense();
        for r in 0..op.dim() {
            for c in 0..op.dim() {
                let diff = (d[(r, c)] - d[(c, r)].conj()).norm();
                assert!(diff < 1e-14, "H[{r},{c}] not hermitian: {diff}");
            }
        }
    }

    #[test]
    fn rejects_non_finite_lambda() {
        let spec = build_ladder_c(3).unwrap();
        assert!(assemble(AssemblyRequest { spec: &spec, lambda: f64::NAN, n_up: 1 }).is_err());
    }
}

//! Lowest eigenpairs per sector and the aggregated ground manifold.
//!
//! Below a dimension threshold the sector matrix is densified and handed to
//! a direct solver. Above it, eigenpairs come from Krylov tridiagonalization
//! (Lanczos) with full reorthogonalization and restarts; degenerate
//! multiplets are resolved by sequential deflation — each converged
//! eigenvector is projected out of every later Krylov space, so the next run
//! converges to the remaining copy. Start vectors are seeded, which makes
//! eigenvector bases inside degenerate manifolds reproducible.

use std::sync::Arc;

use ndarray::Array1;
use num_complex::Complex64 as C64;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::hamiltonian::{assemble_on_basis, AssembleError, SparseOperator, DEFAULT_MAX_EXPLICIT_NNZ};
use crate::hilbert::{BasisError, SectorBasis};
use crate::lattice::LatticeSpec;
use crate::state::SectorVector;

#[derive(Debug, Clone)]
pub struct EigenOptions {
    /// Eigenpairs per solve (per sector in a manifold scan).
    pub k: usize,
    /// Residual tolerance: accept when ‖Hv − Ev‖ ≤ tol·max(1, |E|).
    pub tol: f64,
    /// Use the direct dense solver at or below this dimension.
    pub dense_threshold: usize,
    /// Krylov steps per restart cycle.
    pub max_krylov: usize,
    pub max_restarts: usize,
    /// Seed for start vectors.
    pub seed: u64,
}

impl Default for EigenOptions {
    fn default() -> Self {
        EigenOptions {
            k: 6,
            tol: 1e-10,
            dense_threshold: 4096,
            max_krylov: 220,
            max_restarts: 40,
            seed: 1,
        }
    }
}

#[derive(Debug, Error)]
pub enum SolveError {
    #[error("eigensolver did not converge: best residual {best_residual:.3e} at eigenvalue {eigenvalue:.6} (tolerance {tol:.3e})")]
    NotConverged {
        best_residual: f64,
        eigenvalue: f64,
        tol: f64,
    },
    #[error("requested k = {k} eigenpairs from a dimension-{dim} operator")]
    KTooLarge { k: usize, dim: usize },
    #[error(transparent)]
    Assemble(#[from] AssembleError),
    #[error(transparent)]
    Basis(#[from] BasisError),
}

/// The `k` smallest eigenpairs of a Hermitian sector operator, eigenvalues
/// ascending, eigenvectors orthonormal.
pub fn lowest_eigenpairs(
    op: &SparseOperator,
    opts: &EigenOptions,
) -> Result<Vec<(f64, Array1<C64>)>, SolveError> {
    let dim = op.dim();
    let k = opts.k;
    if k > dim {
        return Err(SolveError::KTooLarge { k, dim });
    }
    if k == 0 {
        return Ok(Vec::new());
    }
    if dim <= opts.dense_threshold {
        return Ok(dense_lowest(op, k));
    }
    let mut found: Vec<(f64, Array1<C64>)> = Vec::with_capacity(k);
    for idx in 0..k {
        let deflate: Vec<&Array1<C64>> = found.iter().map(|(_, v)| v).collect();
        let pair = lanczos_lowest(op, &deflate, opts, opts.seed ^ (idx as u64).wrapping_mul(0x9e37_79b9))?;
        found.push(pair);
    }
    found.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(found)
}

fn dense_lowest(op: &SparseOperator, k: usize) -> Vec<(f64, Array1<C64>)> {
    let dim = op.dim();
    let evd = op
        .to_dense()
        .self_adjoint_eigen(faer::Side::Lower)
        .expect("dense eigendecomposition failed");
    let s = evd.S().column_vector().to_owned();
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| s[a].re.total_cmp(&s[b].re));
    order
        .into_iter()
        .take(k)
        .map(|c| {
            let vec = Array1::from_shape_fn(dim, |r| evd.U()[(r, c)]);
            (s[c].re, vec)
        })
        .collect()
}

#[inline]
fn cdot(a: &Array1<C64>, b: &Array1<C64>) -> C64 {
    a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum()
}

fn norm(a: &Array1<C64>) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

/// Twice-iterated classical Gram-Schmidt against `basis` and `deflate`.
fn orthogonalize(w: &mut Array1<C64>, basis: &[Array1<C64>], deflate: &[&Array1<C64>]) {
    for _ in 0..2 {
        for v in basis.iter().chain(deflate.iter().copied()) {
            let c = cdot(v, w);
            if c != C64::new(0.0, 0.0) {
                w.scaled_add(-c, v);
            }
        }
    }
}

/// Smallest eigenpair of the complement of `deflate`, by restarted Lanczos.
fn lanczos_lowest(
    op: &SparseOperator,
    deflate: &[&Array1<C64>],
    opts: &EigenOptions,
    seed: u64,
) -> Result<(f64, Array1<C64>), SolveError> {
    let dim = op.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut v0 = random_vector(dim, &mut rng);
    orthogonalize(&mut v0, &[], deflate);
    let mut n0 = norm(&v0);
    while n0 < 1e-8 {
        v0 = random_vector(dim, &mut rng);
        orthogonalize(&mut v0, &[], deflate);
        n0 = norm(&v0);
    }
    v0.mapv_inplace(|x| x / n0);

    let mut best: Option<(f64, Array1<C64>, f64)> = None; // (theta, x, residual)
    for _restart in 0..opts.max_restarts {
        let mut basis: Vec<Array1<C64>> = vec![v0.clone()];
        let mut alphas: Vec<f64> = Vec::new();
        let mut betas: Vec<f64> = Vec::new();

        for step in 0..opts.max_krylov.min(dim) {
            let vj = basis.last().expect("nonempty Krylov basis");
            let mut w = op.matvec(vj);
            let alpha = cdot(vj, &w).re;
            alphas.push(alpha);
            w.scaled_add(C64::new(-alpha, 0.0), vj);
            if let Some(&beta_prev) = betas.last() {
                let prev = &basis[basis.len() - 2];
                w.scaled_add(C64::new(-beta_prev, 0.0), prev);
            }
            orthogonalize(&mut w, &basis, deflate);
            let beta = norm(&w);

            let m = alphas.len();
            let check_now = beta < 1e-13 || m == opts.max_krylov.min(dim) || (m >= 4 && step % 4 == 3);
            if check_now {
                let (theta, y) = tridiag_smallest(&alphas, &betas);
                let est = if beta < 1e-13 { 0.0 } else { (beta * y[m - 1]).abs() };
                let coarse_ok = est <= 0.5 * opts.tol * theta.abs().max(1.0) || beta < 1e-13;
                if coarse_ok {
                    let mut x: Array1<C64> = Array1::zeros(dim);
                    for (v, &c) in basis.iter().zip(y.iter()) {
                        x.scaled_add(C64::new(c, 0.0), v);
                    }
                    orthogonalize(&mut x, &[], deflate);
                    let nx = norm(&x);
                    if nx > 1e-12 {
                        x.mapv_inplace(|t| t / nx);
                        let hx = op.matvec(&x);
                        let theta_true = cdot(&x, &hx).re;
                        let mut r = hx;
                        r.scaled_add(C64::new(-theta_true, 0.0), &x);
                        let res = norm(&r);
                        if best.as_ref().is_none_or(|(_, _, br)| res < *br) {
                            best = Some((theta_true, x.clone(), res));
                        }
                        if res <= opts.tol * theta_true.abs().max(1.0) {
                            let (theta, x, _) = best.expect("just set");
                            return Ok((theta, x));
                        }
                        if beta < 1e-13 {
                            // Krylov space exhausted: this is as good as it gets
                            let (theta, x, res) = best.clone().expect("just set");
                            if res <= opts.tol * theta.abs().max(1.0) {
                                return Ok((theta, x));
                            }
                        }
                    }
                }
            }
            if beta < 1e-13 {
                break;
            }
            betas.push(beta);
            w.mapv_inplace(|x| x / beta);
            basis.push(w);
        }

        // restart from the best Ritz vector of this cycle
        let (theta, y) = tridiag_smallest(&alphas, &betas);
        let _ = theta;
        let mut x: Array1<C64> = Array1::zeros(dim);
        for (v, &c) in basis.iter().zip(y.iter()) {
            x.scaled_add(C64::new(c, 0.0), v);
        }
        orthogonalize(&mut x, &[], deflate);
        let nx = norm(&x);
        if nx > 1e-12 {
            x.mapv_inplace(|t| t / nx);
            v0 = x;
        } else {
            v0 = random_vector(dim, &mut rng);
            orthogonalize(&mut v0, &[], deflate);
            let n = norm(&v0);
            v0.mapv_inplace(|t| t / n);
        }
    }

    match best {
        Some((theta, x, res)) if res <= opts.tol * theta.abs().max(1.0) => Ok((theta, x)),
        Some((theta, _, res)) => Err(SolveError::NotConverged {
            best_residual: res,
            eigenvalue: theta,
            tol: opts.tol * theta.abs().max(1.0),
        }),
        None => Err(SolveError::NotConverged {
            best_residual: f64::INFINITY,
            eigenvalue: f64::NAN,
            tol: opts.tol,
        }),
    }
}

fn random_vector(dim: usize, rng: &mut ChaCha8Rng) -> Array1<C64> {
    Array1::from_shape_fn(dim, |_| C64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
}

/// Smallest eigenpair of the symmetric tridiagonal Krylov matrix.
fn tridiag_smallest(alphas: &[f64], betas: &[f64]) -> (f64, Vec<f64>) {
    let m = alphas.len();
    if m == 1 {
        return (alphas[0], vec![1.0]);
    }
    let t = faer::Mat::from_fn(m, m, |r, c| {
        if r == c {
            alphas[r]
        } else if r + 1 == c || c + 1 == r {
            betas[r.min(c)]
        } else {
            0.0
        }
    });
    let evd = t
        .self_adjoint_eigen(faer::Side::Lower)
        .expect("tridiagonal eigendecomposition failed");
    let s = evd.S().column_vector();
    let mut arg = 0;
    for i in 1..m {
        if s[i] < s[arg] {
            arg = i;
        }
    }
    let y: Vec<f64> = (0..m).map(|r| evd.U()[(r, arg)]).collect();
    (s[arg], y)
}

/// One ground-space eigenvector, tagged by its sector.
#[derive(Debug, Clone)]
pub struct ManifoldVector {
    pub n_up: usize,
    pub vector: SectorVector,
}

/// Ground energy, the degenerate eigenvectors across sectors (spin-flip
/// partners included), and the gap to the first excitation.
#[derive(Debug, Clone)]
pub struct GroundManifold {
    pub e0: f64,
    pub vectors: Vec<ManifoldVector>,
    pub degeneracy: usize,
    /// `e_first_excited − e0`; `None` when no excited level was resolved
    /// within the per-sector eigenpair budget.
    pub gap: Option<f64>,
    /// Lowest eigenvalues per sector, `n_up = 0..=N` (upper half mirrored).
    pub per_sector_spectra: Vec<(usize, Vec<f64>)>,
    pub tol_deg: f64,
}

#[derive(Debug, Clone, Default)]
pub struct ManifoldOptions {
    pub eigen: EigenOptions,
    /// Degeneracy window; defaults to `1e−8·max(1,|e0|)`.
    pub tol_deg: Option<f64>,
    /// Explicit-storage budget handed to assembly.
    pub max_explicit_nnz: Option<usize>,
}

/// Scan sectors `n_up = 0..⌊N/2⌋`, infer the rest by spin-flip symmetry, and
/// merge the per-sector spectra into a [`GroundManifold`].
pub fn ground_manifold(
    spec: &LatticeSpec,
    lambda: f64,
    opts: &ManifoldOptions,
) -> Result<GroundManifold, SolveError> {
    let n = spec.n_sites;
    let budget = opts.max_explicit_nnz.unwrap_or(DEFAULT_MAX_EXPLICIT_NNZ);
    let mut scanned: Vec<(usize, Arc<SectorBasis>, Vec<(f64, Array1<C64>)>)> = Vec::new();
    for n_up in 0..=n / 2 {
        let basis = Arc::new(SectorBasis::new(n, n_up)?);
        let op = assemble_on_basis(spec, lambda, Arc::clone(&basis), budget)?;
        let mut sector_opts = opts.eigen.clone();
        sector_opts.k = opts.eigen.k.min(op.dim());
        sector_opts.seed = opts.eigen.seed ^ ((n_up as u64) << 32);
        let pairs = lowest_eigenpairs(&op, &sector_opts)?;
        scanned.push((n_up, basis, pairs));
    }

    let e0 = scanned
        .iter()
        .flat_map(|(_, _, p)| p.iter().map(|(e, _)| *e))
        .fold(f64::INFINITY, f64::min);
    let tol_deg = opts.tol_deg.unwrap_or_else(|| 1e-8 * e0.abs().max(1.0));

    let mut vectors = Vec::new();
    let mut degeneracy = 0;
    let mut first_excited = f64::INFINITY;
    let mut per_sector_spectra = vec![(0usize, Vec::new()); n + 1];
    for (n_up, basis, pairs) in &scanned {
        let mirrored = *n_up * 2 != n;
        for (e, v) in pairs {
            if *e <= e0 + tol_deg {
                degeneracy += if mirrored { 2 } else { 1 };
                let sv = SectorVector::new(Arc::clone(basis), v.clone());
                if mirrored {
                    let flipped = sv.spin_flipped();
                    vectors.push(ManifoldVector { n_up: *n_up, vector: sv });
                    vectors.push(ManifoldVector { n_up: n - *n_up, vector: flipped });
                } else {
                    vectors.push(ManifoldVector { n_up: *n_up, vector: sv });
                }
            } else if *e < first_excited {
                first_excited = *e;
            }
        }
        let spectrum: Vec<f64> = pairs.iter().map(|(e, _)| *e).collect();
        per_sector_spectra[*n_up] = (*n_up, spectrum.clone());
        per_sector_spectra[n - *n_up] = (n - *n_up, spectrum);
    }
    vectors.sort_by_key(|mv| mv.n_up);
    let gap = if first_excited.is_finite() {
        Some(first_excited - e0)
    } else {
        None
    };
    Ok(GroundManifold { e0, vectors, degeneracy, gap, per_sector_spectra, tol_deg })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::{assemble, AssemblyRequest};
    use crate::lattice::{build_ladder_a, build_ladder_c, build_ring};
    use approx::assert_abs_diff_eq;

    const SQRT3: f64 = 1.732_050_807_568_877_2;

    #[test]
    fn triangle_chiral_ground_doublet() {
        // the two 3−4√3 ground states sit in the S_z = ±1/2 sectors
        let spec = build_ladder_c(3).unwrap();
        let expect = 3.0 - 4.0 * SQRT3;
        let mut lowest = Vec::new();
        for n_up in [1, 2] {
            let op = assemble(AssemblyRequest { spec: &spec, lambda: 2.0, n_up }).unwrap();
            let opts = EigenOptions { k: 2, ..Default::default() };
            let pairs = lowest_eigenpairs(&op, &opts).unwrap();
            lowest.push(pairs[0].0);
            // within one sector the doublet partner is the −3 multiplet state
            assert_abs_diff_eq!(pairs[1].0, -3.0, epsilon = 1e-9);
        }
        assert_abs_diff_eq!(lowest[0], expect, epsilon = 1e-9);
        assert_abs_diff_eq!(lowest[1], expect, epsilon = 1e-9);

        let m = ground_manifold(&spec, 2.0, &ManifoldOptions::default()).unwrap();
        assert_eq!(m.degeneracy, 2);
        assert_abs_diff_eq!(m.e0, expect, epsilon = 1e-9);
    }

    #[test]
    fn iterative_matches_dense() {
        let spec = build_ladder_a(10, true).unwrap();
        let op = assemble(AssemblyRequest { spec: &spec, lambda: 1.4, n_up: 5 }).unwrap();
        let dense = lowest_eigenpairs(&op, &EigenOptions { k: 5, ..Default::default() }).unwrap();
        let iter_opts = EigenOptions { k: 5, dense_threshold: 0, ..Default::default() };
        let iterative = lowest_eigenpairs(&op, &iter_opts).unwrap();
        for (d, i) in dense.iter().zip(&iterative) {
            assert_abs_diff_eq!(d.0, i.0, epsilon = 1e-9);
        }
        // orthonormality of the iterative set
        for a in 0..iterative.len() {
            for b in 0..iterative.len() {
                let g = cdot(&iterative[a].1, &iterative[b].1).norm();
                let want = if a == b { 1.0 } else { 0.0 };
                assert!((g - want).abs() < 1e-10, "gram[{a},{b}] = {g}");
            }
        }
    }

    #[test]
    fn residual_contract_holds() {
        let spec = build_ring(8).unwrap();
        let op = assemble(AssemblyRequest { spec: &spec, lambda: 3.0, n_up: 4 }).unwrap();
        let opts = EigenOptions { k: 3, dense_threshold: 0, ..Default::default() };
        for (e, v) in lowest_eigenpairs(&op, &opts).unwrap() {
            let mut r = op.matvec(&v);
            r.scaled_add(C64::new(-e, 0.0), &v);
            assert!(norm(&r) <= opts.tol * e.abs().max(1.0) * 1.0001);
        }
    }

    #[test]
    fn ferromagnetic_manifold_counts() {
        for spec in [build_ladder_a(6, true).unwrap(), build_ring(5).unwrap()] {
            let m = ground_manifold(&spec, 0.0, &ManifoldOptions::default()).unwrap();
            assert_abs_diff_eq!(m.e0, -(spec.bonds.len() as f64), epsilon = 1e-9);
            assert_eq!(m.degeneracy, spec.n_sites + 1);
            assert_eq!(m.vectors.len(), m.degeneracy);
            assert!(m.gap.unwrap() > 1e-6);
        }
    }

    #[test]
    fn k_too_large_is_rejected() {
        let spec = build_ladder_c(3).unwrap();
        let op = assemble(AssemblyRequest { spec: &spec, lambda: 0.0, n_up: 3 }).unwrap();
        assert!(matches!(
            lowest_eigenpairs(&op, &EigenOptions { k: 2, ..Default::default() }),
            Err(SolveError::KTooLarge { .. })
        ));
    }

    #[test]
    fn variational_bound_on_random_states() {
        use rand::prelude::*;
        let spec = build_ladder_a(8, true).unwrap();
        let lambda = 1.5;
        let m = ground_manifold(&spec, lambda, &ManifoldOptions::default()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for n_up in 0..=4 {
            let op = assemble(AssemblyRequest { spec: &spec, lambda, n_up }).unwrap();
            for _ in 0..25 {
                let mut v = random_vector(op.dim(), &mut rng);
                let nv = norm(&v);
                v.mapv_inplace(|x| x / nv);
                let rayleigh = cdot(&v, &op.matvec(&v)).re;
                assert!(rayleigh >= m.e0 - 1e-9);
            }
        }
    }
}

//! Dense full-space oracle, independent of the production operator path.
//!
//! Operators are composed from raw Pauli strings applied column by column
//! through single-site 2×2 actions — no swap identity, no antisymmetric
//! block decomposition, no sector restriction. Production results are
//! checked against this construction.

use ndarray::Array2;
use num_complex::Complex64 as C64;
use trispin_core::hilbert::SectorBasis;
use trispin_core::lattice::LatticeSpec;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);

#[derive(Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
    Z,
}

/// Apply one Pauli string to basis column `s`: returns (row, phase).
fn string_action(n: usize, ops: &[(usize, Axis)], s: usize) -> (usize, C64) {
    let mut t = s;
    let mut phase = ONE;
    for &(site, axis) in ops {
        let up = (t >> site) & 1 == 1;
        match axis {
            Axis::X => t ^= 1 << site,
            Axis::Y => {
                phase *= if up { C64::new(0.0, 1.0) } else { C64::new(0.0, -1.0) };
                t ^= 1 << site;
            }
            Axis::Z => phase *= if up { ONE } else { -ONE },
        }
    }
    let _ = n;
    (t, phase)
}

/// Accumulate `coeff ×` a Pauli string into a dense 2^N matrix.
pub fn add_string(m: &mut Array2<C64>, n: usize, ops: &[(usize, Axis)], coeff: C64) {
    for s in 0..1usize << n {
        let (t, phase) = string_action(n, ops, s);
        m[(t, s)] += coeff * phase;
    }
}

/// Dense σ⃗_i·σ⃗_j.
pub fn dense_pair(n: usize, i: usize, j: usize) -> Array2<C64> {
    let mut m = Array2::zeros((1 << n, 1 << n));
    for axis in [Axis::X, Axis::Y, Axis::Z] {
        add_string(&mut m, n, &[(i, axis), (j, axis)], ONE);
    }
    m
}

/// Dense σ⃗_i·(σ⃗_j × σ⃗_k) from the full Levi-Civita expansion.
pub fn dense_chirality(n: usize, i: usize, j: usize, k: usize) -> Array2<C64> {
    let axes = [Axis::X, Axis::Y, Axis::Z];
    let eps = [
        (0, 1, 2, 1.0),
        (1, 2, 0, 1.0),
        (2, 0, 1, 1.0),
        (0, 2, 1, -1.0),
        (2, 1, 0, -1.0),
        (1, 0, 2, -1.0),
    ];
    let mut m = Array2::zeros((1 << n, 1 << n));
    for (a, b, c, sign) in eps {
        add_string(
            &mut m,
            n,
            &[(i, axes[a]), (j, axes[b]), (k, axes[c])],
            C64::new(sign, 0.0),
        );
    }
    m
}

/// Dense H(λ) on the full 2^N space.
pub fn dense_hamiltonian(spec: &LatticeSpec, lambda: f64) -> Array2<C64> {
    let n = spec.n_sites;
    let mut m = Array2::zeros((1 << n, 1 << n));
    for b in &spec.bonds {
        let coeff = C64::new(-f64::from(b.sign), 0.0);
        for axis in [Axis::X, Axis::Y, Axis::Z] {
            add_string(&mut m, n, &[(b.i, axis), (b.j, axis)], coeff);
        }
    }
    if lambda != 0.0 {
        for p in &spec.plaquettes {
            let coeff = lambda * f64::from(p.sign);
            m = m + dense_chirality(n, p.i, p.j, p.k).mapv(|v| v * coeff);
        }
    }
    m
}

/// Dense S⃗_tot² with S⃗_tot = ½ Σ σ⃗_i.
pub fn dense_total_spin_squared(n: usize) -> Array2<C64> {
    let dim = 1usize << n;
    let mut m = Array2::eye(dim).mapv(|v: C64| v * 0.75 * n as f64);
    for i in 0..n {
        for j in i + 1..n {
            m = m + dense_pair(n, i, j).mapv(|v| v * 0.5);
        }
    }
    m
}

/// Dense total S_z = ½ Σ Z_i.
pub fn dense_total_sz(n: usize) -> Array2<C64> {
    let mut m = Array2::zeros((1 << n, 1 << n));
    for i in 0..n {
        add_string(&mut m, n, &[(i, Axis::Z)], C64::new(0.5, 0.0));
    }
    m
}

/// Restrict a full-space dense operator to one magnetization sector.
pub fn sector_restrict(m: &Array2<C64>, basis: &SectorBasis) -> Array2<C64> {
    Array2::from_shape_fn((basis.dim(), basis.dim()), |(a, b)| {
        m[(basis.state(a).0 as usize, basis.state(b).0 as usize)]
    })
}

/// All eigenvalues of a dense Hermitian matrix, ascending.
pub fn eigvalsh(m: &Array2<C64>) -> Vec<f64> {
    let d = m.nrows();
    let f = faer::Mat::from_fn(d, d, |r, c| m[(r, c)]);
    let evd = f
        .self_adjoint_eigen(faer::Side::Lower)
        .expect("oracle eigendecomposition");
    let mut out: Vec<f64> = (0..d).map(|i| evd.S().column_vector()[i].re).collect();
    out.sort_by(f64::total_cmp);
    out
}

/// Max entry magnitude of A·B − B·A.
pub fn commutator_norm(a: &Array2<C64>, b: &Array2<C64>) -> f64 {
    let d = a.nrows();
    let fa = faer::Mat::from_fn(d, d, |r, c| a[(r, c)]);
    let fb = faer::Mat::from_fn(d, d, |r, c| b[(r, c)]);
    let ab = &fa * &fb;
    let ba = &fb * &fa;
    let mut max = 0.0f64;
    for r in 0..d {
        for c in 0..d {
            max = max.max((ab[(r, c)] - ba[(r, c)]).norm());
        }
    }
    max
}

/// Max entry magnitude of A − B.
pub fn max_diff(a: &Array2<C64>, b: &Array2<C64>) -> f64 {
    let mut max = 0.0f64;
    for (x, y) in a.iter().zip(b.iter()) {
        max = max.max((x - y).norm());
    }
    max
}

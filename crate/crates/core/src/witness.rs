//! Three-spin chirality as an entanglement witness.
//!
//! The scalar chirality X = σ⃗_1·(σ⃗_2 × σ⃗_3) of a spin triple is bounded by
//! ±2√3 and separable states cannot push |⟨X⟩| past 1, so the local-unitary
//! maximized chirality classifies entanglement:
//!
//! ```text
//! chi_max ≤ 1      consistent with a product state
//! chi_max ≤ 2      at most bipartite (= twice the pair concurrence)
//! chi_max ≤ 3√3/2  reachable by GHZ-class states
//! chi_max ≤ 2√3    reachable only by W-class states
//! ```
//!
//! The witness is E_X = −1 + max_U |tr(ρ U†XU)| over product unitaries
//! U = U₁⊗U₂⊗U₃, maximized here by multi-start Nelder-Mead over the nine
//! ZYZ Euler angles. Classification is one-sided: a low chi_max never
//! certifies separability, so the minimal consistent class is reported.
//!
//! The 8×8 chirality matrix is built from explicit Pauli Kronecker
//! products, deliberately independent of the bitwise term application in
//! [`crate::hamiltonian`]; the two routes cross-check each other in the
//! test suite.

use ndarray::{Array1, Array2};
use num_complex::Complex64 as C64;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

use crate::state::SpinState;

pub const CHI_MAX_W: f64 = 3.464_101_615_137_754_4; // 2√3
pub const CHI_MAX_GHZ: f64 = 2.598_076_211_353_316; // 3√3/2
pub const CHI_MAX_BIPARTITE: f64 = 2.0;
pub const CHI_MAX_PRODUCT: f64 = 1.0;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

#[derive(Debug, Error)]
pub enum WitnessError {
    #[error("density matrix is not Hermitian (max asymmetry {0:.3e})")]
    NotHermitian(f64),
    #[error("density matrix trace is {0}, expected 1")]
    BadTrace(f64),
    #[error("density matrix has negative eigenvalue {0:.3e}")]
    NotPositive(f64),
    #[error("density matrix must be 8×8, got {0}×{1}")]
    BadShape(usize, usize),
    #[error("reduced density needs three distinct sites, got ({0}, {1}, {2})")]
    RepeatedIndices(usize, usize, usize),
    #[error("optimizer stagnated below the unoptimized |chi| = {chi_raw_abs:.6} (best {best:.6})")]
    Stagnation { chi_raw_abs: f64, best: f64 },
}

/// 2×2 Pauli matrices.
fn pauli(axis: usize) -> Array2<C64> {
    match axis {
        0 => ndarray::array![[ZERO, ONE], [ONE, ZERO]],
        1 => ndarray::array![[ZERO, C64::new(0.0, -1.0)], [C64::new(0.0, 1.0), ZERO]],
        2 => ndarray::array![[ONE, ZERO], [ZERO, -ONE]],
        _ => unreachable!(),
    }
}

fn kron(a: &Array2<C64>, b: &Array2<C64>) -> Array2<C64> {
    let (ar, ac) = a.dim();
    let (br, bc) = b.dim();
    Array2::from_shape_fn((ar * br, ac * bc), |(r, c)| a[(r / br, c / bc)] * b[(r % br, c % bc)])
}

/// Operator `p0 ⊗ p1 ⊗ p2` acting on sites (0, 1, 2), with site 0 on the
/// lowest bit of the 3-bit basis index.
fn site_ops(p0: &Array2<C64>, p1: &Array2<C64>, p2: &Array2<C64>) -> Array2<C64> {
    kron(p2, &kron(p1, p0))
}

/// Dense 8×8 matrix of X = σ⃗_0·(σ⃗_1 × σ⃗_2), built from the full
/// Levi-Civita expansion over Pauli strings.
pub fn chirality_matrix() -> Array2<C64> {
    let p: Vec<Array2<C64>> = (0..3).map(pauli).collect();
    let mut x = Array2::zeros((8, 8));
    let eps: [(usize, usize, usize, f64); 6] = [
        (0, 1, 2, 1.0),
        (1, 2, 0, 1.0),
        (2, 0, 1, 1.0),
        (0, 2, 1, -1.0),
        (2, 1, 0, -1.0),
        (1, 0, 2, -1.0),
    ];
    for (a, b, c, sign) in eps {
        x = x + site_ops(&p[a], &p[b], &p[c]).mapv(|v| v * sign);
    }
    x
}

/// The full chirality eigensystem as (eigenvalue, multiplicity,
/// eigenvectors): a spin-3/2 multiplet at χ = 0 and two spin-1/2 doublets
/// at χ = ±2√3.
///
/// The nonzero-χ states flip one spin with relative phase ω = exp(2πi/3):
/// in the orientation convention used here the ω pattern carries +2√3 and
/// the ω* pattern −2√3; flipping all spins preserves the eigenvalue.
pub fn chirality_eigensystem() -> Vec<(f64, usize, Vec<Array1<C64>>)> {
    let omega = C64::from_polar(1.0, 2.0 * std::f64::consts::PI / 3.0);
    let s3 = 3.0f64.sqrt();
    // one flipped spin on |↑↑↑⟩ = 0b111: site 0 → 0b110, site 1 → 0b101, site 2 → 0b011
    let one_down = [0b110usize, 0b101, 0b011];
    let one_up = [0b001usize, 0b010, 0b100];
    let phased = |targets: &[usize; 3], w: C64| -> Array1<C64> {
        let mut v = Array1::zeros(8);
        v[targets[0]] = ONE / s3;
        v[targets[1]] = w / s3;
        v[targets[2]] = w * w / s3;
        v
    };
    let mut polarized_up = Array1::zeros(8);
    polarized_up[0b111] = ONE;
    let mut polarized_down = Array1::zeros(8);
    polarized_down[0b000] = ONE;

    vec![
        (
            0.0,
            4,
            vec![
                polarized_up,
                phased(&one_down, ONE),
                phased(&one_up, ONE),
                polarized_down,
            ],
        ),
        (
            -2.0 * s3,
            2,
            vec![phased(&one_down, omega.conj()), phased(&one_up, omega.conj())],
        ),
        (
            2.0 * s3,
            2,
            vec![phased(&one_down, omega), phased(&one_up, omega)],
        ),
    ]
}

/// An 8×8 three-spin density matrix: Hermitian, unit trace, positive
/// semidefinite within tolerance. Pure states enter as rank-1 densities.
#[derive(Debug, Clone)]
pub struct ThreeSpinDensity {
    rho: Array2<C64>,
}

impl ThreeSpinDensity {
    pub fn from_pure(amps: &[C64; 8]) -> ThreeSpinDensity {
        let norm2: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        let rho = Array2::from_shape_fn((8, 8), |(r, c)| amps[r] * amps[c].conj() / norm2);
        ThreeSpinDensity { rho }
    }

    pub fn from_matrix(rho: Array2<C64>) -> Result<ThreeSpinDensity, WitnessError> {
        let (r, c) = rho.dim();
        if (r, c) != (8, 8) {
            return Err(WitnessError::BadShape(r, c));
        }
        let mut asym = 0.0f64;
        for i in 0..8 {
            for j in 0..8 {
                asym = asym.max((rho[(i, j)] - rho[(j, i)].conj()).norm());
            }
        }
        if asym > 1e-8 {
            return Err(WitnessError::NotHermitian(asym));
        }
        let trace: C64 = (0..8).map(|i| rho[(i, i)]).sum();
        if (trace - ONE).norm() > 1e-8 {
            return Err(WitnessError::BadTrace(trace.re));
        }
        let m = faer::Mat::from_fn(8, 8, |i, j| rho[(i, j)]);
        let evd = m
            .self_adjoint_eigen(faer::Side::Lower)
            .expect("density eigendecomposition");
        let min_eig = (0..8).map(|i| evd.S().column_vector()[i].re).fold(f64::INFINITY, f64::min);
        if min_eig < -1e-10 {
            return Err(WitnessError::NotPositive(min_eig));
        }
        Ok(ThreeSpinDensity { rho })
    }

    pub fn matrix(&self) -> &Array2<C64> {
        &self.rho
    }

    /// Maximally mixed state I/8.
    pub fn maximally_mixed() -> ThreeSpinDensity {
        ThreeSpinDensity { rho: Array2::eye(8).mapv(|v: C64| v / 8.0) }
    }
}

/// χ = tr(ρX); real because both factors are Hermitian.
pub fn chi(rho: &ThreeSpinDensity) -> f64 {
    let x = chirality_matrix();
    let mut tr = ZERO;
    for r in 0..8 {
        for c in 0..8 {
            tr += rho.rho[(r, c)] * x[(c, r)];
        }
    }
    debug_assert!(tr.im.abs() < 1e-10 * tr.norm().max(1.0));
    tr.re
}

/// Partial trace of a many-body state down to the ordered triple (i, j, k):
/// bit 0 of the reduced space is site i, bit 1 site j, bit 2 site k.
pub fn reduced_density<S: SpinState>(
    state: &S,
    triple: (usize, usize, usize),
) -> Result<ThreeSpinDensity, WitnessError> {
    let (i, j, k) = triple;
    if i == j || j == k || i == k {
        return Err(WitnessError::RepeatedIndices(i, j, k));
    }
    let keep = (1u64 << i) | (1u64 << j) | (1u64 << k);
    let mut buckets: std::collections::HashMap<u64, [C64; 8]> = std::collections::HashMap::new();
    for idx in 0..state.len() {
        let (bits, amp) = state.entry(idx);
        if amp == ZERO {
            continue;
        }
        let t = usize::from(bits.spin_up(i))
            | (usize::from(bits.spin_up(j)) << 1)
            | (usize::from(bits.spin_up(k)) << 2);
        let rest = bits.0 & !keep;
        buckets.entry(rest).or_insert([ZERO; 8])[t] += amp;
    }
    let mut rho = Array2::zeros((8, 8));
    for v in buckets.values() {
        for r in 0..8 {
            if v[r] == ZERO {
                continue;
            }
            for c in 0..8 {
                rho[(r, c)] += v[r] * v[c].conj();
            }
        }
    }
    Ok(ThreeSpinDensity { rho })
}

/// Entanglement classes distinguishable by the maximized chirality.
///
/// The bounds are one-sided, so the first class is "consistent with
/// separable", not "certified separable".
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EntanglementClass {
    SeparableConsistent,
    Entangled,
    GenuineTripartite,
    BeyondGhzBound,
}

impl std::fmt::Display for EntanglementClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            EntanglementClass::SeparableConsistent => "Separable-Consistent",
            EntanglementClass::Entangled => "Entangled",
            EntanglementClass::GenuineTripartite => "GenuineTripartite",
            EntanglementClass::BeyondGhzBound => "BeyondGHZBound",
        };
        f.write_str(s)
    }
}

/// Minimal class consistent with a maximized chirality value.
pub fn classify(chi_max: f64) -> EntanglementClass {
    const TOL: f64 = 1e-6;
    if chi_max <= CHI_MAX_PRODUCT + TOL {
        EntanglementClass::SeparableConsistent
    } else if chi_max <= CHI_MAX_BIPARTITE + TOL {
        EntanglementClass::Entangled
    } else if chi_max <= CHI_MAX_GHZ + TOL {
        EntanglementClass::GenuineTripartite
    } else {
        EntanglementClass::BeyondGhzBound
    }
}

#[derive(Debug, Clone)]
pub struct WitnessResult {
    /// Unoptimized tr(ρX).
    pub chi_raw: f64,
    /// max over local unitaries of |tr(ρ U†XU)|.
    pub chi_max: f64,
    /// E_X = chi_max − 1.
    pub e_x: f64,
    /// ZYZ Euler angles of the maximizing U₁⊗U₂⊗U₃.
    pub unitary_params: [f64; 9],
    pub class: EntanglementClass,
}

#[derive(Debug, Clone)]
pub struct WitnessOptions {
    /// Random starts per round (start 0 of the first round is the
    /// identity, so chi_max ≥ |chi_raw| by construction).
    pub restarts: usize,
    /// Nelder-Mead iterations per start.
    pub nm_max_iter: usize,
    /// Extra rounds run until the best value improves by less than this
    /// over a full round.
    pub round_tol: f64,
    pub max_rounds: usize,
    pub seed: u64,
}

impl Default for WitnessOptions {
    fn default() -> Self {
        WitnessOptions {
            restarts: 50,
            nm_max_iter: 400,
            round_tol: 1e-8,
            max_rounds: 4,
            seed: 1,
        }
    }
}

/// Cheaper optimizer settings for bulk Monte-Carlo scans; any output still
/// lower-bounds the true maximum.
pub fn quick_witness_options(seed: u64) -> WitnessOptions {
    WitnessOptions { restarts: 3, nm_max_iter: 120, max_rounds: 1, seed, ..Default::default() }
}

fn rz(a: f64) -> Array2<C64> {
    ndarray::array![
        [C64::from_polar(1.0, -0.5 * a), ZERO],
        [ZERO, C64::from_polar(1.0, 0.5 * a)]
    ]
}

fn ry(b: f64) -> Array2<C64> {
    let (s, c) = (0.5 * b).sin_cos();
    ndarray::array![[C64::new(c, 0.0), C64::new(-s, 0.0)], [C64::new(s, 0.0), C64::new(c, 0.0)]]
}

fn euler_zyz(a: f64, b: f64, c: f64) -> Array2<C64> {
    rz(a).dot(&ry(b)).dot(&rz(c))
}

fn rotated_chi(rho: &Array2<C64>, x: &Array2<C64>, angles: &[f64]) -> f64 {
    let u0 = euler_zyz(angles[0], angles[1], angles[2]);
    let u1 = euler_zyz(angles[3], angles[4], angles[5]);
    let u2 = euler_zyz(angles[6], angles[7], angles[8]);
    let u = site_ops(&u0, &u1, &u2);
    // tr(ρ U†XU) = tr((UρU†) X)
    let m = u.dot(rho).dot(&u.mapv(|v| v.conj()).reversed_axes());
    let mut tr = ZERO;
    for r in 0..8 {
        for c in 0..8 {
            tr += m[(r, c)] * x[(c, r)];
        }
    }
    tr.re
}

/// Chiral entanglement witness by multi-start derivative-free maximization
/// over the nine local Euler angles.
pub fn witness_ex(
    rho: &ThreeSpinDensity,
    opts: &WitnessOptions,
) -> Result<WitnessResult, WitnessError> {
    let x = chirality_matrix();
    let chi_raw = chi(rho);
    let objective = |angles: &[f64]| rotated_chi(&rho.rho, &x, angles).abs();

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut best_val = f64::NEG_INFINITY;
    let mut best_angles = [0.0; 9];
    let mut first = true;
    for _round in 0..opts.max_rounds.max(1) {
        let round_start_best = best_val;
        for _ in 0..opts.restarts {
            let x0: Vec<f64> = if first {
                first = false;
                vec![0.0; 9]
            } else {
                (0..9).map(|_| rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI)).collect()
            };
            let (xs, fs) = nelder_mead_max(&objective, &x0, 0.7, opts.nm_max_iter);
            if fs > best_val {
                best_val = fs;
                best_angles.copy_from_slice(&xs);
            }
        }
        if best_val - round_start_best.max(0.0) < opts.round_tol && round_start_best.is_finite() {
            break;
        }
    }

    if best_val < chi_raw.abs() - 1e-9 {
        // one retry with a different stream before reporting
        let mut retry = opts.clone();
        retry.seed = opts.seed.wrapping_add(0x5bd1_e995);
        retry.max_rounds = 1;
        let mut rng = ChaCha8Rng::seed_from_u64(retry.seed);
        for _ in 0..retry.restarts {
            let x0: Vec<f64> =
                (0..9).map(|_| rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI)).collect();
            let (xs, fs) = nelder_mead_max(&objective, &x0, 0.7, retry.nm_max_iter);
            if fs > best_val {
                best_val = fs;
                best_angles.copy_from_slice(&xs);
            }
        }
        if best_val < chi_raw.abs() - 1e-9 {
            return Err(WitnessError::Stagnation { chi_raw_abs: chi_raw.abs(), best: best_val });
        }
    }

    Ok(WitnessResult {
        chi_raw,
        chi_max: best_val,
        e_x: best_val - 1.0,
        unitary_params: best_angles,
        class: classify(best_val),
    })
}

/// Haar-random pure product state of three qubits.
pub fn random_product_state(rng: &mut ChaCha8Rng) -> [C64; 8] {
    let mut qubits = [[ZERO; 2]; 3];
    for q in &mut qubits {
        let u: f64 = rng.gen();
        let theta = (1.0 - 2.0 * u).acos();
        let phi = rng.gen_range(0.0..std::f64::consts::TAU);
        q[0] = C64::new((0.5 * theta).cos(), 0.0);
        q[1] = C64::from_polar((0.5 * theta).sin(), phi);
    }
    let mut amps = [ZERO; 8];
    for (t, amp) in amps.iter_mut().enumerate() {
        *amp = qubits[0][t & 1] * qubits[1][(t >> 1) & 1] * qubits[2][(t >> 2) & 1];
    }
    amps
}

/// Hilbert-Schmidt-random mixed state (normalized Ginibre G G†).
pub fn random_density(rng: &mut ChaCha8Rng) -> ThreeSpinDensity {
    let g = Array2::from_shape_fn((8, 8), |_| {
        C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    });
    let gh = g.mapv(|v| v.conj()).reversed_axes();
    let mut rho = g.dot(&gh);
    let tr: C64 = (0..8).map(|i| rho[(i, i)]).sum();
    rho.mapv_inplace(|v| v / tr.re);
    ThreeSpinDensity { rho }
}

/// Nelder-Mead ascent; returns the best point and value seen across all
/// evaluations.
fn nelder_mead_max(
    f: &dyn Fn(&[f64]) -> f64,
    x0: &[f64],
    scale: f64,
    max_iter: usize,
) -> (Vec<f64>, f64) {
    let n = x0.len();
    let neg = |x: &[f64]| -f(x);
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    simplex.push((x0.to_vec(), neg(x0)));
    for d in 0..n {
        let mut p = x0.to_vec();
        p[d] += scale;
        let fp = neg(&p);
        simplex.push((p, fp));
    }
    let mut best = simplex
        .iter()
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .map(|(p, v)| (p.clone(), *v))
        .expect("nonempty simplex");

    for _ in 0..max_iter {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        if simplex[0].1 < best.1 {
            best = simplex[0].clone();
        }
        if (simplex[n].1 - simplex[0].1).abs() < 1e-12 {
            break;
        }
        let centroid: Vec<f64> = (0..n)
            .map(|d| simplex[..n].iter().map(|(p, _)| p[d]).sum::<f64>() / n as f64)
            .collect();
        let worst = simplex[n].clone();
        let reflect: Vec<f64> =
            (0..n).map(|d| centroid[d] + (centroid[d] - worst.0[d])).collect();
        let fr = neg(&reflect);
        if fr < simplex[0].1 {
            let expand: Vec<f64> =
                (0..n).map(|d| centroid[d] + 2.0 * (centroid[d] - worst.0[d])).collect();
            let fe = neg(&expand);
            simplex[n] = if fe < fr { (expand, fe) } else { (reflect, fr) };
        } else if fr < simplex[n - 1].1 {
            simplex[n] = (reflect, fr);
        } else {
            let contract: Vec<f64> =
                (0..n).map(|d| centroid[d] + 0.5 * (worst.0[d] - centroid[d])).collect();
            let fc = neg(&contract);
            if fc < worst.1 {
                simplex[n] = (contract, fc);
            } else {
                // shrink toward the best vertex
                let anchor = simplex[0].0.clone();
                for v in simplex.iter_mut().skip(1) {
                    for d in 0..n {
                        v.0[d] = anchor[d] + 0.5 * (v.0[d] - anchor[d]);
                    }
                    v.1 = neg(&v.0);
                }
            }
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    if simplex[0].1 < best.1 {
        best = simplex[0].clone();
    }
    (best.0, -best.1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::FullVector;
    use approx::assert_abs_diff_eq;

    const SQRT3: f64 = 1.732_050_807_568_877_2;

    #[test]
    fn eigensystem_multiplicities_and_values() {
        let sys = chirality_eigensystem();
        let x = chirality_matrix();
        let mut total = 0;
        for (val, mult, vecs) in &sys {
            assert_eq!(*mult, vecs.len());
            total += mult;
            for v in vecs {
                let xv = x.dot(v);
                for (a, b) in xv.iter().zip(v.iter()) {
                    assert!((a - b * C64::new(*val, 0.0)).norm() < 1e-12);
                }
            }
        }
        assert_eq!(total, 8);
        let mults: Vec<usize> = sys.iter().map(|(_, m, _)| *m).collect();
        assert_eq!(mults, vec![4, 2, 2]);
    }

    #[test]
    fn flipping_all_spins_preserves_eigenvalue() {
        let x = chirality_matrix();
        for (val, _, vecs) in chirality_eigensystem() {
            for v in vecs {
                let mut flipped = Array1::zeros(8);
                for s in 0..8usize {
                    flipped[s ^ 0b111] = v[s];
                }
                let xv = x.dot(&flipped);
                for (a, b) in xv.iter().zip(flipped.iter()) {
                    assert!((a - b * C64::new(val, 0.0)).norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn chi_of_reference_densities() {
        let mut up = [ZERO; 8];
        up[0b111] = ONE;
        assert_abs_diff_eq!(chi(&ThreeSpinDensity::from_pure(&up)), 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(chi(&ThreeSpinDensity::maximally_mixed()), 0.0, epsilon = 1e-14);
    }

    #[test]
    fn chi_of_bipartite_states() {
        // |Ψ₁₂⟩⊗|↑⟩ with Ψ = b|↑↓⟩ + c|↓↑⟩ (sites 0,1; site 2 up)
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let mk = |b: C64, c: C64| {
            let mut amps = [ZERO; 8];
            amps[0b101] = b; // site0 ↑, site1 ↓, site2 ↑
            amps[0b110] = c; // site0 ↓, site1 ↑, site2 ↑
            ThreeSpinDensity::from_pure(&amps)
        };
        // b = c = i/√2: 2i(b*c − c*b) = 0
        let v = chi(&mk(C64::new(0.0, r), C64::new(0.0, r)));
        assert_abs_diff_eq!(v, 0.0, epsilon = 1e-12);
        // b = 1/√2, c = i/√2: magnitude 2 (twice the pair concurrence)
        let v = chi(&mk(C64::new(r, 0.0), C64::new(0.0, r)));
        assert_abs_diff_eq!(v.abs(), 2.0, epsilon = 1e-12);
    }

    #[test]
    fn chi_invariant_under_global_rotation_and_odd_under_swap() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..50 {
            let rho = random_density(&mut rng);
            let base = chi(&rho);
            // global rotation: same single-qubit unitary on all sites
            let a = rng.gen_range(-3.0..3.0);
            let b = rng.gen_range(-3.0..3.0);
            let c = rng.gen_range(-3.0..3.0);
            let u1 = euler_zyz(a, b, c);
            let u = site_ops(&u1, &u1, &u1);
            let rot = u.dot(rho.matrix()).dot(&u.mapv(|v| v.conj()).reversed_axes());
            let rho_rot = ThreeSpinDensity { rho: rot };
            assert_abs_diff_eq!(chi(&rho_rot), base, epsilon = 1e-10);

            // transposition of sites 0 and 1 flips the sign
            let mut swapped = Array2::zeros((8, 8));
            let perm = |s: usize| (s & 0b100) | ((s & 1) << 1) | ((s >> 1) & 1);
            for r in 0..8 {
                for cc in 0..8 {
                    swapped[(perm(r), perm(cc))] = rho.matrix()[(r, cc)];
                }
            }
            let rho_swap = ThreeSpinDensity { rho: swapped };
            assert_abs_diff_eq!(chi(&rho_swap), -base, epsilon = 1e-10);
        }
    }

    #[test]
    fn chi_invariant_under_cyclic_rotation() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..50 {
            let rho = random_density(&mut rng);
            let base = chi(&rho);
            // (0,1,2) → (1,2,0): site s gains the role of site s+1
            let perm = |s: usize| ((s << 1) & 0b110) | (s >> 2);
            let mut cycled = Array2::zeros((8, 8));
            for r in 0..8 {
                for c in 0..8 {
                    cycled[(perm(r), perm(c))] = rho.matrix()[(r, c)];
                }
            }
            assert_abs_diff_eq!(chi(&ThreeSpinDensity { rho: cycled }), base, epsilon = 1e-10);
        }
    }

    #[test]
    fn reduced_density_of_product_state() {
        let mut f = FullVector::zeros(5);
        f.amps[0b11111] = ONE;
        let rho = reduced_density(&f, (0, 2, 4)).unwrap();
        for r in 0..8 {
            for c in 0..8 {
                let want = if r == 0b111 && c == 0b111 { ONE } else { ZERO };
                assert!((rho.matrix()[(r, c)] - want).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn reduced_density_trace_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut f = FullVector::zeros(6);
        for a in f.amps.iter_mut() {
            *a = C64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5);
        }
        let n = f.norm();
        f.amps.mapv_inplace(|x| x / n);
        let rho = reduced_density(&f, (1, 3, 5)).unwrap();
        let tr: C64 = (0..8).map(|i| rho.matrix()[(i, i)]).sum();
        assert_abs_diff_eq!(tr.re, 1.0, epsilon = 1e-12);
        assert!(ThreeSpinDensity::from_matrix(rho.matrix().clone()).is_ok());
    }

    #[test]
    fn reduced_density_rejects_repeats() {
        let f = FullVector::zeros(4);
        assert!(matches!(
            reduced_density(&f, (0, 1, 1)),
            Err(WitnessError::RepeatedIndices(0, 1, 1))
        ));
    }

    #[test]
    fn ghz_n_reduces_to_classical_mixture() {
        // frozen from the symbolic partial trace: for N > 3 the cross terms
        // carry orphaned rest-bits, so only the two diagonal projectors stay
        for n in [4usize, 5, 6] {
            let mut f = FullVector::zeros(n);
            let r = std::f64::consts::FRAC_1_SQRT_2;
            f.amps[0] = C64::new(r, 0.0);
            f.amps[(1usize << n) - 1] = C64::new(r, 0.0);
            let rho = reduced_density(&f, (0, 1, 2)).unwrap();
            for r_ in 0..8 {
                for c in 0..8 {
                    let want = if (r_ == 0 && c == 0) || (r_ == 7 && c == 7) {
                        C64::new(0.5, 0.0)
                    } else {
                        ZERO
                    };
                    assert!((rho.matrix()[(r_, c)] - want).norm() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn classify_thresholds() {
        assert_eq!(classify(0.5), EntanglementClass::SeparableConsistent);
        assert_eq!(classify(1.7), EntanglementClass::Entangled);
        assert_eq!(classify(2.3), EntanglementClass::GenuineTripartite);
        assert_eq!(classify(3.0), EntanglementClass::BeyondGhzBound);
    }

    #[test]
    fn density_validation_rejects_bad_inputs() {
        let mut m: Array2<C64> = Array2::eye(8).mapv(|v: C64| v / 8.0);
        m[(0, 1)] = C64::new(0.3, 0.0);
        assert!(matches!(
            ThreeSpinDensity::from_matrix(m),
            Err(WitnessError::NotHermitian(_))
        ));

        let m: Array2<C64> = Array2::eye(8).mapv(|v: C64| v / 4.0);
        assert!(matches!(ThreeSpinDensity::from_matrix(m), Err(WitnessError::BadTrace(_))));

        let mut m: Array2<C64> = Array2::zeros((8, 8));
        m[(0, 0)] = C64::new(1.5, 0.0);
        m[(1, 1)] = C64::new(-0.5, 0.0);
        assert!(matches!(
            ThreeSpinDensity::from_matrix(m),
            Err(WitnessError::NotPositive(_))
        ));
    }

    #[test]
    fn witness_quick_on_w_eigenstate() {
        // already extremal: identity start must lock in 2√3
        let sys = chirality_eigensystem();
        let v = &sys[2].2[0];
        let mut amps = [ZERO; 8];
        for (i, a) in amps.iter_mut().enumerate() {
            *a = v[i];
        }
        let rho = ThreeSpinDensity::from_pure(&amps);
        let res = witness_ex(&rho, &quick_witness_options(3)).unwrap();
        assert_abs_diff_eq!(res.chi_raw, 2.0 * SQRT3, epsilon = 1e-10);
        assert!(res.chi_max >= 2.0 * SQRT3 - 1e-9);
        assert!(res.chi_max <= 2.0 * SQRT3 + 1e-9);
        assert_eq!(res.class, EntanglementClass::BeyondGhzBound);
    }

    #[test]
    fn witness_respects_raw_value_floor() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for s in 0..5 {
            let rho = random_density(&mut rng);
            let res = witness_ex(&rho, &quick_witness_options(s)).unwrap();
            assert!(res.chi_max >= res.chi_raw.abs() - 1e-9);
            assert!(res.chi_max <= 2.0 * SQRT3 + 1e-6);
            assert_abs_diff_eq!(res.e_x, res.chi_max - 1.0);
        }
    }
}

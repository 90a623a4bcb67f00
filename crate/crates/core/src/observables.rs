//! Ground-state measurements: chirality, connected correlators, dimer
//! order, total spin, magnetization and torus momenta.
//!
//! Everything here is a pure function of immutable states. Degenerate
//! manifolds are handled by projecting the observable into the manifold and
//! diagonalizing the resulting small matrix, so quantities like the mean
//! chirality stay well defined when ground states come in ± chirality
//! pairs.

use ndarray::Array1;
use num_complex::Complex64 as C64;
use thiserror::Error;

use crate::eigensolver::GroundManifold;
use crate::hamiltonian::{chiral_apply, heisenberg_apply};
use crate::hilbert::BasisState;
use crate::lattice::{torus_translations, LatticeSpec, Site};
use crate::state::{inner, SpinState};

#[derive(Debug, Error)]
pub enum ObservableError {
    #[error("momentum quantum numbers are defined on torus geometries only")]
    NotTorus,
    #[error("⟨S²⟩ = {s2:.8} is not an S(S+1) eigenvalue within tolerance (residual {residual:.2e})")]
    NotSpinEigenvalue { s2: f64, residual: f64 },
    #[error("state is not an S² eigenstate (⟨S²⟩ = {s2:.8}, dispersion {dispersion:.2e}); re-diagonalize S² inside the manifold")]
    MixedMultiplet { s2: f64, dispersion: f64 },
}

fn real_part(c: C64, what: &str) -> f64 {
    assert!(
        c.im.abs() < 1e-9 * c.norm().max(1.0),
        "{what} has imaginary residue {:.3e}",
        c.im
    );
    c.re
}

fn apply_terms<S: SpinState>(
    state: &S,
    mut term: impl FnMut(BasisState, &mut dyn FnMut(BasisState, C64)),
) -> S {
    let mut out = state.zero_like();
    let zero = C64::new(0.0, 0.0);
    for idx in 0..state.len() {
        let (s, amp) = state.entry(idx);
        if amp != zero {
            term(s, &mut |t, c| out.accumulate(t, c * amp));
        }
    }
    out
}

/// σ⃗_i·σ⃗_j |ψ⟩.
pub fn apply_pair<S: SpinState>(state: &S, i: Site, j: Site) -> S {
    apply_terms(state, |s, emit| {
        for (t, c) in heisenberg_apply(i, j, s) {
            emit(t, c);
        }
    })
}

/// σ⃗_i·(σ⃗_j × σ⃗_k) |ψ⟩ for the ordered triple.
pub fn apply_chirality<S: SpinState>(state: &S, triple: (Site, Site, Site)) -> S {
    apply_terms(state, |s, emit| {
        for (t, c) in chiral_apply(triple.0, triple.1, triple.2, s) {
            emit(t, c);
        }
    })
}

/// Coupling-signed total chirality Σ_p X_p · σ⃗·(σ⃗×σ⃗) |ψ⟩.
pub fn apply_total_chirality<S: SpinState>(state: &S, spec: &LatticeSpec) -> S {
    apply_terms(state, |s, emit| {
        for p in &spec.plaquettes {
            let sign = f64::from(p.sign);
            for (t, c) in chiral_apply(p.i, p.j, p.k, s) {
                emit(t, sign * c);
            }
        }
    })
}

/// S⃗_tot² |ψ⟩ with S⃗_tot = ½ Σ σ⃗_i.
pub fn apply_total_spin_squared<S: SpinState>(state: &S) -> S {
    let n = state.n_sites();
    let diag = 3.0 * n as f64 / 4.0;
    apply_terms(state, |s, emit| {
        emit(s, C64::new(diag, 0.0));
        for i in 0..n {
            for j in i + 1..n {
                for (t, c) in heisenberg_apply(i, j, s) {
                    emit(t, 0.5 * c);
                }
            }
        }
    })
}

/// ⟨ψ| X_ijk |ψ⟩ for a normalized state; real by Hermiticity.
pub fn chirality_expectation<S: SpinState>(state: &S, triple: (Site, Site, Site)) -> f64 {
    let xv = apply_chirality(state, triple);
    real_part(inner(state, &xv), "chirality expectation")
}

/// Mean ground-state chirality per plaquette.
///
/// The signed total chirality operator is projected onto the (possibly
/// degenerate) ground manifold and diagonalized there; the largest
/// eigenvalue magnitude divided by the plaquette count is returned. For a
/// non-degenerate ground state this reduces to |⟨Σ X⟩| / N_plaq.
pub fn mean_chirality(manifold: &GroundManifold, spec: &LatticeSpec) -> f64 {
    if spec.plaquettes.is_empty() || manifold.vectors.is_empty() {
        return 0.0;
    }
    let d = manifold.vectors.len();
    let applied: Vec<_> = manifold
        .vectors
        .iter()
        .map(|mv| apply_total_chirality(&mv.vector, spec))
        .collect();
    let m = faer::Mat::from_fn(d, d, |a, b| {
        if manifold.vectors[a].n_up == manifold.vectors[b].n_up {
            inner(&manifold.vectors[a].vector, &applied[b])
        } else {
            C64::new(0.0, 0.0)
        }
    });
    let evd = m
        .self_adjoint_eigen(faer::Side::Lower)
        .expect("projected chirality eigendecomposition");
    let s = evd.S().column_vector();
    let max_abs = (0..d).map(|i| s[i].re.abs()).fold(0.0, f64::max);
    max_abs / spec.plaquettes.len() as f64
}

/// ⟨σ_i^x⟩, ⟨σ_i^y⟩, ⟨σ_i^z⟩.
///
/// The x and y components flip one spin, so on a fixed-`S_z` sector vector
/// the lookup lands outside the sector and the sums are empty; they are
/// computed (and checked real) rather than assumed zero.
pub fn sigma_expectation<S: SpinState>(state: &S, site: Site) -> [f64; 3] {
    let zero = C64::new(0.0, 0.0);
    let mut x = zero;
    let mut y = zero;
    let mut z = zero;
    for idx in 0..state.len() {
        let (s, amp) = state.entry(idx);
        if amp == zero {
            continue;
        }
        let zi = s.z(site);
        z += amp.conj() * zi * amp;
        let t = BasisState(s.0 ^ (1 << site));
        let flip_amp = state.amplitude(t).conj();
        // X|s⟩ = |t⟩; Y|s⟩ = i·z_i(s)|t⟩
        x += flip_amp * amp;
        y += flip_amp * C64::new(0.0, zi) * amp;
    }
    [
        real_part(x, "⟨σ_x⟩"),
        real_part(y, "⟨σ_y⟩"),
        real_part(z, "⟨σ_z⟩"),
    ]
}

/// Connected spin-spin correlator C_ij = ⟨σ⃗_i·σ⃗_j⟩ − ⟨σ⃗_i⟩·⟨σ⃗_j⟩.
pub fn spin_correlator<S: SpinState>(state: &S, i: Site, j: Site) -> f64 {
    let pair = real_part(inner(state, &apply_pair(state, i, j)), "⟨σ⃗·σ⃗⟩");
    let a = sigma_expectation(state, i);
    let b = sigma_expectation(state, j);
    pair - (a[0] * b[0] + a[1] * b[1] + a[2] * b[2])
}

/// Connected chirality correlator ⟨X_a X_b⟩ − ⟨X_a⟩⟨X_b⟩ between two
/// ordered triples.
///
/// Plaquettes sharing sites do not commute, so the operator product is
/// symmetrized: the value is Re⟨X_a X_b⟩ = ⟨{X_a, X_b}⟩/2.
pub fn chiral_correlator<S: SpinState>(
    state: &S,
    a: (Site, Site, Site),
    b: (Site, Site, Site),
) -> f64 {
    let xa = apply_chirality(state, a);
    let xb = apply_chirality(state, b);
    let xx = inner(&xa, &xb).re;
    let ea = real_part(inner(state, &xa), "⟨X⟩");
    let eb = real_part(inner(state, &xb), "⟨X⟩");
    xx - ea * eb
}

/// Normalized connected dimer correlator between a reference bond `(k,l)`
/// and a bond `(i,j)`, with the singlet projector d = (1 − σ⃗·σ⃗)/4:
///
/// ```text
/// D = (⟨d_ij d_kl⟩ − ⟨d_ij⟩⟨d_kl⟩) / (⟨d_kl⟩ (1 − ⟨d_ij⟩))
/// ```
///
/// `None` when the denominator degenerates. For `bond == reference` the
/// projector identity d² = d makes D ≡ 1 whenever ⟨d⟩ ∉ {0, 1}, and the
/// ⟨d⟩ → 1 limit (an exact singlet on the bond) is also 1; only ⟨d⟩ = 0
/// stays undefined.
pub fn dimer_correlator<S: SpinState>(
    state: &S,
    reference: (Site, Site),
    bond: (Site, Site),
) -> Option<f64> {
    const EPS: f64 = 1e-12;
    let dimer_apply = |b: (Site, Site)| -> S {
        apply_terms(state, |s, emit| {
            emit(s, C64::new(0.25, 0.0));
            for (t, c) in heisenberg_apply(b.0, b.1, s) {
                emit(t, -0.25 * c);
            }
        })
    };
    let same = (reference.0.min(reference.1), reference.0.max(reference.1))
        == (bond.0.min(bond.1), bond.0.max(bond.1));
    let d_ref = dimer_apply(reference);
    let e_ref = real_part(inner(state, &d_ref), "⟨d⟩");
    if same {
        return if e_ref.abs() < EPS { None } else { Some(1.0) };
    }
    let d_bond = dimer_apply(bond);
    let e_bond = real_part(inner(state, &d_bond), "⟨d⟩");
    let denom = e_ref * (1.0 - e_bond);
    if denom.abs() < EPS {
        return None;
    }
    // bonds sharing a site do not commute: symmetrize the product
    let dd = inner(&d_bond, &d_ref).re;
    Some((dd - e_bond * e_ref) / denom)
}

/// Total spin of one state: `s2_raw = ⟨S⃗²⟩`, and S solving S(S+1) = s2_raw
/// rounded to the nearest half-integer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TotalSpin {
    pub s: f64,
    pub s2_raw: f64,
}

pub fn total_spin<S: SpinState>(state: &S) -> Result<TotalSpin, ObservableError> {
    let applied = apply_total_spin_squared(state);
    let s2 = real_part(inner(state, &applied), "⟨S²⟩");
    // eigenstate check: ‖S²ψ − ⟨S²⟩ψ‖
    let mut disp2 = 0.0;
    for idx in 0..applied.len() {
        let (bits, a) = applied.entry(idx);
        let d = a - C64::new(s2, 0.0) * state.amplitude(bits);
        disp2 += d.norm_sqr();
    }
    let dispersion = disp2.sqrt();
    if dispersion > 1e-6 * s2.abs().max(1.0) {
        return Err(ObservableError::MixedMultiplet { s2, dispersion });
    }
    let s_exact = 0.5 * ((1.0 + 4.0 * s2).sqrt() - 1.0);
    let s = (2.0 * s_exact).round() / 2.0;
    let residual = (s2 - s * (s + 1.0)).abs();
    if residual > 1e-6 {
        return Err(ObservableError::NotSpinEigenvalue { s2, residual });
    }
    Ok(TotalSpin { s, s2_raw: s2 })
}

/// Distinct total-spin values across a ground manifold, obtained by
/// diagonalizing S² projected into the manifold (the right thing when the
/// solver hands back mixed-multiplet combinations).
pub fn manifold_spin_values(manifold: &GroundManifold) -> Vec<f64> {
    let d = manifold.vectors.len();
    if d == 0 {
        return Vec::new();
    }
    let applied: Vec<_> = manifold
        .vectors
        .iter()
        .map(|mv| apply_total_spin_squared(&mv.vector))
        .collect();
    let m = faer::Mat::from_fn(d, d, |a, b| {
        if manifold.vectors[a].n_up == manifold.vectors[b].n_up {
            inner(&manifold.vectors[a].vector, &applied[b])
        } else {
            C64::new(0.0, 0.0)
        }
    });
    let evd = m
        .self_adjoint_eigen(faer::Side::Lower)
        .expect("projected S² eigendecomposition");
    let sd = evd.S().column_vector();
    let mut out: Vec<f64> = (0..d)
        .map(|i| {
            let s2 = sd[i].re.max(0.0);
            (((1.0 + 4.0 * s2).sqrt() - 1.0).round() / 2.0).max(0.0)
        })
        .collect();
    out.sort_by(f64::total_cmp);
    out.dedup_by(|a, b| (*a - *b).abs() < 1e-9);
    out
}

/// Momentum phase pair `(k_row, k_col)` for each manifold state on a torus,
/// snapped to {0, π} when within 1e−6 and reported raw otherwise.
pub fn momentum_numbers(
    manifold: &GroundManifold,
    spec: &LatticeSpec,
) -> Result<Vec<(f64, f64)>, ObservableError> {
    let (perm_row, perm_col) = torus_translations(spec).ok_or(ObservableError::NotTorus)?;
    let mut out = Vec::new();
    // translations conserve S_z: work sector block by sector block
    let mut sectors: Vec<usize> = manifold.vectors.iter().map(|v| v.n_up).collect();
    sectors.sort_unstable();
    sectors.dedup();
    for n_up in sectors {
        let block: Vec<_> = manifold
            .vectors
            .iter()
            .filter(|v| v.n_up == n_up)
            .collect();
        let d = block.len();
        let translated_row: Vec<_> = block
            .iter()
            .map(|mv| mv.vector.site_permuted(&perm_row))
            .collect();
        let translated_col: Vec<_> = block
            .iter()
            .map(|mv| mv.vector.site_permuted(&perm_col))
            .collect();
        let m_row = faer::Mat::from_fn(d, d, |a, b| inner(&block[a].vector, &translated_row[b]));
        let m_col = faer::Mat::from_fn(d, d, |a, b| inner(&block[a].vector, &translated_col[b]));
        out.extend(simultaneous_phases(&m_row, &m_col));
    }
    Ok(out)
}

/// Eigen-phases of two commuting near-unitary matrices, paired state by
/// state.
fn simultaneous_phases(m_row: &faer::Mat<C64>, m_col: &faer::Mat<C64>) -> Vec<(f64, f64)> {
    let d = m_row.nrows();
    if d == 1 {
        return vec![(snap_phase(m_row[(0, 0)].arg()), snap_phase(m_col[(0, 0)].arg()))];
    }
    let evd = m_row.eigen().expect("translation eigendecomposition");
    let vals = evd.S().column_vector().to_owned();
    let vecs = evd.U().to_owned();
    // cluster by row-eigenvalue, then diagonalize the column translation
    // restricted to each (invariant) cluster
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| {
        vals[a]
            .arg()
            .partial_cmp(&vals[b].arg())
            .expect("comparable phases")
    });
    let mut out = Vec::with_capacity(d);
    let mut start = 0;
    while start < d {
        let mut end = start + 1;
        while end < d && (vals[order[end]] - vals[order[start]]).norm() < 1e-6 {
            end += 1;
        }
        let cluster: Vec<usize> = order[start..end].to_vec();
        // orthonormalize the cluster's eigenvectors
        let mut q: Vec<Array1<C64>> = Vec::new();
        for &c in &cluster {
            let mut v = Array1::from_shape_fn(d, |r| vecs[(r, c)]);
            for u in &q {
                let ov: C64 = u.iter().zip(v.iter()).map(|(a, b)| a.conj() * b).sum();
                v.zip_mut_with(u, |x, y| *x -= ov * y);
            }
            let nv = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
            if nv > 1e-9 {
                v.mapv_inplace(|x| x / nv);
                q.push(v);
            }
        }
        let b = faer::Mat::from_fn(q.len(), q.len(), |p, s| {
            let mut acc = C64::new(0.0, 0.0);
            for r in 0..d {
                let mut mv = C64::new(0.0, 0.0);
                for t in 0..d {
                    mv += m_col[(r, t)] * q[s][t];
                }
                acc += q[p][r].conj() * mv;
            }
            acc
        });
        let phase_row = snap_phase(vals[cluster[0]].arg());
        if q.len() == 1 {
            out.push((phase_row, snap_phase(b[(0, 0)].arg())));
        } else {
            let sub = b.eigen().expect("column translation eigendecomposition");
            let sv = sub.S().column_vector().to_owned();
            for i in 0..q.len() {
                out.push((phase_row, snap_phase(sv[i].arg())));
            }
        }
        start = end;
    }
    out
}

fn snap_phase(angle: f64) -> f64 {
    use std::f64::consts::PI;
    if angle.abs() < 1e-6 {
        0.0
    } else if (angle.abs() - PI).abs() < 1e-6 {
        PI
    } else {
        angle
    }
}

/// The ground vector used for single-state observables: lowest-`n_up`
/// ground sector, first eigenvector. In the ferromagnetic phase this is the
/// fully polarized product state; in the chiral phase of an even-N lattice
/// the choice is unique anyway.
pub fn representative(manifold: &GroundManifold) -> Option<&crate::eigensolver::ManifoldVector> {
    manifold.vectors.first()
}

/// What a correlation map refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Target {
    Site(Site),
    Bond(Site, Site),
    Plaquette(Site, Site, Site),
}

impl Target {
    pub fn sites(&self) -> Vec<Site> {
        match *self {
            Target::Site(s) => vec![s],
            Target::Bond(i, j) => vec![i, j],
            Target::Plaquette(i, j, k) => vec![i, j, k],
        }
    }
}

impl std::fmt::Display for Target {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match *self {
            Target::Site(s) => write!(f, "{s}"),
            Target::Bond(i, j) => write!(f, "{i}-{j}"),
            Target::Plaquette(i, j, k) => write!(f, "{i}-{j}-{k}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CorrelationKind {
    SpinSpin,
    ChiralChiral,
    DimerDimer,
}

/// A reference object, and one connected-correlator value per target object
/// (`None` marks an undefined dimer denominator).
#[derive(Debug, Clone)]
pub struct CorrelationMap {
    pub reference: Target,
    pub kind: CorrelationKind,
    pub values: Vec<(Target, f64, Option<f64>)>,
}

/// Spin-spin correlations from a reference site to every site.
pub fn spin_map<S: SpinState>(state: &S, spec: &LatticeSpec, reference: Site) -> CorrelationMap {
    let values = (0..spec.n_sites)
        .map(|j| {
            (
                Target::Site(j),
                spec.site_distance(reference, j),
                Some(spin_correlator(state, reference, j)),
            )
        })
        .collect();
    CorrelationMap { reference: Target::Site(reference), kind: CorrelationKind::SpinSpin, values }
}

/// Chiral-chiral correlations from a reference plaquette to every
/// plaquette, coupling signs included.
pub fn chiral_map<S: SpinState>(
    state: &S,
    spec: &LatticeSpec,
    reference: (Site, Site, Site),
) -> CorrelationMap {
    let ref_sites = [reference.0, reference.1, reference.2];
    let values = spec
        .plaquettes
        .iter()
        .map(|p| {
            let val = chiral_correlator(state, reference, (p.i, p.j, p.k));
            (
                Target::Plaquette(p.i, p.j, p.k),
                spec.group_distance(&ref_sites, &[p.i, p.j, p.k]),
                Some(val),
            )
        })
        .collect();
    CorrelationMap {
        reference: Target::Plaquette(reference.0, reference.1, reference.2),
        kind: CorrelationKind::ChiralChiral,
        values,
    }
}

/// Dimer-dimer correlations from a reference bond to every bond.
pub fn dimer_map<S: SpinState>(
    state: &S,
    spec: &LatticeSpec,
    reference: (Site, Site),
) -> CorrelationMap {
    let ref_sites = [reference.0, reference.1];
    let values = spec
        .bonds
        .iter()
        .map(|b| {
            (
                Target::Bond(b.i, b.j),
                spec.group_distance(&ref_sites, &[b.i, b.j]),
                dimer_correlator(state, reference, (b.i, b.j)),
            )
        })
        .collect();
    CorrelationMap {
        reference: Target::Bond(reference.0, reference.1),
        kind: CorrelationKind::DimerDimer,
        values,
    }
}

//! Fermionized mean-field theory of the type-A ladder.
//!
//! After the boson/fermion mapping the ladder reduces to a free two-band
//! model over the discrete momenta p = 2πn/L (L = N/2 rungs), with
//!
//! ```text
//! E±(p) = 8(1−α) − 4(1−2α)cos p ± 2√((4λ²+1)sin²p + (1+cos p)²)
//! ```
//!
//! where the order parameter α is the flipped-spin (fermion) density. The
//! ground state fills every strictly negative level, which closes the
//! self-consistency loop αN = #negative levels; ties at E = 0 stay
//! unoccupied. The total energy is −2N plus the filled-level sum, fixed to
//! the exact ferromagnetic value −2 per site in the λ → 0 limit.
//!
//! Expanding E₋ near p = 0 gives E₋ ≈ p²(5/2 − 2λ²), so the band first
//! dips negative at λ_c = √5/2 ≈ 1.1180; the transition is signalled
//! strictly at p ≠ 0 because E₋(0) = 0 identically.

use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MeanFieldError {
    #[error("ladder length must be at least 2, got {0}")]
    LadderTooShort(usize),
    #[error("self-consistency loop failed to reach a fixed point")]
    NoFixedPoint,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    Plus,
    Minus,
}

/// Converged order parameter, occupied momenta and energy per site at one
/// coupling.
#[derive(Debug, Clone)]
pub struct MeanFieldSolution {
    pub lambda: f64,
    /// Rung count L = N/2.
    pub ladder_len: usize,
    /// Fermion density ⟨b†b⟩ ∈ [0, 1]; `alpha * 2L` occupied levels.
    pub alpha: f64,
    pub occupied: Vec<(f64, Branch)>,
    pub energy_per_site: f64,
}

/// Both branch energies E±(p) of the 2×2 momentum-space coupling matrix.
pub fn dispersion(lambda: f64, alpha: f64, p: f64) -> (f64, f64) {
    let base = 8.0 * (1.0 - alpha) - 4.0 * (1.0 - 2.0 * alpha) * p.cos();
    let rad = 2.0
        * ((4.0 * lambda * lambda + 1.0) * p.sin().powi(2) + (1.0 + p.cos()).powi(2)).sqrt();
    (base + rad, base - rad)
}

fn negative_levels(lambda: f64, alpha: f64, ladder_len: usize) -> Vec<(f64, Branch, f64)> {
    let mut out = Vec::new();
    for n in 0..ladder_len {
        let p = std::f64::consts::TAU * n as f64 / ladder_len as f64;
        let (ep, em) = dispersion(lambda, alpha, p);
        if ep < 0.0 {
            out.push((p, Branch::Plus, ep));
        }
        if em < 0.0 {
            out.push((p, Branch::Minus, em));
        }
    }
    out
}

/// Fixed point of αN = #{(p,±): E±(p;α) < 0} by damped iteration with a
/// monotone occupation-count fallback.
pub fn solve_self_consistent(
    lambda: f64,
    ladder_len: usize,
) -> Result<MeanFieldSolution, MeanFieldError> {
    if ladder_len < 2 {
        return Err(MeanFieldError::LadderTooShort(ladder_len));
    }
    let n_sites = 2 * ladder_len;
    let count = |alpha: f64| negative_levels(lambda, alpha, ladder_len).len();

    let mut fixed: Option<usize> = None;
    let mut x = 0.0f64;
    for _ in 0..200 {
        let k = count(x);
        if count(k as f64 / n_sites as f64) == k {
            fixed = Some(k);
            break;
        }
        x = 0.5 * x + 0.5 * (k as f64 / n_sites as f64);
    }
    if fixed.is_none() {
        // occupation count is monotone in α, so iterating from below
        // reaches the least fixed point in at most 2L steps
        let mut k = 0usize;
        for _ in 0..=n_sites {
            let k2 = count(k as f64 / n_sites as f64);
            if k2 == k {
                fixed = Some(k);
                break;
            }
            k = k2;
        }
    }
    let k = fixed.ok_or(MeanFieldError::NoFixedPoint)?;
    let alpha = k as f64 / n_sites as f64;
    let levels = negative_levels(lambda, alpha, ladder_len);
    debug_assert_eq!(levels.len(), k);
    let filled_sum: f64 = levels.iter().map(|(_, _, e)| e).sum();
    let energy = -2.0 * n_sites as f64 + filled_sum;
    Ok(MeanFieldSolution {
        lambda,
        ladder_len,
        alpha,
        occupied: levels.into_iter().map(|(p, b, _)| (p, b)).collect(),
        energy_per_site: energy / n_sites as f64,
    })
}

/// Closed-form transition from the small-p expansion: λ_c = √5/2.
pub fn closed_form_transition() -> f64 {
    5.0_f64.sqrt() / 2.0
}

/// Smallest λ > 0 at which E₋(p; α=0) turns negative at some p ≠ 0, by
/// bisection on the sign of the small-p curvature.
pub fn transition_point() -> f64 {
    let p0 = 1e-3;
    let curvature = |lambda: f64| dispersion(lambda, 0.0, p0).1 / (p0 * p0);
    let mut lo = 0.5;
    let mut hi = 2.0;
    debug_assert!(curvature(lo) > 0.0 && curvature(hi) < 0.0);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if curvature(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[derive(Debug, Clone, Copy)]
pub struct SweepPoint {
    pub lambda: f64,
    pub alpha: f64,
    pub energy_per_site: f64,
}

/// Self-consistent solutions over a sorted coupling grid.
pub fn energy_sweep(grid: &[f64], ladder_len: usize) -> Result<Vec<SweepPoint>, MeanFieldError> {
    grid.iter()
        .map(|&lambda| {
            solve_self_consistent(lambda, ladder_len).map(|s| SweepPoint {
                lambda,
                alpha: s.alpha,
                energy_per_site: s.energy_per_site,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn dispersion_reference_points() {
        let (ep, em) = dispersion(0.3, 0.0, 0.0);
        assert_abs_diff_eq!(ep, 8.0, epsilon = 1e-14);
        assert_abs_diff_eq!(em, 0.0, epsilon = 1e-14);

        let (ep, em) = dispersion(5.0, 0.0, std::f64::consts::PI);
        assert_abs_diff_eq!(ep, 12.0, epsilon = 1e-12);
        assert_abs_diff_eq!(em, 12.0, epsilon = 1e-12);

        let (ep, em) = dispersion(1.0, 0.0, std::f64::consts::FRAC_PI_2);
        assert_abs_diff_eq!(ep, 8.0 + 2.0 * 6.0f64.sqrt(), epsilon = 1e-12);
        assert_abs_diff_eq!(em, 8.0 - 2.0 * 6.0f64.sqrt(), epsilon = 1e-12);
    }

    #[test]
    fn branch_order_periodicity_and_symmetries() {
        for i in 0..40 {
            let p = std::f64::consts::TAU * i as f64 / 40.0;
            for lambda in [0.0, 0.7, 1.5, -1.5] {
                for alpha in [0.0, 0.2, 0.5] {
                    let (ep, em) = dispersion(lambda, alpha, p);
                    assert!(ep >= em - 1e-12);
                    let (ep2, em2) = dispersion(lambda, alpha, p + std::f64::consts::TAU);
                    assert_abs_diff_eq!(ep, ep2, epsilon = 1e-10);
                    assert_abs_diff_eq!(em, em2, epsilon = 1e-10);
                    let (ep3, em3) = dispersion(lambda, alpha, std::f64::consts::TAU - p);
                    assert_abs_diff_eq!(ep, ep3, epsilon = 1e-10);
                    assert_abs_diff_eq!(em, em3, epsilon = 1e-10);
                    let (ep4, em4) = dispersion(-lambda, alpha, p);
                    assert_abs_diff_eq!(ep, ep4, epsilon = 1e-12);
                    assert_abs_diff_eq!(em, em4, epsilon = 1e-12);
                }
            }
        }
    }

    #[test]
    fn minus_branch_pinned_at_zero_momentum() {
        for lambda in [0.0, 0.5, 1.118, 3.0] {
            for alpha in [0.0, 0.3] {
                assert_abs_diff_eq!(dispersion(lambda, alpha, 0.0).1, 0.0, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn transition_matches_closed_form() {
        assert_abs_diff_eq!(transition_point(), closed_form_transition(), epsilon = 1e-3);
        assert_abs_diff_eq!(closed_form_transition(), 1.118_033_988_749_895, epsilon = 1e-12);
    }

    #[test]
    fn band_stays_nonnegative_below_transition() {
        // fine-grid minimum of E₋ at λ = 1
        let mut min = f64::INFINITY;
        let mut p = 1e-4;
        while p < std::f64::consts::TAU {
            min = min.min(dispersion(1.0, 0.0, p).1);
            p += 1e-4;
        }
        assert!(min >= -1e-12, "min E₋ = {min}");
    }

    #[test]
    fn ferromagnetic_branch_solution() {
        let s = solve_self_consistent(0.5, 64).unwrap();
        assert_eq!(s.alpha, 0.0);
        assert_eq!(s.occupied.len(), 0);
        assert_abs_diff_eq!(s.energy_per_site, -2.0, epsilon = 1e-14);
    }

    #[test]
    fn occupation_onsets_above_transition() {
        let s = solve_self_consistent(1.2, 256).unwrap();
        assert!(s.alpha > 0.0);
        assert!(s.energy_per_site < -2.0);
        assert_abs_diff_eq!(s.alpha * 512.0, s.occupied.len() as f64, epsilon = 1e-12);
        // every occupied level is nonpositive at the converged alpha
        for &(p, b) in &s.occupied {
            let (ep, em) = dispersion(1.2, s.alpha, p);
            let e = if b == Branch::Plus { ep } else { em };
            assert!(e <= 0.0);
        }
        // fixed point: recounting at the converged alpha reproduces it
        let recount = negative_levels(1.2, s.alpha, 256).len();
        assert_abs_diff_eq!(recount as f64 / 512.0, s.alpha, epsilon = 1e-10);
    }

    #[test]
    fn alpha_nondecreasing_in_lambda() {
        let grid: Vec<f64> = (0..40).map(|i| 0.05 * i as f64).collect();
        let sweep = energy_sweep(&grid, 128).unwrap();
        for w in sweep.windows(2) {
            assert!(w[1].alpha >= w[0].alpha - 1e-12);
        }
    }

    #[test]
    fn short_ladder_rejected() {
        assert_eq!(solve_self_consistent(1.0, 1).unwrap_err(), MeanFieldError::LadderTooShort(1));
    }
}

//! Shared fixtures for the kernel benchmarks.

use ndarray::Array1;
use num_complex::Complex64 as C64;

use trispin_core::hamiltonian::{assemble_with_budget, AssemblyRequest, SparseOperator};
use trispin_core::lattice::LatticeSpec;

/// Assemble one sector operator, explicit or matrix-free.
pub fn sector_operator(spec: &LatticeSpec, lambda: f64, n_up: usize, explicit: bool) -> SparseOperator {
    let budget = if explicit { usize::MAX } else { 0 };
    assemble_with_budget(AssemblyRequest { spec, lambda, n_up }, budget).expect("assembly")
}

/// A reproducible dense input vector.
pub fn probe_vector(dim: usize) -> Array1<C64> {
    Array1::from_shape_fn(dim, |i| {
        let x = (i as f64 * 0.734_912 + 0.17).sin();
        let y = (i as f64 * 1.292_735 + 0.43).cos();
        C64::new(x, y)
    })
}

//! Exact diagonalization and mean-field toolkit for spin-½ triangular
//! lattice models with ferromagnetic Heisenberg and three-spin chiral
//! interactions,
//!
//! ```text
//! H(λ) = − Σ_⟨ij⟩ J_ij σ⃗_i·σ⃗_j + λ Σ_⟨ijk⟩ X_ijk σ⃗_i·(σ⃗_j × σ⃗_k),
//! ```
//!
//! on quasi-1D ladders, hub-and-rim rings and periodic 2D tori.
//!
//! - [`lattice`]: signed coupling tables for each geometry
//! - [`hilbert`]: fixed-magnetization sector bases with combinatorial rank
//! - [`state`]: sector and full-space state vectors
//! - [`hamiltonian`]: sparse / matrix-free sector Hamiltonians
//! - [`eigensolver`]: deflated Lanczos and the ground-manifold scan
//! - [`observables`]: chirality, correlators, dimer order, spin, momenta
//! - [`witness`]: the three-spin chiral entanglement witness
//! - [`meanfield`]: the fermionized mean-field ladder theory

pub mod eigensolver;
pub mod hamiltonian;
pub mod hilbert;
pub mod lattice;
pub mod meanfield;
pub mod observables;
pub mod state;
pub mod witness;

pub use eigensolver::{ground_manifold, EigenOptions, GroundManifold, ManifoldOptions};
pub use hamiltonian::{assemble, AssemblyRequest, SparseOperator};
pub use hilbert::{BasisState, SectorBasis};
pub use lattice::{
    build_ladder_a, build_ladder_b, build_ladder_c, build_ring, build_torus, GeometryTag,
    LatticeSpec,
};
pub use state::{FullVector, SectorVector, SpinState};
pub use witness::{EntanglementClass, ThreeSpinDensity, WitnessResult};

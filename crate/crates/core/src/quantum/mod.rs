//! Full quantum treatment: master equation, states and entropies.

mod density;
pub mod evolve;
pub mod kernel;
pub mod lindblad;

pub use density::{
    quantum_mutual_information, time_averaged_state, von_neumann_entropy, DensityMatrix, RunningAverage,
    HERMITICITY_TOL, POSITIVITY_TOL, TRACE_TOL,
};
pub use evolve::{evolve, EvolveOptions, ReadoutSample, SnapshotPolicy, Stepping, Trajectory};
pub use lindblad::{build_hamiltonian, lindblad_rhs};

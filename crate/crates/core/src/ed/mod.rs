//! Exact diagonalization of spin-½ chains: Hamiltonians built from Pauli
//! strings, time-averaged states and their ranks, projection errors and
//! energy cumulants.

mod averaged;
mod cumulants;
mod pauli;
mod spectrum;

pub use averaged::{
    averaged_state, effective_rank, hermitian_norm, projection_errors, rank_curve, riemann_average,
    uniform_kernel, AveragedState, ProjectionError, RankPoint, RankResult, EIGENVALUE_CLAMP,
    KERNEL_TAYLOR_CUTOFF,
};
pub use cumulants::{
    build_hn, cumulant_densities, cumulant_density, cumulants_from_moments, energy_cumulants,
    energy_cumulants_from_state, power_moments, MAX_CUMULANT_ORDER,
};
pub use pauli::{
    build_hamiltonian, Boundary, DenseOperator, Pauli, PauliHamiltonian, PauliTerm, MAX_SITES,
};
pub use spectrum::{
    diagonalize, ground_state, product_state, Basis, Direction, GroundState, Level,
    SpectralDecomposition, DEGENERACY_TOL, GROUND_GAP_TOL, LEVEL_WEIGHT_FLOOR,
};

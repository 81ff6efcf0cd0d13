//! Biorthogonal eigenfunction systems for non-Hermitian periodic Hamiltonians
//! `H = (p + nu)^2 + sum_k mu_k e^{ikx}`, together with their bilocal kernels,
//! classical complex trajectories and a Liouville-type trial-energy scan.

pub mod biortho;
pub mod classical;
pub mod cli;
pub mod error;
pub mod hamiltonian;
pub mod kernels;
pub mod laurent;
pub mod models;
pub mod qft;
pub mod specfun;

pub use biortho::{BiorthogonalSystem, BuildOptions, EigenMethod, Sector, StateVector};
pub use error::{Error, Result};
pub use hamiltonian::HamiltonianSpec;
pub use laurent::LaurentPoly;

//! Monte Carlo simulation of two exchange-coupled singlet-triplet qubits
//! whose exchange splittings are shaken by random telegraph charge noise.
//!
//! Units: time in ns, energies and angular frequencies in rad/ns, ħ = 1.
//! The computational basis is |↑↑⟩, |↑↓⟩, |↓↑⟩, |↓↓⟩ with |↑⟩ the singlet.
//!
//! The crate is organized bottom-up:
//!
//! - [`noise`]: exact-event telegraph trajectories and their statistics
//! - [`spectral`]: averaged periodograms, Lorentzian and power-law references
//! - [`qdyn`]: Hamiltonians, states, and piecewise-exact propagation
//! - [`entanglement`]: concurrence and its signed precursor (DDSE)
//! - [`montecarlo`]: reproducible trajectory averaging
//! - [`protocol`]: the prepare-then-entangle pulse sequence and sweeps
//! - [`config`], [`cli`]: JSON-configured command-line front end
//!
//! Everything downstream of a master seed is bitwise deterministic,
//! including under parallel execution with any worker count.

pub mod cli;
pub mod config;
pub mod entanglement;
pub mod error;
pub mod montecarlo;
pub mod noise;
pub mod protocol;
pub mod qdyn;
pub mod spectral;

pub use entanglement::{concurrence, ddse, pure_state_concurrence};
pub use error::{Error, Result};
pub use montecarlo::{run_ensemble, EnsembleConfig, EnsembleResult};
pub use noise::{generate_trajectory, InitialSignMode, RtnParams, RtnTrajectory};
pub use protocol::{shulman_protocol, DbMode, Protocol, PulsePhase};
pub use qdyn::{
    build_noise_hamiltonian, build_system_hamiltonian, evolve_segment, propagate_trajectory,
    ControlParams, DensityMatrix, HermitianOp, StateVector,
};
pub use spectral::{average_psd, fit_power_law, lorentzian_psd, PowerLawFit, Spectrum};

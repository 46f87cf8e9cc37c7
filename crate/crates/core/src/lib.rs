//! Periodically driven non-Hermitian Aubry-André-Harper chain.
//!
//! The drive alternates uniform hopping `H_A` and the complex quasi-periodic
//! potential `V_n = V cos(2 pi alpha n + theta + i h)` every half period on a
//! ring. This crate builds the exact one-period propagator `U(T)`, extracts
//! quasi-energies and Floquet modes, measures localization, locates the
//! real-to-complex transition `h_{c,omega}`, compares it with truncated
//! effective Hamiltonians, and runs Loschmidt-echo quenches.

pub mod dynamics;
pub mod effective;
pub mod error;
pub mod matrix;
pub mod model;
pub mod observables;
pub mod phase;
pub mod propagator;
pub mod spectral;

pub use num_complex::Complex64;

pub use dynamics::{loschmidt_echo, select_initial_state, EchoPoint, EchoSeries, InitialSelector, QuenchSpec};
pub use effective::{build_hf1, build_hf2, effective_hamiltonian, effective_hc, hc_infinity, EffectiveHamiltonian};
pub use error::{Error, Result};
pub use matrix::ComplexMatrix;
pub use model::{
    build_hopping, build_potential, fibonacci_approximant, onsite_potential, potential_values, Alpha, ModelParams,
};
pub use observables::{average_ipr, ipr, ipr_scaling, mode_table, ModeRecord, ScalingFit, ScalingResult};
pub use phase::{
    compare_effective, critical_h, hc_curve, kappa_fit, omega_c_search, omega_m_search, phase_grid, CriticalH,
    HcCurve, HcMethod, OmegaMSettings, PhaseCell, PhaseGrid, PhasePoint, SearchSettings, Workers,
};
pub use propagator::{evolve, evolve_state, one_period, step_hopping_exponential, step_potential_exponential, StateVector};
pub use spectral::{classify_spectrum, eigendecompose, quasi_energies, QuasiSpectrum, SpectrumClass, SpectrumLabel};

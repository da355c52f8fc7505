//! Side-by-side numerical treatment of the Schrödinger equation and its
//! Madelung (density/phase) hydrodynamic form on a periodic 1-D grid.
//!
//! Every expectation value and local field is computed by at least two
//! independent routes so the identities connecting them can be checked
//! numerically: momentum-space sums, real-space derivatives, and
//! density/phase forms involving the Bohm quantum potential.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod error;
pub mod grid;
pub mod hydro;
pub mod observables;
pub mod potential;
pub mod propagators;
pub mod report;
pub mod states;
pub mod verify;

pub use error::{Error, Result};
pub use grid::{
    compose, decompose, from_momentum, integrate, phase_gradient, spectral_gradient, spectral_laplacian, to_momentum,
    Grid, MadelungField, MaskedField, WaveField, DEFAULT_DENSITY_FLOOR,
};
pub use hydro::{HydroState, HydroTrajectory};
pub use observables::{Expectation, LocalFields};
pub use potential::PotentialSpec;
pub use propagators::{apply_hamiltonian, evolve, step_cn, step_split, EvolutionResult, Scheme};
pub use report::{Check, Provenance, ScenarioReport};

pub use states::StateSpec;

pub use num_complex::Complex64;

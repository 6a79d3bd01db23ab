//! Spectral simulation of `i u_t = (k P(i∂ₓ) + V) u` on the torus, together
//! with the estimators, transport solutions and experiment harness used to
//! test growth and localization bounds for rough time-dependent potentials.

pub mod error;
pub mod estimators;
pub mod harness;
pub mod potential;
pub mod propagator;
pub mod quadrature;
pub mod rng;
pub mod spectral;
pub mod transport;

pub use error::{Error, Result};
pub use potential::{
    make_constant_imag, make_decaying, make_oscillatory, make_random_bounded,
    make_random_complex, oscillatory_cell_integral, Envelope, OscillatoryQSpec, PotentialKind,
    PotentialModel,
};
pub use propagator::{
    dense_monodromy, duhamel_series, evolve, interaction_entry, step_midpoint, truncation_scan,
    EvolveConfig, MonodromyMatrix, Observable, Trajectory,
};
pub use spectral::{
    apply_potential, project, sobolev_norm, symbol_multiplier, tail_mass, FourierState, Part,
    Picture, SobolevIndex, SymbolKind, SymbolSpec, C64,
};

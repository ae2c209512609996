//! Simulation of STIRAP population transfer for a single trapped ion.
//!
//! The physical system is a driven 3-level Λ scheme (two hyperfine qubit
//! states coupled through a far-detuned excited state by a pump/Stokes
//! Raman pair) tensored with one quantized harmonic motional mode. The
//! crate provides
//!
//! - closed-form analytics of the Λ system (dressed states, mixing angle,
//!   the time-dependent adiabaticity criterion) in [`lambda`],
//! - Gaussian and truncated pulse schedules in [`pulses`],
//! - Fock-space machinery (thermal distributions, Lamb-Dicke coupling
//!   scalings) in [`fockspace`],
//! - state-vector and density-matrix time evolution of the composite
//!   system in [`dynamics`], built on the unitary propagator in
//!   [`integrate`],
//! - parameter-sweep experiments (delay scans, 2D regime maps,
//!   Fock-resolved dynamics, thermometry) in [`experiments`],
//! - run-configuration parsing and result output for the CLI in
//!   [`config`] and [`output`].

pub mod config;
pub mod dynamics;
pub mod experiments;
pub mod fockspace;
pub mod integrate;
pub mod lambda;
pub mod output;
pub mod pulses;

pub use num_complex::Complex64 as C64;

/// 2π, for converting ordinary frequencies to angular ones.
pub const TAU: f64 = std::f64::consts::TAU;

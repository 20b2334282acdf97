//! Distorted Fourier transform toolkit for the quadratic Schrödinger equation
//! i u_t + (-Δ + V) u = u² with a decaying radial potential V.
//!
//! Generalized eigenfunctions are built from partial waves; the transform,
//! the nonlinear spectral distribution, bilinear annulus operators and the
//! nonlinear evolution all sit on top of [`radialwave::EigenfunctionTable`].

pub mod acceptance;
pub mod bilinear;
pub mod cache;
pub mod config;
pub mod cutoff;
pub mod dft;
pub mod error;
pub mod evolve;
pub mod grid;
pub mod io;
pub mod nsd;
pub mod potential;
pub mod quadrature;
pub mod radialwave;
pub mod special;

pub use error::{DspecError, Result};
pub use grid::{KGrid, RadialGrid};
pub use potential::RadialPotential;

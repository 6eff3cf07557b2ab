//! Spectral laboratory for periodic KdV and the cubic Szegő equation with
//! random Gaussian Fourier data.
//!
//! The crate samples random initial data, computes second iterates of the
//! Duhamel formulations, evaluates exact Gaussian (Wick) expectations, runs
//! pseudospectral time evolution, and estimates discrete Bourgain-space
//! norms. Everything is organised around [`spectral::ModeVector`], the
//! truncated Fourier coefficient vector of a periodic function with the
//! convention `u(x) = Σ û(n) e^{inx}`.
//!
//! Module map:
//!
//! - [`spectral`]: mode vectors, convolution, derivative, projections, norms.
//! - [`random`]: seeded Gaussian data and probabilistic diagnostics.
//! - [`kdv`]: KdV linear flow, nonlinearity, second iterate, divergence and
//!   boundedness scans.
//! - [`szego`]: Szegő trilinear term, second iterate, growth curves and the
//!   exact Wick expectation.
//! - [`evolve`]: integrating-factor RK4 for KdV, RK4 for Szegő, smoothing
//!   profiles.
//! - [`xsb`]: discrete `X^{s,b}`, `Y^{s,b}`, `Z^{s,b}` norms, time cutoff,
//!   modulation regions and the `L^4` Strichartz ratio.
//! - [`stats`]: Monte Carlo summaries and least-squares fits.
//! - [`experiments`]: the named experiment registry behind the `lab` binary.

pub mod error;
pub mod evolve;
pub mod experiments;
pub mod kdv;
pub mod random;
pub mod spectral;
pub mod stats;
pub mod szego;
pub mod xsb;

pub use error::{LabError, Result};
pub use spectral::{LatticeSpec, ModeVector, Symmetry};

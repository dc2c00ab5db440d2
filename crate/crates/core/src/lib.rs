//! Quasiclassical stochastic simulation of dissipative harmonic oscillators.
//!
//! A damped oscillator in contact with a thermal environment can be modelled
//! by a Langevin equation with a memory friction kernel and a stationary
//! Gaussian driving force. Choosing the force power spectrum
//! `P_F(w) = pi * J(w)/w * N(w, T)` with the quantum noise spectrum
//! `N(w, T) = hbar*w*coth(hbar*w / 2*kB*T)` makes the classical trajectories
//! reproduce, in distribution, the position/momentum moments of the fully
//! quantum open system; the classical spectrum `N(w, T) = 2*kB*T` recovers
//! ordinary Brownian motion. This crate implements both sides of that
//! correspondence:
//!
//! * [`bath`]   — spectral densities, memory kernels, noise spectra and the
//!   force power spectral density shared by everything else.
//! * [`noise`]  — FFT synthesis of stationary Gaussian traces with a
//!   prescribed spectrum, plus PSD / autocorrelation / Gaussianity
//!   estimators used to verify them.
//! * [`oracle`] — closed-form and quadrature evaluation of the dynamical
//!   moments, steady-state covariances, Gibbs and mean-force covariances.
//!   No stochastic sampling is involved; this is the ground truth the
//!   engine is checked against.
//! * [`engine`] — trajectory integration of the memory Langevin equation
//!   driven by synthesized noise, and ensemble reduction to moment time
//!   series with standard errors.
//! * [`network`] — multi-oscillator harmonic networks with independent baths
//!   at different temperatures: steady-state covariance matrices and heat
//!   currents, both from quadrature and from trajectory ensembles.
//!
//! Internally everything is expressed in nondimensional units
//! `hbar = kB = 1`, and the default oscillator has `m = Omega = 1`.
//! All stochastic operations are deterministic functions of a 64-bit seed.

pub mod bath;
pub mod engine;
pub mod error;
pub mod export;
pub mod network;
pub mod noise;
pub mod oracle;
pub mod quad;
pub mod seed;

pub use bath::{BathSpec, NoiseKind, OscillatorParams, SpectralDensity};
pub use error::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

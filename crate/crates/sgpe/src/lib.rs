//! Stochastic Gross-Pitaevskii toolkit for quasi-1D condensates.
//!
//! The library integrates the dimensionless damped/stochastic GP equation
//!
//! ```text
//! i dF/dtau = (1 - i gamma) [ offset - mu - i k0 d/dzeta - (1/2) d^2/dzeta^2
//!                             + (Omega^2/2) zeta^2 + g |F|^2 ] F + Lambda
//! ```
//!
//! on a periodic grid (pseudospectral derivatives, classical RK4, additive
//! thermal noise with `<Lambda* Lambda> = Lambda0 delta delta`), and provides
//! the surrounding machinery: unit conversions from SI atom/trap parameters,
//! dark-soliton initial states, sonic-horizon (two-region) backgrounds with
//! their Bogoliubov spectra, soliton tracking diagnostics, and the closed-form
//! perturbation-theory predictions the simulations are validated against.
//!
//! Lengths are in units of the transverse oscillator length, times in units of
//! the inverse transverse trap frequency; `F` is the condensate field relative
//! to the background density scale.

pub mod analytic;
pub mod bogoliubov;
pub mod config;
pub mod constants;
pub mod diagnostics;
pub mod dynamics;
pub mod error;
pub mod experiments;
pub mod field;
pub mod grid;
pub mod horizon;
pub mod output;
pub mod soliton;
pub mod spectral;
pub mod units;

pub use error::{Result, SgpeError};

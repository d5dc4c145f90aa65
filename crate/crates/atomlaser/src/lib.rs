//! Stability analysis and simulation for a pumped atom-laser condensate.
//!
//! An atom laser fed by a thermal cloud at rate `R`, with gain coefficient
//! `Gamma`, cavity loss `gamma_c` and an infrared Rabi coupling `Omega`
//! that tunes the effective interaction, reduces near threshold to the
//! complex Ginzburg-Landau equation
//!
//! ```text
//! d phi / d tau = eps phi + (1 + i c1) lap phi - (1 + i c2) |phi|^2 phi
//! ```
//!
//! in units of the healing length `l0` and the loss time `1/gamma_c`.
//! This crate performs that reduction, predicts plane-wave stability from
//! the Benjamin-Feir criterion `1 + c1 c2 > 0`, integrates the equation
//! with a split-step pseudo-spectral scheme, and cross-checks everything
//! against the underlying condensate / thermal-cloud system.
//!
//! Module map:
//!
//! - [`params`]: SI parameters, presets, and the reduction to `(eps, c1, c2)`
//! - [`stability`]: Benjamin-Feir margin, plane-wave dispersion, Rabi threshold
//! - [`cgle`]: split-step integrator for the dimensionless equation
//! - [`coupled`]: the two-field condensate / thermal-cloud system, used as
//!   an oracle for the closed equation
//! - [`sweep`]: (Omega, R) stability maps, analytic and simulated
//! - [`export`], [`config`]: CSV / PGM output and the flat config format
//!
//! The rendered guide in `book/` walks through the same material; its code
//! snippets are compiled and run as doc-tests via [`guide`].

pub mod cgle;
pub mod config;
pub mod constants;
pub mod coupled;
pub mod diagnostics;
mod error;
pub mod export;
pub mod grid;
pub mod guide;
pub mod params;
mod spectral;
pub mod stability;
pub mod sweep;

pub use error::{Error, Result};

/// Complex double, the field sample type everywhere in this crate.
pub type C64 = num_complex::Complex<f64>;

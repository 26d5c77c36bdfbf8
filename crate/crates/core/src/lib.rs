//! Secrecy figures of merit for lattice coset codes on Gaussian and Rayleigh
//! fading wiretap channels.
//!
//! The crate is organized bottom-up:
//!
//! * [`lattice`], [`lll`], [`enumerate`]: lattice construction, reduction and
//!   Fincke–Pohst enumeration.
//! * [`theta`], [`flatness`]: truncated theta series and flatness factors
//!   (primal and dual formulas) with tail estimates.
//! * [`bounds`]: eavesdropper correct-decoding bounds, fading series,
//!   Monte Carlo average flatness, information bounds, design heuristics.
//! * [`catalog`]: named lattices (E8, Leech, A_n*, ...).
//! * [`algebraic`]: totally real quartic and biquadratic field lattices and
//!   the power-of-two sublattice procedure.

pub mod algebraic;
pub mod bounds;
pub mod catalog;
pub mod csv;
pub mod enumerate;
pub mod error;
pub mod flatness;
pub mod lattice;
pub mod lll;
pub mod theta;

pub use error::{Error, Result};
pub use lattice::Lattice;

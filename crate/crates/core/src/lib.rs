//! Free-space N-photon Hong-Ou-Mandel interference.
//!
//! `N` identical single-photon sources sit on a line with spacing `d`; `N`
//! far-field detectors at angles `θ_m` each see a phase step
//! `Δφ_m = k·d·sin θ_m` between adjacent sources. The amplitude for one photon
//! at every detector is the permanent of the transfer matrix
//! `c_nm = c_norm·exp(-i·n·Δφ_m)` and the coincidence rate `G^(N)` is its
//! squared modulus.
//!
//! The crate is `no_std` (it needs `alloc`). Parallel evaluation, file formats
//! and the command line live in the `freehom` companion crate.
//!
//! ```
//! use freehom_core::dipfinder::{canonical_dip, verify_dip};
//! use freehom_core::permanent::Algorithm;
//!
//! let phases = canonical_dip(5).unwrap();
//! let cert = verify_dip(&phases, Algorithm::Glynn).unwrap();
//! assert!(cert.verified);
//! ```
#![no_std]
#![warn(missing_debug_implementations)]

extern crate alloc;

pub mod contour;
pub mod correlation;
pub mod dipfinder;
pub mod error;
pub mod geometry;
pub mod optimize;
pub mod permanent;

pub use error::{Error, Result};
pub use num_complex::Complex64;

/// `n!` as a float.
pub fn factorial(n: usize) -> f64 {
    (1..=n).fold(1.0, |acc, k| acc * k as f64)
}

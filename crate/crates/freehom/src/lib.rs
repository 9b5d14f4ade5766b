//! Standard-library companion to `freehom-core`.
//!
//! Adds thread-parallel evaluation ([`parallel`]), seeded random inputs
//! ([`sampling`]), deterministic CSV/JSON/binary output ([`format`]), the
//! aggregate self-check ([`verify`]), timing runs ([`bench`]) and the
//! `freehom` command line ([`cli`]).

pub mod bench;
pub mod cli;
pub mod format;
pub mod parallel;
pub mod sampling;
pub mod verify;

pub use freehom_core as core;

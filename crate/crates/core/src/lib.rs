//! Exactly solvable PT-symmetric Schrödinger problems with position-dependent
//! mass, built by point canonical transformation from constant-mass reference
//! problems, together with a finite-difference oracle that checks them.
//!
//! The crate is organised bottom-up:
//!
//! * [`specfun`]: complex Gamma, Jacobi and Laguerre polynomials, principal powers.
//! * [`mass`]: the symmetric rational mass family, grids, sampled functions.
//! * [`reference`]: PT-symmetric Scarf II and generalized oscillator problems.
//! * [`pct`]: forward/inverse transformation and wavefunction assembly.
//! * [`oracle`]: BenDaniel–Duke finite differences and a non-Hermitian eigensolver.

pub mod error;
pub mod format;
pub mod mass;
pub mod oracle;
pub mod pct;
pub mod reference;
pub mod specfun;

pub use error::{Error, Result};
pub use num_complex::Complex64;

/// Version string embedded into every emitted artifact.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Schema tag for serialized target problems.
pub const SCHEMA: &str = "pdm-spectra/v1";

//! Difference Galois groups of `φ²y + a·φy + b·y = 0` over elliptic function
//! fields, decided through Riccati equations and divisor obstructions.
//!
//! The crate is `no_std` with `alloc`. Build with `--no-default-features
//! --features libm` on targets without a system math library.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod classify;
pub mod divisor;
mod error;
pub mod lattice;
pub mod quotient;
pub mod riccati;
pub mod sampling;
pub mod special;

pub use error::Error;

/// Complex numbers used throughout.
pub type C64 = num_complex::Complex64;

pub use classify::{
    build_family7, build_lame, classify, rank1_group, ClassifyConfig, DifferenceEquation, GaloisVerdict, GroupShape,
    Rank1Group,
};
pub use divisor::Divisor;
pub use lattice::{LatticeSpec, TorusPoint};
pub use quotient::{EllipticCoefficient, ThetaQuotient};
pub use riccati::{RiccatiCandidate, RiccatiConfig, RiccatiOutcome, RiccatiProblem};
pub use special::EvalConfig;

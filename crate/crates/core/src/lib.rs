//! Exact angular-momentum algebra for average energies of `l^N` shells.
//!
//! Coulomb repulsion within a shell is written either in Slater parameters
//! `F^(k)` or in angular-overlap parameters `E^λ`. This crate converts
//! between the two exactly, counts states by spin, and gives closed forms for
//! the average energy of a configuration and of each spin multiplicity. A
//! brute-force determinant oracle cross-checks the closed forms.

pub mod averages;
pub mod counting;
pub mod error;
pub mod form;
pub mod numerics;
pub mod oracle;
pub mod parametrization;
pub mod wigner;

pub use error::{Error, Result};
pub use form::{Basis, EnergyForm};
pub use numerics::{BigRational, QuadraticSum, SqrtRational};
pub use parametrization::{AomParams, ShellPair, SlaterParams};
pub use wigner::{HalfInt, Parity};

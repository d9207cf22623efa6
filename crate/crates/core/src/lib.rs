//! Exact decision procedures for finiteness of finitely generated matrix
//! semigroups.
//!
//! The crate is layered bottom-up:
//!
//! - [`field`], [`mat`]: exact scalars over the rationals and GF(p^k), dense matrices.
//! - [`semigroup`]: closure enumeration of finite monoids, homomorphisms,
//!   stabilizers and trace monoids.
//! - [`kernel`]: the kernel category of a homomorphism and the finiteness
//!   engine built on it.
//! - [`kleene`]: images of hom-sets of free categories by vertex elimination.
//! - [`matsemi`]: triangularization, trace-form certificates for the
//!   absolutely irreducible case, and the full decision pipeline.
//! - [`certificate`], [`job`]: interchange formats, certificates, and the
//!   job runner behind the CLI and the C ABI.

pub mod certificate;
pub mod echelon;
pub mod error;
pub mod field;
pub mod job;
pub mod kernel;
pub mod kleene;
pub mod matsemi;
pub mod mat;
pub mod numtheory;
pub mod poly;
pub mod semigroup;

pub use error::{AlgebraError, Error, Result};
pub use field::{Field, FieldDescriptor, Scalar, ScalarText};
pub use mat::{Mat, PowerPeriod};

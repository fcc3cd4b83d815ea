//! Exact arithmetic and experiment kernels for character sums over Følner
//! sets in `Q`, `F_q` and `F_p(t)`.
//!
//! Every kernel is written against the context-carrying [`Field`] trait, so the
//! same code runs over the rationals, prime fields, finite fields and rational
//! function fields. The aliases below name the concrete fields.

pub mod characters;
pub mod charsums;
pub mod cyclotomic;
pub mod error;
pub mod fields;
pub mod finite;
pub mod folner;
pub mod identities;
pub mod linalg;
pub mod patterns;
pub mod pgl2;
pub mod poly;
pub mod ratfunc;
pub mod reconstruct;
pub mod registry;
pub mod scalar;

pub use error::{Error, Result};
pub use fields::{FieldDescriptor, FieldElement, Value};
pub use scalar::Field;

/// The rational numbers.
pub type Q = scalar::Rationals;
/// A rational number.
pub type Rational = num_rational::BigRational;
/// `F_p`.
pub type Fp = scalar::PrimeField;
/// `F_{p^n}`.
pub type Fq = finite::FiniteField;
/// `F_p(t)`.
pub type FpT = ratfunc::RationalFunctionField;

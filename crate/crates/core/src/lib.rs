//! Exact verification of Ankeny–Artin–Chowla type congruences for real
//! quadratic fields, Wilson-quotient congruences for Bernoulli numbers, and
//! the low-order coefficients of Kubota–Leopoldt p-adic L-functions.
//!
//! All quantities are exact rationals ([`BigRational`]); a congruence
//! `α ≡ β mod p^k` holds when `v_p(α - β) ≥ k`.

pub mod arith;
pub mod bernoulli;
pub mod characters;
pub mod error;
pub mod padic_lfun;
pub mod primes;
pub mod quadratic_field;
pub mod report;
pub mod suite;

pub use num_bigint::BigInt;
pub use num_rational::BigRational;

pub use arith::{congruent, vp, PadicContext, Valuation};
pub use bernoulli::BernoulliCache;
pub use characters::{CharacterSplit, QuadChar};
pub use error::{Error, Result};
pub use quadratic_field::FieldInvariants;
pub use report::{CongruenceReport, StatementId};

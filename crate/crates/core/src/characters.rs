//! Quadratic Dirichlet characters, evaluated through the Kronecker symbol.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::primes::{is_prime, is_squarefree};

/// The Kronecker symbol `(a/n)` for arbitrary integers.
pub fn kronecker(a: i64, n: i64) -> i8 {
    if n == 0 {
        return if a.abs() == 1 { 1 } else { 0 };
    }
    let mut result: i8 = 1;
    let mut n = n as i128;
    let a = a as i128;
    if n < 0 {
        n = -n;
        if a < 0 {
            result = -result;
        }
    }
    let tz = n.trailing_zeros();
    if tz > 0 {
        if a % 2 == 0 {
            return 0;
        }
        if tz % 2 == 1 && matches!(a.rem_euclid(8), 3 | 5) {
            result = -result;
        }
        n >>= tz;
    }
    result * jacobi(a.rem_euclid(n), n)
}

/// Jacobi symbol for odd positive `n`.
fn jacobi(mut a: i128, mut n: i128) -> i8 {
    debug_assert!(n > 0 && n % 2 == 1);
    let mut result = 1;
    a = a.rem_euclid(n);
    while a != 0 {
        while a % 2 == 0 {
            a /= 2;
            if matches!(n % 8, 3 | 5) {
                result = -result;
            }
        }
        std::mem::swap(&mut a, &mut n);
        if a % 4 == 3 && n % 4 == 3 {
            result = -result;
        }
        a %= n;
    }
    if n == 1 {
        result
    } else {
        0
    }
}

/// Legendre symbol `(a/p)` for an odd prime `p`.
pub fn legendre(a: i64, p: u64) -> Result<i8> {
    if p == 2 || !is_prime(p) {
        return Err(invalid!("legendre symbol needs an odd prime, got {p}"));
    }
    Ok(kronecker(a, p as i64))
}

pub fn is_fundamental_discriminant(disc: i64) -> bool {
    if disc == 1 || disc == 0 {
        return false;
    }
    let abs = disc.unsigned_abs();
    match disc.rem_euclid(4) {
        1 => is_squarefree(abs),
        0 => {
            let n = disc / 4;
            matches!(n.rem_euclid(4), 2 | 3) && is_squarefree(n.unsigned_abs())
        }
        _ => false,
    }
}

/// A primitive quadratic (or the principal) Dirichlet character, identified
/// by its fundamental discriminant. The principal character uses the
/// sentinel discriminant `1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct QuadChar {
    disc: i64,
}

impl QuadChar {
    pub const PRINCIPAL: QuadChar = QuadChar { disc: 1 };

    pub fn principal() -> Self {
        Self::PRINCIPAL
    }

    /// The character `a ↦ (disc/a)`; `disc` must be 1 or fundamental.
    pub fn from_discriminant(disc: i64) -> Result<Self> {
        if disc == 1 || is_fundamental_discriminant(disc) {
            Ok(QuadChar { disc })
        } else {
            Err(invalid!("{disc} is not a fundamental discriminant"))
        }
    }

    pub fn discriminant(&self) -> i64 {
        self.disc
    }

    pub fn conductor(&self) -> u64 {
        self.disc.unsigned_abs()
    }

    /// `χ(-1)`: `+1` for even characters, `-1` for odd ones.
    pub fn parity(&self) -> i8 {
        if self.disc > 0 {
            1
        } else {
            -1
        }
    }

    pub fn is_principal(&self) -> bool {
        self.disc == 1
    }

    /// `χ(a)`, with `χ(a) = 0` when `gcd(a, f) > 1`; the principal character
    /// is identically 1.
    pub fn eval(&self, a: i64) -> i8 {
        if self.is_principal() {
            1
        } else {
            kronecker(self.disc, a)
        }
    }
}

impl fmt::Display for QuadChar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_principal() {
            f.write_str("chi_0")
        } else {
            write!(f, "chi_{}", self.disc)
        }
    }
}

pub fn eval_char(chi: &QuadChar, a: i64) -> i8 {
    chi.eval(a)
}

/// The factorisation `χ_D = (·/p) · ψ_m` for `d = p·m`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CharacterSplit {
    pub d: u64,
    pub p: u64,
    pub m: u64,
    /// 1 when `d ≡ 1 mod 4`, else 2.
    pub delta: u64,
    pub chi_d: QuadChar,
    pub psi_m: QuadChar,
}

impl CharacterSplit {
    /// Field discriminant `D = δ²d`.
    pub fn discriminant(&self) -> i64 {
        self.chi_d.discriminant()
    }

    /// `r = (p - 1) / 2`.
    pub fn r(&self) -> u64 {
        (self.p - 1) / 2
    }

    /// `p* = (-1)^((p-1)/2) p`.
    pub fn p_star(&self) -> i64 {
        signed_prime(self.p)
    }
}

fn signed_prime(p: u64) -> i64 {
    if p % 4 == 1 {
        p as i64
    } else {
        -(p as i64)
    }
}

/// Points beyond which the pointwise identity is only sampled.
const SPLIT_FULL_CHECK: i64 = 1_000_000;

pub fn split_character(d: u64, p: u64) -> Result<CharacterSplit> {
    if p <= 3 || !is_prime(p) {
        return Err(invalid!("split needs a prime p > 3, got {p}"));
    }
    if d < 2 || !is_squarefree(d) {
        return Err(invalid!("{d} is not a squarefree integer > 1"));
    }
    if d % p != 0 {
        return Err(invalid!("{p} does not divide {d}"));
    }
    let delta = if d % 4 == 1 { 1 } else { 2 };
    let disc = (delta * delta * d) as i64;
    let chi_d = QuadChar::from_discriminant(disc)?;
    let p_star = signed_prime(p);
    let psi_m = QuadChar::from_discriminant(disc / p_star)?;
    let split = CharacterSplit { d, p, m: d / p, delta, chi_d, psi_m };

    let upto = disc.min(SPLIT_FULL_CHECK);
    for a in 1..=upto {
        let lhs = chi_d.eval(a);
        if lhs == 0 {
            continue;
        }
        if lhs != kronecker(a, p as i64) * psi_m.eval(a) {
            return Err(crate::error::Error::Invariant(format!(
                "character split fails at a={a} for d={d}, p={p}"
            )));
        }
    }
    Ok(split)
}

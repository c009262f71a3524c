//! Exact rational arithmetic with p-adic valuations.
//!
//! Every "α ≡ β mod p^k" statement in this crate is decided here: the
//! difference is formed exactly and its p-adic valuation compared with `k`.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::primes::{is_prime, pow_mod};

/// Convenience constructor for `n / d`.
pub fn ratio(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: impl Into<BigInt>) -> BigRational {
    BigRational::from_integer(n.into())
}

/// `base^exp` as an exact rational.
pub fn rpow(base: &BigRational, exp: u32) -> BigRational {
    num_traits::pow(base.clone(), exp as usize)
}

/// A p-adic valuation; zero has valuation `+∞`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Valuation {
    Finite(i64),
    Infinite,
}

impl Valuation {
    pub fn finite(self) -> Option<i64> {
        match self {
            Valuation::Finite(v) => Some(v),
            Valuation::Infinite => None,
        }
    }

    /// True when the valuation is at least `k`.
    pub fn at_least(self, k: i64) -> bool {
        match self {
            Valuation::Finite(v) => v >= k,
            Valuation::Infinite => true,
        }
    }
}

impl Ord for Valuation {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Valuation::Infinite, Valuation::Infinite) => Ordering::Equal,
            (Valuation::Infinite, _) => Ordering::Greater,
            (_, Valuation::Infinite) => Ordering::Less,
            (Valuation::Finite(a), Valuation::Finite(b)) => a.cmp(b),
        }
    }
}

impl PartialOrd for Valuation {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Valuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Valuation::Finite(v) => write!(f, "{v}"),
            Valuation::Infinite => f.write_str("inf"),
        }
    }
}

/// A prime together with a congruence depth `k`, standing for "mod p^k".
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PadicContext {
    p: u64,
    depth: u32,
}

impl PadicContext {
    pub const MAX_DEPTH: u32 = 3;

    pub fn new(p: u64, depth: u32) -> Result<Self> {
        if !is_prime(p) {
            return Err(invalid!("{p} is not prime"));
        }
        if depth == 0 || depth > Self::MAX_DEPTH {
            return Err(invalid!("depth {depth} outside 1..={}", Self::MAX_DEPTH));
        }
        Ok(PadicContext { p, depth })
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    /// `p^depth`.
    pub fn modulus(&self) -> u64 {
        self.p.pow(self.depth)
    }
}

fn check_prime(p: u64) -> Result<()> {
    if is_prime(p) {
        Ok(())
    } else {
        Err(invalid!("{p} is not prime"))
    }
}

/// Valuation of a nonzero integer; assumes `p` prime.
pub(crate) fn vp_int(n: &BigInt, p: u64) -> i64 {
    debug_assert!(!n.is_zero());
    let p = BigInt::from(p);
    let mut n = n.abs();
    let mut v = 0;
    loop {
        let (q, r) = n.div_rem(&p);
        if !r.is_zero() {
            return v;
        }
        n = q;
        v += 1;
    }
}

/// Valuation without the primality check, for hot loops with a known prime.
pub(crate) fn vp_unchecked(x: &BigRational, p: u64) -> Valuation {
    if x.is_zero() {
        return Valuation::Infinite;
    }
    Valuation::Finite(vp_int(x.numer(), p) - vp_int(x.denom(), p))
}

/// `v_p(x)`: valuation of the numerator minus that of the denominator.
pub fn vp(x: &BigRational, p: u64) -> Result<Valuation> {
    check_prime(p)?;
    Ok(vp_unchecked(x, p))
}

pub fn is_p_integral(x: &BigRational, p: u64) -> Result<bool> {
    Ok(vp(x, p)?.at_least(0))
}

/// `a ≡ b mod p^k`, i.e. `(a - b) / p^k` is p-integral.
pub fn congruent(a: &BigRational, b: &BigRational, ctx: &PadicContext) -> bool {
    vp_unchecked(&(a - b), ctx.p).at_least(ctx.depth as i64)
}

fn coprime_check(a: i64, p: u64) -> Result<()> {
    if a.unsigned_abs() % p == 0 {
        Err(invalid!("{a} is divisible by {p}"))
    } else {
        Ok(())
    }
}

/// Fermat quotient `(a^(p-1) - 1) / p`.
pub fn fermat_quotient(a: i64, p: u64) -> Result<BigRational> {
    check_prime(p)?;
    coprime_check(a, p)?;
    Ok(int(fermat_quotient_int(a, p)))
}

pub(crate) fn fermat_quotient_int(a: i64, p: u64) -> BigInt {
    let power = num_traits::pow(BigInt::from(a), (p - 1) as usize);
    (power - 1u32) / BigInt::from(p)
}

/// Rational stand-in for `log_p(a)`, correct modulo `p^3`:
/// `(p·F(a) - p²·F(a)²/2) / (p - 1)` with `F` the Fermat quotient.
pub fn log_surrogate(a: i64, p: u64) -> Result<BigRational> {
    check_prime(p)?;
    if p <= 3 {
        return Err(invalid!("log surrogate needs p > 3, got {p}"));
    }
    coprime_check(a, p)?;
    Ok(log_surrogate_from_fq(&fermat_quotient_int(a, p), p))
}

pub(crate) fn log_surrogate_from_fq(fq: &BigInt, p: u64) -> BigRational {
    let pb = BigInt::from(p);
    let pf = &pb * fq;
    // p·F - (p·F)²/2, over (p - 1)
    let numer = BigInt::from(2) * &pf - &pf * &pf;
    BigRational::new(numer, BigInt::from(2 * (p - 1)))
}

/// Teichmüller lift `ω(a) = a^(p^(k-1)) mod p^k`, as a residue in `[0, p^k)`.
pub fn teichmuller(a: i64, ctx: &PadicContext) -> Result<u64> {
    coprime_check(a, ctx.p)?;
    let m = ctx.modulus();
    let a = a.rem_euclid(m as i64) as u64;
    Ok(pow_mod(a, ctx.p.pow(ctx.depth - 1), m))
}

/// `⟨a⟩ = a · ω(a)^(-1) mod p^k`; always `≡ 1 mod p`.
pub fn diamond(a: i64, ctx: &PadicContext) -> Result<u64> {
    let w = teichmuller(a, ctx)?;
    let m = ctx.modulus();
    let w_inv = crate::primes::inv_mod(w as i128, m as i128)
        .expect("Teichmüller lift is a unit") as u64;
    let a = a.rem_euclid(m as i64) as u128;
    Ok((a * w_inv as u128 % m as u128) as u64)
}

/// Truncation `Σ_{n=0}^{n_max} d^n/(2n+1) · (u/t)^(2n+1)` of the series for
/// `log_p(ε)/√d`, where `ε = (δ/2)(t + u√d)`.
pub fn unit_log_series(d: &BigInt, t: &BigInt, u: &BigInt, n_max: u32) -> Result<BigRational> {
    if t.is_zero() {
        return Err(invalid!("t must be nonzero"));
    }
    let x = BigRational::new(u.clone(), t.clone());
    let x2 = &x * &x;
    let d = BigRational::from_integer(d.clone());
    let mut term = x; // d^n x^(2n+1)
    let mut sum = BigRational::zero();
    for n in 0..=n_max {
        sum += &term / BigInt::from(2 * n + 1);
        term = term * &d * &x2;
    }
    Ok(sum)
}

/// Render a rational in lowest terms as `"num/den"`, integers included.
pub fn fmt_rational(x: &BigRational) -> String {
    format!("{}/{}", x.numer(), x.denom())
}

/// Inverse of [`fmt_rational`]; a bare integer is also accepted. Rejects
/// zero denominators.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let (n, d) = match s.split_once('/') {
        Some((n, d)) => (n, d),
        None => (s, "1"),
    };
    let n: BigInt = n.trim().parse().map_err(|_| invalid!("bad numerator in {s:?}"))?;
    let d: BigInt = d.trim().parse().map_err(|_| invalid!("bad denominator in {s:?}"))?;
    if d.is_zero() {
        return Err(invalid!("zero denominator in {s:?}"));
    }
    Ok(BigRational::new(n, d))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ctx(p: u64, k: u32) -> PadicContext {
        PadicContext::new(p, k).unwrap()
    }

    #[test]
    fn valuation_examples() {
        assert_eq!(vp(&int(50), 5).unwrap(), Valuation::Finite(2));
        assert_eq!(vp(&ratio(5, 8), 2).unwrap(), Valuation::Finite(-3));
        assert_eq!(vp(&int(0), 7).unwrap(), Valuation::Infinite);
        assert!(vp(&int(3), 9).is_err());
    }

    #[test]
    fn integrality_examples() {
        assert!(is_p_integral(&ratio(-1, 12), 5).unwrap());
        assert!(!is_p_integral(&ratio(1, 5), 5).unwrap());
        assert!(is_p_integral(&int(0), 3).unwrap());
    }

    #[test]
    fn congruence_examples() {
        // 2 + 1/12 = 25/12
        assert!(congruent(&int(2), &ratio(-1, 12), &ctx(5, 1)));
        assert!(congruent(&int(2), &ratio(-1, 12), &ctx(5, 2)));
        assert!(!congruent(&int(2), &ratio(-1, 12), &ctx(5, 3)));
        assert!(!congruent(&int(1), &int(0), &ctx(5, 1)));
        assert!(congruent(&int(0), &int(0), &ctx(7, 3)));
        assert!(PadicContext::new(5, 0).is_err());
        assert!(PadicContext::new(5, 4).is_err());
        assert!(PadicContext::new(6, 1).is_err());
    }

    #[test]
    fn fermat_quotient_examples() {
        assert_eq!(fermat_quotient(2, 5).unwrap(), int(3));
        assert_eq!(fermat_quotient(1, 11).unwrap(), int(0));
        assert_eq!(fermat_quotient(3, 7).unwrap(), int(104));
        assert!(fermat_quotient(10, 5).is_err());
    }

    #[test]
    fn log_surrogate_examples() {
        assert_eq!(log_surrogate(1, 7).unwrap(), int(0));
        assert_eq!(log_surrogate(2, 5).unwrap(), ratio(-195, 8));
        assert!(log_surrogate(2, 3).is_err());
        assert!(log_surrogate(14, 7).is_err());
    }

    #[test]
    fn log_surrogate_is_additive_mod_p3() {
        for p in [5u64, 7, 11, 13] {
            let m = (p * p * p) as i64;
            for a in 1..p as i64 {
                for b in 1..p as i64 {
                    let ab = (a * b).rem_euclid(m);
                    let lhs = log_surrogate(ab, p).unwrap();
                    let rhs = log_surrogate(a, p).unwrap() + log_surrogate(b, p).unwrap();
                    assert!(congruent(&lhs, &rhs, &ctx(p, 3)), "p={p} a={a} b={b}");
                }
            }
        }
    }

    #[test]
    fn teichmuller_examples() {
        assert_eq!(teichmuller(2, &ctx(5, 2)).unwrap(), 7);
        assert_eq!(teichmuller(1, &ctx(13, 3)).unwrap(), 1);
        assert_eq!(teichmuller(9, &ctx(7, 1)).unwrap(), 2);
        assert_eq!(diamond(2, &ctx(5, 2)).unwrap(), 11);
        assert_eq!(diamond(1, &ctx(11, 3)).unwrap(), 1);
        assert!(teichmuller(10, &ctx(5, 2)).is_err());
    }

    #[test]
    fn teichmuller_character_properties() {
        for p in crate::primes::primes_in(3, 50) {
            for k in 1..=3 {
                let c = ctx(p, k);
                let m = c.modulus() as u128;
                for a in 1..(3 * p as i64) {
                    if a % p as i64 == 0 {
                        continue;
                    }
                    let w = teichmuller(a, &c).unwrap();
                    assert_eq!(pow_mod(w, p - 1, c.modulus()), 1 % c.modulus());
                    assert_eq!(w % p, a as u64 % p);
                    let dia = diamond(a, &c).unwrap();
                    assert_eq!(dia % p, 1);
                    assert_eq!((dia as u128 * w as u128 % m) as i64, a.rem_euclid(m as i64));
                    for b in [2i64, 3, 5, 7, p as i64 + 1] {
                        if b % p as i64 == 0 {
                            continue;
                        }
                        let wb = teichmuller(b, &c).unwrap() as u128;
                        let wab = teichmuller(a * b, &c).unwrap() as u128;
                        assert_eq!(wab, w as u128 * wb % m);
                    }
                }
            }
        }
    }

    #[test]
    fn fermat_quotient_additive_mod_p() {
        for p in [5u64, 7, 11, 13] {
            let p2 = (p * p) as i64;
            for a in 1..p as i64 {
                for b in 1..p as i64 {
                    let ab = (a * b).rem_euclid(p2);
                    let lhs = fermat_quotient(a, p).unwrap() + fermat_quotient(b, p).unwrap();
                    let rhs = fermat_quotient(ab, p).unwrap();
                    assert!(congruent(&lhs, &rhs, &ctx(p, 1)));
                }
            }
        }
    }

    #[test]
    fn unit_log_series_examples() {
        let b = BigInt::from;
        assert_eq!(unit_log_series(&b(10), &b(3), &b(1), 1).unwrap(), ratio(37, 81));
        assert_eq!(unit_log_series(&b(10), &b(3), &b(0), 4).unwrap(), int(0));
        assert_eq!(
            unit_log_series(&b(14), &b(15), &b(4), 1).unwrap(),
            ratio(3596, 10125)
        );
        assert!(unit_log_series(&b(14), &b(0), &b(4), 1).is_err());
    }

    #[test]
    fn unit_log_tail_terms_are_small() {
        // for p | d, p ∤ t and p > 5 the n-th term has valuation >= n
        for (d, t, u, p) in [(14i64, 15i64, 4i64, 7u64), (21, 5, 1, 7), (77, 9, 1, 7), (33, 23, 4, 11)] {
            let b = BigInt::from;
            for n in 2..=3u32 {
                let full = unit_log_series(&b(d), &b(t), &b(u), n).unwrap();
                let prev = unit_log_series(&b(d), &b(t), &b(u), n - 1).unwrap();
                assert!(vp(&(full - prev), p).unwrap().at_least(2), "d={d} n={n}");
            }
        }
    }

    #[test]
    fn rational_text_roundtrip() {
        for s in ["0/1", "-691/2730", "5/1", "12345678901234567890/7"] {
            assert_eq!(fmt_rational(&parse_rational(s).unwrap()), s);
        }
        assert_eq!(fmt_rational(&parse_rational("5").unwrap()), "5/1");
        assert_eq!(fmt_rational(&parse_rational("4/-6").unwrap()), "-2/3");
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("x").is_err());
    }

    fn small_rational() -> impl Strategy<Value = BigRational> {
        (-10_000i64..10_000, 1i64..10_000)
            .prop_filter("nonzero", |(n, _)| *n != 0)
            .prop_map(|(n, d)| ratio(n, d))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn valuation_is_a_valuation(x in small_rational(), y in small_rational(), pi in 0usize..5) {
            let p = [2u64, 3, 5, 7, 11][pi];
            let vx = vp(&x, p).unwrap().finite().unwrap();
            let vy = vp(&y, p).unwrap().finite().unwrap();
            prop_assert_eq!(vp(&(&x * &y), p).unwrap(), Valuation::Finite(vx + vy));
            prop_assert!(vp(&(&x + &y), p).unwrap() >= Valuation::Finite(vx.min(vy)));
        }

        #[test]
        fn congruence_is_an_equivalence(x in small_rational(), y in small_rational(), z in small_rational(), k in 1u32..=3) {
            let c = ctx(5, k);
            prop_assert!(congruent(&x, &x, &c));
            prop_assert_eq!(congruent(&x, &y, &c), congruent(&y, &x, &c));
            if congruent(&x, &y, &c) && congruent(&y, &z, &c) {
                prop_assert!(congruent(&x, &z, &c));
            }
            if k > 1 && congruent(&x, &y, &c) {
                prop_assert!(congruent(&x, &y, &ctx(5, k - 1)));
            }
        }
    }
}

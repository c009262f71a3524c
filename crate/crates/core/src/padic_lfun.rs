//! Low-order coefficients of `L_p(1 - s, χ) ≡ a₋₁/s + a₀ + a₁s mod p²`,
//! their closed forms, and interpolation values at negative integers.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::arith::{fermat_quotient_int, int, log_surrogate_from_fq, rpow};
use crate::bernoulli::BernoulliCache;
use crate::characters::{CharacterSplit, QuadChar};
use crate::error::{invalid, Error, Result};
use crate::primes::is_prime;
use crate::quadratic_field::FieldInvariants;

/// Signed Stirling numbers of the first kind, rows `0..=j_max`.
#[derive(Debug, Clone)]
pub struct StirlingTable {
    rows: Vec<Vec<BigInt>>,
}

impl StirlingTable {
    pub fn new(j_max: usize) -> Self {
        let mut rows = vec![vec![BigInt::one()]];
        for j in 0..j_max {
            let prev = &rows[j];
            let mut next = vec![BigInt::zero(); j + 2];
            for k in 1..=j + 1 {
                let left = &prev[k - 1];
                let stay = prev.get(k).map(|s| s * BigInt::from(j)).unwrap_or_default();
                next[k] = left - stay;
            }
            rows.push(next);
        }
        StirlingTable { rows }
    }

    pub fn j_max(&self) -> usize {
        self.rows.len() - 1
    }

    pub fn get(&self, j: usize, k: usize) -> Option<&BigInt> {
        self.rows.get(j).and_then(|row| row.get(k))
    }
}

/// `S(j, k)`, the coefficient of `x^k` in `x(x-1)…(x-j+1)`.
pub fn stirling1(j: usize, k: usize) -> Result<BigInt> {
    if k > j {
        return Err(invalid!("stirling1 needs k <= j, got ({j}, {k})"));
    }
    Ok(StirlingTable::new(j).get(j, k).cloned().unwrap_or_default())
}

fn check_b_inputs(a: i64, f: u64, p: u64) -> Result<()> {
    if p < 5 || !is_prime(p) {
        return Err(invalid!("need a prime p >= 5, got {p}"));
    }
    if a.rem_euclid(p as i64) == 0 {
        return Err(invalid!("p={p} divides a={a}"));
    }
    if a < 1 || a as u64 > f {
        return Err(invalid!("a={a} outside 1..={f}"));
    }
    if f % p != 0 {
        return Err(invalid!("p={p} must divide F={f}"));
    }
    Ok(())
}

/// `b_k(a)` truncated modulo p³ (`k ≤ 2`).
pub fn b_coeff(a: i64, k: u32, f: u64, p: u64) -> Result<BigRational> {
    check_b_inputs(a, f, p)?;
    let x = BigRational::new(BigInt::from(f), BigInt::from(a));
    let x2 = &x * &x;
    match k {
        0 => Ok(BigRational::one()),
        1 => Ok(-x / BigInt::from(2) - x2 / BigInt::from(12)),
        2 => Ok(x2 / BigInt::from(12)),
        _ => Err(invalid!("b_coeff is only truncated for k <= 2")),
    }
}

/// `Σ_{j=k}^{j_max} (F/a)^j B_j/j! S(j, k)`.
pub fn b_coeff_series(
    cache: &BernoulliCache,
    stirling: &StirlingTable,
    a: i64,
    k: usize,
    f: u64,
    j_max: usize,
) -> BigRational {
    let x = BigRational::new(BigInt::from(f), BigInt::from(a));
    let mut total = BigRational::zero();
    let mut factorial = BigInt::one();
    for j in 1..=j_max {
        factorial *= j;
        if j < k {
            continue;
        }
        let s = stirling.get(j, k).cloned().unwrap_or_default();
        if s.is_zero() {
            continue;
        }
        total += rpow(&x, j as u32) * cache.bernoulli(j as u32) * BigRational::new(s, factorial.clone());
    }
    if k == 0 {
        total += BigRational::one();
    }
    total
}

/// `a₋₁`, `a₀`, `a₁` for one character and prime.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoefficientBundle {
    pub a_minus1: BigRational,
    pub a0: BigRational,
    pub a1: BigRational,
    pub character: QuadChar,
    pub p: u64,
    pub f: u64,
}

impl CoefficientBundle {
    /// `a₋₁` has its exact value, `v_p(a₀) ≥ 0`, `v_p(a₁) ≥ 1`.
    pub fn check_invariants(&self) -> Result<()> {
        let expected = if self.character.is_principal() {
            BigRational::new(BigInt::one(), BigInt::from(self.p)) - BigRational::one()
        } else {
            BigRational::zero()
        };
        if self.a_minus1 != expected {
            return Err(Error::Invariant(format!("a_-1 = {} for {}", self.a_minus1, self.character)));
        }
        if !crate::arith::vp_unchecked(&self.a0, self.p).at_least(0) {
            return Err(Error::Invariant(format!("a_0 is not {}-integral", self.p)));
        }
        if !crate::arith::vp_unchecked(&self.a1, self.p).at_least(1) {
            return Err(Error::Invariant(format!("a_1 is not divisible by {}", self.p)));
        }
        Ok(())
    }
}

/// The three restricted character sums over `1 ≤ a ≤ F`, `p ∤ a`, with
/// `log_p` replaced by its mod-p³ surrogate. `F = p` for the principal
/// character and `F = |D|` for `χ_D` with `p | D`.
pub fn a_coefficients_direct(chi: &QuadChar, p: u64) -> Result<CoefficientBundle> {
    if p <= 3 || !is_prime(p) {
        return Err(invalid!("need a prime p > 3, got {p}"));
    }
    let f = if chi.is_principal() {
        p
    } else if chi.conductor() % p == 0 {
        chi.conductor()
    } else {
        return Err(Error::Unsupported(format!(
            "{chi} has conductor prime to p={p}; only characters with p | D are covered"
        )));
    };
    let pq = int(p);
    let pm1 = int(p - 1);
    let fq_f = int(f);

    // Σχ, Σχ·L, Σχ/a, Σχ/a², Σχ·F(a)², Σχ·F(a)/a
    let mut count = 0i64;
    let mut log_sum = BigRational::zero();
    let mut inv = BigRational::zero();
    let mut inv2 = BigRational::zero();
    let mut fq2 = BigInt::zero();
    let mut fq_inv = BigRational::zero();
    for a in 1..=f {
        if a % p == 0 {
            continue;
        }
        let c = chi.eval(a as i64);
        if c == 0 {
            continue;
        }
        let sign = BigInt::from(c);
        let fq = fermat_quotient_int(a as i64, p);
        let r1 = BigRational::new(sign.clone(), BigInt::from(a));
        count += c as i64;
        log_sum += log_surrogate_from_fq(&fq, p) * &sign;
        inv2 += &r1 / BigInt::from(a);
        fq_inv += &r1 * &fq;
        inv += r1;
        fq2 += sign * &fq * &fq;
    }
    let neg_over_f = -BigRational::new(BigInt::one(), BigInt::from(f));

    let a_minus1 = &neg_over_f * int(count);
    let a0 = &neg_over_f
        * (log_sum - &fq_f * &inv / BigInt::from(2) - &fq_f * &fq_f * &inv2 / BigInt::from(12));
    let a1 = &neg_over_f
        * (&pq * &pq * BigRational::from_integer(fq2) / (int(2) * &pm1 * &pm1)
            + &fq_f * &fq_f * &inv2 / BigInt::from(12)
            - &pq * &fq_f * fq_inv / (int(2) * &pm1));
    Ok(CoefficientBundle { a_minus1, a0, a1, character: *chi, p, f })
}

fn euler_factor(psi: &QuadChar, p: u64, n: u32) -> BigRational {
    BigRational::one() - int(psi.eval(p as i64)) * rpow(&int(p), n - 1)
}

/// `a₁ ≡ -(1/(2r²))(B_{3r,ψ}/3 - (1 - ψ(p)p^(r-1)) B_{r,ψ}) mod p²` for
/// `d = pm > 5`.
pub fn a1_closed_quadratic(cache: &BernoulliCache, split: &CharacterSplit) -> Result<BigRational> {
    if split.d == 5 {
        return Err(Error::Unsupported("d = 5 needs additional correction terms".into()));
    }
    let r = split.r() as u32;
    let psi = &split.psi_m;
    let inner = cache.gen_bernoulli(3 * r, psi) / BigInt::from(3)
        - euler_factor(psi, split.p, r) * cache.gen_bernoulli(r, psi);
    Ok(-inner / BigInt::from(2 * r * r))
}

/// The closed form read with the plain Bernoulli number `B_r` in place of
/// `B_{r,ψ}`. It does not match the direct sum; kept for the record.
pub fn a1_closed_quadratic_plain_reading(cache: &BernoulliCache, split: &CharacterSplit) -> Result<BigRational> {
    if split.d == 5 {
        return Err(Error::Unsupported("d = 5 needs additional correction terms".into()));
    }
    let r = split.r() as u32;
    let psi = &split.psi_m;
    let inner = cache.gen_bernoulli(3 * r, psi) / BigInt::from(3)
        - euler_factor(psi, split.p, r) * cache.bernoulli(r);
    Ok(-inner / BigInt::from(2 * r * r))
}

/// `W_p = ((p-1)! + 1)/p`.
pub fn wilson_quotient(p: u64) -> Result<BigRational> {
    if !is_prime(p) {
        return Err(invalid!("{p} is not prime"));
    }
    let factorial: BigInt = (1..p).fold(BigInt::one(), |acc, i| acc * i);
    Ok(BigRational::new(factorial + 1u32, BigInt::from(p)))
}

fn check_above_three(p: u64) -> Result<()> {
    if p <= 3 || !is_prime(p) {
        return Err(invalid!("need a prime p > 3, got {p}"));
    }
    Ok(())
}

/// `W_p (1 + p W_p / 2)`.
pub fn a0_closed_principal(p: u64) -> Result<BigRational> {
    check_above_three(p)?;
    let w = wilson_quotient(p)?;
    Ok(&w * (BigRational::one() + int(p) * &w / BigInt::from(2)))
}

/// `R = 1 - 1/p`, the residue term of `ζ*_p`.
pub fn residue_term(p: u64) -> BigRational {
    BigRational::one() - BigRational::new(BigInt::one(), BigInt::from(p))
}

/// `-(B_{2(p-1)} - 2B_{p-1} + R) / (2(p-1)²)`.
pub fn a1_closed_principal(cache: &BernoulliCache, p: u64) -> Result<BigRational> {
    check_above_three(p)?;
    let pm1 = (p - 1) as u32;
    let inner = cache.bernoulli(2 * pm1) - int(2) * cache.bernoulli(pm1) + residue_term(p);
    Ok(-inner / BigInt::from(2 * (p - 1) * (p - 1)))
}

/// Which L-function an interpolation value refers to.
#[derive(Debug, Clone, Copy)]
pub enum LTarget<'a> {
    Principal,
    /// `χ_D` with `p | D`; at `n ≡ r mod (p-1)` the twist `χω^{-n}` is `ψ_m`.
    Split(&'a CharacterSplit),
}

/// `L_p(1 - n, ·)`: `-(1 - ψ(p)p^(n-1)) B_{n,ψ}/n` for a split character at
/// `n ≡ r mod (p-1)`, and `-(1 - p^(n-1)) B_n/n` for the principal character
/// at `n ≡ 0 mod (p-1)`.
pub fn lp_interp_value(cache: &BernoulliCache, n: u32, target: LTarget<'_>, p: u64) -> Result<BigRational> {
    check_above_three(p)?;
    if n == 0 {
        return Err(invalid!("n must be positive"));
    }
    let pm1 = p - 1;
    match target {
        LTarget::Principal => {
            if n as u64 % pm1 != 0 {
                return Err(Error::Unsupported(format!("n={n} is not a multiple of p-1={pm1}")));
            }
            Ok(-euler_factor(&QuadChar::principal(), p, n) * cache.bernoulli(n) / BigInt::from(n))
        }
        LTarget::Split(split) => {
            if split.p != p {
                return Err(invalid!("split is for p={}, not {p}", split.p));
            }
            if n as u64 % pm1 != split.r() {
                return Err(Error::Unsupported(format!("n={n} is not ≡ r={} mod {pm1}", split.r())));
            }
            let psi = &split.psi_m;
            Ok(-euler_factor(psi, p, n) * cache.gen_bernoulli(n, psi) / BigInt::from(n))
        }
    }
}

/// `ζ*_p(1 - n) = -(1 - p^(n-1)) B_n/n + R/n` for `n = k(p-1)`.
pub fn zeta_star_value(cache: &BernoulliCache, n: u32, p: u64) -> Result<BigRational> {
    check_above_three(p)?;
    if n == 0 || n as u64 % (p - 1) != 0 {
        return Err(invalid!("n={n} must be a positive multiple of p-1={}", p - 1));
    }
    let lp = lp_interp_value(cache, n, LTarget::Principal, p)?;
    Ok(lp + residue_term(p) / BigInt::from(n))
}

/// `(2h/δ)(u/t + (d/3)(u/t)³)`, the mod-p² surrogate for `L_p(1, χ_D)`.
pub fn lp1_via_class_number(inv: &FieldInvariants, p: u64) -> Result<BigRational> {
    if !is_prime(p) || inv.d % p != 0 {
        return Err(invalid!("p={p} must be a prime dividing d={}", inv.d));
    }
    if (&inv.t % BigInt::from(p)).is_zero() {
        return Err(Error::Invariant(format!("p={p} divides t for d={}", inv.d)));
    }
    let kernel = crate::arith::unit_log_series(&BigInt::from(inv.d), &inv.t, &inv.u, 1)?;
    Ok(kernel * BigRational::new(BigInt::from(2 * inv.h), BigInt::from(inv.delta)))
}

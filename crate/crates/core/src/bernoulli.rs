//! Bernoulli numbers, Bernoulli polynomials, generalized Bernoulli numbers
//! of quadratic characters, and character power sums.
//!
//! Conventions: plain `B_1 = -1/2` (generating function `x/(e^x - 1)`), while
//! the principal character uses `B_{1,χ₀} = +1/2` (generating function
//! `t e^t/(e^t - 1)`). Both are stored under distinct keys.

use std::collections::HashMap;
use std::sync::{OnceLock, RwLock};
use std::time::Instant;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::arith::{int, rpow, vp_unchecked};
use crate::characters::QuadChar;
use crate::error::{invalid, Result};
use crate::primes::{is_prime, primes_in};
use crate::report::{CongruenceReport, Instance, StatementId};

/// Shared store of `B_n` and `B_{n,χ}`.
///
/// Reads take a shared lock; extensions take the write lock, so there is a
/// single writer at a time.
#[derive(Debug, Default)]
pub struct BernoulliCache {
    plain: RwLock<Vec<BigRational>>,
    generalized: RwLock<HashMap<(u32, i64), BigRational>>,
}

impl BernoulliCache {
    pub fn new() -> Self {
        Self::default()
    }

    /// Process-wide cache.
    pub fn global() -> &'static BernoulliCache {
        static GLOBAL: OnceLock<BernoulliCache> = OnceLock::new();
        GLOBAL.get_or_init(BernoulliCache::new)
    }

    /// `B_n` with `B_1 = -1/2`.
    pub fn bernoulli(&self, n: u32) -> BigRational {
        if let Some(b) = self.plain.read().unwrap().get(n as usize) {
            return b.clone();
        }
        let mut plain = self.plain.write().unwrap();
        if plain.len() <= n as usize {
            extend_bernoulli(&mut plain, n as usize);
        }
        plain[n as usize].clone()
    }

    /// `B_{n,χ}` for a quadratic or principal character.
    pub fn gen_bernoulli(&self, n: u32, chi: &QuadChar) -> BigRational {
        let key = (n, chi.discriminant());
        if let Some(b) = self.generalized.read().unwrap().get(&key) {
            return b.clone();
        }
        let value = self.compute_gen_bernoulli(n, chi);
        self.generalized
            .write()
            .unwrap()
            .entry(key)
            .or_insert(value)
            .clone()
    }

    fn compute_gen_bernoulli(&self, n: u32, chi: &QuadChar) -> BigRational {
        if n == 0 {
            return if chi.is_principal() { BigRational::one() } else { BigRational::zero() };
        }
        // f^(n-1) Σ_a χ(a) B_n(a/f), expanded as
        // (1/f) Σ_j C(n,j) B_j f^j S_{n-j} with S_k = Σ_{a=1}^f χ(a) a^k.
        let f = chi.conductor();
        let sums = character_power_sums(chi, f, n);
        self.bernoulli(n);
        let plain = self.plain.read().unwrap();
        let fb = BigInt::from(f);
        let mut total = BigRational::zero();
        let mut binom = BigInt::one();
        let mut f_pow = BigInt::one();
        for j in 0..=n as usize {
            let b = &plain[j];
            if !b.is_zero() {
                let coeff = &binom * &f_pow * &sums[n as usize - j];
                total += b * BigRational::from_integer(coeff);
            }
            binom = binom * BigInt::from(n as usize - j) / BigInt::from(j + 1);
            f_pow *= &fb;
        }
        total / BigRational::from_integer(fb)
    }

    /// Snapshot of every cached value: `(n, None)` for plain Bernoulli
    /// numbers, `(n, Some(disc))` for generalized ones, sorted.
    pub fn entries(&self) -> Vec<(u32, Option<i64>, BigRational)> {
        let mut out: Vec<_> = self
            .plain
            .read()
            .unwrap()
            .iter()
            .enumerate()
            .map(|(n, b)| (n as u32, None, b.clone()))
            .collect();
        let mut gen: Vec<_> = self
            .generalized
            .read()
            .unwrap()
            .iter()
            .map(|(&(n, disc), b)| (n, Some(disc), b.clone()))
            .collect();
        gen.sort_by_key(|e| (e.1, e.0));
        out.extend(gen);
        out
    }

    /// Seed plain values `B_0..B_{len-1}`. The caller is responsible for
    /// having validated them; nothing is inserted unless the slice extends the
    /// current prefix.
    pub fn seed_plain(&self, values: Vec<BigRational>) {
        let mut plain = self.plain.write().unwrap();
        if values.len() > plain.len() {
            *plain = values;
        }
    }

    pub fn seed_generalized(&self, n: u32, chi: &QuadChar, value: BigRational) {
        self.generalized
            .write()
            .unwrap()
            .insert((n, chi.discriminant()), value);
    }

    pub fn plain_len(&self) -> usize {
        self.plain.read().unwrap().len()
    }

    pub fn generalized_len(&self) -> usize {
        self.generalized.read().unwrap().len()
    }
}

/// Extend `B_0..` through index `upto` with the recurrence
/// `Σ_{j=0}^{n} C(n+1, j) B_j = 0`, carried out over the common denominator
/// `Π_{q ≤ upto+1} q` so the inner loop is integer-only.
fn extend_bernoulli(plain: &mut Vec<BigRational>, upto: usize) {
    let common: BigInt = primes_in(2, upto as u64 + 1)
        .into_iter()
        .fold(BigInt::one(), |acc, q| acc * q);
    let common_q = BigRational::from_integer(common.clone());
    let mut scaled: Vec<BigInt> = plain
        .iter()
        .map(|b| {
            let s = b * &common_q;
            debug_assert!(s.is_integer());
            s.to_integer()
        })
        .collect();
    if scaled.is_empty() {
        plain.push(BigRational::one());
        scaled.push(common.clone());
    }
    for n in scaled.len()..=upto {
        if n > 1 && n % 2 == 1 {
            plain.push(BigRational::zero());
            scaled.push(BigInt::zero());
            continue;
        }
        let mut acc = BigInt::zero();
        let mut binom = BigInt::one(); // C(n+1, j)
        for (j, s) in scaled.iter().enumerate() {
            if !s.is_zero() {
                acc += &binom * s;
            }
            binom = binom * BigInt::from(n + 1 - j) / BigInt::from(j + 1);
        }
        let b = BigRational::new(-acc.clone(), BigInt::from(n + 1) * &common);
        let s = -acc / BigInt::from(n + 1);
        plain.push(b);
        scaled.push(s);
    }
}

/// `S_k = Σ_{a=1}^{f} χ(a) a^k` for `k = 0..=n`.
fn character_power_sums(chi: &QuadChar, f: u64, n: u32) -> Vec<BigInt> {
    let mut sums = vec![BigInt::zero(); n as usize + 1];
    for a in 1..=f {
        let c = chi.eval(a as i64);
        if c == 0 {
            continue;
        }
        let ab = BigInt::from(a);
        let mut power = BigInt::one();
        for s in sums.iter_mut() {
            if c > 0 {
                *s += &power;
            } else {
                *s -= &power;
            }
            power *= &ab;
        }
    }
    sums
}

pub fn bernoulli(n: u32) -> BigRational {
    BernoulliCache::global().bernoulli(n)
}

pub fn gen_bernoulli(n: u32, chi: &QuadChar) -> BigRational {
    BernoulliCache::global().gen_bernoulli(n, chi)
}

/// `C(n, k)` by incremental multiplication.
pub fn binomial(n: u64, k: u64) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    acc
}

/// `B_n(x) = Σ_j C(n,j) B_j x^(n-j)`.
pub fn bernoulli_poly(cache: &BernoulliCache, n: u32, x: &BigRational) -> BigRational {
    let mut total = BigRational::zero();
    let mut x_pow = BigRational::one();
    // descending powers of x pair with ascending j, so walk j from n down
    for j in (0..=n).rev() {
        let b = cache.bernoulli(j);
        if !b.is_zero() {
            total += b * BigRational::from_integer(binomial(n as u64, j as u64)) * &x_pow;
        }
        x_pow *= x;
    }
    total
}

fn check_modulus(f: u64, chi: &QuadChar) -> Result<()> {
    if f == 0 || f % chi.conductor() != 0 {
        return Err(invalid!(
            "F={f} is not a positive multiple of the conductor {}",
            chi.conductor()
        ));
    }
    Ok(())
}

/// `P(k, F, χ) = (1/F) Σ_{a=1}^{F} χ(a) a^k`.
pub fn power_sum_direct(k: u32, f: u64, chi: &QuadChar) -> Result<BigRational> {
    check_modulus(f, chi)?;
    Ok(power_sum_filtered(k, f, chi, |_| true))
}

/// `P'(k, F, χ)`: as [`power_sum_direct`] but skipping multiples of `p`.
pub fn power_sum_restricted(k: u32, f: u64, chi: &QuadChar, p: u64) -> Result<BigRational> {
    check_modulus(f, chi)?;
    if !is_prime(p) {
        return Err(invalid!("{p} is not prime"));
    }
    Ok(power_sum_filtered(k, f, chi, |a| a % p != 0))
}

fn power_sum_filtered(k: u32, f: u64, chi: &QuadChar, keep: impl Fn(u64) -> bool) -> BigRational {
    let mut total = BigInt::zero();
    for a in 1..=f {
        let c = chi.eval(a as i64);
        if c == 0 || !keep(a) {
            continue;
        }
        let term = num_traits::pow(BigInt::from(a), k as usize);
        if c > 0 {
            total += term;
        } else {
            total -= term;
        }
    }
    BigRational::new(total, BigInt::from(f))
}

/// `P(k, F, χ) - χ(p) p^(k-1) P(k, F/p, χ)`, which equals `P'(k, F, χ)`
/// whenever `p | F` and the conductor divides `F/p`.
pub fn power_sum_restricted_identity(k: u32, f: u64, chi: &QuadChar, p: u64) -> Result<BigRational> {
    if !is_prime(p) || f % p != 0 {
        return Err(invalid!("identity needs a prime p dividing F"));
    }
    check_modulus(f / p, chi)?;
    let full = power_sum_direct(k, f, chi)?;
    let inner = power_sum_direct(k, f / p, chi)?;
    let scale = BigRational::from_integer(
        BigInt::from(chi.eval(p as i64)) * num_traits::pow(BigInt::from(p), k as usize),
    ) / BigInt::from(p);
    Ok(full - scale * inner)
}

/// `P(k, F, χ)` from generalized Bernoulli numbers:
/// `(1/(k+1)) Σ_{j=0}^{k} C(k+1, j) B_{j,χ} F^(k-j)`.
pub fn power_sum_closed(cache: &BernoulliCache, k: u32, f: u64, chi: &QuadChar) -> Result<BigRational> {
    check_modulus(f, chi)?;
    let fb = BigInt::from(f);
    let mut total = BigRational::zero();
    for j in 0..=k {
        let b = cache.gen_bernoulli(j, chi);
        if b.is_zero() {
            continue;
        }
        let coeff = binomial(k as u64 + 1, j as u64) * num_traits::pow(fb.clone(), (k - j) as usize);
        total += b * BigRational::from_integer(coeff);
    }
    Ok(total / BigInt::from(k + 1))
}

/// The power-sum formula with the `j = 0` term printed as `F^k B_{0,χ}`.
/// Kept to document that this form is only right for non-principal `χ`.
pub fn power_sum_printed_form(cache: &BernoulliCache, k: u32, f: u64, chi: &QuadChar) -> Result<BigRational> {
    check_modulus(f, chi)?;
    let fb = BigInt::from(f);
    let mut total = cache.gen_bernoulli(0, chi) * BigRational::from_integer(num_traits::pow(fb.clone(), k as usize));
    for j in 1..=k {
        let b = cache.gen_bernoulli(j, chi);
        let coeff = binomial(k as u64, j as u64 - 1) * num_traits::pow(fb.clone(), (k - j) as usize);
        total += b * BigRational::from_integer(coeff) / BigInt::from(j);
    }
    Ok(total)
}

/// Carlitz: `B_{n,χ}/n` is p-integral for `p ∤ f` (and integral everywhere
/// when the conductor has two distinct prime factors).
pub fn carlitz_check(cache: &BernoulliCache, n: u32, chi: &QuadChar, p: u64) -> Result<bool> {
    if chi.is_principal() {
        return Err(invalid!("Carlitz integrality needs a non-principal character"));
    }
    if n == 0 {
        return Err(invalid!("n must be positive"));
    }
    if !is_prime(p) {
        return Err(invalid!("{p} is not prime"));
    }
    if chi.conductor() % p == 0 {
        return Err(invalid!("p={p} divides the conductor {}", chi.conductor()));
    }
    let x = cache.gen_bernoulli(n, chi) / BigInt::from(n);
    Ok(vp_unchecked(&x, p).at_least(0))
}

fn odd_prime_above_three(p: u64) -> Result<()> {
    if p <= 3 || !is_prime(p) {
        Err(invalid!("need a prime p > 3, got {p}"))
    } else {
        Ok(())
    }
}

/// Which branch of the non-principal power-sum congruence applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PowerSumCase {
    /// `χ(-1) = (-1)^k`: `P ≡ B_{k,χ}`.
    Matching,
    /// `χ odd, k = 3`: `P = B_{3,χ} + F² B_{1,χ}` exactly.
    OddCubic,
    /// `χ(-1) ≠ (-1)^k`: `P ≡ k F B_{k-1,χ} / 2`.
    Mismatched,
}

pub fn power_sum_case(k: u32, chi: &QuadChar) -> PowerSumCase {
    let sign = if k % 2 == 0 { 1 } else { -1 };
    if chi.parity() != sign {
        PowerSumCase::Mismatched
    } else if chi.parity() == -1 && k == 3 {
        PowerSumCase::OddCubic
    } else {
        PowerSumCase::Matching
    }
}

/// Power sums of a non-principal character modulo p², with `F = p f`.
///
/// The odd-cubic case is an exact identity; its report uses depth 2 but the
/// two sides are equal.
pub fn lemma_power_sum_nonprincipal(cache: &BernoulliCache, k: u32, chi: &QuadChar, p: u64) -> Result<CongruenceReport> {
    let started = Instant::now();
    if chi.is_principal() {
        return Err(invalid!("character must be non-principal"));
    }
    if !is_prime(p) || p == 2 || chi.conductor() % p == 0 {
        return Err(invalid!("need an odd prime p not dividing the conductor"));
    }
    if k < 3 {
        return Err(invalid!("k must be at least 3"));
    }
    let f = p * chi.conductor();
    let fq = int(f);
    let lhs = power_sum_direct(k, f, chi)?;
    let rhs = match power_sum_case(k, chi) {
        PowerSumCase::Matching => cache.gen_bernoulli(k, chi),
        PowerSumCase::OddCubic => cache.gen_bernoulli(3, chi) + &fq * &fq * cache.gen_bernoulli(1, chi),
        PowerSumCase::Mismatched => int(k) * &fq * cache.gen_bernoulli(k - 1, chi) / BigInt::from(2),
    };
    let instance = Instance { p, k: Some(k as u64), chi: Some(chi.discriminant()), ..Default::default() };
    Ok(CongruenceReport::new(StatementId::PowerSumNonprincipal, instance, lhs, rhs, 2, started))
}

/// The right-hand side exactly as printed (case (b) without the factor `k`,
/// the odd-cubic identity with `F` instead of `F²`).
pub fn printed_nonprincipal_rhs(cache: &BernoulliCache, k: u32, chi: &QuadChar, p: u64) -> BigRational {
    let fq = int(p * chi.conductor());
    match power_sum_case(k, chi) {
        PowerSumCase::Matching => cache.gen_bernoulli(k, chi),
        PowerSumCase::OddCubic => cache.gen_bernoulli(3, chi) + &fq * cache.gen_bernoulli(1, chi),
        PowerSumCase::Mismatched => &fq * cache.gen_bernoulli(k - 1, chi) / BigInt::from(2),
    }
}

/// `1^k + ... + p^k` over `p`, modulo p², for `3 ≤ k < p(p-1)`.
pub fn lemma_power_sum_principal(cache: &BernoulliCache, k: u32, p: u64) -> Result<CongruenceReport> {
    let started = Instant::now();
    odd_prime_above_three(p)?;
    if k < 3 || k as u64 >= p * (p - 1) {
        return Err(invalid!("k={k} outside 3 <= k < p(p-1)"));
    }
    let principal = QuadChar::principal();
    let power_sum = power_sum_direct(k, p, &principal)?;
    let fq = int(p);
    let (lhs, rhs) = if k as u64 % (p - 1) == 0 {
        let inv_p = BigRational::new(BigInt::one(), BigInt::from(p));
        (power_sum + &inv_p, cache.bernoulli(k) + inv_p)
    } else if k % 2 == 0 {
        let corr = &fq * &fq * int(k as u64 * (k as u64 - 1)) * cache.bernoulli(k - 2) / BigInt::from(6);
        (power_sum, cache.bernoulli(k) + corr)
    } else {
        (power_sum, &fq * int(k) * cache.bernoulli(k - 1) / BigInt::from(2))
    };
    let instance = Instance::prime_k(p, k as u64);
    Ok(CongruenceReport::new(StatementId::PowerSumPrincipal, instance, lhs, rhs, 2, started))
}

/// Sun's congruence: for `(p-1) ∤ b`,
/// `B_{k(p-1)+b,χ}/(k(p-1)+b) ≡ k B_{p-1+b,χ}/(p-1+b) - (k-1)(1 - χ(p)p^(b-1)) B_{b,χ}/b mod p²`.
pub fn sun_congruence_check(cache: &BernoulliCache, b: u32, k: u32, chi: &QuadChar, p: u64) -> Result<CongruenceReport> {
    let started = Instant::now();
    if !is_prime(p) {
        return Err(invalid!("{p} is not prime"));
    }
    if b == 0 || b as u64 % (p - 1) == 0 {
        return Err(invalid!("b={b} must be positive and not divisible by p-1={}", p - 1));
    }
    if k == 0 {
        return Err(invalid!("k must be positive"));
    }
    if chi.conductor() % p == 0 {
        return Err(invalid!("p={p} divides the conductor"));
    }
    let pm1 = (p - 1) as u32;
    let n = k * pm1 + b;
    let lhs = cache.gen_bernoulli(n, chi) / BigInt::from(n);
    let euler = BigRational::one()
        - int(chi.eval(p as i64) as i64) * rpow(&int(p), b - 1);
    let rhs = int(k) * cache.gen_bernoulli(pm1 + b, chi) / BigInt::from(pm1 + b)
        - int(k as i64 - 1) * euler * cache.gen_bernoulli(b, chi) / BigInt::from(b);
    let instance = Instance { p, k: Some(k as u64), chi: Some(chi.discriminant()), d: None };
    Ok(CongruenceReport::new(StatementId::SunCongruence, instance, lhs, rhs, 2, started))
}

/// `Π_{(q-1) | n} q`, the denominator predicted by von Staudt–Clausen for even `n ≥ 2`.
pub fn von_staudt_denominator(n: u32) -> BigInt {
    let mut acc = BigInt::one();
    for q in primes_in(2, n as u64 + 1) {
        if n as u64 % (q - 1) == 0 {
            acc *= q;
        }
    }
    acc
}

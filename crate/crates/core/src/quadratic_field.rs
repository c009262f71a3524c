//! Real quadratic fields `Q(√d)`: fundamental units from continued fractions
//! and class numbers from cycles of reduced indefinite binary quadratic forms.

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::arith::vp_int;
use crate::error::{invalid, Error, Result};
use crate::primes::{inv_mod, is_prime, isqrt, pow_mod};

pub use crate::primes::is_squarefree;

fn check_field(d: u64) -> Result<()> {
    if d <= 1 {
        return Err(invalid!("d must exceed 1, got {d}"));
    }
    if !is_squarefree(d) {
        return Err(invalid!("d={d} is not squarefree"));
    }
    Ok(())
}

/// `(δ, D)` with `δ = 1` if `d ≡ 1 mod 4`, else `2`, and `D = δ²d`.
pub fn invariants_shell(d: u64) -> Result<(u32, u64)> {
    check_field(d)?;
    let delta = if d % 4 == 1 { 1 } else { 2 };
    let disc = d.checked_mul(delta as u64 * delta as u64)
        .ok_or_else(|| Error::Unsupported(format!("discriminant of d={d} overflows u64")))?;
    Ok((delta, disc))
}

/// The fundamental unit `ε = (δ/2)(t + u√d)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FundamentalUnit {
    pub t: BigInt,
    pub u: BigInt,
    pub delta: u32,
    pub unit_norm: i8,
    pub cf_period: u64,
}

/// `t`, `u` reduced modulo a fixed modulus, for fields whose units are too
/// large to expand.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct UnitResidues {
    pub modulus: u64,
    pub t: u64,
    pub u: u64,
    pub unit_norm: i8,
    pub cf_period: u64,
}

/// Partial quotients of one period of the expansion of `(P0 + √d)/Q0`,
/// with `(P0, Q0) = (1, 2)` when `d ≡ 1 mod 4` and `(0, 1)` otherwise.
struct Expansion {
    d: i64,
    s: i64,
    p: i64,
    q: i64,
    q0: i64,
    done: bool,
}

impl Expansion {
    fn new(d: u64) -> Self {
        let (p, q) = if d % 4 == 1 { (1, 2) } else { (0, 1) };
        Expansion { d: d as i64, s: isqrt(d) as i64, p, q, q0: q, done: false }
    }
}

impl Iterator for Expansion {
    type Item = i64;

    fn next(&mut self) -> Option<i64> {
        if self.done {
            return None;
        }
        let a = (self.p + self.s) / self.q;
        self.p = a * self.q - self.p;
        self.q = (self.d - self.p * self.p) / self.q;
        if self.q == self.q0 {
            self.done = true;
        }
        Some(a)
    }
}

/// Fundamental unit by the continued fraction of `(1+√d)/2` (`d ≡ 1 mod 4`)
/// or `√d` (otherwise); the convergent before the end of the first period
/// gives `ε`.
pub fn fundamental_unit(d: u64) -> Result<FundamentalUnit> {
    let (delta, _) = invariants_shell(d)?;
    if d > i64::MAX as u64 / 4 {
        return Err(Error::Unsupported(format!("d={d} too large")));
    }
    let (mut a1, mut a2) = (BigInt::one(), BigInt::zero());
    let (mut b1, mut b2) = (BigInt::zero(), BigInt::one());
    let mut period = 0u64;
    for a in Expansion::new(d) {
        let a = BigInt::from(a);
        let na = &a * &a1 + &a2;
        let nb = &a * &b1 + &b2;
        a2 = std::mem::replace(&mut a1, na);
        b2 = std::mem::replace(&mut b1, nb);
        period += 1;
    }
    let (t, u) = if delta == 1 { (BigInt::from(2) * &a1 - &b1, b1) } else { (a1, b1) };
    let scaled = &t * &t - BigInt::from(d) * &u * &u;
    let unit_norm = match delta {
        1 if scaled == BigInt::from(4) => 1,
        1 if scaled == BigInt::from(-4) => -1,
        2 if scaled.is_one() => 1,
        2 if scaled == BigInt::from(-1) => -1,
        _ => return Err(Error::Invariant(format!("unit for d={d} fails the norm identity"))),
    };
    Ok(FundamentalUnit { t, u, delta, unit_norm, cf_period: period })
}

/// `t mod M`, `u mod M` without forming the full unit. The norm is
/// `(-1)^period`.
pub fn unit_residues(d: u64, modulus: u64) -> Result<UnitResidues> {
    check_field(d)?;
    if !(2..=1 << 62).contains(&modulus) {
        return Err(invalid!("modulus must lie in [2, 2^62]"));
    }
    if d > i64::MAX as u64 / 4 {
        return Err(Error::Unsupported(format!("d={d} too large")));
    }
    let m = modulus as u128;
    let (mut a1, mut a2) = (1u128, 0u128);
    let (mut b1, mut b2) = (0u128, 1u128);
    let mut period = 0u64;
    for a in Expansion::new(d) {
        let a = a as u128 % m;
        (a1, a2) = ((a * a1 + a2) % m, a1);
        (b1, b2) = ((a * b1 + b2) % m, b1);
        period += 1;
    }
    let t = if d % 4 == 1 { (2 * a1 + m - b1) % m } else { a1 };
    Ok(UnitResidues {
        modulus,
        t: t as u64,
        u: b1 as u64,
        unit_norm: if period % 2 == 0 { 1 } else { -1 },
        cf_period: period,
    })
}

/// `v_p(u)`, computed from `u mod p^K` with `p^K` as large as fits in 62 bits.
pub fn vp_u(d: u64, p: u64) -> Result<u32> {
    if !is_prime(p) {
        return Err(invalid!("{p} is not prime"));
    }
    let mut modulus = p;
    let mut depth = 1u32;
    while modulus <= (1u64 << 62) / p {
        modulus *= p;
        depth += 1;
    }
    let res = unit_residues(d, modulus)?;
    if res.u == 0 {
        return Err(Error::Unsupported(format!("v_{p}(u) is at least {depth}")));
    }
    let mut u = res.u;
    let mut v = 0;
    while u % p == 0 {
        u /= p;
        v += 1;
    }
    Ok(v)
}

/// `v_p(u)` from a full unit.
pub fn vp_of_unit(unit: &FundamentalUnit, p: u64) -> i64 {
    vp_int(&unit.u, p)
}

/// An indefinite form `ax² + bxy + cy²`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct QuadraticForm {
    pub a: i64,
    pub b: i64,
    pub c: i64,
}

impl QuadraticForm {
    pub fn discriminant(&self) -> i128 {
        self.b as i128 * self.b as i128 - 4 * self.a as i128 * self.c as i128
    }

    /// `0 < b < √D` and `√D - b < 2|a| < √D + b`.
    pub fn is_reduced(&self) -> bool {
        let disc = self.discriminant();
        if disc <= 0 {
            return false;
        }
        let s = crate::primes::isqrt_u128(disc as u128) as i64;
        let two_a = 2 * self.a.abs();
        self.b > 0 && self.b <= s && two_a + self.b > s && two_a - self.b <= s
    }

    /// The reduction operator: `(a, b, c) ↦ (c, b', (b'² - D)/(4c))` with
    /// `b' ≡ -b mod 2|c|` and `√D - 2|c| < b' < √D`.
    pub fn rho(&self) -> QuadraticForm {
        let disc = self.discriminant();
        let s = crate::primes::isqrt_u128(disc.max(0) as u128) as i64;
        let m = 2 * self.c.abs();
        let b = s - (s + self.b).rem_euclid(m);
        let c = ((b as i128 * b as i128 - disc) / (4 * self.c as i128)) as i64;
        QuadraticForm { a: self.c, b, c }
    }
}

/// Smallest-prime-factor table with `sqrt(D) mod q` for each prime `q`.
struct RootTable {
    spf: Vec<u32>,
    root: Vec<u32>,
}

const NO_ROOT: u32 = u32::MAX;

impl RootTable {
    fn new(limit: usize, disc: u64) -> Self {
        let mut spf = vec![0u32; limit + 1];
        let mut root = vec![NO_ROOT; limit + 1];
        for q in 2..=limit {
            if spf[q] != 0 {
                continue;
            }
            spf[q] = q as u32;
            let mut j = q * q;
            while j <= limit {
                if spf[j] == 0 {
                    spf[j] = q as u32;
                }
                j += q;
            }
            if q > 2 {
                if let Some(r) = sqrt_mod_prime(disc % q as u64, q as u64) {
                    root[q] = r as u32;
                }
            }
        }
        RootTable { spf, root }
    }

    /// Residues `x mod 4a` with `x² ≡ D mod 4a`.
    fn roots_mod_4a(&self, a: u64, disc: u64) -> Vec<u64> {
        let mut n = a;
        let mut e2 = 2;
        while n % 2 == 0 {
            n /= 2;
            e2 += 1;
        }
        let mut modulus = 1u64 << e2;
        let mut acc = sqrt_mod_2k(disc, e2);
        while n > 1 && !acc.is_empty() {
            let q = self.spf[n as usize] as u64;
            let mut e = 0;
            while n % q == 0 {
                n /= q;
                e += 1;
            }
            let local = if disc % q == 0 {
                // v_q(D) = 1 for odd q, so only q^1 admits a root
                if e == 1 { vec![0] } else { vec![] }
            } else {
                match self.root[q as usize] {
                    NO_ROOT => vec![],
                    r => {
                        let qe = q.pow(e);
                        let x = hensel_lift(r as u64, disc, q, e);
                        vec![x, qe - x]
                    }
                }
            };
            let qe = q.pow(e);
            acc = crt_combine(&acc, modulus, &local, qe);
            modulus *= qe;
        }
        acc
    }
}

/// Tonelli–Shanks for an odd prime `q`.
fn sqrt_mod_prime(n: u64, q: u64) -> Option<u64> {
    if n == 0 {
        return Some(0);
    }
    if pow_mod(n, (q - 1) / 2, q) != 1 {
        return None;
    }
    if q % 4 == 3 {
        return Some(pow_mod(n, (q + 1) / 4, q));
    }
    let mut s = 0;
    let mut odd = q - 1;
    while odd % 2 == 0 {
        odd /= 2;
        s += 1;
    }
    let z = (2..q).find(|&z| pow_mod(z, (q - 1) / 2, q) == q - 1)?;
    let mul = |x: u64, y: u64| (x as u128 * y as u128 % q as u128) as u64;
    let mut m = s;
    let mut c = pow_mod(z, odd, q);
    let mut t = pow_mod(n, odd, q);
    let mut r = pow_mod(n, odd.div_ceil(2), q);
    while t != 1 {
        let mut i = 0;
        let mut tt = t;
        while tt != 1 {
            tt = mul(tt, tt);
            i += 1;
        }
        let b = pow_mod(c, 1 << (m - i - 1), q);
        m = i;
        c = mul(b, b);
        t = mul(t, c);
        r = mul(r, b);
    }
    Some(r)
}

/// Lift a root of `x² ≡ D mod q` (q odd, q ∤ D) to one modulo `q^e`.
fn hensel_lift(root: u64, disc: u64, q: u64, e: u32) -> u64 {
    let mut x = root as i128;
    let mut modulus = q as i128;
    for _ in 1..e {
        modulus *= q as i128;
        let f = (x * x - disc as i128).rem_euclid(modulus);
        let inv = inv_mod(2 * x, modulus).expect("2x is a unit");
        x = (x - f * inv).rem_euclid(modulus);
    }
    x as u64
}

/// All `x mod 2^e` with `x² ≡ D mod 2^e`.
fn sqrt_mod_2k(disc: u64, e: u32) -> Vec<u64> {
    let mut sols: Vec<u64> = (0..2u64).filter(|x| (x * x) % 2 == disc % 2).collect();
    for k in 1..e {
        let m = 1u128 << (k + 1);
        let target = disc as u128 % m;
        sols = sols
            .iter()
            .flat_map(|&x| [x, x + (1 << k)])
            .filter(|&x| (x as u128 * x as u128) % m == target)
            .collect();
    }
    sols
}

fn crt_combine(xs: &[u64], m: u64, ys: &[u64], n: u64) -> Vec<u64> {
    let inv = inv_mod(m as i128, n as i128).expect("coprime moduli") as u128;
    let mn = m as u128 * n as u128;
    let mut out = Vec::with_capacity(xs.len() * ys.len());
    for &x in xs {
        for &y in ys {
            // x + m·((y - x)·m⁻¹ mod n)
            let diff = (y as i128 - x as i128).rem_euclid(n as i128) as u128;
            let k = diff * inv % n as u128;
            out.push(((x as u128 + m as u128 * k) % mn) as u64);
        }
    }
    out
}

/// Reduced forms of discriminant `D` with `a > 0`, as sorted `(a << 32) | b`.
fn positive_reduced_forms(disc: u64) -> Vec<u64> {
    let s = isqrt(disc);
    let table = RootTable::new(s as usize, disc);
    let mut keys = Vec::new();
    for a in 1..=s {
        let mut roots: Vec<u64> = table
            .roots_mod_4a(a, disc)
            .into_iter()
            .map(|x| x % (2 * a))
            .collect();
        roots.sort_unstable();
        roots.dedup();
        let lo = 1.max((s + 1).saturating_sub(2 * a)).max((2 * a).saturating_sub(s));
        for r in roots {
            let mut b = if r >= lo % (2 * a) {
                lo - lo % (2 * a) + r
            } else {
                lo - lo % (2 * a) + 2 * a + r
            };
            while b <= s {
                keys.push((a << 32) | b);
                b += 2 * a;
            }
        }
    }
    keys.sort_unstable();
    keys
}

/// Narrow class number `h⁺`: the number of cycles of reduced forms.
pub fn narrow_class_number(d: u64) -> Result<u64> {
    let (_, disc) = invariants_shell(d)?;
    if disc >= 1 << 62 {
        return Err(Error::Unsupported(format!("discriminant of d={d} too large")));
    }
    let s = isqrt(disc) as i64;
    if s >= 1 << 31 {
        return Err(Error::Unsupported(format!("d={d} too large for the form enumeration")));
    }
    let keys = positive_reduced_forms(disc);
    let disc = disc as i128;
    // ρ alternates the sign of a, so cycles of ρ correspond to cycles of ρ²
    // on the forms with a > 0.
    let step = |a: i64, b: i64| -> (i64, i64) {
        let c = ((b as i128 * b as i128 - disc) / (4 * a as i128)) as i64;
        let b1 = s - (s + b).rem_euclid(2 * c.abs());
        let c1 = ((b1 as i128 * b1 as i128 - disc) / (4 * c as i128)) as i64;
        let b2 = s - (s + b1).rem_euclid(2 * c1.abs());
        (c1, b2)
    };
    let mut visited = vec![0u64; keys.len().div_ceil(64)];
    let mut cycles = 0;
    for start in 0..keys.len() {
        if visited[start / 64] >> (start % 64) & 1 == 1 {
            continue;
        }
        cycles += 1;
        let mut idx = start;
        loop {
            visited[idx / 64] |= 1 << (idx % 64);
            let key = keys[idx];
            let (a, b) = step((key >> 32) as i64, (key & 0xffff_ffff) as i64);
            let next = ((a as u64) << 32) | b as u64;
            idx = keys.binary_search(&next).map_err(|_| {
                Error::Invariant(format!("reduction left the reduced set at ({a}, {b})"))
            })?;
            if visited[idx / 64] >> (idx % 64) & 1 == 1 {
                break;
            }
        }
    }
    Ok(cycles)
}

/// `(h, h⁺)` with `h = h⁺` when `N(ε) = -1` and `h⁺/2` otherwise.
pub fn class_number(d: u64) -> Result<(u64, u64)> {
    let h_plus = narrow_class_number(d)?;
    let norm = unit_residues(d, 2)?.unit_norm;
    let h = if norm == -1 { h_plus } else { h_plus / 2 };
    Ok((h, h_plus))
}

/// Everything about `Q(√d)` used downstream.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FieldInvariants {
    pub d: u64,
    pub delta: u32,
    pub disc: u64,
    pub t: BigInt,
    pub u: BigInt,
    pub unit_norm: i8,
    pub h: u64,
    pub h_plus: u64,
    pub cf_period: u64,
}

impl FieldInvariants {
    pub fn compute(d: u64) -> Result<Self> {
        let (delta, disc) = invariants_shell(d)?;
        let unit = fundamental_unit(d)?;
        let (h, h_plus) = class_number(d)?;
        Ok(FieldInvariants {
            d,
            delta,
            disc,
            t: unit.t,
            u: unit.u,
            unit_norm: unit.unit_norm,
            h,
            h_plus,
            cf_period: unit.cf_period,
        })
    }
}

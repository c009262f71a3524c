//! One checker per statement, each returning a [`CongruenceReport`], and a
//! parallel scan over instance grids.

use std::time::Instant;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::arith::{int, unit_log_series, vp_int};
use crate::bernoulli::BernoulliCache;
use crate::characters::{split_character, CharacterSplit};
use crate::error::{invalid, Error, Result};
use crate::padic_lfun::{a1_closed_quadratic, lp1_via_class_number, lp_interp_value, residue_term, wilson_quotient, LTarget};
use crate::primes::{is_prime, is_squarefree, primes_in, factorize};
use crate::quadratic_field::FieldInvariants;
use crate::report::{CongruenceReport, Instance, StatementId};

fn prime_at_least(p: u64, min: u64) -> Result<()> {
    if !is_prime(p) || p < min {
        return Err(invalid!("need a prime p >= {min}, got {p}"));
    }
    Ok(())
}

/// Split and invariants for `d = pm`, `d > 5`.
fn field_setup(d: u64, p: u64) -> Result<(CharacterSplit, FieldInvariants)> {
    if d <= 5 {
        return Err(invalid!("d must exceed 5, got {d}"));
    }
    let split = split_character(d, p)?;
    let inv = FieldInvariants::compute(d)?;
    if (&inv.t % BigInt::from(p)).is_zero() {
        return Err(Error::Invariant(format!("p={p} divides t for d={d}")));
    }
    Ok((split, inv))
}

fn euler_factor(split: &CharacterSplit) -> BigRational {
    let r = split.r() as u32;
    BigRational::one() - int(split.psi_m.eval(split.p as i64)) * crate::arith::rpow(&int(split.p), r - 1)
}

/// `2hu/t ≡ -B_r/r mod p` for the field `Q(√p)`, `p ≡ 1 mod 4`.
pub fn check_aac_classical(cache: &BernoulliCache, p: u64) -> Result<CongruenceReport> {
    let started = Instant::now();
    prime_at_least(p, 5)?;
    if p % 4 != 1 {
        return Err(invalid!("p={p} is not 1 mod 4"));
    }
    let inv = FieldInvariants::compute(p)?;
    let r = ((p - 1) / 2) as u32;
    let lhs = BigRational::new(BigInt::from(2 * inv.h) * &inv.u, inv.t.clone());
    let rhs = -cache.bernoulli(r) / BigInt::from(r);
    Ok(CongruenceReport::new(StatementId::AacClassical, Instance::prime(p), lhs, rhs, 1, started))
}

/// `(4h/δ)(u/t + (d/3)(u/t)³) ≡ -3(1 - ψ(p)p^(r-1)) B_{r,ψ}/r + B_{3r,ψ}/(3r) mod p²`.
///
/// At `p = 5` the report is marked advisory.
pub fn check_theorem1(cache: &BernoulliCache, d: u64, p: u64) -> Result<CongruenceReport> {
    let started = Instant::now();
    let (split, inv) = field_setup(d, p)?;
    let r = split.r() as u32;
    let psi = &split.psi_m;
    let kernel = unit_log_series(&BigInt::from(d), &inv.t, &inv.u, 1)?;
    let lhs = kernel * BigRational::new(BigInt::from(4 * inv.h), BigInt::from(inv.delta));
    let rhs = int(-3) * euler_factor(&split) * cache.gen_bernoulli(r, psi) / BigInt::from(r)
        + cache.gen_bernoulli(3 * r, psi) / BigInt::from(3 * r);
    let mut report = CongruenceReport::new(StatementId::Thm1, Instance::field(d, p), lhs, rhs, 2, started);
    report.advisory = p == 5;
    Ok(report)
}

/// For `p ∥ u`: `(2h/δ)(u/(pt)) ≡ (1/p)(3B_{r,ψ} - B_{3r,ψ}/3) mod p`.
pub fn check_corollary_exact_division(cache: &BernoulliCache, d: u64, p: u64) -> Result<CongruenceReport> {
    let started = Instant::now();
    prime_at_least(p, 7)?;
    let (split, inv) = field_setup(d, p)?;
    let v = vp_int(&inv.u, p);
    if v != 1 {
        return Err(Error::Precondition(format!("v_{p}(u) = {v}, not 1, for d={d}")));
    }
    let r = split.r() as u32;
    let psi = &split.psi_m;
    let lhs = BigRational::new(BigInt::from(2 * inv.h) * &inv.u, BigInt::from(inv.delta as u64 * p) * &inv.t);
    let rhs = (int(3) * cache.gen_bernoulli(r, psi) - cache.gen_bernoulli(3 * r, psi) / BigInt::from(3))
        / BigInt::from(p);
    Ok(CongruenceReport::new(StatementId::CorExactDiv, Instance::field(d, p), lhs, rhs, 1, started))
}

/// `9B_{r,ψ} ≡ B_{3r,ψ} mod p²`, necessary for `p² | u`. A failure shows
/// that `p` is not a super-AACM prime for `d`.
pub fn check_super_aacm_criterion(cache: &BernoulliCache, d: u64, p: u64) -> Result<CongruenceReport> {
    let started = Instant::now();
    prime_at_least(p, 7)?;
    if d <= 5 {
        return Err(invalid!("d must exceed 5, got {d}"));
    }
    let split = split_character(d, p)?;
    let r = split.r() as u32;
    let lhs = int(9) * cache.gen_bernoulli(r, &split.psi_m);
    let rhs = cache.gen_bernoulli(3 * r, &split.psi_m);
    Ok(CongruenceReport::new(StatementId::SuperAacmCrit, Instance::field(d, p), lhs, rhs, 2, started))
}

/// `B_{k(p-1)} + 1/p - 1 ≡ k W_p mod p`.
pub fn check_lehmer_thm2(cache: &BernoulliCache, p: u64, k: u64) -> Result<CongruenceReport> {
    let started = Instant::now();
    prime_at_least(p, 3)?;
    if k == 0 {
        return Err(invalid!("k must be positive"));
    }
    let n = (k * (p - 1)) as u32;
    let lhs = cache.bernoulli(n) - residue_term(p);
    let rhs = int(k) * wilson_quotient(p)?;
    Ok(CongruenceReport::new(StatementId::LehmerThm2, Instance::prime_k(p, k), lhs, rhs, 1, started))
}

/// `B_{2(p-1)} - B_{p-1} ≡ W_p mod p`.
pub fn check_lehmer_diff(cache: &BernoulliCache, p: u64) -> Result<CongruenceReport> {
    let started = Instant::now();
    prime_at_least(p, 3)?;
    let n = (p - 1) as u32;
    let lhs = cache.bernoulli(2 * n) - cache.bernoulli(n);
    let rhs = wilson_quotient(p)?;
    Ok(CongruenceReport::new(StatementId::LehmerDiff, Instance::prime(p), lhs, rhs, 1, started))
}

/// `k(p-1)W_p(1 + pW_p/2) ≡ -B_{k(p-1)} + R + k²(B_{2(p-1)} - B_{p-1}) - (k²/2)(B_{2(p-1)} - R) mod p²`.
///
/// The last two terms are `-(k(p-1))² a₁`. With `k` in place of `k²` (see
/// [`theorem3_printed_rhs`]) the congruence only holds for `k = 1`, for
/// `k ≡ 0, 1 mod p`, or when `p² | a₁`.
pub fn check_theorem3(cache: &BernoulliCache, p: u64, k: u64) -> Result<CongruenceReport> {
    let started = Instant::now();
    let lhs = theorem3_lhs(p, k)?;
    let rhs = theorem3_rhs(cache, p, k, &int(k * k));
    Ok(CongruenceReport::new(StatementId::Thm3, Instance::prime_k(p, k), lhs, rhs, 2, started))
}

/// The right side with a linear `k` multiplying the correction terms.
pub fn theorem3_printed_rhs(cache: &BernoulliCache, p: u64, k: u64) -> Result<BigRational> {
    theorem3_lhs(p, k)?;
    Ok(theorem3_rhs(cache, p, k, &int(k)))
}

fn theorem3_lhs(p: u64, k: u64) -> Result<BigRational> {
    prime_at_least(p, 7)?;
    if k == 0 {
        return Err(invalid!("k must be positive"));
    }
    let w = wilson_quotient(p)?;
    Ok(int(k) * int(p - 1) * &w * (BigRational::one() + int(p) * &w / BigInt::from(2)))
}

fn theorem3_rhs(cache: &BernoulliCache, p: u64, k: u64, weight: &BigRational) -> BigRational {
    let n = (p - 1) as u32;
    let r_term = residue_term(p);
    let b1 = cache.bernoulli(n);
    let b2 = cache.bernoulli(2 * n);
    -cache.bernoulli(k as u32 * n) + &r_term + weight * (&b2 - &b1) - weight * (&b2 - &r_term) / BigInt::from(2)
}

/// `4(B_{p-1} - R) ≡ B_{2(p-1)} - R mod p²`, necessary for `p² | W_p`.
pub fn check_super_wilson_criterion(cache: &BernoulliCache, p: u64) -> Result<CongruenceReport> {
    let started = Instant::now();
    prime_at_least(p, 5)?;
    let n = (p - 1) as u32;
    let r_term = residue_term(p);
    let lhs = int(4) * (cache.bernoulli(n) - &r_term);
    let rhs = cache.bernoulli(2 * n) - r_term;
    Ok(CongruenceReport::new(StatementId::SuperWilsonCrit, Instance::prime(p), lhs, rhs, 2, started))
}

/// `L_p(1, χ_D) ≡ L_p(1 - r, χ_D) - r a₁ mod p²`, with the left side from the
/// class number and unit and `a₁` from its closed form.
pub fn check_chain_identity(cache: &BernoulliCache, d: u64, p: u64) -> Result<CongruenceReport> {
    let started = Instant::now();
    let (split, inv) = field_setup(d, p)?;
    let r = split.r() as u32;
    let lhs = lp1_via_class_number(&inv, p)?;
    let rhs = lp_interp_value(cache, r, LTarget::Split(&split), p)? - int(r) * a1_closed_quadratic(cache, &split)?;
    let mut report = CongruenceReport::new(StatementId::ChainIdentity, Instance::field(d, p), lhs, rhs, 2, started);
    report.advisory = p == 5;
    Ok(report)
}

/// Which statement a scan runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScanTarget {
    AacClassical,
    Thm1,
    CorExactDiv,
    SuperAacm,
    ChainIdentity,
    Lehmer2,
    LehmerDiff,
    Thm3,
    SuperWilson,
}

impl ScanTarget {
    pub const ALL: [ScanTarget; 9] = [
        ScanTarget::AacClassical,
        ScanTarget::Thm1,
        ScanTarget::CorExactDiv,
        ScanTarget::SuperAacm,
        ScanTarget::ChainIdentity,
        ScanTarget::Lehmer2,
        ScanTarget::LehmerDiff,
        ScanTarget::Thm3,
        ScanTarget::SuperWilson,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ScanTarget::AacClassical => "aac",
            ScanTarget::Thm1 => "thm1",
            ScanTarget::CorExactDiv => "cor-exact-div",
            ScanTarget::SuperAacm => "super-aacm",
            ScanTarget::ChainIdentity => "chain",
            ScanTarget::Lehmer2 => "lehmer2",
            ScanTarget::LehmerDiff => "lehmer-diff",
            ScanTarget::Thm3 => "thm3",
            ScanTarget::SuperWilson => "super-wilson",
        }
    }

    pub fn parse(name: &str) -> Result<Self> {
        ScanTarget::ALL
            .into_iter()
            .find(|t| t.name() == name)
            .ok_or_else(|| invalid!("unknown statement '{name}'"))
    }

    /// Statements indexed by a field `d = pm` rather than by a prime alone.
    pub fn is_field_statement(self) -> bool {
        matches!(
            self,
            ScanTarget::Thm1 | ScanTarget::CorExactDiv | ScanTarget::SuperAacm | ScanTarget::ChainIdentity
        )
    }

    /// Smallest prime the statement is defined for.
    pub fn min_prime(self) -> u64 {
        match self {
            ScanTarget::Lehmer2 | ScanTarget::LehmerDiff => 3,
            ScanTarget::AacClassical | ScanTarget::Thm1 | ScanTarget::ChainIdentity | ScanTarget::SuperWilson => 5,
            ScanTarget::CorExactDiv | ScanTarget::SuperAacm | ScanTarget::Thm3 => 7,
        }
    }
}

/// Largest Bernoulli index a scan computes without `long_running`.
pub const LONG_RUNNING_INDEX: u64 = 1000;
/// Largest field a scan treats without `long_running`.
pub const LONG_RUNNING_D: u64 = 1_000_000;

/// Largest Bernoulli index (plain or generalized) an instance needs.
pub fn bernoulli_index(target: ScanTarget, inst: &Instance) -> u64 {
    let p = inst.p;
    match target {
        ScanTarget::AacClassical => (p - 1) / 2,
        ScanTarget::Thm1 | ScanTarget::CorExactDiv | ScanTarget::SuperAacm | ScanTarget::ChainIdentity => {
            3 * (p - 1) / 2
        }
        ScanTarget::Lehmer2 | ScanTarget::Thm3 => inst.k.unwrap_or(1).max(2) * (p - 1),
        ScanTarget::LehmerDiff | ScanTarget::SuperWilson => 2 * (p - 1),
    }
}

/// Grid and options for [`scan`].
#[derive(Debug, Clone, Serialize)]
pub struct ScanConfig {
    pub targets: Vec<ScanTarget>,
    pub d_min: u64,
    pub d_max: u64,
    pub p_min: u64,
    pub p_max: u64,
    pub k_max: u64,
    /// Admit `p = 5` for statements whose verdict there is advisory.
    pub include_p5: bool,
    /// Admit instances beyond [`LONG_RUNNING_INDEX`] or [`LONG_RUNNING_D`].
    pub long_running: bool,
    /// Flag fields with `v_p(u) ≥ κ`.
    pub kappa: u32,
}

impl Default for ScanConfig {
    fn default() -> Self {
        ScanConfig {
            targets: vec![ScanTarget::Thm1],
            d_min: 6,
            d_max: 2000,
            p_min: 7,
            p_max: 200,
            k_max: 5,
            include_p5: false,
            long_running: false,
            kappa: 2,
        }
    }
}

impl ScanConfig {
    pub fn validate(&self) -> Result<()> {
        if self.kappa < 2 {
            return Err(invalid!("kappa must be at least 2"));
        }
        if self.k_max == 0 {
            return Err(invalid!("k-max must be positive"));
        }
        Ok(())
    }

    /// Whether the instance is beyond the default budget.
    pub fn needs_long_running(&self, target: ScanTarget, inst: &Instance) -> bool {
        bernoulli_index(target, inst) > LONG_RUNNING_INDEX || inst.d.is_some_and(|d| d > LONG_RUNNING_D)
    }

    fn admits_prime(&self, target: ScanTarget, p: u64) -> bool {
        let lo = if self.include_p5 && p == 5 { 5 } else { self.p_min };
        p >= lo.max(target.min_prime()) && p <= self.p_max
    }

    /// Every instance of every target, in canonical order.
    pub fn instances(&self) -> Vec<(ScanTarget, Instance)> {
        let mut out = Vec::new();
        let mut targets = self.targets.clone();
        targets.sort();
        targets.dedup();
        for target in targets {
            if target.is_field_statement() {
                for d in self.d_min.max(6)..=self.d_max {
                    if !is_squarefree(d) {
                        continue;
                    }
                    for (p, _) in factorize(d) {
                        if self.admits_prime(target, p) {
                            out.push((target, Instance::field(d, p)));
                        }
                    }
                }
                continue;
            }
            let lo = if self.include_p5 { self.p_min.min(5) } else { self.p_min };
            for p in primes_in(lo, self.p_max) {
                if !self.admits_prime(target, p) {
                    continue;
                }
                match target {
                    ScanTarget::AacClassical if p % 4 != 1 => {}
                    ScanTarget::Lehmer2 | ScanTarget::Thm3 => {
                        out.extend((1..=self.k_max).map(|k| (target, Instance::prime_k(p, k))));
                    }
                    _ => out.push((target, Instance::prime(p))),
                }
            }
        }
        out
    }
}

/// A per-instance failure to evaluate.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ScanError {
    pub target: ScanTarget,
    pub instance: Instance,
    pub message: String,
}

/// A field with `v_p(u) ≥ κ`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct KappaAlert {
    pub d: u64,
    pub p: u64,
    pub vp_u: i64,
}

#[derive(Debug, Clone, Default)]
pub struct ScanOutcome {
    pub reports: Vec<CongruenceReport>,
    /// Instances outside a statement's hypotheses that the grid produced
    /// (e.g. `v_p(u) ≠ 1` for the exact-division corollary).
    pub skipped: Vec<ScanError>,
    pub errors: Vec<ScanError>,
    pub alerts: Vec<KappaAlert>,
}

pub fn run_instance(cache: &BernoulliCache, target: ScanTarget, inst: &Instance) -> Result<CongruenceReport> {
    let p = inst.p;
    let d = || inst.d.ok_or_else(|| invalid!("{} needs d", target.name()));
    let k = || inst.k.ok_or_else(|| invalid!("{} needs k", target.name()));
    match target {
        ScanTarget::AacClassical => check_aac_classical(cache, p),
        ScanTarget::Thm1 => check_theorem1(cache, d()?, p),
        ScanTarget::CorExactDiv => check_corollary_exact_division(cache, d()?, p),
        ScanTarget::SuperAacm => check_super_aacm_criterion(cache, d()?, p),
        ScanTarget::ChainIdentity => check_chain_identity(cache, d()?, p),
        ScanTarget::Lehmer2 => check_lehmer_thm2(cache, p, k()?),
        ScanTarget::LehmerDiff => check_lehmer_diff(cache, p),
        ScanTarget::Thm3 => check_theorem3(cache, p, k()?),
        ScanTarget::SuperWilson => check_super_wilson_criterion(cache, p),
    }
}

/// Run every instance of the configured grid in parallel. Errors are
/// collected per instance; output is sorted by statement and instance.
pub fn scan(cache: &BernoulliCache, config: &ScanConfig) -> Result<ScanOutcome> {
    config.validate()?;
    let (instances, over_budget): (Vec<_>, Vec<_>) = config
        .instances()
        .into_iter()
        .partition(|(target, inst)| config.long_running || !config.needs_long_running(*target, inst));
    let results: Vec<_> = instances
        .par_iter()
        .map(|(target, inst)| (*target, *inst, run_instance(cache, *target, inst)))
        .collect();

    let mut outcome = ScanOutcome {
        skipped: over_budget
            .into_iter()
            .map(|(target, instance)| ScanError { target, instance, message: "needs --long-running".into() })
            .collect(),
        ..Default::default()
    };
    for (target, instance, result) in results {
        match result {
            Ok(report) => outcome.reports.push(report),
            Err(Error::Precondition(message)) => outcome.skipped.push(ScanError { target, instance, message }),
            Err(e) => outcome.errors.push(ScanError { target, instance, message: e.to_string() }),
        }
    }

    let mut fields: Vec<(u64, u64)> = instances
        .iter()
        .filter_map(|(_, inst)| inst.d.map(|d| (d, inst.p)))
        .collect();
    fields.sort_unstable();
    fields.dedup();
    outcome.alerts = fields
        .par_iter()
        .filter_map(|&(d, p)| {
            let v = crate::quadratic_field::fundamental_unit(d).ok()?;
            let vp = vp_int(&v.u, p);
            (vp >= config.kappa as i64).then_some(KappaAlert { d, p, vp_u: vp })
        })
        .collect();

    outcome.reports.sort_by_key(|r| (r.statement, r.instance));
    outcome.skipped.sort_by_key(|s| (s.target, s.instance));
    outcome.errors.sort_by_key(|e| (e.target, e.instance));
    Ok(outcome)
}

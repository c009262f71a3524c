//! Verdict records for individual congruence checks.

use std::fmt;
use std::time::{Duration, Instant};

use num_rational::BigRational;
use serde::{Serialize, Serializer};

use crate::arith::{fmt_rational, vp_unchecked, Valuation};

/// Which statement a report verifies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum StatementId {
    /// `2hu/t ≡ -B_r/r mod p` for `d = p ≡ 1 mod 4`.
    AacClassical,
    /// The mod-p² congruence between `h, t, u` and `B_{r,ψ}, B_{3r,ψ}`.
    Thm1,
    /// The mod-p form of the above when `p || u`.
    CorExactDiv,
    /// `9 B_{r,ψ} ≡ B_{3r,ψ} mod p²` (necessary for `p² | u`).
    SuperAacmCrit,
    /// `B_{k(p-1)} + 1/p - 1 ≡ k W_p mod p`.
    LehmerThm2,
    /// `B_{2(p-1)} - B_{p-1} ≡ W_p mod p`.
    LehmerDiff,
    /// The mod-p² Wilson-quotient congruence.
    Thm3,
    /// `4(B_{p-1} - R) ≡ B_{2(p-1)} - R mod p²` (necessary for `p² | W_p`).
    SuperWilsonCrit,
    /// Power sums of a non-principal character modulo p².
    PowerSumNonprincipal,
    /// Power sums `1^k + ... + p^k` modulo p².
    PowerSumPrincipal,
    /// Sun's congruence for generalized Bernoulli numbers.
    SunCongruence,
    /// `L_p(1, χ_D) ≡ L_p(1 - r, χ_D) - r a_1 mod p²`.
    ChainIdentity,
}

impl StatementId {
    /// Detector statements are one-directional criteria: a failure is
    /// information, not a violation.
    pub fn is_detector(self) -> bool {
        matches!(self, StatementId::SuperAacmCrit | StatementId::SuperWilsonCrit)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            StatementId::AacClassical => "AAC_CLASSICAL",
            StatementId::Thm1 => "THM1",
            StatementId::CorExactDiv => "COR_EXACT_DIV",
            StatementId::SuperAacmCrit => "SUPER_AACM_CRIT",
            StatementId::LehmerThm2 => "LEHMER_THM2",
            StatementId::LehmerDiff => "LEHMER_DIFF",
            StatementId::Thm3 => "THM3",
            StatementId::SuperWilsonCrit => "SUPER_WILSON_CRIT",
            StatementId::PowerSumNonprincipal => "POWER_SUM_NONPRINCIPAL",
            StatementId::PowerSumPrincipal => "POWER_SUM_PRINCIPAL",
            StatementId::SunCongruence => "SUN_CONGRUENCE",
            StatementId::ChainIdentity => "CHAIN_IDENTITY",
        }
    }
}

impl fmt::Display for StatementId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// The parameters identifying one instance of a statement.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize)]
pub struct Instance {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub d: Option<u64>,
    pub p: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<u64>,
    /// Discriminant of the character, for character-level statements.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub chi: Option<i64>,
}

impl Instance {
    pub fn field(d: u64, p: u64) -> Self {
        Instance { d: Some(d), p, ..Default::default() }
    }

    pub fn prime(p: u64) -> Self {
        Instance { p, ..Default::default() }
    }

    pub fn prime_k(p: u64, k: u64) -> Self {
        Instance { p, k: Some(k), ..Default::default() }
    }
}

impl fmt::Display for Instance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        if let Some(d) = self.d {
            parts.push(format!("d={d}"));
        }
        parts.push(format!("p={}", self.p));
        if let Some(k) = self.k {
            parts.push(format!("k={k}"));
        }
        if let Some(c) = self.chi {
            parts.push(format!("chi={c}"));
        }
        f.write_str(&parts.join(" "))
    }
}

fn ser_rational<S: Serializer>(x: &BigRational, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&fmt_rational(x))
}

fn ser_valuation<S: Serializer>(v: &Valuation, s: S) -> Result<S::Ok, S::Error> {
    match v {
        Valuation::Finite(n) => s.serialize_i64(*n),
        Valuation::Infinite => s.serialize_none(),
    }
}

/// Both sides of one congruence, the valuation of their difference and the
/// verdict. `holds` is exactly `difference_valuation >= depth`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CongruenceReport {
    pub statement: StatementId,
    pub instance: Instance,
    #[serde(serialize_with = "ser_rational")]
    pub lhs: BigRational,
    #[serde(serialize_with = "ser_rational")]
    pub rhs: BigRational,
    pub depth: u32,
    /// `null` in JSON when the two sides are equal.
    #[serde(serialize_with = "ser_valuation")]
    pub difference_valuation: Valuation,
    pub holds: bool,
    /// Set for verdicts outside the verified hypothesis range (p = 5 for THM1).
    #[serde(skip_serializing_if = "std::ops::Not::not")]
    pub advisory: bool,
    #[serde(skip)]
    pub elapsed: Duration,
}

impl CongruenceReport {
    pub fn new(
        statement: StatementId,
        instance: Instance,
        lhs: BigRational,
        rhs: BigRational,
        depth: u32,
        started: Instant,
    ) -> Self {
        let difference_valuation = vp_unchecked(&(&lhs - &rhs), instance.p);
        CongruenceReport {
            statement,
            instance,
            holds: difference_valuation.at_least(depth as i64),
            lhs,
            rhs,
            depth,
            difference_valuation,
            advisory: false,
            elapsed: started.elapsed(),
        }
    }

    /// Recompute the verdict from the stored sides.
    pub fn rederive_holds(&self) -> bool {
        vp_unchecked(&(&self.lhs - &self.rhs), self.instance.p).at_least(self.depth as i64)
    }

    /// A failed non-detector, non-advisory check.
    pub fn is_violation(&self) -> bool {
        !self.holds && !self.advisory && !self.statement.is_detector()
    }
}

impl fmt::Display for CongruenceReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} [{}] mod p^{}: v_p(lhs-rhs)={} {}",
            self.statement,
            self.instance,
            self.depth,
            self.difference_valuation,
            if self.holds { "holds" } else { "FAILS" }
        )?;
        if self.advisory {
            f.write_str(" (advisory)")?;
        }
        Ok(())
    }
}

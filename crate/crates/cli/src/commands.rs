//! The five subcommands. Each returns its output rows and verdicts; the
//! caller writes them and derives the exit code.

use serde_json::{json, Value};

use supercong::arith::{congruent, fmt_rational, PadicContext};
use supercong::characters::{split_character, QuadChar};
use supercong::padic_lfun::{a0_closed_principal, a1_closed_principal, a1_closed_quadratic, a_coefficients_direct};
use supercong::primes::factorize;
use supercong::quadratic_field::{class_number, vp_u};
use supercong::report::Instance;
use supercong::suite::{self, ScanConfig, ScanTarget};
use supercong::{BernoulliCache, CongruenceReport, Error};

use crate::args::{BernoulliArgs, LfunArgs, ScanArgs, Table1Args, VerifyArgs};
use crate::output::Verdict;

/// Rejected input; maps to exit code 2.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UsageError(pub String);

impl From<Error> for UsageError {
    fn from(e: Error) -> Self {
        UsageError(e.to_string())
    }
}

pub enum Rows {
    Reports(Vec<CongruenceReport>),
    Table { columns: &'static [&'static str], rows: Vec<Value> },
}

pub struct CommandOutput {
    pub rows: Rows,
    pub verdicts: Vec<Verdict>,
    pub attention: Vec<Instance>,
    pub config: Value,
}

fn parse_target(name: &str) -> Result<ScanTarget, UsageError> {
    ScanTarget::parse(name).map_err(|_| {
        let known: Vec<&str> = ScanTarget::ALL.iter().map(|t| t.name()).collect();
        UsageError(format!("unknown statement '{name}'; expected one of {}", known.join(", ")))
    })
}

fn require(value: Option<u64>, flag: &str, statement: &str) -> Result<u64, UsageError> {
    value.ok_or_else(|| UsageError(format!("{statement} needs --{flag}")))
}

pub fn verify(cache: &BernoulliCache, args: &VerifyArgs) -> Result<CommandOutput, UsageError> {
    let target = parse_target(&args.statement)?;
    let name = target.name();
    let p = require(args.p, "p", name)?;
    let instance = if target.is_field_statement() {
        Instance::field(require(args.d, "d", name)?, p)
    } else if matches!(target, ScanTarget::Lehmer2 | ScanTarget::Thm3) {
        Instance::prime_k(p, require(args.k, "k", name)?)
    } else {
        Instance::prime(p)
    };
    if p == 5 && matches!(target, ScanTarget::Thm1 | ScanTarget::ChainIdentity) && !args.include_p5 {
        return Err(UsageError(format!("{name} at p = 5 is advisory only; pass --include-p5")));
    }
    let config = json!({
        "statement": name,
        "d": args.d,
        "p": args.p,
        "k": args.k,
        "include_p5": args.include_p5,
    });
    let (verdicts, reports) = match suite::run_instance(cache, target, &instance) {
        Ok(report) => (vec![Verdict::of(&report)], vec![report]),
        Err(Error::Invariant(msg)) => {
            log::error!("{name} [{instance}]: {msg}");
            (vec![Verdict::Error], Vec::new())
        }
        Err(e) => return Err(e.into()),
    };
    let attention = attention(&reports);
    Ok(CommandOutput { rows: Rows::Reports(reports), verdicts, attention, config })
}

fn attention(reports: &[CongruenceReport]) -> Vec<Instance> {
    reports
        .iter()
        .filter(|r| r.statement.is_detector() && r.holds)
        .map(|r| r.instance)
        .collect()
}

pub fn scan_config(args: &ScanArgs) -> Result<ScanConfig, UsageError> {
    let targets = args.statements.iter().map(|s| parse_target(s)).collect::<Result<Vec<_>, _>>()?;
    if args.d_min > args.d_max && targets.iter().any(|t| t.is_field_statement()) {
        log::info!("d-min exceeds d-max; the field grid is empty");
    }
    let config = ScanConfig {
        targets,
        d_min: args.d_min,
        d_max: args.d_max,
        p_min: args.p_min,
        p_max: args.p_max,
        k_max: args.k_max,
        include_p5: args.include_p5,
        long_running: args.long_running,
        kappa: args.kappa,
    };
    config.validate()?;
    Ok(config)
}

pub fn scan(cache: &BernoulliCache, args: &ScanArgs) -> Result<CommandOutput, UsageError> {
    let config = scan_config(args)?;
    let outcome = suite::scan(cache, &config)?;
    for e in &outcome.errors {
        log::error!("{} [{}]: {}", e.target.name(), e.instance, e.message);
    }
    for s in &outcome.skipped {
        log::info!("skipped {} [{}]: {}", s.target.name(), s.instance, s.message);
    }
    for a in &outcome.alerts {
        log::warn!("v_{}(u) = {} for d = {}", a.p, a.vp_u, a.d);
    }
    let mut verdicts: Vec<Verdict> = outcome.reports.iter().map(Verdict::of).collect();
    verdicts.extend(outcome.skipped.iter().map(|_| Verdict::Skipped));
    verdicts.extend(outcome.errors.iter().map(|_| Verdict::Error));
    let attention = attention(&outcome.reports);
    for inst in &attention {
        log::warn!("detector condition holds at [{inst}]; worth a closer look");
    }
    let config = serde_json::to_value(&config).expect("config serializes");
    Ok(CommandOutput { rows: Rows::Reports(outcome.reports), verdicts, attention, config })
}

/// `(d, p, h, v_p(u))` as printed in Table 1.
pub const TABLE1: [(u64, u64, u64, u32); 3] =
    [(4099215, 3, 4, 3), (125854178626, 11, 8, 2), (20256129307923, 3, 16, 2)];

const TABLE1_COLUMNS: &[&str] = &["d", "factorization", "p", "h", "h_expected", "vp_u", "vp_u_expected", "status"];

pub fn table1(args: &Table1Args) -> Result<CommandOutput, UsageError> {
    let mut rows = Vec::new();
    let mut verdicts = Vec::new();
    for (i, &(d, p, h_expected, v_expected)) in TABLE1.iter().enumerate() {
        if i > 0 && !args.long_running {
            rows.push(json!({
                "d": d, "factorization": null, "p": p, "h": null, "h_expected": h_expected,
                "vp_u": null, "vp_u_expected": v_expected, "status": "skipped (needs --long-running)",
            }));
            verdicts.push(Verdict::Skipped);
            continue;
        }
        let factors: Vec<String> = factorize(d)
            .into_iter()
            .map(|(q, e)| if e == 1 { q.to_string() } else { format!("{q}^{e}") })
            .collect();
        let (h, _) = class_number(d)?;
        let v = vp_u(d, p)?;
        let ok = h == h_expected && v == v_expected;
        rows.push(json!({
            "d": d, "factorization": factors.join("*"), "p": p, "h": h, "h_expected": h_expected,
            "vp_u": v, "vp_u_expected": v_expected, "status": if ok { "match" } else { "mismatch" },
        }));
        verdicts.push(if ok { Verdict::Holds } else { Verdict::Fails });
    }
    Ok(CommandOutput {
        rows: Rows::Table { columns: TABLE1_COLUMNS, rows },
        verdicts,
        attention: Vec::new(),
        config: json!({ "long_running": args.long_running }),
    })
}

fn character(disc: Option<i64>) -> Result<QuadChar, UsageError> {
    match disc {
        None | Some(1) => Ok(QuadChar::principal()),
        Some(d) => Ok(QuadChar::from_discriminant(d)?),
    }
}

pub fn bernoulli(cache: &BernoulliCache, args: &BernoulliArgs) -> Result<CommandOutput, UsageError> {
    let n_max = args.n_max.unwrap_or(args.n);
    if n_max < args.n {
        return Err(UsageError(format!("--n-max {n_max} is below --n {}", args.n)));
    }
    let chi = args.disc.map(|d| character(Some(d))).transpose()?;
    let rows: Vec<Value> = (args.n..=n_max)
        .map(|n| {
            let value = match &chi {
                Some(chi) => cache.gen_bernoulli(n, chi),
                None => cache.bernoulli(n),
            };
            json!({ "n": n, "disc": chi.map(|c| c.discriminant()), "value": fmt_rational(&value) })
        })
        .collect();
    let verdicts = vec![Verdict::Computed; rows.len()];
    Ok(CommandOutput {
        rows: Rows::Table { columns: &["n", "disc", "value"], rows },
        verdicts,
        attention: Vec::new(),
        config: json!({ "n": args.n, "n_max": n_max, "disc": args.disc }),
    })
}

const LFUN_COLUMNS: &[&str] =
    &["disc", "p", "f", "a_minus1", "a0", "a1", "a0_closed", "a1_closed", "a0_agrees", "a1_agrees"];

pub fn lfun(cache: &BernoulliCache, args: &LfunArgs) -> Result<CommandOutput, UsageError> {
    let p = args.p;
    let (chi, split) = match args.d {
        None => (QuadChar::principal(), None),
        Some(d) => {
            let split = split_character(d, p)?;
            (split.chi_d, Some(split))
        }
    };
    let bundle = a_coefficients_direct(&chi, p)?;
    let mut verdicts = Vec::new();
    if let Err(e) = bundle.check_invariants() {
        log::error!("{e}");
        verdicts.push(Verdict::Error);
    }
    let (a0_closed, a1_closed) = match &split {
        None => (Some(a0_closed_principal(p)?), Some(a1_closed_principal(cache, p)?)),
        Some(split) => match a1_closed_quadratic(cache, split) {
            Ok(a1) => (None, Some(a1)),
            Err(Error::Unsupported(msg)) => {
                log::info!("no closed form for a_1: {msg}");
                (None, None)
            }
            Err(e) => return Err(e.into()),
        },
    };
    let ctx = PadicContext::new(p, 2)?;
    let agrees = |closed: &Option<_>, direct| closed.as_ref().map(|c| congruent(c, direct, &ctx));
    let a0_agrees = agrees(&a0_closed, &bundle.a0);
    let a1_agrees = agrees(&a1_closed, &bundle.a1);
    for agreement in [a0_agrees, a1_agrees].into_iter().flatten() {
        verdicts.push(if agreement { Verdict::Holds } else { Verdict::Fails });
    }
    if verdicts.is_empty() {
        verdicts.push(Verdict::Computed);
    }
    let row = json!({
        "disc": chi.discriminant(),
        "p": p,
        "f": bundle.f,
        "a_minus1": fmt_rational(&bundle.a_minus1),
        "a0": fmt_rational(&bundle.a0),
        "a1": fmt_rational(&bundle.a1),
        "a0_closed": a0_closed.as_ref().map(fmt_rational),
        "a1_closed": a1_closed.as_ref().map(fmt_rational),
        "a0_agrees": a0_agrees,
        "a1_agrees": a1_agrees,
    });
    Ok(CommandOutput {
        rows: Rows::Table { columns: LFUN_COLUMNS, rows: vec![row] },
        verdicts,
        attention: Vec::new(),
        config: json!({ "p": p, "d": args.d }),
    })
}

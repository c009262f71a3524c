//! Persistence of the Bernoulli cache as `bernoulli-cache-v1.json`.
//!
//! Entries are never trusted: each one is compared with a recomputation
//! modulo the prime `2^61 - 1`, which is cheap next to exact rational
//! arithmetic and catches any edit to a numerator or denominator.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Signed;
use serde::{Deserialize, Serialize};

use supercong::characters::QuadChar;
use supercong::BernoulliCache;

pub const FILE_NAME: &str = "bernoulli-cache-v1.json";
pub const VERSION: u32 = 1;

const Q: u64 = (1 << 61) - 1;

#[derive(Debug, Serialize, Deserialize)]
struct CacheFile {
    version: u32,
    entries: Vec<serde_json::Value>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Entry {
    pub n: u32,
    pub disc: Option<i64>,
    pub num: String,
    pub den: String,
}

/// What a load found.
#[derive(Debug, Default, Clone, PartialEq, Eq)]
pub struct LoadStats {
    pub accepted: usize,
    pub rejected: usize,
    /// The file existed but had another version or was unreadable.
    pub discarded_file: bool,
}

pub fn cache_path(dir: &Path) -> PathBuf {
    dir.join(FILE_NAME)
}

/// Create the directory if needed and prove it is writable.
pub fn prepare_dir(dir: &Path) -> io::Result<()> {
    fs::create_dir_all(dir)?;
    let probe = dir.join(".supercong-write-probe");
    fs::File::create(&probe)?.write_all(b"ok")?;
    fs::remove_file(probe)
}

/// Load validated entries from `dir` into `cache`. A missing file is an
/// empty cache.
pub fn load(dir: &Path, cache: &BernoulliCache) -> LoadStats {
    let path = cache_path(dir);
    let mut stats = LoadStats::default();
    let text = match fs::read_to_string(&path) {
        Ok(text) => text,
        Err(e) if e.kind() == io::ErrorKind::NotFound => return stats,
        Err(e) => {
            log::warn!("cannot read {}: {e}; rebuilding", path.display());
            stats.discarded_file = true;
            return stats;
        }
    };
    let file: CacheFile = match serde_json::from_str(&text) {
        Ok(file) => file,
        Err(e) => {
            log::warn!("{} is not a cache file ({e}); rebuilding", path.display());
            stats.discarded_file = true;
            return stats;
        }
    };
    if file.version != VERSION {
        log::warn!("{} has version {}, expected {VERSION}; rebuilding", path.display(), file.version);
        stats.discarded_file = true;
        return stats;
    }

    let mut plain: Vec<Option<BigRational>> = Vec::new();
    let mut generalized = Vec::new();
    for raw in file.entries {
        match decode(raw) {
            Ok((n, None, value)) => {
                let slot = n as usize;
                if plain.len() <= slot {
                    plain.resize(slot + 1, None);
                }
                plain[slot] = Some(value);
            }
            Ok((n, Some(chi), value)) => generalized.push((n, chi, value)),
            Err(why) => {
                log::warn!("dropping cache entry: {why}");
                stats.rejected += 1;
            }
        }
    }

    let n_max = plain.len().max(generalized.iter().map(|e| e.0 as usize + 1).max().unwrap_or(0));
    let reference = plain_mod_q(n_max);
    let mut prefix = Vec::new();
    for (n, value) in plain.into_iter().enumerate() {
        match value {
            Some(v) if residue(&v) == Some(reference[n]) => {
                if prefix.len() == n {
                    prefix.push(v);
                    stats.accepted += 1;
                } else {
                    // valid but beyond a gap; the recurrence needs a prefix
                    stats.rejected += 1;
                }
            }
            Some(_) => {
                log::warn!("dropping cache entry B_{n}: value does not match recomputation");
                stats.rejected += 1;
            }
            None => {}
        }
    }
    cache.seed_plain(prefix);

    for (n, chi, value) in generalized {
        if residue(&value) == Some(generalized_mod_q(n, &chi, &reference)) {
            cache.seed_generalized(n, &chi, value);
            stats.accepted += 1;
        } else {
            log::warn!("dropping cache entry B_{{{n},{}}}: value does not match recomputation", chi.discriminant());
            stats.rejected += 1;
        }
    }
    stats
}

fn decode(raw: serde_json::Value) -> Result<(u32, Option<QuadChar>, BigRational), String> {
    let entry: Entry = serde_json::from_value(raw).map_err(|e| format!("malformed entry ({e})"))?;
    let num: BigInt = entry.num.parse().map_err(|_| format!("bad numerator {:?}", entry.num))?;
    let den: BigInt = entry.den.parse().map_err(|_| format!("bad denominator {:?}", entry.den))?;
    if !den.is_positive() {
        return Err(format!("non-positive denominator for n={}", entry.n));
    }
    let value = BigRational::new(num.clone(), den.clone());
    if value.numer() != &num || value.denom() != &den {
        return Err(format!("n={} is not in lowest terms", entry.n));
    }
    let chi = match entry.disc {
        None => None,
        Some(1) => Some(QuadChar::principal()),
        Some(d) => Some(QuadChar::from_discriminant(d).map_err(|e| e.to_string())?),
    };
    Ok((entry.n, chi, value))
}

/// Write every cached value, sorted, via a temporary file and rename.
pub fn store(dir: &Path, cache: &BernoulliCache) -> io::Result<usize> {
    let entries: Vec<Entry> = cache
        .entries()
        .into_iter()
        .map(|(n, disc, value)| Entry {
            n,
            disc,
            num: value.numer().to_string(),
            den: value.denom().to_string(),
        })
        .collect();
    let count = entries.len();
    let file = serde_json::json!({ "version": VERSION, "entries": entries });
    let path = cache_path(dir);
    let tmp = dir.join(format!("{FILE_NAME}.tmp"));
    fs::write(&tmp, serde_json::to_vec(&file)?)?;
    fs::rename(tmp, path)?;
    Ok(count)
}

fn mul(a: u64, b: u64) -> u64 {
    ((a as u128 * b as u128) % Q as u128) as u64
}

fn pow(mut base: u64, mut exp: u64) -> u64 {
    let mut acc = 1;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul(acc, base);
        }
        base = mul(base, base);
        exp >>= 1;
    }
    acc
}

fn inv(a: u64) -> u64 {
    pow(a, Q - 2)
}

fn reduce(x: &BigInt) -> u64 {
    let r = x % BigInt::from(Q);
    let r = if r.is_negative() { r + BigInt::from(Q) } else { r };
    r.try_into().expect("residue fits")
}

fn residue(x: &BigRational) -> Option<u64> {
    let den = reduce(x.denom());
    (den != 0).then(|| mul(reduce(x.numer()), inv(den)))
}

fn from_i64(x: i64) -> u64 {
    x.rem_euclid(Q as i64) as u64
}

/// `B_0..B_{n_max-1}` mod Q by the defining recurrence.
fn plain_mod_q(n_max: usize) -> Vec<u64> {
    let mut b = vec![0u64; n_max];
    let mut row = vec![1u64];
    for m in 0..n_max {
        // row holds C(m+1, j) mod Q
        let mut next = vec![1u64; m + 2];
        for j in 1..=m {
            next[j] = (row[j - 1] + row[j]) % Q;
        }
        row = next;
        if m == 0 {
            b[0] = 1;
            continue;
        }
        let mut s = 0u64;
        for j in 0..m {
            s = (s + mul(row[j], b[j])) % Q;
        }
        b[m] = mul(Q - s, inv((m + 1) as u64 % Q));
    }
    b
}

/// `B_{n,χ} = f^(n-1) Σ_{a=1}^{f} χ(a) B_n(a/f)` mod Q.
fn generalized_mod_q(n: u32, chi: &QuadChar, plain: &[u64]) -> u64 {
    if n == 0 {
        return if chi.is_principal() { 1 } else { 0 };
    }
    let n = n as usize;
    let f = chi.conductor();
    let mut binom = vec![1u64; n + 1];
    for j in 1..=n {
        binom[j] = mul(mul(binom[j - 1], (n + 1 - j) as u64), inv(j as u64));
    }
    let f_inv = inv(f % Q);
    let mut total = 0u64;
    for a in 1..=f {
        let c = chi.eval(a as i64);
        if c == 0 {
            continue;
        }
        let x = mul(a % Q, f_inv);
        // B_n(x) = Σ_j C(n,j) B_j x^(n-j), by Horner in x
        let mut poly = 0u64;
        for j in 0..=n {
            poly = (mul(poly, x) + mul(binom[j], plain[j])) % Q;
        }
        total = (total + mul(from_i64(c as i64), poly)) % Q;
    }
    mul(total, pow(f % Q, (n - 1) as u64))
}

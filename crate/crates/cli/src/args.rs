//! Command-line grammar and the `key=value` config file.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, CommandFactory, Parser, Subcommand, ValueEnum};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Parser)]
#[command(name = "supercong", version, about = "Exact checks of AAC-type supercongruences and Wilson-quotient congruences")]
pub struct Cli {
    /// `key=value` file mirroring the long flags; flags given on the
    /// command line win.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args, Clone)]
pub struct Common {
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
    /// Directory holding `bernoulli-cache-v1.json`.
    #[arg(long, value_name = "DIR")]
    pub cache_dir: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long)]
    pub jobs: Option<usize>,
    /// Write the run manifest here instead of stderr.
    #[arg(long, value_name = "FILE")]
    pub manifest: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check one instance of a statement.
    Verify(VerifyArgs),
    /// Check every instance of one or more statements over a grid.
    Scan(ScanArgs),
    /// Recompute the fields of Table 1.
    Table1(Table1Args),
    /// Print B_n, or B_{n,χ} for the character of discriminant `--disc`.
    Bernoulli(BernoulliArgs),
    /// Print the coefficients a_-1, a_0, a_1 of L_p(s, χ).
    Lfun(LfunArgs),
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// aac, thm1, cor-exact-div, super-aacm, chain, lehmer2, lehmer-diff,
    /// thm3 or super-wilson.
    pub statement: String,
    #[arg(long)]
    pub d: Option<u64>,
    #[arg(long)]
    pub p: Option<u64>,
    #[arg(long)]
    pub k: Option<u64>,
    /// Accept p = 5 for statements whose verdict there is advisory.
    #[arg(long)]
    pub include_p5: bool,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct ScanArgs {
    #[arg(required = true)]
    pub statements: Vec<String>,
    #[arg(long, default_value_t = 6)]
    pub d_min: u64,
    #[arg(long, default_value_t = 2000)]
    pub d_max: u64,
    #[arg(long, default_value_t = 7)]
    pub p_min: u64,
    #[arg(long, default_value_t = 200)]
    pub p_max: u64,
    #[arg(long, default_value_t = 5)]
    pub k_max: u64,
    /// Flag fields with v_p(u) >= kappa.
    #[arg(long, default_value_t = 2)]
    pub kappa: u32,
    #[arg(long)]
    pub include_p5: bool,
    #[arg(long)]
    pub long_running: bool,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct Table1Args {
    /// Include the two large rows.
    #[arg(long)]
    pub long_running: bool,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct BernoulliArgs {
    #[arg(long)]
    pub n: u32,
    /// Print every index from `--n` up to this one.
    #[arg(long)]
    pub n_max: Option<u32>,
    /// Fundamental discriminant of the character.
    #[arg(long, allow_hyphen_values = true)]
    pub disc: Option<i64>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct LfunArgs {
    #[arg(long)]
    pub p: u64,
    /// Squarefree `d` divisible by `p`; omit for the Riemann zeta function.
    #[arg(long)]
    pub d: Option<u64>,
    #[command(flatten)]
    pub common: Common,
}

impl Command {
    pub fn common(&self) -> &Common {
        match self {
            Command::Verify(a) => &a.common,
            Command::Scan(a) => &a.common,
            Command::Table1(a) => &a.common,
            Command::Bernoulli(a) => &a.common,
            Command::Lfun(a) => &a.common,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Command::Verify(_) => "verify",
            Command::Scan(_) => "scan",
            Command::Table1(_) => "table1",
            Command::Bernoulli(_) => "bernoulli",
            Command::Lfun(_) => "lfun",
        }
    }
}

/// Parse a config file: one `key = value` per line, `#` comments, blank
/// lines ignored. Boolean flags take `true` or `false`.
pub fn parse_config(text: &str) -> Result<Vec<(String, String)>, String> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| format!("config line {}: expected key=value", i + 1))?;
        let key = key.trim().trim_start_matches("--").replace('_', "-");
        if key.is_empty() {
            return Err(format!("config line {}: empty key", i + 1));
        }
        out.push((key, value.trim().to_string()));
    }
    Ok(out)
}

fn config_path(argv: &[OsString]) -> Option<PathBuf> {
    let mut iter = argv.iter().filter_map(|a| a.to_str());
    while let Some(arg) = iter.next() {
        if arg == "--config" {
            return iter.next().map(PathBuf::from);
        }
        if let Some(path) = arg.strip_prefix("--config=") {
            return Some(PathBuf::from(path));
        }
    }
    None
}

fn given_on_command_line(argv: &[OsString], key: &str) -> bool {
    let flag = format!("--{key}");
    let prefixed = format!("--{key}=");
    argv.iter()
        .filter_map(|a| a.to_str())
        .any(|a| a == flag || a.starts_with(&prefixed))
}

/// Append config-file settings that the command line does not already set.
/// Keys the chosen subcommand does not accept are skipped, so one file can
/// serve several commands.
pub fn merge_config(argv: Vec<OsString>) -> Result<Vec<OsString>, String> {
    let Some(path) = config_path(&argv) else {
        return Ok(argv);
    };
    let entries = read_config(&path)?;
    let command = Cli::command();
    let sub = argv
        .iter()
        .skip(1)
        .filter_map(|a| a.to_str())
        .find_map(|a| command.find_subcommand(a));
    let Some(sub) = sub else {
        return Ok(argv);
    };
    let mut merged = argv.clone();
    for (key, value) in entries {
        if key == "config" || given_on_command_line(&argv, &key) {
            continue;
        }
        let Some(arg) = sub.get_arguments().find(|a| a.get_long() == Some(key.as_str())) else {
            log::debug!("config key '{key}' does not apply to '{}'", sub.get_name());
            continue;
        };
        if arg.get_action().takes_values() {
            merged.push(format!("--{key}").into());
            merged.push(value.into());
        } else {
            match value.as_str() {
                "true" => merged.push(format!("--{key}").into()),
                "false" => {}
                other => return Err(format!("config key '{key}' expects true or false, got '{other}'")),
            }
        }
    }
    Ok(merged)
}

fn read_config(path: &Path) -> Result<Vec<(String, String)>, String> {
    let text = fs::read_to_string(path).map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
    parse_config(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn os(args: &[&str]) -> Vec<OsString> {
        args.iter().map(OsString::from).collect()
    }

    #[test]
    fn config_lines() {
        let parsed = parse_config("# comment\n d_max = 50\n\n--p-max=11 # trailing\ninclude-p5=true\n").unwrap();
        assert_eq!(
            parsed,
            vec![
                ("d-max".to_string(), "50".to_string()),
                ("p-max".to_string(), "11".to_string()),
                ("include-p5".to_string(), "true".to_string()),
            ]
        );
        assert!(parse_config("just words").is_err());
        assert!(parse_config("=3").is_err());
    }

    #[test]
    fn command_line_flags_win() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.conf");
        fs::write(&path, "d-max = 50\np-max = 11\ninclude-p5 = true\nn = 4\n").unwrap();
        let argv = os(&["supercong", "scan", "thm1", "--p-max", "13", "--config", path.to_str().unwrap()]);
        let merged = merge_config(argv).unwrap();
        let cli = Cli::try_parse_from(merged).unwrap();
        let Command::Scan(scan) = cli.command else { panic!("expected scan") };
        assert_eq!((scan.d_max, scan.p_max), (50, 13));
        assert!(scan.include_p5);
    }

    #[test]
    fn false_booleans_are_dropped() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.conf");
        fs::write(&path, "long-running = false\n").unwrap();
        let argv = os(&["supercong", "table1", "--config", path.to_str().unwrap()]);
        let cli = Cli::try_parse_from(merge_config(argv).unwrap()).unwrap();
        let Command::Table1(t) = cli.command else { panic!("expected table1") };
        assert!(!t.long_running);
        fs::write(&path, "long-running = maybe\n").unwrap();
        assert!(merge_config(os(&["supercong", "table1", "--config", path.to_str().unwrap()])).is_err());
    }

    #[test]
    fn missing_config_is_an_error() {
        assert!(merge_config(os(&["supercong", "table1", "--config", "/nonexistent/x.conf"])).is_err());
    }
}

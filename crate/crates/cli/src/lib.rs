//! Command-line front end for `supercong`.

pub mod args;
pub mod cache_io;
pub mod commands;
pub mod output;

use std::ffi::OsString;
use std::fs;
use std::io::{self, Write};
use std::time::Instant;

use clap::error::ErrorKind;
use clap::Parser;

use supercong::BernoulliCache;

use args::{Cli, Command};
use commands::{CommandOutput, Rows, UsageError};
use output::{RunManifest, EXIT_USAGE};

/// Run the tool on `argv` (program name first), writing reports to `out`.
/// Returns the process exit code.
pub fn run(argv: Vec<OsString>, out: &mut dyn Write) -> u8 {
    let argv = match args::merge_config(argv) {
        Ok(argv) => argv,
        Err(msg) => {
            eprintln!("error: {msg}");
            return EXIT_USAGE;
        }
    };
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => EXIT_USAGE,
            };
        }
    };
    match execute(&cli.command, out) {
        Ok(code) => code,
        Err(UsageError(msg)) => {
            eprintln!("error: {msg}");
            EXIT_USAGE
        }
    }
}

fn execute(command: &Command, out: &mut dyn Write) -> Result<u8, UsageError> {
    let started = Instant::now();
    let common = command.common();
    let cache = BernoulliCache::new();
    if let Some(dir) = &common.cache_dir {
        cache_io::prepare_dir(dir).map_err(|e| UsageError(format!("cache dir {} is not writable: {e}", dir.display())))?;
        let stats = cache_io::load(dir, &cache);
        log::info!("cache: {} entries loaded, {} rejected", stats.accepted, stats.rejected);
    }

    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(jobs) = common.jobs {
        if jobs == 0 {
            return Err(UsageError("--jobs must be positive".into()));
        }
        pool = pool.num_threads(jobs);
    }
    let pool = pool.build().map_err(|e| UsageError(format!("cannot start workers: {e}")))?;

    let result: CommandOutput = pool.install(|| match command {
        Command::Verify(a) => commands::verify(&cache, a),
        Command::Scan(a) => commands::scan(&cache, a),
        Command::Table1(a) => commands::table1(a),
        Command::Bernoulli(a) => commands::bernoulli(&cache, a),
        Command::Lfun(a) => commands::lfun(&cache, a),
    })?;

    let written = match &result.rows {
        Rows::Reports(reports) => output::write_reports(out, common.format, reports),
        Rows::Table { columns, rows } => output::write_rows(out, common.format, columns, rows),
    };
    written
        .and_then(|_| out.flush())
        .map_err(|e| UsageError(format!("cannot write output: {e}")))?;

    if let Some(dir) = &common.cache_dir {
        match cache_io::store(dir, &cache) {
            Ok(n) => log::info!("cache: {n} entries stored"),
            Err(e) => log::warn!("could not store cache: {e}"),
        }
    }

    let mut manifest = RunManifest::new(command.name(), result.config, &result.verdicts);
    manifest.attention = result.attention;
    manifest.wall_time_ms = started.elapsed().as_millis();
    write_manifest(&manifest, common.manifest.as_deref())?;
    Ok(manifest.exit_code)
}

fn write_manifest(manifest: &RunManifest, path: Option<&std::path::Path>) -> Result<(), UsageError> {
    let text = manifest.to_json();
    match path {
        Some(path) => fs::write(path, format!("{text}\n"))
            .map_err(|e| UsageError(format!("cannot write manifest {}: {e}", path.display()))),
        None => {
            let _ = writeln!(io::stderr(), "{text}");
            Ok(())
        }
    }
}

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use shbsim::config::{ConfigError, Mode, RunConfig};
use shbsim::harness::{resolve_out_dir, run, OUT_DIR_ENV};

/// Simulate salary-history disclosure with and without enquiry bans.
#[derive(Debug, Parser)]
#[command(name = "shbsim", version, after_help = format!(
    "Exit codes: 0 success, 1 runtime error, 2 configuration error, 3 a proposition check failed.\n\
     The output directory defaults to ${OUT_DIR_ENV}, then ./shbsim-out."
))]
struct Cli {
    /// TOML run configuration, or a manifest.json from an earlier run.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,

    /// two-type, check-props, sweep-fl, sweep-skew, sweep-corr or continuous-run; overrides the config.
    #[arg(long, value_parser = parse_mode)]
    mode: Option<Mode>,

    /// Master seed; overrides the config.
    #[arg(long)]
    seed: Option<u64>,

    /// Output directory.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,

    /// Worker threads (default: all cores).
    #[arg(long, value_name = "N")]
    threads: Option<usize>,

    /// Reuse finished sweep cells from an interrupted run in the same directory.
    #[arg(long)]
    resume: bool,
}

fn parse_mode(s: &str) -> Result<Mode, String> {
    Mode::from_name(s).ok_or_else(|| {
        let names: Vec<_> = Mode::ALL.iter().map(|m| m.name()).collect();
        format!("unknown mode `{s}`; expected one of {}", names.join(", "))
    })
}

fn load(cli: &Cli) -> Result<RunConfig, ConfigError> {
    let mut cfg = match (&cli.config, cli.mode) {
        (Some(path), _) => RunConfig::load(path)?,
        (None, Some(mode)) => RunConfig::new(mode),
        (None, None) => {
            return Err(ConfigError {
                source: "command line".into(),
                line: None,
                column: None,
                message: "either --config or --mode is required".into(),
            })
        }
    };
    if let Some(m) = cli.mode {
        cfg.mode = m;
    }
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if cli.threads.is_some() {
        cfg.threads = cli.threads;
    }
    if cli.out.is_some() {
        cfg.out = cli.out.clone();
    }
    let source = cli.config.as_ref().map_or("command line".to_string(), |p| p.display().to_string());
    cfg.validate().map_err(|(section, message)| ConfigError {
        source,
        line: None,
        column: None,
        message: format!("[{section}] {message}"),
    })?;
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = match load(&cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let out = resolve_out_dir(cfg.out.as_deref());
    match run(&cfg, &out, cli.resume) {
        Ok(summary) => {
            println!("{} -> {} ({} files)", cfg.mode.name(), summary.out_dir.display(), summary.files.len());
            if summary.checks_passed == Some(false) {
                eprintln!("one or more proposition checks failed; see propositions.json");
            }
            ExitCode::from(summary.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use univoque::builtin::{builtin_config, render_checks, verify_builtin};
use univoque::config::{parse_config, AnalysisConfig};
use univoque::gamma;
use univoque::report::{self, emit_report, Format, RunOptions, Status};
use univoque::{Error, Result};

/// Dimension of univoque sets of rational self-similar systems.
#[derive(Parser)]
#[command(name = "univoque", version)]
struct Cli {
    /// Worker threads for level expansion (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Full analysis of a configuration file (or `builtin:NAME`).
    Analyze {
        /// JSON configuration file, or `builtin:NAME`.
        config: String,
        /// Enumeration depth (overrides the configuration).
        #[arg(long)]
        depth: Option<usize>,
        /// json, markdown or csv-counts.
        #[arg(long, default_value = "json")]
        format: String,
        /// Level cache file; resumes enumeration when compatible.
        #[arg(long)]
        cache: Option<PathBuf>,
        /// Keep equal-map twins in the frontier.
        #[arg(long)]
        no_prune: bool,
        /// Include wall-clock timings (makes output nondeterministic).
        #[arg(long)]
        timings: bool,
    },
    /// Check a built-in example against its known values: ex1, ex2, ex4 or cantor.
    VerifyPaper { name: String },
    /// List exact overlaps up to a depth.
    Overlaps {
        config: String,
        #[arg(long, default_value_t = 6)]
        depth: usize,
    },
    /// List the isolated words of each level.
    Gamma {
        config: String,
        #[arg(long, default_value_t = 6)]
        depth: usize,
    },
}

fn load_config(arg: &str) -> Result<AnalysisConfig> {
    if let Some(name) = arg.strip_prefix("builtin:") {
        return builtin_config(name);
    }
    let text = std::fs::read_to_string(Path::new(arg)).map_err(|e| Error::Config(vec![format!("{arg}: {e}")]))?;
    parse_config(&text)
}

fn run(cli: Cli) -> Result<i32> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build_global()
            .map_err(|e| Error::Config(vec![format!("threads: {e}")]))?;
    }
    match cli.command {
        Command::Analyze { config, depth, format, cache, no_prune, timings } => {
            let format: Format = format.parse()?;
            let mut cfg = load_config(&config)?;
            if let Some(d) = depth {
                cfg.depth = d;
            }
            if no_prune {
                cfg.prune_twins = false;
            }
            let a = report::run_analysis_with(&cfg, &RunOptions { cache: cache.as_deref(), timings })?;
            for w in &a.report.warnings {
                eprintln!("warning: {w}");
            }
            print!("{}", emit_report(&a.report, format));
            if a.report.status == Status::Partial {
                eprintln!("warning: partial result");
            }
            Ok(0)
        }
        Command::VerifyPaper { name } => {
            let checks = verify_builtin(&name)?;
            print!("{}", render_checks(&name, &checks));
            Ok(if checks.iter().all(|c| c.pass) { 0 } else { 1 })
        }
        Command::Overlaps { config, depth } => {
            let cfg = load_config(&config)?;
            let search = gamma::detect_overlaps(&cfg.ifs()?, depth, report::OVERLAP_WORD_BUDGET);
            for p in &search.pairs {
                println!("{p}");
            }
            if search.searched_depth < depth {
                eprintln!("warning: search stopped at depth {} (word budget)", search.searched_depth);
            }
            Ok(0)
        }
        Command::Gamma { config, depth } => {
            let cfg = load_config(&config)?;
            let (m, _) = report::resolve_box(&cfg)?;
            let trunc = gamma::enumerate(&cfg.ifs()?, &m, depth, &cfg.enumeration_options())?;
            print!("{}", report::gamma_listing(&trunc));
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

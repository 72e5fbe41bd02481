//! The `tag` command-line tool.

pub mod api;
pub mod commands;
pub mod output;
pub mod play;
pub mod serve;

use std::ffi::OsString;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::time::Duration;

use clap::{Parser, Subcommand, ValueEnum};
use tag_core::cache::{CutoffCache, CACHE_FILE};
use tag_core::{Horizon, Natural, Rational};
use thiserror::Error;

use crate::commands::VerifyOptions;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("verification failed: {0}")]
    Verification(String),
    #[error(transparent)]
    Io(#[from] io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Verification(_) => 2,
            _ => 1,
        }
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io(io::Error::other(e))
    }
}

#[derive(Debug, Parser)]
#[command(name = "tag", version, about = "Losing positions, strategy and cutoffs for the alpha take-away game")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum Format {
    Json,
    Text,
    Csv,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Terms of the losing-position sequence.
    Seq {
        /// Ratio as p/q, an integer or a decimal such as 3.5.
        #[arg(long)]
        alpha: Rational,
        /// Number of terms, counting the leading 0.
        #[arg(long, conflicts_with = "max_value")]
        count: Option<usize>,
        /// Every term up to this value.
        #[arg(long)]
        max_value: Option<Natural>,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
    /// Windows of the first terms, or of the given indices.
    Window {
        #[arg(long)]
        alpha: Rational,
        /// Term index; may be repeated.
        #[arg(long = "index")]
        indices: Vec<usize>,
        /// Windows of P_1 ..= P_count when no index is given.
        #[arg(long, default_value_t = 10)]
        count: usize,
    },
    /// Generalized Zeckendorf decomposition.
    Zeck {
        #[arg(long)]
        alpha: Rational,
        n: Natural,
    },
    /// N/P class and best move of a position.
    Classify {
        #[arg(long)]
        alpha: Rational,
        #[arg(long)]
        pile: Natural,
        /// Defaults to the opening cap, pile - 1.
        #[arg(long)]
        cap: Option<Natural>,
    },
    /// S_1 ..= S_count.
    SSeq {
        #[arg(long)]
        alpha: Rational,
        #[arg(long, default_value_t = 20)]
        count: usize,
    },
    /// Cutoffs in [from, to].
    Cutoffs {
        #[arg(long, default_value = "1")]
        from: Rational,
        #[arg(long)]
        to: Rational,
        /// Write the document here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Reuse intervals stored in the cache.
        #[arg(long)]
        resume: bool,
        #[arg(long, env = "TAG_CACHE_DIR")]
        cache_dir: Option<PathBuf>,
    },
    /// gamma(n), the number of cutoffs up to n, as CSV rows n,gamma,gamma/n^2.
    Gamma {
        #[arg(long)]
        upto: Rational,
        #[arg(long, default_value = "5/2")]
        start: Rational,
        #[arg(long, default_value = "1/2")]
        step: Rational,
        /// Write here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
        #[arg(long)]
        resume: bool,
        #[arg(long, env = "TAG_CACHE_DIR")]
        cache_dir: Option<PathBuf>,
    },
    /// Stable interval, recurrence, degree bounds, dominant root and oscillation.
    Diag {
        #[arg(long)]
        alpha: Rational,
        /// Ratios examined past the start of the recurrence.
        #[arg(long, default_value_t = 200)]
        count: usize,
    },
    /// Play against the engine in the terminal.
    Play {
        #[arg(long)]
        alpha: Rational,
        #[arg(long)]
        pile: Natural,
    },
    /// Local JSON API for the browser interface.
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
        #[arg(long, default_value_t = 30)]
        idle_minutes: u64,
    },
    /// Integer, fractional and half-integer cutoff checks.
    Verify {
        #[arg(long, default_value_t = 10)]
        integers: u64,
        #[arg(long, default_value_t = 2)]
        fractional_n: u64,
        #[arg(long, default_value_t = 2)]
        multiples: u64,
        #[arg(long, default_value = "31/2")]
        half_limit: Rational,
    },
}

fn cache_dir(explicit: Option<PathBuf>) -> PathBuf {
    explicit
        .or_else(|| std::env::var_os("XDG_CACHE_HOME").map(|d| PathBuf::from(d).join("tag")))
        .or_else(|| std::env::var_os("HOME").map(|d| PathBuf::from(d).join(".cache").join("tag")))
        .unwrap_or_else(|| PathBuf::from(".tag-cache"))
}

fn load_cache(dir: &Path) -> Result<CutoffCache, CliError> {
    CutoffCache::load(&dir.join(CACHE_FILE))
        .map_err(|e| CliError::Usage(format!("cannot read cache in {}: {e}", dir.display())))
}

fn store_cache(dir: &Path, intervals: Vec<tag_core::StableInterval>) -> Result<(), CliError> {
    fs::create_dir_all(dir)?;
    let mut cache = load_cache(dir)?;
    cache.extend(intervals);
    cache.save(&dir.join(CACHE_FILE))?;
    Ok(())
}

fn emit(text: &str, out: Option<&Path>, stdout: &mut dyn Write) -> Result<(), CliError> {
    match out {
        Some(path) => fs::write(path, text)?,
        None => stdout.write_all(text.as_bytes())?,
    }
    Ok(())
}

/// Runs one invocation and returns the exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 {
                stdout.write_all(text.as_bytes())
            } else {
                stderr.write_all(text.as_bytes())
            };
            return code;
        }
    };
    match execute(cli.command, stdout, stderr) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}

fn execute(command: Command, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<i32, CliError> {
    match command {
        Command::Seq {
            alpha,
            count,
            max_value,
            format,
        } => {
            let horizon = match max_value {
                Some(v) => Horizon::MaxValue(v),
                None => Horizon::Terms(count.unwrap_or(20)),
            };
            let doc = commands::sequence(&alpha, horizon)?;
            let text = match format {
                Format::Json => doc.to_json(),
                Format::Text => commands::sequence_text(&doc),
                Format::Csv => commands::sequence_csv(&doc)?,
            };
            emit(&text, None, stdout)?;
        }
        Command::Window {
            alpha,
            indices,
            count,
        } => {
            let indices = if indices.is_empty() {
                (1..=count).collect()
            } else {
                indices
            };
            emit(&commands::windows(&alpha, &indices)?.to_json(), None, stdout)?;
        }
        Command::Zeck { alpha, n } => {
            emit(&commands::zeckendorf(&alpha, &n)?.to_json(), None, stdout)?;
        }
        Command::Classify { alpha, pile, cap } => {
            emit(
                &commands::classify(&alpha, &pile, cap.as_ref())?.to_json(),
                None,
                stdout,
            )?;
        }
        Command::SSeq { alpha, count } => {
            emit(&commands::s_sequence(&alpha, count)?.to_json(), None, stdout)?;
        }
        Command::Cutoffs {
            from,
            to,
            out,
            resume,
            cache_dir: dir,
        } => {
            let dir = cache_dir(dir);
            let cache = if resume { Some(load_cache(&dir)?) } else { None };
            let (doc, intervals) = commands::cutoffs(&from, &to, cache.as_ref())?;
            store_cache(&dir, intervals)?;
            emit(&doc.to_json(), out.as_deref(), stdout)?;
        }
        Command::Gamma {
            upto,
            start,
            step,
            out,
            format,
            resume,
            cache_dir: dir,
        } => {
            let dir = cache_dir(dir);
            let cache = if resume { Some(load_cache(&dir)?) } else { None };
            let (rows, intervals) = commands::gamma(&start, &step, &upto, cache.as_ref())?;
            store_cache(&dir, intervals)?;
            let text = match format {
                Format::Json => commands::gamma_document(&rows, &upto).to_json(),
                Format::Csv | Format::Text => commands::gamma_csv(&rows)?,
            };
            emit(&text, out.as_deref(), stdout)?;
        }
        Command::Diag { alpha, count } => {
            emit(&commands::diagnostics(&alpha, count)?.to_json(), None, stdout)?;
        }
        Command::Play { alpha, pile } => {
            let stdin = io::stdin();
            play::play(&alpha, &pile, stdin.lock(), stdout)?;
        }
        Command::Serve {
            port,
            host,
            idle_minutes,
        } => {
            let api = api::Api::new(Duration::from_secs(idle_minutes * 60));
            let service = serve::Service::bind(&format!("{host}:{port}"), api)?;
            let port = service.local_port().unwrap_or(port);
            writeln!(stderr, "listening on http://{host}:{port}")?;
            service.run();
        }
        Command::Verify {
            integers,
            fractional_n,
            multiples,
            half_limit,
        } => {
            let opts = VerifyOptions {
                integers,
                fractional_n,
                multiples,
                half_limit,
            };
            let (doc, passed) = commands::verify(&opts)?;
            emit(&doc.to_json(), None, stdout)?;
            writeln!(stderr, "{}", commands::verify_summary(&doc))?;
            if !passed {
                return Ok(2);
            }
        }
    }
    Ok(0)
}

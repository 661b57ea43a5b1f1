use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::commands::{cmd_eval, cmd_fit, cmd_validate};
use crate::config::{Context, OutputFormat};
use crate::error::{exit, CliError, CliResult};
use crate::format::UpAxis;
use crate::synth::{synth, SynthKind, SynthParams};

/// Environment variable capping the worker thread count.
pub const THREADS_ENV: &str = "PHYSIMETRICS_THREADS";

#[derive(Debug, Parser)]
#[command(name = "physimetrics", version, about = "Physical plausibility metrics for human motion clips")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Run configuration (JSON).
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Up axis of the inputs, overriding the file header.
    #[arg(long, value_enum)]
    pub up_axis: Option<UpAxis>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Score clips and print per-clip and aggregate reports.
    Eval {
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        /// Reference clips for FID*.
        #[arg(long = "ref", num_args = 1..)]
        refs: Vec<PathBuf>,
        #[command(flatten)]
        common: Common,
        /// Report file; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum)]
        format: Option<OutputFormat>,
    },
    /// Fit joint rotations to a positions file and write the representation.
    Fit {
        input: PathBuf,
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        out: PathBuf,
    },
    /// Check a representation file for internal consistency.
    Validate {
        input: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Write a synthetic test clip.
    Synth {
        #[arg(value_enum)]
        kind: SynthKind,
        #[command(flatten)]
        params: SynthParams,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
}

fn thread_pool() -> CliResult<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(v) = std::env::var_os(THREADS_ENV) {
        let n = v
            .to_str()
            .and_then(|s| s.trim().parse::<usize>().ok())
            .filter(|n| *n > 0)
            .ok_or_else(|| CliError::Usage(format!("{THREADS_ENV} must be a positive integer, got {v:?}")))?;
        builder = builder.num_threads(n);
    }
    builder
        .build()
        .map_err(|e| CliError::Usage(format!("cannot start thread pool: {e}")))
}

/// Exit code and text destined for stdout.
type Outcome = (i32, String);

fn execute(command: Command) -> CliResult<Outcome> {
    match command {
        Command::Eval {
            inputs,
            refs,
            common,
            out,
            format,
        } => {
            let ctx = Context::load(common.config.as_deref())?;
            let report = cmd_eval(&ctx, &inputs, &refs, common.up_axis)?;
            let text = report.render(format.unwrap_or(ctx.cfg.format));
            match out {
                Some(p) => {
                    std::fs::write(&p, text)
                        .map_err(|e| CliError::Usage(format!("cannot write {}: {e}", p.display())))?;
                    Ok((exit::OK, String::new()))
                }
                None => Ok((exit::OK, text)),
            }
        }
        Command::Fit { input, common, out } => {
            let ctx = Context::load(common.config.as_deref())?;
            let fit = cmd_fit(&ctx, &input, &out, common.up_axis)?;
            Ok((exit::OK, fit.render()))
        }
        Command::Validate { input, common } => {
            let ctx = Context::load(common.config.as_deref())?;
            let v = cmd_validate(&ctx, &input, common.up_axis)?;
            let code = if v.violation_count() == 0 { exit::OK } else { exit::VIOLATIONS };
            Ok((code, v.render()))
        }
        Command::Synth {
            kind,
            params,
            config,
            out,
        } => {
            let ctx = Context::load(config.as_deref())?;
            synth(&ctx, kind, &params)?.write(&out)?;
            Ok((exit::OK, String::new()))
        }
    }
}

/// Parses `args`, runs the command and returns the process exit code.
/// Diagnostics go to `stderr` as one line each.
pub fn run<I, A>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = A>,
    A: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(stdout, "{e}");
                return exit::OK;
            }
            let first = e.to_string();
            let first = first.lines().next().unwrap_or("invalid arguments");
            let msg = first.strip_prefix("error: ").unwrap_or(first);
            let _ = writeln!(stderr, "{}", CliError::Usage(msg.to_string()));
            return exit::PARSE;
        }
    };
    let result = thread_pool().and_then(|pool| pool.install(|| execute(cli.command)));
    match result {
        Ok((code, text)) => match stdout.write_all(text.as_bytes()).and_then(|_| stdout.flush()) {
            Ok(()) => code,
            Err(e) => {
                let _ = writeln!(stderr, "{}", CliError::Usage(format!("cannot write to stdout: {e}")));
                exit::PARSE
            }
        },
        Err(e) => {
            let _ = writeln!(stderr, "{e}");
            e.exit_code()
        }
    }
}

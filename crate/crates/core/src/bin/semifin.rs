use std::io::Read;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use semifin::job::{run, Command, JobError, LimitOverrides, RunOptions, EXIT_INPUT};

#[derive(Parser)]
#[command(name = "semifin", version, about = "Decide finiteness of finitely generated matrix semigroups")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
    #[command(flatten)]
    flags: Flags,
}

#[derive(Args)]
struct Flags {
    /// Stop closures after this many elements.
    #[arg(long, global = true, env = "SEMIFIN_MAX_ELEMENTS")]
    max_elements: Option<usize>,
    /// Stop closures after this many multiplications.
    #[arg(long, global = true, env = "SEMIFIN_MAX_STEPS")]
    max_steps: Option<u64>,
    /// Give up on a power sequence after this many powers.
    #[arg(long, global = true, env = "SEMIFIN_CAP_POWERS")]
    cap_powers: Option<u64>,
    /// Directory of cached reports.
    #[arg(long, global = true, env = "SEMIFIN_CACHE")]
    cache: Option<PathBuf>,
    /// Also write the certificate of a `check` run to this file.
    #[arg(long, global = true, env = "SEMIFIN_EMIT_CERTIFICATE")]
    emit_certificate: Option<PathBuf>,
    /// Print nothing on stdout; the exit code carries the result.
    #[arg(long, short, global = true, env = "SEMIFIN_QUIET")]
    quiet: bool,
}

#[derive(Subcommand)]
enum Cmd {
    /// Decide finiteness and emit a certificate.
    Check { input: String },
    /// Enumerate the generated monoid.
    Closure { input: String },
    /// Block-triangularize the generators.
    Triangularize { input: String },
    /// Enumerate the kernel category of the projection to the block diagonal.
    Kernelcat { input: String },
    /// Images of path hom-sets of a labeled graph.
    Kleene { input: String },
    /// Re-check a certificate or a `check` report.
    Verify { input: String },
}

impl Cmd {
    fn split(&self) -> (Command, &str) {
        match self {
            Cmd::Check { input } => (Command::Check, input),
            Cmd::Closure { input } => (Command::Closure, input),
            Cmd::Triangularize { input } => (Command::Triangularize, input),
            Cmd::Kernelcat { input } => (Command::Kernelcat, input),
            Cmd::Kleene { input } => (Command::Kleene, input),
            Cmd::Verify { input } => (Command::Verify, input),
        }
    }
}

fn read_input(path: &str) -> std::io::Result<String> {
    if path == "-" {
        let mut s = String::new();
        std::io::stdin().read_to_string(&mut s)?;
        Ok(s)
    } else {
        std::fs::read_to_string(path)
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_INPUT as u8 } else { 0 });
        }
    };
    let (command, path) = cli.command.split();
    let text = match read_input(path) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("semifin: cannot read {path}: {e}");
            return ExitCode::from(EXIT_INPUT as u8);
        }
    };
    let opts = RunOptions {
        overrides: LimitOverrides {
            max_elements: cli.flags.max_elements,
            max_steps: cli.flags.max_steps,
            cap_powers: cli.flags.cap_powers,
        },
        cache: cli.flags.cache.clone(),
    };
    let outcome = match run(command, &text, &opts) {
        Ok(o) => o,
        Err(e) => {
            let origin = if path == "-" { "<stdin>" } else { path };
            match &e {
                JobError::Input(_) => eprintln!("semifin: {origin}: {e}"),
                JobError::Internal(_) => eprintln!("semifin: {e}"),
            }
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    for w in &outcome.warnings {
        eprintln!("semifin: warning: {w}");
    }
    if let (Some(dest), Some(cert)) = (&cli.flags.emit_certificate, outcome.report.payload.get("certificate")) {
        let body = serde_json::to_string_pretty(cert).expect("certificate serializes") + "\n";
        if let Err(e) = std::fs::write(dest, body) {
            eprintln!("semifin: cannot write {}: {e}", dest.display());
            return ExitCode::from(EXIT_INPUT as u8);
        }
    }
    if !cli.flags.quiet {
        print!("{}", outcome.report.to_json());
    }
    if outcome.report.cache_hit {
        eprintln!("semifin: cache hit");
    }
    ExitCode::from(outcome.exit_code() as u8)
}

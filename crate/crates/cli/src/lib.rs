//! The `ecst` command line: parse, measure, graph and snapshot source files
//! written in any supported language.
//!
//! Exit status is 0 on success, 1 when an input cannot be read, parsed or
//! analysed, and 2 on a usage error.

mod commands;
mod render;

use std::ffi::OsString;
use std::fmt;
use std::fs;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ecst_core::LanguageId;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "ecst",
    version,
    about = "Language-independent metrics, call graphs and control flow graphs"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print the enriched syntax tree of each input.
    Parse(Inputs),
    /// Cyclomatic complexity, statement and line counts.
    Metrics(Inputs),
    /// Callee-to-caller graph across all inputs.
    Callgraph {
        #[command(flatten)]
        inputs: Inputs,
        /// Emit caller-to-callee edges instead.
        #[arg(long)]
        conventional: bool,
    },
    /// Control flow graph of one function.
    Cfg {
        #[command(flatten)]
        inputs: Inputs,
        /// `name` or `unit.name`.
        #[arg(long)]
        function: String,
        /// Also list a basis path set.
        #[arg(long)]
        basis_paths: bool,
    },
    /// Store trees and metrics under a label.
    SnapshotSave {
        #[command(flatten)]
        inputs: Inputs,
        #[arg(long)]
        label: String,
        #[command(flatten)]
        store: StoreArg,
    },
    /// Compare the metrics of two stored snapshots.
    SnapshotDiff {
        before: String,
        after: String,
        #[command(flatten)]
        store: StoreArg,
        #[command(flatten)]
        output: Output,
    },
}

#[derive(Debug, Args)]
pub struct Inputs {
    #[arg(required = true, value_name = "FILE")]
    pub files: Vec<PathBuf>,
    /// Skip extension detection.
    #[arg(long, value_parser = parse_lang)]
    pub lang: Option<LanguageId>,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct Output {
    #[arg(long, value_enum, default_value_t = Format::Table)]
    pub format: Format,
    /// Write to this file instead of standard output.
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct StoreArg {
    #[arg(long, env = "ECST_STORE", value_name = "DIR")]
    pub store: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Table,
    Json,
    Csv,
    Dot,
}

fn parse_lang(s: &str) -> Result<LanguageId, String> {
    s.parse()
}

/// Terminates a command with a specific exit status.
#[derive(Debug)]
pub enum Failure {
    Usage(String),
    /// One diagnostic per line.
    Analysis(Vec<String>),
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Usage(msg) => write!(f, "{msg}"),
            Failure::Analysis(lines) => write!(f, "{}", lines.join("\n")),
        }
    }
}

impl Failure {
    pub fn analysis(msg: impl ToString) -> Self {
        Failure::Analysis(vec![msg.to_string()])
    }
}

impl Command {
    fn output(&self) -> Option<&Output> {
        match self {
            Command::Parse(i) | Command::Metrics(i) => Some(&i.output),
            Command::Callgraph { inputs, .. } | Command::Cfg { inputs, .. } => Some(&inputs.output),
            Command::SnapshotSave { inputs, .. } => Some(&inputs.output),
            Command::SnapshotDiff { output, .. } => Some(output),
        }
    }

    fn allows_dot(&self) -> bool {
        matches!(self, Command::Callgraph { .. } | Command::Cfg { .. })
    }
}

/// Runs one invocation. `argv[0]` is the program name.
pub fn run<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let rendered = e.render().to_string();
            let sink: &mut dyn Write = if e.use_stderr() { err } else { out };
            let _ = sink.write_all(rendered.as_bytes());
            return code;
        }
    };
    let output = cli.command.output();
    if output.is_some_and(|o| o.format == Format::Dot) && !cli.command.allows_dot() {
        let _ = writeln!(
            err,
            "ecst: error: --format dot is only valid for callgraph and cfg"
        );
        return EXIT_USAGE;
    }

    let result = commands::execute(&cli.command).and_then(|text| {
        match output.and_then(|o| o.out.as_ref()) {
            Some(path) => fs::write(path, &text)
                .map_err(|e| Failure::analysis(format!("{}: {e}", path.display()))),
            None => out
                .write_all(text.as_bytes())
                .map_err(|e| Failure::analysis(format!("standard output: {e}"))),
        }
    });
    match result {
        Ok(()) => EXIT_OK,
        Err(failure) => {
            let code = match failure {
                Failure::Usage(_) => EXIT_USAGE,
                Failure::Analysis(_) => EXIT_FAILURE,
            };
            for line in failure.to_string().lines() {
                let _ = writeln!(err, "ecst: error: {line}");
            }
            code
        }
    }
}

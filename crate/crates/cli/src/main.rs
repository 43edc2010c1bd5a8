use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use spanloc::commands::{
    cmd_bicat, cmd_localize, cmd_span, cmd_sset, cmd_validate, span_dot, CommandError, LocalizeOptions, SpanOptions,
    SsetOptions,
};
use spanloc::document::LoadedDocument;
use spanloc::fixtures::{fixture, FIXTURE_NAMES};
use spanloc::report::Report;
use spanloc::sset::HornKind;

/// Span categories and localization at hypercovers for finite categories.
#[derive(Parser)]
#[command(name = "spanloc", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Category document (JSON).
    #[arg(long, conflicts_with = "fixture", required_unless_present = "fixture")]
    input: Option<PathBuf>,
    /// Bundled fixture name.
    #[arg(long)]
    fixture: Option<String>,
    /// Also write the report to this file.
    #[arg(long)]
    json: Option<PathBuf>,
    /// Record wall-clock time in the report.
    #[arg(long)]
    timing: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Inner,
    Left,
    Right,
    Kan,
}

impl From<Kind> for HornKind {
    fn from(k: Kind) -> Self {
        match k {
            Kind::Inner => HornKind::Inner,
            Kind::Left => HornKind::Left,
            Kind::Right => HornKind::Right,
            Kind::Kan => HornKind::Kan,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Check the category axioms and the hypercover axioms.
    Validate {
        #[command(flatten)]
        common: Common,
    },
    /// Build span levels 0..=n and check the Segal maps.
    Span {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 2)]
        level: usize,
        /// Maximum number of level-n objects to enumerate.
        #[arg(long, default_value_t = 1_000_000)]
        budget: u64,
        /// Write a Graphviz rendering of Σₙ, the category and one diagram.
        #[arg(long)]
        emit_dot: Option<PathBuf>,
    },
    /// Compare the span localization with the zigzag oracle.
    Localize {
        #[command(flatten)]
        common: Common,
        /// Oracle word length bound (defaults to 8 for fixtures).
        #[arg(long)]
        max_word_len: Option<usize>,
        /// Oracle closure round bound (defaults to 10000 for fixtures).
        #[arg(long)]
        max_iter: Option<u64>,
    },
    /// Adjunctions for hypercovers and Beck–Chevalley squares.
    Bicat {
        #[command(flatten)]
        common: Common,
    },
    /// Horn lifting for the nerve, components and π₁ ranks.
    Sset {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 3)]
        dim: usize,
        #[arg(long, value_enum, default_value = "inner")]
        kind: Kind,
    },
}

fn load(common: &Common) -> Result<LoadedDocument, CommandError> {
    let text = match (&common.input, &common.fixture) {
        (Some(path), _) => std::fs::read_to_string(path)
            .map_err(|e| CommandError::Invalid(format!("cannot read {}: {e}", path.display())))?,
        (None, Some(name)) => fixture(name)
            .ok_or_else(|| {
                CommandError::Invalid(format!("unknown fixture {name:?}; available: {}", FIXTURE_NAMES.join(", ")))
            })?
            .to_string(),
        (None, None) => return Err(CommandError::Invalid("one of --input or --fixture is required".into())),
    };
    Ok(LoadedDocument::parse(&text)?)
}

fn run(cli: Cli) -> Result<(Report, Common), CommandError> {
    let start = Instant::now();
    let (mut report, common) = match cli.command {
        Command::Validate { common } => (cmd_validate(&load(&common)?), common),
        Command::Span {
            common,
            level,
            budget,
            emit_dot,
        } => {
            let doc = load(&common)?;
            let opts = SpanOptions { level, budget };
            let report = cmd_span(&doc, opts)?;
            if let Some(path) = emit_dot {
                std::fs::write(&path, span_dot(&doc, opts)?)
                    .map_err(|e| CommandError::Invalid(format!("cannot write {}: {e}", path.display())))?;
            }
            (report, common)
        }
        Command::Localize {
            common,
            max_word_len,
            max_iter,
        } => {
            // Arbitrary inputs may localize to infinite hom-sets, so bounds must be explicit.
            let (max_word_len, max_iter) = match (max_word_len, max_iter, common.input.is_some()) {
                (Some(l), Some(i), _) => (l, i),
                (l, i, false) => (l.unwrap_or(8), i.unwrap_or(10_000)),
                _ => {
                    return Err(CommandError::Invalid(
                        "--input runs of localize require --max-word-len and --max-iter".into(),
                    ))
                }
            };
            let opts = LocalizeOptions { max_word_len, max_iter };
            (cmd_localize(&load(&common)?, opts)?, common)
        }
        Command::Bicat { common } => (cmd_bicat(&load(&common)?)?, common),
        Command::Sset { common, dim, kind } => {
            let opts = SsetOptions { dim, kind: kind.into() };
            (cmd_sset(&load(&common)?, opts)?, common)
        }
    };
    if common.timing {
        report.timing_ms = Some(start.elapsed().as_millis() as u64);
    }
    Ok((report, common))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok((report, common)) => {
            let text = report.to_json();
            print!("{text}");
            if let Some(path) = &common.json {
                if let Err(e) = std::fs::write(path, &text) {
                    eprintln!("error: cannot write {}: {e}", path.display());
                    return ExitCode::from(2);
                }
            }
            ExitCode::from(report.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

//! `lgw`: apply local grammars to corpora, compare the resulting
//! concordances, compose the grammars worth keeping, and score the output.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use lgw_core::MatchMode;

#[derive(Debug, Parser)]
#[command(name = "lgw", version, about = "Local grammar workbench")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Apply a grammar to corpus files; write concordances and/or annotated XML.
    Apply(ApplyArgs),
    /// Compare two concordances of the same text (HTML report + JSON relation).
    Diff(DiffArgs),
    /// Infer the relation between every pair of concordances (JSON).
    Relate(RelateArgs),
    /// Choose the grammars to keep and write a main graph calling them.
    Compose(ComposeArgs),
    /// Score a system annotation against a gold annotation.
    Eval(EvalArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Mode {
    All,
    Longest,
}

impl From<Mode> for MatchMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::All => MatchMode::AllMatches,
            Mode::Longest => MatchMode::LongestOnly,
        }
    }
}

#[derive(Debug, Args)]
struct ApplyArgs {
    /// Grammar file (`.lg`); the file stem must equal the graph name.
    #[arg(long = "grammar", required = true)]
    grammars: Vec<PathBuf>,
    /// Main graph; defaults to the first grammar file's graph.
    #[arg(long)]
    main: Option<String>,
    /// Lexicon file (DELAF lines).
    #[arg(long = "lexicon")]
    lexicons: Vec<PathBuf>,
    #[arg(long, value_enum, default_value_t = Mode::Longest)]
    mode: Mode,
    #[arg(long, default_value_t = 40)]
    left: usize,
    #[arg(long, default_value_t = 60)]
    right: usize,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
    /// Write `<corpus>.cnc` concordances.
    #[arg(long)]
    cnc: bool,
    /// Write `<corpus>.xml` with `<EM>` tags around the tagged names.
    #[arg(long)]
    xml: bool,
    #[arg(long, default_value = "PESSOA")]
    categ: String,
    #[arg(long, default_value = "INDIVIDUAL")]
    tipo: String,
    /// Corpus files: plain UTF-8 text, or `.xml` with inline markup.
    #[arg(required = true)]
    corpora: Vec<PathBuf>,
}

#[derive(Debug, Args)]
struct DiffArgs {
    cnc_x: PathBuf,
    cnc_y: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Report file name inside the output directory.
    #[arg(long, default_value = "diff.html")]
    html: String,
    #[arg(long, default_value = "relation.json")]
    json: String,
    /// Add a generation timestamp to the outputs.
    #[arg(long)]
    stamp: bool,
}

#[derive(Debug, Args)]
struct RelateArgs {
    #[arg(required = true, num_args = 2..)]
    cncs: Vec<PathBuf>,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value = "relations.json")]
    json: String,
    #[arg(long)]
    stamp: bool,
}

#[derive(Debug, Args)]
struct ComposeArgs {
    /// Pairwise relation reports, as written by `relate`.
    #[arg(
        long,
        conflicts_with = "decisions",
        required_unless_present = "decisions"
    )]
    reports: Option<PathBuf>,
    /// Keep decisions, as written by a previous `compose`.
    #[arg(long)]
    decisions: Option<PathBuf>,
    /// Name of the main graph to write.
    #[arg(long, default_value = "Main")]
    main: String,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    stamp: bool,
}

#[derive(Debug, Args)]
struct EvalArgs {
    #[arg(long)]
    sys: PathBuf,
    #[arg(long)]
    gold: PathBuf,
    #[arg(long, default_value = "PESSOA")]
    categ: String,
    /// Subtype to require; omit to score CATEG(*).
    #[arg(long)]
    tipo: Option<String>,
    /// Directory for `eval.json`; the table always goes to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    stamp: bool,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Apply(a) => commands::apply(a),
        Command::Diff(a) => commands::diff(a),
        Command::Relate(a) => commands::relate(a),
        Command::Compose(a) => commands::compose(a),
        Command::Eval(a) => commands::eval(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {:#}", failure.error);
            ExitCode::from(failure.kind as u8)
        }
    }
}

mod config;
mod eval;
mod lint;
mod pattern;
mod simplify;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "prophier",
    version,
    about = "Split complex sentences into linked minimal propositions"
)]
struct Cli {
    /// Config file; `prophier.toml` in the working directory is used if present.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Transform sentences into linked proposition trees.
    Simplify(SimplifyArgs),
    /// Score structured output against gold EDU annotations.
    Eval(EvalArgs),
    /// Run a tree pattern over parse trees and show the matches.
    Pattern(PatternArgs),
    /// Check a rule file.
    Lint(LintArgs),
}

#[derive(Args)]
pub struct SimplifyArgs {
    /// Bracketed parse trees, one per line.
    #[arg(long, conflicts_with = "text")]
    pub trees: Option<PathBuf>,
    /// Plain sentences, one per line, tokens separated by spaces.
    #[arg(long)]
    pub text: Option<PathBuf>,
    /// Parser service endpoint for --text.
    #[arg(long, env = "PROPHIER_PARSER_URL")]
    pub parser: Option<String>,
    /// Pre-computed parses for --text.
    #[arg(long)]
    pub parses: Option<PathBuf>,
    #[arg(long, env = "PROPHIER_RULES")]
    pub rules: Option<PathBuf>,
    /// Output format: tree, flat or structured.
    #[arg(long)]
    pub format: Option<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Report failing sentences in the output instead of stopping.
    #[arg(long)]
    pub keep_going: bool,
    #[arg(long)]
    pub workers: Option<usize>,
}

#[derive(Args)]
pub struct EvalArgs {
    /// Structured output of `simplify`.
    #[arg(long)]
    pub system: PathBuf,
    #[arg(long)]
    pub gold: PathBuf,
    /// `relation<TAB>class` map; the bundled map is used by default.
    #[arg(long)]
    pub grouping: Option<PathBuf>,
    #[arg(long)]
    pub threshold: Option<f64>,
    /// Compare strings as they are, without case and punctuation folding.
    #[arg(long)]
    pub no_normalize: bool,
    /// Also write the report as JSON to this file (`-` for stdout).
    #[arg(long)]
    pub json: Option<PathBuf>,
}

#[derive(Args)]
pub struct PatternArgs {
    #[arg(long)]
    pub pattern: String,
    #[arg(long)]
    pub trees: PathBuf,
}

#[derive(Args)]
pub struct LintArgs {
    #[arg(long, env = "PROPHIER_RULES")]
    pub rules: Option<PathBuf>,
    /// Trees to probe the rules with; the bundled probe corpus by default.
    #[arg(long)]
    pub probe: Option<PathBuf>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let cfg = match config::Config::load(cli.config.as_deref()) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    let result = match cli.command {
        Command::Simplify(a) => simplify::run(a, &cfg),
        Command::Eval(a) => eval::run(a, &cfg),
        Command::Pattern(a) => pattern::run(a),
        Command::Lint(a) => lint::run(a, &cfg),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

//! `carnot`: validate algebras, build and verify Rumin complexes, run
//! primitive experiments on the first Heisenberg group.

mod commands;
mod error;

use clap::{Args, Parser, Subcommand, ValueEnum};
use error::CliError;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser, Debug)]
#[command(name = "carnot", version, about = "Carnot groups, Rumin complexes and divergence primitives")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Global {
    /// Directory for reports; created if missing.
    #[arg(long, global = true, default_value = ".")]
    pub out: PathBuf,
    /// Format of the report printed to stdout.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Worker threads for numeric verbs (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Overrides the seed of randomized verbs.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Json,
    Latex,
    Csv,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Stratified Lie algebras.
    #[command(subcommand)]
    Algebra(AlgebraCmd),
    /// Group law and homogeneous norms.
    #[command(subcommand)]
    Group(GroupCmd),
    /// Rumin complex of an algebra.
    #[command(subcommand)]
    Rumin(RuminCmd),
    /// Compactly supported primitives of zero-average functions.
    #[command(subcommand)]
    Primitive(PrimitiveCmd),
}

#[derive(Subcommand, Debug)]
enum AlgebraCmd {
    /// Checks grading, Jacobi identity and generation by the first layer.
    Validate { algebra: String },
}

#[derive(Subcommand, Debug)]
enum GroupCmd {
    /// Prints the polynomial group law in exponential coordinates.
    Law { algebra: String },
    /// Searches weights of the layered norm that satisfy the triangle inequality.
    CalibrateNorm {
        algebra: String,
        /// Random triples per trial weight.
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
    },
}

#[derive(Subcommand, Debug)]
enum RuminCmd {
    /// Builds E₀ and d_c; writes `complex.json`.
    Build {
        algebra: String,
        /// Restrict the output to one degree.
        #[arg(long)]
        degree: Option<usize>,
    },
    /// Checks the defining identities of the complex exactly.
    Verify { algebra: String },
}

#[derive(Subcommand, Debug)]
enum PrimitiveCmd {
    /// Runs an experiment configuration; writes `report.json` and `report.csv`.
    Run {
        config: PathBuf,
        /// Also write f and F of every sample as binary fields.
        #[arg(long)]
        fields: bool,
    },
    /// Summarizes the report stored in a run directory.
    Report { dir: PathBuf },
}

/// Written on every nonzero exit and removed on success.
pub const FAILURE_REPORT: &str = "failure.json";

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            let err = CliError::Usage(e.kind().to_string());
            return finish(&out_from_argv(&argv), "command line", Err(err));
        }
    };
    let verb = verb_name(&cli.command);
    let out = cli.global.out.clone();
    let result = dispatch(cli);
    finish(&out, verb, result)
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    if let Some(n) = cli.global.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build_global()
            .map_err(|e| CliError::Usage(format!("--threads: {e}")))?;
    }
    let g = &cli.global;
    match cli.command {
        Command::Algebra(AlgebraCmd::Validate { algebra }) => commands::algebra_validate(g, &algebra),
        Command::Group(GroupCmd::Law { algebra }) => commands::group_law(g, &algebra),
        Command::Group(GroupCmd::CalibrateNorm { algebra, samples }) => commands::calibrate_norm(g, &algebra, samples),
        Command::Rumin(RuminCmd::Build { algebra, degree }) => commands::rumin_build(g, &algebra, degree),
        Command::Rumin(RuminCmd::Verify { algebra }) => commands::rumin_verify(g, &algebra),
        Command::Primitive(PrimitiveCmd::Run { config, fields }) => commands::primitive_run(g, &config, fields),
        Command::Primitive(PrimitiveCmd::Report { dir }) => commands::primitive_report(g, &dir),
    }
}

fn verb_name(c: &Command) -> &'static str {
    match c {
        Command::Algebra(_) => "algebra validate",
        Command::Group(GroupCmd::Law { .. }) => "group law",
        Command::Group(GroupCmd::CalibrateNorm { .. }) => "group calibrate-norm",
        Command::Rumin(RuminCmd::Build { .. }) => "rumin build",
        Command::Rumin(RuminCmd::Verify { .. }) => "rumin verify",
        Command::Primitive(PrimitiveCmd::Run { .. }) => "primitive run",
        Command::Primitive(PrimitiveCmd::Report { .. }) => "primitive report",
    }
}

// clap failed, so recover --out by hand for the failure report.
fn out_from_argv(argv: &[String]) -> PathBuf {
    let mut it = argv.iter();
    while let Some(a) = it.next() {
        if a == "--out" {
            if let Some(v) = it.next() {
                return PathBuf::from(v);
            }
        } else if let Some(v) = a.strip_prefix("--out=") {
            return PathBuf::from(v);
        }
    }
    PathBuf::from(".")
}

fn finish(out: &Path, verb: &str, result: Result<(), CliError>) -> ExitCode {
    let path = out.join(FAILURE_REPORT);
    match result {
        Ok(()) => {
            if path.exists() {
                let _ = std::fs::remove_file(&path);
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("carnot {verb}: {e}");
            let report = serde_json::json!({
                "verb": verb,
                "exit_code": e.exit_code(),
                "kind": e.kind(),
                "message": e.to_string(),
            });
            let written = std::fs::create_dir_all(out)
                .and_then(|_| std::fs::write(&path, serde_json::to_string_pretty(&report).expect("json") + "\n"));
            if let Err(w) = written {
                eprintln!("carnot: cannot write {}: {w}", path.display());
            }
            ExitCode::from(e.exit_code())
        }
    }
}

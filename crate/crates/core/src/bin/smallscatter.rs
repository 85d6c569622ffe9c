use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use smallscatter::scenario::{self, MethodKind, OutputSpec, Results, Scenario, ScenarioError};

#[derive(Parser)]
#[command(version, about = "Scattering by many small bodies")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute shape properties (capacitance series, polarizability tensors).
    Props(Common),
    /// Run the full pipeline and write results.json / far_field.csv.
    Solve(Common),
    /// Parse the scenario and report regime diagnostics.
    Check(Common),
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Direct,
    FixedPoint,
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    scenario: PathBuf,
    /// Output directory; results.json goes to stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    method: Option<Method>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    threads: Option<usize>,
}

fn configure_threads(threads: Option<usize>) {
    #[cfg(feature = "parallel")]
    if let Some(n) = threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("warning: could not size the thread pool: {e}");
        }
    }
    #[cfg(not(feature = "parallel"))]
    if threads.is_some_and(|n| n > 1) {
        eprintln!("warning: built without the parallel feature; --threads ignored");
    }
}

fn load(args: &Common) -> Result<(Scenario, PathBuf), ScenarioError> {
    let mut s = scenario::load_scenario(&args.scenario)?;
    if let Some(m) = args.method {
        s.solver.method = match m {
            Method::Direct => MethodKind::Direct,
            Method::FixedPoint => MethodKind::FixedPoint,
        };
    }
    if let Some(tol) = args.tol {
        s.solver.tol = tol;
    }
    s.validate()?;
    let base = args.scenario.parent().map(Path::to_path_buf).unwrap_or_default();
    Ok((s, base))
}

fn emit(results: &Results, out: Option<&Path>) -> Result<(), ScenarioError> {
    for w in &results.diagnostics.warnings {
        eprintln!("warning: {w}");
    }
    match out {
        Some(dir) => {
            for path in scenario::write_results(results, dir)? {
                eprintln!("wrote {}", path.display());
            }
        }
        None => print!("{}", scenario::to_json_string(results)),
    }
    Ok(())
}

fn execute(command: Command) -> Result<(), ScenarioError> {
    match command {
        Command::Props(args) => {
            configure_threads(args.threads);
            let (mut s, base) = load(&args)?;
            s.outputs = vec![OutputSpec::ShapeProperties];
            emit(&scenario::run(&s, &base)?, args.out.as_deref())
        }
        Command::Solve(args) => {
            configure_threads(args.threads);
            let (s, base) = load(&args)?;
            emit(&scenario::run(&s, &base)?, args.out.as_deref())
        }
        Command::Check(args) => {
            let (s, base) = load(&args)?;
            emit(&scenario::check(&s, &base)?, args.out.as_deref())
        }
    }
}

fn main() -> ExitCode {
    match execute(Cli::parse().command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

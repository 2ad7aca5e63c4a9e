use std::path::PathBuf;
use std::process::ExitCode;

use annihilator::spec::{function_from_json, problem_from_json};
use annihilator::{run, ExitStatus, InputError, Mode, ProblemSpec};
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "annihilator",
    version,
    about = "Smooth unimodular annihilators on [0, 1]"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Report path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Residual tolerance (Hobby-Rice tolerance in that mode).
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Find θ with ∫ f_k e^{iθ} = 0 for every function.
    Annihilate {
        /// Problem spec or bare JSON list of functions.
        #[arg(long = "in")]
        input: PathBuf,
        /// CSV of t, θ, θ', cos θ, sin θ.
        #[arg(long)]
        samples: Option<PathBuf>,
        /// Number of sample points.
        #[arg(long)]
        grid: Option<usize>,
        #[command(flatten)]
        common: Common,
    },
    /// Find a ±1 sign pattern orthogonal to every real and imaginary part.
    HobbyRice {
        #[arg(long = "in")]
        input: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Seminorm trend of annihilators for the compressed copies of one function.
    Scaling {
        /// A single function in JSON.
        #[arg(long)]
        f: PathBuf,
        #[arg(long, default_value_t = 2.0)]
        p: f64,
        /// `a:b` for an inclusive range or a comma-separated list.
        #[arg(long, default_value = "1:6", value_parser = parse_levels)]
        levels: Levels,
        /// Trend CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Clone)]
struct Levels(Vec<u32>);

fn parse_levels(s: &str) -> Result<Levels, String> {
    let bad = |_| format!("cannot parse levels {s:?}");
    if let Some((a, b)) = s.split_once(':') {
        let a: u32 = a.trim().parse().map_err(bad)?;
        let b: u32 = b.trim().parse().map_err(bad)?;
        if a > b {
            return Err(format!("empty level range {s:?}"));
        }
        Ok(Levels((a..=b).collect()))
    } else {
        s.split(',')
            .map(|x| x.trim().parse().map_err(bad))
            .collect::<Result<_, _>>()
            .map(Levels)
    }
}

fn read(path: &PathBuf) -> Result<String, InputError> {
    std::fs::read_to_string(path).map_err(|source| InputError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn path_string(p: Option<PathBuf>) -> Option<String> {
    p.map(|p| p.display().to_string())
}

fn build(command: Command) -> Result<ProblemSpec, InputError> {
    let (mut spec, common) = match command {
        Command::Annihilate {
            input,
            samples,
            grid,
            common,
        } => {
            let mut spec = problem_from_json(&read(&input)?, Mode::Annihilate)?;
            spec.mode = Mode::Annihilate;
            if samples.is_some() {
                spec.outputs.csv = path_string(samples);
            }
            if grid.is_some() {
                spec.outputs.grid = grid;
            }
            if let Some(tol) = common.tol {
                spec.tolerances.residual = tol;
            }
            (spec, common)
        }
        Command::HobbyRice { input, common } => {
            let mut spec = problem_from_json(&read(&input)?, Mode::HobbyRice)?;
            spec.mode = Mode::HobbyRice;
            if let Some(tol) = common.tol {
                spec.tolerances.hobby_rice = tol;
            }
            (spec, common)
        }
        Command::Scaling {
            f,
            p,
            levels,
            csv,
            common,
        } => {
            let mut spec = ProblemSpec::new(vec![function_from_json(&read(&f)?)?], Mode::Scaling);
            spec.scaling.p = p;
            spec.scaling.levels = levels.0;
            spec.outputs.csv = path_string(csv);
            if let Some(tol) = common.tol {
                spec.tolerances.residual = tol;
            }
            (spec, common)
        }
    };
    if let Some(seed) = common.seed {
        spec.seed = seed;
    }
    if common.out.is_some() {
        spec.outputs.report = path_string(common.out);
    }
    spec.validate()?;
    Ok(spec)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let spec = match build(cli.command) {
        Ok(spec) => spec,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(ExitStatus::InputError.code() as u8);
        }
    };
    let outcome = run(&spec);
    if let Some(msg) = &outcome.message {
        eprintln!("error: {msg}");
    }
    if spec.outputs.report.is_none() {
        if let Some(report) = &outcome.report {
            print!("{report}");
        }
    }
    if outcome.status == ExitStatus::SolverFailure {
        eprintln!("solver failed; see the report");
    }
    ExitCode::from(outcome.status.code() as u8)
}

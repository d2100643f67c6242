//! `orgbottleneck` command-line front end.

mod render;
mod scenario_file;

use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{ArgGroup, Args, Parser, Subcommand};
use orgbottleneck::{
    builtin_scenario, compare_topologies_with, generate_scenario, info_curve, propagate,
    relevant_info_profile, run_batch_with, solve_ib, CompareOptions, ScenarioF64, SolverConfigF64,
};
use serde::Serialize;

use scenario_file::{ParamsFile, ScenarioFile};

const SEED_ENV: &str = "ORGBOTTLENECK_SEED";

#[derive(Debug, Parser)]
#[command(
    name = "orgbottleneck",
    version,
    about = "Information bottleneck solver and hierarchy simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct SolverArgs {
    /// RNG seed; falls back to the file's seed, then $ORGBOTTLENECK_SEED, then 0.
    #[arg(long)]
    seed: Option<u64>,
    /// Random restarts per solve.
    #[arg(long)]
    restarts: Option<usize>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve one bottleneck problem and print the solution as JSON.
    SolveIb {
        /// Scenario-format file; only `x_size`, `y_size` and `joint` are used.
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        beta: f64,
        #[arg(long)]
        cardinality: usize,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Trace the compression/relevance curve as CSV.
    InfoCurve {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        beta_min: f64,
        #[arg(long)]
        beta_max: f64,
        #[arg(long)]
        steps: usize,
        /// Space the schedule geometrically instead of linearly.
        #[arg(long)]
        log_scale: bool,
        /// Bottleneck size; defaults to |X|.
        #[arg(long)]
        cardinality: Option<usize>,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Propagate a scenario through its hierarchy and print the layer profile.
    SimulateHierarchy {
        #[arg(long)]
        scenario: PathBuf,
        /// Write the report here instead of standard output.
        #[arg(long)]
        output: Option<PathBuf>,
        /// Emit the full propagation report as JSON.
        #[arg(long)]
        json: bool,
        /// Ignore skip edges.
        #[arg(long)]
        strict: bool,
        /// Print the parsed scenario file and exit.
        #[arg(long)]
        dump_scenario: bool,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Compare strict and skip topologies and print the report as JSON.
    #[command(group(ArgGroup::new("source").required(true).args(["scenario", "builtin", "random"])))]
    CompareTopologies {
        #[arg(long)]
        scenario: Option<PathBuf>,
        /// Named scenario: xor or redundant.
        #[arg(long)]
        builtin: Option<String>,
        /// Number of random scenarios, drawn with consecutive seeds.
        #[arg(long, requires = "params")]
        random: Option<usize>,
        /// Generation parameters for --random.
        #[arg(long, requires = "random")]
        params: Option<PathBuf>,
        /// Solve the skip topology from scratch.
        #[arg(long)]
        no_warm_start: bool,
        /// Print the scenario file and exit.
        #[arg(long)]
        dump_scenario: bool,
        #[command(flatten)]
        solver: SolverArgs,
    },
}

enum Failure {
    Invalid(String),
    Io(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Invalid(_) => 1,
            Failure::Io(_) => 2,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Invalid(m) | Failure::Io(m) => m,
        }
    }
}

type Outcome = Result<(), Failure>;

fn invalid(e: impl ToString) -> Failure {
    Failure::Invalid(e.to_string())
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| {
        let msg = format!("cannot read {}: {e}", path.display());
        if e.kind() == io::ErrorKind::NotFound {
            Failure::Invalid(msg)
        } else {
            Failure::Io(msg)
        }
    })
}

fn emit(bytes: &[u8], output: Option<&Path>) -> Outcome {
    match output {
        Some(p) => std::fs::write(p, bytes)
            .map_err(|e| Failure::Io(format!("cannot write {}: {e}", p.display()))),
        None => {
            let mut out = io::stdout().lock();
            out.write_all(bytes)
                .and_then(|_| out.flush())
                .map_err(|e| Failure::Io(format!("cannot write to standard output: {e}")))
        }
    }
}

fn env_seed() -> Result<Option<u64>, Failure> {
    match std::env::var(SEED_ENV) {
        Ok(v) => v.trim().parse().map(Some).map_err(|_| {
            invalid(format!(
                "{SEED_ENV}: expected an unsigned integer, got '{v}'"
            ))
        }),
        Err(_) => Ok(None),
    }
}

fn resolve_seed(flag: Option<u64>, file: Option<u64>) -> Result<u64, Failure> {
    Ok(match flag.or(file) {
        Some(s) => s,
        None => env_seed()?.unwrap_or(0),
    })
}

fn solver_config(args: &SolverArgs, seed: u64) -> Result<SolverConfigF64, Failure> {
    let mut cfg = SolverConfigF64::default().with_seed(seed);
    if let Some(r) = args.restarts {
        cfg = cfg.with_restarts(r);
    }
    cfg.validate().map_err(invalid)?;
    Ok(cfg)
}

fn load_file(path: &Path) -> Result<ScenarioFile, Failure> {
    ScenarioFile::parse(&read(path)?).map_err(|e| invalid(format!("{}: {e}", path.display())))
}

#[derive(Serialize)]
struct SolveOutput {
    beta: f64,
    cardinality: usize,
    seed: u64,
    i_x_xhat_bits: f64,
    i_y_xhat_bits: f64,
    lagrangian: f64,
    iterations_used: usize,
    converged: bool,
    encoder: Vec<Vec<f64>>,
    marginal: Vec<f64>,
    decoder: Vec<Vec<f64>>,
}

fn rows(c: &orgbottleneck::ChannelF64) -> Vec<Vec<f64>> {
    (0..c.in_size()).map(|i| c.row(i).to_vec()).collect()
}

fn schedule(min: f64, max: f64, steps: usize, log_scale: bool) -> Result<Vec<f64>, Failure> {
    if steps == 0 {
        return Err(invalid("--steps must be at least 1"));
    }
    if !(min.is_finite() && max.is_finite() && min >= 0.0) {
        return Err(invalid(
            "--beta-min and --beta-max must be finite and non-negative",
        ));
    }
    if steps == 1 {
        return Ok(vec![min]);
    }
    if min >= max {
        return Err(invalid(
            "--beta-min must be below --beta-max when --steps > 1",
        ));
    }
    if log_scale && min <= 0.0 {
        return Err(invalid("--log-scale needs a positive --beta-min"));
    }
    let last = (steps - 1) as f64;
    Ok((0..steps)
        .map(|i| {
            let t = i as f64 / last;
            match (i, log_scale) {
                (0, _) => min,
                (i, _) if i == steps - 1 => max,
                (_, true) => (min.ln() + t * (max.ln() - min.ln())).exp(),
                (_, false) => min + t * (max - min),
            }
        })
        .collect())
}

fn run(cmd: Command) -> Outcome {
    match cmd {
        Command::SolveIb {
            input,
            beta,
            cardinality,
            solver,
        } => {
            let file = load_file(&input)?;
            let j = file.source().map_err(invalid)?;
            let seed = resolve_seed(solver.seed, file.seed)?;
            let mut cfg = solver_config(&solver, seed)?;
            cfg.beta = beta;
            cfg.bottleneck_cardinality = cardinality;
            let s = solve_ib(&j, &cfg).map_err(invalid)?;
            let out = SolveOutput {
                beta,
                cardinality,
                seed,
                i_x_xhat_bits: s.i_x_xhat,
                i_y_xhat_bits: s.i_y_xhat,
                lagrangian: s.lagrangian,
                iterations_used: s.iterations_used,
                converged: s.converged,
                encoder: rows(&s.encoder),
                marginal: s.marginal.probs().to_vec(),
                decoder: rows(&s.decoder),
            };
            emit(&render::json(&out), None)
        }
        Command::InfoCurve {
            input,
            beta_min,
            beta_max,
            steps,
            log_scale,
            cardinality,
            solver,
        } => {
            let file = load_file(&input)?;
            let j = file.source().map_err(invalid)?;
            let mut cfg = solver_config(&solver, resolve_seed(solver.seed, file.seed)?)?;
            cfg.bottleneck_cardinality = cardinality.unwrap_or(j.x_size());
            let betas = schedule(beta_min, beta_max, steps, log_scale)?;
            let pts = info_curve(&j, &betas, &cfg).map_err(invalid)?;
            emit(&render::curve_csv(&pts), None)
        }
        Command::SimulateHierarchy {
            scenario,
            output,
            json,
            strict,
            dump_scenario,
            solver,
        } => {
            let file = load_file(&scenario)?;
            if dump_scenario {
                return emit(file.to_json().as_bytes(), output.as_deref());
            }
            let j = file.source().map_err(invalid)?;
            let mut spec = file.hierarchy().map_err(invalid)?;
            if strict {
                spec = spec.strict();
            }
            let cfg = solver_config(&solver, resolve_seed(solver.seed, file.seed)?)?;
            let report = propagate(&spec, &j, &cfg).map_err(invalid)?;
            let bytes = if json {
                render::json(&report)
            } else {
                render::profile_csv(&relevant_info_profile(&report))
            };
            emit(&bytes, output.as_deref())
        }
        Command::CompareTopologies {
            scenario,
            builtin,
            random,
            params,
            no_warm_start,
            dump_scenario,
            solver,
        } => {
            let opts = CompareOptions {
                warm_start: !no_warm_start,
            };
            if let (Some(count), Some(params)) = (random, params) {
                if dump_scenario {
                    return Err(invalid(
                        "--dump-scenario needs a single scenario, not --random",
                    ));
                }
                if count == 0 {
                    return Err(invalid("--random must be at least 1"));
                }
                let p = ParamsFile::parse(&read(&params)?)
                    .map_err(|e| invalid(format!("{}: {e}", params.display())))?
                    .params();
                let base = resolve_seed(solver.seed, None)?;
                let cfg = solver_config(&solver, base)?;
                let scenarios = (0..count as u64)
                    .map(|i| generate_scenario(base.wrapping_add(i), &p))
                    .collect::<Result<Vec<ScenarioF64>, _>>()
                    .map_err(invalid)?;
                let batch = run_batch_with(&scenarios, &cfg, opts).map_err(invalid)?;
                return emit(&render::json(&batch), None);
            }
            let s = match (scenario, builtin) {
                (Some(path), _) => {
                    let file = load_file(&path)?;
                    let seed = resolve_seed(solver.seed, file.seed)?;
                    let stem = path
                        .file_stem()
                        .map_or("scenario".into(), |s| s.to_string_lossy());
                    file.scenario(&stem, seed)
                        .map_err(|e| invalid(format!("{}: {e}", path.display())))?
                }
                (None, Some(name)) => {
                    let mut s = builtin_scenario(&name).map_err(invalid)?;
                    s.seed = resolve_seed(solver.seed, None)?;
                    s
                }
                (None, None) => unreachable!("clap enforces a scenario source"),
            };
            if dump_scenario {
                return emit(ScenarioFile::from_scenario(&s).to_json().as_bytes(), None);
            }
            let cfg = solver_config(&solver, s.seed)?;
            let report = compare_topologies_with(&s, &cfg, opts).map_err(invalid)?;
            emit(&render::json(&report), None)
        }
    }
}

fn one_line(msg: &str) -> String {
    msg.split_whitespace().collect::<Vec<_>>().join(" ")
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            // Keep the message paragraph and drop the usage block after it.
            let rendered = e.to_string();
            let head: Vec<&str> = rendered
                .lines()
                .take_while(|l| !l.trim().is_empty())
                .collect();
            eprintln!(
                "error: {}",
                one_line(head.join(" ").trim_start_matches("error:"))
            );
            return ExitCode::from(1);
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", one_line(f.message()));
            ExitCode::from(f.code())
        }
    }
}

//! Command-line interface.
//!
//! Exit codes: 0 success, 2 usage or validation error, 1 runtime failure.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::evolution::{evolve_observed, write_history_csv, GpConfig};
use crate::harness::{
    aggregate, run_generalize, run_per_instance, run_stress, write_records_csv, write_summary_csv,
    ExperimentMode, ExperimentSpec, HarnessError,
};
use crate::program::{parse_program, InitMethod, Program};
use crate::seeding::{substream, Stream};
use crate::simulator::{run_episode, trace_episode, DEFAULT_COMM_RADIUS};
use crate::workspace::{
    canonical_scenarios, generate_problem, parse_problem, serialize_problem, GeneratorParams,
    ProblemInstance, RobotCountRule,
};

#[derive(Debug, Parser)]
#[command(
    name = "gpmrpp",
    version,
    about = "Evolve decision-tree programs for multi-robot path planning on trees"
)]
pub struct Cli {
    /// Master seed; drawn from system entropy and printed when omitted.
    #[arg(long, global = true, env = "GPMRPP_SEED")]
    pub seed: Option<u64>,
    /// Progress output on stderr (repeat for more).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate random problem files.
    Gen(GenArgs),
    /// Evolve a program on one or more problem files.
    Train(TrainArgs),
    /// Run a program on a problem and report the outcome.
    Run(RunArgs),
    /// Run an experiment and write records and summary CSVs.
    Experiment(ExperimentArgs),
    /// Write the three canonical swap scenarios as problem files.
    Scenarios(ScenariosArgs),
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(long, default_value_t = 1)]
    pub count: usize,
    #[arg(long, default_value_t = 4)]
    pub seed_depth: u32,
    #[arg(long, default_value_t = 4)]
    pub branching: u32,
    /// leaves-minus-one, leaf-multiplier:<x> or explicit:<k>.
    #[arg(long, default_value = "leaves-minus-one")]
    pub robots: RobotCountRule,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Scale {
    /// Minutes: |P|=300, 2 runs of 60 generations, 20 trials, seed depth 4 to 6.
    Desk,
    /// Hours or more: |P|=2000, 5 runs of 400 generations, 1000 trials, seed depth 4 to 10.
    Full,
}

#[derive(Debug, Args)]
pub struct GpArgs {
    #[arg(long, value_enum, default_value_t = Scale::Desk)]
    pub scale: Scale,
    #[arg(long)]
    pub population: Option<usize>,
    #[arg(long)]
    pub runs: Option<usize>,
    #[arg(long)]
    pub generations: Option<usize>,
    /// Reproduction rate (default 0.1).
    #[arg(long)]
    pub pa: Option<f64>,
    /// Crossover rate (default 0.8).
    #[arg(long)]
    pub pc: Option<f64>,
    /// Mutation rate (default 0.1).
    #[arg(long)]
    pub pm: Option<f64>,
    /// Depth bound of initial programs and mutation subtrees (default 2).
    #[arg(long)]
    pub init_depth: Option<usize>,
    /// Maximum program depth (default 50).
    #[arg(long)]
    pub max_depth: Option<usize>,
    /// Communication radius (default 2).
    #[arg(long)]
    pub comm_radius: Option<usize>,
    /// grow, full or ramped (default grow).
    #[arg(long)]
    pub init_method: Option<InitMethod>,
}

impl GpArgs {
    fn config(&self, seed: u64) -> GpConfig {
        let base = match self.scale {
            Scale::Desk => GpConfig::desk(),
            Scale::Full => GpConfig::default(),
        };
        GpConfig {
            population_size: self.population.unwrap_or(base.population_size),
            runs: self.runs.unwrap_or(base.runs),
            generations: self.generations.unwrap_or(base.generations),
            reproduction_rate: self.pa.unwrap_or(base.reproduction_rate),
            crossover_rate: self.pc.unwrap_or(base.crossover_rate),
            mutation_rate: self.pm.unwrap_or(base.mutation_rate),
            init_max_depth: self.init_depth.unwrap_or(base.init_max_depth),
            max_depth: self.max_depth.unwrap_or(base.max_depth),
            comm_radius: self.comm_radius.unwrap_or(base.comm_radius),
            init_method: self.init_method.unwrap_or(base.init_method),
            seed,
        }
    }
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// Problem files forming the fitness set.
    #[arg(required = true)]
    pub problems: Vec<PathBuf>,
    /// Where to write the evolved program.
    #[arg(long, default_value = "program.sexp")]
    pub out: PathBuf,
    /// Where to write the per-generation history CSV.
    #[arg(long, default_value = "history.csv")]
    pub history: PathBuf,
    #[command(flatten)]
    pub gp: GpArgs,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[arg(long)]
    pub program: PathBuf,
    #[arg(long)]
    pub problem: PathBuf,
    /// Step cap; defaults to |N|^2 * |R|^2.
    #[arg(long)]
    pub cap: Option<u64>,
    /// Print the position of every robot after every step.
    #[arg(long)]
    pub trace: bool,
    #[arg(long, default_value_t = DEFAULT_COMM_RADIUS)]
    pub comm_radius: usize,
}

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    /// per-instance, generalize or stress.
    #[arg(long)]
    pub mode: ExperimentMode,
    #[arg(long)]
    pub trials: Option<usize>,
    /// Training seed-depth range, e.g. `4-6`.
    #[arg(long, value_parser = parse_range)]
    pub train_depths: Option<(u32, u32)>,
    /// Test seed-depth range (generalize mode).
    #[arg(long, value_parser = parse_range)]
    pub test_depths: Option<(u32, u32)>,
    #[arg(long)]
    pub branching: Option<u32>,
    /// Training instances per trial (generalize mode, default 5).
    #[arg(long)]
    pub fitness_set_size: Option<usize>,
    /// Test instances per trial (generalize mode).
    #[arg(long)]
    pub test_count: Option<usize>,
    /// Comma-separated leaf multipliers (stress mode).
    #[arg(long, value_delimiter = ',')]
    pub multipliers: Option<Vec<f64>>,
    /// Output directory for records.csv and summary.csv.
    #[arg(long, default_value = "results")]
    pub out: PathBuf,
    /// Record wall-clock milliseconds (makes output non-reproducible).
    #[arg(long)]
    pub wall_time: bool,
    #[command(flatten)]
    pub gp: GpArgs,
}

#[derive(Debug, Args)]
pub struct ScenariosArgs {
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

fn parse_range(text: &str) -> Result<(u32, u32), String> {
    let (lo, hi) = text.split_once('-').unwrap_or((text, text));
    let lo: u32 = lo
        .trim()
        .parse()
        .map_err(|_| format!("bad range `{text}`"))?;
    let hi: u32 = hi
        .trim()
        .parse()
        .map_err(|_| format!("bad range `{text}`"))?;
    if lo > hi {
        return Err(format!("empty range `{text}`"));
    }
    Ok((lo, hi))
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Runtime(_) => 1,
        }
    }
}

impl From<HarnessError> for CliError {
    fn from(err: HarnessError) -> Self {
        match err {
            HarnessError::Workspace(e) => CliError::Runtime(e.to_string()),
            other => CliError::Usage(other.to_string()),
        }
    }
}

fn io_error(path: &Path, err: io::Error) -> CliError {
    CliError::Runtime(format!("{}: {err}", path.display()))
}

fn write_file(path: &Path, contents: &[u8]) -> Result<(), CliError> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| io_error(parent, e))?;
    }
    fs::write(path, contents).map_err(|e| io_error(path, e))
}

fn read_file(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| io_error(path, e))
}

fn load_problem(path: &Path) -> Result<ProblemInstance, CliError> {
    let label = path
        .file_stem()
        .map_or_else(String::new, |s| s.to_string_lossy().into_owned());
    parse_problem(&read_file(path)?, &label)
        .map_err(|e| CliError::Runtime(format!("{}: {e}", path.display())))
}

fn load_program(path: &Path) -> Result<Program, CliError> {
    parse_program(&read_file(path)?)
        .map_err(|e| CliError::Runtime(format!("{}:{e}", path.display())))
}

/// Parses arguments, runs the command and returns the process exit code.
pub fn main() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let _ = err.print();
            return if err.use_stderr() { 2 } else { 0 };
        }
    };
    match run(cli, &mut io::stdout().lock()) {
        Ok(()) => 0,
        Err(err) => {
            eprintln!("error: {err}");
            err.exit_code()
        }
    }
}

/// Executes a parsed command line, writing reports to `out`.
pub fn run<W: Write>(cli: Cli, out: &mut W) -> Result<(), CliError> {
    let seed = || {
        cli.seed.unwrap_or_else(|| {
            let seed = rand::random();
            eprintln!("seed={seed}");
            seed
        })
    };
    let report = |e: io::Error| CliError::Runtime(e.to_string());
    match &cli.command {
        Command::Gen(args) => {
            validate_gen(args)?;
            cmd_gen(args, seed(), out).map_err(report)
        }
        Command::Train(args) => cmd_train(args, seed(), cli.verbose, out),
        Command::Run(args) => cmd_run(args, out),
        Command::Experiment(args) => cmd_experiment(args, seed(), cli.verbose, out),
        Command::Scenarios(args) => {
            for (index, scenario) in canonical_scenarios().iter().enumerate() {
                let path = args.out.join(format!("scenario-{}.txt", index + 1));
                write_file(&path, serialize_problem(scenario).as_bytes())?;
                writeln!(out, "{} {}", path.display(), scenario.label()).map_err(report)?;
            }
            Ok(())
        }
    }
}

fn cmd_gen<W: Write>(args: &GenArgs, seed: u64, out: &mut W) -> io::Result<()> {
    let params = GeneratorParams {
        robot_count_rule: args.robots,
        ..GeneratorParams::new(args.seed_depth, args.branching, seed)
    };
    fs::create_dir_all(&args.out)?;
    for index in 0..args.count {
        let mut shape = substream(seed, Stream::TreeShape, index as u64);
        let mut placement = substream(seed, Stream::RobotPlacement, index as u64);
        let problem = generate_problem(&params, &mut shape, &mut placement)
            .map_err(|e| io::Error::new(io::ErrorKind::InvalidInput, e))?;
        let path = args.out.join(format!("problem-{index:03}.txt"));
        fs::write(&path, serialize_problem(&problem))?;
        writeln!(
            out,
            "{} nodes={} leaves={} robots={}",
            path.display(),
            problem.workspace().node_count(),
            problem.workspace().leaf_nodes().len(),
            problem.robot_count()
        )?;
    }
    Ok(())
}

fn validate_gen(args: &GenArgs) -> Result<(), CliError> {
    if args.robots == RobotCountRule::Explicit(0) {
        return Err(CliError::Usage("at least one robot is required".into()));
    }
    if args.branching == 0 {
        return Err(CliError::Usage("--branching must be at least 1".into()));
    }
    Ok(())
}

fn cmd_train<W: Write>(
    args: &TrainArgs,
    seed: u64,
    verbose: u8,
    out: &mut W,
) -> Result<(), CliError> {
    let config = args.gp.config(seed);
    config
        .validate()
        .map_err(|e| CliError::Usage(e.to_string()))?;
    let problems = args
        .problems
        .iter()
        .map(|p| load_problem(p))
        .collect::<Result<Vec<_>, _>>()?;
    let mut rng = substream(seed, Stream::Evolution, 0);
    let outcome = evolve_observed(&config, &problems, &mut rng, |view| {
        if verbose > 0 {
            let best = view
                .evaluations
                .iter()
                .map(|e| e.fitness)
                .min()
                .unwrap_or(0);
            eprintln!(
                "run {} generation {} best fitness {best}",
                view.run, view.generation
            );
        }
    })
    .map_err(|e| CliError::Usage(e.to_string()))?;

    let mut history = Vec::new();
    write_history_csv(&outcome.history, &mut history)
        .map_err(|e| CliError::Runtime(e.to_string()))?;
    write_file(&args.history, &history)?;
    let io = |e: io::Error| CliError::Runtime(e.to_string());
    match (&outcome.best, outcome.best_total) {
        (Some(best), Some(total)) => {
            write_file(
                &args.out,
                format!("# total steps {total}\n{best}\n").as_bytes(),
            )?;
            writeln!(
                out,
                "solved total_steps={total} program={}",
                args.out.display()
            )
            .map_err(io)?;
            Ok(())
        }
        _ => {
            let text = format!(
                "# unsolved, best fitness {}\n{}\n",
                outcome.fittest_fitness, outcome.fittest
            );
            write_file(&args.out, text.as_bytes())?;
            Err(CliError::Runtime(format!(
                "no program solved the fitness set; best fitness {} written to {}",
                outcome.fittest_fitness,
                args.out.display()
            )))
        }
    }
}

fn cmd_run<W: Write>(args: &RunArgs, out: &mut W) -> Result<(), CliError> {
    if args.comm_radius == 0 {
        return Err(CliError::Usage("--comm-radius must be at least 1".into()));
    }
    let program = load_program(&args.program)?;
    let problem = load_problem(&args.problem)?;
    let cap = args.cap.unwrap_or_else(|| problem.step_cap());
    let io = |e: io::Error| CliError::Runtime(e.to_string());
    let result = if args.trace {
        trace_episode(&problem, &program, cap, args.comm_radius, out).map_err(io)?
    } else {
        run_episode(&problem, &program, cap, args.comm_radius)
    };
    writeln!(out, "solved={} steps={}", result.solved, result.steps_used).map_err(io)
}

fn experiment_spec(args: &ExperimentArgs, seed: u64) -> ExperimentSpec {
    let base = match args.gp.scale {
        Scale::Desk => ExperimentSpec::desk(args.mode),
        Scale::Full => ExperimentSpec::full(args.mode),
    };
    let range = |r: Option<(u32, u32)>, default: std::ops::RangeInclusive<u32>| {
        r.map_or(default, |(a, b)| a..=b)
    };
    ExperimentSpec {
        trials: args.trials.unwrap_or(base.trials),
        train_depths: range(args.train_depths, base.train_depths.clone()),
        test_depths: range(args.test_depths, base.test_depths.clone()),
        max_branching: args.branching.unwrap_or(base.max_branching),
        fitness_set_size: args.fitness_set_size.unwrap_or(base.fitness_set_size),
        test_count: args.test_count.unwrap_or(base.test_count),
        leaf_multipliers: args
            .multipliers
            .clone()
            .unwrap_or(base.leaf_multipliers.clone()),
        gp: args.gp.config(seed),
        seed,
        wall_time: args.wall_time,
        ..base
    }
}

fn cmd_experiment<W: Write>(
    args: &ExperimentArgs,
    seed: u64,
    verbose: u8,
    out: &mut W,
) -> Result<(), CliError> {
    let spec = experiment_spec(args, seed);
    spec.validate()?;
    let csv = |records: &[_]| {
        let mut buf = Vec::new();
        write_records_csv(records, &mut buf).expect("writing to memory");
        buf
    };
    let records = match spec.mode {
        ExperimentMode::PerInstance => run_per_instance(&spec)?,
        ExperimentMode::Stress => run_stress(&spec)?,
        ExperimentMode::Generalize => {
            let report = run_generalize(&spec)?;
            for (trial, (program, general)) in report.programs.iter().enumerate() {
                if !general {
                    eprintln!(
                        "trial {trial}: no general program found; testing the fittest program"
                    );
                }
                if verbose > 0 {
                    eprintln!("trial {trial}: {program}");
                }
            }
            write_file(
                &args.out.join("train_records.csv"),
                &csv(&report.train_records),
            )?;
            report.test_records
        }
    };
    let summary = aggregate(&records);
    let mut summary_csv = Vec::new();
    write_summary_csv(&summary, &mut summary_csv).expect("writing to memory");
    let records_path = args.out.join("records.csv");
    let summary_path = args.out.join("summary.csv");
    write_file(&records_path, &csv(&records))?;
    write_file(&summary_path, &summary_csv)?;

    let io = |e: io::Error| CliError::Runtime(e.to_string());
    if verbose > 0 {
        out.write_all(&summary_csv).map_err(io)?;
    }
    let solved = records.iter().filter(|r| r.gp_solved).count();
    writeln!(
        out,
        "mode={} records={} gp_solved={solved} wrote {} {}",
        spec.mode,
        records.len(),
        records_path.display(),
        summary_path.display()
    )
    .map_err(io)
}

//! Experiment drivers: per-instance optimisation, generalisation from a
//! training set to unseen instances, and robot-density stress tests.
//!
//! Every trial derives its randomness from the experiment seed through
//! [`crate::seeding`], so records are reproducible bit for bit. Wall-clock
//! timing is opt-in because it would break that.

use std::fmt;
use std::io::{self, Write};
use std::ops::RangeInclusive;
use std::str::FromStr;
use std::sync::OnceLock;
use std::time::Instant;

use rand::Rng;

use crate::evolution::{evolve, ConfigError, EvolutionOutcome, GpConfig};
use crate::program::{parse_program, Program};
use crate::seeding::{substream, Stream};
use crate::simulator::{run_episode, EpisodeResult};
use crate::workspace::{
    generate_problem, GeneratorParams, ProblemInstance, RobotCountRule, WorkspaceError,
};

pub const RECORDS_CSV_HEADER: &str =
    "trial,x_key,nodes,leaves,robots,gp_solved,gp_steps,baseline_solved,baseline_steps,generations,wall_ms";
pub const SUMMARY_CSV_HEADER: &str =
    "x_key,n,mean_steps,std_steps,gp_solved_frac,baseline_solved_frac";

/// Offset separating test-instance seed-depth draws from training ones.
const TEST_INDEX_OFFSET: u64 = 1 << 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExperimentMode {
    PerInstance,
    Generalize,
    Stress,
}

impl fmt::Display for ExperimentMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ExperimentMode::PerInstance => "per-instance",
            ExperimentMode::Generalize => "generalize",
            ExperimentMode::Stress => "stress",
        })
    }
}

impl FromStr for ExperimentMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "per-instance" => Ok(ExperimentMode::PerInstance),
            "generalize" => Ok(ExperimentMode::Generalize),
            "stress" => Ok(ExperimentMode::Stress),
            _ => Err(format!(
                "unknown mode `{s}` (per-instance, generalize, stress)"
            )),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("invalid experiment: {0}")]
    Spec(String),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Workspace(#[from] WorkspaceError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub mode: ExperimentMode,
    pub trials: usize,
    pub train_depths: RangeInclusive<u32>,
    pub test_depths: RangeInclusive<u32>,
    pub max_branching: u32,
    /// Training instances per trial in generalize mode.
    pub fitness_set_size: usize,
    /// Unseen instances per trial in generalize mode.
    pub test_count: usize,
    pub leaf_multipliers: Vec<f64>,
    pub gp: GpConfig,
    pub seed: u64,
    /// Record wall-clock milliseconds instead of 0.
    pub wall_time: bool,
}

impl ExperimentSpec {
    /// Minutes-scale settings: small trees (seed depth 4 to 6), 20 trials,
    /// desk GP.
    pub fn desk(mode: ExperimentMode) -> Self {
        ExperimentSpec {
            mode,
            trials: 20,
            train_depths: 4..=6,
            test_depths: 4..=6,
            max_branching: 4,
            fitness_set_size: 5,
            test_count: 20,
            leaf_multipliers: vec![0.25, 0.5, 1.0, 1.5],
            gp: GpConfig::desk(),
            seed: 0,
            wall_time: false,
        }
    }

    /// Full-scale settings. Depth-10 trees can hold thousands of nodes, so
    /// expect hours to days per experiment.
    pub fn full(mode: ExperimentMode) -> Self {
        ExperimentSpec {
            trials: 1000,
            train_depths: 4..=10,
            test_depths: 4..=9,
            test_count: 100,
            gp: GpConfig::default(),
            ..ExperimentSpec::desk(mode)
        }
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let fail = |msg: &str| Err(HarnessError::Spec(msg.to_string()));
        if self.trials == 0 {
            return fail("trials must be at least 1");
        }
        if self.train_depths.is_empty() || self.test_depths.is_empty() {
            return fail("seed-depth ranges must be nonempty");
        }
        if self.max_branching == 0 {
            return fail("max branching must be at least 1");
        }
        if self.mode == ExperimentMode::Generalize
            && (self.fitness_set_size == 0 || self.test_count == 0)
        {
            return fail("generalize mode needs at least one training and one test instance");
        }
        if self.mode == ExperimentMode::Stress
            && (self.leaf_multipliers.is_empty()
                || self
                    .leaf_multipliers
                    .iter()
                    .any(|&m| !(m > 0.0 && m.is_finite())))
        {
            return fail("leaf multipliers must be positive");
        }
        self.gp.validate()?;
        Ok(())
    }

    fn instance(
        &self,
        depths: &RangeInclusive<u32>,
        streams: (Stream, Stream),
        index: u64,
        depth_index: u64,
        rule: RobotCountRule,
    ) -> Result<ProblemInstance, WorkspaceError> {
        let depth = substream(self.seed, Stream::SeedDepth, depth_index).gen_range(depths.clone());
        let params = GeneratorParams {
            robot_count_rule: rule,
            ..GeneratorParams::new(depth, self.max_branching, self.seed)
        };
        let mut shape = substream(self.seed, streams.0, index);
        let mut placement = substream(self.seed, streams.1, index);
        generate_problem(&params, &mut shape, &mut placement)
    }

    /// Training-side instance `index` under the given robot-count rule.
    pub fn train_instance(
        &self,
        index: u64,
        rule: RobotCountRule,
    ) -> Result<ProblemInstance, WorkspaceError> {
        let streams = (Stream::TreeShape, Stream::RobotPlacement);
        Ok(self
            .instance(&self.train_depths, streams, index, index, rule)?
            .with_label(format!("train-{index}")))
    }

    /// Test-side instance `index`; drawn from streams disjoint from training.
    pub fn test_instance(&self, index: u64) -> Result<ProblemInstance, WorkspaceError> {
        let streams = (Stream::TestShape, Stream::TestPlacement);
        let rule = RobotCountRule::LeavesMinusOne;
        Ok(self
            .instance(
                &self.test_depths,
                streams,
                index,
                TEST_INDEX_OFFSET + index,
                rule,
            )?
            .with_label(format!("test-{index}")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub trial: usize,
    /// Grouping key: robot count, or the leaf multiplier in stress mode.
    pub x_key: String,
    pub nodes: usize,
    pub leaves: usize,
    pub robots: usize,
    pub gp_solved: bool,
    /// Steps to solve, or the step cap when unsolved.
    pub gp_steps: u64,
    pub baseline_solved: bool,
    pub baseline_steps: u64,
    /// Generations elapsed (over all runs) when the reported program was
    /// found; the full count when none solved.
    pub generations: usize,
    pub wall_ms: u64,
}

impl TrialRecord {
    fn new(trial: usize, x_key: String, problem: &ProblemInstance) -> Self {
        let baseline = greedy_baseline(problem, problem.step_cap());
        TrialRecord {
            trial,
            x_key,
            nodes: problem.workspace().node_count(),
            leaves: problem.workspace().leaf_nodes().len(),
            robots: problem.robot_count(),
            gp_solved: false,
            gp_steps: problem.step_cap(),
            baseline_solved: baseline.solved,
            baseline_steps: baseline.steps_used,
            generations: 0,
            wall_ms: 0,
        }
    }

    fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{},{}",
            self.trial,
            self.x_key,
            self.nodes,
            self.leaves,
            self.robots,
            self.gp_solved,
            self.gp_steps,
            self.baseline_solved,
            self.baseline_steps,
            self.generations,
            self.wall_ms
        )
    }
}

fn greedy_program() -> &'static Program {
    static PROGRAM: OnceLock<Program> = OnceLock::new();
    PROGRAM.get_or_init(|| {
        parse_program("(if-neighbor-on-path-is-free (move-toward-objective) (stay))")
            .expect("valid program")
    })
}

/// Reference comparator: every robot steps along its tree path toward its
/// goal and waits whenever the next node is taken. It never yields, so any
/// head-on encounter deadlocks.
pub fn greedy_baseline(problem: &ProblemInstance, step_cap: u64) -> EpisodeResult {
    run_episode(
        problem,
        greedy_program(),
        step_cap,
        crate::simulator::DEFAULT_COMM_RADIUS,
    )
}

fn generations_elapsed(outcome: &EvolutionOutcome, config: &GpConfig) -> usize {
    match outcome.best_found_at {
        Some((run, generation)) => run * config.generations + generation + 1,
        None => config.runs * config.generations,
    }
}

fn elapsed_ms(spec: &ExperimentSpec, started: Instant) -> u64 {
    if spec.wall_time {
        started.elapsed().as_millis() as u64
    } else {
        0
    }
}

fn evolve_single(
    spec: &ExperimentSpec,
    trial: usize,
    x_key: String,
    problem: &ProblemInstance,
) -> Result<TrialRecord, HarnessError> {
    let started = Instant::now();
    let mut record = TrialRecord::new(trial, x_key, problem);
    let mut rng = substream(spec.seed, Stream::Evolution, trial as u64);
    let outcome = evolve(&spec.gp, std::slice::from_ref(problem), &mut rng)?;
    if let Some(total) = outcome.best_total {
        record.gp_solved = true;
        record.gp_steps = total;
    }
    record.generations = generations_elapsed(&outcome, &spec.gp);
    record.wall_ms = elapsed_ms(spec, started);
    Ok(record)
}

/// Evolves a program for each trial's own random instance, with
/// `leaves - 1` robots.
pub fn run_per_instance(spec: &ExperimentSpec) -> Result<Vec<TrialRecord>, HarnessError> {
    spec.validate()?;
    (0..spec.trials)
        .map(|trial| {
            let problem = spec.train_instance(trial as u64, RobotCountRule::LeavesMinusOne)?;
            evolve_single(spec, trial, problem.robot_count().to_string(), &problem)
        })
        .collect()
}

/// Per-instance evolution with `max(1, floor(m * leaves))` robots for each
/// multiplier `m`. Trial `t` uses the same tree shape stream under every
/// multiplier.
pub fn run_stress(spec: &ExperimentSpec) -> Result<Vec<TrialRecord>, HarnessError> {
    spec.validate()?;
    let mut records = Vec::with_capacity(spec.trials * spec.leaf_multipliers.len());
    for &multiplier in &spec.leaf_multipliers {
        for trial in 0..spec.trials {
            let rule = RobotCountRule::LeafMultiplier(multiplier);
            let problem = spec.train_instance(trial as u64, rule)?;
            records.push(evolve_single(
                spec,
                trial,
                format_multiplier(multiplier),
                &problem,
            )?);
        }
    }
    Ok(records)
}

fn format_multiplier(m: f64) -> String {
    format!("{m}")
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneralizeReport {
    pub train_records: Vec<TrialRecord>,
    pub test_records: Vec<TrialRecord>,
    /// Per trial, the program replayed on the test set and whether it
    /// solved the whole training set. When none did, the lowest-fitness
    /// program stands in.
    pub programs: Vec<(Program, bool)>,
}

/// Evolves one program per trial on a training set and replays it on
/// unseen test instances.
pub fn run_generalize(spec: &ExperimentSpec) -> Result<GeneralizeReport, HarnessError> {
    spec.validate()?;
    let mut report = GeneralizeReport {
        train_records: Vec::new(),
        test_records: Vec::new(),
        programs: Vec::new(),
    };
    for trial in 0..spec.trials {
        let started = Instant::now();
        let base = (trial * spec.fitness_set_size) as u64;
        let train: Vec<ProblemInstance> = (0..spec.fitness_set_size as u64)
            .map(|i| spec.train_instance(base + i, RobotCountRule::LeavesMinusOne))
            .collect::<Result<_, _>>()?;
        let mut rng = substream(spec.seed, Stream::Evolution, trial as u64);
        let outcome = evolve(&spec.gp, &train, &mut rng)?;
        let generations = generations_elapsed(&outcome, &spec.gp);
        let general = outcome.best.is_some();
        let program = outcome
            .best
            .clone()
            .unwrap_or_else(|| outcome.fittest.clone());

        let replay = |problem: &ProblemInstance, records: &mut Vec<TrialRecord>| {
            let mut record = TrialRecord::new(trial, problem.robot_count().to_string(), problem);
            let episode = run_episode(problem, &program, problem.step_cap(), spec.gp.comm_radius);
            record.gp_solved = episode.solved;
            record.gp_steps = episode.steps_used;
            record.generations = generations;
            records.push(record);
        };
        for problem in &train {
            replay(problem, &mut report.train_records);
        }
        let test_base = (trial * spec.test_count) as u64;
        for i in 0..spec.test_count as u64 {
            replay(
                &spec.test_instance(test_base + i)?,
                &mut report.test_records,
            );
        }
        let wall = elapsed_ms(spec, started);
        for record in report
            .train_records
            .iter_mut()
            .chain(report.test_records.iter_mut())
        {
            if record.trial == trial {
                record.wall_ms = wall;
            }
        }
        report.programs.push((program, general));
    }
    Ok(report)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub x_key: String,
    pub n: usize,
    /// Mean and population standard deviation of steps over GP-solved
    /// trials; absent when none solved.
    pub mean_steps: Option<f64>,
    pub std_steps: Option<f64>,
    pub gp_solved_frac: f64,
    pub baseline_solved_frac: f64,
}

fn key_order(key: &str) -> (f64, &str) {
    (key.parse().unwrap_or(f64::INFINITY), key)
}

/// Groups records by `x_key`, ordered numerically where keys are numbers.
pub fn aggregate(records: &[TrialRecord]) -> Vec<SummaryRow> {
    let mut keys: Vec<&str> = records.iter().map(|r| r.x_key.as_str()).collect();
    keys.sort_by(|a, b| {
        key_order(a)
            .partial_cmp(&key_order(b))
            .expect("keys are comparable")
    });
    keys.dedup();
    keys.into_iter()
        .map(|key| {
            let group: Vec<&TrialRecord> = records.iter().filter(|r| r.x_key == key).collect();
            let n = group.len();
            let steps: Vec<f64> = group
                .iter()
                .filter(|r| r.gp_solved)
                .map(|r| r.gp_steps as f64)
                .collect();
            let (mean_steps, std_steps) = if steps.is_empty() {
                (None, None)
            } else {
                let mean = steps.iter().sum::<f64>() / steps.len() as f64;
                let var =
                    steps.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / steps.len() as f64;
                (Some(mean), Some(var.sqrt()))
            };
            let frac = |hit: usize| hit as f64 / n as f64;
            SummaryRow {
                x_key: key.to_string(),
                n,
                mean_steps,
                std_steps,
                gp_solved_frac: frac(group.iter().filter(|r| r.gp_solved).count()),
                baseline_solved_frac: frac(group.iter().filter(|r| r.baseline_solved).count()),
            }
        })
        .collect()
}

pub fn write_records_csv<W: Write>(records: &[TrialRecord], out: &mut W) -> io::Result<()> {
    writeln!(out, "{RECORDS_CSV_HEADER}")?;
    for record in records {
        writeln!(out, "{}", record.csv_row())?;
    }
    Ok(())
}

pub fn write_summary_csv<W: Write>(rows: &[SummaryRow], out: &mut W) -> io::Result<()> {
    let opt = |v: Option<f64>| v.map_or_else(String::new, |v| format!("{v:.6}"));
    writeln!(out, "{SUMMARY_CSV_HEADER}")?;
    for row in rows {
        writeln!(
            out,
            "{},{},{},{},{:.6},{:.6}",
            row.x_key,
            row.n,
            opt(row.mean_steps),
            opt(row.std_steps),
            row.gp_solved_frac,
            row.baseline_solved_frac
        )?;
    }
    Ok(())
}

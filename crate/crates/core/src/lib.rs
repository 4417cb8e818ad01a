//! Evolving decision-tree navigation programs for multi-robot path planning
//! on tree-shaped, single-lane workspaces.
//!
//! The crate is organized bottom-up:
//!
//! - [`workspace`]: tree workspaces, problem instances, the random tree
//!   generator, the canonical swap fixtures and the problem file format.
//! - [`program`]: the decision-tree genome and its s-expression form.
//! - [`simulator`]: deterministic time-stepped execution of a program.
//! - [`evolution`]: fitness, genetic operators and the evolution loop.
//! - [`harness`]: experiment drivers, a greedy baseline and CSV summaries.
//! - [`cli`]: the `gpmrpp` command-line front end.
//!
//! Runnable walkthroughs live in the crate's `examples/` directory.

pub mod cli;
pub mod evolution;
pub mod harness;
pub mod program;
pub mod seeding;
pub mod simulator;
pub mod workspace;

pub use evolution::{compute_fitness, evolve, EvaluationResult, EvolutionOutcome, GpConfig};
pub use program::{parse_program, random_program, FunctionKind, Node, Program, TerminalKind};
pub use simulator::{run_episode, EpisodeResult, SimulationState};
pub use workspace::{canonical_scenarios, ProblemInstance, RobotSpec, Workspace};

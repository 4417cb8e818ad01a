use std::io::{self, Write};

use super::SimulationState;
use crate::program::Program;
use crate::workspace::{NodeId, ProblemInstance};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EpisodeResult {
    /// Every robot visited its goal within the step cap.
    pub solved: bool,
    /// Step at which the last robot first reached its goal, or the cap.
    pub steps_used: u64,
    pub final_positions: Vec<NodeId>,
}

/// Runs `program` on `problem` until every robot has visited its goal or
/// `step_cap` steps have elapsed.
///
/// The world is deterministic, so once the full state repeats the episode
/// can never be solved. Repeats are detected with Brent's cycle-finding
/// scheme and the remaining steps are skipped; the reported positions are
/// those the world would have at the cap.
pub fn run_episode(
    problem: &ProblemInstance,
    program: &Program,
    step_cap: u64,
    comm_radius: usize,
) -> EpisodeResult {
    let mut sim = SimulationState::new(problem, comm_radius);
    if sim.all_solved() {
        return finish(&sim, true, 0);
    }
    let mut snapshot = sim.robots.clone();
    let mut snapshot_at = 0u64;
    let mut power = 1u64;
    while sim.clock < step_cap {
        let changed = sim.step_world(program);
        if sim.all_solved() {
            return finish(&sim, true, sim.clock);
        }
        if !changed {
            return finish(&sim, false, step_cap);
        }
        if sim.same_state(&snapshot) {
            let period = sim.clock - snapshot_at;
            for _ in 0..(step_cap - sim.clock) % period {
                sim.step_world(program);
            }
            return finish(&sim, false, step_cap);
        }
        if sim.clock - snapshot_at == power {
            snapshot.clone_from(&sim.robots);
            snapshot_at = sim.clock;
            power *= 2;
        }
    }
    finish(&sim, false, step_cap)
}

/// Step-by-step reference for [`run_episode`] without cycle skipping.
pub fn run_episode_naive(
    problem: &ProblemInstance,
    program: &Program,
    step_cap: u64,
    comm_radius: usize,
) -> EpisodeResult {
    let mut sim = SimulationState::new(problem, comm_radius);
    while !sim.all_solved() && sim.clock < step_cap {
        sim.step_world(program);
    }
    let solved = sim.all_solved();
    let steps = if solved { sim.clock } else { step_cap };
    finish(&sim, solved, steps)
}

/// Runs an episode step by step, writing one line per step:
/// `t=<n> robot <id> <node> robot <id> <node> ...`, starting at `t=0`.
pub fn trace_episode<W: Write>(
    problem: &ProblemInstance,
    program: &Program,
    step_cap: u64,
    comm_radius: usize,
    out: &mut W,
) -> io::Result<EpisodeResult> {
    let mut sim = SimulationState::new(problem, comm_radius);
    write_trace_line(&sim, out)?;
    while !sim.all_solved() && sim.clock < step_cap {
        sim.step_world(program);
        write_trace_line(&sim, out)?;
    }
    let solved = sim.all_solved();
    let steps = if solved { sim.clock } else { step_cap };
    Ok(finish(&sim, solved, steps))
}

fn write_trace_line<W: Write>(sim: &SimulationState<'_>, out: &mut W) -> io::Result<()> {
    write!(out, "t={}", sim.clock)?;
    for robot in &sim.robots {
        write!(out, " robot {} {}", robot.id, robot.position)?;
    }
    writeln!(out)
}

fn finish(sim: &SimulationState<'_>, solved: bool, steps_used: u64) -> EpisodeResult {
    EpisodeResult {
        solved,
        steps_used,
        final_positions: sim.positions(),
    }
}

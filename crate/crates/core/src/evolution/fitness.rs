use crate::program::Program;
use crate::simulator::run_episode;
use crate::workspace::ProblemInstance;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EvaluationResult {
    /// Sum over examples of 0 (solved) or the squared remaining tree
    /// distances of all robots (unsolved).
    pub fitness: u64,
    pub per_example_steps: Vec<u64>,
    pub all_solved: bool,
    pub total_steps: u64,
}

/// Scores `program` on the fitness set.
///
/// Examples run in order, each capped at `|N|^2 * |R|^2` steps. A running
/// step total is kept against `budget` (`None` = unlimited); once it is
/// exhausted the remaining examples get a cap of zero, so they count as
/// unsolved with robots where the budget left them (at their starts for
/// examples never begun).
pub fn compute_fitness(
    program: &Program,
    fitness_set: &[ProblemInstance],
    budget: Option<u64>,
    comm_radius: usize,
) -> EvaluationResult {
    let mut fitness = 0;
    let mut per_example_steps = Vec::with_capacity(fitness_set.len());
    let mut all_solved = true;
    let mut total_steps = 0u64;

    for example in fitness_set {
        let remaining = budget.map_or(u64::MAX, |b| b.saturating_sub(total_steps));
        let cap = example.step_cap().min(remaining);
        let episode = run_episode(example, program, cap, comm_radius);
        total_steps += episode.steps_used;
        per_example_steps.push(episode.steps_used);
        if !episode.solved {
            all_solved = false;
            fitness += squared_distance_sum(example, &episode.final_positions);
        }
    }

    EvaluationResult {
        fitness,
        per_example_steps,
        all_solved,
        total_steps,
    }
}

fn squared_distance_sum(example: &ProblemInstance, positions: &[usize]) -> u64 {
    let ws = example.workspace();
    example
        .robots()
        .iter()
        .zip(positions)
        .map(|(robot, &at)| {
            let d = ws.distance(at, robot.goal) as u64;
            d * d
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::program::parse_program;
    use crate::workspace::{RobotSpec, Workspace};

    fn chain_problem(n: usize, robots: &[(usize, usize)]) -> ProblemInstance {
        let ws = Workspace::new(n, (1..n).map(|v| (v - 1, v))).unwrap();
        let robots = robots
            .iter()
            .enumerate()
            .map(|(id, &(start, goal))| RobotSpec { id, start, goal })
            .collect();
        ProblemInstance::new(ws, robots, "chain").unwrap()
    }

    fn program(text: &str) -> Program {
        parse_program(text).unwrap()
    }

    #[test]
    fn solved_examples_score_zero() {
        // The robot walks through its goal and ends away from it.
        let set = [chain_problem(6, &[(0, 2)])];
        let wander =
            program("(if-robot-is-solved (move-to-free-neighbor) (move-toward-objective))");
        let result = compute_fitness(&wander, &set, None, 2);
        assert_eq!(result.fitness, 0);
        assert!(result.all_solved);
        assert_eq!(result.per_example_steps, vec![2]);
        assert_eq!(result.total_steps, 2);
    }

    #[test]
    fn unsolved_single_robot_scores_squared_distance() {
        let set = [chain_problem(6, &[(1, 4)])];
        let stay = program("(if-robot-is-solved (stay) (stay))");
        let result = compute_fitness(&stay, &set, None, 2);
        assert_eq!(result.fitness, 9);
        assert!(!result.all_solved);
        assert_eq!(result.total_steps, set[0].step_cap());
    }

    #[test]
    fn unsolved_pair_sums_squares() {
        let set = [chain_problem(6, &[(1, 2), (3, 5)])];
        let stay = program("(if-robot-is-solved (stay) (stay))");
        assert_eq!(compute_fitness(&stay, &set, None, 2).fitness, 1 + 4);
    }

    #[test]
    fn budget_aborts_later_examples() {
        let set = [chain_problem(6, &[(0, 5)]), chain_problem(6, &[(0, 3)])];
        let walk = program("(if-robot-is-solved (stay) (move-toward-objective))");
        let full = compute_fitness(&walk, &set, None, 2);
        assert_eq!(full.per_example_steps, vec![5, 3]);
        assert_eq!(full.fitness, 0);

        // The budget runs out 2 steps into the first example.
        let tight = compute_fitness(&walk, &set, Some(2), 2);
        assert_eq!(tight.per_example_steps, vec![2, 0]);
        assert_eq!(tight.fitness, 9 + 9);
        assert!(!tight.all_solved);

        // Exactly enough for the first; the second never starts.
        let edge = compute_fitness(&walk, &set, Some(5), 2);
        assert_eq!(edge.per_example_steps, vec![5, 0]);
        assert_eq!(edge.fitness, 9);

        // Exactly the full total still solves everything.
        let exact = compute_fitness(&walk, &set, Some(8), 2);
        assert!(exact.all_solved);
        assert_eq!(exact.total_steps, 8);
    }

    #[test]
    fn pre_solved_examples_survive_an_exhausted_budget() {
        let set = [chain_problem(6, &[(0, 5)]), chain_problem(6, &[(3, 3)])];
        let walk = program("(if-robot-is-solved (stay) (move-toward-objective))");
        let result = compute_fitness(&walk, &set, Some(5), 2);
        assert!(result.all_solved);
        assert_eq!(result.fitness, 0);
    }
}

use std::collections::HashMap;
use std::io::{self, Write};

use rand::distributions::{Distribution, WeightedIndex};
use rand::Rng;

use super::fitness::{compute_fitness, EvaluationResult};
use super::operators::{
    asexual_reproduction, crossover, mutate, operator_counts, selection_weights,
};
use super::{ConfigError, GpConfig};
use crate::program::{random_program_with, Program};
use crate::workspace::ProblemInstance;

pub const HISTORY_CSV_HEADER: &str = "run,generation,best_fitness,mean_fitness,tau_b,solved_count";

// Bounds memory on long runs; the cache is a pure speed-up.
const CACHE_LIMIT: usize = 1 << 18;

#[derive(Debug, Clone, PartialEq)]
pub struct GenerationStats {
    pub run: usize,
    pub generation: usize,
    pub best_fitness: u64,
    pub mean_fitness: f64,
    /// Best total after this generation's updates; `None` while unbounded.
    pub tau_b: Option<u64>,
    /// Programs with fitness 0 in this generation.
    pub solved_count: usize,
}

/// Snapshot handed to observers after a generation is scored.
#[derive(Debug, Clone, Copy)]
pub struct GenerationView<'a> {
    pub run: usize,
    pub generation: usize,
    pub population: &'a [Program],
    pub evaluations: &'a [EvaluationResult],
    /// Budget the generation was scored against.
    pub tau_b: Option<u64>,
    pub weights: &'a [f64],
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvolutionOutcome {
    /// Fastest program that solved the whole fitness set, if any did.
    pub best: Option<Program>,
    pub best_total: Option<u64>,
    /// `(run, generation)` at which `best` was found.
    pub best_found_at: Option<(usize, usize)>,
    /// Lowest-fitness program ever scored (first found on ties) and its fitness.
    pub fittest: Program,
    pub fittest_fitness: u64,
    pub history: Vec<GenerationStats>,
}

pub fn evolve<R: Rng + ?Sized>(
    config: &GpConfig,
    fitness_set: &[ProblemInstance],
    rng: &mut R,
) -> Result<EvolutionOutcome, ConfigError> {
    evolve_observed(config, fitness_set, rng, |_| {})
}

/// Runs `config.runs` independent populations for `config.generations`
/// generations each, sharing the best-program archive.
///
/// Each generation is scored against the budget in force when it started;
/// the archive is then updated in population order, replacing the best
/// only on a strictly smaller total.
pub fn evolve_observed<R, F>(
    config: &GpConfig,
    fitness_set: &[ProblemInstance],
    rng: &mut R,
    mut observe: F,
) -> Result<EvolutionOutcome, ConfigError>
where
    R: Rng + ?Sized,
    F: FnMut(&GenerationView<'_>),
{
    config.validate()?;
    if fitness_set.is_empty() {
        return Err(ConfigError::EmptyFitnessSet);
    }

    let mut best: Option<Program> = None;
    let mut best_total: Option<u64> = None;
    let mut best_found_at = None;
    let mut fittest: Option<(Program, u64)> = None;
    let mut history = Vec::with_capacity(config.runs * config.generations);
    let mut cache: HashMap<Program, EvaluationResult> = HashMap::new();
    let size = config.population_size;

    for run in 0..config.runs {
        let mut population: Vec<Program> = (0..size)
            .map(|_| random_program_with(config.init_method, config.init_max_depth, rng))
            .collect();

        for generation in 0..config.generations {
            let budget = best_total;
            let evaluations: Vec<EvaluationResult> = population
                .iter()
                .map(|program| {
                    if let Some(hit) = cache.get(program) {
                        return hit.clone();
                    }
                    let result = compute_fitness(program, fitness_set, budget, config.comm_radius);
                    if cache.len() >= CACHE_LIMIT {
                        cache.clear();
                    }
                    cache.insert(program.clone(), result.clone());
                    result
                })
                .collect();

            for (program, result) in population.iter().zip(&evaluations) {
                if fittest.as_ref().is_none_or(|(_, f)| result.fitness < *f) {
                    fittest = Some((program.clone(), result.fitness));
                }
                if result.fitness == 0 && best_total.is_none_or(|t| result.total_steps < t) {
                    best = Some(program.clone());
                    best_total = Some(result.total_steps);
                    best_found_at = Some((run, generation));
                }
            }
            if best_total != budget {
                cache.clear();
            }

            let fitnesses: Vec<u64> = evaluations.iter().map(|e| e.fitness).collect();
            let weights = selection_weights(&fitnesses);
            history.push(GenerationStats {
                run,
                generation,
                best_fitness: *fitnesses.iter().min().expect("population is nonempty"),
                mean_fitness: fitnesses.iter().map(|&f| f as f64).sum::<f64>() / size as f64,
                tau_b: best_total,
                solved_count: fitnesses.iter().filter(|&&f| f == 0).count(),
            });
            observe(&GenerationView {
                run,
                generation,
                population: &population,
                evaluations: &evaluations,
                tau_b: budget,
                weights: &weights,
            });

            if generation + 1 < config.generations {
                population = breed(config, &population, &weights, rng);
            }
        }
    }

    let (fittest, fittest_fitness) = fittest.expect("at least one generation ran");
    Ok(EvolutionOutcome {
        best,
        best_total,
        best_found_at,
        fittest,
        fittest_fitness,
        history,
    })
}

fn breed<R: Rng + ?Sized>(
    config: &GpConfig,
    population: &[Program],
    weights: &[f64],
    rng: &mut R,
) -> Vec<Program> {
    let (n_repro, n_cross, n_mut) = operator_counts(
        population.len(),
        config.reproduction_rate,
        config.crossover_rate,
        config.mutation_rate,
    );
    let pick = WeightedIndex::new(weights).expect("selection weights are positive and finite");
    let mut next = asexual_reproduction(population, weights, n_repro, rng);

    for pair in 0..n_cross.div_ceil(2) {
        let a = &population[pick.sample(rng)];
        let b = &population[pick.sample(rng)];
        let (x, y) = crossover(a, b, config.max_depth, rng);
        if pair * 2 + 1 == n_cross {
            next.push(if rng.gen_bool(0.5) { x } else { y });
        } else {
            next.push(x);
            next.push(y);
        }
    }

    for _ in 0..n_mut {
        let parent = &population[pick.sample(rng)];
        next.push(mutate(parent, config.init_max_depth, config.max_depth, rng));
    }
    next
}

/// Writes the per-generation history as CSV. An unbounded best total is
/// written as `inf`.
pub fn write_history_csv<W: Write>(history: &[GenerationStats], out: &mut W) -> io::Result<()> {
    writeln!(out, "{HISTORY_CSV_HEADER}")?;
    for row in history {
        let tau = row
            .tau_b
            .map_or_else(|| "inf".to_string(), |t| t.to_string());
        writeln!(
            out,
            "{},{},{},{:.6},{},{}",
            row.run, row.generation, row.best_fitness, row.mean_fitness, tau, row.solved_count
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::program::parse_program;
    use crate::workspace::{RobotSpec, Workspace};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn chain_problem(n: usize, robots: &[(usize, usize)]) -> ProblemInstance {
        let ws = Workspace::new(n, (1..n).map(|v| (v - 1, v))).unwrap();
        let robots = robots
            .iter()
            .enumerate()
            .map(|(id, &(start, goal))| RobotSpec { id, start, goal })
            .collect();
        ProblemInstance::new(ws, robots, "chain").unwrap()
    }

    fn small_config() -> GpConfig {
        GpConfig {
            population_size: 60,
            runs: 2,
            generations: 8,
            ..GpConfig::default()
        }
    }

    #[test]
    fn single_robot_line_is_solved_quickly() {
        let set = [chain_problem(6, &[(0, 5)])];
        let config = GpConfig {
            population_size: 200,
            runs: 1,
            generations: 5,
            ..GpConfig::default()
        };
        let outcome = evolve(&config, &set, &mut ChaCha8Rng::seed_from_u64(3)).unwrap();
        let best = outcome.best.expect("a solving program");
        assert_eq!(outcome.best_total, Some(5));
        assert_eq!(compute_fitness(&best, &set, None, 2).fitness, 0);
        let trivial =
            parse_program("(if-robot-at-destination (stay) (move-toward-objective))").unwrap();
        assert_eq!(compute_fitness(&trivial, &set, None, 2).total_steps, 5);
    }

    #[test]
    fn ledger_and_population_invariants() {
        let set = [
            chain_problem(7, &[(0, 4), (6, 5)]),
            chain_problem(5, &[(4, 0)]),
        ];
        let config = small_config();
        let mut sizes = Vec::new();
        let mut budgets = Vec::new();
        let outcome = evolve_observed(&config, &set, &mut ChaCha8Rng::seed_from_u64(11), |view| {
            sizes.push(view.population.len());
            budgets.push(view.tau_b);
            let total: f64 = view.weights.iter().sum();
            assert!((total - 1.0).abs() < 1e-9);
            assert!(view
                .population
                .iter()
                .all(|p| (1..=config.max_depth).contains(&p.depth())));
        })
        .unwrap();
        assert!(sizes.iter().all(|&s| s == config.population_size));
        assert_eq!(outcome.history.len(), config.runs * config.generations);
        let as_key = |t: &Option<u64>| t.unwrap_or(u64::MAX);
        assert!(budgets.windows(2).all(|w| as_key(&w[1]) <= as_key(&w[0])));
        assert!(outcome
            .history
            .windows(2)
            .all(|w| as_key(&w[1].tau_b) <= as_key(&w[0].tau_b)));
        if let Some(best) = &outcome.best {
            let check = compute_fitness(best, &set, None, 2);
            assert_eq!(check.fitness, 0);
            assert_eq!(Some(check.total_steps), outcome.best_total);
        }
    }

    #[test]
    fn same_seed_same_outcome() {
        let set = [chain_problem(6, &[(0, 3), (5, 4)])];
        let config = small_config();
        let a = evolve(&config, &set, &mut ChaCha8Rng::seed_from_u64(5)).unwrap();
        let b = evolve(&config, &set, &mut ChaCha8Rng::seed_from_u64(5)).unwrap();
        assert_eq!(a, b);
        let (mut x, mut y) = (Vec::new(), Vec::new());
        write_history_csv(&a.history, &mut x).unwrap();
        write_history_csv(&b.history, &mut y).unwrap();
        assert_eq!(x, y);
        assert_eq!(String::from_utf8(x).unwrap().lines().count(), 1 + 16);
    }

    #[test]
    fn rejects_bad_input() {
        let set = [chain_problem(4, &[(0, 3)])];
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let config = GpConfig {
            reproduction_rate: 0.5,
            crossover_rate: 0.5,
            mutation_rate: 0.5,
            ..small_config()
        };
        assert!(matches!(
            evolve(&config, &set, &mut rng),
            Err(ConfigError::RatesSum(_))
        ));
        assert_eq!(
            evolve(&small_config(), &[], &mut rng),
            Err(ConfigError::EmptyFitnessSet)
        );
    }

    #[test]
    fn odd_crossover_counts_keep_the_size() {
        let config = GpConfig {
            population_size: 7,
            ..GpConfig::default()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let population: Vec<Program> = (0..7)
            .map(|_| crate::program::random_program(2, &mut rng))
            .collect();
        let weights = selection_weights(&[0, 1, 2, 3, 4, 5, 6]);
        for _ in 0..20 {
            assert_eq!(breed(&config, &population, &weights, &mut rng).len(), 7);
        }
    }
}

use rand::distributions::{Distribution, WeightedIndex};
use rand::Rng;

use crate::program::{grow_subtree, random_program, Program};

/// Re-draws allowed before an operator falls back to copying its parents.
pub const MAX_OPERATOR_ATTEMPTS: usize = 10;

/// Fitness-proportionate probabilities `β_k / Σβ` with `β_k = 1 / (1 + F_k)`.
pub fn selection_weights(fitnesses: &[u64]) -> Vec<f64> {
    let betas: Vec<f64> = fitnesses.iter().map(|&f| 1.0 / (1.0 + f as f64)).collect();
    let total: f64 = betas.iter().sum();
    betas.into_iter().map(|b| b / total).collect()
}

/// Splits a population of `size` into reproduction, crossover and mutation
/// counts. Each count is rounded; any rounding residue is absorbed by
/// reproduction (then mutation, then crossover, if reproduction runs dry)
/// so the counts always sum to `size`.
pub fn operator_counts(
    size: usize,
    reproduction: f64,
    crossover: f64,
    mutation: f64,
) -> (usize, usize, usize) {
    let round = |rate: f64| (rate * size as f64).round() as usize;
    let (mut a, mut c, mut m) = (round(reproduction), round(crossover), round(mutation));
    let total = a + c + m;
    if total < size {
        a += size - total;
    } else {
        let mut excess = total - size;
        for count in [&mut a, &mut m, &mut c] {
            let take = excess.min(*count);
            *count -= take;
            excess -= take;
        }
    }
    (a, c, m)
}

fn weighted_index(weights: &[f64]) -> WeightedIndex<f64> {
    WeightedIndex::new(weights).expect("selection weights are positive and finite")
}

/// `count` independent weighted draws (with replacement), each copied.
pub fn asexual_reproduction<R: Rng + ?Sized>(
    population: &[Program],
    weights: &[f64],
    count: usize,
    rng: &mut R,
) -> Vec<Program> {
    if count == 0 {
        return Vec::new();
    }
    let dist = weighted_index(weights);
    (0..count)
        .map(|_| population[dist.sample(rng)].clone())
        .collect()
}

/// Swaps two uniformly chosen subtrees. Returns `None` if no valid pair of
/// offspring (depth in `1..=max_depth`) was found in
/// [`MAX_OPERATOR_ATTEMPTS`] draws.
pub fn try_crossover<R: Rng + ?Sized>(
    parent_a: &Program,
    parent_b: &Program,
    max_depth: usize,
    rng: &mut R,
) -> Option<(Program, Program)> {
    let (size_a, size_b) = (parent_a.size(), parent_b.size());
    for _ in 0..MAX_OPERATOR_ATTEMPTS {
        let point_a = rng.gen_range(0..size_a);
        let point_b = rng.gen_range(0..size_b);
        let mut child_a = parent_a.root().clone();
        let mut child_b = parent_b.root().clone();
        let slot_a = child_a.nth_mut(point_a).expect("point within tree");
        let slot_b = child_b.nth_mut(point_b).expect("point within tree");
        std::mem::swap(slot_a, slot_b);
        if let (Ok(a), Ok(b)) = (
            Program::new(child_a, max_depth),
            Program::new(child_b, max_depth),
        ) {
            return Some((a, b));
        }
    }
    None
}

/// Subtree crossover, falling back to copies of the parents.
pub fn crossover<R: Rng + ?Sized>(
    parent_a: &Program,
    parent_b: &Program,
    max_depth: usize,
    rng: &mut R,
) -> (Program, Program) {
    try_crossover(parent_a, parent_b, max_depth, rng)
        .unwrap_or_else(|| (parent_a.clone(), parent_b.clone()))
}

/// Replaces a uniformly chosen subtree with a freshly grown one of depth at
/// most `subtree_depth`. Choosing the root yields a whole new random
/// program. Falls back to a copy of the parent if the result keeps
/// exceeding `max_depth`.
pub fn mutate<R: Rng + ?Sized>(
    parent: &Program,
    subtree_depth: usize,
    max_depth: usize,
    rng: &mut R,
) -> Program {
    let size = parent.size();
    for _ in 0..MAX_OPERATOR_ATTEMPTS {
        let point = rng.gen_range(0..size);
        if point == 0 {
            let fresh = random_program(subtree_depth, rng);
            if fresh.depth() <= max_depth {
                return fresh;
            }
            continue;
        }
        let mut child = parent.root().clone();
        *child.nth_mut(point).expect("point within tree") = grow_subtree(subtree_depth, rng);
        if let Ok(program) = Program::new(child, max_depth) {
            return program;
        }
    }
    parent.clone()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::program::{parse_program, Node, TerminalKind, DEFAULT_MAX_DEPTH};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn p(text: &str) -> Program {
        parse_program(text).unwrap()
    }

    #[test]
    fn weights_examples() {
        let w = selection_weights(&[0, 1]);
        assert!((w[0] - 2.0 / 3.0).abs() < 1e-12 && (w[1] - 1.0 / 3.0).abs() < 1e-12);
        let w = selection_weights(&[0, 3]);
        assert!((w[0] - 0.8).abs() < 1e-12 && (w[1] - 0.2).abs() < 1e-12);
        let w = selection_weights(&[5, 5, 5, 5]);
        assert!(w.iter().all(|&x| (x - 0.25).abs() < 1e-12));
    }

    #[test]
    fn counts_always_fill_the_population() {
        assert_eq!(operator_counts(2000, 0.1, 0.8, 0.1), (200, 1600, 200));
        assert_eq!(operator_counts(5, 0.1, 0.8, 0.1), (0, 4, 1));
        assert_eq!(operator_counts(7, 0.1, 0.8, 0.1), (0, 6, 1));
        assert_eq!(operator_counts(10, 0.1, 0.8, 0.1), (1, 8, 1));
        assert_eq!(operator_counts(4, 0.1, 0.8, 0.1), (1, 3, 0));
        for size in 1..200 {
            let (a, c, m) = operator_counts(size, 0.1, 0.8, 0.1);
            assert_eq!(a + c + m, size);
            let (a, c, m) = operator_counts(size, 1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0);
            assert_eq!(a + c + m, size);
        }
    }

    #[test]
    fn reproduction_copies() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let pop = vec![
            p("(if-robot-is-solved (stay) (stay))"),
            p("(if-robot-at-branch (stay) (stay))"),
        ];
        assert!(asexual_reproduction(&pop, &[0.5, 0.5], 0, &mut rng).is_empty());
        let copies = asexual_reproduction(&pop, &[1.0, 0.0], 20, &mut rng);
        assert_eq!(copies.len(), 20);
        assert!(copies.iter().all(|c| c == &pop[0]));
    }

    #[test]
    fn root_swap_exchanges_parents() {
        let a = p("(if-robot-is-solved (stay) (move-toward-objective))");
        let b =
            p("(if-robot-at-branch (move-to-free-neighbor) (if-robot-is-solved (stay) (stay)))");
        // Scan seeds for a draw that picks both roots first.
        let found = (0..2000u64).any(|seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let (pa, pb) = (rng.gen_range(0..a.size()), rng.gen_range(0..b.size()));
            if (pa, pb) != (0, 0) {
                return false;
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let (x, y) = crossover(&a, &b, DEFAULT_MAX_DEPTH, &mut rng);
            assert_eq!((x, y), (b.clone(), a.clone()));
            true
        });
        assert!(found);
    }

    #[test]
    fn crossover_falls_back_to_parents() {
        // Depth-1 parents under a depth-1 cap: the only valid swaps are
        // leaf-for-leaf or root-for-root; a cap of 0 admits nothing.
        let a = p("(if-robot-is-solved (stay) (move-toward-objective))");
        let b = p("(if-robot-at-branch (move-to-free-neighbor) (stay))");
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!(try_crossover(&a, &b, 0, &mut rng).is_none());
        assert_eq!(crossover(&a, &b, 0, &mut rng), (a.clone(), b.clone()));
    }

    #[test]
    fn mutating_a_leaf_of_a_depth_one_program() {
        let parent = p("(if-robot-is-solved (stay) (move-toward-objective))");
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..500 {
            let child = mutate(&parent, 2, DEFAULT_MAX_DEPTH, &mut rng);
            assert!((1..=3).contains(&child.depth()));
        }
    }

    #[test]
    fn mutation_respects_the_depth_cap() {
        let parent = p("(if-robot-is-solved (if-robot-at-branch (stay) (stay)) (stay))");
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..500 {
            assert!(mutate(&parent, 2, 2, &mut rng).depth() <= 2);
        }
        // A leaf-only replacement keeps depth 1 programs at depth 1.
        let flat = p("(if-robot-is-solved (stay) (stay))");
        for _ in 0..100 {
            let child = mutate(&flat, 1, 1, &mut rng);
            assert_eq!(child.depth(), 1);
            assert!(matches!(child.root(), Node::Function { .. }));
        }
        let _ = TerminalKind::Stay;
    }

    proptest! {
        #[test]
        fn crossover_conserves_symbols(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = random_program(4, &mut rng);
            let b = random_program(4, &mut rng);
            if let Some((x, y)) = try_crossover(&a, &b, DEFAULT_MAX_DEPTH, &mut rng) {
                let before: Vec<usize> = a.symbol_histogram().iter().zip(b.symbol_histogram()).map(|(p, q)| p + q).collect();
                let after: Vec<usize> = x.symbol_histogram().iter().zip(y.symbol_histogram()).map(|(p, q)| p + q).collect();
                prop_assert_eq!(before, after);
                prop_assert!((1..=DEFAULT_MAX_DEPTH).contains(&x.depth()));
                prop_assert!((1..=DEFAULT_MAX_DEPTH).contains(&y.depth()));
            }
        }

        #[test]
        fn offspring_are_valid_programs(seed in any::<u64>(), cap in 1usize..8) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = random_program(cap.min(4), &mut rng);
            let b = random_program(cap.min(4), &mut rng);
            let (x, y) = crossover(&a, &b, cap, &mut rng);
            let m = mutate(&a, 2, cap, &mut rng);
            for child in [x, y, m] {
                prop_assert!((1..=cap).contains(&child.depth()));
                let conditional_root = matches!(child.root(), Node::Function { .. });
                prop_assert!(conditional_root);
            }
        }
    }
}

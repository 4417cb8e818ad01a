use std::fmt;
use std::str::FromStr;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{NodeId, ProblemInstance, RobotSpec, Workspace, WorkspaceError};

const MAX_GENERATION_ATTEMPTS: usize = 10_000;

/// How many robots to place on a generated workspace.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RobotCountRule {
    /// `#leaves - 1`, floored at 1 and clamped to `N - 2`.
    LeavesMinusOne,
    /// `floor(multiplier * #leaves)`, floored at 1 and clamped to `N - 2`.
    LeafMultiplier(f64),
    /// Exactly this many robots; trees too small to hold them are regenerated.
    Explicit(usize),
}

impl RobotCountRule {
    /// Robot count for a tree with the given node and leaf counts. The result
    /// can still exceed `nodes - 2` on tiny trees; callers regenerate those.
    pub fn robot_count(&self, nodes: usize, leaves: usize) -> usize {
        let clamp = |raw: usize| raw.min(nodes.saturating_sub(2)).max(1);
        match *self {
            RobotCountRule::LeavesMinusOne => clamp(leaves.saturating_sub(1)),
            RobotCountRule::LeafMultiplier(m) => clamp((m * leaves as f64).floor() as usize),
            RobotCountRule::Explicit(k) => k,
        }
    }

    fn needs_leaves(&self) -> bool {
        !matches!(self, RobotCountRule::Explicit(_))
    }
}

impl fmt::Display for RobotCountRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RobotCountRule::LeavesMinusOne => f.write_str("leaves-minus-one"),
            RobotCountRule::LeafMultiplier(m) => write!(f, "leaf-multiplier:{m}"),
            RobotCountRule::Explicit(k) => write!(f, "explicit:{k}"),
        }
    }
}

impl FromStr for RobotCountRule {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "leaves-minus-one" {
            return Ok(RobotCountRule::LeavesMinusOne);
        }
        if let Some(value) = s.strip_prefix("leaf-multiplier:") {
            let m: f64 = value
                .parse()
                .map_err(|_| format!("invalid leaf multiplier `{value}`"))?;
            if !(m.is_finite() && m > 0.0) {
                return Err(format!("leaf multiplier must be positive, got {m}"));
            }
            return Ok(RobotCountRule::LeafMultiplier(m));
        }
        if let Some(value) = s.strip_prefix("explicit:") {
            let k: usize = value
                .parse()
                .map_err(|_| format!("invalid robot count `{value}`"))?;
            if k == 0 {
                return Err("at least 1 robot is required".to_string());
            }
            return Ok(RobotCountRule::Explicit(k));
        }
        Err(format!(
            "unknown robot rule `{s}` (expected leaves-minus-one, leaf-multiplier:<x> or explicit:<k>)"
        ))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorParams {
    /// Recursion depth of the generator; bounds the tree height.
    pub seed_depth: u32,
    /// Maximum number of children drawn per node.
    pub max_branching: u32,
    pub rng_seed: u64,
    pub robot_count_rule: RobotCountRule,
}

impl GeneratorParams {
    pub fn new(seed_depth: u32, max_branching: u32, rng_seed: u64) -> Self {
        GeneratorParams {
            seed_depth,
            max_branching,
            rng_seed,
            robot_count_rule: RobotCountRule::LeavesMinusOne,
        }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.rng_seed)
    }
}

/// Random tree generator: every call draws `n` uniformly from `0..=b`,
/// creates `n` children and recurses into each with one less depth. A call
/// at depth 0 returns immediately. Node ids follow creation (pre-order)
/// order with the root at 0.
pub fn generate_mst<R: Rng + ?Sized>(params: &GeneratorParams, rng: &mut R) -> Workspace {
    fn expand<R: Rng + ?Sized>(
        node: NodeId,
        depth: u32,
        branching: u32,
        rng: &mut R,
        edges: &mut Vec<(NodeId, NodeId)>,
    ) {
        if depth == 0 {
            return;
        }
        let children = rng.gen_range(0..=branching);
        for _ in 0..children {
            let child = edges.len() + 1;
            edges.push((node, child));
            expand(child, depth - 1, branching, rng, edges);
        }
    }

    let mut edges = Vec::new();
    expand(0, params.seed_depth, params.max_branching, rng, &mut edges);
    Workspace::new(edges.len() + 1, edges).expect("generator always produces a tree")
}

/// Places `robot_count` robots with distinct random starts and distinct
/// random goals, sampled independently.
pub fn build_problem<R: Rng + ?Sized>(
    workspace: Workspace,
    robot_count: usize,
    rng: &mut R,
) -> Result<ProblemInstance, WorkspaceError> {
    let nodes = workspace.node_count();
    if robot_count + 2 > nodes {
        return Err(WorkspaceError::TooManyRobots {
            robots: robot_count,
            nodes,
        });
    }
    let starts = sample(rng, nodes, robot_count).into_vec();
    let goals = sample(rng, nodes, robot_count).into_vec();
    let robots = starts
        .into_iter()
        .zip(goals)
        .enumerate()
        .map(|(id, (start, goal))| RobotSpec { id, start, goal })
        .collect();
    ProblemInstance::new(workspace, robots, "generated")
}

/// Generates a workspace and places robots according to the count rule,
/// redrawing trees that are too small (fewer than `robots + 2` nodes, or
/// fewer than two leaves when the rule depends on leaves).
pub fn generate_problem<S, P>(
    params: &GeneratorParams,
    shape_rng: &mut S,
    placement_rng: &mut P,
) -> Result<ProblemInstance, WorkspaceError>
where
    S: Rng + ?Sized,
    P: Rng + ?Sized,
{
    if params.robot_count_rule == RobotCountRule::Explicit(0) {
        return Err(WorkspaceError::NoRobots);
    }
    for _ in 0..MAX_GENERATION_ATTEMPTS {
        let workspace = generate_mst(params, shape_rng);
        let nodes = workspace.node_count();
        let leaves = workspace.leaf_nodes().len();
        if params.robot_count_rule.needs_leaves() && leaves < 2 {
            continue;
        }
        let robots = params.robot_count_rule.robot_count(nodes, leaves);
        if robots + 2 > nodes {
            continue;
        }
        return build_problem(workspace, robots, placement_rng);
    }
    Err(WorkspaceError::GenerationExhausted(MAX_GENERATION_ATTEMPTS))
}

//! Time-stepped execution of a program on a problem instance.
//!
//! Every step, robots run the program one after another in ascending id
//! order. Occupancy changes are visible immediately to robots later in the
//! same step. Each robot ends its traversal of the decision tree on exactly
//! one action, which is guarded against moving into an occupied node or
//! across an edge already used this step.

mod episode;

use fixedbitset::FixedBitSet;

use crate::program::{FunctionKind, Node, Program, TerminalKind};
use crate::workspace::{NodeId, ProblemInstance, RobotId, Workspace};

pub use episode::{run_episode, run_episode_naive, trace_episode, EpisodeResult};

/// Default communication radius `ρ`.
pub const DEFAULT_COMM_RADIUS: usize = 2;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RobotState {
    pub position: NodeId,
    pub branch_target: Option<NodeId>,
    pub has_visited_goal: bool,
    pub visited: FixedBitSet,
    pub id: RobotId,
    pub goal: NodeId,
}

impl RobotState {
    /// Where the robot is currently heading: its branch target if set,
    /// otherwise its goal.
    pub fn target(&self) -> NodeId {
        self.branch_target.unwrap_or(self.goal)
    }

    /// Current path: nodes after the current position up to and including
    /// the target.
    pub fn current_path(&self, workspace: &Workspace) -> Vec<NodeId> {
        workspace.tree_path(self.position, self.target())
    }
}

/// One executed action, as reported to step observers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Action {
    pub robot: RobotId,
    pub terminal: TerminalKind,
    pub from: NodeId,
    pub to: NodeId,
}

#[derive(Debug, Clone)]
pub struct SimulationState<'a> {
    problem: &'a ProblemInstance,
    robots: Vec<RobotState>,
    occupancy: Vec<Option<RobotId>>,
    edges_used: Vec<(NodeId, NodeId)>,
    clock: u64,
    comm_radius: usize,
    solved_count: usize,
    changed: bool,
}

impl<'a> SimulationState<'a> {
    /// Every robot at its start at `t = 0`.
    pub fn new(problem: &'a ProblemInstance, comm_radius: usize) -> Self {
        let nodes = problem.workspace().node_count();
        let mut occupancy = vec![None; nodes];
        let robots: Vec<RobotState> = problem
            .robots()
            .iter()
            .map(|spec| {
                occupancy[spec.start] = Some(spec.id);
                let mut visited = FixedBitSet::with_capacity(nodes);
                visited.insert(spec.start);
                RobotState {
                    position: spec.start,
                    branch_target: None,
                    has_visited_goal: spec.start == spec.goal,
                    visited,
                    id: spec.id,
                    goal: spec.goal,
                }
            })
            .collect();
        let solved_count = robots.iter().filter(|r| r.has_visited_goal).count();
        SimulationState {
            problem,
            robots,
            occupancy,
            edges_used: Vec::new(),
            clock: 0,
            comm_radius,
            solved_count,
            changed: false,
        }
    }

    pub fn problem(&self) -> &'a ProblemInstance {
        self.problem
    }

    fn workspace(&self) -> &'a Workspace {
        self.problem.workspace()
    }

    pub fn robots(&self) -> &[RobotState] {
        &self.robots
    }

    pub fn robot(&self, id: RobotId) -> &RobotState {
        &self.robots[id]
    }

    pub fn clock(&self) -> u64 {
        self.clock
    }

    pub fn comm_radius(&self) -> usize {
        self.comm_radius
    }

    pub fn occupant(&self, node: NodeId) -> Option<RobotId> {
        self.occupancy[node]
    }

    /// Edges traversed so far in the current step, as `(min, max)` pairs.
    pub fn edges_used_this_step(&self) -> &[(NodeId, NodeId)] {
        &self.edges_used
    }

    pub fn positions(&self) -> Vec<NodeId> {
        self.robots.iter().map(|r| r.position).collect()
    }

    /// Whether every robot has visited its goal.
    pub fn all_solved(&self) -> bool {
        self.solved_count == self.robots.len()
    }

    /// Sets a robot's branch target directly (used to build test fixtures).
    pub fn set_branch_target(&mut self, robot: RobotId, target: Option<NodeId>) {
        self.robots[robot].branch_target = target;
    }

    fn for_each_in_network(&self, robot: RobotId, mut f: impl FnMut(RobotId)) {
        fn visit(
            ws: &Workspace,
            occupancy: &[Option<RobotId>],
            node: NodeId,
            came_from: NodeId,
            remaining: usize,
            f: &mut impl FnMut(RobotId),
        ) {
            if let Some(occupant) = occupancy[node] {
                f(occupant);
            }
            if remaining == 0 {
                return;
            }
            for &next in ws.neighbors(node) {
                if next != came_from {
                    visit(ws, occupancy, next, node, remaining - 1, f);
                }
            }
        }
        let origin = self.robots[robot].position;
        visit(
            self.workspace(),
            &self.occupancy,
            origin,
            usize::MAX,
            self.comm_radius,
            &mut |other| {
                if other != robot {
                    f(other)
                }
            },
        );
    }

    /// Robots within `comm_radius` edges of `robot`, excluding itself, in
    /// ascending id order.
    pub fn comm_network(&self, robot: RobotId) -> Vec<RobotId> {
        let mut members = Vec::new();
        self.for_each_in_network(robot, |other| members.push(other));
        members.sort_unstable();
        members
    }

    fn is_on_path_of(&self, node: NodeId, robot: &RobotState) -> bool {
        self.workspace()
            .on_path(robot.position, robot.target(), node)
    }

    /// Evaluates a condition for `robot`. Only
    /// [`FunctionKind::TwoRobotsOnEachOthersPath`] mutates state: when it
    /// holds, the robot and its lowest-id matching partner both retarget to
    /// the branch node nearest the querying robot.
    pub fn eval_condition(&mut self, robot: RobotId, kind: FunctionKind) -> bool {
        let ws = self.workspace();
        let me = &self.robots[robot];
        match kind {
            FunctionKind::TwoRobotsOnEachOthersPath => {
                let mut partner: Option<RobotId> = None;
                self.for_each_in_network(robot, |other| {
                    if partner.is_some_and(|p| p < other) {
                        return;
                    }
                    let them = &self.robots[other];
                    if self.is_on_path_of(me.position, them)
                        && self.is_on_path_of(them.position, me)
                    {
                        partner = Some(other);
                    }
                });
                let (Some(partner), Some(branch)) = (partner, ws.nearest_branch(me.position))
                else {
                    return false;
                };
                for id in [robot, partner] {
                    let state = &mut self.robots[id];
                    if state.branch_target != Some(branch) {
                        state.branch_target = Some(branch);
                        self.changed = true;
                    }
                }
                true
            }
            FunctionKind::NeighborIsSurrounded => ws.neighbors(me.position).iter().any(|&n| {
                self.occupancy[n].is_some()
                    && ws.neighbors(n).iter().all(|&m| self.occupancy[m].is_some())
            }),
            FunctionKind::RobotAtBranch => me.branch_target == Some(me.position),
            FunctionKind::RobotAtDestination => me.position == me.goal,
            FunctionKind::RobotMovingToBranch => me.branch_target.is_some_and(|b| b != me.position),
            FunctionKind::NeighborOnPathIsFree => ws
                .next_hop(me.position, me.target())
                .is_some_and(|n| self.occupancy[n].is_none()),
            FunctionKind::RobotIsSolved => me.has_visited_goal,
            FunctionKind::OnPathOfRobotInNetwork => {
                let mut found = false;
                self.for_each_in_network(robot, |other| {
                    found = found || self.is_on_path_of(me.position, &self.robots[other]);
                });
                found
            }
            FunctionKind::RobotInNetworkMovingToBranch => {
                let mut found = false;
                self.for_each_in_network(robot, |other| {
                    let them = &self.robots[other];
                    found = found || them.branch_target.is_some_and(|b| b != them.position);
                });
                found
            }
        }
    }

    /// Executes an action for `robot` and returns its new position. The
    /// robot stays put when the action yields no move, the destination is
    /// occupied, or the edge was already traversed this step.
    pub fn apply_terminal(&mut self, robot: RobotId, kind: TerminalKind) -> NodeId {
        let ws = self.workspace();
        let me = &self.robots[robot];
        let from = me.position;
        let candidate = match kind {
            TerminalKind::MoveTowardBranch => me.branch_target.and_then(|b| ws.next_hop(from, b)),
            TerminalKind::MoveToFreeNeighbor => ws
                .neighbors(from)
                .iter()
                .copied()
                .find(|&n| self.occupancy[n].is_none() && !me.visited.contains(n)),
            TerminalKind::MoveTowardObjective => ws.next_hop(from, me.target()),
            TerminalKind::Stay => None,
        };
        let Some(to) = candidate else {
            return from;
        };
        let edge = (from.min(to), from.max(to));
        if self.occupancy[to].is_some() || self.edges_used.contains(&edge) {
            return from;
        }

        self.occupancy[from] = None;
        self.occupancy[to] = Some(robot);
        self.edges_used.push(edge);
        self.changed = true;
        let me = &mut self.robots[robot];
        me.position = to;
        me.visited.insert(to);
        if me.branch_target == Some(from) {
            me.branch_target = None;
        }
        if to == me.goal && !me.has_visited_goal {
            me.has_visited_goal = true;
            self.solved_count += 1;
        }
        to
    }

    /// Walks the decision tree for `robot` and returns the action it reaches.
    pub fn decide(&mut self, robot: RobotId, program: &Program) -> TerminalKind {
        let mut node = program.root();
        loop {
            match node {
                Node::Terminal(kind) => return *kind,
                Node::Function {
                    kind,
                    on_true,
                    on_false,
                } => {
                    node = if self.eval_condition(robot, *kind) {
                        on_true
                    } else {
                        on_false
                    };
                }
            }
        }
    }

    /// Advances the world by one time step. Returns whether any state
    /// changed; an unchanged step means the episode is at a fixed point.
    pub fn step_world(&mut self, program: &Program) -> bool {
        self.step_world_observed(program, |_| {})
    }

    /// Like [`step_world`](Self::step_world), reporting every executed action.
    pub fn step_world_observed(
        &mut self,
        program: &Program,
        mut observe: impl FnMut(Action),
    ) -> bool {
        self.edges_used.clear();
        self.changed = false;
        for robot in 0..self.robots.len() {
            let from = self.robots[robot].position;
            let terminal = self.decide(robot, program);
            let to = self.apply_terminal(robot, terminal);
            observe(Action {
                robot,
                terminal,
                from,
                to,
            });
        }
        self.clock += 1;
        self.changed
    }

    // Full dynamic state, excluding the clock.
    fn same_state(&self, snapshot: &[RobotState]) -> bool {
        self.robots.as_slice() == snapshot
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::program::parse_program;
    use crate::workspace::{canonical_scenarios, RobotSpec};

    fn problem(
        nodes: usize,
        edges: &[(usize, usize)],
        robots: &[(usize, usize)],
    ) -> ProblemInstance {
        let ws = Workspace::new(nodes, edges.iter().copied()).unwrap();
        let robots = robots
            .iter()
            .enumerate()
            .map(|(id, &(start, goal))| RobotSpec { id, start, goal })
            .collect();
        ProblemInstance::new(ws, robots, "test").unwrap()
    }

    fn chain(n: usize) -> Vec<(usize, usize)> {
        (1..n).map(|v| (v - 1, v)).collect()
    }

    #[test]
    fn init_state() {
        let p = problem(6, &chain(6), &[(2, 2), (0, 5)]);
        let sim = SimulationState::new(&p, 2);
        assert_eq!(sim.clock(), 0);
        assert!(sim.robot(0).has_visited_goal);
        assert!(!sim.robot(1).has_visited_goal);
        assert_eq!(sim.occupancy.iter().flatten().count(), 2);
        for r in sim.robots() {
            assert_eq!(r.visited.count_ones(..), 1);
            assert!(r.visited.contains(r.position));
            assert_eq!(r.branch_target, None);
        }
    }

    #[test]
    fn comm_network_on_star() {
        // Star centered at 0 with leaves 1..=4; robots at 1, 0 and 3.
        let p = problem(
            6,
            &[(0, 1), (0, 2), (0, 3), (0, 4), (4, 5)],
            &[(1, 2), (0, 4), (3, 1)],
        );
        let sim = SimulationState::new(&p, 2);
        assert_eq!(sim.comm_network(0), vec![1, 2]);
        let tight = SimulationState::new(&p, 1);
        assert_eq!(tight.comm_network(0), vec![1]);
        assert_eq!(tight.comm_network(1), vec![0, 2]);
    }

    #[test]
    fn comm_network_is_empty_when_far_apart() {
        let p = problem(6, &chain(6), &[(0, 1), (3, 4)]);
        let sim = SimulationState::new(&p, 1);
        assert!(sim.comm_network(0).is_empty());
        assert!(sim.comm_network(1).is_empty());
    }

    #[test]
    fn two_robots_on_each_others_path_retargets_both() {
        let scenarios = canonical_scenarios();
        let mut sim = SimulationState::new(&scenarios[0], 2);
        assert!(sim.eval_condition(0, FunctionKind::TwoRobotsOnEachOthersPath));
        assert_eq!(sim.robot(0).branch_target, Some(1));
        assert_eq!(sim.robot(1).branch_target, Some(1));
        assert!(sim.eval_condition(0, FunctionKind::RobotMovingToBranch));
        assert!(sim.eval_condition(1, FunctionKind::RobotInNetworkMovingToBranch));
    }

    #[test]
    fn mutual_paths_without_branch_node_is_false() {
        let p = problem(5, &chain(5), &[(1, 3), (2, 0)]);
        let mut sim = SimulationState::new(&p, 2);
        assert!(!sim.eval_condition(0, FunctionKind::TwoRobotsOnEachOthersPath));
        assert_eq!(sim.robot(0).branch_target, None);
        assert_eq!(sim.robot(1).branch_target, None);
    }

    #[test]
    fn lowest_id_partner_is_matched() {
        // Robot 0 at 1 heads to 4; robots 1 (at 2) and 2 (at 3) both head
        // back through node 1. Both qualify; only robot 1 is retargeted.
        let edges = [(0, 1), (1, 2), (2, 3), (3, 4), (2, 5), (5, 6)];
        let p = problem(7, &edges, &[(1, 4), (2, 0), (3, 1)]);
        let mut sim = SimulationState::new(&p, 2);
        assert!(sim.eval_condition(0, FunctionKind::TwoRobotsOnEachOthersPath));
        assert_eq!(sim.robot(0).branch_target, Some(2));
        assert_eq!(sim.robot(1).branch_target, Some(2));
        assert_eq!(sim.robot(2).branch_target, None);
    }

    #[test]
    fn lone_robot_network_conditions_are_false() {
        let p = problem(5, &[(0, 1), (1, 2), (1, 3), (3, 4)], &[(0, 4)]);
        let mut sim = SimulationState::new(&p, 2);
        for kind in [
            FunctionKind::TwoRobotsOnEachOthersPath,
            FunctionKind::OnPathOfRobotInNetwork,
            FunctionKind::RobotInNetworkMovingToBranch,
            FunctionKind::NeighborIsSurrounded,
        ] {
            assert!(!sim.eval_condition(0, kind), "{kind:?}");
        }
    }

    #[test]
    fn destination_conditions() {
        let p = problem(4, &chain(4), &[(2, 2)]);
        let mut sim = SimulationState::new(&p, 2);
        assert!(sim.eval_condition(0, FunctionKind::RobotAtDestination));
        assert!(sim.eval_condition(0, FunctionKind::RobotIsSolved));
        // Empty path: no next node to be free.
        assert!(!sim.eval_condition(0, FunctionKind::NeighborOnPathIsFree));
        assert!(!sim.eval_condition(0, FunctionKind::RobotAtBranch));
    }

    #[test]
    fn neighbor_on_path_and_surrounded() {
        let scenarios = canonical_scenarios();
        let mut sim = SimulationState::new(&scenarios[2], 2);
        // Robot 0 at leaf 0 is next to robot 1, whose neighbors are all occupied.
        assert!(sim.eval_condition(0, FunctionKind::NeighborIsSurrounded));
        assert!(!sim.eval_condition(0, FunctionKind::NeighborOnPathIsFree));
        assert!(sim.eval_condition(1, FunctionKind::OnPathOfRobotInNetwork));
        // Robot 2 at node 2 heads for 5 through a free node 3.
        assert!(sim.eval_condition(2, FunctionKind::NeighborOnPathIsFree));
        assert!(sim.eval_condition(2, FunctionKind::NeighborIsSurrounded));
        // Robot 3 at leaf 4 neighbors the surrounded robot 1 as well.
        assert!(sim.eval_condition(3, FunctionKind::NeighborIsSurrounded));
    }

    #[test]
    fn at_branch_and_moving_to_branch() {
        let p = problem(5, &[(0, 1), (1, 2), (2, 3), (1, 4)], &[(0, 3)]);
        let mut sim = SimulationState::new(&p, 2);
        sim.set_branch_target(0, Some(1));
        assert!(sim.eval_condition(0, FunctionKind::RobotMovingToBranch));
        assert!(!sim.eval_condition(0, FunctionKind::RobotAtBranch));
        assert_eq!(sim.apply_terminal(0, TerminalKind::MoveTowardBranch), 1);
        assert!(sim.eval_condition(0, FunctionKind::RobotAtBranch));
        assert!(!sim.eval_condition(0, FunctionKind::RobotMovingToBranch));
        // Target survives arrival and is cleared on leaving the branch node.
        assert_eq!(sim.robot(0).branch_target, Some(1));
        sim.edges_used.clear();
        assert_eq!(sim.apply_terminal(0, TerminalKind::MoveToFreeNeighbor), 2);
        assert_eq!(sim.robot(0).branch_target, None);
    }

    #[test]
    fn move_to_free_neighbor_filters_and_picks_lowest() {
        // Star center 0, leaves 1..=3 and a tail 3-4-5. Robot 0 walks from 3
        // to the center; robot 1 sits on 2. Leaf 1 is the only choice.
        let p = problem(
            6,
            &[(0, 1), (0, 2), (0, 3), (3, 4), (4, 5)],
            &[(3, 1), (2, 4)],
        );
        let mut sim = SimulationState::new(&p, 2);
        assert_eq!(sim.apply_terminal(0, TerminalKind::MoveTowardObjective), 0);
        sim.edges_used.clear();
        assert_eq!(sim.robot(0).position, 0);
        assert!(sim.robot(0).visited.contains(3));
        assert_eq!(sim.apply_terminal(0, TerminalKind::MoveToFreeNeighbor), 1);
    }

    #[test]
    fn stay_is_identity() {
        let p = problem(4, &chain(4), &[(1, 3)]);
        let mut sim = SimulationState::new(&p, 2);
        let before = sim.robot(0).clone();
        assert_eq!(sim.apply_terminal(0, TerminalKind::Stay), 1);
        assert_eq!(sim.robot(0), &before);
        // Nothing to head for without a branch target.
        assert_eq!(sim.apply_terminal(0, TerminalKind::MoveTowardBranch), 1);
    }

    #[test]
    fn head_on_pair_blocks() {
        let p = problem(4, &chain(4), &[(1, 3), (2, 0)]);
        let program = parse_program("(if-robot-is-solved (stay) (move-toward-objective))").unwrap();
        let mut sim = SimulationState::new(&p, 2);
        for _ in 0..3 {
            assert!(!sim.step_world(&program));
            assert_eq!(sim.positions(), vec![1, 2]);
        }
        assert_eq!(sim.clock(), 3);
    }

    #[test]
    fn used_edge_blocks_traversal() {
        let p = problem(4, &chain(4), &[(1, 3)]);
        let mut sim = SimulationState::new(&p, 2);
        sim.edges_used.push((1, 2));
        assert_eq!(sim.apply_terminal(0, TerminalKind::MoveTowardObjective), 1);
        sim.edges_used.clear();
        assert_eq!(sim.apply_terminal(0, TerminalKind::MoveTowardObjective), 2);
        assert_eq!(sim.edges_used_this_step(), &[(1, 2)]);
    }

    #[test]
    fn one_step_reaches_adjacent_goal() {
        let p = problem(3, &chain(3), &[(1, 2)]);
        let program = parse_program("(if-robot-is-solved (stay) (move-toward-objective))").unwrap();
        let mut sim = SimulationState::new(&p, 2);
        sim.step_world(&program);
        assert!(sim.robot(0).has_visited_goal);
        assert!(sim.all_solved());
    }

    #[test]
    fn follower_advances_behind_lower_id_leader() {
        let p = problem(6, &chain(6), &[(2, 5), (1, 4)]);
        let program = parse_program("(if-robot-is-solved (stay) (move-toward-objective))").unwrap();
        let mut sim = SimulationState::new(&p, 2);
        sim.step_world(&program);
        assert_eq!(sim.positions(), vec![3, 2]);
    }

    #[test]
    fn observer_sees_one_action_per_robot() {
        let scenarios = canonical_scenarios();
        let program = parse_program(
            "(if-two-robots-on-each-others-path (move-toward-branch) (move-to-free-neighbor))",
        )
        .unwrap();
        let mut sim = SimulationState::new(&scenarios[2], 2);
        let mut seen = Vec::new();
        sim.step_world_observed(&program, |a| seen.push(a.robot));
        assert_eq!(seen, vec![0, 1, 2, 3]);
    }
}

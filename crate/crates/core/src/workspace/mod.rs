//! Tree-shaped single-lane workspaces and the problem instances placed on them.
//!
//! A [`Workspace`] is an immutable tree of unit-length edges. Besides the
//! adjacency lists it precomputes a rooted representation (root = node 0)
//! with binary-lifting ancestor tables, so distances, path membership and
//! next-hop queries run in `O(log N)` without materializing paths. The
//! nearest branch node of every node is also precomputed.

mod format;
mod generator;
mod scenarios;

use std::cmp::Reverse;
use std::collections::{BinaryHeap, VecDeque};

use thiserror::Error;

pub use format::{parse_problem, serialize_problem, ProblemFormatError};
pub use generator::{
    build_problem, generate_mst, generate_problem, GeneratorParams, RobotCountRule,
};
pub use scenarios::canonical_scenarios;

pub type NodeId = usize;
pub type RobotId = usize;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WorkspaceError {
    #[error("a workspace needs at least one node")]
    Empty,
    #[error("edge ({0}, {1}) references a node outside 0..{2}")]
    NodeOutOfRange(NodeId, NodeId, usize),
    #[error("self-loop at node {0}")]
    SelfLoop(NodeId),
    #[error("duplicate edge ({0}, {1})")]
    DuplicateEdge(NodeId, NodeId),
    #[error("a tree on {nodes} nodes has {expected} edges, found {found}")]
    EdgeCount {
        nodes: usize,
        expected: usize,
        found: usize,
    },
    #[error("graph is not connected")]
    Disconnected,
    #[error("{robots} robots need at least {} nodes (two must stay free), workspace has {nodes}", robots + 2)]
    TooManyRobots { robots: usize, nodes: usize },
    #[error("robot {robot} references node {node} outside the workspace")]
    RobotNodeOutOfRange { robot: RobotId, node: NodeId },
    #[error("robots {0} and {1} share a start node")]
    DuplicateStart(RobotId, RobotId),
    #[error("robots {0} and {1} share a goal node")]
    DuplicateGoal(RobotId, RobotId),
    #[error("robot ids must be 0, 1, 2, ... in order; found id {found} at position {index}")]
    RobotIdOrder { index: usize, found: RobotId },
    #[error("no workspace satisfying the robot count was generated after {0} attempts")]
    GenerationExhausted(usize),
    #[error("robot count must be at least 1")]
    NoRobots,
}

/// Immutable tree workspace `T(N, E)`.
#[derive(Debug, Clone)]
pub struct Workspace {
    edges: Vec<(NodeId, NodeId)>,
    adjacency: Vec<Vec<NodeId>>,
    branch_nodes: Vec<NodeId>,
    leaf_nodes: Vec<NodeId>,
    depth: Vec<u32>,
    // ancestors[k][v] is the 2^k-th ancestor of v; the root is its own parent.
    ancestors: Vec<Vec<NodeId>>,
    nearest_branch: Vec<Option<NodeId>>,
}

impl PartialEq for Workspace {
    fn eq(&self, other: &Self) -> bool {
        self.node_count() == other.node_count() && self.edges == other.edges
    }
}

impl Eq for Workspace {}

impl Workspace {
    /// Builds a workspace from an edge list. Edges may be given in either
    /// orientation and any order.
    pub fn new(
        node_count: usize,
        edges: impl IntoIterator<Item = (NodeId, NodeId)>,
    ) -> Result<Self, WorkspaceError> {
        if node_count == 0 {
            return Err(WorkspaceError::Empty);
        }
        let mut normalized = Vec::with_capacity(node_count.saturating_sub(1));
        for (u, v) in edges {
            if u >= node_count || v >= node_count {
                return Err(WorkspaceError::NodeOutOfRange(u, v, node_count));
            }
            if u == v {
                return Err(WorkspaceError::SelfLoop(u));
            }
            normalized.push((u.min(v), u.max(v)));
        }
        normalized.sort_unstable();
        if let Some(w) = normalized.windows(2).find(|w| w[0] == w[1]) {
            return Err(WorkspaceError::DuplicateEdge(w[0].0, w[0].1));
        }
        if normalized.len() != node_count - 1 {
            return Err(WorkspaceError::EdgeCount {
                nodes: node_count,
                expected: node_count - 1,
                found: normalized.len(),
            });
        }

        let mut adjacency = vec![Vec::new(); node_count];
        for &(u, v) in &normalized {
            adjacency[u].push(v);
            adjacency[v].push(u);
        }
        for list in &mut adjacency {
            list.sort_unstable();
        }

        // BFS from the root gives parents and depths; with N - 1 edges,
        // reaching every node proves the graph is a tree.
        let mut parent = vec![usize::MAX; node_count];
        let mut depth = vec![0u32; node_count];
        parent[0] = 0;
        let mut queue = VecDeque::from([0]);
        let mut reached = 1;
        while let Some(u) = queue.pop_front() {
            for &v in &adjacency[u] {
                if parent[v] == usize::MAX {
                    parent[v] = u;
                    depth[v] = depth[u] + 1;
                    reached += 1;
                    queue.push_back(v);
                }
            }
        }
        if reached != node_count {
            return Err(WorkspaceError::Disconnected);
        }

        let levels = (usize::BITS - node_count.leading_zeros()).max(1) as usize;
        let mut ancestors = Vec::with_capacity(levels);
        ancestors.push(parent);
        for k in 1..levels {
            let prev: &Vec<NodeId> = &ancestors[k - 1];
            let next = (0..node_count).map(|v| prev[prev[v]]).collect();
            ancestors.push(next);
        }

        let branch_nodes: Vec<NodeId> = (0..node_count)
            .filter(|&v| adjacency[v].len() >= 3)
            .collect();
        let leaf_nodes = (0..node_count)
            .filter(|&v| adjacency[v].len() == 1)
            .collect();
        let nearest_branch = nearest_branch_table(&adjacency, &branch_nodes);

        Ok(Workspace {
            edges: normalized,
            adjacency,
            branch_nodes,
            leaf_nodes,
            depth,
            ancestors,
            nearest_branch,
        })
    }

    pub fn node_count(&self) -> usize {
        self.adjacency.len()
    }

    /// Edges as `(u, v)` pairs with `u < v`, sorted.
    pub fn edges(&self) -> &[(NodeId, NodeId)] {
        &self.edges
    }

    /// Neighbors of `node` in ascending id order.
    pub fn neighbors(&self, node: NodeId) -> &[NodeId] {
        &self.adjacency[node]
    }

    pub fn degree(&self, node: NodeId) -> usize {
        self.adjacency[node].len()
    }

    pub fn contains(&self, node: NodeId) -> bool {
        node < self.node_count()
    }

    pub fn has_edge(&self, u: NodeId, v: NodeId) -> bool {
        self.adjacency
            .get(u)
            .is_some_and(|list| list.binary_search(&v).is_ok())
    }

    /// Nodes with 3 or more neighbors, ascending.
    pub fn branch_nodes(&self) -> &[NodeId] {
        &self.branch_nodes
    }

    /// Degree-1 nodes, ascending.
    pub fn leaf_nodes(&self) -> &[NodeId] {
        &self.leaf_nodes
    }

    pub fn is_branch(&self, node: NodeId) -> bool {
        self.adjacency[node].len() >= 3
    }

    fn parent(&self, node: NodeId) -> NodeId {
        self.ancestors[0][node]
    }

    fn lift(&self, mut node: NodeId, mut steps: u32) -> NodeId {
        let mut k = 0;
        while steps > 0 {
            if steps & 1 == 1 {
                node = self.ancestors[k][node];
            }
            steps >>= 1;
            k += 1;
        }
        node
    }

    fn lowest_common_ancestor(&self, a: NodeId, b: NodeId) -> NodeId {
        let (mut a, mut b) = if self.depth[a] >= self.depth[b] {
            (a, b)
        } else {
            (b, a)
        };
        a = self.lift(a, self.depth[a] - self.depth[b]);
        if a == b {
            return a;
        }
        for level in self.ancestors.iter().rev() {
            if level[a] != level[b] {
                a = level[a];
                b = level[b];
            }
        }
        self.parent(a)
    }

    /// Number of edges on the unique path between `a` and `b`.
    pub fn distance(&self, a: NodeId, b: NodeId) -> usize {
        let lca = self.lowest_common_ancestor(a, b);
        (self.depth[a] + self.depth[b] - 2 * self.depth[lca]) as usize
    }

    /// The unique path from `from` to `to`, excluding `from` and including
    /// `to`. Empty when `from == to`.
    pub fn tree_path(&self, from: NodeId, to: NodeId) -> Vec<NodeId> {
        let lca = self.lowest_common_ancestor(from, to);
        let mut path = Vec::with_capacity(self.distance(from, to));
        let mut node = from;
        while node != lca {
            node = self.parent(node);
            path.push(node);
        }
        let split = path.len();
        let mut node = to;
        while node != lca {
            path.push(node);
            node = self.parent(node);
        }
        path[split..].reverse();
        path
    }

    /// First node of `tree_path(from, to)`, if any.
    pub fn next_hop(&self, from: NodeId, to: NodeId) -> Option<NodeId> {
        if from == to {
            return None;
        }
        let lca = self.lowest_common_ancestor(from, to);
        if lca == from {
            Some(self.lift(to, self.depth[to] - self.depth[from] - 1))
        } else {
            Some(self.parent(from))
        }
    }

    /// Whether `node` lies on `tree_path(from, to)`.
    pub fn on_path(&self, from: NodeId, to: NodeId, node: NodeId) -> bool {
        node != from
            && self.distance(from, node) + self.distance(node, to) == self.distance(from, to)
    }

    /// Closest branch node to `from` by tree distance, lowest id on ties.
    pub fn nearest_branch(&self, from: NodeId) -> Option<NodeId> {
        self.nearest_branch[from]
    }
}

// Multi-source Dijkstra keyed on (distance, branch id): the first label to
// settle a node is its nearest branch with the lowest-id tie rule.
fn nearest_branch_table(adjacency: &[Vec<NodeId>], branch_nodes: &[NodeId]) -> Vec<Option<NodeId>> {
    let mut settled = vec![None; adjacency.len()];
    let mut heap: BinaryHeap<Reverse<(usize, NodeId, NodeId)>> =
        branch_nodes.iter().map(|&b| Reverse((0, b, b))).collect();
    while let Some(Reverse((dist, branch, node))) = heap.pop() {
        if settled[node].is_some() {
            continue;
        }
        settled[node] = Some(branch);
        for &next in &adjacency[node] {
            if settled[next].is_none() {
                heap.push(Reverse((dist + 1, branch, next)));
            }
        }
    }
    settled
}

/// A robot's start `s(r)` and goal `g(r)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RobotSpec {
    pub id: RobotId,
    pub start: NodeId,
    pub goal: NodeId,
}

/// A workspace populated with robots. Validated on construction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProblemInstance {
    workspace: Workspace,
    robots: Vec<RobotSpec>,
    label: String,
}

impl ProblemInstance {
    pub fn new(
        workspace: Workspace,
        robots: Vec<RobotSpec>,
        label: impl Into<String>,
    ) -> Result<Self, WorkspaceError> {
        let nodes = workspace.node_count();
        if robots.len() + 2 > nodes {
            return Err(WorkspaceError::TooManyRobots {
                robots: robots.len(),
                nodes,
            });
        }
        let mut start_owner = vec![None; nodes];
        let mut goal_owner = vec![None; nodes];
        for (index, robot) in robots.iter().enumerate() {
            if robot.id != index {
                return Err(WorkspaceError::RobotIdOrder {
                    index,
                    found: robot.id,
                });
            }
            for node in [robot.start, robot.goal] {
                if node >= nodes {
                    return Err(WorkspaceError::RobotNodeOutOfRange {
                        robot: robot.id,
                        node,
                    });
                }
            }
            if let Some(other) = start_owner[robot.start].replace(robot.id) {
                return Err(WorkspaceError::DuplicateStart(other, robot.id));
            }
            if let Some(other) = goal_owner[robot.goal].replace(robot.id) {
                return Err(WorkspaceError::DuplicateGoal(other, robot.id));
            }
        }
        Ok(ProblemInstance {
            workspace,
            robots,
            label: label.into(),
        })
    }

    pub fn workspace(&self) -> &Workspace {
        &self.workspace
    }

    pub fn robots(&self) -> &[RobotSpec] {
        &self.robots
    }

    pub fn robot_count(&self) -> usize {
        self.robots.len()
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    /// Per-example step cap `M = |N|^2 * |R|^2`.
    pub fn step_cap(&self) -> u64 {
        let n = self.workspace.node_count() as u64;
        let r = self.robots.len() as u64;
        n * n * r * r
    }
}

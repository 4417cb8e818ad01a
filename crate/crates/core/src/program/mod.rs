//! Decision-tree programs: the genome evolved by the GP engine.
//!
//! Internal nodes are two-way conditionals over the robot's situation and
//! leaves are movement actions. A valid program has a conditional at the
//! root and a depth (edges on the longest root-to-leaf path) between 1 and
//! its maximum depth.

mod sexpr;

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use thiserror::Error;

pub use sexpr::{parse_program, parse_program_with_max_depth, ParseError, ParseErrorKind};

/// Default depth bound for evolved programs.
pub const DEFAULT_MAX_DEPTH: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FunctionKind {
    TwoRobotsOnEachOthersPath,
    NeighborIsSurrounded,
    RobotAtBranch,
    RobotAtDestination,
    RobotMovingToBranch,
    NeighborOnPathIsFree,
    RobotIsSolved,
    OnPathOfRobotInNetwork,
    RobotInNetworkMovingToBranch,
}

impl FunctionKind {
    pub const ALL: [FunctionKind; 9] = [
        FunctionKind::TwoRobotsOnEachOthersPath,
        FunctionKind::NeighborIsSurrounded,
        FunctionKind::RobotAtBranch,
        FunctionKind::RobotAtDestination,
        FunctionKind::RobotMovingToBranch,
        FunctionKind::NeighborOnPathIsFree,
        FunctionKind::RobotIsSolved,
        FunctionKind::OnPathOfRobotInNetwork,
        FunctionKind::RobotInNetworkMovingToBranch,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FunctionKind::TwoRobotsOnEachOthersPath => "if-two-robots-on-each-others-path",
            FunctionKind::NeighborIsSurrounded => "if-neighbor-is-surrounded",
            FunctionKind::RobotAtBranch => "if-robot-at-branch",
            FunctionKind::RobotAtDestination => "if-robot-at-destination",
            FunctionKind::RobotMovingToBranch => "if-robot-moving-to-branch",
            FunctionKind::NeighborOnPathIsFree => "if-neighbor-on-path-is-free",
            FunctionKind::RobotIsSolved => "if-robot-is-solved",
            FunctionKind::OnPathOfRobotInNetwork => "if-on-path-of-robot-in-network",
            FunctionKind::RobotInNetworkMovingToBranch => "if-robot-in-network-moving-to-branch",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TerminalKind {
    MoveTowardBranch,
    MoveToFreeNeighbor,
    MoveTowardObjective,
    Stay,
}

impl TerminalKind {
    pub const ALL: [TerminalKind; 4] = [
        TerminalKind::MoveTowardBranch,
        TerminalKind::MoveToFreeNeighbor,
        TerminalKind::MoveTowardObjective,
        TerminalKind::Stay,
    ];

    pub fn name(self) -> &'static str {
        match self {
            TerminalKind::MoveTowardBranch => "move-toward-branch",
            TerminalKind::MoveToFreeNeighbor => "move-to-free-neighbor",
            TerminalKind::MoveTowardObjective => "move-toward-objective",
            TerminalKind::Stay => "stay",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == name)
    }
}

/// Number of distinct node symbols (functions + terminals).
pub const SYMBOL_COUNT: usize = FunctionKind::ALL.len() + TerminalKind::ALL.len();

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Node {
    Function {
        kind: FunctionKind,
        on_true: Box<Node>,
        on_false: Box<Node>,
    },
    Terminal(TerminalKind),
}

impl Node {
    pub fn function(kind: FunctionKind, on_true: Node, on_false: Node) -> Node {
        Node::Function {
            kind,
            on_true: Box::new(on_true),
            on_false: Box::new(on_false),
        }
    }

    /// Edges on the longest path to a leaf.
    pub fn depth(&self) -> usize {
        match self {
            Node::Terminal(_) => 0,
            Node::Function {
                on_true, on_false, ..
            } => 1 + on_true.depth().max(on_false.depth()),
        }
    }

    pub fn size(&self) -> usize {
        match self {
            Node::Terminal(_) => 1,
            Node::Function {
                on_true, on_false, ..
            } => 1 + on_true.size() + on_false.size(),
        }
    }

    /// Index of this node's symbol in `0..SYMBOL_COUNT`.
    pub fn symbol_index(&self) -> usize {
        match self {
            Node::Function { kind, .. } => *kind as usize,
            Node::Terminal(kind) => FunctionKind::ALL.len() + *kind as usize,
        }
    }

    /// The `index`-th node in pre-order (0 is `self`).
    pub fn nth(&self, mut index: usize) -> Option<&Node> {
        let mut node = self;
        loop {
            if index == 0 {
                return Some(node);
            }
            match node {
                Node::Terminal(_) => return None,
                Node::Function {
                    on_true, on_false, ..
                } => {
                    let left = on_true.size();
                    if index <= left {
                        node = on_true;
                        index -= 1;
                    } else {
                        node = on_false;
                        index -= 1 + left;
                    }
                }
            }
        }
    }

    pub fn nth_mut(&mut self, mut index: usize) -> Option<&mut Node> {
        let mut node = self;
        loop {
            if index == 0 {
                return Some(node);
            }
            match node {
                Node::Terminal(_) => return None,
                Node::Function {
                    on_true, on_false, ..
                } => {
                    let left = on_true.size();
                    if index <= left {
                        node = on_true;
                        index -= 1;
                    } else {
                        node = on_false;
                        index -= 1 + left;
                    }
                }
            }
        }
    }

    fn count_symbols(&self, counts: &mut [usize; SYMBOL_COUNT]) {
        counts[self.symbol_index()] += 1;
        if let Node::Function {
            on_true, on_false, ..
        } = self
        {
            on_true.count_symbols(counts);
            on_false.count_symbols(counts);
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProgramError {
    #[error("program depth {depth} outside 1..={max}")]
    DepthOutOfRange { depth: usize, max: usize },
}

/// A validated decision-tree program.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Program {
    root: Node,
}

impl Program {
    pub fn new(root: Node, max_depth: usize) -> Result<Self, ProgramError> {
        let depth = root.depth();
        if depth < 1 || depth > max_depth {
            return Err(ProgramError::DepthOutOfRange {
                depth,
                max: max_depth,
            });
        }
        Ok(Program { root })
    }

    pub fn root(&self) -> &Node {
        &self.root
    }

    pub fn into_root(self) -> Node {
        self.root
    }

    pub fn depth(&self) -> usize {
        self.root.depth()
    }

    pub fn size(&self) -> usize {
        self.root.size()
    }

    /// Per-symbol node counts, indexed by [`Node::symbol_index`].
    pub fn symbol_histogram(&self) -> [usize; SYMBOL_COUNT] {
        let mut counts = [0; SYMBOL_COUNT];
        self.root.count_symbols(&mut counts);
        counts
    }
}

impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&sexpr::serialize_program(self))
    }
}

impl FromStr for Program {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_program(s)
    }
}

/// How initial programs are shaped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum InitMethod {
    /// Below the depth limit every child is drawn from functions and terminals alike.
    #[default]
    Grow,
    /// Functions everywhere above the depth limit.
    Full,
    /// Depth drawn from `1..=max`, then grow or full with equal odds.
    RampedHalfAndHalf,
}

impl FromStr for InitMethod {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "grow" => Ok(InitMethod::Grow),
            "full" => Ok(InitMethod::Full),
            "ramped" => Ok(InitMethod::RampedHalfAndHalf),
            _ => Err(format!("unknown init method `{s}` (grow, full, ramped)")),
        }
    }
}

fn random_function<R: Rng + ?Sized>(rng: &mut R) -> FunctionKind {
    FunctionKind::ALL[rng.gen_range(0..FunctionKind::ALL.len())]
}

fn random_terminal<R: Rng + ?Sized>(rng: &mut R) -> TerminalKind {
    TerminalKind::ALL[rng.gen_range(0..TerminalKind::ALL.len())]
}

fn function_node<R: Rng + ?Sized>(
    kind: FunctionKind,
    depth_left: usize,
    full: bool,
    rng: &mut R,
) -> Node {
    let on_true = random_subtree(depth_left - 1, full, rng);
    let on_false = random_subtree(depth_left - 1, full, rng);
    Node::function(kind, on_true, on_false)
}

fn random_subtree<R: Rng + ?Sized>(depth_left: usize, full: bool, rng: &mut R) -> Node {
    if depth_left == 0 {
        return Node::Terminal(random_terminal(rng));
    }
    if full {
        return function_node(random_function(rng), depth_left, full, rng);
    }
    let symbol = rng.gen_range(0..SYMBOL_COUNT);
    if symbol < FunctionKind::ALL.len() {
        function_node(FunctionKind::ALL[symbol], depth_left, full, rng)
    } else {
        Node::Terminal(TerminalKind::ALL[symbol - FunctionKind::ALL.len()])
    }
}

/// Grow-style subtree of depth at most `max_depth`; the root may be a terminal.
pub fn grow_subtree<R: Rng + ?Sized>(max_depth: usize, rng: &mut R) -> Node {
    random_subtree(max_depth, false, rng)
}

/// Random program with a conditional root and depth in `1..=max_depth`,
/// generated with the grow method.
pub fn random_program<R: Rng + ?Sized>(max_depth: usize, rng: &mut R) -> Program {
    random_program_with(InitMethod::Grow, max_depth, rng)
}

pub fn random_program_with<R: Rng + ?Sized>(
    method: InitMethod,
    max_depth: usize,
    rng: &mut R,
) -> Program {
    assert!(max_depth >= 1, "programs need depth at least 1");
    let (depth, full) = match method {
        InitMethod::Grow => (max_depth, false),
        InitMethod::Full => (max_depth, true),
        InitMethod::RampedHalfAndHalf => (rng.gen_range(1..=max_depth), rng.gen_bool(0.5)),
    };
    let root = function_node(random_function(rng), depth, full, rng);
    Program { root }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn t(kind: TerminalKind) -> Node {
        Node::Terminal(kind)
    }

    #[test]
    fn depth_examples() {
        let one = Node::function(
            FunctionKind::RobotIsSolved,
            t(TerminalKind::Stay),
            t(TerminalKind::MoveTowardObjective),
        );
        assert_eq!(one.depth(), 1);
        let nested = Node::function(
            FunctionKind::RobotAtBranch,
            one.clone(),
            t(TerminalKind::Stay),
        );
        assert_eq!(nested.depth(), 2);
        assert_eq!(t(TerminalKind::Stay).depth(), 0);
        assert!(Program::new(t(TerminalKind::Stay), DEFAULT_MAX_DEPTH).is_err());
        assert!(Program::new(nested.clone(), 1).is_err());
        assert!(Program::new(nested, 2).is_ok());
    }

    #[test]
    fn nth_walks_pre_order() {
        let tree = Node::function(
            FunctionKind::RobotAtBranch,
            Node::function(
                FunctionKind::RobotIsSolved,
                t(TerminalKind::Stay),
                t(TerminalKind::MoveToFreeNeighbor),
            ),
            t(TerminalKind::MoveTowardBranch),
        );
        let symbols: Vec<usize> = (0..tree.size())
            .map(|i| tree.nth(i).unwrap().symbol_index())
            .collect();
        assert_eq!(symbols, vec![2, 6, 12, 10, 9]);
        assert!(tree.nth(5).is_none());
    }

    #[test]
    fn depth_one_programs_have_terminal_children() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..200 {
            let p = random_program(1, &mut rng);
            assert_eq!(p.depth(), 1);
            assert_eq!(p.size(), 3);
        }
    }

    #[test]
    fn every_symbol_appears_at_depth_two() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut counts = [0usize; SYMBOL_COUNT];
        for _ in 0..10_000 {
            let p = random_program(2, &mut rng);
            assert!((1..=2).contains(&p.depth()));
            for (c, n) in counts.iter_mut().zip(p.symbol_histogram()) {
                *c += n;
            }
        }
        assert!(counts.iter().all(|&c| c > 0), "{counts:?}");
    }

    #[test]
    fn full_and_ramped_respect_bounds() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            assert_eq!(
                random_program_with(InitMethod::Full, 3, &mut rng).depth(),
                3
            );
            let d = random_program_with(InitMethod::RampedHalfAndHalf, 4, &mut rng).depth();
            assert!((1..=4).contains(&d));
        }
    }

    #[test]
    fn names_are_unique_and_resolve() {
        for kind in FunctionKind::ALL {
            assert_eq!(FunctionKind::from_name(kind.name()), Some(kind));
        }
        for kind in TerminalKind::ALL {
            assert_eq!(TerminalKind::from_name(kind.name()), Some(kind));
        }
        assert_eq!(FunctionKind::from_name("stay"), None);
    }

    proptest! {
        #[test]
        fn random_programs_are_valid_full_binary_trees(seed in any::<u64>(), max_depth in 1usize..7) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let p = random_program(max_depth, &mut rng);
            let conditional_root = matches!(p.root(), Node::Function { .. });
                prop_assert!(conditional_root);
            prop_assert!((1..=max_depth).contains(&p.depth()));
            let hist = p.symbol_histogram();
            let internal: usize = hist[..FunctionKind::ALL.len()].iter().sum();
            let leaves: usize = hist[FunctionKind::ALL.len()..].iter().sum();
            prop_assert_eq!(leaves, internal + 1);
            prop_assert_eq!(internal + leaves, p.size());
        }
    }
}

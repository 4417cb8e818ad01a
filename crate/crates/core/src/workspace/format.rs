//! Line-based problem file format:
//!
//! ```text
//! nodes <count>
//! edge <u> <v>          # one per edge, u < v
//! robot <id> <start> <goal>
//! ```
//!
//! Lines starting with `#` and blank lines are ignored.

use std::fmt::Write as _;

use thiserror::Error;

use super::{NodeId, ProblemInstance, RobotSpec, Workspace, WorkspaceError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProblemFormatError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("missing `nodes` line")]
    MissingHeader,
    #[error(transparent)]
    Invalid(#[from] WorkspaceError),
}

fn syntax(line: usize, message: impl Into<String>) -> ProblemFormatError {
    ProblemFormatError::Syntax {
        line,
        message: message.into(),
    }
}

pub fn serialize_problem(problem: &ProblemInstance) -> String {
    let ws = problem.workspace();
    let mut out = String::new();
    writeln!(out, "nodes {}", ws.node_count()).unwrap();
    for &(u, v) in ws.edges() {
        writeln!(out, "edge {u} {v}").unwrap();
    }
    for robot in problem.robots() {
        writeln!(out, "robot {} {} {}", robot.id, robot.start, robot.goal).unwrap();
    }
    out
}

pub fn parse_problem(text: &str, label: &str) -> Result<ProblemInstance, ProblemFormatError> {
    let mut node_count = None;
    let mut edges: Vec<(NodeId, NodeId)> = Vec::new();
    let mut robots = Vec::new();

    for (index, raw) in text.lines().enumerate() {
        let line = index + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let mut fields = trimmed.split_whitespace();
        let keyword = fields.next().unwrap_or_default();
        let numbers = fields
            .map(|f| {
                f.parse::<usize>()
                    .map_err(|_| syntax(line, format!("`{f}` is not a non-negative integer")))
            })
            .collect::<Result<Vec<_>, _>>()?;

        match (keyword, numbers.as_slice()) {
            ("nodes", &[count]) => {
                if node_count.is_some() {
                    return Err(syntax(line, "duplicate `nodes` line"));
                }
                node_count = Some(count);
            }
            ("edge", &[u, v]) => {
                if node_count.is_none() {
                    return Err(syntax(line, "`edge` before `nodes`"));
                }
                if !robots.is_empty() {
                    return Err(syntax(line, "`edge` after `robot` lines"));
                }
                edges.push((u, v));
            }
            ("robot", &[id, start, goal]) => {
                if node_count.is_none() {
                    return Err(syntax(line, "`robot` before `nodes`"));
                }
                robots.push(RobotSpec { id, start, goal });
            }
            ("nodes" | "edge" | "robot", _) => {
                return Err(syntax(
                    line,
                    format!("wrong number of fields for `{keyword}`"),
                ));
            }
            _ => return Err(syntax(line, format!("unknown keyword `{keyword}`"))),
        }
    }

    let node_count = node_count.ok_or(ProblemFormatError::MissingHeader)?;
    let workspace = Workspace::new(node_count, edges)?;
    Ok(ProblemInstance::new(workspace, robots, label)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::workspace::{canonical_scenarios, generate_problem, GeneratorParams};
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn parses_with_comments_and_blank_lines() {
        let text = "# scenario\n\nnodes 3\nedge 1 2\n  edge 0 1\n# robots\nrobot 0 0 2\n";
        let problem = parse_problem(text, "t").unwrap();
        assert_eq!(problem.workspace().node_count(), 3);
        assert_eq!(problem.workspace().edges(), &[(0, 1), (1, 2)]);
        assert_eq!(problem.label(), "t");
        assert_eq!(
            serialize_problem(&problem),
            "nodes 3\nedge 0 1\nedge 1 2\nrobot 0 0 2\n"
        );
    }

    #[test]
    fn reports_line_numbers() {
        let err = parse_problem("nodes 3\nedge 0 x\n", "t").unwrap_err();
        assert!(matches!(err, ProblemFormatError::Syntax { line: 2, .. }));
        let err = parse_problem("nodes 3\nvertex 0\n", "t").unwrap_err();
        assert!(err.to_string().contains("unknown keyword"));
        let err = parse_problem("edge 0 1\n", "t").unwrap_err();
        assert!(matches!(err, ProblemFormatError::Syntax { line: 1, .. }));
        assert_eq!(
            parse_problem("# nothing\n", "t"),
            Err(ProblemFormatError::MissingHeader)
        );
        let err = parse_problem("nodes 3\nedge 0 1\nedge 0 2\nrobot 0 0 1 2\n", "t").unwrap_err();
        assert!(matches!(err, ProblemFormatError::Syntax { line: 4, .. }));
    }

    #[test]
    fn rejects_invalid_instances() {
        let err = parse_problem("nodes 3\nedge 0 1\n", "t").unwrap_err();
        assert!(matches!(
            err,
            ProblemFormatError::Invalid(WorkspaceError::EdgeCount { .. })
        ));
        let err = parse_problem(
            "nodes 3\nedge 0 1\nedge 1 2\nrobot 0 0 1\nrobot 1 1 2\n",
            "t",
        )
        .unwrap_err();
        assert!(matches!(
            err,
            ProblemFormatError::Invalid(WorkspaceError::TooManyRobots { .. })
        ));
    }

    #[test]
    fn scenarios_round_trip() {
        for scenario in canonical_scenarios() {
            let text = serialize_problem(&scenario);
            let back = parse_problem(&text, scenario.label()).unwrap();
            assert_eq!(back, scenario);
        }
    }

    proptest! {
        #[test]
        fn generated_problems_round_trip(seed in any::<u64>(), depth in 2u32..6) {
            let params = GeneratorParams::new(depth, 4, seed);
            let mut shape = ChaCha8Rng::seed_from_u64(seed);
            let mut place = ChaCha8Rng::seed_from_u64(seed ^ 1);
            let problem = generate_problem(&params, &mut shape, &mut place).unwrap();
            let text = serialize_problem(&problem);
            let back = parse_problem(&text, problem.label()).unwrap();
            prop_assert_eq!(serialize_problem(&back), text);
            prop_assert_eq!(back, problem);
        }
    }
}

use super::{ProblemInstance, RobotSpec, Workspace};

fn instance(
    nodes: usize,
    edges: &[(usize, usize)],
    robots: &[(usize, usize)],
    label: &str,
) -> ProblemInstance {
    let workspace = Workspace::new(nodes, edges.iter().copied()).expect("fixture is a tree");
    let robots = robots
        .iter()
        .enumerate()
        .map(|(id, &(start, goal))| RobotSpec { id, start, goal })
        .collect();
    ProblemInstance::new(workspace, robots, label).expect("fixture is a valid instance")
}

/// The three two-robot situations that can only be resolved by a swap at a
/// branch node. Robot 0 plays `r_A`, robot 1 plays `r_B`.
///
/// 1. Each robot sits on the other's path (chain 0-1-2-3, spur 4 at node 1).
/// 2. `r_B` and its goal both lie on `r_A`'s path (same workspace).
/// 3. `r_B` sits on `r_A`'s path with every neighbor occupied. The star
///    around node 1 is extended with nodes 5 and 6 so that two nodes stay
///    free once all four robots are placed.
pub fn canonical_scenarios() -> Vec<ProblemInstance> {
    let spur_chain = [(0, 1), (1, 2), (2, 3), (1, 4)];
    vec![
        instance(5, &spur_chain, &[(0, 3), (2, 0)], "scenario-1-mutual-paths"),
        instance(5, &spur_chain, &[(0, 3), (1, 2)], "scenario-2-goal-on-path"),
        instance(
            7,
            &[(0, 1), (1, 2), (1, 4), (2, 3), (3, 5), (4, 6)],
            &[(0, 3), (1, 0), (2, 5), (4, 6)],
            "scenario-3-surrounded",
        ),
    ]
}

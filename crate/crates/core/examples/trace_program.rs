//! Parses a hand-written program and traces it on the surrounded-robot
//! scenario, then shows the greedy policy deadlocking on the same layout.
//!
//! ```bash
//! cargo run --example trace_program
//! ```

use gpmrpp::simulator::trace_episode;
use gpmrpp::{canonical_scenarios, parse_program};

const SWAP: &str = "
(if-two-robots-on-each-others-path
  (move-toward-branch)
  (if-robot-at-branch
    (if-robot-at-destination (stay) (move-to-free-neighbor))
    (if-neighbor-on-path-is-free (move-toward-objective) (move-toward-branch))))";

const GREEDY: &str = "(if-neighbor-on-path-is-free (move-toward-objective) (stay))";

fn main() {
    let scenario = canonical_scenarios().remove(2);
    println!("{}", gpmrpp::workspace::serialize_problem(&scenario));
    let stdout = &mut std::io::stdout();
    for (name, text) in [("swap", SWAP), ("greedy", GREEDY)] {
        let program = parse_program(text).expect("valid program");
        println!(
            "{name}: {program} (depth {}, {} nodes)",
            program.depth(),
            program.size()
        );
        let cap = scenario.step_cap().min(12);
        let result = trace_episode(&scenario, &program, cap, 2, stdout).unwrap();
        println!("solved={} steps={}\n", result.solved, result.steps_used);
    }
}

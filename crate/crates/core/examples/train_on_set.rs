//! Evolves one program against a small fitness set of random problems and
//! writes the generation history as CSV.
//!
//! ```bash
//! cargo run --release --example train_on_set -- 42 > history.csv
//! ```

use gpmrpp::evolution::write_history_csv;
use gpmrpp::seeding::{substream, Stream};
use gpmrpp::workspace::{generate_problem, GeneratorParams, RobotCountRule};
use gpmrpp::{compute_fitness, evolve, GpConfig};

fn main() {
    let seed = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(42);
    let params = GeneratorParams {
        robot_count_rule: RobotCountRule::LeafMultiplier(0.5),
        ..GeneratorParams::new(3, 3, seed)
    };
    let set: Vec<_> = (0..4)
        .map(|i| {
            let mut shape = substream(seed, Stream::TreeShape, i);
            let mut placement = substream(seed, Stream::RobotPlacement, i);
            generate_problem(&params, &mut shape, &mut placement).expect("tree fits its robots")
        })
        .collect();

    let config = GpConfig::desk();
    let outcome =
        evolve(&config, &set, &mut substream(seed, Stream::Evolution, 0)).expect("valid config");
    write_history_csv(&outcome.history, &mut std::io::stdout()).unwrap();

    let program = outcome.best.as_ref().unwrap_or(&outcome.fittest);
    let check = compute_fitness(program, &set, None, config.comm_radius);
    eprintln!(
        "solved all={} fitness={} steps per example {:?}\n{program}",
        check.all_solved, check.fitness, check.per_example_steps
    );
}

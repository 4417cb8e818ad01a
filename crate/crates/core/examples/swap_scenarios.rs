//! Evolves a program for each canonical swap scenario and replays it.
//!
//! ```bash
//! cargo run --release --example swap_scenarios -- 42
//! ```

use std::time::Instant;

use gpmrpp::seeding::{substream, Stream};
use gpmrpp::{canonical_scenarios, evolve, run_episode, GpConfig};

fn main() {
    let seed = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(42);
    let config = GpConfig::desk();
    for (index, scenario) in canonical_scenarios().into_iter().enumerate() {
        let started = Instant::now();
        let mut rng = substream(seed, Stream::Evolution, index as u64);
        let outcome =
            evolve(&config, std::slice::from_ref(&scenario), &mut rng).expect("valid config");
        let elapsed = started.elapsed();
        match outcome.best {
            Some(program) => {
                let replay =
                    run_episode(&scenario, &program, scenario.step_cap(), config.comm_radius);
                println!(
                    "{}: solved in {} steps ({:.1?}) at {:?}\n  {program}",
                    scenario.label(),
                    replay.steps_used,
                    elapsed,
                    outcome.best_found_at.unwrap()
                );
            }
            None => println!(
                "{}: no solving program (best fitness {}, {:.1?})",
                scenario.label(),
                outcome.fittest_fitness,
                elapsed
            ),
        }
    }
}

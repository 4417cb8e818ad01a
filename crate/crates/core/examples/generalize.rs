//! Trains on a fitness set of random trees and replays the result on unseen
//! ones.
//!
//! ```bash
//! cargo run --release --example generalize -- 3 42
//! ```

use gpmrpp::harness::{aggregate, run_generalize, ExperimentMode, ExperimentSpec};

fn main() {
    let mut args = std::env::args()
        .skip(1)
        .map(|a| a.parse::<u64>().expect("numeric argument"));
    let trials = args.next().unwrap_or(3) as usize;
    let seed = args.next().unwrap_or(42);
    let spec = ExperimentSpec {
        trials,
        seed,
        // Shallow trees keep the demo quick.
        train_depths: 3..=4,
        test_depths: 3..=4,
        test_count: 10,
        ..ExperimentSpec::desk(ExperimentMode::Generalize)
    };
    let report = run_generalize(&spec).expect("valid spec");
    for (trial, (program, trained)) in report.programs.iter().enumerate() {
        let tests: Vec<_> = report
            .test_records
            .iter()
            .filter(|r| r.trial == trial)
            .collect();
        let solved = tests.iter().filter(|r| r.gp_solved).count();
        println!(
            "trial {trial}: training set {}, test {solved}/{}\n  {program}",
            if *trained { "solved" } else { "unsolved" },
            tests.len()
        );
    }
    for row in aggregate(&report.test_records) {
        println!(
            "{} robots: GP {:.0}%, baseline {:.0}%",
            row.x_key,
            row.gp_solved_frac * 100.0,
            row.baseline_solved_frac * 100.0
        );
    }
}

//! Robot-density sweep: the same trees with more and more robots.
//!
//! ```bash
//! cargo run --release --example stress -- 5 42
//! ```

use gpmrpp::harness::{aggregate, run_stress, write_summary_csv, ExperimentMode, ExperimentSpec};

fn main() {
    let mut args = std::env::args()
        .skip(1)
        .map(|a| a.parse::<u64>().expect("numeric argument"));
    let trials = args.next().unwrap_or(5) as usize;
    let seed = args.next().unwrap_or(42);
    let spec = ExperimentSpec {
        trials,
        seed,
        ..ExperimentSpec::desk(ExperimentMode::Stress)
    };
    let records = run_stress(&spec).expect("valid spec");
    write_summary_csv(&aggregate(&records), &mut std::io::stdout()).unwrap();
}

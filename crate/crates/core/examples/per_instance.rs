//! Per-instance experiment at desk scale: one evolution per random tree,
//! compared against the greedy baseline.
//!
//! ```bash
//! cargo run --release --example per_instance -- 20 42
//! ```

use gpmrpp::harness::{
    aggregate, run_per_instance, write_records_csv, write_summary_csv, ExperimentMode,
    ExperimentSpec,
};

fn main() {
    let mut args = std::env::args()
        .skip(1)
        .map(|a| a.parse::<u64>().expect("numeric argument"));
    let trials = args.next().unwrap_or(10) as usize;
    let seed = args.next().unwrap_or(42);
    let spec = ExperimentSpec {
        trials,
        seed,
        wall_time: true,
        ..ExperimentSpec::desk(ExperimentMode::PerInstance)
    };
    let records = run_per_instance(&spec).expect("valid spec");
    let stdout = &mut std::io::stdout();
    write_records_csv(&records, stdout).unwrap();
    println!();
    write_summary_csv(&aggregate(&records), stdout).unwrap();
    let solved = records.iter().filter(|r| r.gp_solved).count();
    println!("\nGP solved {solved}/{trials}");
}

//! Draws a few random problems and prints them in the problem file format.
//!
//! ```bash
//! cargo run --example generate_problems -- 4 7
//! ```

use gpmrpp::seeding::{substream, Stream};
use gpmrpp::workspace::{generate_problem, serialize_problem, GeneratorParams};

fn main() {
    let mut args = std::env::args()
        .skip(1)
        .map(|a| a.parse::<u64>().expect("numeric argument"));
    let seed_depth = args.next().unwrap_or(4) as u32;
    let seed = args.next().unwrap_or(7);
    let params = GeneratorParams::new(seed_depth, 4, seed);
    for index in 0..3 {
        let mut shape = substream(seed, Stream::TreeShape, index);
        let mut placement = substream(seed, Stream::RobotPlacement, index);
        let problem =
            generate_problem(&params, &mut shape, &mut placement).expect("tree fits its robots");
        let ws = problem.workspace();
        println!(
            "# {} nodes, {} leaves, {} branch nodes, {} robots, step cap {}",
            ws.node_count(),
            ws.leaf_nodes().len(),
            ws.branch_nodes().len(),
            problem.robot_count(),
            problem.step_cap()
        );
        print!("{}", serialize_problem(&problem));
        println!();
    }
}

//! Exact distance between two walks by value iteration with exact inner
//! transport problems.
//!
//!     cargo run --example oracle

use bisim_ot::coupling::distance_of;
use bisim_ot::oracle::{bicausal_value_iteration, oracle_occupancy};
use bisim_ot::{make_random_walk, CostMatrix};

fn main() -> bisim_ot::Result<()> {
    let gamma = 0.9;
    let x = make_random_walk(4, 0.3)?;
    let y = make_random_walk(4, 0.7)?;
    let cost = CostMatrix::reward_abs_diff(&x, &y)?;

    let sol = bicausal_value_iteration(&x, &y, &cost, gamma, 1e-10)?;
    println!("distance {:.8} after {} sweeps", sol.distance, sol.sweeps);
    println!("value table W(x, y):");
    for row in sol.values.chunks(y.num_states()) {
        let cells: Vec<String> = row.iter().map(|v| format!("{v:7.4}")).collect();
        println!("  {}", cells.join(" "));
    }

    let mu = oracle_occupancy(&x, &y, &cost, gamma, 1e-10)?;
    println!("<mu*, c> = {:.8}", distance_of(&mu, &cost));
    Ok(())
}

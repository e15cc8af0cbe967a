//! Picks the bias of a walk from samples of a noisy lift of the true walk:
//! the estimated distance is smallest at the true parameter.
//!
//!     cargo run --release --example model_selection

use bisim_ot::harness::{model_select, ModelSelectSpec};
use bisim_ot::solver::{Preset, SolverConfig};

fn main() -> bisim_ot::Result<()> {
    let spec = ModelSelectSpec {
        n: 6,
        blocks: 3,
        iterations: vec![2_000, 8_000],
        oracle: true,
        ..ModelSelectSpec::default()
    };
    let mut config = SolverConfig::default();
    Preset::ModelSelect.apply(&mut config);

    let rows = model_select(&spec, &config, 1e-8)?;
    println!("theta  K=2000  K=8000  exact");
    for theta in &spec.thetas {
        let at: Vec<_> = rows.iter().filter(|r| r.theta == *theta).collect();
        println!(
            "{theta:5.1}  {:.4}  {:.4}  {:.4}",
            at[0].distance,
            at[1].distance,
            at[0].oracle.unwrap_or(f64::NAN)
        );
    }
    Ok(())
}

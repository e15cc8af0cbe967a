//! Averaged conditionals between a walk and its block lift: `lambda_x`
//! spreads each base state over its blocks, `lambda_y` collapses the blocks.
//!
//!     cargo run --release --example encoder_decoder

use bisim_ot::harness::{enc_dec, EncDecSpec};
use bisim_ot::solver::{Preset, SolverConfig};

fn main() -> bisim_ot::Result<()> {
    let spec = EncDecSpec {
        n: 4,
        blocks: 2,
        sample_sizes: vec![20_000],
        ..EncDecSpec::default()
    };
    let mut config = SolverConfig::default();
    Preset::EncDec.apply(&mut config);

    for (k, run) in enc_dec(&spec, &config, std::path::Path::new("."))? {
        println!("after {k} samples, lambda_x (rows: base state, cols: lifted state)");
        for x in 0..run.lambda_x_bar.rows() {
            let cells: Vec<String> = run
                .lambda_x_bar
                .row(x)
                .iter()
                .map(|v| format!("{v:.2}"))
                .collect();
            println!("  {}", cells.join(" "));
        }
        println!("lambda_y (rows: lifted state, cols: base state)");
        for y in 0..run.lambda_y_bar.rows() {
            let cells: Vec<String> = run
                .lambda_y_bar
                .row(y)
                .iter()
                .map(|v| format!("{v:.2}"))
                .collect();
            println!("  {}", cells.join(" "));
        }
    }
    Ok(())
}

//! Experiment recipes, configuration files and tabular output.

mod commands;
mod config;
mod output;

pub use commands::{
    cmd_dist_matrix, cmd_enc_dec, cmd_model_select, cmd_oracle, cmd_solve, cmd_sweep, dist_matrix,
    enc_dec, matrix_instances, model_select, solve_sources, sweep, sweep_summary, MatrixEntry,
    ModelSelectRow, SweepRow,
};
pub use config::{
    walk_with, ChainSource, ChainSpec, CostSpec, DistMatrixSpec, EncDecSpec, ExperimentConfig,
    ModelSelectSpec, Overrides, SweepSpec,
};
pub use output::{coupling_table, fmt_f64, kernel_table, read_distance, trace_table, Table};

/// The experiment commands.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Solve,
    Oracle,
    ModelSelect,
    EncDec,
    DistMatrix,
    Sweep,
}

impl Command {
    pub fn run(
        self,
        cfg: &ExperimentConfig,
        overrides: &Overrides,
    ) -> crate::Result<Vec<std::path::PathBuf>> {
        match self {
            Self::Solve => cmd_solve(cfg, overrides),
            Self::Oracle => cmd_oracle(cfg, overrides),
            Self::ModelSelect => cmd_model_select(cfg, overrides),
            Self::EncDec => cmd_enc_dec(cfg, overrides),
            Self::DistMatrix => cmd_dist_matrix(cfg, overrides),
            Self::Sweep => cmd_sweep(cfg, overrides),
        }
    }
}

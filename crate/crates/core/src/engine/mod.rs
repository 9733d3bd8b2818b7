//! Solvers and diagnostics built on the force map: Newton balancing,
//! rigidity, embeddedness, closed forms, concatenation and the glue scan.

pub mod catalog;
mod concat;
mod embed;
mod genus0;
mod glue;
mod newton;
mod rigidity;

pub use concat::{
    concatenate, one_n_block, reverse_layers, symmetric_block, symmetric_chain_blocks, Block,
};
pub use embed::{
    chain_weights, concavity_check, embeddedness_check, inversion_symmetry_defect, ConcavityReport,
    EmbeddednessReport,
};
pub use genus0::genus0_solve;
pub use glue::{glue_phase_scan, glue_slope, lcm, log_space, phi_grid, GlueScan, GlueTemplate};
pub use newton::{
    iteration_log_csv, multi_start_balance, multi_start_fp, newton_balance, newton_balance_logged,
    seed_nodes, BalanceOutcome, IterationRecord, MultiStart, SolveOptions, THETA2_GATE,
};
pub use rigidity::{rigidity, rigidity_of, RigidityReport};

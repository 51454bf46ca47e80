//! Simulation scenarios, oracle prediction errors and replication grids.
//!
//! Covariates are drawn once per scenario seed and held fixed; each
//! replication redraws only the responses.

mod grid;
mod scenarios;

pub use grid::{
    csv_string, oracle_pe_normal, run_mse_grid, write_csv, GridOptions, GridResult, MethodSpec, MseReport, Problem,
    CSV_HEADER,
};
pub use scenarios::{friedman1, gen_friedman1, gen_isotonic, gen_logistic, isotonic_truth, Dataset, Scenario, ScenarioSpec};

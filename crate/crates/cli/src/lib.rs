//! Experiment files, batch runs and result tables for the island portfolio.

pub mod config;
pub mod generate;
pub mod report;
pub mod run;

pub use config::{config_label, load, Plan};
pub use report::{quartiles, table, QuartileTable, Table};
pub use run::{run_batch, RunRecord, Summary};

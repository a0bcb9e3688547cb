//! Heterogeneous island model for online parallel portfolio selection.
//!
//! Each island runs one optimization method over a shared solution
//! encoding. Islands periodically broadcast their best solutions and a
//! planner replaces under-performing method instances with instances of
//! better-performing kinds.

pub mod config;
pub mod error;
pub mod genome;
pub mod methods;
pub mod planners;
pub mod problems;
pub mod runtime;
pub mod solution;

pub use config::{Clock, ExperimentConfig, MethodClass, MethodConfig, MethodKind, PlannerConfig, PlannerKind};
pub use error::{ConfigError, EvalError, GenomeViolation, LoadError, MethodError, RunError};
pub use genome::{validate_genome, Bounds, EncodingSpec, Genome, ParamRecord, ParamSpace, ParamValue, VertexSet};
pub use problems::Problem;
pub use runtime::{run_experiment, RunResult};
pub use solution::{append_lineage, EvaluatedSolution, Lineage, MethodInstanceId};

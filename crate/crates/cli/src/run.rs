//! Batch execution and per-run persistence.
//!
//! Layout under the batch directory:
//!
//! ```text
//! summary.json  summary.csv
//! run-01/result.json events.ndjson planner.ndjson ledger.ndjson trace.csv
//! run-02/...
//! ```

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use portfolio::{run_experiment, Genome, MethodKind, PlannerKind};
use serde::{Deserialize, Serialize};

use crate::config::Plan;

pub const SUMMARY_FILE: &str = "summary.json";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub run: usize,
    pub seed: u64,
    /// Final best objective; absent when nothing was evaluated.
    pub best: Option<f64>,
    pub evaluations: u64,
    /// Reason the run stopped early, if it did.
    pub aborted: Option<String>,
    /// Run directory relative to the batch directory.
    pub dir: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub benchmark: String,
    pub label: String,
    pub planner: PlannerKind,
    pub catalog: Vec<MethodKind>,
    pub runs: Vec<RunRecord>,
}

impl Summary {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("run,seed,best,evaluations,aborted,dir\n");
        for r in &self.runs {
            let best = r.best.map(|b| b.to_string()).unwrap_or_default();
            let aborted = r.aborted.as_deref().unwrap_or("").replace([',', '\n'], " ");
            let _ = writeln!(out, "{},{},{},{},{},{}", r.run, r.seed, best, r.evaluations, aborted, r.dir);
        }
        out
    }

    pub fn load(batch_dir: &Path) -> Result<Summary> {
        let path = batch_dir.join(SUMMARY_FILE);
        let text = fs::read_to_string(&path).with_context(|| format!("cannot read {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("malformed {}", path.display()))
    }
}

#[derive(Serialize)]
struct RunFile<'a> {
    benchmark: &'a str,
    label: &'a str,
    planner: PlannerKind,
    catalog: &'a [MethodKind],
    seed: u64,
    best: Option<f64>,
    best_genome: Option<&'a Genome>,
    evaluations: u64,
    aborted: Option<&'a str>,
}

/// Runs every seed of `plan` and returns the batch directory. `progress`
/// sees each finished record.
pub fn run_batch(plan: &Plan, mut progress: impl FnMut(&RunRecord)) -> Result<PathBuf> {
    let batch = plan.batch_dir();
    fs::create_dir_all(&batch).with_context(|| format!("cannot create {}", batch.display()))?;
    let mut summary = Summary {
        benchmark: plan.benchmark.clone(),
        label: plan.label.clone(),
        planner: plan.base.planner,
        catalog: plan.base.catalog.clone(),
        runs: Vec::new(),
    };
    let width = plan.seeds.len().to_string().len().max(2);
    for (i, &seed) in plan.seeds.iter().enumerate() {
        let rel = format!("run-{:0width$}", i + 1);
        let dir = batch.join(&rel);
        fs::create_dir_all(&dir).with_context(|| format!("cannot create {}", dir.display()))?;
        let record = match run_experiment(&plan.config_for(seed)) {
            Ok(result) => {
                write(&dir.join("events.ndjson"), &result.events_ndjson())?;
                write(&dir.join("planner.ndjson"), &result.planner_log_ndjson())?;
                write(&dir.join("ledger.ndjson"), &result.ledger_ndjson())?;
                write(&dir.join("trace.csv"), &result.trace_csv())?;
                let file = RunFile {
                    benchmark: &plan.benchmark,
                    label: &plan.label,
                    planner: plan.base.planner,
                    catalog: &plan.base.catalog,
                    seed,
                    best: result.best_objective(),
                    best_genome: result.best.as_ref().map(|b| &b.genome),
                    evaluations: result.total_evaluations,
                    aborted: result.aborted.as_deref(),
                };
                write(&dir.join("result.json"), &serde_json::to_string_pretty(&file)?)?;
                RunRecord {
                    run: i + 1,
                    seed,
                    best: result.best_objective(),
                    evaluations: result.total_evaluations,
                    aborted: result.aborted.clone(),
                    dir: rel,
                }
            }
            Err(e) => {
                RunRecord { run: i + 1, seed, best: None, evaluations: 0, aborted: Some(e.to_string()), dir: rel }
            }
        };
        progress(&record);
        summary.runs.push(record);
        // rewritten after every run so an interrupted batch keeps its rows
        write(&batch.join(SUMMARY_FILE), &serde_json::to_string_pretty(&summary)?)?;
        write(&batch.join("summary.csv"), &summary.to_csv())?;
    }
    Ok(batch)
}

fn write(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).with_context(|| format!("cannot write {}", path.display()))
}

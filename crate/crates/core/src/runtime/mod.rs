//! Island execution: method loops, the fully connected migration bus, the
//! planner loop and the event log.
//!
//! Virtual time runs every island in lockstep on one thread and is a pure
//! function of the configuration. Wall-clock mode gives each island a
//! thread and drives planning and migration from real time.

use std::fmt::Write as _;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::config::{Clock, ExperimentConfig, MethodKind};
use crate::error::RunError;
use crate::methods::Migrant;
use crate::planners::{plan_step, FeatureLedger, LedgerSnapshot, PlanDecision};
use crate::solution::{EvaluatedSolution, MethodInstanceId};

pub mod events;
mod virtual_time;
mod wall_clock;

pub use events::{EventKind, PlannerRecord, RunEvent, TraceRow};

/// Everything a run produced.
#[derive(Clone, Debug)]
pub struct RunResult {
    pub catalog: Vec<MethodKind>,
    /// Best solution shared during the run.
    pub best: Option<EvaluatedSolution>,
    pub events: Vec<RunEvent>,
    /// Ledger snapshot taken at each iteration boundary.
    pub ledger_history: Vec<LedgerSnapshot>,
    pub trace: Vec<TraceRow>,
    pub planner_log: Vec<PlannerRecord>,
    pub total_evaluations: u64,
    /// Set when the run stopped early; the logs are partial.
    pub aborted: Option<String>,
}

impl RunResult {
    pub fn best_objective(&self) -> Option<f64> {
        self.best.as_ref().map(|b| b.objective)
    }

    pub fn events_ndjson(&self) -> String {
        to_ndjson(&self.events)
    }

    pub fn planner_log_ndjson(&self) -> String {
        to_ndjson(&self.planner_log)
    }

    pub fn ledger_ndjson(&self) -> String {
        to_ndjson(&self.ledger_history)
    }

    /// `iteration,best,<kind>...` with one row per iteration boundary.
    pub fn trace_csv(&self) -> String {
        let mut out = String::from("iteration,best");
        for k in &self.catalog {
            out.push(',');
            out.push_str(k.name());
        }
        out.push('\n');
        for row in &self.trace {
            let best = row.best.map(|b| b.to_string()).unwrap_or_default();
            let _ = write!(out, "{},{}", row.iteration, best);
            for c in &row.counts {
                let _ = write!(out, ",{c}");
            }
            out.push('\n');
        }
        out
    }
}

fn to_ndjson<T: serde::Serialize>(records: &[T]) -> String {
    let mut out = String::new();
    for r in records {
        out.push_str(&serde_json::to_string(r).expect("records serialize"));
        out.push('\n');
    }
    out
}

pub fn run_experiment(config: &ExperimentConfig) -> Result<RunResult, RunError> {
    config.validate()?;
    match config.clock {
        Clock::VirtualTime { steps_per_iteration, steps_per_migration } => {
            virtual_time::run(config, steps_per_iteration, steps_per_migration)
        }
        Clock::WallClock { iteration_length, migration_interval } => {
            wall_clock::run(config, iteration_length, migration_interval)
        }
    }
}

/// Random stream of an island's `epoch`-th instance. Stream 0 belongs to
/// the planner.
pub fn island_rng(seed: u64, island: usize, epoch: u32) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(1 + ((island as u64) << 32 | epoch as u64));
    rng
}

pub fn planner_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Planner-side state shared by both schedulers: ledger, global best and
/// all logs.
struct Control<'a> {
    config: &'a ExperimentConfig,
    ledger: FeatureLedger,
    rng: ChaCha8Rng,
    best: Option<EvaluatedSolution>,
    events: Vec<RunEvent>,
    history: Vec<LedgerSnapshot>,
    trace: Vec<TraceRow>,
    planner_log: Vec<PlannerRecord>,
    total_evaluations: u64,
}

impl<'a> Control<'a> {
    fn new(config: &'a ExperimentConfig) -> Self {
        Self {
            config,
            ledger: FeatureLedger::new(
                &config.catalog,
                &config.planner_config,
                config.planner.protects_new_instances(),
            ),
            rng: planner_rng(config.seed),
            best: None,
            events: Vec::new(),
            history: Vec::new(),
            trace: Vec::new(),
            planner_log: Vec::new(),
            total_evaluations: 0,
        }
    }

    fn log(&mut self, time: u64, kind: EventKind) {
        self.events.push(RunEvent { time, kind });
    }

    fn started(&mut self, time: u64, instance: MethodInstanceId, kind: MethodKind, by_planner: bool) {
        self.ledger.register(instance, kind, by_planner);
        self.log(time, EventKind::Start { instance, kind, by_planner });
    }

    fn killed(&mut self, time: u64, instance: MethodInstanceId, kind: MethodKind, evaluations: u64, dropped: u64) {
        self.finished(time, instance, evaluations);
        self.ledger.retire(instance);
        if dropped > 0 {
            self.log(time, EventKind::Dropped { island: instance.island, count: dropped });
        }
        self.log(time, EventKind::Kill { instance, kind });
    }

    fn finished(&mut self, time: u64, instance: MethodInstanceId, n: u64) {
        self.total_evaluations += n;
        self.log(time, EventKind::EvaluationCount { instance, n });
    }

    /// Logs a share and returns the migrant to deliver.
    fn shared(
        &mut self,
        time: u64,
        sender: MethodInstanceId,
        kind: MethodKind,
        solution: EvaluatedSolution,
    ) -> Migrant {
        let digest = solution.genome.digest();
        let effect = self.ledger.observe_share(sender, solution.objective, digest, Some(&solution.lineage));
        self.log(
            time,
            EventKind::Share {
                sender,
                kind,
                objective: solution.objective,
                digest,
                seq: solution.sequence_no,
                lineage: effect.improved_global.then(|| solution.lineage.clone()),
            },
        );
        if effect.improved_global {
            self.log(time, EventKind::Improve { instance: sender, objective: solution.objective });
            self.best = Some(solution.clone());
        }
        Migrant { sender, sender_kind: kind, solution }
    }

    fn helped(&mut self, time: u64, receiver: MethodInstanceId, sender: MethodInstanceId) {
        self.ledger.observe_help(sender);
        self.log(time, EventKind::Helped { receiver, sender });
    }

    /// Iteration boundary: logs, snapshots and asks the policy for a
    /// decision.
    fn boundary(&mut self, time: u64, t: usize, running: &[MethodKind]) -> (PlanDecision, String) {
        self.log(time, EventKind::IterationBoundary { t });
        let counts = self.config.catalog.iter().map(|k| running.iter().filter(|r| *r == k).count()).collect();
        self.trace.push(TraceRow { iteration: t, best: self.best.as_ref().map(|b| b.objective), counts });
        let snapshot = self.ledger.snapshot();
        let digest = format!("{:016x}", snapshot.digest());
        let decision = plan_step(
            self.config.planner,
            &snapshot,
            t,
            self.config.planner_config.iterations,
            &self.config.planner_config,
            &mut self.rng,
        );
        self.history.push(snapshot);
        (decision, digest)
    }

    fn decided(&mut self, t: usize, digest: String, decision: PlanDecision, started: Option<MethodInstanceId>) {
        self.planner_log.push(PlannerRecord {
            iteration: t,
            snapshot_digest: digest,
            decision,
            acknowledged: started.is_some(),
            started,
        });
        self.ledger.end_window();
    }

    fn into_result(self, aborted: Option<String>) -> RunResult {
        RunResult {
            catalog: self.config.catalog.clone(),
            best: self.best,
            events: self.events,
            ledger_history: self.history,
            trace: self.trace,
            planner_log: self.planner_log,
            total_evaluations: self.total_evaluations,
            aborted,
        }
    }
}

/// Rebuilds the ledger snapshots of a run from its event log alone.
pub fn replay_ledger(config: &ExperimentConfig, events: &[RunEvent]) -> Vec<LedgerSnapshot> {
    let mut ledger =
        FeatureLedger::new(&config.catalog, &config.planner_config, config.planner.protects_new_instances());
    let mut snapshots = Vec::new();
    let mut pending_close = false;
    for e in events {
        let closes =
            !matches!(e.kind, EventKind::Kill { .. } | EventKind::Start { .. } | EventKind::EvaluationCount { .. });
        if pending_close && closes {
            ledger.end_window();
            pending_close = false;
        }
        match &e.kind {
            EventKind::Start { instance, kind, by_planner } => ledger.register(*instance, *kind, *by_planner),
            EventKind::Kill { instance, .. } => ledger.retire(*instance),
            EventKind::Share { sender, objective, digest, lineage, .. } => {
                ledger.observe_share(*sender, *objective, *digest, lineage.as_ref());
            }
            EventKind::Helped { sender, .. } => ledger.observe_help(*sender),
            EventKind::IterationBoundary { .. } => {
                snapshots.push(ledger.snapshot());
                pending_close = true;
            }
            EventKind::Improve { .. } | EventKind::Dropped { .. } | EventKind::EvaluationCount { .. } => {}
        }
    }
    snapshots
}

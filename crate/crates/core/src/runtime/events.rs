//! Run event log records.

use serde::{Deserialize, Serialize};

use crate::config::MethodKind;
use crate::planners::PlanDecision;
use crate::solution::{Lineage, MethodInstanceId};

/// One entry of the event log. `time` is the per-island step count in
/// virtual time and elapsed microseconds on the wall clock.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunEvent {
    pub time: u64,
    #[serde(flatten)]
    pub kind: EventKind,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "event")]
pub enum EventKind {
    Start {
        instance: MethodInstanceId,
        kind: MethodKind,
        by_planner: bool,
    },
    Kill {
        instance: MethodInstanceId,
        kind: MethodKind,
    },
    /// A broadcast best solution. The lineage is recorded only when the
    /// share improved the global best.
    Share {
        sender: MethodInstanceId,
        kind: MethodKind,
        objective: f64,
        digest: u64,
        seq: u64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        lineage: Option<Lineage>,
    },
    Improve {
        instance: MethodInstanceId,
        objective: f64,
    },
    /// A migrant from `sender` strictly improved `receiver`'s best.
    Helped {
        receiver: MethodInstanceId,
        sender: MethodInstanceId,
    },
    /// Deliveries discarded because the island was being replaced.
    Dropped {
        island: u32,
        count: u64,
    },
    IterationBoundary {
        t: usize,
    },
    /// Evaluations performed by an instance over its whole lifetime,
    /// logged when it is killed or the run ends.
    EvaluationCount {
        instance: MethodInstanceId,
        n: u64,
    },
}

/// One planning iteration as seen by the planner.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlannerRecord {
    pub iteration: usize,
    pub snapshot_digest: String,
    pub decision: PlanDecision,
    /// Replacement carried out by the runtime; `false` for no-ops and
    /// failed replacements.
    pub acknowledged: bool,
    /// Instance started in response, if any.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub started: Option<MethodInstanceId>,
}

/// Best objective and running kinds at an iteration boundary.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub iteration: usize,
    pub best: Option<f64>,
    /// Running instances per catalog kind, catalog order.
    pub counts: Vec<usize>,
}

//! Evaluated solutions and the method-instance history they carry.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::genome::Genome;

/// Identifies one running optimizer: the island it runs on and how many
/// instances that island has started before it.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct MethodInstanceId {
    pub island: u32,
    pub epoch: u32,
}

impl MethodInstanceId {
    pub fn new(island: usize, epoch: u32) -> Self {
        Self { island: island as u32, epoch }
    }

    pub fn island(&self) -> usize {
        self.island as usize
    }
}

impl fmt::Display for MethodInstanceId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}", self.island, self.epoch)
    }
}

/// Append-only history of the instances that created or modified a solution.
///
/// Stored as a shared, run-length encoded list so that cloning and appending
/// are O(1); consecutive modifications by the same instance collapse into a
/// single run.
#[derive(Clone, Default)]
pub struct Lineage {
    head: Option<Arc<Run>>,
}

struct Run {
    id: MethodInstanceId,
    count: u64,
    len: u64,
    parent: Option<Arc<Run>>,
}

impl Drop for Run {
    // iterative to avoid deep recursion on long histories
    fn drop(&mut self) {
        let mut next = self.parent.take();
        while let Some(node) = next {
            match Arc::try_unwrap(node) {
                Ok(mut run) => next = run.parent.take(),
                Err(_) => break,
            }
        }
    }
}

impl Lineage {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn single(id: MethodInstanceId) -> Self {
        Self::new().appended(id)
    }

    /// Returns the history extended by `id`. Duplicates are kept.
    pub fn appended(&self, id: MethodInstanceId) -> Self {
        let run = match &self.head {
            Some(head) if head.id == id => {
                Run { id, count: head.count + 1, len: head.len + 1, parent: head.parent.clone() }
            }
            Some(head) => Run { id, count: 1, len: head.len + 1, parent: Some(head.clone()) },
            None => Run { id, count: 1, len: 1, parent: None },
        };
        Self { head: Some(Arc::new(run)) }
    }

    pub fn len(&self) -> u64 {
        self.head.as_ref().map_or(0, |h| h.len)
    }

    pub fn is_empty(&self) -> bool {
        self.head.is_none()
    }

    pub fn last(&self) -> Option<MethodInstanceId> {
        self.head.as_ref().map(|h| h.id)
    }

    /// Runs `(id, repetitions)` from oldest to newest.
    pub fn runs(&self) -> Vec<(MethodInstanceId, u64)> {
        let mut out = Vec::new();
        let mut node = self.head.as_deref();
        while let Some(run) = node {
            out.push((run.id, run.count));
            node = run.parent.as_deref();
        }
        out.reverse();
        out
    }

    pub fn from_runs<I: IntoIterator<Item = (MethodInstanceId, u64)>>(runs: I) -> Self {
        let mut lineage = Self::new();
        for (id, count) in runs {
            for _ in 0..count {
                lineage = lineage.appended(id);
            }
        }
        lineage
    }

    /// Expanded history, oldest first.
    pub fn ids(&self) -> Vec<MethodInstanceId> {
        self.runs().into_iter().flat_map(|(id, c)| std::iter::repeat_n(id, c as usize)).collect()
    }

    /// Number of occurrences of each instance.
    pub fn occurrences(&self) -> BTreeMap<MethodInstanceId, u64> {
        let mut counts = BTreeMap::new();
        let mut node = self.head.as_deref();
        while let Some(run) = node {
            *counts.entry(run.id).or_insert(0) += run.count;
            node = run.parent.as_deref();
        }
        counts
    }
}

impl PartialEq for Lineage {
    fn eq(&self, other: &Self) -> bool {
        match (&self.head, &other.head) {
            (Some(a), Some(b)) if Arc::ptr_eq(a, b) => true,
            _ => self.len() == other.len() && self.runs() == other.runs(),
        }
    }
}

impl Eq for Lineage {}

impl fmt::Debug for Lineage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.runs()).finish()
    }
}

impl Serialize for Lineage {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let runs: Vec<(u32, u32, u64)> = self.runs().into_iter().map(|(id, c)| (id.island, id.epoch, c)).collect();
        runs.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Lineage {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let runs = Vec::<(u32, u32, u64)>::deserialize(deserializer)?;
        let mut lineage = Lineage::new();
        for (island, epoch, count) in runs {
            let id = MethodInstanceId { island, epoch };
            // rebuild run directly; avoid re-appending count times
            let parent = lineage.head.take();
            let len = parent.as_ref().map_or(0, |p| p.len) + count;
            lineage.head = Some(Arc::new(Run { id, count, len, parent }));
        }
        Ok(lineage)
    }
}

/// A genome together with its objective (minimized) and history.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvaluatedSolution {
    pub genome: Genome,
    pub objective: f64,
    pub lineage: Lineage,
    pub origin: MethodInstanceId,
    pub sequence_no: u64,
}

impl EvaluatedSolution {
    pub fn new(genome: Genome, objective: f64, lineage: Lineage, origin: MethodInstanceId, sequence_no: u64) -> Self {
        debug_assert!(objective.is_finite());
        Self { genome, objective, lineage, origin, sequence_no }
    }

    pub fn is_better_than(&self, other: &EvaluatedSolution) -> bool {
        self.objective < other.objective
    }
}

/// Returns `s` with `id` appended to its lineage; nothing else changes.
pub fn append_lineage(s: EvaluatedSolution, id: MethodInstanceId) -> EvaluatedSolution {
    EvaluatedSolution { lineage: s.lineage.appended(id), ..s }
}

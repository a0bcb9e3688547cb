//! Features observed from migration traffic, per method instance.
//!
//! Kind-level values are always derived by summing the instances of a kind,
//! so the two views cannot drift apart.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::hash::Hasher;

use fnv::{FnvHashSet, FnvHasher};
use serde::{Deserialize, Serialize};

use crate::config::{MethodKind, PlannerConfig};
use crate::solution::{Lineage, MethodInstanceId};

/// Counters accumulated over a window or over an instance's lifetime.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Counts {
    /// Shares that improved the global best.
    pub qi: u64,
    pub af_sum: f64,
    pub af_count: u64,
    /// Shares of genomes the instance had not shared before.
    pub qm: u64,
    /// Shares that entered the global top-N archive.
    pub qual: u64,
    /// Migrants of this instance that improved another instance's best.
    pub helper: u64,
}

impl Counts {
    pub fn af_mean(&self) -> Option<f64> {
        (self.af_count > 0).then(|| self.af_sum / self.af_count as f64)
    }

    fn add(&mut self, other: &Counts) {
        self.qi += other.qi;
        self.af_sum += other.af_sum;
        self.af_count += other.af_count;
        self.qm += other.qm;
        self.qual += other.qual;
        self.helper += other.helper;
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InstanceFeatures {
    pub id: MethodInstanceId,
    pub kind: MethodKind,
    pub alive: bool,
    /// Planning iterations completed since the planner started it; `None`
    /// for instances of the initial assignment.
    pub age: Option<usize>,
    pub protected: bool,
    pub window: Counts,
    pub total: Counts,
    /// Occurrences in the lineage of the global best.
    pub bc: u64,
    /// Improvements of the global best over the last `n_patience` windows,
    /// the current one included.
    pub recent_qi: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KindFeatures {
    pub kind: MethodKind,
    pub running: usize,
    pub ever_run: bool,
    /// Last planning iteration during which an instance of the kind was
    /// alive.
    pub last_run: Option<usize>,
    pub window: Counts,
    pub total: Counts,
    pub bc: u64,
}

/// Everything a planner policy may look at when deciding.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LedgerSnapshot {
    pub iteration: usize,
    pub global_best: Option<f64>,
    pub archive: Vec<f64>,
    pub instances: Vec<InstanceFeatures>,
    /// Catalog order.
    pub kinds: Vec<KindFeatures>,
}

impl LedgerSnapshot {
    pub fn digest(&self) -> u64 {
        let text = serde_json::to_string(self).expect("snapshot serializes");
        let mut h = FnvHasher::default();
        h.write(text.as_bytes());
        h.finish()
    }

    pub fn alive(&self) -> impl Iterator<Item = &InstanceFeatures> {
        self.instances.iter().filter(|i| i.alive)
    }

    pub fn kind(&self, kind: MethodKind) -> Option<&KindFeatures> {
        self.kinds.iter().find(|k| k.kind == kind)
    }
}

/// What a share changed in the ledger.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ShareEffect {
    pub improved_global: bool,
    pub new_material: bool,
    pub entered_archive: bool,
}

#[derive(Clone, Debug)]
struct Entry {
    kind: MethodKind,
    alive: bool,
    started_at: Option<usize>,
    window: Counts,
    total: Counts,
    shared: FnvHashSet<u64>,
    qi_history: VecDeque<u64>,
}

#[derive(Clone, Debug)]
pub struct FeatureLedger {
    catalog: Vec<MethodKind>,
    top_n: usize,
    n_protect: usize,
    n_patience: usize,
    protects: bool,
    entries: BTreeMap<MethodInstanceId, Entry>,
    global_best: Option<(f64, Lineage)>,
    /// `(objective, genome digest)`, ascending, no duplicate digests.
    archive: Vec<(f64, u64)>,
    iteration: usize,
    ever_run: BTreeSet<MethodKind>,
    last_run: BTreeMap<MethodKind, usize>,
}

impl FeatureLedger {
    pub fn new(catalog: &[MethodKind], config: &PlannerConfig, protects: bool) -> Self {
        Self {
            catalog: catalog.to_vec(),
            top_n: config.top_n,
            n_protect: config.n_protect,
            n_patience: config.n_patience.max(1),
            protects,
            entries: BTreeMap::new(),
            global_best: None,
            archive: Vec::new(),
            iteration: 0,
            ever_run: BTreeSet::new(),
            last_run: BTreeMap::new(),
        }
    }

    /// Current planning iteration (number of closed windows).
    pub fn iteration(&self) -> usize {
        self.iteration
    }

    pub fn global_best(&self) -> Option<f64> {
        self.global_best.as_ref().map(|(f, _)| *f)
    }

    pub fn global_best_lineage(&self) -> Option<&Lineage> {
        self.global_best.as_ref().map(|(_, l)| l)
    }

    /// Adds a live instance; `by_planner` marks instances subject to
    /// protection.
    pub fn register(&mut self, id: MethodInstanceId, kind: MethodKind, by_planner: bool) {
        self.ever_run.insert(kind);
        self.last_run.insert(kind, self.iteration);
        self.entries.insert(
            id,
            Entry {
                kind,
                alive: true,
                started_at: by_planner.then_some(self.iteration),
                window: Counts::default(),
                total: Counts::default(),
                shared: FnvHashSet::default(),
                qi_history: VecDeque::new(),
            },
        );
    }

    pub fn retire(&mut self, id: MethodInstanceId) {
        if let Some(e) = self.entries.get_mut(&id) {
            e.alive = false;
        }
    }

    pub fn kind_of(&self, id: MethodInstanceId) -> Option<MethodKind> {
        self.entries.get(&id).map(|e| e.kind)
    }

    /// Records one shared solution. `lineage` is needed only when the
    /// share improves the global best.
    pub fn observe_share(
        &mut self,
        sender: MethodInstanceId,
        objective: f64,
        digest: u64,
        lineage: Option<&Lineage>,
    ) -> ShareEffect {
        let mut effect = ShareEffect::default();
        let improved = self.global_best.as_ref().is_none_or(|(best, _)| objective < *best);
        if improved {
            effect.improved_global = true;
            let lineage =
                lineage.cloned().or_else(|| self.global_best.as_ref().map(|(_, l)| l.clone())).unwrap_or_default();
            self.global_best = Some((objective, lineage));
        }
        effect.entered_archive = self.offer_archive(objective, digest);
        let Some(entry) = self.entries.get_mut(&sender) else {
            log::warn!("share from unregistered instance {sender}");
            return effect;
        };
        effect.new_material = entry.shared.insert(digest);
        for counts in [&mut entry.window, &mut entry.total] {
            counts.af_sum += objective;
            counts.af_count += 1;
            counts.qi += effect.improved_global as u64;
            counts.qm += effect.new_material as u64;
            counts.qual += effect.entered_archive as u64;
        }
        effect
    }

    /// Credits `sender` whose migrant improved some other instance.
    pub fn observe_help(&mut self, sender: MethodInstanceId) {
        if let Some(e) = self.entries.get_mut(&sender) {
            e.window.helper += 1;
            e.total.helper += 1;
        }
    }

    fn offer_archive(&mut self, objective: f64, digest: u64) -> bool {
        if self.archive.iter().any(|(_, d)| *d == digest) {
            return false;
        }
        if self.archive.len() >= self.top_n && self.archive.last().is_some_and(|(worst, _)| objective >= *worst) {
            return false;
        }
        let pos = self.archive.partition_point(|(f, _)| *f <= objective);
        self.archive.insert(pos, (objective, digest));
        self.archive.truncate(self.top_n);
        true
    }

    fn age(&self, e: &Entry) -> Option<usize> {
        e.started_at.map(|s| self.iteration - s)
    }

    fn recent_qi(&self, e: &Entry) -> u64 {
        e.window.qi + e.qi_history.iter().rev().take(self.n_patience - 1).sum::<u64>()
    }

    pub fn snapshot(&self) -> LedgerSnapshot {
        let bc_map = self.global_best.as_ref().map(|(_, l)| l.occurrences()).unwrap_or_default();
        let instances: Vec<InstanceFeatures> = self
            .entries
            .iter()
            .map(|(id, e)| {
                let age = self.age(e);
                InstanceFeatures {
                    id: *id,
                    kind: e.kind,
                    alive: e.alive,
                    age,
                    protected: e.alive && self.protects && age.is_some_and(|a| a < self.n_protect),
                    window: e.window,
                    total: e.total,
                    bc: bc_map.get(id).copied().unwrap_or(0),
                    recent_qi: self.recent_qi(e),
                }
            })
            .collect();
        let kinds = self
            .catalog
            .iter()
            .map(|&kind| {
                let mut k = KindFeatures {
                    kind,
                    running: 0,
                    ever_run: self.ever_run.contains(&kind),
                    last_run: self.last_run.get(&kind).copied(),
                    window: Counts::default(),
                    total: Counts::default(),
                    bc: 0,
                };
                for i in instances.iter().filter(|i| i.kind == kind) {
                    k.running += i.alive as usize;
                    k.window.add(&i.window);
                    k.total.add(&i.total);
                    k.bc += i.bc;
                }
                k
            })
            .collect();
        LedgerSnapshot {
            iteration: self.iteration,
            global_best: self.global_best(),
            archive: self.archive.iter().map(|(f, _)| *f).collect(),
            instances,
            kinds,
        }
    }

    /// Closes the current window: windowed counters reset, ages advance.
    pub fn end_window(&mut self) {
        let keep = self.n_patience;
        for e in self.entries.values_mut() {
            e.qi_history.push_back(e.window.qi);
            while e.qi_history.len() > keep {
                e.qi_history.pop_front();
            }
            e.window = Counts::default();
        }
        self.iteration += 1;
        let running: BTreeSet<MethodKind> = self.entries.values().filter(|e| e.alive).map(|e| e.kind).collect();
        for kind in running {
            self.last_run.insert(kind, self.iteration);
        }
    }
}

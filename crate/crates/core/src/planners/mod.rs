//! Planner policies: which instance to kill and which kind to start.
//!
//! [`plan_step`] is a pure function of a [`LedgerSnapshot`] and the planner
//! RNG. Kill ties go to the lowest feature value, then the lowest island;
//! start ties go to catalog order.

use std::cmp::Ordering;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::config::{MethodClass, MethodKind, PlannerConfig, PlannerKind};
use crate::error::ConfigError;
use crate::problems::DynRng;
use crate::solution::MethodInstanceId;

pub mod ledger;

pub use ledger::{Counts, FeatureLedger, InstanceFeatures, KindFeatures, LedgerSnapshot, ShareEffect};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlanDecision {
    pub kill: Option<MethodInstanceId>,
    pub start: Option<MethodKind>,
}

impl PlanDecision {
    pub fn noop() -> Self {
        Self::default()
    }

    pub fn replace(kill: MethodInstanceId, start: MethodKind) -> Self {
        Self { kill: Some(kill), start: Some(start) }
    }

    pub fn is_noop(&self) -> bool {
        self.kill.is_none()
    }
}

/// Kind per island at the start of a run: round-robin over the catalog, or
/// uniformly random for the random planner.
pub fn initial_assignment(
    catalog: &[MethodKind],
    islands: usize,
    random: bool,
    rng: &mut DynRng,
) -> Result<Vec<MethodKind>, ConfigError> {
    if islands < 1 {
        return Err(ConfigError("islands must be at least 1".into()));
    }
    if catalog.is_empty() {
        return Err(ConfigError("portfolio catalog is empty".into()));
    }
    Ok((0..islands)
        .map(|i| if random { *catalog.choose(rng).expect("non-empty") } else { catalog[i % catalog.len()] })
        .collect())
}

/// One planning decision at iteration `t` of `iterations`.
pub fn plan_step(
    policy: PlannerKind,
    snap: &LedgerSnapshot,
    t: usize,
    iterations: usize,
    config: &PlannerConfig,
    rng: &mut DynRng,
) -> PlanDecision {
    if policy == PlannerKind::Static {
        return PlanDecision::noop();
    }
    let killable: Vec<&InstanceFeatures> = snap.alive().filter(|i| !i.protected).collect();
    if killable.is_empty() {
        log::warn!("{policy}: every instance is protected at iteration {t}, skipping");
        return PlanDecision::noop();
    }

    let unrun: Vec<MethodKind> = snap.kinds.iter().filter(|k| !k.ever_run).map(|k| k.kind).collect();
    if !unrun.is_empty() {
        let start =
            if policy == PlannerKind::RandomGuaranteed { *unrun.choose(rng).expect("non-empty") } else { unrun[0] };
        let mut candidates = killable.clone();
        if policy == PlannerKind::LazyQuantityOfImprovement {
            // patience still applies to the never-run precedence
            candidates.retain(|i| i.recent_qi == 0);
            if candidates.is_empty() {
                return PlanDecision::noop();
            }
        }
        let victim = least_useful(policy, snap, &candidates);
        return PlanDecision::replace(victim, start);
    }

    match policy {
        PlannerKind::Static => PlanDecision::noop(),
        PlannerKind::Random => random_replacement(snap, &killable, rng),
        PlannerKind::RandomGuaranteed => guaranteed_diversity(snap, &killable, config.m_min, rng),
        PlannerKind::MethodDescription => method_description(snap, &killable, t, iterations, config),
        PlannerKind::BestHelper => {
            if t < config.n_init {
                return PlanDecision::noop();
            }
            let victim = kill_by_kind(snap, &killable, |k| k.window.helper as f64, |i| i.window.helper as f64);
            PlanDecision::replace(victim, start_max(snap, |k| k.window.helper as f64))
        }
        PlannerKind::AverageFitness => {
            let victim = kill_min(&killable, af_usefulness);
            PlanDecision::replace(victim, start_max(snap, |k| k.window.af_mean().map_or(f64::NEG_INFINITY, |m| -m)))
        }
        PlannerKind::QuantityOfImprovement => {
            let victim = kill_min(&killable, |i| i.window.qi as f64);
            PlanDecision::replace(victim, start_max(snap, |k| k.window.qi as f64))
        }
        PlannerKind::QuantityOfMaterial => {
            let victim = kill_min(&killable, |i| i.window.qm as f64);
            PlanDecision::replace(victim, start_max(snap, |k| k.window.qm as f64))
        }
        PlannerKind::BestMaterial => {
            let victim = kill_min(&killable, |i| i.window.qual as f64);
            PlanDecision::replace(victim, start_max(snap, |k| k.window.qual as f64))
        }
        PlannerKind::BestContribution => {
            if t < config.n_init {
                return PlanDecision::noop();
            }
            let victim = kill_by_kind(snap, &killable, |k| k.bc as f64, |i| i.bc as f64);
            PlanDecision::replace(victim, start_max(snap, |k| k.bc as f64))
        }
        PlannerKind::LazyQuantityOfImprovement => {
            let idle: Vec<&InstanceFeatures> = killable.iter().copied().filter(|i| i.recent_qi == 0).collect();
            if idle.is_empty() {
                return PlanDecision::noop();
            }
            let victim = kill_min(&idle, |i| i.total.qi as f64);
            PlanDecision::replace(victim, start_max(snap, |k| k.window.qi as f64))
        }
    }
}

/// The instance a policy considers least useful, used by the rule that
/// gives never-run kinds precedence.
fn least_useful(policy: PlannerKind, snap: &LedgerSnapshot, killable: &[&InstanceFeatures]) -> MethodInstanceId {
    match policy {
        PlannerKind::BestHelper => kill_by_kind(snap, killable, |k| k.window.helper as f64, |i| i.window.helper as f64),
        PlannerKind::BestContribution => kill_by_kind(snap, killable, |k| k.bc as f64, |i| i.bc as f64),
        PlannerKind::AverageFitness => kill_min(killable, af_usefulness),
        PlannerKind::QuantityOfMaterial => kill_min(killable, |i| i.window.qm as f64),
        PlannerKind::BestMaterial => kill_min(killable, |i| i.window.qual as f64),
        PlannerKind::LazyQuantityOfImprovement => kill_min(killable, |i| i.recent_qi as f64),
        _ => kill_min(killable, |i| i.window.qi as f64),
    }
}

/// Lower average objective is better; instances that shared nothing in the
/// window rank worst.
fn af_usefulness(i: &InstanceFeatures) -> f64 {
    i.window.af_mean().map_or(f64::NEG_INFINITY, |m| -m)
}

fn kill_min(candidates: &[&InstanceFeatures], usefulness: impl Fn(&InstanceFeatures) -> f64) -> MethodInstanceId {
    candidates
        .iter()
        .min_by(|a, b| cmp_f64(usefulness(a), usefulness(b)).then(a.id.island.cmp(&b.id.island)))
        .expect("non-empty candidates")
        .id
}

/// Picks the kind with the lowest kind-level feature among kinds that have
/// a killable instance, then that kind's least useful instance.
fn kill_by_kind(
    snap: &LedgerSnapshot,
    killable: &[&InstanceFeatures],
    kind_value: impl Fn(&KindFeatures) -> f64,
    instance_value: impl Fn(&InstanceFeatures) -> f64,
) -> MethodInstanceId {
    let kind = snap
        .kinds
        .iter()
        .filter(|k| killable.iter().any(|i| i.kind == k.kind))
        .min_by(|a, b| {
            let lowest_island = |k: MethodKind| killable.iter().filter(|i| i.kind == k).map(|i| i.id.island).min();
            cmp_f64(kind_value(a), kind_value(b)).then(lowest_island(a.kind).cmp(&lowest_island(b.kind)))
        })
        .expect("some kind has a killable instance")
        .kind;
    let of_kind: Vec<&InstanceFeatures> = killable.iter().copied().filter(|i| i.kind == kind).collect();
    kill_min(&of_kind, instance_value)
}

fn start_max(snap: &LedgerSnapshot, usefulness: impl Fn(&KindFeatures) -> f64) -> MethodKind {
    start_max_among(snap.kinds.iter(), usefulness).expect("catalog is non-empty")
}

fn start_max_among<'a>(
    kinds: impl Iterator<Item = &'a KindFeatures>,
    usefulness: impl Fn(&KindFeatures) -> f64,
) -> Option<MethodKind> {
    let mut best: Option<(&KindFeatures, f64)> = None;
    for k in kinds {
        let v = usefulness(k);
        if best.is_none_or(|(_, bv)| cmp_f64(v, bv) == Ordering::Greater) {
            best = Some((k, v));
        }
    }
    best.map(|(k, _)| k.kind)
}

fn cmp_f64(a: f64, b: f64) -> Ordering {
    a.partial_cmp(&b).unwrap_or(Ordering::Equal)
}

fn random_replacement(snap: &LedgerSnapshot, killable: &[&InstanceFeatures], rng: &mut DynRng) -> PlanDecision {
    let victim = killable[rng.gen_range(0..killable.len())].id;
    let start = snap.kinds[rng.gen_range(0..snap.kinds.len())].kind;
    PlanDecision::replace(victim, start)
}

fn guaranteed_diversity(
    snap: &LedgerSnapshot,
    killable: &[&InstanceFeatures],
    m_min: usize,
    rng: &mut DynRng,
) -> PlanDecision {
    let floor = m_min.min(snap.kinds.len());
    let distinct = snap.kinds.iter().filter(|k| k.running > 0).count();
    let running = |kind: MethodKind| snap.kind(kind).map_or(0, |k| k.running);
    let crowded: Vec<&InstanceFeatures> = killable.iter().copied().filter(|i| running(i.kind) >= 2).collect();
    let least_recent = || {
        snap.kinds.iter().filter(|k| k.running == 0).min_by_key(|k| k.last_run.map_or(-1, |r| r as i64)).map(|k| k.kind)
    };

    if distinct < floor {
        if let (Some(start), false) = (least_recent(), crowded.is_empty()) {
            let victim = crowded[rng.gen_range(0..crowded.len())].id;
            return PlanDecision::replace(victim, start);
        }
    }
    let decision = random_replacement(snap, killable, rng);
    let (victim, start) = (decision.kill.expect("kill"), decision.start.expect("start"));
    let victim_kind = killable.iter().find(|i| i.id == victim).expect("victim is killable").kind;
    let after = distinct - (running(victim_kind) == 1 && victim_kind != start) as usize
        + (running(start) == 0 && victim_kind != start) as usize;
    if after >= floor {
        return decision;
    }
    // the random draw would break the floor: keep the victim's kind alive
    if !crowded.is_empty() {
        return PlanDecision::replace(crowded[rng.gen_range(0..crowded.len())].id, start);
    }
    match least_recent() {
        Some(kind) => PlanDecision::replace(victim, kind),
        None => PlanDecision::noop(),
    }
}

fn method_description(
    snap: &LedgerSnapshot,
    killable: &[&InstanceFeatures],
    t: usize,
    iterations: usize,
    config: &PlannerConfig,
) -> PlanDecision {
    let all = snap.alive().count();
    let exploration = snap.alive().filter(|i| config.class_of(i.kind) == MethodClass::Exploration).count();
    let remaining = 1.0 - t as f64 / iterations as f64;
    if all == 0 || remaining >= exploration as f64 / all as f64 {
        return PlanDecision::noop();
    }
    let candidates: Vec<&InstanceFeatures> =
        killable.iter().copied().filter(|i| config.class_of(i.kind) == MethodClass::Exploration).collect();
    if candidates.is_empty() {
        return PlanDecision::noop();
    }
    let exploitation = snap.kinds.iter().filter(|k| config.class_of(k.kind) == MethodClass::Exploitation);
    let Some(start) = start_max_among(exploitation, |k| k.total.af_mean().map_or(f64::NEG_INFINITY, |m| -m)) else {
        return PlanDecision::noop();
    };
    PlanDecision::replace(kill_min(&candidates, |i| i.window.qi as f64), start)
}

use std::collections::BTreeMap;
use std::sync::Arc;
use std::time::Duration;

use portfolio::problems::tsp::Metric;
use portfolio::problems::{TspInstance, TspProblem};
use portfolio::runtime::{replay_ledger, EventKind};
use portfolio::{run_experiment, Clock, ExperimentConfig, MethodKind, PlannerKind};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn tsp(n: usize, seed: u64) -> Arc<TspProblem> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let coords: Vec<(f64, f64)> = (0..n).map(|_| (rng.gen_range(0.0..100.0), rng.gen_range(0.0..100.0))).collect();
    Arc::new(TspProblem::new("random", TspInstance::from_coords(&coords, Metric::Euclidean).unwrap()))
}

fn small(planner: PlannerKind, iterations: usize, seed: u64) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::new(tsp(12, 1), planner);
    cfg.planner_config.iterations = iterations;
    cfg.planner_config.islands = 8;
    cfg.clock = Clock::VirtualTime { steps_per_iteration: 20, steps_per_migration: 5 };
    cfg.method_config.de_pop = 8;
    cfg.seed = seed;
    cfg
}

fn count(events: &[portfolio::runtime::RunEvent], pred: impl Fn(&EventKind) -> bool) -> usize {
    events.iter().filter(|e| pred(&e.kind)).count()
}

#[test]
fn static_planner_never_replaces() {
    let r = run_experiment(&small(PlannerKind::Static, 50, 3)).unwrap();
    assert!(r.aborted.is_none());
    assert_eq!(count(&r.events, |e| matches!(e, EventKind::Kill { .. })), 0);
    assert_eq!(count(&r.events, |e| matches!(e, EventKind::Start { .. })), 8);
    assert_eq!(count(&r.events, |e| matches!(e, EventKind::IterationBoundary { .. })), 50);
    assert_eq!(r.trace.len(), 50);
}

#[test]
fn random_planner_replaces_every_iteration() {
    let r = run_experiment(&small(PlannerKind::Random, 50, 4)).unwrap();
    assert_eq!(count(&r.events, |e| matches!(e, EventKind::Kill { .. })), 50);
    assert!(r.planner_log.iter().all(|p| p.acknowledged));
    // epochs advance per island
    let mut epochs: BTreeMap<u32, u32> = BTreeMap::new();
    for e in &r.events {
        if let EventKind::Start { instance, .. } = e.kind {
            let prev = epochs.insert(instance.island, instance.epoch);
            assert_eq!(prev.map_or(0, |p| p + 1), instance.epoch);
        }
    }
}

#[test]
fn kill_and_start_bracket_replacements() {
    let r = run_experiment(&small(PlannerKind::QuantityOfImprovement, 20, 5)).unwrap();
    for (i, e) in r.events.iter().enumerate() {
        if let EventKind::Kill { instance, .. } = e.kind {
            match r.events[i + 1].kind {
                EventKind::Start { instance: new, by_planner, .. } => {
                    assert!(by_planner);
                    assert_eq!(new.island, instance.island);
                    assert_eq!(new.epoch, instance.epoch + 1);
                }
                ref other => panic!("kill followed by {other:?}"),
            }
        }
    }
}

#[test]
fn virtual_runs_are_byte_identical() {
    for planner in [PlannerKind::Static, PlannerKind::Random, PlannerKind::BestContribution] {
        let a = run_experiment(&small(planner, 10, 7)).unwrap();
        let b = run_experiment(&small(planner, 10, 7)).unwrap();
        assert_eq!(a.events_ndjson(), b.events_ndjson());
        assert_eq!(a.planner_log_ndjson(), b.planner_log_ndjson());
        assert_eq!(a.trace_csv(), b.trace_csv());
        let c = run_experiment(&small(planner, 10, 8)).unwrap();
        assert_ne!(a.events_ndjson(), c.events_ndjson());
    }
}

#[test]
fn trace_and_evaluation_accounting() {
    let r = run_experiment(&small(PlannerKind::AverageFitness, 15, 9)).unwrap();
    let bests: Vec<f64> = r.trace.iter().map(|t| t.best.unwrap()).collect();
    assert!(bests.windows(2).all(|w| w[1] <= w[0]));
    let min_improve = r
        .events
        .iter()
        .filter_map(|e| match e.kind {
            EventKind::Improve { objective, .. } => Some(objective),
            _ => None,
        })
        .fold(f64::INFINITY, f64::min);
    assert_eq!(*bests.last().unwrap(), min_improve);
    assert_eq!(r.best_objective(), Some(min_improve));
    let counted: u64 = r
        .events
        .iter()
        .filter_map(|e| match e.kind {
            EventKind::EvaluationCount { n, .. } => Some(n),
            _ => None,
        })
        .sum();
    assert_eq!(counted, r.total_evaluations);
    assert!(counted > 0);
    for row in &r.trace {
        assert_eq!(row.counts.iter().sum::<usize>(), 8);
    }
}

#[test]
fn replayed_ledger_matches_history() {
    for planner in [PlannerKind::LazyQuantityOfImprovement, PlannerKind::BestHelper, PlannerKind::RandomGuaranteed] {
        let cfg = small(planner, 12, 10);
        let r = run_experiment(&cfg).unwrap();
        assert_eq!(replay_ledger(&cfg, &r.events), r.ledger_history);
    }
}

#[test]
fn events_round_trip_through_ndjson() {
    let r = run_experiment(&small(PlannerKind::BestMaterial, 5, 11)).unwrap();
    let parsed: Vec<portfolio::runtime::RunEvent> =
        r.events_ndjson().lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(parsed, r.events);
}

#[test]
fn single_island_hill_climbing() {
    let mut cfg = small(PlannerKind::QuantityOfImprovement, 5, 12);
    cfg.catalog = vec![MethodKind::HC];
    cfg.planner_config.islands = 1;
    let r = run_experiment(&cfg).unwrap();
    assert_eq!(count(&r.events, |e| matches!(e, EventKind::Helped { .. })), 0);
    assert!(r.trace.iter().all(|t| t.counts == vec![1]));
}

#[test]
fn invalid_config_is_rejected_before_running() {
    let mut cfg = small(PlannerKind::Static, 5, 1);
    cfg.clock = Clock::VirtualTime { steps_per_iteration: 10, steps_per_migration: 3 };
    assert!(run_experiment(&cfg).is_err());
    let mut cfg = small(PlannerKind::Static, 5, 1);
    cfg.catalog.clear();
    assert!(run_experiment(&cfg).is_err());
}

#[test]
fn wall_clock_run_completes() {
    let mut cfg = small(PlannerKind::Random, 3, 13);
    cfg.planner_config.islands = 4;
    cfg.clock = Clock::WallClock {
        iteration_length: Duration::from_millis(150),
        migration_interval: Duration::from_millis(30),
    };
    let r = run_experiment(&cfg).unwrap();
    assert!(r.aborted.is_none(), "{:?}", r.aborted);
    assert_eq!(count(&r.events, |e| matches!(e, EventKind::IterationBoundary { .. })), 3);
    assert_eq!(count(&r.events, |e| matches!(e, EventKind::Kill { .. })), 3);
    assert!(count(&r.events, |e| matches!(e, EventKind::Share { .. })) > 0);
    let counted: u64 = r
        .events
        .iter()
        .filter_map(|e| match e.kind {
            EventKind::EvaluationCount { n, .. } => Some(n),
            _ => None,
        })
        .sum();
    assert_eq!(counted, r.total_evaluations);
    // same initial kinds as virtual time
    let starts = |r: &portfolio::RunResult| -> Vec<MethodKind> {
        r.events
            .iter()
            .filter_map(|e| match e.kind {
                EventKind::Start { kind, by_planner: false, .. } => Some(kind),
                _ => None,
            })
            .collect()
    };
    let mut virt = cfg.clone();
    virt.clock = Clock::VirtualTime { steps_per_iteration: 10, steps_per_migration: 5 };
    assert_eq!(starts(&r), starts(&run_experiment(&virt).unwrap()));
}

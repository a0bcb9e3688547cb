//! Single-threaded lockstep scheduler.

use rand_chacha::ChaCha8Rng;

use crate::config::{ExperimentConfig, MethodKind};
use crate::error::RunError;
use crate::methods::MethodState;
use crate::planners::initial_assignment;
use crate::solution::MethodInstanceId;

use super::{island_rng, Control, RunResult};

struct Island {
    state: MethodState,
    rng: ChaCha8Rng,
    epoch: u32,
}

pub(super) fn run(config: &ExperimentConfig, per_iteration: u64, per_migration: u64) -> Result<RunResult, RunError> {
    let problem = config.problem.as_ref();
    let mut ctl = Control::new(config);
    let kinds = initial_assignment(
        &config.catalog,
        config.planner_config.islands,
        config.planner.random_initialization(),
        &mut ctl.rng,
    )?;
    let mut islands = Vec::with_capacity(kinds.len());
    for (i, kind) in kinds.into_iter().enumerate() {
        let id = MethodInstanceId::new(i, 0);
        let mut rng = island_rng(config.seed, i, 0);
        let state = MethodState::init(kind, &config.method_config, problem, &mut rng, id)
            .map_err(|source| RunError::Method { island: i, source })?;
        ctl.started(0, id, kind, false);
        islands.push(Island { state, rng, epoch: 0 });
    }

    let mut now = 0u64;
    let ticks = per_iteration / per_migration;
    for t in 0..config.planner_config.iterations {
        for _ in 0..ticks {
            // islands are independent between ticks, so island-major order
            // is equivalent to interleaving single steps
            for island in &mut islands {
                for _ in 0..per_migration {
                    island.state.step(problem, &mut island.rng);
                }
            }
            now += per_migration;
            migration_tick(&mut ctl, &mut islands, now);
        }

        let running: Vec<MethodKind> = islands.iter().map(|i| i.state.kind()).collect();
        let (decision, digest) = ctl.boundary(now, t, &running);
        let mut started = None;
        if let (Some(victim), Some(kind)) = (decision.kill, decision.start) {
            let slot = victim.island();
            let old = &islands[slot];
            debug_assert_eq!(old.state.id(), victim);
            let epoch = old.epoch + 1;
            let id = MethodInstanceId::new(slot, epoch);
            let mut rng = island_rng(config.seed, slot, epoch);
            match MethodState::init(kind, &config.method_config, problem, &mut rng, id) {
                Ok(mut state) => {
                    let old = &islands[slot].state;
                    ctl.killed(now, old.id(), old.kind(), old.evaluations(), old.inbox_len() as u64);
                    if let Some(seed) = ctl.best.clone() {
                        let _ = state.inject_seed(problem, seed);
                    }
                    ctl.started(now, id, kind, true);
                    islands[slot] = Island { state, rng, epoch };
                    started = Some(id);
                }
                Err(e) => {
                    ctl.decided(t, digest, decision, None);
                    finish(&mut ctl, &islands, now);
                    let msg = RunError::Method { island: slot, source: e }.to_string();
                    return Ok(ctl.into_result(Some(msg)));
                }
            }
        }
        ctl.decided(t, digest, decision, started);
    }
    finish(&mut ctl, &islands, now);
    Ok(ctl.into_result(None))
}

fn migration_tick(ctl: &mut Control<'_>, islands: &mut [Island], now: u64) {
    let mut migrants = Vec::new();
    for (slot, island) in islands.iter_mut().enumerate() {
        if let Some(solution) = island.state.share_best() {
            let m = ctl.shared(now, island.state.id(), island.state.kind(), solution);
            migrants.push((slot, m));
        }
    }
    for (from, m) in &migrants {
        for (slot, island) in islands.iter_mut().enumerate() {
            if slot != *from {
                island.state.push_inbox(m.clone());
            }
        }
    }
    let problem = ctl.config.problem.clone();
    for island in islands.iter_mut() {
        let receiver = island.state.id();
        let report = island.state.receive_and_incorporate(problem.as_ref());
        for (sender, _) in report.helpers {
            ctl.helped(now, receiver, sender);
        }
    }
}

fn finish(ctl: &mut Control<'_>, islands: &[Island], now: u64) {
    for island in islands {
        ctl.finished(now, island.state.id(), island.state.evaluations());
    }
}

//! One thread per island, planner on the calling thread.
//!
//! Islands push reports (shares, help credits, evaluation counts) to the
//! planner, which acts as the migration bus and forwards every share to the
//! other islands' command queues.

use std::sync::Arc;
use std::thread;
use std::time::{Duration, Instant};

use rand_chacha::ChaCha8Rng;

use crossbeam_channel::{bounded, unbounded, Receiver, RecvTimeoutError, Sender, TryRecvError};

use crate::config::{ExperimentConfig, MethodConfig, MethodKind};
use crate::error::{MethodError, RunError};
use crate::methods::{MethodState, Migrant};
use crate::planners::initial_assignment;
use crate::problems::Problem;
use crate::solution::{EvaluatedSolution, MethodInstanceId};

use super::{island_rng, Control, RunResult};

enum Command {
    Deliver(Migrant),
    Replace { kind: MethodKind, seed: Option<EvaluatedSolution>, ack: Sender<Result<Replaced, MethodError>> },
    Stop,
}

struct Replaced {
    old: MethodInstanceId,
    old_kind: MethodKind,
    evaluations: u64,
    dropped: u64,
    new: MethodInstanceId,
}

enum Report {
    Share { sender: MethodInstanceId, kind: MethodKind, solution: EvaluatedSolution },
    Helped { receiver: MethodInstanceId, sender: MethodInstanceId },
    Finished { instance: MethodInstanceId, evaluations: u64 },
}

struct Worker {
    slot: usize,
    seed: u64,
    problem: Arc<dyn Problem>,
    method_config: MethodConfig,
    migration_interval: Duration,
    commands: Receiver<Command>,
    reports: Sender<Report>,
}

impl Worker {
    fn run(self, mut state: MethodState, mut rng: ChaCha8Rng) {
        let problem = self.problem.as_ref();
        let mut epoch = 0u32;
        let mut next_tick = Instant::now() + self.migration_interval;
        loop {
            loop {
                match self.commands.try_recv() {
                    Ok(Command::Deliver(m)) => state.push_inbox(m),
                    Ok(Command::Replace { kind, seed, ack }) => {
                        let id = MethodInstanceId::new(self.slot, epoch + 1);
                        let mut new_rng = island_rng(self.seed, self.slot, epoch + 1);
                        match MethodState::init(kind, &self.method_config, problem, &mut new_rng, id) {
                            Ok(mut fresh) => {
                                if let Some(seed) = seed {
                                    let _ = fresh.inject_seed(problem, seed);
                                }
                                let replaced = Replaced {
                                    old: state.id(),
                                    old_kind: state.kind(),
                                    evaluations: state.evaluations(),
                                    dropped: state.inbox_len() as u64,
                                    new: id,
                                };
                                state = fresh;
                                rng = new_rng;
                                epoch += 1;
                                let _ = ack.send(Ok(replaced));
                            }
                            Err(e) => {
                                let _ = ack.send(Err(e));
                            }
                        }
                    }
                    Ok(Command::Stop) | Err(TryRecvError::Disconnected) => {
                        self.tick(&mut state);
                        let _ = self
                            .reports
                            .send(Report::Finished { instance: state.id(), evaluations: state.evaluations() });
                        return;
                    }
                    Err(TryRecvError::Empty) => break,
                }
            }
            if state.is_finished() {
                thread::sleep(Duration::from_millis(1));
            } else {
                state.step(problem, &mut rng);
            }
            if Instant::now() >= next_tick {
                self.tick(&mut state);
                next_tick += self.migration_interval;
            }
        }
    }

    fn tick(&self, state: &mut MethodState) {
        let receiver = state.id();
        for (sender, _) in state.receive_and_incorporate(self.problem.as_ref()).helpers {
            let _ = self.reports.send(Report::Helped { receiver, sender });
        }
        if let Some(solution) = state.share_best() {
            let _ = self.reports.send(Report::Share { sender: state.id(), kind: state.kind(), solution });
        }
    }
}

pub(super) fn run(
    config: &ExperimentConfig,
    iteration_length: Duration,
    migration_interval: Duration,
) -> Result<RunResult, RunError> {
    let mut ctl = Control::new(config);
    let kinds = initial_assignment(
        &config.catalog,
        config.planner_config.islands,
        config.planner.random_initialization(),
        &mut ctl.rng,
    )?;
    let problem = config.problem.clone();
    let mut states = Vec::with_capacity(kinds.len());
    for (i, kind) in kinds.iter().enumerate() {
        let id = MethodInstanceId::new(i, 0);
        let mut rng = island_rng(config.seed, i, 0);
        let state = MethodState::init(*kind, &config.method_config, problem.as_ref(), &mut rng, id)
            .map_err(|source| RunError::Method { island: i, source })?;
        states.push((state, rng));
    }

    let start = Instant::now();
    let elapsed = |start: Instant| start.elapsed().as_micros() as u64;
    let (report_tx, report_rx) = unbounded();
    let mut command_txs = Vec::new();
    let mut handles = Vec::new();
    let mut running: Vec<MethodKind> = kinds.clone();
    for (slot, (state, rng)) in states.into_iter().enumerate() {
        ctl.started(0, state.id(), state.kind(), false);
        let (tx, rx) = unbounded();
        command_txs.push(tx);
        let worker = Worker {
            slot,
            seed: config.seed,
            problem: problem.clone(),
            method_config: config.method_config.clone(),
            migration_interval,
            commands: rx,
            reports: report_tx.clone(),
        };
        handles.push(
            thread::Builder::new()
                .name(format!("island-{slot}"))
                .spawn(move || worker.run(state, rng))
                .expect("spawn island"),
        );
    }
    drop(report_tx);

    let mut aborted = None;
    'iterations: for t in 0..config.planner_config.iterations {
        let deadline = start + iteration_length * (t as u32 + 1);
        loop {
            let wait = deadline.saturating_duration_since(Instant::now());
            match report_rx.recv_timeout(wait) {
                Ok(report) => handle(&mut ctl, &command_txs, report, elapsed(start)),
                Err(RecvTimeoutError::Timeout) => break,
                Err(RecvTimeoutError::Disconnected) => {
                    aborted = Some(RunError::Disconnected.to_string());
                    break 'iterations;
                }
            }
        }
        let now = elapsed(start);
        let (decision, digest) = ctl.boundary(now, t, &running);
        let mut started = None;
        if let (Some(victim), Some(kind)) = (decision.kill, decision.start) {
            let slot = victim.island();
            let (ack_tx, ack_rx) = bounded(1);
            let seed = ctl.best.clone();
            if command_txs[slot].send(Command::Replace { kind, seed, ack: ack_tx }).is_err() {
                aborted = Some(RunError::WorkerPanic(slot).to_string());
                ctl.decided(t, digest, decision, None);
                break;
            }
            // shares still flow while the island swaps its instance
            loop {
                crossbeam_channel::select! {
                    recv(ack_rx) -> msg => {
                        match msg {
                            Ok(Ok(r)) => {
                                let now = elapsed(start);
                                ctl.killed(now, r.old, r.old_kind, r.evaluations, r.dropped);
                                ctl.started(now, r.new, kind, true);
                                running[slot] = kind;
                                started = Some(r.new);
                            }
                            Ok(Err(e)) => aborted = Some(RunError::Method { island: slot, source: e }.to_string()),
                            Err(_) => aborted = Some(RunError::WorkerPanic(slot).to_string()),
                        }
                        break;
                    }
                    recv(report_rx) -> msg => match msg {
                        Ok(report) => handle(&mut ctl, &command_txs, report, elapsed(start)),
                        Err(_) => {
                            aborted = Some(RunError::Disconnected.to_string());
                            break;
                        }
                    },
                }
            }
        }
        ctl.decided(t, digest, decision, started);
        if aborted.is_some() {
            break;
        }
    }

    for tx in &command_txs {
        let _ = tx.send(Command::Stop);
    }
    while let Ok(report) = report_rx.recv() {
        handle(&mut ctl, &[], report, elapsed(start));
    }
    for (slot, h) in handles.into_iter().enumerate() {
        if h.join().is_err() && aborted.is_none() {
            aborted = Some(RunError::WorkerPanic(slot).to_string());
        }
    }
    Ok(ctl.into_result(aborted))
}

/// Applies one island report; shares are forwarded to every other island.
fn handle(ctl: &mut Control<'_>, command_txs: &[Sender<Command>], report: Report, now: u64) {
    match report {
        Report::Share { sender, kind, solution } => {
            let m = ctl.shared(now, sender, kind, solution);
            for (slot, tx) in command_txs.iter().enumerate() {
                if slot != sender.island() {
                    let _ = tx.send(Command::Deliver(m.clone()));
                }
            }
        }
        Report::Helped { receiver, sender } => ctl.helped(now, receiver, sender),
        Report::Finished { instance, evaluations } => ctl.finished(now, instance, evaluations),
    }
}

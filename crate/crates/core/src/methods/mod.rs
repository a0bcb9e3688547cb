//! The seven optimization methods behind one state machine.
//!
//! A [`MethodState`] is driven by its island: `step` generates and
//! evaluates new solutions, `receive_and_incorporate` merges migrants from
//! the inbox and `share_best` produces the solution to broadcast.

use std::collections::{BTreeMap, VecDeque};

use rand::Rng;

use crate::config::{MethodConfig, MethodKind};
use crate::error::MethodError;
use crate::genome::Genome;
use crate::problems::{Cursor, DynRng, MoveState, Problem};
use crate::solution::{EvaluatedSolution, Lineage, MethodInstanceId};

/// Evaluation attempts per initial solution before giving up.
const INIT_ATTEMPTS: usize = 100;

/// A solution received from another island.
#[derive(Clone, Debug)]
pub struct Migrant {
    pub sender: MethodInstanceId,
    pub sender_kind: MethodKind,
    pub solution: EvaluatedSolution,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct StepReport {
    pub evaluations: u64,
    /// `best_own` strictly improved during the step.
    pub improved: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ReceiveReport {
    pub accepted: usize,
    /// Senders whose migrant strictly improved `best_own`, in arrival order.
    pub helpers: Vec<(MethodInstanceId, MethodKind)>,
    pub rejected: usize,
}

#[derive(Clone, Debug)]
enum Engine {
    Random { incumbent: EvaluatedSolution },
    Hill { incumbent: EvaluatedSolution, moves: MoveState },
    Anneal { incumbent: EvaluatedSolution, moves: MoveState, temperature: f64 },
    Tabu { incumbent: EvaluatedSolution, moves: MoveState, tabu: VecDeque<(u64, Genome)> },
    Evolution { population: Vec<EvaluatedSolution> },
    Differential { population: Vec<EvaluatedSolution> },
    Brute { incumbent: EvaluatedSolution, cursor: Cursor, finished: bool },
}

#[derive(Clone, Debug)]
pub struct MethodState {
    kind: MethodKind,
    config: MethodConfig,
    id: MethodInstanceId,
    engine: Engine,
    best_own: EvaluatedSolution,
    helper_counts: BTreeMap<MethodKind, u64>,
    helped_by: BTreeMap<MethodInstanceId, u64>,
    inbox: VecDeque<Migrant>,
    outbox_log: Vec<EvaluatedSolution>,
    evaluations: u64,
    steps: u64,
    next_seq: u64,
}

impl MethodState {
    /// Creates the initial solution(s). Fails only when the problem rejects
    /// every one of `INIT_ATTEMPTS` candidates for some slot.
    pub fn init(
        kind: MethodKind,
        config: &MethodConfig,
        problem: &dyn Problem,
        rng: &mut DynRng,
        id: MethodInstanceId,
    ) -> Result<Self, MethodError> {
        let mut counters = Counters { id, evaluations: 0, next_seq: 0 };
        let mut cursor = Cursor::default();
        let engine = match kind {
            MethodKind::RS => Engine::Random { incumbent: counters.initial(problem, rng, None)? },
            MethodKind::HC => {
                Engine::Hill { incumbent: counters.initial(problem, rng, None)?, moves: problem.initial_move_state() }
            }
            MethodKind::SA => Engine::Anneal {
                incumbent: counters.initial(problem, rng, None)?,
                moves: problem.initial_move_state(),
                temperature: config.sa_temperature,
            },
            MethodKind::TS => {
                let incumbent = counters.initial(problem, rng, None)?;
                let tabu = VecDeque::from([(incumbent.genome.digest(), incumbent.genome.clone())]);
                Engine::Tabu { incumbent, moves: problem.initial_move_state(), tabu }
            }
            MethodKind::EA => Engine::Evolution { population: counters.population(problem, rng, config.ea_pop)? },
            MethodKind::DE => Engine::Differential { population: counters.population(problem, rng, config.de_pop)? },
            MethodKind::BF => {
                let incumbent = counters.initial(problem, rng, Some(&mut cursor))?;
                let finished = cursor.exhausted;
                Engine::Brute { incumbent, cursor, finished }
            }
        };
        let best_own = match &engine {
            Engine::Evolution { population } | Engine::Differential { population } => best_of(population).clone(),
            Engine::Random { incumbent }
            | Engine::Hill { incumbent, .. }
            | Engine::Anneal { incumbent, .. }
            | Engine::Tabu { incumbent, .. }
            | Engine::Brute { incumbent, .. } => incumbent.clone(),
        };
        Ok(Self {
            kind,
            config: config.clone(),
            id,
            engine,
            best_own,
            helper_counts: BTreeMap::new(),
            helped_by: BTreeMap::new(),
            inbox: VecDeque::new(),
            outbox_log: Vec::new(),
            evaluations: counters.evaluations,
            steps: 0,
            next_seq: counters.next_seq,
        })
    }

    pub fn kind(&self) -> MethodKind {
        self.kind
    }

    pub fn id(&self) -> MethodInstanceId {
        self.id
    }

    pub fn best(&self) -> &EvaluatedSolution {
        &self.best_own
    }

    pub fn helper_counts(&self) -> &BTreeMap<MethodKind, u64> {
        &self.helper_counts
    }

    pub fn helped_by(&self) -> &BTreeMap<MethodInstanceId, u64> {
        &self.helped_by
    }

    pub fn evaluations(&self) -> u64 {
        self.evaluations
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    pub fn outbox_log(&self) -> &[EvaluatedSolution] {
        &self.outbox_log
    }

    pub fn is_finished(&self) -> bool {
        matches!(self.engine, Engine::Brute { finished: true, .. })
    }

    /// Current incumbent of single-solution methods.
    pub fn incumbent(&self) -> Option<&EvaluatedSolution> {
        match &self.engine {
            Engine::Random { incumbent }
            | Engine::Hill { incumbent, .. }
            | Engine::Anneal { incumbent, .. }
            | Engine::Tabu { incumbent, .. }
            | Engine::Brute { incumbent, .. } => Some(incumbent),
            _ => None,
        }
    }

    pub fn population(&self) -> Option<&[EvaluatedSolution]> {
        match &self.engine {
            Engine::Evolution { population } | Engine::Differential { population } => Some(population),
            _ => None,
        }
    }

    pub fn temperature(&self) -> Option<f64> {
        match self.engine {
            Engine::Anneal { temperature, .. } => Some(temperature),
            _ => None,
        }
    }

    pub fn tabu_list(&self) -> Option<impl Iterator<Item = &Genome> + '_> {
        match &self.engine {
            Engine::Tabu { tabu, .. } => Some(tabu.iter().map(|(_, g)| g)),
            _ => None,
        }
    }

    pub fn push_inbox(&mut self, migrant: Migrant) {
        self.inbox.push_back(migrant);
    }

    pub fn inbox_len(&self) -> usize {
        self.inbox.len()
    }

    pub fn step(&mut self, problem: &dyn Problem, rng: &mut DynRng) -> StepReport {
        let before = self.evaluations;
        let best_before = self.best_own.objective;
        let mut ctx = Counters { id: self.id, evaluations: self.evaluations, next_seq: self.next_seq };
        let cfg = &self.config;
        let best = &mut self.best_own;
        match &mut self.engine {
            Engine::Random { incumbent } => {
                let g = problem.random_solution(rng);
                if let Some(s) = ctx.evaluate(problem, g, &Lineage::new()) {
                    if s.is_better_than(incumbent) {
                        offer(best, &s);
                        *incumbent = s;
                    }
                }
            }
            Engine::Hill { incumbent, moves } => {
                let mut top: Option<EvaluatedSolution> = None;
                for _ in 0..cfg.hc_neighbors {
                    let g = problem.unary(&incumbent.genome, moves, rng);
                    if let Some(s) = ctx.evaluate(problem, g, &incumbent.lineage) {
                        if top.as_ref().is_none_or(|b| s.is_better_than(b)) {
                            top = Some(s);
                        }
                    }
                }
                let improved = top.as_ref().is_some_and(|b| b.is_better_than(incumbent));
                problem.move_feedback(moves, improved);
                if let (true, Some(b)) = (improved, top) {
                    offer(best, &b);
                    *incumbent = b;
                }
            }
            Engine::Anneal { incumbent, moves, temperature } => {
                let g = problem.unary(&incumbent.genome, moves, rng);
                if let Some(s) = ctx.evaluate(problem, g, &incumbent.lineage) {
                    let delta = s.objective - incumbent.objective;
                    problem.move_feedback(moves, delta < 0.0);
                    offer(best, &s);
                    let accept = delta <= 0.0 || rng.gen::<f64>() < (-delta / *temperature).exp();
                    if accept {
                        *incumbent = s;
                    }
                }
                *temperature *= 1.0 - cfg.sa_cooling_rate;
            }
            Engine::Tabu { incumbent, moves, tabu } => {
                let aspiration = best.objective;
                let mut chosen: Option<EvaluatedSolution> = None;
                for _ in 0..cfg.hc_neighbors {
                    let g = problem.unary(&incumbent.genome, moves, rng);
                    let digest = g.digest();
                    let is_tabu = tabu.iter().any(|(d, t)| *d == digest && *t == g);
                    if let Some(s) = ctx.evaluate(problem, g, &incumbent.lineage) {
                        offer(best, &s);
                        let admissible = !is_tabu || s.objective < aspiration;
                        if admissible && chosen.as_ref().is_none_or(|c| s.is_better_than(c)) {
                            chosen = Some(s);
                        }
                    }
                }
                let improved = chosen.as_ref().is_some_and(|c| c.is_better_than(incumbent));
                problem.move_feedback(moves, improved);
                if let Some(c) = chosen {
                    tabu.push_back((c.genome.digest(), c.genome.clone()));
                    while tabu.len() > cfg.ts_tabu_size {
                        tabu.pop_front();
                    }
                    *incumbent = c;
                }
            }
            Engine::Evolution { population } => {
                let next = evolve(population, cfg, problem, rng, &mut ctx);
                offer(best, best_of(&next));
                *population = next;
            }
            Engine::Differential { population } => {
                // trials are built from the population as it was at the
                // start of the generation
                let n = population.len();
                let mut replacements = Vec::new();
                for i in 0..n {
                    let [a, b, c] = distinct_others(n, i, rng);
                    let base = &population[c];
                    let g = problem.ternary(&population[a].genome, &population[b].genome, &base.genome, cfg.de_f, rng);
                    if let Some(s) = ctx.evaluate(problem, g, &base.lineage) {
                        if s.is_better_than(&population[i]) {
                            offer(best, &s);
                            replacements.push((i, s));
                        }
                    }
                }
                for (i, s) in replacements {
                    population[i] = s;
                }
            }
            Engine::Brute { incumbent, cursor, finished } => {
                if !*finished {
                    match problem.next_solution(cursor, rng) {
                        Some(g) => {
                            if let Some(s) = ctx.evaluate(problem, g, &Lineage::new()) {
                                if s.is_better_than(incumbent) {
                                    offer(best, &s);
                                    *incumbent = s;
                                }
                            }
                        }
                        None => *finished = true,
                    }
                }
            }
        }
        self.evaluations = ctx.evaluations;
        self.next_seq = ctx.next_seq;
        self.steps += 1;
        StepReport { evaluations: self.evaluations - before, improved: self.best_own.objective < best_before }
    }

    /// Drains the inbox. Single-solution methods take a migrant iff it is
    /// strictly better than the incumbent; populations replace their worst
    /// member iff the migrant is strictly better than it.
    pub fn receive_and_incorporate(&mut self, problem: &dyn Problem) -> ReceiveReport {
        let mut report = ReceiveReport::default();
        while let Some(m) = self.inbox.pop_front() {
            match self.incorporate(problem, m.solution) {
                Err(e) => {
                    log::warn!("instance {} rejected migrant from {}: {e}", self.id, m.sender);
                    report.rejected += 1;
                }
                Ok(outcome) => {
                    if outcome.accepted {
                        report.accepted += 1;
                    }
                    if outcome.helped {
                        *self.helper_counts.entry(m.sender_kind).or_insert(0) += 1;
                        *self.helped_by.entry(m.sender).or_insert(0) += 1;
                        report.helpers.push((m.sender, m.sender_kind));
                    }
                }
            }
        }
        report
    }

    /// Incorporates a seed solution without crediting anyone.
    pub fn inject_seed(&mut self, problem: &dyn Problem, seed: EvaluatedSolution) -> Result<bool, MethodError> {
        self.incorporate(problem, seed).map(|o| o.accepted)
    }

    fn incorporate(&mut self, problem: &dyn Problem, s: EvaluatedSolution) -> Result<Outcome, MethodError> {
        let expected = problem.encoding().kind();
        let got = s.genome.encoding();
        if expected != got {
            return Err(MethodError::Encoding { expected: expected.to_string(), got: got.to_string() });
        }
        let helped = s.is_better_than(&self.best_own);
        let accepted = match &mut self.engine {
            Engine::Random { incumbent }
            | Engine::Hill { incumbent, .. }
            | Engine::Anneal { incumbent, .. }
            | Engine::Tabu { incumbent, .. }
            | Engine::Brute { incumbent, .. } => {
                let better = s.is_better_than(incumbent);
                if better {
                    *incumbent = s.clone();
                }
                better
            }
            Engine::Evolution { population } | Engine::Differential { population } => {
                let worst = worst_index(population);
                let better = s.is_better_than(&population[worst]);
                if better {
                    population[worst] = s.clone();
                }
                better
            }
        };
        if helped {
            self.best_own = s;
        }
        Ok(Outcome { accepted, helped })
    }

    /// Copy of `best_own`, unless it is genome-equal to the previous share.
    pub fn share_best(&mut self) -> Option<EvaluatedSolution> {
        if self.outbox_log.last().is_some_and(|prev| prev.genome == self.best_own.genome) {
            return None;
        }
        self.outbox_log.push(self.best_own.clone());
        Some(self.best_own.clone())
    }
}

struct Outcome {
    accepted: bool,
    helped: bool,
}

/// Per-instance evaluation and sequence counters used while the engine is
/// mutably borrowed.
struct Counters {
    id: MethodInstanceId,
    evaluations: u64,
    next_seq: u64,
}

impl Counters {
    /// Evaluates `genome` whose history is `parent` extended by this
    /// instance. Failed evaluations discard the candidate.
    fn evaluate(&mut self, problem: &dyn Problem, genome: Genome, parent: &Lineage) -> Option<EvaluatedSolution> {
        self.evaluations += 1;
        match problem.evaluate(&genome) {
            Ok(objective) => {
                let seq = self.next_seq;
                self.next_seq += 1;
                Some(EvaluatedSolution::new(genome, objective, parent.appended(self.id), self.id, seq))
            }
            Err(e) => {
                log::debug!("instance {}: evaluation failed: {e}", self.id);
                None
            }
        }
    }

    fn initial(
        &mut self,
        problem: &dyn Problem,
        rng: &mut DynRng,
        mut cursor: Option<&mut Cursor>,
    ) -> Result<EvaluatedSolution, MethodError> {
        let mut last_err = None;
        for _ in 0..INIT_ATTEMPTS {
            let g = match cursor.as_deref_mut() {
                Some(c) => match problem.next_solution(c, rng) {
                    Some(g) => g,
                    None => problem.random_solution(rng),
                },
                None => problem.random_solution(rng),
            };
            self.evaluations += 1;
            match problem.evaluate(&g) {
                Ok(objective) => {
                    let seq = self.next_seq;
                    self.next_seq += 1;
                    return Ok(EvaluatedSolution::new(g, objective, Lineage::single(self.id), self.id, seq));
                }
                Err(e) => last_err = Some(e),
            }
        }
        Err(MethodError::Init(last_err.expect("at least one attempt")))
    }

    fn population(
        &mut self,
        problem: &dyn Problem,
        rng: &mut DynRng,
        size: usize,
    ) -> Result<Vec<EvaluatedSolution>, MethodError> {
        (0..size).map(|_| self.initial(problem, rng, None)).collect()
    }
}

fn offer(best: &mut EvaluatedSolution, s: &EvaluatedSolution) {
    if s.is_better_than(best) {
        *best = s.clone();
    }
}

fn best_of(population: &[EvaluatedSolution]) -> &EvaluatedSolution {
    population
        .iter()
        .reduce(|best, s| if s.is_better_than(best) { s } else { best })
        .expect("population is never empty")
}

fn worst_index(population: &[EvaluatedSolution]) -> usize {
    let mut worst = 0;
    for (i, s) in population.iter().enumerate() {
        if s.objective > population[worst].objective {
            worst = i;
        }
    }
    worst
}

fn tournament<'a>(population: &'a [EvaluatedSolution], size: usize, rng: &mut DynRng) -> &'a EvaluatedSolution {
    let mut best = &population[rng.gen_range(0..population.len())];
    for _ in 1..size {
        let s = &population[rng.gen_range(0..population.len())];
        if s.is_better_than(best) {
            best = s;
        }
    }
    best
}

/// One generation: the best member survives, the rest of the population is
/// replaced by offspring.
fn evolve(
    population: &[EvaluatedSolution],
    cfg: &MethodConfig,
    problem: &dyn Problem,
    rng: &mut DynRng,
    ctx: &mut Counters,
) -> Vec<EvaluatedSolution> {
    let elite = best_of(population).clone();
    let offspring = population.len().saturating_sub(1).max(1);
    let mut next = Vec::with_capacity(offspring + 1);
    next.push(elite);
    for _ in 0..offspring {
        let p1 = tournament(population, cfg.ea_tournament, rng);
        let mut genome = None;
        if rng.gen::<f64>() < cfg.ea_crossover_rate {
            let p2 = tournament(population, cfg.ea_tournament, rng);
            genome = Some(problem.binary(&p1.genome, &p2.genome, rng));
        }
        if rng.gen::<f64>() < cfg.ea_mutation_rate {
            let base = genome.as_ref().unwrap_or(&p1.genome);
            genome = Some(problem.mutate(base, rng));
        }
        let child = match genome {
            Some(g) => ctx.evaluate(problem, g, &p1.lineage).unwrap_or_else(|| p1.clone()),
            None => p1.clone(),
        };
        next.push(child);
    }
    if population.len() == 1 {
        // a single slot keeps the better of elite and offspring
        let child = next.pop().expect("one offspring");
        if child.is_better_than(&next[0]) {
            next[0] = child;
        }
    }
    next
}

/// Three distinct indices in `0..n`, all different from `exclude`.
fn distinct_others(n: usize, exclude: usize, rng: &mut DynRng) -> [usize; 3] {
    let mut picked = [usize::MAX; 3];
    let mut k = 0;
    while k < 3 {
        let r = rng.gen_range(0..n);
        if r != exclude && !picked[..k].contains(&r) {
            picked[k] = r;
            k += 1;
        }
    }
    picked
}

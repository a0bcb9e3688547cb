//! Method kinds, planner choices and the parameter records with their
//! default values.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::error::ConfigError;
use crate::problems::Problem;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum MethodKind {
    RS,
    HC,
    SA,
    TS,
    EA,
    DE,
    BF,
}

impl MethodKind {
    pub const ALL: [MethodKind; 7] = [
        MethodKind::RS,
        MethodKind::HC,
        MethodKind::SA,
        MethodKind::TS,
        MethodKind::EA,
        MethodKind::DE,
        MethodKind::BF,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            MethodKind::RS => "RS",
            MethodKind::HC => "HC",
            MethodKind::SA => "SA",
            MethodKind::TS => "TS",
            MethodKind::EA => "EA",
            MethodKind::DE => "DE",
            MethodKind::BF => "BF",
        }
    }

    /// Default split used by the method-description planner.
    pub fn default_class(&self) -> MethodClass {
        match self {
            MethodKind::RS | MethodKind::BF => MethodClass::Exploration,
            _ => MethodClass::Exploitation,
        }
    }
}

impl fmt::Display for MethodKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MethodKind {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        MethodKind::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| ConfigError(format!("unknown method kind {s:?}")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MethodClass {
    Exploration,
    Exploitation,
}

/// Per-method parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MethodConfig {
    pub hc_neighbors: usize,
    pub ea_pop: usize,
    pub ea_mutation_rate: f64,
    pub ea_crossover_rate: f64,
    /// Tournament size for EA parent selection (2 = binary tournament).
    pub ea_tournament: usize,
    pub ts_tabu_size: usize,
    pub sa_temperature: f64,
    pub sa_cooling_rate: f64,
    pub de_pop: usize,
    pub de_f: f64,
}

impl Default for MethodConfig {
    fn default() -> Self {
        Self {
            hc_neighbors: 10,
            ea_pop: 10,
            ea_mutation_rate: 0.9,
            ea_crossover_rate: 0.1,
            ea_tournament: 2,
            ts_tabu_size: 50,
            sa_temperature: 10_000.0,
            sa_cooling_rate: 0.002,
            de_pop: 50,
            de_f: 1.0,
        }
    }
}

impl MethodConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let counts = [
            ("hc_neighbors", self.hc_neighbors),
            ("ea_pop", self.ea_pop),
            ("ea_tournament", self.ea_tournament),
            ("ts_tabu_size", self.ts_tabu_size),
        ];
        for (name, value) in counts {
            if value < 1 {
                return Err(ConfigError(format!("{name} must be at least 1")));
            }
        }
        // rand/1 needs the target plus three distinct donors
        if self.de_pop < 4 {
            return Err(ConfigError("de_pop must be at least 4".into()));
        }
        for (name, rate) in [("ea_mutation_rate", self.ea_mutation_rate), ("ea_crossover_rate", self.ea_crossover_rate)]
        {
            if !(0.0..=1.0).contains(&rate) {
                return Err(ConfigError(format!("{name} must lie in [0, 1]")));
            }
        }
        if self.sa_temperature.is_nan() || self.sa_temperature <= 0.0 {
            return Err(ConfigError("sa_temperature must be positive".into()));
        }
        if !(self.sa_cooling_rate > 0.0 && self.sa_cooling_rate < 1.0) {
            return Err(ConfigError("sa_cooling_rate must lie in (0, 1)".into()));
        }
        if !(self.de_f.is_finite() && self.de_f > 0.0) {
            return Err(ConfigError("de_f must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PlannerKind {
    Static,
    Random,
    RandomGuaranteed,
    MethodDescription,
    BestHelper,
    AverageFitness,
    QuantityOfImprovement,
    QuantityOfMaterial,
    BestMaterial,
    BestContribution,
    LazyQuantityOfImprovement,
}

impl PlannerKind {
    pub const ALL: [PlannerKind; 11] = [
        PlannerKind::Static,
        PlannerKind::Random,
        PlannerKind::RandomGuaranteed,
        PlannerKind::MethodDescription,
        PlannerKind::BestHelper,
        PlannerKind::AverageFitness,
        PlannerKind::QuantityOfImprovement,
        PlannerKind::QuantityOfMaterial,
        PlannerKind::BestMaterial,
        PlannerKind::BestContribution,
        PlannerKind::LazyQuantityOfImprovement,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            PlannerKind::Static => "Static",
            PlannerKind::Random => "P-R",
            PlannerKind::RandomGuaranteed => "P-RG",
            PlannerKind::MethodDescription => "P-MD",
            PlannerKind::BestHelper => "P-BH",
            PlannerKind::AverageFitness => "P-AF",
            PlannerKind::QuantityOfImprovement => "P-QI",
            PlannerKind::QuantityOfMaterial => "P-QM",
            PlannerKind::BestMaterial => "P-BM",
            PlannerKind::BestContribution => "P-BC",
            PlannerKind::LazyQuantityOfImprovement => "P-LQI",
        }
    }

    /// Policies whose freshly started instances cannot be killed for
    /// `n_protect` iterations.
    pub fn protects_new_instances(&self) -> bool {
        matches!(
            self,
            PlannerKind::MethodDescription
                | PlannerKind::AverageFitness
                | PlannerKind::QuantityOfImprovement
                | PlannerKind::QuantityOfMaterial
                | PlannerKind::LazyQuantityOfImprovement
        )
    }

    /// Random planner assigns the initial methods randomly; everything else
    /// uses round-robin.
    pub fn random_initialization(&self) -> bool {
        matches!(self, PlannerKind::Random)
    }
}

impl fmt::Display for PlannerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PlannerKind {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        PlannerKind::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| ConfigError(format!("unknown planner {s:?}")))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlannerConfig {
    pub iterations: usize,
    pub islands: usize,
    pub runs: usize,
    pub n_init: usize,
    pub n_protect: usize,
    pub n_patience: usize,
    pub m_min: usize,
    pub top_n: usize,
    pub classes: BTreeMap<MethodKind, MethodClass>,
}

impl Default for PlannerConfig {
    fn default() -> Self {
        Self {
            iterations: 50,
            islands: 16,
            runs: 9,
            n_init: 5,
            n_protect: 3,
            n_patience: 3,
            m_min: 3,
            top_n: 10,
            classes: MethodKind::ALL.iter().map(|k| (*k, k.default_class())).collect(),
        }
    }
}

impl PlannerConfig {
    pub fn class_of(&self, kind: MethodKind) -> MethodClass {
        self.classes.get(&kind).copied().unwrap_or_else(|| kind.default_class())
    }

    pub fn validate(&self, catalog: &[MethodKind]) -> Result<(), ConfigError> {
        if self.islands < 1 {
            return Err(ConfigError("islands must be at least 1".into()));
        }
        if self.iterations < 1 {
            return Err(ConfigError("iterations must be at least 1".into()));
        }
        if self.top_n < 1 {
            return Err(ConfigError("top_n must be at least 1".into()));
        }
        if self.runs < 1 {
            return Err(ConfigError("runs must be at least 1".into()));
        }
        if self.m_min > catalog.len() {
            return Err(ConfigError(format!("m_min = {} exceeds the {} catalog kinds", self.m_min, catalog.len())));
        }
        Ok(())
    }
}

/// How planning iterations and migrations are timed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Clock {
    WallClock { iteration_length: Duration, migration_interval: Duration },
    VirtualTime { steps_per_iteration: u64, steps_per_migration: u64 },
}

impl Clock {
    pub fn wall_default() -> Self {
        Clock::WallClock { iteration_length: Duration::from_secs(60), migration_interval: Duration::from_secs(5) }
    }

    pub fn virtual_default() -> Self {
        Clock::VirtualTime { steps_per_iteration: 5000, steps_per_migration: 500 }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        match *self {
            Clock::VirtualTime { steps_per_iteration, steps_per_migration } => {
                if steps_per_migration == 0 || steps_per_iteration == 0 {
                    return Err(ConfigError("virtual step budgets must be positive".into()));
                }
                if steps_per_iteration % steps_per_migration != 0 {
                    return Err(ConfigError("steps_per_iteration must be a multiple of steps_per_migration".into()));
                }
                Ok(())
            }
            Clock::WallClock { iteration_length, migration_interval } => {
                if iteration_length.is_zero() || migration_interval.is_zero() {
                    return Err(ConfigError("clock intervals must be positive".into()));
                }
                Ok(())
            }
        }
    }
}

impl Default for Clock {
    fn default() -> Self {
        Clock::virtual_default()
    }
}

/// Everything one experiment run needs.
#[derive(Clone)]
pub struct ExperimentConfig {
    pub problem: Arc<dyn Problem>,
    pub catalog: Vec<MethodKind>,
    pub planner: PlannerKind,
    pub planner_config: PlannerConfig,
    pub method_config: MethodConfig,
    pub clock: Clock,
    pub seed: u64,
}

impl ExperimentConfig {
    pub fn new(problem: Arc<dyn Problem>, planner: PlannerKind) -> Self {
        Self {
            problem,
            catalog: MethodKind::ALL.to_vec(),
            planner,
            planner_config: PlannerConfig::default(),
            method_config: MethodConfig::default(),
            clock: Clock::default(),
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.catalog.is_empty() {
            return Err(ConfigError("portfolio catalog is empty".into()));
        }
        let mut seen = self.catalog.clone();
        seen.sort();
        seen.dedup();
        if seen.len() != self.catalog.len() {
            return Err(ConfigError("portfolio catalog lists a kind twice".into()));
        }
        if self.planner == PlannerKind::RandomGuaranteed {
            self.planner_config.validate(&self.catalog)?;
        } else {
            // m_min only matters to the diversity-keeping planner
            let relaxed = PlannerConfig { m_min: 0, ..self.planner_config.clone() };
            relaxed.validate(&self.catalog)?;
        }
        self.method_config.validate()?;
        self.clock.validate()
    }
}

impl fmt::Debug for ExperimentConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ExperimentConfig")
            .field("problem", &self.problem.name())
            .field("catalog", &self.catalog)
            .field("planner", &self.planner)
            .field("planner_config", &self.planner_config)
            .field("method_config", &self.method_config)
            .field("clock", &self.clock)
            .field("seed", &self.seed)
            .finish()
    }
}

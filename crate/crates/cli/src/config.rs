//! Experiment files: TOML with `problem`, `portfolio`, `planner`, `clock`,
//! `run` and `methods` sections. Relative paths resolve against the
//! directory holding the file.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Duration;

use anyhow::{bail, Context, Result};
use portfolio::problems::co::CoKind;
use portfolio::problems::tsp::Metric;
use portfolio::problems::{
    default_ml_space, BppInstance, BppProblem, CoFunction, CoProblem, ExternalEvaluator, ParamEvaluator, ParamsProblem,
    Surrogate, TspInstance, TspProblem, VcInstance, VcProblem,
};
use portfolio::{Clock, ExperimentConfig, MethodClass, MethodKind, PlannerKind, Problem};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;

/// Environment variable naming the default output root.
pub const OUTPUT_ROOT_VAR: &str = "PORTFOLIO_OUTPUT_ROOT";

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub problem: ProblemSection,
    #[serde(default)]
    pub portfolio: PortfolioSection,
    #[serde(default)]
    pub planner: PlannerSection,
    #[serde(default)]
    pub clock: ClockSection,
    #[serde(default)]
    pub run: RunSection,
    #[serde(default)]
    pub methods: MethodsSection,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    #[default]
    Tsp,
    Bpp,
    Vc,
    Co,
    Ml,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSection {
    pub family: Family,
    /// Benchmark name used in reports; derived from the instance otherwise.
    pub name: Option<String>,
    /// TSPLIB file, volume list or DIMACS graph.
    pub instance: Option<PathBuf>,
    /// Generated instance size: cities, items or vertices.
    pub size: Option<usize>,
    /// Seed of the instance generator.
    #[serde(default)]
    pub seed: u64,
    pub edge_probability: Option<f64>,
    /// Continuous function, e.g. "f14".
    pub function: Option<String>,
    pub dim: Option<usize>,
    #[serde(default)]
    pub shifted: bool,
    /// External evaluator command line for `ml`; the surrogate is used when absent.
    pub command: Option<Vec<String>>,
    pub timeout_secs: Option<f64>,
    pub stochastic: Option<bool>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PortfolioSection {
    pub catalog: Option<Vec<String>>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlannerSection {
    pub name: Option<String>,
    pub iterations: Option<usize>,
    pub islands: Option<usize>,
    pub n_init: Option<usize>,
    pub n_protect: Option<usize>,
    pub n_patience: Option<usize>,
    pub m_min: Option<usize>,
    pub top_n: Option<usize>,
    /// Kinds the description planner treats as exploratory; the rest exploit.
    pub exploration: Option<Vec<String>>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClockMode {
    #[default]
    Virtual,
    Wall,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClockSection {
    #[serde(default)]
    pub mode: ClockMode,
    pub steps_per_iteration: Option<u64>,
    pub steps_per_migration: Option<u64>,
    pub iteration_secs: Option<f64>,
    pub migration_secs: Option<f64>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    pub runs: Option<usize>,
    pub seeds: Option<Vec<u64>>,
    pub output: Option<PathBuf>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MethodsSection {
    pub hc_neighbors: Option<usize>,
    pub ea_pop: Option<usize>,
    pub ea_mutation_rate: Option<f64>,
    pub ea_crossover_rate: Option<f64>,
    pub ea_tournament: Option<usize>,
    pub ts_tabu_size: Option<usize>,
    pub sa_temperature: Option<f64>,
    pub sa_cooling_rate: Option<f64>,
    pub de_pop: Option<usize>,
    pub de_f: Option<f64>,
}

/// A checked configuration ready to run.
pub struct Plan {
    pub benchmark: String,
    pub label: String,
    pub base: ExperimentConfig,
    pub seeds: Vec<u64>,
    /// Root under which `<benchmark>/<label>` is created.
    pub output_root: PathBuf,
}

impl Plan {
    pub fn batch_dir(&self) -> PathBuf {
        self.output_root.join(sanitize(&self.benchmark)).join(sanitize(&self.label))
    }

    pub fn config_for(&self, seed: u64) -> ExperimentConfig {
        let mut cfg = self.base.clone();
        cfg.seed = seed;
        cfg
    }
}

pub fn parse(text: &str) -> Result<FileConfig> {
    Ok(toml::from_str(text)?)
}

/// Reads, resolves and validates `path`. Instance files are loaded here, so
/// a missing file fails before anything is written.
pub fn load(path: &Path) -> Result<Plan> {
    let text = std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    let file = parse(&text).with_context(|| format!("{}", path.display()))?;
    let base_dir = path.parent().unwrap_or(Path::new("."));
    resolve(&file, base_dir)
}

pub fn resolve(file: &FileConfig, base_dir: &Path) -> Result<Plan> {
    let (problem, benchmark) = build_problem(&file.problem, base_dir)?;

    let catalog = match &file.portfolio.catalog {
        None => MethodKind::ALL.to_vec(),
        Some(names) => names.iter().map(|n| n.parse()).collect::<Result<Vec<MethodKind>, _>>()?,
    };
    let planner: PlannerKind = match &file.planner.name {
        None => PlannerKind::Static,
        Some(n) => n.parse()?,
    };
    let mut cfg = ExperimentConfig::new(problem, planner);
    cfg.catalog = catalog;

    let p = &file.planner;
    let pc = &mut cfg.planner_config;
    set(&mut pc.iterations, p.iterations);
    set(&mut pc.islands, p.islands);
    set(&mut pc.n_init, p.n_init);
    set(&mut pc.n_protect, p.n_protect);
    set(&mut pc.n_patience, p.n_patience);
    set(&mut pc.m_min, p.m_min);
    set(&mut pc.top_n, p.top_n);
    if let Some(names) = &p.exploration {
        let explore = names.iter().map(|n| n.parse()).collect::<Result<BTreeSet<MethodKind>, _>>()?;
        for kind in MethodKind::ALL {
            let class = if explore.contains(&kind) { MethodClass::Exploration } else { MethodClass::Exploitation };
            pc.classes.insert(kind, class);
        }
    }

    let m = &file.methods;
    let mc = &mut cfg.method_config;
    set(&mut mc.hc_neighbors, m.hc_neighbors);
    set(&mut mc.ea_pop, m.ea_pop);
    set(&mut mc.ea_mutation_rate, m.ea_mutation_rate);
    set(&mut mc.ea_crossover_rate, m.ea_crossover_rate);
    set(&mut mc.ea_tournament, m.ea_tournament);
    set(&mut mc.ts_tabu_size, m.ts_tabu_size);
    set(&mut mc.sa_temperature, m.sa_temperature);
    set(&mut mc.sa_cooling_rate, m.sa_cooling_rate);
    set(&mut mc.de_pop, m.de_pop);
    set(&mut mc.de_f, m.de_f);

    cfg.clock = build_clock(&file.clock)?;

    let runs = file.run.runs.unwrap_or(cfg.planner_config.runs);
    cfg.planner_config.runs = runs;
    let seeds = match &file.run.seeds {
        Some(s) => s.clone(),
        None => (1..=runs as u64).collect(),
    };
    if seeds.len() != runs {
        bail!("run.seeds lists {} seeds but run.runs = {runs}", seeds.len());
    }
    if seeds.iter().collect::<BTreeSet<_>>().len() != seeds.len() {
        bail!("run.seeds must be distinct");
    }
    cfg.validate()?;

    let output_root = match &file.run.output {
        Some(p) if p.is_absolute() => p.clone(),
        Some(p) => base_dir.join(p),
        None => std::env::var_os(OUTPUT_ROOT_VAR).map(PathBuf::from).unwrap_or_else(|| PathBuf::from("results")),
    };
    let label = config_label(planner, &cfg.catalog);
    Ok(Plan { benchmark, label, base: cfg, seeds, output_root })
}

/// Planner name, with the catalog appended when it is not the full one.
pub fn config_label(planner: PlannerKind, catalog: &[MethodKind]) -> String {
    if catalog == MethodKind::ALL {
        planner.name().to_string()
    } else {
        let kinds: Vec<&str> = catalog.iter().map(|k| k.name()).collect();
        format!("{}[{}]", planner.name(), kinds.join(","))
    }
}

fn set<T>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}

fn sanitize(name: &str) -> String {
    name.chars().map(|c| if c.is_ascii_alphanumeric() || "-_.".contains(c) { c } else { '_' }).collect()
}

fn build_clock(c: &ClockSection) -> Result<Clock> {
    Ok(match c.mode {
        ClockMode::Virtual => {
            if c.iteration_secs.is_some() || c.migration_secs.is_some() {
                bail!("clock.iteration_secs and clock.migration_secs need mode = \"wall\"");
            }
            let Clock::VirtualTime { steps_per_iteration, steps_per_migration } = Clock::virtual_default() else {
                unreachable!()
            };
            Clock::VirtualTime {
                steps_per_iteration: c.steps_per_iteration.unwrap_or(steps_per_iteration),
                steps_per_migration: c.steps_per_migration.unwrap_or(steps_per_migration),
            }
        }
        ClockMode::Wall => {
            if c.steps_per_iteration.is_some() || c.steps_per_migration.is_some() {
                bail!("clock step budgets need mode = \"virtual\"");
            }
            let Clock::WallClock { iteration_length, migration_interval } = Clock::wall_default() else {
                unreachable!()
            };
            Clock::WallClock {
                iteration_length: c.iteration_secs.map(secs).transpose()?.unwrap_or(iteration_length),
                migration_interval: c.migration_secs.map(secs).transpose()?.unwrap_or(migration_interval),
            }
        }
    })
}

fn secs(s: f64) -> Result<Duration> {
    Duration::try_from_secs_f64(s).map_err(|_| anyhow::anyhow!("invalid duration {s} s"))
}

fn build_problem(p: &ProblemSection, base_dir: &Path) -> Result<(Arc<dyn Problem>, String)> {
    let path = p.instance.as_ref().map(|i| if i.is_absolute() { i.clone() } else { base_dir.join(i) });
    let stem = path.as_ref().and_then(|p| p.file_stem()).map(|s| s.to_string_lossy().into_owned());
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let need_size = || p.size.ok_or_else(|| anyhow::anyhow!("problem needs either instance or size"));
    let (problem, default_name): (Arc<dyn Problem>, String) = match p.family {
        Family::Tsp => {
            let (inst, name) = match &path {
                Some(path) => (TspInstance::load_tsplib(path)?, stem.unwrap()),
                None => {
                    let n = need_size()?;
                    let coords: Vec<(f64, f64)> =
                        (0..n).map(|_| (rng.gen_range(0.0..1000.0), rng.gen_range(0.0..1000.0))).collect();
                    (TspInstance::from_coords(&coords, Metric::EucRounded)?, format!("tsp{n}-s{}", p.seed))
                }
            };
            (Arc::new(TspProblem::new(name.clone(), inst)), name)
        }
        Family::Bpp => {
            let (inst, name) = match &path {
                Some(path) => (BppInstance::load(path)?, stem.unwrap()),
                None => {
                    let n = need_size()?;
                    (crate::generate::random_bpp(n, p.seed)?, format!("bpp{n}-s{}", p.seed))
                }
            };
            (Arc::new(BppProblem::new(name.clone(), inst)), name)
        }
        Family::Vc => {
            let (inst, name) = match &path {
                Some(path) => (VcInstance::load_dimacs(path)?, stem.unwrap()),
                None => {
                    let n = need_size()?;
                    let prob = p.edge_probability.unwrap_or(0.1);
                    if !(0.0..=1.0).contains(&prob) {
                        bail!("edge_probability must lie in [0, 1]");
                    }
                    (VcInstance::random(n, prob, &mut rng), format!("vc{n}-s{}", p.seed))
                }
            };
            (Arc::new(VcProblem::new(name.clone(), inst)), name)
        }
        Family::Co => {
            if path.is_some() {
                bail!("continuous problems take function and dim, not an instance file");
            }
            let kind: CoKind = p.function.as_deref().unwrap_or("f14").parse()?;
            let dim = p.dim.unwrap_or(10);
            if dim == 0 {
                bail!("dim must be at least 1");
            }
            let function = if p.shifted {
                CoFunction::shifted(kind, dim, 0.0, &mut rng)
            } else {
                CoFunction::canonical(kind, dim)
            };
            let name = format!("CO{}-{dim}d", kind.name());
            (Arc::new(CoProblem::new(name.clone(), function)), name)
        }
        Family::Ml => {
            if path.is_some() {
                bail!("ml problems take a command, not an instance file");
            }
            let evaluator = match &p.command {
                None => ParamEvaluator::Surrogate(Surrogate::default_ml()),
                Some(cmd) if cmd.is_empty() => bail!("problem.command is empty"),
                Some(cmd) => {
                    let mut ext = ExternalEvaluator::new(cmd[0].clone(), cmd[1..].to_vec());
                    if let Some(t) = p.timeout_secs {
                        ext = ext.with_timeout(secs(t)?);
                    }
                    if let Some(s) = p.stochastic {
                        ext = ext.with_stochastic(s);
                    }
                    ParamEvaluator::External(ext)
                }
            };
            let name = if p.command.is_some() { "ml-external" } else { "ml-surrogate" }.to_string();
            (Arc::new(ParamsProblem::new(name.clone(), default_ml_space(), evaluator)), name)
        }
    };
    Ok((problem, p.name.clone().unwrap_or(default_name)))
}

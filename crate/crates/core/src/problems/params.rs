//! Hyper-parameter tuning over a mixed integer/real/boolean record.
//!
//! The objective comes from a pluggable evaluator: either the bundled
//! deterministic surrogate or an external process speaking the line
//! protocol in [`super::external`].

use rand::Rng;

use crate::error::EvalError;
use crate::genome::{
    validate_genome, EncodingSpec, Genome, ParamDef, ParamDomain, ParamRecord, ParamSpace, ParamValue,
};

use super::external::ExternalEvaluator;
use super::{advance_counter, wrong_encoding, Cursor, DynRng, MoveState, Problem};

/// Half-width of the perturbation applied to real entries.
pub const REAL_STEP: f64 = 0.005;
/// Spacing of real entries in the systematic scan.
pub const GRID_STEP: f64 = 0.005;

/// Random-forest style search space: trees, features, min variance,
/// unpruned, break-ties, depth, iterations, batch size.
pub fn default_ml_space() -> ParamSpace {
    let int = |name: &str, lo, hi| ParamDef { name: name.into(), domain: ParamDomain::Int { lo, hi } };
    ParamSpace::new(vec![
        int("P", 20, 100),
        int("K", 1, 6),
        ParamDef { name: "V".into(), domain: ParamDomain::Real { lo: 0.0001, hi: 0.5 } },
        ParamDef { name: "U".into(), domain: ParamDomain::Bool },
        ParamDef { name: "B".into(), domain: ParamDomain::Bool },
        int("depth", 1, 20),
        int("I", 20, 30),
        int("batchsize", 80, 120),
    ])
}

/// Smooth stand-in for a model's error rate:
/// `minimum + weight * sum((u_i - t_i)^2)` over parameters normalized to
/// `[0, 1]`, where `t` is the normalized target record. The target is the
/// unique minimizer.
#[derive(Clone, Debug, PartialEq)]
pub struct Surrogate {
    target: ParamRecord,
    minimum: f64,
    weight: f64,
}

impl Surrogate {
    pub fn new(target: ParamRecord, minimum: f64, weight: f64) -> Self {
        Self { target, minimum, weight }
    }

    /// Surrogate for [`default_ml_space`] with minimizer
    /// `P=60 K=3 V=0.05 U=1 B=0 depth=12 I=25 batchsize=100` and minimum
    /// `0.0124`.
    pub fn default_ml() -> Self {
        let target = ParamRecord {
            entries: vec![
                ("P".into(), ParamValue::Int(60)),
                ("K".into(), ParamValue::Int(3)),
                ("V".into(), ParamValue::Real(0.05)),
                ("U".into(), ParamValue::Bool(true)),
                ("B".into(), ParamValue::Bool(false)),
                ("depth".into(), ParamValue::Int(12)),
                ("I".into(), ParamValue::Int(25)),
                ("batchsize".into(), ParamValue::Int(100)),
            ],
        };
        Self::new(target, 0.0124, 0.02)
    }

    /// Surrogate whose minimizer sits at the middle of every range.
    pub fn centered(space: &ParamSpace) -> Self {
        let entries = space
            .params
            .iter()
            .map(|def| {
                let value = match def.domain {
                    ParamDomain::Int { lo, hi } => ParamValue::Int(lo + (hi - lo) / 2),
                    ParamDomain::Real { lo, hi } => ParamValue::Real(0.5 * (lo + hi)),
                    ParamDomain::Bool => ParamValue::Bool(true),
                };
                (def.name.clone(), value)
            })
            .collect();
        Self::new(ParamRecord { entries }, 0.0, 1.0)
    }

    pub fn minimizer(&self) -> &ParamRecord {
        &self.target
    }

    pub fn minimum(&self) -> f64 {
        self.minimum
    }

    pub fn value(&self, space: &ParamSpace, rec: &ParamRecord) -> f64 {
        let sq: f64 = space
            .params
            .iter()
            .zip(&rec.entries)
            .zip(&self.target.entries)
            .map(|((def, (_, v)), (_, t))| {
                let d = normalized(&def.domain, v.as_f64()) - normalized(&def.domain, t.as_f64());
                d * d
            })
            .sum();
        self.minimum + self.weight * sq
    }
}

fn normalized(domain: &ParamDomain, x: f64) -> f64 {
    match *domain {
        ParamDomain::Int { lo, hi } if hi > lo => (x - lo as f64) / (hi - lo) as f64,
        ParamDomain::Real { lo, hi } if hi > lo => (x - lo) / (hi - lo),
        ParamDomain::Bool => x,
        _ => 0.0,
    }
}

pub enum ParamEvaluator {
    Surrogate(Surrogate),
    External(ExternalEvaluator),
}

pub struct ParamsProblem {
    name: String,
    space: ParamSpace,
    evaluator: ParamEvaluator,
    encoding: EncodingSpec,
}

impl ParamsProblem {
    pub fn new(name: impl Into<String>, space: ParamSpace, evaluator: ParamEvaluator) -> Self {
        let encoding = EncodingSpec::Params(space.clone());
        Self { name: name.into(), space, evaluator, encoding }
    }

    pub fn space(&self) -> &ParamSpace {
        &self.space
    }

    fn record<'a>(&self, g: &'a Genome) -> &'a ParamRecord {
        g.as_params().unwrap_or_else(|| wrong_encoding(&self.name, g))
    }

    fn build(&self, values: impl Iterator<Item = ParamValue>) -> Genome {
        Genome::Params(ParamRecord { entries: self.space.params.iter().map(|d| d.name.clone()).zip(values).collect() })
    }

    /// Rounds and clamps a numeric value into `domain`.
    fn coerce(domain: &ParamDomain, x: f64) -> ParamValue {
        match *domain {
            ParamDomain::Int { lo, hi } => ParamValue::Int((x.round() as i64).clamp(lo, hi)),
            ParamDomain::Real { lo, hi } => ParamValue::Real(x.clamp(lo, hi)),
            ParamDomain::Bool => ParamValue::Bool(x.round().clamp(0.0, 1.0) >= 1.0),
        }
    }

    fn grid_size(domain: &ParamDomain) -> usize {
        match *domain {
            ParamDomain::Int { lo, hi } => (hi - lo + 1) as usize,
            ParamDomain::Real { lo, hi } => ((hi - lo) / GRID_STEP - 1e-9).ceil().max(0.0) as usize + 1,
            ParamDomain::Bool => 2,
        }
    }
}

impl Problem for ParamsProblem {
    fn name(&self) -> &str {
        &self.name
    }

    fn encoding(&self) -> &EncodingSpec {
        &self.encoding
    }

    fn is_stochastic(&self) -> bool {
        match &self.evaluator {
            ParamEvaluator::Surrogate(_) => false,
            ParamEvaluator::External(e) => e.is_stochastic(),
        }
    }

    fn evaluate(&self, genome: &Genome) -> Result<f64, EvalError> {
        validate_genome(genome, &self.encoding).map_err(|v| EvalError::Contract(v.to_string()))?;
        match &self.evaluator {
            ParamEvaluator::Surrogate(s) => Ok(s.value(&self.space, self.record(genome))),
            ParamEvaluator::External(e) => e.evaluate_text(&genome.to_canonical()),
        }
    }

    fn random_solution(&self, rng: &mut DynRng) -> Genome {
        let values: Vec<ParamValue> = self
            .space
            .params
            .iter()
            .map(|def| match def.domain {
                ParamDomain::Int { lo, hi } => ParamValue::Int(rng.gen_range(lo..=hi)),
                ParamDomain::Real { lo, hi } => ParamValue::Real(rng.gen_range(lo..=hi)),
                ParamDomain::Bool => ParamValue::Bool(rng.gen_bool(0.5)),
            })
            .collect();
        self.build(values.into_iter())
    }

    /// Nested scan over every range, first entry fastest.
    fn next_solution(&self, cursor: &mut Cursor, _rng: &mut DynRng) -> Option<Genome> {
        if cursor.exhausted {
            return None;
        }
        let params = &self.space.params;
        if !cursor.started {
            cursor.started = true;
            cursor.digits = vec![0; params.len()];
        } else if !advance_counter(&mut cursor.digits, |pos| Self::grid_size(&params[pos].domain)) {
            cursor.exhausted = true;
            return None;
        }
        let values: Vec<ParamValue> = params
            .iter()
            .zip(&cursor.digits)
            .map(|(def, &k)| match def.domain {
                ParamDomain::Int { lo, .. } => ParamValue::Int(lo + k as i64),
                ParamDomain::Real { lo, hi } => ParamValue::Real((lo + k as f64 * GRID_STEP).min(hi)),
                ParamDomain::Bool => ParamValue::Bool(k == 1),
            })
            .collect();
        Some(self.build(values.into_iter()))
    }

    /// Integers move by ±1, reals by less than `REAL_STEP`, booleans flip
    /// with probability 1/2; every entry is perturbed and clamped.
    fn unary(&self, genome: &Genome, _state: &MoveState, rng: &mut DynRng) -> Genome {
        let rec = self.record(genome);
        let values: Vec<ParamValue> = self
            .space
            .params
            .iter()
            .zip(&rec.entries)
            .map(|(def, (_, v))| match (def.domain.clone(), *v) {
                (ParamDomain::Int { lo, hi }, ParamValue::Int(x)) => {
                    let step = if rng.gen_bool(0.5) { 1 } else { -1 };
                    ParamValue::Int((x + step).clamp(lo, hi))
                }
                (ParamDomain::Real { lo, hi }, ParamValue::Real(x)) => {
                    ParamValue::Real((x + rng.gen_range(-REAL_STEP..REAL_STEP)).clamp(lo, hi))
                }
                (ParamDomain::Bool, ParamValue::Bool(b)) => ParamValue::Bool(if rng.gen_bool(0.5) { !b } else { b }),
                _ => wrong_encoding(&self.name, genome),
            })
            .collect();
        self.build(values.into_iter())
    }

    /// One-point crossover.
    fn binary(&self, a: &Genome, b: &Genome, rng: &mut DynRng) -> Genome {
        let (ra, rb) = (self.record(a), self.record(b));
        let n = ra.entries.len();
        let k = if n < 2 { n } else { rng.gen_range(1..n) };
        let values: Vec<ParamValue> = ra.entries[..k].iter().chain(&rb.entries[k..]).map(|(_, v)| *v).collect();
        self.build(values.into_iter())
    }

    /// Classic `c + f (a - b)`, rounded for integer and boolean entries.
    fn ternary(&self, a: &Genome, b: &Genome, c: &Genome, f: f64, _rng: &mut DynRng) -> Genome {
        let (ra, rb, rc) = (self.record(a), self.record(b), self.record(c));
        let values: Vec<ParamValue> = self
            .space
            .params
            .iter()
            .enumerate()
            .map(|(i, def)| {
                let x = rc.entries[i].1.as_f64() + f * (ra.entries[i].1.as_f64() - rb.entries[i].1.as_f64());
                Self::coerce(&def.domain, x)
            })
            .collect();
        self.build(values.into_iter())
    }
}

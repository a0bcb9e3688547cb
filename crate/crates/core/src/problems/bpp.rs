//! One-dimensional bin packing with unit bins. Permutations are decoded with
//! first fit.

use std::path::Path;

use crate::error::{EvalError, LoadError};
use crate::genome::{validate_genome, EncodingSpec, Genome};

use super::permutation as perm;
use super::tsp::next_permutation;
use super::{wrong_encoding, Cursor, DynRng, MoveState, Problem};

pub const BIN_CAPACITY: f64 = 1.0;

// absorbs rounding in accumulated bin loads
const FIT_EPS: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct BppInstance {
    volumes: Vec<f64>,
}

impl BppInstance {
    pub fn new(volumes: Vec<f64>) -> Result<Self, LoadError> {
        if volumes.is_empty() {
            return Err(LoadError::Invariant("bin packing instance has no items".into()));
        }
        for (i, &v) in volumes.iter().enumerate() {
            if !v.is_finite() || v <= 0.0 {
                return Err(LoadError::Invariant(format!("item {i}: volume must be positive")));
            }
            if v > BIN_CAPACITY {
                return Err(LoadError::Invariant(format!("item {i}: volume exceeds capacity")));
            }
        }
        Ok(Self { volumes })
    }

    pub fn volumes(&self) -> &[f64] {
        &self.volumes
    }

    pub fn len(&self) -> usize {
        self.volumes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.volumes.is_empty()
    }

    /// Number of bins first fit uses when items arrive in `order`.
    pub fn first_fit(&self, order: &[usize]) -> usize {
        let mut residual: Vec<f64> = Vec::new();
        for &item in order {
            let v = self.volumes[item];
            match residual.iter_mut().find(|r| **r + FIT_EPS >= v) {
                Some(r) => *r -= v,
                None => residual.push(BIN_CAPACITY - v),
            }
        }
        residual.len()
    }

    pub fn load(path: &Path) -> Result<Self, LoadError> {
        let text =
            std::fs::read_to_string(path).map_err(|source| LoadError::Io { path: path.to_path_buf(), source })?;
        Self::parse(&text)
    }

    /// One volume per line; blank lines and `#` comments are skipped.
    pub fn parse(text: &str) -> Result<Self, LoadError> {
        let mut volumes = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let v: f64 = line.parse().map_err(|_| LoadError::parse(idx + 1, format!("not a number: {line:?}")))?;
            if v > BIN_CAPACITY {
                return Err(LoadError::Invariant(format!("line {}: volume exceeds capacity", idx + 1)));
            }
            volumes.push(v);
        }
        Self::new(volumes)
    }

    pub fn to_text(&self) -> String {
        self.volumes.iter().map(|v| format!("{v}\n")).collect()
    }
}

pub struct BppProblem {
    name: String,
    instance: BppInstance,
    encoding: EncodingSpec,
}

impl BppProblem {
    pub fn new(name: impl Into<String>, instance: BppInstance) -> Self {
        let encoding = EncodingSpec::Permutation { n: instance.len() };
        Self { name: name.into(), instance, encoding }
    }

    pub fn instance(&self) -> &BppInstance {
        &self.instance
    }

    fn perm<'a>(&self, g: &'a Genome) -> &'a [usize] {
        g.as_permutation().unwrap_or_else(|| wrong_encoding(&self.name, g))
    }
}

impl Problem for BppProblem {
    fn name(&self) -> &str {
        &self.name
    }

    fn encoding(&self) -> &EncodingSpec {
        &self.encoding
    }

    fn evaluate(&self, genome: &Genome) -> Result<f64, EvalError> {
        validate_genome(genome, &self.encoding).map_err(|v| EvalError::Contract(v.to_string()))?;
        Ok(self.instance.first_fit(self.perm(genome)) as f64)
    }

    fn random_solution(&self, rng: &mut DynRng) -> Genome {
        Genome::Permutation(perm::random_permutation(self.instance.len(), rng))
    }

    fn next_solution(&self, cursor: &mut Cursor, _rng: &mut DynRng) -> Option<Genome> {
        next_permutation(cursor, self.instance.len())
    }

    fn unary(&self, genome: &Genome, state: &MoveState, rng: &mut DynRng) -> Genome {
        Genome::Permutation(perm::displacement(self.perm(genome), state.block_cap, rng))
    }

    fn initial_move_state(&self) -> MoveState {
        MoveState::adaptive(perm::max_displacement_block(self.instance.len()))
    }

    fn move_feedback(&self, state: &mut MoveState, improved: bool) {
        state.record(improved);
    }

    fn mutate(&self, genome: &Genome, rng: &mut DynRng) -> Genome {
        Genome::Permutation(perm::shift_mutation(self.perm(genome), rng))
    }

    fn binary(&self, a: &Genome, b: &Genome, rng: &mut DynRng) -> Genome {
        Genome::Permutation(perm::order_crossover_random(self.perm(a), self.perm(b), rng))
    }

    fn ternary(&self, a: &Genome, b: &Genome, c: &Genome, _f: f64, _rng: &mut DynRng) -> Genome {
        Genome::Permutation(perm::ternary(self.perm(a), self.perm(b), self.perm(c)))
    }
}

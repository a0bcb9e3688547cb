//! Solution encodings shared by all problem adapters.
//!
//! Four encodings are supported: permutations (TSP, bin packing), bounded real
//! vectors (continuous optimization), vertex subsets (vertex cover) and mixed
//! parameter records (hyper-parameter tuning). Every encoding has a canonical
//! text form used by the event log and by the external evaluator protocol.

use std::fmt;
use std::hash::{Hash, Hasher};

use fnv::FnvHasher;
use serde::{Deserialize, Serialize};

use crate::error::{GenomeViolation, ParseGenomeError};

/// Closed interval `[lo, hi]` for one real coordinate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    pub lo: f64,
    pub hi: f64,
}

impl Bounds {
    pub fn new(lo: f64, hi: f64) -> Self {
        Self { lo, hi }
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.lo && x <= self.hi
    }

    pub fn clamp(&self, x: f64) -> f64 {
        x.clamp(self.lo, self.hi)
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }
}

/// Domain of a single named parameter.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum ParamDomain {
    Int { lo: i64, hi: i64 },
    Real { lo: f64, hi: f64 },
    Bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParamDef {
    pub name: String,
    pub domain: ParamDomain,
}

/// Ordered list of parameter definitions. Records built for a space list
/// their entries in the same order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParamSpace {
    pub params: Vec<ParamDef>,
}

impl ParamSpace {
    pub fn new(params: Vec<ParamDef>) -> Self {
        Self { params }
    }

    pub fn len(&self) -> usize {
        self.params.len()
    }

    pub fn is_empty(&self) -> bool {
        self.params.is_empty()
    }

    /// Checks that every declared range is non-empty.
    pub fn check(&self) -> Result<(), String> {
        for def in &self.params {
            match def.domain {
                ParamDomain::Int { lo, hi } if lo > hi => {
                    return Err(format!("parameter {} has empty range [{lo}, {hi}]", def.name))
                }
                ParamDomain::Real { lo, hi } if lo.is_nan() || hi.is_nan() || lo > hi => {
                    return Err(format!("parameter {} has empty range [{lo}, {hi}]", def.name))
                }
                _ => {}
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub enum ParamValue {
    Int(i64),
    Real(f64),
    Bool(bool),
}

impl ParamValue {
    /// Numeric view used by arithmetic operators (booleans map to 0/1).
    pub fn as_f64(&self) -> f64 {
        match *self {
            ParamValue::Int(v) => v as f64,
            ParamValue::Real(v) => v,
            ParamValue::Bool(b) => f64::from(u8::from(b)),
        }
    }
}

impl PartialEq for ParamValue {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (ParamValue::Int(a), ParamValue::Int(b)) => a == b,
            (ParamValue::Real(a), ParamValue::Real(b)) => a.to_bits() == b.to_bits(),
            (ParamValue::Bool(a), ParamValue::Bool(b)) => a == b,
            _ => false,
        }
    }
}

impl Eq for ParamValue {}

impl Hash for ParamValue {
    fn hash<H: Hasher>(&self, state: &mut H) {
        match *self {
            ParamValue::Int(v) => {
                0u8.hash(state);
                v.hash(state);
            }
            ParamValue::Real(v) => {
                1u8.hash(state);
                v.to_bits().hash(state);
            }
            ParamValue::Bool(v) => {
                2u8.hash(state);
                v.hash(state);
            }
        }
    }
}

/// Named parameter values, ordered like the owning [`ParamSpace`].
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ParamRecord {
    pub entries: Vec<(String, ParamValue)>,
}

impl ParamRecord {
    pub fn get(&self, name: &str) -> Option<ParamValue> {
        self.entries.iter().find(|(n, _)| n == name).map(|(_, v)| *v)
    }
}

/// Subset of the vertices `0..universe`, stored as a membership mask.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct VertexSet {
    members: Vec<bool>,
    count: usize,
}

impl VertexSet {
    pub fn empty(universe: usize) -> Self {
        Self { members: vec![false; universe], count: 0 }
    }

    pub fn full(universe: usize) -> Self {
        Self { members: vec![true; universe], count: universe }
    }

    /// Builds a set from vertex ids; ids outside the universe are rejected.
    pub fn from_members<I>(universe: usize, ids: I) -> Result<Self, GenomeViolation>
    where
        I: IntoIterator<Item = usize>,
    {
        let mut set = Self::empty(universe);
        for v in ids {
            if v >= universe {
                return Err(GenomeViolation::new(format!("vertex {v} outside universe of size {universe}")));
            }
            set.insert(v);
        }
        Ok(set)
    }

    pub fn universe(&self) -> usize {
        self.members.len()
    }

    pub fn len(&self) -> usize {
        self.count
    }

    pub fn is_empty(&self) -> bool {
        self.count == 0
    }

    pub fn contains(&self, v: usize) -> bool {
        self.members.get(v).copied().unwrap_or(false)
    }

    pub fn insert(&mut self, v: usize) -> bool {
        if self.members[v] {
            return false;
        }
        self.members[v] = true;
        self.count += 1;
        true
    }

    pub fn remove(&mut self, v: usize) -> bool {
        if !self.members[v] {
            return false;
        }
        self.members[v] = false;
        self.count -= 1;
        true
    }

    /// Member ids in ascending order.
    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.members.iter().enumerate().filter(|(_, &m)| m).map(|(v, _)| v)
    }

    pub fn mask(&self) -> &[bool] {
        &self.members
    }
}

/// A candidate solution in one of the four supported encodings.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub enum Genome {
    Permutation(Vec<usize>),
    RealVector(Vec<f64>),
    VertexSet(VertexSet),
    Params(ParamRecord),
}

impl PartialEq for Genome {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Genome::Permutation(a), Genome::Permutation(b)) => a == b,
            (Genome::RealVector(a), Genome::RealVector(b)) => {
                a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x.to_bits() == y.to_bits())
            }
            (Genome::VertexSet(a), Genome::VertexSet(b)) => a == b,
            (Genome::Params(a), Genome::Params(b)) => a == b,
            _ => false,
        }
    }
}

impl Eq for Genome {}

impl Hash for Genome {
    fn hash<H: Hasher>(&self, state: &mut H) {
        match self {
            Genome::Permutation(p) => {
                0u8.hash(state);
                p.hash(state);
            }
            Genome::RealVector(v) => {
                1u8.hash(state);
                v.len().hash(state);
                for x in v {
                    x.to_bits().hash(state);
                }
            }
            Genome::VertexSet(s) => {
                2u8.hash(state);
                s.hash(state);
            }
            Genome::Params(r) => {
                3u8.hash(state);
                r.hash(state);
            }
        }
    }
}

/// Which encoding a genome uses, without its contents.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EncodingKind {
    Permutation,
    RealVector,
    VertexSet,
    Params,
}

impl fmt::Display for EncodingKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            EncodingKind::Permutation => "permutation",
            EncodingKind::RealVector => "real-vector",
            EncodingKind::VertexSet => "vertex-set",
            EncodingKind::Params => "params",
        };
        f.write_str(s)
    }
}

impl Genome {
    pub fn encoding(&self) -> EncodingKind {
        match self {
            Genome::Permutation(_) => EncodingKind::Permutation,
            Genome::RealVector(_) => EncodingKind::RealVector,
            Genome::VertexSet(_) => EncodingKind::VertexSet,
            Genome::Params(_) => EncodingKind::Params,
        }
    }

    /// Stable 64-bit fingerprint used for distinctness bookkeeping.
    pub fn digest(&self) -> u64 {
        let mut hasher = FnvHasher::default();
        self.hash(&mut hasher);
        hasher.finish()
    }

    pub fn as_permutation(&self) -> Option<&[usize]> {
        match self {
            Genome::Permutation(p) => Some(p),
            _ => None,
        }
    }

    pub fn as_real_vector(&self) -> Option<&[f64]> {
        match self {
            Genome::RealVector(v) => Some(v),
            _ => None,
        }
    }

    pub fn as_vertex_set(&self) -> Option<&VertexSet> {
        match self {
            Genome::VertexSet(s) => Some(s),
            _ => None,
        }
    }

    pub fn as_params(&self) -> Option<&ParamRecord> {
        match self {
            Genome::Params(r) => Some(r),
            _ => None,
        }
    }

    /// Canonical text form: whitespace separated indices, `{:.16e}` reals,
    /// ascending vertex ids, or `key=value` pairs.
    pub fn to_canonical(&self) -> String {
        match self {
            Genome::Permutation(p) => join(p.iter().map(|i| i.to_string())),
            Genome::RealVector(v) => join(v.iter().map(|x| format_real(*x))),
            Genome::VertexSet(s) => join(s.iter().map(|v| v.to_string())),
            Genome::Params(r) => join(r.entries.iter().map(|(name, value)| {
                let value = match *value {
                    ParamValue::Int(i) => i.to_string(),
                    ParamValue::Real(x) => format_real(x),
                    ParamValue::Bool(b) => u8::from(b).to_string(),
                };
                format!("{name}={value}")
            })),
        }
    }

    /// Parses the canonical text form for `spec` and validates the result.
    pub fn parse_canonical(text: &str, spec: &EncodingSpec) -> Result<Genome, ParseGenomeError> {
        let tokens = text.split_whitespace();
        let genome = match spec {
            EncodingSpec::Permutation { .. } => {
                Genome::Permutation(tokens.map(parse_token::<usize>).collect::<Result<_, _>>()?)
            }
            EncodingSpec::RealVector { .. } => {
                Genome::RealVector(tokens.map(parse_token::<f64>).collect::<Result<_, _>>()?)
            }
            EncodingSpec::VertexSet { n } => {
                let ids = tokens.map(parse_token::<usize>).collect::<Result<Vec<_>, _>>()?;
                Genome::VertexSet(VertexSet::from_members(*n, ids)?)
            }
            EncodingSpec::Params(space) => {
                let mut entries = Vec::with_capacity(space.len());
                for (token, def) in tokens.zip(&space.params) {
                    let (name, value) =
                        token.split_once('=').ok_or_else(|| ParseGenomeError::Token(token.to_string()))?;
                    if name != def.name {
                        return Err(ParseGenomeError::Token(token.to_string()));
                    }
                    let value = match def.domain {
                        ParamDomain::Int { .. } => ParamValue::Int(parse_token(value)?),
                        ParamDomain::Real { .. } => ParamValue::Real(parse_token(value)?),
                        ParamDomain::Bool => match value {
                            "0" => ParamValue::Bool(false),
                            "1" => ParamValue::Bool(true),
                            _ => return Err(ParseGenomeError::Token(token.to_string())),
                        },
                    };
                    entries.push((name.to_string(), value));
                }
                Genome::Params(ParamRecord { entries })
            }
        };
        validate_genome(&genome, spec)?;
        Ok(genome)
    }
}

fn join<I: Iterator<Item = String>>(items: I) -> String {
    items.collect::<Vec<_>>().join(" ")
}

/// 17 significant digits, enough for an exact round trip.
pub fn format_real(x: f64) -> String {
    format!("{x:.16e}")
}

fn parse_token<T: std::str::FromStr>(token: &str) -> Result<T, ParseGenomeError> {
    token.parse().map_err(|_| ParseGenomeError::Token(token.to_string()))
}

/// Encoding parameters a genome is validated against.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum EncodingSpec {
    Permutation { n: usize },
    RealVector { bounds: Vec<Bounds> },
    VertexSet { n: usize },
    Params(ParamSpace),
}

impl EncodingSpec {
    pub fn kind(&self) -> EncodingKind {
        match self {
            EncodingSpec::Permutation { .. } => EncodingKind::Permutation,
            EncodingSpec::RealVector { .. } => EncodingKind::RealVector,
            EncodingSpec::VertexSet { .. } => EncodingKind::VertexSet,
            EncodingSpec::Params(_) => EncodingKind::Params,
        }
    }
}

/// Checks every invariant of `genome` against `spec`, reporting the first
/// violation found.
pub fn validate_genome(genome: &Genome, spec: &EncodingSpec) -> Result<(), GenomeViolation> {
    match (genome, spec) {
        (Genome::Permutation(p), EncodingSpec::Permutation { n }) => {
            if p.len() != *n {
                return Err(GenomeViolation::new(format!("permutation has length {} but n = {n}", p.len())));
            }
            let mut seen = vec![false; *n];
            for &i in p {
                if i >= *n {
                    return Err(GenomeViolation::new(format!("index {i} out of range")));
                }
                if seen[i] {
                    return Err(GenomeViolation::new(format!("index {i} duplicated")));
                }
                seen[i] = true;
            }
            Ok(())
        }
        (Genome::RealVector(v), EncodingSpec::RealVector { bounds }) => {
            if v.len() != bounds.len() {
                return Err(GenomeViolation::new(format!(
                    "vector has dimension {} but bounds have {}",
                    v.len(),
                    bounds.len()
                )));
            }
            for (d, (x, b)) in v.iter().zip(bounds).enumerate() {
                if !x.is_finite() {
                    return Err(GenomeViolation::new(format!("dimension {d} is not finite")));
                }
                if !b.contains(*x) {
                    return Err(GenomeViolation::new(format!("dimension {d} out of bounds")));
                }
            }
            Ok(())
        }
        (Genome::VertexSet(s), EncodingSpec::VertexSet { n }) => {
            if s.universe() != *n {
                return Err(GenomeViolation::new(format!("vertex set universe {} but n = {n}", s.universe())));
            }
            Ok(())
        }
        (Genome::Params(r), EncodingSpec::Params(space)) => {
            if r.entries.len() != space.len() {
                return Err(GenomeViolation::new(format!(
                    "record has {} entries but space declares {}",
                    r.entries.len(),
                    space.len()
                )));
            }
            for ((name, value), def) in r.entries.iter().zip(&space.params) {
                if *name != def.name {
                    return Err(GenomeViolation::new(format!("entry {name} where {} expected", def.name)));
                }
                let ok = match (value, &def.domain) {
                    (ParamValue::Int(v), ParamDomain::Int { lo, hi }) => (*lo..=*hi).contains(v),
                    (ParamValue::Real(v), ParamDomain::Real { lo, hi }) => v.is_finite() && *v >= *lo && *v <= *hi,
                    (ParamValue::Bool(_), ParamDomain::Bool) => true,
                    _ => return Err(GenomeViolation::new(format!("entry {name} has wrong type"))),
                };
                if !ok {
                    return Err(GenomeViolation::new(format!("entry {name} out of range")));
                }
            }
            Ok(())
        }
        (g, s) => Err(GenomeViolation::new(format!("{} genome does not match {} encoding", g.encoding(), s.kind()))),
    }
}

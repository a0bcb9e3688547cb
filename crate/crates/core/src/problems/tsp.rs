//! Travelling salesman adapter (permutation encoding, 2-opt moves).

use std::path::Path;

use crate::error::{EvalError, LoadError};
use crate::genome::{EncodingSpec, Genome};

use super::permutation as perm;
use super::{wrong_encoding, Cursor, DynRng, MoveState, Problem};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Metric {
    Euclidean,
    /// TSPLIB EUC_2D: Euclidean distance rounded to the nearest integer.
    EucRounded,
}

/// Symmetric, non-negative distance matrix over `n >= 3` cities.
#[derive(Clone, Debug)]
pub struct TspInstance {
    n: usize,
    dist: Vec<f64>,
}

impl TspInstance {
    pub fn from_coords(coords: &[(f64, f64)], metric: Metric) -> Result<Self, LoadError> {
        let n = coords.len();
        let mut dist = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                let (dx, dy) = (coords[i].0 - coords[j].0, coords[i].1 - coords[j].1);
                let d = (dx * dx + dy * dy).sqrt();
                dist[i * n + j] = match metric {
                    Metric::Euclidean => d,
                    Metric::EucRounded => (d + 0.5).floor(),
                };
            }
        }
        Self::from_matrix(n, dist)
    }

    pub fn from_matrix(n: usize, dist: Vec<f64>) -> Result<Self, LoadError> {
        if n < 3 {
            return Err(LoadError::Invariant(format!("TSP needs at least 3 cities, got {n}")));
        }
        if dist.len() != n * n {
            return Err(LoadError::Invariant("distance matrix is not n x n".into()));
        }
        for i in 0..n {
            for j in 0..n {
                let d = dist[i * n + j];
                if !(d.is_finite() && d >= 0.0) {
                    return Err(LoadError::Invariant(format!("distance {i}-{j} is negative or not finite")));
                }
                if d != dist[j * n + i] {
                    return Err(LoadError::Invariant(format!("distance {i}-{j} is not symmetric")));
                }
            }
        }
        Ok(Self { n, dist })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn distance(&self, a: usize, b: usize) -> f64 {
        self.dist[a * self.n + b]
    }

    /// Length of the closed tour visiting cities in `order`.
    pub fn tour_length(&self, order: &[usize]) -> f64 {
        let n = order.len();
        (0..n).map(|i| self.distance(order[i], order[(i + 1) % n])).sum()
    }

    /// Reads a TSPLIB file with `EDGE_WEIGHT_TYPE: EUC_2D`.
    pub fn load_tsplib(path: &Path) -> Result<Self, LoadError> {
        let text =
            std::fs::read_to_string(path).map_err(|source| LoadError::Io { path: path.to_path_buf(), source })?;
        Self::parse_tsplib(&text)
    }

    pub fn parse_tsplib(text: &str) -> Result<Self, LoadError> {
        let mut dimension = None;
        let mut weight_type = None;
        let mut coords: Vec<Option<(f64, f64)>> = Vec::new();
        let mut in_coords = false;
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim();
            if line.is_empty() {
                continue;
            }
            if line == "EOF" {
                break;
            }
            if in_coords {
                let fields: Vec<&str> = line.split_whitespace().collect();
                if fields.len() != 3 {
                    return Err(LoadError::parse(line_no, "expected `index x y`"));
                }
                let id: usize = fields[0].parse().map_err(|_| LoadError::parse(line_no, "bad node index"))?;
                let x: f64 = fields[1].parse().map_err(|_| LoadError::parse(line_no, "bad x coordinate"))?;
                let y: f64 = fields[2].parse().map_err(|_| LoadError::parse(line_no, "bad y coordinate"))?;
                if id == 0 || id > coords.len() {
                    return Err(LoadError::parse(line_no, format!("node index {id} out of range")));
                }
                if coords[id - 1].replace((x, y)).is_some() {
                    return Err(LoadError::parse(line_no, format!("node {id} listed twice")));
                }
                continue;
            }
            if line.starts_with("NODE_COORD_SECTION") {
                let n =
                    dimension.ok_or_else(|| LoadError::parse(line_no, "DIMENSION must precede NODE_COORD_SECTION"))?;
                if weight_type.as_deref() != Some("EUC_2D") {
                    return Err(LoadError::parse(line_no, "only EDGE_WEIGHT_TYPE EUC_2D is supported"));
                }
                coords = vec![None; n];
                in_coords = true;
                continue;
            }
            let (key, value) =
                line.split_once(':').ok_or_else(|| LoadError::parse(line_no, format!("unexpected line {line:?}")))?;
            match key.trim() {
                "DIMENSION" => {
                    dimension = Some(value.trim().parse().map_err(|_| LoadError::parse(line_no, "bad DIMENSION"))?)
                }
                "EDGE_WEIGHT_TYPE" => weight_type = Some(value.trim().to_string()),
                _ => {}
            }
        }
        if !in_coords {
            return Err(LoadError::Invariant("missing NODE_COORD_SECTION".into()));
        }
        let coords = coords
            .into_iter()
            .enumerate()
            .map(|(i, c)| c.ok_or_else(|| LoadError::Invariant(format!("node {} has no coordinates", i + 1))))
            .collect::<Result<Vec<_>, _>>()?;
        Self::from_coords(&coords, Metric::EucRounded)
    }
}

pub struct TspProblem {
    name: String,
    instance: TspInstance,
    encoding: EncodingSpec,
}

impl TspProblem {
    pub fn new(name: impl Into<String>, instance: TspInstance) -> Self {
        let encoding = EncodingSpec::Permutation { n: instance.n() };
        Self { name: name.into(), instance, encoding }
    }

    pub fn instance(&self) -> &TspInstance {
        &self.instance
    }

    fn perm<'a>(&self, g: &'a Genome) -> &'a [usize] {
        g.as_permutation().unwrap_or_else(|| wrong_encoding(&self.name, g))
    }
}

impl Problem for TspProblem {
    fn name(&self) -> &str {
        &self.name
    }

    fn encoding(&self) -> &EncodingSpec {
        &self.encoding
    }

    fn evaluate(&self, genome: &Genome) -> Result<f64, EvalError> {
        crate::genome::validate_genome(genome, &self.encoding).map_err(|v| EvalError::Contract(v.to_string()))?;
        Ok(self.instance.tour_length(self.perm(genome)))
    }

    fn random_solution(&self, rng: &mut DynRng) -> Genome {
        Genome::Permutation(perm::random_permutation(self.instance.n(), rng))
    }

    fn next_solution(&self, cursor: &mut Cursor, _rng: &mut DynRng) -> Option<Genome> {
        next_permutation(cursor, self.instance.n())
    }

    fn unary(&self, genome: &Genome, _state: &MoveState, rng: &mut DynRng) -> Genome {
        Genome::Permutation(perm::two_opt(self.perm(genome), rng))
    }

    fn binary(&self, a: &Genome, b: &Genome, rng: &mut DynRng) -> Genome {
        Genome::Permutation(perm::single_point_crossover_random(self.perm(a), self.perm(b), rng))
    }

    fn ternary(&self, a: &Genome, b: &Genome, c: &Genome, _f: f64, _rng: &mut DynRng) -> Genome {
        Genome::Permutation(perm::ternary(self.perm(a), self.perm(b), self.perm(c)))
    }
}

/// Lexicographic enumeration shared by the permutation adapters.
pub(crate) fn next_permutation(cursor: &mut Cursor, n: usize) -> Option<Genome> {
    if cursor.exhausted {
        return None;
    }
    if !cursor.started {
        cursor.started = true;
        cursor.digits = (0..n).collect();
    } else if !perm::next_lexicographic(&mut cursor.digits) {
        cursor.exhausted = true;
        return None;
    }
    Some(Genome::Permutation(cursor.digits.clone()))
}

//! Continuous benchmark functions on a box (real-vector encoding).
//!
//! The functions follow their usual benchmark definitions without rotations
//! or oscillation transforms. An optional shift moves the minimizer to
//! `x_opt` and the minimum to `f_opt`.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rand::Rng;

use crate::error::{ConfigError, EvalError};
use crate::genome::{validate_genome, Bounds, EncodingSpec, Genome};

use super::{advance_counter, wrong_encoding, Cursor, DynRng, MoveState, Problem};

/// Per-coordinate perturbation half-width of the unary move.
pub const UNARY_STEP: f64 = 0.0025;
/// Grid spacing of the systematic search.
pub const GRID_STEP: f64 = 0.005;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CoKind {
    /// Büche-Rastrigin.
    F04,
    /// Rosenbrock.
    F08,
    /// Different powers.
    F14,
    /// Schaffers F7.
    F17,
}

impl CoKind {
    pub fn name(&self) -> &'static str {
        match self {
            CoKind::F04 => "f04",
            CoKind::F08 => "f08",
            CoKind::F14 => "f14",
            CoKind::F17 => "f17",
        }
    }
}

impl fmt::Display for CoKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CoKind {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().trim_start_matches("co").trim_start_matches('f') {
            "04" | "4" => Ok(CoKind::F04),
            "08" | "8" => Ok(CoKind::F08),
            "14" => Ok(CoKind::F14),
            "17" => Ok(CoKind::F17),
            _ => Err(ConfigError(format!("unknown continuous function {s:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CoFunction {
    pub kind: CoKind,
    pub dim: usize,
    pub shift: Option<Vec<f64>>,
    pub f_opt: f64,
    pub bounds: Vec<Bounds>,
}

impl CoFunction {
    /// Unshifted function on the default box `[-5, 5]^dim`.
    pub fn canonical(kind: CoKind, dim: usize) -> Self {
        Self { kind, dim, shift: None, f_opt: 0.0, bounds: vec![Bounds::new(-5.0, 5.0); dim] }
    }

    /// Function with its minimizer drawn uniformly from `[-4, 4]^dim`.
    pub fn shifted(kind: CoKind, dim: usize, f_opt: f64, rng: &mut DynRng) -> Self {
        let shift = (0..dim).map(|_| rng.gen_range(-4.0..=4.0)).collect();
        Self { shift: Some(shift), f_opt, ..Self::canonical(kind, dim) }
    }

    /// Point where the function attains `f_opt`.
    pub fn minimizer(&self) -> Vec<f64> {
        match (&self.shift, self.kind) {
            (Some(x), _) => x.clone(),
            (None, CoKind::F08) => vec![1.0; self.dim],
            (None, _) => vec![0.0; self.dim],
        }
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        let opt = self.minimizer();
        let d: Vec<f64> = x.iter().zip(&opt).map(|(a, b)| a - b).collect();
        let raw = match self.kind {
            CoKind::F04 => buche_rastrigin(&d) + 100.0 * boundary_penalty(x),
            CoKind::F08 => rosenbrock(&d),
            CoKind::F14 => different_powers(&d),
            CoKind::F17 => schaffers(&d) + 10.0 * boundary_penalty(x),
        };
        raw + self.f_opt
    }
}

fn exponent_ratio(i: usize, n: usize) -> f64 {
    if n > 1 {
        i as f64 / (n - 1) as f64
    } else {
        0.0
    }
}

fn boundary_penalty(x: &[f64]) -> f64 {
    x.iter().map(|v| (v.abs() - 5.0).max(0.0).powi(2)).sum()
}

fn buche_rastrigin(d: &[f64]) -> f64 {
    let n = d.len();
    let z: Vec<f64> = d
        .iter()
        .enumerate()
        .map(|(i, &di)| {
            let mut s = 10f64.powf(0.5 * exponent_ratio(i, n));
            if i % 2 == 0 && di > 0.0 {
                s *= 10.0;
            }
            s * di
        })
        .collect();
    let cos_sum: f64 = z.iter().map(|zi| (2.0 * PI * zi).cos()).sum();
    10.0 * (n as f64 - cos_sum) + z.iter().map(|zi| zi * zi).sum::<f64>()
}

fn rosenbrock(d: &[f64]) -> f64 {
    let y: Vec<f64> = d.iter().map(|di| di + 1.0).collect();
    y.windows(2).map(|w| 100.0 * (w[0] * w[0] - w[1]).powi(2) + (w[0] - 1.0).powi(2)).sum()
}

fn different_powers(d: &[f64]) -> f64 {
    let n = d.len();
    d.iter().enumerate().map(|(i, di)| di.abs().powf(2.0 + 4.0 * exponent_ratio(i, n))).sum::<f64>().sqrt()
}

fn schaffers(d: &[f64]) -> f64 {
    let n = d.len();
    if n < 2 {
        return 0.0;
    }
    let z: Vec<f64> = d.iter().enumerate().map(|(i, di)| 10f64.powf(0.5 * exponent_ratio(i, n)) * di).collect();
    let sum: f64 = z
        .windows(2)
        .map(|w| {
            let s = (w[0] * w[0] + w[1] * w[1]).sqrt();
            let root = s.sqrt();
            root + root * (50.0 * s.powf(0.2)).sin().powi(2)
        })
        .sum();
    (sum / (n - 1) as f64).powi(2)
}

pub struct CoProblem {
    name: String,
    function: CoFunction,
    encoding: EncodingSpec,
}

impl CoProblem {
    pub fn new(name: impl Into<String>, function: CoFunction) -> Self {
        let encoding = EncodingSpec::RealVector { bounds: function.bounds.clone() };
        Self { name: name.into(), function, encoding }
    }

    pub fn function(&self) -> &CoFunction {
        &self.function
    }

    fn vector<'a>(&self, g: &'a Genome) -> &'a [f64] {
        g.as_real_vector().unwrap_or_else(|| wrong_encoding(&self.name, g))
    }

    fn clamped(&self, values: impl Iterator<Item = f64>) -> Genome {
        Genome::RealVector(values.zip(&self.function.bounds).map(|(v, b)| b.clamp(v)).collect())
    }

    fn grid_size(b: &Bounds) -> usize {
        (b.width() / GRID_STEP - 1e-9).ceil() as usize + 1
    }
}

impl Problem for CoProblem {
    fn name(&self) -> &str {
        &self.name
    }

    fn encoding(&self) -> &EncodingSpec {
        &self.encoding
    }

    fn evaluate(&self, genome: &Genome) -> Result<f64, EvalError> {
        validate_genome(genome, &self.encoding).map_err(|v| EvalError::Contract(v.to_string()))?;
        Ok(self.function.value(self.vector(genome)))
    }

    fn random_solution(&self, rng: &mut DynRng) -> Genome {
        Genome::RealVector(self.function.bounds.iter().map(|b| rng.gen_range(b.lo..=b.hi)).collect())
    }

    /// Row-major grid walk: the first coordinate advances fastest.
    fn next_solution(&self, cursor: &mut Cursor, _rng: &mut DynRng) -> Option<Genome> {
        if cursor.exhausted {
            return None;
        }
        let bounds = &self.function.bounds;
        if !cursor.started {
            cursor.started = true;
            cursor.digits = vec![0; bounds.len()];
        } else if !advance_counter(&mut cursor.digits, |pos| Self::grid_size(&bounds[pos])) {
            cursor.exhausted = true;
            return None;
        }
        Some(self.clamped(cursor.digits.iter().zip(bounds).map(|(&k, b)| b.lo + k as f64 * GRID_STEP)))
    }

    fn unary(&self, genome: &Genome, _state: &MoveState, rng: &mut DynRng) -> Genome {
        let x = self.vector(genome);
        self.clamped(x.iter().map(|v| v + rng.gen_range(-UNARY_STEP..=UNARY_STEP)))
    }

    fn binary(&self, a: &Genome, b: &Genome, rng: &mut DynRng) -> Genome {
        let (x1, x2) = (self.vector(a), self.vector(b));
        // x2 + w (x1 - x2) equals w x1 + (1 - w) x2 and is exact when x1 == x2
        self.clamped(x1.iter().zip(x2).map(|(p, q)| q + rng.gen::<f64>() * (p - q)))
    }

    fn ternary(&self, a: &Genome, b: &Genome, c: &Genome, f: f64, _rng: &mut DynRng) -> Genome {
        let (xa, xb, xc) = (self.vector(a), self.vector(b), self.vector(c));
        self.clamped(xa.iter().zip(xb).zip(xc).map(|((p, q), r)| r + f * (p - q)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn canonical_minima() {
        let f08 = CoFunction::canonical(CoKind::F08, 10);
        assert_eq!(f08.value(&[1.0; 10]), 0.0);
        let f14 = CoFunction::canonical(CoKind::F14, 10);
        assert_eq!(f14.value(&[0.0; 10]), 0.0);
        assert_eq!(CoFunction::canonical(CoKind::F04, 10).value(&[0.0; 10]), 0.0);
        assert_eq!(CoFunction::canonical(CoKind::F17, 10).value(&[0.0; 10]), 0.0);
    }

    #[test]
    fn known_values() {
        // Rosenbrock at the origin: 9 terms of (0 - 1)^2
        assert_eq!(CoFunction::canonical(CoKind::F08, 10).value(&[0.0; 10]), 9.0);
        // different powers in 2-D: sqrt(|x0|^2 + |x1|^6)
        let f = CoFunction::canonical(CoKind::F14, 2);
        assert!((f.value(&[0.5, 2.0]) - (0.25f64 + 64.0).sqrt()).abs() < 1e-12);
        // Büche-Rastrigin at integer points only pays the quadratic term
        let f = CoFunction::canonical(CoKind::F04, 2);
        // z0 = 10 * 1 (odd position, positive), z1 = 10^0.5 * 0
        assert!((f.value(&[1.0, 0.0]) - 100.0).abs() < 1e-9);
    }

    #[test]
    fn shifted_functions_hit_f_opt_at_minimizer() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for kind in [CoKind::F04, CoKind::F08, CoKind::F14, CoKind::F17] {
            for _ in 0..20 {
                let f = CoFunction::shifted(kind, 10, rng.gen_range(-100.0..100.0), &mut rng);
                assert_eq!(f.value(&f.minimizer()), f.f_opt, "{kind}");
            }
        }
    }

    #[test]
    fn rosenbrock_and_powers_are_non_negative() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let problem8 = CoProblem::new("f08", CoFunction::canonical(CoKind::F08, 10));
        let problem14 = CoProblem::new("f14", CoFunction::canonical(CoKind::F14, 10));
        for _ in 0..1000 {
            let x = problem8.random_solution(&mut rng);
            assert!(problem8.evaluate(&x).unwrap() >= 0.0);
            assert!(problem14.evaluate(&x).unwrap() >= 0.0);
        }
    }

    #[test]
    fn out_of_bounds_is_a_contract_violation() {
        let p = CoProblem::new("f14", CoFunction::canonical(CoKind::F14, 2));
        assert!(matches!(p.evaluate(&Genome::RealVector(vec![5.5, 0.0])), Err(EvalError::Contract(_))));
    }

    #[test]
    fn unary_clamps_at_corner() {
        let p = CoProblem::new("f14", CoFunction::canonical(CoKind::F14, 3));
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let corner = Genome::RealVector(vec![5.0, -5.0, 5.0]);
        for _ in 0..200 {
            let y = p.unary(&corner, &MoveState::fixed(), &mut rng);
            assert!(validate_genome(&y, p.encoding()).is_ok());
            for (a, b) in y.as_real_vector().unwrap().iter().zip([5.0, -5.0, 5.0]) {
                assert!((a - b).abs() <= UNARY_STEP);
            }
        }
    }

    #[test]
    fn binary_of_identical_parents_is_identity() {
        let p = CoProblem::new("f14", CoFunction::canonical(CoKind::F14, 4));
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..100 {
            let x = p.random_solution(&mut rng);
            assert_eq!(p.binary(&x, &x, &mut rng), x);
        }
    }

    #[test]
    fn grid_walk_first_step() {
        let p = CoProblem::new("f14", CoFunction::canonical(CoKind::F14, 2));
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut cursor = Cursor::default();
        let first = p.next_solution(&mut cursor, &mut rng).unwrap();
        assert_eq!(first, Genome::RealVector(vec![-5.0, -5.0]));
        let second = p.next_solution(&mut cursor, &mut rng).unwrap();
        let v = second.as_real_vector().unwrap();
        assert!((v[0] - -4.995).abs() < 1e-12);
        assert_eq!(v[1], -5.0);
    }

    #[test]
    fn grid_walk_carries_into_next_coordinate() {
        let f = CoFunction { bounds: vec![Bounds::new(0.0, 0.01); 2], ..CoFunction::canonical(CoKind::F14, 2) };
        let p = CoProblem::new("tiny", f);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut cursor = Cursor::default();
        let mut points = Vec::new();
        while let Some(g) = p.next_solution(&mut cursor, &mut rng) {
            points.push(g.as_real_vector().unwrap().to_vec());
        }
        assert_eq!(points.len(), 9);
        assert!((points[3][0] - 0.0).abs() < 1e-12 && (points[3][1] - 0.005).abs() < 1e-12);
        assert!((points[8][0] - 0.01).abs() < 1e-12 && (points[8][1] - 0.01).abs() < 1e-12);
    }

    #[test]
    fn kind_parsing() {
        assert_eq!("COf04".parse::<CoKind>().unwrap(), CoKind::F04);
        assert_eq!("f14".parse::<CoKind>().unwrap(), CoKind::F14);
        assert!("f99".parse::<CoKind>().is_err());
    }
}

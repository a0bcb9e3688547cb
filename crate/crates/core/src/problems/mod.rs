//! Problem adapters.
//!
//! Every adapter exposes the same operator vocabulary so that any method can
//! run on any problem: a random solution, a systematic "next" solution, a
//! unary neighbourhood move, an EA mutation, a binary crossover and a ternary
//! operator used by differential evolution.

use rand::RngCore;

use crate::error::EvalError;
use crate::genome::{EncodingSpec, Genome};

pub mod bpp;
pub mod co;
pub mod external;
pub mod params;
pub mod permutation;
pub mod tsp;
pub mod vc;

pub use bpp::{BppInstance, BppProblem};
pub use co::{CoFunction, CoProblem};
pub use external::ExternalEvaluator;
pub use params::{default_ml_space, ParamEvaluator, ParamsProblem, Surrogate};
pub use tsp::{TspInstance, TspProblem};
pub use vc::{VcInstance, VcProblem};

/// Object-safe random source handed to operators.
pub type DynRng = dyn RngCore;

/// Position of a systematic enumeration. Starts empty; each adapter keeps its
/// own mixed-radix digits here.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Cursor {
    pub digits: Vec<usize>,
    pub started: bool,
    pub exhausted: bool,
}

/// Adaptive state for moves whose strength is tuned online (currently the
/// bin-packing displacement block size).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MoveState {
    pub block_cap: usize,
    pub max_block: usize,
    pub stall: u32,
}

impl MoveState {
    /// Non-improving applications tolerated before the cap is halved.
    pub const PATIENCE: u32 = 10;

    pub fn fixed() -> Self {
        Self { block_cap: 1, max_block: 1, stall: 0 }
    }

    pub fn adaptive(max_block: usize) -> Self {
        let max_block = max_block.max(1);
        Self { block_cap: max_block, max_block, stall: 0 }
    }

    pub fn record(&mut self, improved: bool) {
        if improved {
            self.block_cap = self.max_block;
            self.stall = 0;
        } else {
            self.stall += 1;
            if self.stall >= Self::PATIENCE {
                self.block_cap = (self.block_cap / 2).max(1);
                self.stall = 0;
            }
        }
    }
}

/// A problem family instance together with its operators. Objectives are
/// minimized.
pub trait Problem: Send + Sync {
    fn name(&self) -> &str;

    fn encoding(&self) -> &EncodingSpec;

    /// True when repeated evaluation of one genome may differ.
    fn is_stochastic(&self) -> bool {
        false
    }

    fn evaluate(&self, genome: &Genome) -> Result<f64, EvalError>;

    fn random_solution(&self, rng: &mut DynRng) -> Genome;

    /// Next solution of the systematic enumeration, `None` once exhausted.
    fn next_solution(&self, cursor: &mut Cursor, rng: &mut DynRng) -> Option<Genome>;

    /// Neighbourhood move used by hill climbing, annealing and tabu search.
    fn unary(&self, genome: &Genome, state: &MoveState, rng: &mut DynRng) -> Genome;

    fn initial_move_state(&self) -> MoveState {
        MoveState::fixed()
    }

    fn move_feedback(&self, state: &mut MoveState, improved: bool) {
        let _ = (state, improved);
    }

    /// Mutation used by the evolutionary algorithm.
    fn mutate(&self, genome: &Genome, rng: &mut DynRng) -> Genome {
        self.unary(genome, &self.initial_move_state(), rng)
    }

    fn binary(&self, a: &Genome, b: &Genome, rng: &mut DynRng) -> Genome;

    /// Differential operator `c + f * (a - b)` in the encoding's own sense.
    fn ternary(&self, a: &Genome, b: &Genome, c: &Genome, f: f64, rng: &mut DynRng) -> Genome;
}

/// Advances a mixed-radix counter (least significant digit first). Returns
/// false on overflow, leaving all digits at zero.
pub(crate) fn advance_counter(digits: &mut [usize], radix: impl Fn(usize) -> usize) -> bool {
    for (pos, digit) in digits.iter_mut().enumerate() {
        *digit += 1;
        if *digit < radix(pos) {
            return true;
        }
        *digit = 0;
    }
    false
}

fn wrong_encoding(problem: &str, genome: &Genome) -> ! {
    panic!("{problem} adapter received a {} genome", genome.encoding())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn move_state_halves_and_resets() {
        let mut s = MoveState::adaptive(5);
        for _ in 0..MoveState::PATIENCE {
            s.record(false);
        }
        assert_eq!(s.block_cap, 2);
        for _ in 0..(3 * MoveState::PATIENCE) {
            s.record(false);
        }
        assert_eq!(s.block_cap, 1);
        s.record(true);
        assert_eq!(s.block_cap, 5);
    }

    #[test]
    fn counter_carries() {
        let mut d = vec![1, 0];
        assert!(advance_counter(&mut d, |_| 2));
        assert_eq!(d, vec![0, 1]);
        assert!(advance_counter(&mut d, |_| 2));
        assert_eq!(d, vec![1, 1]);
        assert!(!advance_counter(&mut d, |_| 2));
        assert_eq!(d, vec![0, 0]);
    }
}

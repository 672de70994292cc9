//! Pseudo-Boolean benchmark functions with the all-ones optimum.
//!
//! Fitness is integer-valued so ties are resolved exactly.

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::frequency::BitString;

/// Anything a sampled search point can be scored by.
pub trait PseudoBoolean {
    fn dim(&self) -> usize;
    fn eval_bits(&self, x: &BitString) -> i64;
}

/// The benchmark family: OneMax and jump functions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Objective {
    OneMax { n: usize },
    Jump { n: usize, k: usize },
}

impl Objective {
    pub fn one_max(n: usize) -> Self {
        Objective::OneMax { n }
    }

    pub fn jump(n: usize, k: usize) -> Result<Self> {
        if k < 1 || k > n {
            return Err(LabError::InvalidParameter(format!(
                "jump size must satisfy 1 <= k <= n, got k={k}, n={n}"
            )));
        }
        Ok(Objective::Jump { n, k })
    }

    pub fn n(&self) -> usize {
        match *self {
            Objective::OneMax { n } | Objective::Jump { n, .. } => n,
        }
    }

    /// Jump size; 0 for OneMax (used in tabular output).
    pub fn k_or_zero(&self) -> usize {
        match *self {
            Objective::OneMax { .. } => 0,
            Objective::Jump { k, .. } => k,
        }
    }

    pub fn kind_str(&self) -> &'static str {
        match self {
            Objective::OneMax { .. } => "onemax",
            Objective::Jump { .. } => "jump",
        }
    }

    /// Fitness as a function of the number of one-bits. Both kinds are
    /// symmetric, which the exact oracles exploit.
    pub fn eval_norm(&self, ones: usize) -> i64 {
        match *self {
            Objective::OneMax { n } => {
                debug_assert!(ones <= n);
                ones as i64
            }
            Objective::Jump { n, k } => {
                debug_assert!(ones <= n);
                if ones <= n - k || ones == n {
                    (ones + k) as i64
                } else {
                    (n - ones) as i64
                }
            }
        }
    }

    pub fn eval(&self, x: &BitString) -> i64 {
        debug_assert_eq!(x.n(), self.n());
        self.eval_norm(x.norm1())
    }

    /// True iff the point lies in the fitness valley `n-k < |x|_1 < n`.
    pub fn in_gap_norm(&self, ones: usize) -> bool {
        match *self {
            Objective::OneMax { .. } => false,
            Objective::Jump { n, k } => ones > n - k && ones < n,
        }
    }

    pub fn in_gap(&self, x: &BitString) -> bool {
        self.in_gap_norm(x.norm1())
    }

    /// Fitness of the unique global optimum, the all-ones string.
    pub fn optimum_fitness(&self) -> i64 {
        self.eval_norm(self.n())
    }
}

/// True iff `x` is the all-ones string, the unique optimum of both kinds.
pub fn is_optimum(x: &BitString) -> bool {
    x.is_all_ones()
}

impl PseudoBoolean for Objective {
    fn dim(&self) -> usize {
        self.n()
    }

    fn eval_bits(&self, x: &BitString) -> i64 {
        self.eval(x)
    }
}

/// Explicit truth table over `{0,1}^n`, for plugging arbitrary small
/// functions into the exact checkers.
#[derive(Debug, Clone)]
pub struct TruthTable {
    n: usize,
    values: Vec<i64>,
}

impl TruthTable {
    pub fn new(n: usize, values: Vec<i64>) -> Result<Self> {
        if n > 20 || values.len() != 1usize << n {
            return Err(LabError::InvalidParameter(format!(
                "truth table needs 2^n values with n <= 20, got n={n}, len={}",
                values.len()
            )));
        }
        Ok(TruthTable { n, values })
    }

    pub fn from_fn(n: usize, f: impl Fn(&BitString) -> i64) -> Result<Self> {
        let values = (0..1usize << n)
            .map(|mask| {
                let bits = (0..n).map(|i| ((mask >> i) & 1) as u8).collect();
                f(&BitString::new(bits).unwrap())
            })
            .collect();
        TruthTable::new(n, values)
    }
}

impl PseudoBoolean for TruthTable {
    fn dim(&self) -> usize {
        self.n
    }

    fn eval_bits(&self, x: &BitString) -> i64 {
        let mask = x
            .bits()
            .iter()
            .enumerate()
            .fold(0usize, |m, (i, &b)| m | ((b as usize) << i));
        self.values[mask]
    }
}

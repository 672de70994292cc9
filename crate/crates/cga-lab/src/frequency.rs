//! Frequency vectors on the exact update grid.
//!
//! Frequencies are never stored as floats. Every frequency is kept as an
//! integer numerator over the common denominator `2*n*mu`, which contains
//! both reachable grids:
//!
//! * bounded mode: `1/n + i/mu` with `i` in `[0..n_mu]`, `n_mu = (1-2/n)*mu`;
//! * free mode (no boundaries): `1/2 + j/mu` with `j` signed.
//!
//! A single update step moves a numerator by exactly `2*n`, so frequency
//! sums, distances and comparisons are exact integer arithmetic and repeated
//! `±1/mu` updates cannot accumulate rounding drift.

use num_rational::Ratio;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};

/// Behaviour at the edges of the frequency range.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundaryMode {
    /// Frequencies clamped into `[1/n, 1 - 1/n]`.
    Bounded,
    /// No clamping; a frequency reaching 0 or 1 freezes forever.
    Free,
}

/// True iff `(1 - 2/n) * mu` is an even integer, i.e. all reachable bounded
/// frequencies lie on the grid `{1/n + i/mu}` and `1/2` is one of them.
pub fn check_well_behaved(n: usize, mu: u64) -> bool {
    debug_assert!(n >= 4 && mu >= 1);
    ((n as u128 - 2) * mu as u128) % (2 * n as u128) == 0
}

/// Smallest `mu >= mu_hint` with a well-behaved bounded grid.
pub fn nearest_valid_mu(n: usize, mu_hint: u64) -> Result<u64> {
    if n < 4 || mu_hint < 1 {
        return Err(LabError::InvalidParameter(format!(
            "nearest_valid_mu requires n >= 4 and mu_hint >= 1, got n={n}, mu_hint={mu_hint}"
        )));
    }
    let limit = 10 * mu_hint * n as u64;
    (mu_hint..=limit)
        .find(|&mu| check_well_behaved(n, mu))
        .ok_or_else(|| {
            LabError::InvalidGrid(format!(
                "no well-behaved mu in [{mu_hint}, {limit}] for n={n}"
            ))
        })
}

/// Dimension and population size of a validated bounded grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridSpec {
    n: usize,
    mu: u64,
    n_mu: u64,
}

impl GridSpec {
    pub fn new(n: usize, mu: u64) -> Result<Self> {
        if n < 4 {
            return Err(LabError::InvalidParameter(format!(
                "dimension must be at least 4, got {n}"
            )));
        }
        if mu < 1 {
            return Err(LabError::InvalidParameter("mu must be positive".into()));
        }
        if !check_well_behaved(n, mu) {
            let hint = nearest_valid_mu(n, mu)?;
            return Err(LabError::InvalidGrid(format!(
                "mu={mu} is not well-behaved for n={n} ((1-2/n)*mu must be an even integer); \
                 nearest valid mu is {hint}"
            )));
        }
        let n_mu = ((n as u64 - 2) * mu) / n as u64;
        Ok(GridSpec { n, mu, n_mu })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn mu(&self) -> u64 {
        self.mu
    }

    /// Number of grid steps between the two boundaries, `(1 - 2/n) * mu`.
    pub fn n_mu(&self) -> u64 {
        self.n_mu
    }
}

/// A sampled search point.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BitString {
    bits: Vec<u8>,
}

impl BitString {
    pub fn new(bits: Vec<u8>) -> Result<Self> {
        if bits.iter().any(|&b| b > 1) {
            return Err(LabError::InvalidParameter(
                "bit values must be 0 or 1".into(),
            ));
        }
        Ok(BitString { bits })
    }

    pub fn zeros(n: usize) -> Self {
        BitString { bits: vec![0; n] }
    }

    pub fn ones(n: usize) -> Self {
        BitString { bits: vec![1; n] }
    }

    /// Parses e.g. "10110".
    pub fn parse(s: &str) -> Result<Self> {
        let bits = s
            .chars()
            .map(|c| match c {
                '0' => Ok(0),
                '1' => Ok(1),
                other => Err(LabError::InvalidParameter(format!(
                    "invalid bit character '{other}'"
                ))),
            })
            .collect::<Result<Vec<u8>>>()?;
        Ok(BitString { bits })
    }

    pub fn n(&self) -> usize {
        self.bits.len()
    }

    pub fn bits(&self) -> &[u8] {
        &self.bits
    }

    pub fn get(&self, i: usize) -> bool {
        self.bits[i] == 1
    }

    /// Number of one-bits.
    pub fn norm1(&self) -> usize {
        self.bits.iter().map(|&b| b as usize).sum()
    }

    pub fn is_all_ones(&self) -> bool {
        self.bits.iter().all(|&b| b == 1)
    }

    /// Hamming distance.
    pub fn distance(&self, other: &BitString) -> usize {
        self.bits
            .iter()
            .zip(&other.bits)
            .filter(|(a, b)| a != b)
            .count()
    }
}

/// `max(lower, min(r, upper))`.
pub fn minmax(lower: f64, r: f64, upper: f64) -> f64 {
    debug_assert!(lower <= upper);
    r.clamp(lower, upper)
}

/// Result of applying one pairwise update to a frequency vector.
#[derive(Debug, Clone)]
pub struct UpdateOutcome {
    pub next: FrequencyVector,
    /// Indices capped back up to the lower boundary.
    pub clamped_low: Vec<usize>,
    /// Indices capped back down to the upper boundary.
    pub clamped_high: Vec<usize>,
}

/// The probabilistic model of the cGA, on the exact grid.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "FrequencyVectorRepr", into = "FrequencyVectorRepr")]
pub struct FrequencyVector {
    /// Numerators over `2 * n * mu`.
    nums: Vec<i64>,
    n: usize,
    mu: u64,
    mode: BoundaryMode,
}

impl FrequencyVector {
    /// The all-halves starting vector.
    pub fn uniform(n: usize, mu: u64, mode: BoundaryMode) -> Result<Self> {
        Self::validate_grid(n, mu, mode)?;
        let half = (n as i64) * (mu as i64);
        Ok(FrequencyVector {
            nums: vec![half; n],
            n,
            mu,
            mode,
        })
    }

    /// Builds a vector from grid indices: `i` in `[0..n_mu]` for bounded
    /// vectors (`f = 1/n + i/mu`), signed `j` for free ones (`f = 1/2 + j/mu`).
    pub fn from_grid_indices(
        n: usize,
        mu: u64,
        mode: BoundaryMode,
        indices: &[i64],
    ) -> Result<Self> {
        Self::validate_grid(n, mu, mode)?;
        if indices.len() != n {
            return Err(LabError::InvalidParameter(format!(
                "expected {n} indices, got {}",
                indices.len()
            )));
        }
        let step = 2 * n as i64;
        let nums = indices
            .iter()
            .map(|&idx| match mode {
                BoundaryMode::Bounded => 2 * mu as i64 + idx * step,
                BoundaryMode::Free => (n as i64) * (mu as i64) + idx * step,
            })
            .collect::<Vec<i64>>();
        let fv = FrequencyVector { nums, n, mu, mode };
        for (i, &num) in fv.nums.iter().enumerate() {
            if num < fv.lower_num() || num > fv.upper_num() {
                return Err(LabError::InvalidParameter(format!(
                    "index {} places frequency {i} outside the valid range",
                    indices[i]
                )));
            }
        }
        Ok(fv)
    }

    fn validate_grid(n: usize, mu: u64, mode: BoundaryMode) -> Result<()> {
        match mode {
            BoundaryMode::Bounded => {
                GridSpec::new(n, mu)?;
            }
            BoundaryMode::Free => {
                if n < 4 || mu < 1 {
                    return Err(LabError::InvalidParameter(format!(
                        "free-mode vectors require n >= 4 and mu >= 1, got n={n}, mu={mu}"
                    )));
                }
                // With odd mu the walk from 1/2 could step below 0; an even
                // mu puts 0 and 1 on the grid, where frequencies freeze.
                if mu % 2 != 0 {
                    return Err(LabError::InvalidGrid(format!(
                        "free mode requires even mu so the walk stays in [0,1], got mu={mu}"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn mu(&self) -> u64 {
        self.mu
    }

    pub fn mode(&self) -> BoundaryMode {
        self.mode
    }

    /// Common denominator `2 * n * mu`.
    pub fn denom(&self) -> i64 {
        2 * self.n as i64 * self.mu as i64
    }

    /// Numerator of the lowest admissible frequency.
    pub fn lower_num(&self) -> i64 {
        match self.mode {
            BoundaryMode::Bounded => 2 * self.mu as i64,
            BoundaryMode::Free => 0,
        }
    }

    /// Numerator of the highest admissible frequency.
    pub fn upper_num(&self) -> i64 {
        match self.mode {
            BoundaryMode::Bounded => self.denom() - 2 * self.mu as i64,
            BoundaryMode::Free => self.denom(),
        }
    }

    pub fn numerators(&self) -> &[i64] {
        &self.nums
    }

    /// Mutable numerator access for the engine's in-place update loop.
    /// Callers must preserve the grid invariants.
    pub(crate) fn numerators_mut(&mut self) -> &mut [i64] {
        &mut self.nums
    }

    /// Frequency value as a float (derived on demand; storage is exact).
    pub fn value(&self, i: usize) -> f64 {
        self.nums[i] as f64 / self.denom() as f64
    }

    pub fn values(&self) -> Vec<f64> {
        let d = self.denom() as f64;
        self.nums.iter().map(|&x| x as f64 / d).collect()
    }

    /// Grid index of coordinate `i` (see [`FrequencyVector::from_grid_indices`]).
    pub fn grid_index(&self, i: usize) -> i64 {
        let step = 2 * self.n as i64;
        match self.mode {
            BoundaryMode::Bounded => (self.nums[i] - 2 * self.mu as i64) / step,
            BoundaryMode::Free => (self.nums[i] - (self.n as i64) * (self.mu as i64)) / step,
        }
    }

    pub fn grid_indices(&self) -> Vec<i64> {
        (0..self.n).map(|i| self.grid_index(i)).collect()
    }

    /// Exact frequency sum.
    pub fn norm1(&self) -> Ratio<i64> {
        Ratio::new(self.nums.iter().sum::<i64>(), self.denom())
    }

    /// Exact numerator sum (over `denom()`), for incremental bookkeeping.
    pub fn num_sum(&self) -> i64 {
        self.nums.iter().sum()
    }

    pub fn count_at_lower(&self) -> usize {
        let lo = self.lower_num();
        self.nums.iter().filter(|&&x| x == lo).count()
    }

    pub fn count_at_upper(&self) -> usize {
        let hi = self.upper_num();
        self.nums.iter().filter(|&&x| x == hi).count()
    }

    /// Indices currently at the lower boundary.
    pub fn lower_set(&self) -> Vec<usize> {
        let lo = self.lower_num();
        (0..self.n).filter(|&i| self.nums[i] == lo).collect()
    }

    /// Draws one search point; bit `i` is 1 with probability exactly
    /// `nums[i] / denom`.
    pub fn sample(&self, rng: &mut impl Rng) -> BitString {
        let mut bits = vec![0u8; self.n];
        self.sample_into(&mut bits, rng);
        BitString { bits }
    }

    /// Allocation-free sampling for hot loops.
    ///
    /// Draws an exactly uniform value below `denom` per bit (widening
    /// multiply with rejection, setup hoisted out of the loop) and
    /// compares against the numerator, so each bit is 1 with probability
    /// exactly `nums[i] / denom`.
    pub fn sample_into(&self, out: &mut [u8], rng: &mut impl Rng) {
        debug_assert_eq!(out.len(), self.n);
        let denom = self.denom() as u64;
        let reject_zone = denom.wrapping_neg() % denom; // 2^64 mod denom
        for (bit, &num) in out.iter_mut().zip(&self.nums) {
            let r = loop {
                let m = (rng.next_u64() as u128) * (denom as u128);
                if (m as u64) >= reject_zone {
                    break (m >> 64) as u64;
                }
            };
            *bit = (r < num as u64) as u8;
        }
    }

    /// Applies `f + (1/mu)(y1 - y2)` with boundary capping in bounded mode.
    ///
    /// Reports which indices were capped on which side. In free mode the
    /// clamp sets are always empty.
    pub fn update(&self, y1: &BitString, y2: &BitString) -> UpdateOutcome {
        assert_eq!(y1.n(), self.n);
        assert_eq!(y2.n(), self.n);
        let mut next = self.clone();
        let mut clamped_low = Vec::new();
        let mut clamped_high = Vec::new();
        let step = 2 * self.n as i64;
        let lo = self.lower_num();
        let hi = self.upper_num();
        for i in 0..self.n {
            let delta = y1.bits[i] as i64 - y2.bits[i] as i64;
            if delta == 0 {
                continue;
            }
            let prelim = next.nums[i] + delta * step;
            if prelim < lo {
                debug_assert!(matches!(self.mode, BoundaryMode::Bounded));
                clamped_low.push(i);
                next.nums[i] = lo;
            } else if prelim > hi {
                debug_assert!(matches!(self.mode, BoundaryMode::Bounded));
                clamped_high.push(i);
                next.nums[i] = hi;
            } else {
                next.nums[i] = prelim;
            }
        }
        UpdateOutcome {
            next,
            clamped_low,
            clamped_high,
        }
    }

    /// Overwrites one coordinate by grid index. Panics if the index leaves
    /// the admissible range.
    pub fn set_grid_index(&mut self, i: usize, idx: i64) {
        let step = 2 * self.n as i64;
        let num = match self.mode {
            BoundaryMode::Bounded => 2 * self.mu as i64 + idx * step,
            BoundaryMode::Free => (self.n as i64) * (self.mu as i64) + idx * step,
        };
        assert!(
            num >= self.lower_num() && num <= self.upper_num(),
            "grid index {idx} is outside the admissible range"
        );
        self.nums[i] = num;
    }
}

/// Wire form: header plus the array of grid indices.
#[derive(Serialize, Deserialize)]
struct FrequencyVectorRepr {
    n: usize,
    mu: u64,
    boundary_mode: BoundaryMode,
    indices: Vec<i64>,
}

impl From<FrequencyVector> for FrequencyVectorRepr {
    fn from(fv: FrequencyVector) -> Self {
        FrequencyVectorRepr {
            n: fv.n,
            mu: fv.mu,
            boundary_mode: fv.mode,
            indices: fv.grid_indices(),
        }
    }
}

impl TryFrom<FrequencyVectorRepr> for FrequencyVector {
    type Error = LabError;

    fn try_from(repr: FrequencyVectorRepr) -> Result<Self> {
        FrequencyVector::from_grid_indices(repr.n, repr.mu, repr.boundary_mode, &repr.indices)
    }
}

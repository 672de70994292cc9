//! Potential functions over the frequency vector and one-step drift
//! estimation from constructed states.
//!
//! The distance `D = n - |f|_1` is exact rational arithmetic over the grid;
//! floating point enters only inside `exp`.

use num_rational::Ratio;
use num_traits::{Signed, ToPrimitive};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::engine::Simulation;
use crate::error::{LabError, Result};
use crate::frequency::{BoundaryMode, FrequencyVector, GridSpec};
use crate::objective::Objective;
use crate::oracle::{exact_step_distribution, KahanSum};
use crate::rng::{stream_rng, streams};

/// Exact frequency distance `n - sum_i f_i`.
pub fn distance_d(f: &FrequencyVector) -> Ratio<i64> {
    Ratio::from_integer(f.n() as i64) - f.norm1()
}

/// Rescaling parameters of the exponential potential.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct PotentialParams {
    k: usize,
    c: f64,
}

impl PotentialParams {
    pub fn new(k: usize, c: f64) -> Result<Self> {
        if k < 1 {
            return Err(LabError::InvalidParameter("k must be positive".into()));
        }
        if !(c > 0.0 && c <= 1.0) {
            return Err(LabError::InvalidParameter(format!(
                "rescaling constant must satisfy 0 < c <= 1, got {c}"
            )));
        }
        Ok(PotentialParams { k, c })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    /// Ceiling value `exp(c k / 4)`, attained exactly when `D <= k/4`.
    pub fn y_max(&self) -> f64 {
        (self.c * self.k as f64 / 4.0).exp()
    }

    /// `exp(c * min(k/2 - D, k/4))`.
    pub fn y_of_distance(&self, d: Ratio<i64>) -> f64 {
        let half_k = Ratio::new(self.k as i64, 2);
        let quarter_k = Ratio::new(self.k as i64, 4);
        let exponent = (half_k - d).min(quarter_k);
        (self.c * exponent.to_f64().unwrap()).exp()
    }
}

/// Potential of a frequency vector.
pub fn potential_y(f: &FrequencyVector, p: &PotentialParams) -> f64 {
    p.y_of_distance(distance_d(f))
}

/// Shapes of constructed probe states at a target distance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StateProfile {
    /// All frequencies share (almost) one grid value.
    Balanced,
    /// As many frequencies as possible pinned at the lower boundary.
    BoundaryMix,
}

impl StateProfile {
    pub fn as_str(&self) -> &'static str {
        match self {
            StateProfile::Balanced => "balanced",
            StateProfile::BoundaryMix => "boundary_mix",
        }
    }
}

/// Builds a grid-valid bounded vector with `|D(f) - d_target| <= 1/mu`.
///
/// `Balanced` spreads the index budget evenly; `BoundaryMix` pins the
/// maximal number of frequencies at `1/n` (the capping stress case) and
/// parks the remainder at the upper boundary with one adjusted coordinate.
pub fn construct_state(
    spec: &GridSpec,
    d_target: Ratio<i64>,
    profile: StateProfile,
) -> Result<FrequencyVector> {
    let n = spec.n() as i64;
    let n_mu = spec.n_mu() as i64;
    // D = (n - 1) - I/mu, where I is the total grid index.
    let index_target =
        (Ratio::from_integer(n - 1) - d_target) * Ratio::from_integer(spec.mu() as i64);
    let i_star = index_target.round().to_integer();
    if i_star < 0 || i_star > n * n_mu {
        return Err(LabError::Infeasible(format!(
            "distance target {d_target} is outside [1, n-1] for n={n}"
        )));
    }

    let mut f = FrequencyVector::uniform(spec.n(), spec.mu(), BoundaryMode::Bounded)?;
    match profile {
        StateProfile::Balanced => {
            let base = i_star / n;
            let rem = (i_star - base * n) as usize;
            for i in 0..spec.n() {
                let idx = if i < rem { base + 1 } else { base };
                f.set_grid_index(i, idx);
            }
        }
        StateProfile::BoundaryMix => {
            let full = i_star / n_mu;
            let rem = i_star - full * n_mu;
            let lower = spec.n() - full as usize - (rem > 0) as usize;
            for i in 0..lower {
                f.set_grid_index(i, 0);
            }
            if rem > 0 {
                f.set_grid_index(lower, rem);
            }
            for i in (lower + (rem > 0) as usize)..spec.n() {
                f.set_grid_index(i, n_mu);
            }
        }
    }

    let achieved = distance_d(&f);
    debug_assert!(
        (achieved - d_target).abs() <= Ratio::new(1, spec.mu() as i64),
        "constructed distance {achieved} misses target {d_target}"
    );
    Ok(f)
}

/// Mean one-step potential change from a fixed state.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DriftEstimate {
    pub n: usize,
    pub mu: u64,
    pub k: usize,
    pub c: f64,
    pub d_target: f64,
    pub profile: Option<StateProfile>,
    pub replicates: u64,
    pub exact: bool,
    pub mean: f64,
    pub std_error: f64,
}

/// Monte Carlo estimate of `E[Y_{t+1} - Y_t]` over independent single steps
/// from `f`. The estimate is unconditioned; callers choose states with
/// `D > k/4` when they need `Y_t < Y_max`.
pub fn estimate_drift(
    f: &FrequencyVector,
    obj: &Objective,
    params: &PotentialParams,
    replicates: u64,
    master_seed: u64,
) -> Result<DriftEstimate> {
    if replicates < 1 {
        return Err(LabError::InvalidParameter(
            "drift estimation needs at least one replicate".into(),
        ));
    }
    let base_y = potential_y(f, params);
    let deltas: Vec<f64> = (0..replicates)
        .into_par_iter()
        .map_init(
            || Simulation::new(f.clone(), *obj).expect("validated above"),
            |sim, r| {
                sim.reset(f);
                let mut rng = stream_rng(master_seed, r, streams::DRIFT);
                sim.advance(&mut rng);
                params.y_of_distance(sim.distance()) - base_y
            },
        )
        .collect();

    let mut sum = KahanSum::default();
    for &d in &deltas {
        sum.add(d);
    }
    let mean = sum.value() / replicates as f64;
    let mut var = KahanSum::default();
    for &d in &deltas {
        var.add((d - mean) * (d - mean));
    }
    let std_error = if replicates > 1 {
        (var.value() / (replicates - 1) as f64 / replicates as f64).sqrt()
    } else {
        f64::INFINITY
    };

    Ok(DriftEstimate {
        n: f.n(),
        mu: f.mu(),
        k: params.k(),
        c: params.c(),
        d_target: distance_d(f).to_f64().unwrap(),
        profile: None,
        replicates,
        exact: false,
        mean,
        std_error,
    })
}

/// Exact drift by exhaustive pair enumeration (`n <= 12`).
pub fn exact_drift(
    f: &FrequencyVector,
    obj: &Objective,
    params: &PotentialParams,
) -> Result<DriftEstimate> {
    let dist = exact_step_distribution(f, obj)?;
    let base_y = params.y_of_distance(dist.base_distance());
    let mut acc = KahanSum::default();
    for (d, p) in dist.d_next_law() {
        acc.add(params.y_of_distance(d) * p);
    }
    Ok(DriftEstimate {
        n: f.n(),
        mu: f.mu(),
        k: params.k(),
        c: params.c(),
        d_target: distance_d(f).to_f64().unwrap(),
        profile: None,
        replicates: 0,
        exact: true,
        mean: acc.value() - base_y,
        std_error: 0.0,
    })
}

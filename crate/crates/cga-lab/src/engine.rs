//! The cGA iteration: sample two points, rank them, update the model.
//!
//! [`step`] returns a fully annotated record of one iteration for the
//! verifiers; [`Simulation`] is the allocation-free loop behind [`run`],
//! which executes whole runs with optimum detection, iteration caps and
//! optional decimated tracing.

use num_rational::Ratio;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::frequency::{BitString, BoundaryMode, FrequencyVector};
use crate::objective::Objective;
use crate::rng::{stream_rng, streams};

/// Orders a sampled pair by fitness; ties go to the first sample.
pub fn rank_pair<'a>(
    x1: &'a BitString,
    x2: &'a BitString,
    obj: &Objective,
) -> (&'a BitString, &'a BitString) {
    if obj.eval(x1) >= obj.eval(x2) {
        (x1, x2)
    } else {
        (x2, x1)
    }
}

/// Everything that happened in one annotated iteration.
#[derive(Debug, Clone)]
pub struct StepInfo {
    pub x1: BitString,
    pub x2: BitString,
    pub winner_is_x1: bool,
    pub fitness1: i64,
    pub fitness2: i64,
    /// Indices at the lower boundary before the step.
    pub boundary_low: Vec<usize>,
    /// Subset of `boundary_low` where the two samples differ.
    pub flip_set: Vec<usize>,
    pub clamped_low: Vec<usize>,
    pub clamped_high: Vec<usize>,
    /// Exact change of the frequency sum.
    pub delta_norm: Ratio<i64>,
}

/// One annotated iteration from `f`.
pub fn step(
    f: &FrequencyVector,
    obj: &Objective,
    rng: &mut impl Rng,
) -> (FrequencyVector, StepInfo) {
    debug_assert_eq!(obj.n(), f.n());
    let x1 = f.sample(rng);
    let x2 = f.sample(rng);
    let fitness1 = obj.eval(&x1);
    let fitness2 = obj.eval(&x2);
    let winner_is_x1 = fitness1 >= fitness2;
    let (y1, y2) = if winner_is_x1 { (&x1, &x2) } else { (&x2, &x1) };
    let outcome = f.update(y1, y2);

    let boundary_low = f.lower_set();
    let flip_set: Vec<usize> = boundary_low
        .iter()
        .copied()
        .filter(|&i| x1.get(i) != x2.get(i))
        .collect();
    let delta_norm = outcome.next.norm1() - f.norm1();

    // Capping chain: every lower clamp sits in the flip set, and the net
    // norm gain from capping is at most |M|/mu.
    debug_assert!(outcome.clamped_low.iter().all(|i| flip_set.contains(i)));
    debug_assert!(
        delta_norm <= Ratio::new(f.n() as i64, f.mu() as i64),
        "one-step norm change exceeded n/mu"
    );

    let info = StepInfo {
        x1,
        x2,
        winner_is_x1,
        fitness1,
        fitness2,
        boundary_low,
        flip_set,
        clamped_low: outcome.clamped_low,
        clamped_high: outcome.clamped_high,
        delta_norm,
    };
    (outcome.next, info)
}

/// Counters produced by one lean iteration.
#[derive(Debug, Clone, Copy)]
pub struct IterationOutcome {
    pub ones1: usize,
    pub ones2: usize,
    pub best_fitness: i64,
    pub hit_optimum: bool,
    /// Hamming distance between the two samples.
    pub hamming: usize,
    /// Differing positions among those at the lower / upper boundary.
    pub lower_flips: usize,
    pub upper_flips: usize,
    pub clamped_low: usize,
    pub clamped_high: usize,
    /// Change of the frequency-sum numerator (over `2*n*mu`).
    pub delta_num_sum: i64,
    /// Free mode only: some frequency reached exactly 0 in this iteration.
    pub reached_zero: bool,
}

/// Reusable iteration state without per-step allocation.
pub struct Simulation {
    f: FrequencyVector,
    obj: Objective,
    buf1: Vec<u8>,
    buf2: Vec<u8>,
    num_sum: i64,
    t: u64,
}

impl Simulation {
    pub fn new(f: FrequencyVector, obj: Objective) -> Result<Self> {
        if obj.n() != f.n() {
            return Err(LabError::InvalidParameter(format!(
                "objective dimension {} does not match model dimension {}",
                obj.n(),
                f.n()
            )));
        }
        let n = f.n();
        let num_sum = f.num_sum();
        Ok(Simulation {
            f,
            obj,
            buf1: vec![0; n],
            buf2: vec![0; n],
            num_sum,
            t: 0,
        })
    }

    pub fn frequencies(&self) -> &FrequencyVector {
        &self.f
    }

    /// Completed iterations.
    pub fn t(&self) -> u64 {
        self.t
    }

    /// Exact numerator of the frequency sum over `2*n*mu`.
    pub fn num_sum(&self) -> i64 {
        self.num_sum
    }

    /// Exact distance `n - |f|_1`.
    pub fn distance(&self) -> Ratio<i64> {
        let denom = self.f.denom();
        Ratio::new(self.f.n() as i64 * denom - self.num_sum, denom)
    }

    /// Rewinds to another state of the same shape (dimension, mu, mode).
    pub fn reset(&mut self, f: &FrequencyVector) {
        assert_eq!(f.n(), self.f.n());
        assert_eq!(f.mu(), self.f.mu());
        assert_eq!(f.mode(), self.f.mode());
        self.f.numerators_mut().copy_from_slice(f.numerators());
        self.num_sum = f.num_sum();
        self.t = 0;
    }

    /// Last sampled pair (valid after `advance`).
    pub fn samples(&self) -> (&[u8], &[u8]) {
        (&self.buf1, &self.buf2)
    }

    /// Runs one full iteration of the algorithm (sample, rank, update).
    pub fn advance(&mut self, rng: &mut impl Rng) -> IterationOutcome {
        let n = self.f.n();
        self.f.sample_into(&mut self.buf1, rng);
        self.f.sample_into(&mut self.buf2, rng);
        let ones1: usize = self.buf1.iter().map(|&b| b as usize).sum();
        let ones2: usize = self.buf2.iter().map(|&b| b as usize).sum();
        let fitness1 = self.obj.eval_norm(ones1);
        let fitness2 = self.obj.eval_norm(ones2);
        let winner_is_x1 = fitness1 >= fitness2;
        let hit_optimum = ones1 == n || ones2 == n;

        let step = 2 * n as i64;
        let lo = self.f.lower_num();
        let hi = self.f.upper_num();
        let bounded = matches!(self.f.mode(), BoundaryMode::Bounded);
        let mut out = IterationOutcome {
            ones1,
            ones2,
            best_fitness: fitness1.max(fitness2),
            hit_optimum,
            hamming: 0,
            lower_flips: 0,
            upper_flips: 0,
            clamped_low: 0,
            clamped_high: 0,
            delta_num_sum: 0,
            reached_zero: false,
        };

        let nums = self.f.numerators_mut();
        for (i, (&b1, &b2)) in self.buf1.iter().zip(&self.buf2).enumerate() {
            if b1 == b2 {
                continue;
            }
            out.hamming += 1;
            let pre = nums[i];
            if pre == lo {
                out.lower_flips += 1;
            }
            if pre == hi {
                out.upper_flips += 1;
            }
            let winner_bit = if winner_is_x1 { b1 } else { b2 };
            let prelim = if winner_bit == 1 {
                pre + step
            } else {
                pre - step
            };
            let new = if bounded {
                if prelim < lo {
                    out.clamped_low += 1;
                    lo
                } else if prelim > hi {
                    out.clamped_high += 1;
                    hi
                } else {
                    prelim
                }
            } else {
                if prelim == 0 {
                    out.reached_zero = true;
                }
                prelim
            };
            nums[i] = new;
            out.delta_num_sum += new - pre;
        }
        self.num_sum += out.delta_num_sum;
        self.t += 1;

        // Boundary-capping chain, checked on every simulated step.
        debug_assert!(out.clamped_low <= out.lower_flips);
        debug_assert!(out.clamped_high <= out.upper_flips);
        debug_assert!(out.delta_num_sum.abs() <= out.hamming as i64 * step);
        out
    }
}

/// Parameters of one seeded run.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct RunParams {
    pub n: usize,
    pub mu: u64,
    pub boundary_mode: BoundaryMode,
    pub cap: u64,
    pub master_seed: u64,
    pub replicate: u64,
    /// Record every `stride`-th iteration (plus the final one) when set.
    pub trace_stride: Option<u64>,
}

/// One decimated trace sample.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TraceRow {
    pub t: u64,
    pub d: f64,
    pub lower_count: usize,
    pub upper_count: usize,
    pub best_fitness: i64,
}

/// Persisted outcome of a run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunRecord {
    pub params: RunParams,
    pub objective: Objective,
    pub hit_optimum: bool,
    /// Iteration in which the optimum was first sampled, or the cap.
    pub iterations: u64,
    pub evaluations: u64,
    pub premature_convergence: bool,
    pub trace: Option<Vec<TraceRow>>,
    /// Model state when the run stopped (serialized as grid indices).
    pub final_state: FrequencyVector,
}

/// Executes one run until the optimum is sampled or the cap is reached.
///
/// In free mode, a frequency reaching exactly 0 makes the all-ones optimum
/// unreachable forever, so the run halts with `premature_convergence` set.
pub fn run(params: &RunParams, obj: &Objective) -> Result<RunRecord> {
    if params.cap < 1 {
        return Err(LabError::InvalidParameter("cap must be at least 1".into()));
    }
    if obj.n() != params.n {
        return Err(LabError::InvalidParameter(format!(
            "objective dimension {} does not match run dimension {}",
            obj.n(),
            params.n
        )));
    }
    let f = FrequencyVector::uniform(params.n, params.mu, params.boundary_mode)?;
    let mut rng = stream_rng(params.master_seed, params.replicate, streams::RUN);
    let mut sim = Simulation::new(f, *obj)?;
    let mut trace: Option<Vec<TraceRow>> = params.trace_stride.map(|_| Vec::new());

    let mut hit_optimum = false;
    let mut premature = false;
    let mut iterations = params.cap;
    let denom = sim.frequencies().denom() as f64;
    let n_total = params.n as f64 * denom;

    for t in 1..=params.cap {
        let out = sim.advance(&mut rng);
        if let (Some(rows), Some(stride)) = (trace.as_mut(), params.trace_stride) {
            if t % stride.max(1) == 0 {
                rows.push(TraceRow {
                    t,
                    d: (n_total - sim.num_sum() as f64) / denom,
                    lower_count: sim.frequencies().count_at_lower(),
                    upper_count: sim.frequencies().count_at_upper(),
                    best_fitness: out.best_fitness,
                });
            }
        }
        if out.hit_optimum {
            hit_optimum = true;
            iterations = t;
            break;
        }
        if matches!(params.boundary_mode, BoundaryMode::Free) && out.reached_zero {
            premature = true;
            iterations = t;
            break;
        }
    }

    if let Some(rows) = trace.as_mut() {
        // Always include the final iteration; its samples are still in the
        // simulation buffers.
        if rows.last().map(|r| r.t) != Some(iterations) {
            let (b1, b2) = sim.samples();
            let ones1: usize = b1.iter().map(|&b| b as usize).sum();
            let ones2: usize = b2.iter().map(|&b| b as usize).sum();
            rows.push(TraceRow {
                t: iterations,
                d: (n_total - sim.num_sum() as f64) / denom,
                lower_count: sim.frequencies().count_at_lower(),
                upper_count: sim.frequencies().count_at_upper(),
                best_fitness: obj.eval_norm(ones1).max(obj.eval_norm(ones2)),
            });
        }
    }

    Ok(RunRecord {
        params: *params,
        objective: *obj,
        hit_optimum,
        iterations,
        evaluations: 2 * iterations,
        premature_convergence: premature,
        trace,
        final_state: sim.frequencies().clone(),
    })
}

/// Independent seeded replicates; results identical regardless of thread
/// scheduling because each replicate owns stream `(master_seed, r, RUN)`.
pub fn run_many(params: &RunParams, obj: &Objective, replicates: u64) -> Result<Vec<RunRecord>> {
    if replicates < 1 {
        return Err(LabError::InvalidParameter(
            "replicates must be at least 1".into(),
        ));
    }
    (0..replicates)
        .into_par_iter()
        .map(|r| {
            let p = RunParams {
                replicate: r,
                ..*params
            };
            run(&p, obj)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream_rng;
    use num_traits::Signed;

    fn params(n: usize, mu: u64, cap: u64, seed: u64) -> RunParams {
        RunParams {
            n,
            mu,
            boundary_mode: BoundaryMode::Bounded,
            cap,
            master_seed: seed,
            replicate: 0,
            trace_stride: None,
        }
    }

    #[test]
    fn rank_prefers_higher_fitness_and_ties_go_first() {
        let obj = Objective::one_max(5);
        let a = BitString::parse("11100").unwrap();
        let b = BitString::parse("11000").unwrap();
        let (y1, y2) = rank_pair(&a, &b, &obj);
        assert_eq!(y1, &a);
        assert_eq!(y2, &b);
        let (y1, y2) = rank_pair(&b, &a, &obj);
        assert_eq!(y1, &a);
        assert_eq!(y2, &b);
        // Equal fitness: first sample wins.
        let c = BitString::parse("00111").unwrap();
        let (y1, y2) = rank_pair(&a, &c, &obj);
        assert_eq!(y1, &a);
        assert_eq!(y2, &c);
    }

    #[test]
    fn ranked_update_matches_hand_example() {
        // f = (1/2,...), x1 = 1111, x2 = 0111 on onemax: x1 wins and only
        // the first frequency moves, up to 3/4.
        let f = FrequencyVector::uniform(4, 4, BoundaryMode::Bounded).unwrap();
        let obj = Objective::one_max(4);
        let x1 = BitString::parse("1111").unwrap();
        let x2 = BitString::parse("0111").unwrap();
        let (y1, y2) = rank_pair(&x1, &x2, &obj);
        let out = f.update(y1, y2);
        assert_eq!(out.next.values(), vec![0.75, 0.5, 0.5, 0.5]);
    }

    #[test]
    fn step_info_invariants_hold() {
        let obj = Objective::jump(10, 3).unwrap();
        let f = FrequencyVector::uniform(10, 25, BoundaryMode::Bounded).unwrap();
        let mut rng = stream_rng(3, 0, crate::rng::streams::RUN);
        let mut g = f.clone();
        for _ in 0..500 {
            let (next, info) = step(&g, &obj, &mut rng);
            assert!(info.flip_set.iter().all(|i| info.boundary_low.contains(i)));
            assert!(info.clamped_low.iter().all(|i| info.flip_set.contains(i)));
            assert_eq!(info.winner_is_x1, info.fitness1 >= info.fitness2);
            let bound = Ratio::new(g.n() as i64, g.mu() as i64);
            assert!(info.delta_norm.abs() <= bound);
            g = next;
        }
    }

    #[test]
    fn identical_samples_do_not_move_the_model() {
        // Statistically: find an iteration with x1 == x2 and check the sum.
        let obj = Objective::one_max(4);
        let f = FrequencyVector::uniform(4, 4, BoundaryMode::Bounded).unwrap();
        let mut rng = stream_rng(5, 0, crate::rng::streams::RUN);
        let mut seen_identical = false;
        let mut g = f;
        for _ in 0..200 {
            let (next, info) = step(&g, &obj, &mut rng);
            if info.x1 == info.x2 {
                seen_identical = true;
                assert_eq!(next, g);
            }
            g = next;
        }
        assert!(seen_identical);
    }

    #[test]
    fn onemax_runs_finish_quickly() {
        let obj = Objective::one_max(4);
        for seed in 0..100 {
            let rec = run(&params(4, 4, 1_000_000, seed), &obj).unwrap();
            assert!(rec.hit_optimum, "seed {seed} did not finish");
            assert_eq!(rec.evaluations, 2 * rec.iterations);
            assert!(rec.iterations <= rec.params.cap);
        }
    }

    #[test]
    fn capped_runs_report_no_hit() {
        // cap = 1 on n = 20: the hit probability is about 2 * 2^-20.
        let obj = Objective::one_max(20);
        let mut hits = 0u64;
        for seed in 0..100_000u64 {
            let rec = run(&params(20, 20, 1, seed), &obj).unwrap();
            hits += rec.hit_optimum as u64;
        }
        // Mean ~0.19 hits; 4+ occurrences would be a 5-sigma-plus surprise.
        assert!(hits <= 4, "unexpectedly many cap-1 hits: {hits}");
    }

    #[test]
    fn deterministic_replicates() {
        let obj = Objective::jump(10, 2).unwrap();
        let p = params(10, 25, 2_000, 99);
        let a = run_many(&p, &obj, 8).unwrap();
        let b = run_many(&p, &obj, 8).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.iterations, y.iterations);
            assert_eq!(x.hit_optimum, y.hit_optimum);
        }
        // Distinct replicates use distinct streams.
        assert!(a.iter().any(|r| r.iterations != a[0].iterations));
    }

    #[test]
    fn free_mode_flags_premature_convergence() {
        // jump with k = n turns everything but the endpoints into the gap,
        // pushing frequencies down; without boundaries they hit 0.
        let obj = Objective::jump(4, 4).unwrap();
        let mut premature = 0;
        for seed in 0..20 {
            let p = RunParams {
                boundary_mode: BoundaryMode::Free,
                ..params(4, 2, 100_000, seed)
            };
            let rec = run(&p, &obj).unwrap();
            premature += rec.premature_convergence as u32;
            if rec.premature_convergence {
                assert!(!rec.hit_optimum);
                assert!(rec.iterations < p.cap);
            }
        }
        assert!(premature > 0, "expected at least one premature run");
    }

    #[test]
    fn trace_is_decimated_and_covers_the_final_iteration() {
        let obj = Objective::one_max(10);
        let p = RunParams {
            trace_stride: Some(7),
            ..params(10, 25, 5_000, 1)
        };
        let rec = run(&p, &obj).unwrap();
        let trace = rec.trace.unwrap();
        assert!(!trace.is_empty());
        assert_eq!(trace.last().unwrap().t, rec.iterations);
        for w in trace.windows(2) {
            assert!(w[0].t < w[1].t);
        }
        for row in &trace[..trace.len() - 1] {
            assert_eq!(row.t % 7, 0);
        }
    }
}

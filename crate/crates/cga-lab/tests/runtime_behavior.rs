//! Behavioural checks of whole runs: optimum detection, censoring in the
//! hard regime, and sampling goodness-of-fit.

use std::collections::HashMap;

use statrs::distribution::{ChiSquared, ContinuousCDF};

use cga_lab::engine::{run, run_many, RunParams, Simulation};
use cga_lab::frequency::{BoundaryMode, FrequencyVector};
use cga_lab::objective::Objective;
use cga_lab::rng::{stream_rng, streams};

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

/// Replays a run's stream step by step: the reported runtime must be the
/// first iteration in which either sample is the optimum, and no earlier.
#[test]
fn reported_runtime_is_the_first_optimum_iteration() {
    let obj = Objective::jump(10, 2).unwrap();
    for seed in 0..20u64 {
        let p = params(10, 25, 50_000, seed);
        let record = run(&p, &obj).unwrap();

        let f = FrequencyVector::uniform(10, 25, BoundaryMode::Bounded).unwrap();
        let mut sim = Simulation::new(f, obj).unwrap();
        let mut rng = stream_rng(seed, 0, streams::RUN);
        let mut first_hit = None;
        for t in 1..=p.cap {
            let out = sim.advance(&mut rng);
            if out.hit_optimum {
                first_hit = Some(t);
                break;
            }
        }
        match first_hit {
            Some(t) => {
                assert!(record.hit_optimum);
                assert_eq!(record.iterations, t, "seed {seed}");
            }
            None => {
                assert!(!record.hit_optimum);
                assert_eq!(record.iterations, p.cap);
            }
        }
    }
}

/// In the hard regime (wide gap, no helpful population size) nothing
/// finishes within a short cap.
#[test]
fn wide_gap_runs_are_censored_at_small_caps() {
    let obj = Objective::jump(60, 10).unwrap();
    let records = run_many(&params(60, 60, 10_000, 5), &obj, 100).unwrap();
    assert!(records.iter().all(|r| !r.hit_optimum));
    assert!(records.iter().all(|r| r.iterations == 10_000));
}

/// 10^6 draws from the uniform model over 4 bits: all 16 outcomes are
/// equally likely (chi-square goodness of fit, p-threshold 1e-6).
#[test]
fn uniform_sampling_is_uniform_over_outcomes() {
    let f = FrequencyVector::uniform(4, 4, BoundaryMode::Bounded).unwrap();
    let mut rng = stream_rng(29, 0, streams::RUN);
    let draws = 1_000_000u64;
    let mut counts: HashMap<u8, u64> = HashMap::new();
    let mut buf = [0u8; 4];
    for _ in 0..draws {
        f.sample_into(&mut buf, &mut rng);
        let key = buf.iter().enumerate().fold(0u8, |m, (i, &b)| m | (b << i));
        *counts.entry(key).or_default() += 1;
    }
    let expected = draws as f64 / 16.0;
    let stat: f64 = (0..16u8)
        .map(|key| {
            let o = counts.get(&key).copied().unwrap_or(0) as f64;
            (o - expected) * (o - expected) / expected
        })
        .sum();
    let p_value = 1.0 - ChiSquared::new(15.0).unwrap().cdf(stat);
    assert!(p_value >= 1e-6, "chi2 = {stat:.2}, p = {p_value:.2e}");

    // Marginal of bit 0 within 3 standard errors of 1/2.
    let ones: u64 = counts
        .iter()
        .filter(|(k, _)| *k & 1 == 1)
        .map(|(_, c)| c)
        .sum();
    let se = (0.25f64 / draws as f64).sqrt();
    assert!((ones as f64 / draws as f64 - 0.5).abs() <= 3.0 * se);
}

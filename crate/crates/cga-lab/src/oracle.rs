//! Exact, non-sampling computations on small or structured instances:
//! Poisson-binomial laws, binomial tails, exhaustive one-step distributions,
//! boundary-flip laws, (1+1) EA offspring laws and the frequency-update
//! counterexample quantities.
//!
//! Probabilities are doubles; all large reductions use compensated
//! summation, and tolerances throughout the crate assume `1e-12` accuracy
//! at the supported instance sizes.

use std::collections::HashMap;

use num_rational::Ratio;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::frequency::FrequencyVector;
use crate::objective::Objective;

/// Largest dimension for the `4^n` pairwise enumerations.
pub const ENUMERATION_LIMIT: usize = 12;

/// Kahan-compensated accumulator.
#[derive(Debug, Clone, Copy, Default)]
pub struct KahanSum {
    sum: f64,
    carry: f64,
}

impl KahanSum {
    pub fn add(&mut self, x: f64) {
        let y = x - self.carry;
        let t = self.sum + y;
        self.carry = (t - self.sum) - y;
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum
    }
}

/// Exact probability vector over a contiguous integer support.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscreteDistribution {
    support_offset: i64,
    probabilities: Vec<f64>,
}

impl DiscreteDistribution {
    /// Validates non-negativity (after clamping subtractive noise below
    /// `1e-15`) and total mass 1 within `1e-12`.
    pub fn new(support_offset: i64, mut probabilities: Vec<f64>) -> Result<Self> {
        if probabilities.is_empty() {
            return Err(LabError::InvalidParameter(
                "distribution needs a nonempty support".into(),
            ));
        }
        for p in probabilities.iter_mut() {
            if *p < 0.0 {
                if *p > -1e-15 {
                    *p = 0.0;
                } else {
                    return Err(LabError::InvalidParameter(format!(
                        "negative probability {p}"
                    )));
                }
            }
        }
        let mut total = KahanSum::default();
        for &p in &probabilities {
            total.add(p);
        }
        if (total.value() - 1.0).abs() > 1e-12 {
            return Err(LabError::InvalidParameter(format!(
                "probabilities sum to {}, not 1",
                total.value()
            )));
        }
        Ok(DiscreteDistribution {
            support_offset,
            probabilities,
        })
    }

    pub fn point_mass(value: i64) -> Self {
        DiscreteDistribution {
            support_offset: value,
            probabilities: vec![1.0],
        }
    }

    pub fn support_min(&self) -> i64 {
        self.support_offset
    }

    pub fn support_max(&self) -> i64 {
        self.support_offset + self.probabilities.len() as i64 - 1
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    pub fn pmf(&self, value: i64) -> f64 {
        let idx = value - self.support_offset;
        if idx < 0 || idx >= self.probabilities.len() as i64 {
            0.0
        } else {
            self.probabilities[idx as usize]
        }
    }

    /// `Pr[X >= value]`.
    pub fn upper_tail(&self, value: i64) -> f64 {
        let mut acc = KahanSum::default();
        for v in value.max(self.support_min())..=self.support_max() {
            acc.add(self.pmf(v));
        }
        if value > self.support_max() {
            0.0
        } else {
            acc.value()
        }
    }

    /// `Pr[X <= value]`.
    pub fn lower_tail(&self, value: i64) -> f64 {
        let mut acc = KahanSum::default();
        for v in self.support_min()..=value.min(self.support_max()) {
            acc.add(self.pmf(v));
        }
        if value < self.support_min() {
            0.0
        } else {
            acc.value()
        }
    }

    pub fn mean(&self) -> f64 {
        let mut acc = KahanSum::default();
        for (i, &p) in self.probabilities.iter().enumerate() {
            acc.add((self.support_offset + i as i64) as f64 * p);
        }
        acc.value()
    }

    /// Half the `l1` distance between the two probability vectors.
    pub fn total_variation(&self, other: &DiscreteDistribution) -> f64 {
        let lo = self.support_min().min(other.support_min());
        let hi = self.support_max().max(other.support_max());
        let mut acc = KahanSum::default();
        for v in lo..=hi {
            acc.add((self.pmf(v) - other.pmf(v)).abs());
        }
        acc.value() / 2.0
    }
}

/// Law of the number of ones under independent per-bit probabilities.
pub fn poisson_binomial(probs: &[f64]) -> Result<DiscreteDistribution> {
    if probs.iter().any(|&p| !(0.0..=1.0).contains(&p)) {
        return Err(LabError::InvalidParameter(
            "frequencies must lie in [0,1]".into(),
        ));
    }
    let mut law = vec![0.0f64; probs.len() + 1];
    law[0] = 1.0;
    for (i, &p) in probs.iter().enumerate() {
        for s in (0..=i + 1).rev() {
            let stay = if s <= i { law[s] * (1.0 - p) } else { 0.0 };
            let up = if s > 0 { law[s - 1] * p } else { 0.0 };
            law[s] = stay + up;
        }
    }
    DiscreteDistribution::new(0, law)
}

/// Binomial coefficient as a double.
pub fn binomial_coefficient(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut res = 1.0f64;
    for i in 1..=k {
        res = res * (n - k + i) as f64 / i as f64;
    }
    res
}

/// Exact `Pr[Bin(n,p) >= k]` by summation.
pub fn binomial_tail(n: usize, p: f64, k: usize) -> f64 {
    let law = poisson_binomial(&vec![p; n]).expect("p validated by caller contract");
    law.upper_tail(k as i64)
}

/// The simple tail bound `C(n,k) * p^k`.
pub fn binomial_tail_bound(n: usize, p: f64, k: usize) -> f64 {
    binomial_coefficient(n, k) * p.powi(k as i32)
}

/// `Pr[|x1|_1 != |x2|_1]` for two independent samples from the same
/// product distribution: `1 - sum_s q(s)^2`.
pub fn pr_norms_differ(probs: &[f64]) -> Result<f64> {
    let q = poisson_binomial(probs)?;
    let mut acc = KahanSum::default();
    for &p in q.probabilities() {
        acc.add(p * p);
    }
    Ok(1.0 - acc.value())
}

/// Probability that one sample is the all-ones optimum, with the
/// `exp(-D)` bound it never exceeds.
#[derive(Debug, Clone, Copy)]
pub struct OptimumSamplingBound {
    pub product: f64,
    pub bound: f64,
}

pub fn optimum_sampling_probability(f: &FrequencyVector) -> OptimumSamplingBound {
    let product = f.values().iter().product();
    let d = Ratio::from_integer(f.n() as i64) - f.norm1();
    OptimumSamplingBound {
        product,
        bound: (-d.to_f64().unwrap()).exp(),
    }
}

/// Law of the number of lower-boundary positions where two samples differ:
/// `Bin(ell, 2 (1/n)(1 - 1/n))`.
pub fn boundary_flip_law(ell: usize, n: usize) -> Result<DiscreteDistribution> {
    if ell > n {
        return Err(LabError::InvalidParameter(format!(
            "ell = {ell} exceeds n = {n}"
        )));
    }
    let p = 2.0 * (1.0 / n as f64) * (1.0 - 1.0 / n as f64);
    poisson_binomial(&vec![p; ell])
}

/// Exhaustive one-step distribution: all `4^n` sample pairs with exact
/// probabilities, pushed through rank/update/clamp and aggregated.
#[derive(Debug, Clone)]
pub struct ExactStepDistribution {
    n: usize,
    denom: i64,
    base_num_sum: i64,
    /// Successor states (numerators) with probabilities, in a canonical order.
    successors: Vec<(Vec<i64>, f64)>,
    flip_count: DiscreteDistribution,
    sample_norm: DiscreteDistribution,
    /// Law of the frequency-sum numerator after the step.
    num_sum_law: Vec<(i64, f64)>,
}

impl ExactStepDistribution {
    pub fn successors(&self) -> &[(Vec<i64>, f64)] {
        &self.successors
    }

    /// Law of `|M|`, the lower-boundary positions where the samples differ.
    pub fn flip_count_law(&self) -> &DiscreteDistribution {
        &self.flip_count
    }

    /// Marginal law of `|x|_1` for a single sample.
    pub fn sample_norm_law(&self) -> &DiscreteDistribution {
        &self.sample_norm
    }

    /// Law of `D_{t+1} = n - |f_{t+1}|_1`, exactly keyed.
    pub fn d_next_law(&self) -> Vec<(Ratio<i64>, f64)> {
        self.num_sum_law
            .iter()
            .map(|&(sum, p)| (Ratio::new(self.n as i64 * self.denom - sum, self.denom), p))
            .collect()
    }

    /// Exact expected frequency sum after the step.
    pub fn expected_norm_next(&self) -> f64 {
        let mut acc = KahanSum::default();
        for &(sum, p) in &self.num_sum_law {
            acc.add(sum as f64 / self.denom as f64 * p);
        }
        acc.value()
    }

    /// Exact `D_t` before the step.
    pub fn base_distance(&self) -> Ratio<i64> {
        Ratio::new(self.n as i64 * self.denom - self.base_num_sum, self.denom)
    }
}

pub fn exact_step_distribution(
    f: &FrequencyVector,
    obj: &Objective,
) -> Result<ExactStepDistribution> {
    let n = f.n();
    if n > ENUMERATION_LIMIT {
        return Err(LabError::TooLarge(format!(
            "pairwise enumeration supports n <= {ENUMERATION_LIMIT}, got {n}"
        )));
    }
    if obj.n() != n {
        return Err(LabError::InvalidParameter(
            "objective dimension mismatch".into(),
        ));
    }
    let masks = 1usize << n;
    let vals = f.values();

    // Exact product probabilities for every sample mask.
    let mut p = vec![0.0f64; masks];
    p[0] = 1.0;
    for (i, &v) in vals.iter().enumerate() {
        let size = 1usize << i;
        for mask in (0..size).rev() {
            let q = p[mask];
            p[mask | (1 << i)] = q * v;
            p[mask] = q * (1.0 - v);
        }
    }

    let popcount: Vec<u32> = (0..masks).map(|m| (m as u32).count_ones()).collect();
    let fitness: Vec<i64> = (0..=n).map(|ones| obj.eval_norm(ones)).collect();

    let lo = f.lower_num();
    let hi = f.upper_num();
    let nums = f.numerators();
    let mut low_mask = 0usize;
    for (i, &num) in nums.iter().enumerate() {
        if num == lo {
            low_mask |= 1 << i;
        }
    }
    let step = 2 * n as i64;

    // Successor key: 2 bits per coordinate (0 stay, 1 up, 2 down).
    let mut successor_acc: HashMap<u64, KahanSum> = HashMap::new();
    let mut flip_acc = vec![KahanSum::default(); n + 1];
    let mut sum_acc = vec![KahanSum::default(); 2 * n + 1];

    for m1 in 0..masks {
        let p1 = p[m1];
        if p1 == 0.0 {
            continue;
        }
        for m2 in 0..masks {
            let prob = p1 * p[m2];
            if prob == 0.0 {
                continue;
            }
            let ones1 = popcount[m1] as usize;
            let ones2 = popcount[m2] as usize;
            let winner_is_x1 = fitness[ones1] >= fitness[ones2];
            let winner = if winner_is_x1 { m1 } else { m2 };
            let diff = m1 ^ m2;

            let m = (diff & low_mask).count_ones() as usize;

            let mut key = 0u64;
            let mut net_steps = 0i64;
            let mut rest = diff;
            while rest != 0 {
                let c = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                let up = (winner >> c) & 1 == 1;
                if up {
                    if nums[c] != hi {
                        key |= 1 << (2 * c);
                        net_steps += 1;
                    }
                } else if nums[c] != lo {
                    key |= 2 << (2 * c);
                    net_steps -= 1;
                }
            }

            successor_acc.entry(key).or_default().add(prob);
            flip_acc[m].add(prob);
            sum_acc[(net_steps + n as i64) as usize].add(prob);
        }
    }

    let base_num_sum = f.num_sum();
    let mut successors: Vec<(u64, f64)> = successor_acc
        .into_iter()
        .map(|(k, acc)| (k, acc.value()))
        .collect();
    successors.sort_by_key(|&(k, _)| k);
    let successors = successors
        .into_iter()
        .map(|(key, prob)| {
            let mut next = nums.to_vec();
            for (c, num) in next.iter_mut().enumerate() {
                match (key >> (2 * c)) & 3 {
                    1 => *num += step,
                    2 => *num -= step,
                    _ => {}
                }
            }
            (next, prob)
        })
        .collect();

    let sample_norm = {
        let mut acc = vec![KahanSum::default(); n + 1];
        for mask in 0..masks {
            acc[popcount[mask] as usize].add(p[mask]);
        }
        DiscreteDistribution::new(0, acc.iter().map(|k| k.value()).collect())?
    };

    let flip_count = DiscreteDistribution::new(0, flip_acc.iter().map(|k| k.value()).collect())?;

    let num_sum_law = sum_acc
        .iter()
        .enumerate()
        .filter(|(_, k)| k.value() > 0.0)
        .map(|(i, k)| (base_num_sum + (i as i64 - n as i64) * step, k.value()))
        .collect();

    Ok(ExactStepDistribution {
        n,
        denom: f.denom(),
        base_num_sum,
        successors,
        flip_count,
        sample_norm,
        num_sum_law,
    })
}

/// Exact law of the Hamming distance to the optimum after one elitist
/// single-parent iteration with per-bit flip probability `1/n`, for a
/// parent with `norm1` ones. Offspring are accepted on ties.
pub fn ea_step_distance_law(norm1: usize, obj: &Objective) -> Result<DiscreteDistribution> {
    let n = obj.n();
    if n > ENUMERATION_LIMIT {
        return Err(LabError::TooLarge(format!(
            "offspring enumeration supports n <= {ENUMERATION_LIMIT}, got {n}"
        )));
    }
    if norm1 > n {
        return Err(LabError::InvalidParameter(format!(
            "norm1 = {norm1} exceeds n = {n}"
        )));
    }
    let ones = norm1;
    let zeros = n - norm1;
    let pm = 1.0 / n as f64;
    let parent_fit = obj.eval_norm(ones);

    // Fitness depends only on the number of ones, so enumerate flip counts
    // among the one-bits (a) and zero-bits (b) instead of 2^n offspring.
    let mut law = vec![KahanSum::default(); n + 1];
    for a in 0..=ones {
        let pa =
            binomial_coefficient(ones, a) * pm.powi(a as i32) * (1.0 - pm).powi((ones - a) as i32);
        for b in 0..=zeros {
            let pb = binomial_coefficient(zeros, b)
                * pm.powi(b as i32)
                * (1.0 - pm).powi((zeros - b) as i32);
            let child_ones = ones - a + b;
            let target = if obj.eval_norm(child_ones) >= parent_fit {
                child_ones
            } else {
                ones
            };
            law[n - target].add(pa * pb);
        }
    }
    DiscreteDistribution::new(0, law.iter().map(|k| k.value()).collect())
}

/// Exact law of `|x1|_1 - |x2|_1` for two independent samples over the
/// given coordinates (the convolution of the count law with its mirror).
pub fn counterexample_delta_law(f_rest: &[f64]) -> Result<DiscreteDistribution> {
    let q = poisson_binomial(f_rest)?;
    let m = f_rest.len() as i64;
    let mut law = vec![KahanSum::default(); 2 * f_rest.len() + 1];
    for s1 in 0..=m {
        let p1 = q.pmf(s1);
        if p1 == 0.0 {
            continue;
        }
        for s2 in 0..=m {
            law[(s1 - s2 + m) as usize].add(p1 * q.pmf(s2));
        }
    }
    DiscreteDistribution::new(-m, law.iter().map(|k| k.value()).collect())
}

/// Start vectors of the frequency-domination counterexample.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CounterexampleStart {
    /// `f = (1/2, 1/n, ..., 1/n)`.
    FStart,
    /// `g = (1/2, ..., 1/2)`.
    GStart,
}

/// Components of `Pr[f'_1 = 1/2 + 1/mu]` after one iteration on OneMax.
#[derive(Debug, Clone, Copy)]
pub struct CounterexampleFreq {
    /// `Pr[x1_1 != x2_1]`; equals 1/2 since the first frequency is 1/2.
    pub pr_first_bits_differ: f64,
    /// `Pr[Delta in {-1, 0}]` for the norm difference over the rest.
    pub pr_delta_minus1_or_0: f64,
    /// The product `Pr[differ] * (1/2 + 1/2 * Pr[Delta in {-1,0}])`.
    pub probability: f64,
}

/// Probability that the first frequency moves up after one iteration of the
/// cGA on OneMax, for either start vector. `mu` names the event
/// `f'_1 = 1/2 + 1/mu` but does not affect the probability.
pub fn counterexample_freq_probability(
    start: CounterexampleStart,
    n: usize,
    mu: u64,
) -> Result<CounterexampleFreq> {
    if n < 4 || n % 2 != 0 {
        return Err(LabError::InvalidParameter(format!(
            "counterexample start vectors need even n >= 4, got {n}"
        )));
    }
    if mu < 1 {
        return Err(LabError::InvalidParameter("mu must be positive".into()));
    }
    let rest = match start {
        CounterexampleStart::FStart => vec![1.0 / n as f64; n - 1],
        CounterexampleStart::GStart => vec![0.5; n - 1],
    };
    let delta = counterexample_delta_law(&rest)?;
    let pr_delta = delta.pmf(-1) + delta.pmf(0);
    let pr_differ = 0.5;
    Ok(CounterexampleFreq {
        pr_first_bits_differ: pr_differ,
        pr_delta_minus1_or_0: pr_delta,
        probability: pr_differ * (0.5 + 0.5 * pr_delta),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frequency::BoundaryMode;

    /// Brute-force count law by full mask enumeration.
    fn brute_poisson_binomial(probs: &[f64]) -> Vec<f64> {
        let n = probs.len();
        let mut law = vec![0.0; n + 1];
        for mask in 0..1usize << n {
            let mut p = 1.0;
            for (i, &v) in probs.iter().enumerate() {
                p *= if (mask >> i) & 1 == 1 { v } else { 1.0 - v };
            }
            law[mask.count_ones() as usize] += p;
        }
        law
    }

    #[test]
    fn poisson_binomial_two_fair_bits() {
        let law = poisson_binomial(&[0.5, 0.5]).unwrap();
        assert_eq!(law.probabilities(), &[0.25, 0.5, 0.25]);
    }

    #[test]
    fn poisson_binomial_degenerate_point_mass() {
        let law = poisson_binomial(&[1.0; 7]).unwrap();
        assert_eq!(law.pmf(7), 1.0);
        assert_eq!(law.upper_tail(7), 1.0);
        assert_eq!(law.lower_tail(6), 0.0);
    }

    #[test]
    fn poisson_binomial_mixed_pair() {
        let law = poisson_binomial(&[0.1, 0.9]).unwrap();
        assert!((law.pmf(0) - 0.09).abs() < 1e-15);
        assert!((law.pmf(1) - 0.82).abs() < 1e-15);
        assert!((law.pmf(2) - 0.09).abs() < 1e-15);
    }

    #[test]
    fn poisson_binomial_matches_brute_force() {
        let probs = [0.1, 0.37, 0.9, 0.5, 0.66, 0.05, 0.75];
        let law = poisson_binomial(&probs).unwrap();
        let brute = brute_poisson_binomial(&probs);
        for (s, &b) in brute.iter().enumerate() {
            assert!((law.pmf(s as i64) - b).abs() < 1e-13);
        }
    }

    #[test]
    fn poisson_binomial_is_permutation_invariant() {
        let a = poisson_binomial(&[0.2, 0.5, 0.9, 0.13]).unwrap();
        let b = poisson_binomial(&[0.9, 0.13, 0.2, 0.5]).unwrap();
        assert!(a.total_variation(&b) < 1e-14);
    }

    /// Test-side reimplementation of the one-step semantics, kept
    /// independent of the library's enumeration: frequencies as grid
    /// indices, naive rank/update/clamp per sample pair.
    fn brute_step_distribution(
        f: &FrequencyVector,
        obj: &Objective,
    ) -> (std::collections::HashMap<Vec<i64>, f64>, f64) {
        let n = f.n();
        let vals = f.values();
        let indices = f.grid_indices();
        let top = match f.mode() {
            crate::frequency::BoundaryMode::Bounded => ((f.n() as u64 - 2) * f.mu()) / f.n() as u64,
            crate::frequency::BoundaryMode::Free => unreachable!(),
        } as i64;
        let mut successors: std::collections::HashMap<Vec<i64>, f64> =
            std::collections::HashMap::new();
        let mut expected_index_sum = 0.0f64;
        for m1 in 0..1usize << n {
            for m2 in 0..1usize << n {
                let mut prob = 1.0;
                for (i, &v) in vals.iter().enumerate() {
                    prob *= if (m1 >> i) & 1 == 1 { v } else { 1.0 - v };
                    prob *= if (m2 >> i) & 1 == 1 { v } else { 1.0 - v };
                }
                let fit1 = obj.eval_norm(m1.count_ones() as usize);
                let fit2 = obj.eval_norm(m2.count_ones() as usize);
                let (w, l) = if fit1 >= fit2 { (m1, m2) } else { (m2, m1) };
                let mut next = indices.clone();
                for (i, idx) in next.iter_mut().enumerate() {
                    let d = ((w >> i) & 1) as i64 - ((l >> i) & 1) as i64;
                    *idx = (*idx + d).clamp(0, top);
                }
                expected_index_sum += prob * next.iter().sum::<i64>() as f64;
                *successors.entry(next).or_insert(0.0) += prob;
            }
        }
        (successors, expected_index_sum)
    }

    #[test]
    fn exact_step_matches_independent_brute_force() {
        for (n, mu, lowers, obj) in [
            (4usize, 4u64, 0usize, Objective::one_max(4)),
            (6, 9, 2, Objective::jump(6, 2).unwrap()),
            (6, 9, 1, Objective::jump(6, 4).unwrap()),
        ] {
            let mut f = FrequencyVector::uniform(n, mu, BoundaryMode::Bounded).unwrap();
            for i in 0..lowers {
                f.set_grid_index(i, 0);
            }
            let dist = exact_step_distribution(&f, &obj).unwrap();
            let (brute, brute_index_sum) = brute_step_distribution(&f, &obj);

            let mut tv = 0.0f64;
            let mut matched = 0usize;
            for (nums, p) in dist.successors() {
                let indices: Vec<i64> = (0..n)
                    .map(|i| (nums[i] - 2 * mu as i64) / (2 * n as i64))
                    .collect();
                let q = brute.get(&indices).copied().unwrap_or(0.0);
                tv += (p - q).abs();
                matched += 1;
            }
            assert_eq!(matched, brute.len(), "successor supports differ");
            assert!(tv / 2.0 < 1e-12, "successor law TV = {:.3e}", tv / 2.0);

            // Expected frequency sum after the step, via the index route:
            // sum_i (1/n + idx_i/mu) = 1 + I/mu.
            let expect_norm = 1.0 + brute_index_sum / mu as f64;
            assert!((dist.expected_norm_next() - expect_norm).abs() < 1e-10);
        }
    }

    #[test]
    fn binomial_tail_frozen_values() {
        // Exact tail of Bin(10, 0.1) at 3: 1 - P(0) - P(1) - P(2).
        let expect =
            1.0 - 0.9f64.powi(10) - 10.0 * 0.1 * 0.9f64.powi(9) - 45.0 * 0.01 * 0.9f64.powi(8);
        assert!((binomial_tail(10, 0.1, 3) - expect).abs() < 1e-14);
        assert!((binomial_tail(10, 0.1, 3) - 0.0701908264).abs() < 1e-9);
        assert!((binomial_tail_bound(10, 0.1, 3) - 0.12).abs() < 1e-15);
        // k = 0 edge: both sides are 1 (tail up to summation rounding).
        assert!((binomial_tail(17, 0.3, 0) - 1.0).abs() < 1e-12);
        assert_eq!(binomial_tail_bound(17, 0.3, 0), 1.0);
    }

    #[test]
    fn norm_difference_probability_examples() {
        // Two fair bits: 1 - (1/16 + 1/4 + 1/16) = 5/8.
        assert!((pr_norms_differ(&[0.5, 0.5]).unwrap() - 0.625).abs() < 1e-15);
        // Single fair bit: 1 - (1/4 + 1/4) = 1/2.
        assert!((pr_norms_differ(&[0.5]).unwrap() - 0.5).abs() < 1e-15);
        // Brute force cross-check for point-like vectors.
        let probs = vec![0.9; 10];
        let brute = {
            let law = brute_poisson_binomial(&probs);
            1.0 - law.iter().map(|p| p * p).sum::<f64>()
        };
        let v = pr_norms_differ(&probs).unwrap();
        assert!((v - brute).abs() < 1e-12);
        assert!((v - 0.687384).abs() < 1e-6);
        // Ten coordinates at 1 - 1/20 (the m = n/2 boundary case for n=20).
        let v = pr_norms_differ(&[0.95; 10]).unwrap();
        assert!((v - 0.536529).abs() < 1e-6);
    }

    #[test]
    fn optimum_sampling_probability_examples() {
        let f = FrequencyVector::uniform(4, 4, BoundaryMode::Bounded).unwrap();
        let got = optimum_sampling_probability(&f);
        assert!((got.product - 0.0625).abs() < 1e-15);
        assert!((got.bound - (-2.0f64).exp()).abs() < 1e-15);
        assert!(got.product <= got.bound);
    }

    #[test]
    fn boundary_flip_law_examples() {
        let law = boundary_flip_law(2, 10).unwrap();
        assert!((law.pmf(0) - 0.6724).abs() < 1e-12);
        assert!((law.pmf(1) - 0.2952).abs() < 1e-12);
        assert!((law.pmf(2) - 0.0324).abs() < 1e-12);
        let empty = boundary_flip_law(0, 10).unwrap();
        assert_eq!(empty.pmf(0), 1.0);
    }

    #[test]
    fn exact_step_identical_sample_mass() {
        // For f = (1/2)^4 the probability that both samples coincide is
        // sum_x Pr[x]^2 = 2^-4; all of it lands on the unchanged state.
        let f = FrequencyVector::uniform(4, 8, BoundaryMode::Bounded).unwrap();
        let obj = Objective::one_max(4);
        let dist = exact_step_distribution(&f, &obj).unwrap();
        let unchanged: f64 = dist
            .successors()
            .iter()
            .filter(|(nums, _)| nums == f.numerators())
            .map(|&(_, p)| p)
            .sum();
        assert!(
            unchanged >= 0.0625 - 1e-12,
            "no-change mass {unchanged} below the identical-sample floor"
        );
    }

    #[test]
    fn exact_step_shows_positive_onemax_signal() {
        let f = FrequencyVector::uniform(4, 8, BoundaryMode::Bounded).unwrap();
        let obj = Objective::one_max(4);
        let dist = exact_step_distribution(&f, &obj).unwrap();
        assert!(dist.expected_norm_next() > 2.0);
    }

    #[test]
    fn exact_step_flip_marginal_matches_binomial_law() {
        // With ell coordinates at the lower boundary, |M| ~ Bin(ell, P).
        let mut f = FrequencyVector::uniform(8, 8, BoundaryMode::Bounded).unwrap();
        for i in 0..3 {
            f.set_grid_index(i, 0);
        }
        let obj = Objective::jump(8, 2).unwrap();
        let dist = exact_step_distribution(&f, &obj).unwrap();
        let expected = boundary_flip_law(3, 8).unwrap();
        assert!(dist.flip_count_law().total_variation(&expected) < 1e-12);
    }

    #[test]
    fn exact_step_norm_marginal_matches_poisson_binomial() {
        let mut f = FrequencyVector::uniform(8, 8, BoundaryMode::Bounded).unwrap();
        f.set_grid_index(0, 0);
        f.set_grid_index(5, 6);
        let obj = Objective::jump(8, 3).unwrap();
        let dist = exact_step_distribution(&f, &obj).unwrap();
        let expected = poisson_binomial(&f.values()).unwrap();
        assert!(dist.sample_norm_law().total_variation(&expected) < 1e-12);
    }

    #[test]
    fn exact_step_rejects_large_instances() {
        let f = FrequencyVector::uniform(14, 14, BoundaryMode::Bounded);
        // n=14, mu=14: (6/7)*14 = 12 even, valid grid; enumeration refuses.
        let f = f.unwrap();
        let obj = Objective::one_max(14);
        assert!(matches!(
            exact_step_distribution(&f, &obj),
            Err(LabError::TooLarge(_))
        ));
    }

    #[test]
    fn ea_law_absorbs_at_the_optimum() {
        let obj = Objective::one_max(6);
        let law = ea_step_distance_law(6, &obj).unwrap();
        assert!((law.pmf(0) - 1.0).abs() < 1e-12);
        let jump = Objective::jump(6, 2).unwrap();
        let law = ea_step_distance_law(6, &jump).unwrap();
        assert!((law.pmf(0) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn ea_law_single_bit_example() {
        // Parent with 3 ones in n=4 reaches the optimum only by flipping
        // exactly the zero bit: (1/4)(3/4)^3.
        let obj = Objective::one_max(4);
        let law = ea_step_distance_law(3, &obj).unwrap();
        assert!((law.pmf(0) - 0.25 * 0.75f64.powi(3)).abs() < 1e-14);
    }

    #[test]
    fn ea_law_matches_offspring_enumeration() {
        // Independent oracle: enumerate all flip masks directly.
        let n = 6;
        for (obj, parent_ones) in [
            (Objective::one_max(n), 3usize),
            (Objective::jump(n, 2).unwrap(), 5),
            (Objective::jump(n, 3).unwrap(), 4),
        ] {
            let pm = 1.0 / n as f64;
            let parent_mask = (1usize << parent_ones) - 1;
            let parent_fit = obj.eval_norm(parent_ones);
            let mut brute = vec![0.0f64; n + 1];
            for flips in 0..1usize << n {
                let p = pm.powi(flips.count_ones() as i32)
                    * (1.0 - pm).powi(n as i32 - flips.count_ones() as i32);
                let child = parent_mask ^ flips;
                let child_ones = child.count_ones() as usize;
                let target = if obj.eval_norm(child_ones) >= parent_fit {
                    child_ones
                } else {
                    parent_ones
                };
                brute[n - target] += p;
            }
            let law = ea_step_distance_law(parent_ones, &obj).unwrap();
            for (h, &b) in brute.iter().enumerate() {
                assert!((law.pmf(h as i64) - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn gap_parent_prefers_moving_away() {
        // In the fitness valley the accepted offspring drift away from the
        // optimum: mass below the parent's distance is tiny (only the jump
        // to the optimum itself).
        let obj = Objective::jump(6, 2).unwrap();
        let law = ea_step_distance_law(5, &obj).unwrap();
        // Parent distance 1. Closer means distance 0.
        let closer = law.pmf(0);
        let away: f64 = (2..=6).map(|h| law.pmf(h)).sum();
        assert!(closer < away);
    }

    #[test]
    fn delta_law_is_symmetric_and_matches_convolution_identity() {
        let law = counterexample_delta_law(&[0.5; 9]).unwrap();
        for j in 0..=9i64 {
            assert!((law.pmf(j) - law.pmf(-j)).abs() < 1e-14);
        }
        // Pr[Delta = 0] = C(2m, m) / 4^m for fair coins.
        let m = 9usize;
        let expect = binomial_coefficient(2 * m, m) / 4.0f64.powi(m as i32);
        assert!((law.pmf(0) - expect).abs() < 1e-12);
    }

    #[test]
    fn delta_law_matches_brute_force_small() {
        let probs = [0.1, 0.5, 0.8, 0.33];
        let law = counterexample_delta_law(&probs).unwrap();
        let q = brute_poisson_binomial(&probs);
        for d in -4i64..=4 {
            let mut expect = 0.0;
            for s1 in 0..=4i64 {
                let s2 = s1 - d;
                if (0..=4).contains(&s2) {
                    expect += q[s1 as usize] * q[s2 as usize];
                }
            }
            assert!((law.pmf(d) - expect).abs() < 1e-13);
        }
    }

    #[test]
    fn counterexample_bounds_hold_at_n_10() {
        let f = counterexample_freq_probability(CounterexampleStart::FStart, 10, 10).unwrap();
        // Pr[Delta in {-1,0}] >= (1-1/n)^{2(n-1)} >= 1/e^2.
        let floor = 0.9f64.powi(18);
        assert!(f.pr_delta_minus1_or_0 >= floor);
        assert!(floor > (-2.0f64).exp() * 0.9); // sanity on the chain at n=10
        assert!(f.probability >= 0.25 + 0.25 * (-2.0f64).exp());

        let g = counterexample_freq_probability(CounterexampleStart::GStart, 10, 10).unwrap();
        // Fair-coin value: Pr[Delta in {-1,0}] = (C(18,9) + C(18,8)) / 4^9.
        let expect = (binomial_coefficient(18, 9) + binomial_coefficient(18, 8)) / 4.0f64.powi(9);
        assert!((g.pr_delta_minus1_or_0 - expect).abs() < 1e-12);
        assert!(f.probability > g.probability);
    }
}

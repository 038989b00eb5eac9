//! Temperature schedules and importance sampling of subsets.

use rand::seq::SliceRandom;
use rand::Rng;

use super::universe::ItemUniverse;
use crate::error::EvalError;
use crate::evaluator::ContextSelection;
use crate::rng::StreamRng;

/// `floor(log_eta(rounds))`, computed by repeated multiplication so exact
/// powers are not lost to rounding.
pub fn max_rung(rounds: usize, eta: f64) -> u32 {
    assert!(rounds >= 1 && eta > 1.0, "need rounds >= 1 and eta > 1");
    let target = rounds as f64 * (1.0 + 1e-12);
    let mut power = 1.0;
    let mut k = 0;
    while power * eta <= target {
        power *= eta;
        k += 1;
    }
    k
}

/// One temperature per parallel run, in descending order.
///
/// With `r_max = floor(log_eta(rounds))` the temperatures are
/// `eta^(2k - r_max)` for `k = r_max, ..., 0`: the rung index is doubled
/// before being offset, which yields `r_max + 1` runs spread symmetrically
/// around `tau = 1`.
pub fn temperature_schedule(rounds: usize, eta: f64) -> Vec<f64> {
    let r_max = max_rung(rounds, eta) as i32;
    (0..=r_max).rev().map(|k| eta.powi(2 * k - r_max)).collect()
}

/// Softmax of `phi / tau`, kept in log space so very low temperatures do not
/// underflow.
#[derive(Debug, Clone, PartialEq)]
pub struct SamplingDistribution {
    log_probs: Vec<f64>,
}

impl SamplingDistribution {
    pub fn log_probs(&self) -> &[f64] {
        &self.log_probs
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.log_probs.iter().map(|l| l.exp()).collect()
    }

    pub fn len(&self) -> usize {
        self.log_probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.log_probs.is_empty()
    }
}

pub fn sampling_distribution(phi: &[f64], tau: f64) -> SamplingDistribution {
    assert!(tau > 0.0, "temperature must be positive");
    let max = phi.iter().fold(f64::NEG_INFINITY, |m, &v| m.max(v / tau));
    let sum: f64 = phi.iter().map(|&v| (v / tau - max).exp()).sum();
    let log_norm = max + sum.ln();
    SamplingDistribution {
        log_probs: phi.iter().map(|&v| v / tau - log_norm).collect(),
    }
}

/// Per-item inclusion probabilities for a fixed-size draw of `k` from
/// weights given in log space: `k * w_i / sum(w)`, with items that would
/// exceed 1 included surely and the remainder redistributed.
pub fn inclusion_probabilities(log_weights: &[f64], k: usize) -> Vec<f64> {
    let n = log_weights.len();
    if k >= n {
        return vec![1.0; n];
    }
    let mut pi = vec![0.0; n];
    let mut certain = vec![false; n];
    let mut left = k;
    while left > 0 {
        // Rescale by the largest remaining weight so that items far below the
        // ones already taken surely do not underflow to zero.
        let max = (0..n)
            .filter(|&i| !certain[i])
            .fold(f64::NEG_INFINITY, |m, i| m.max(log_weights[i]));
        let w = |i: usize| (log_weights[i] - max).exp();
        let total: f64 = (0..n).filter(|&i| !certain[i]).map(w).sum();
        if !(total > 0.0 && total.is_finite()) {
            let rest = (0..n).filter(|&i| !certain[i]).count();
            for i in (0..n).filter(|&i| !certain[i]) {
                pi[i] = left as f64 / rest as f64;
            }
            break;
        }
        let mut capped = false;
        for i in 0..n {
            if !certain[i] && left as f64 * w(i) / total >= 1.0 {
                certain[i] = true;
                pi[i] = 1.0;
                left -= 1;
                capped = true;
            }
        }
        if !capped {
            for i in (0..n).filter(|&i| !certain[i]) {
                pi[i] = left as f64 * w(i) / total;
            }
            break;
        }
    }
    pi
}

/// Fixed-size sampler for one kind, built once per distribution.
///
/// Draws exactly `k` distinct local indices with inclusion probabilities
/// from [`inclusion_probabilities`]: sure items first, then randomized
/// systematic sampling (a uniform permutation followed by a single uniform
/// offset stepping through cumulative probabilities).
#[derive(Debug, Clone)]
pub struct KindSampler {
    pi: Vec<f64>,
    sure: Vec<usize>,
    rest: Vec<usize>,
    k: usize,
}

impl KindSampler {
    pub fn new(log_weights: &[f64], k: usize) -> Self {
        let n = log_weights.len();
        let k = k.min(n);
        let pi = inclusion_probabilities(log_weights, k);
        KindSampler {
            sure: (0..n).filter(|&i| pi[i] >= 1.0).collect(),
            rest: (0..n).filter(|&i| pi[i] < 1.0).collect(),
            pi,
            k,
        }
    }

    pub fn inclusion(&self) -> &[f64] {
        &self.pi
    }

    /// Sorted local indices.
    pub fn draw(&self, rng: &mut StreamRng) -> Vec<usize> {
        let mut picked = self.sure.clone();
        let need = self.k - picked.len();
        if need > 0 {
            let mut rest = self.rest.clone();
            rest.shuffle(rng);
            let mut next: f64 = rng.random();
            let mut cum = 0.0;
            let mut taken = vec![false; rest.len()];
            let mut count = 0;
            for (pos, &i) in rest.iter().enumerate() {
                if count == need {
                    break;
                }
                cum += self.pi[i];
                if next < cum {
                    picked.push(i);
                    taken[pos] = true;
                    count += 1;
                    next += 1.0;
                }
            }
            // Rounding can leave the cumulative sum a hair short of `need`.
            for pos in (0..rest.len()).rev() {
                if count == need {
                    break;
                }
                if !taken[pos] {
                    picked.push(rest[pos]);
                    count += 1;
                }
            }
        }
        picked.sort_unstable();
        picked
    }
}

pub fn draw_fixed_size(log_weights: &[f64], k: usize, rng: &mut StreamRng) -> Vec<usize> {
    KindSampler::new(log_weights, k).draw(rng)
}

/// Draws whole subsets from one sampling distribution: `min(n_C, n)` sample
/// items and `min(d_C, d)` feature items for each active kind, each kind
/// using the joint distribution restricted and renormalized to that kind.
#[derive(Debug, Clone)]
pub struct SubsetSampler {
    samples: Option<KindSampler>,
    features: Option<(KindSampler, usize)>,
    members: usize,
}

impl SubsetSampler {
    pub fn new(dist: &SamplingDistribution, universe: &ItemUniverse) -> Self {
        let lp = dist.log_probs();
        assert_eq!(
            lp.len(),
            universe.len(),
            "distribution does not match the universe"
        );
        let samples = universe.sample_range();
        let features = universe.feature_range();
        SubsetSampler {
            samples: (!samples.is_empty()).then(|| KindSampler::new(&lp[samples], universe.sample_draw())),
            features: (!features.is_empty()).then(|| {
                (
                    KindSampler::new(&lp[features.clone()], universe.feature_draw()),
                    features.start,
                )
            }),
            members: universe.members_per_subset(),
        }
    }

    /// Sorted item indices of one subset.
    pub fn draw(&self, rng: &mut StreamRng) -> Vec<usize> {
        let mut items = Vec::with_capacity(self.members);
        if let Some(s) = &self.samples {
            items.extend(s.draw(rng));
        }
        if let Some((f, offset)) = &self.features {
            items.extend(f.draw(rng).into_iter().map(|j| j + offset));
        }
        items
    }
}

pub fn draw_items(dist: &SamplingDistribution, universe: &ItemUniverse, rng: &mut StreamRng) -> Vec<usize> {
    SubsetSampler::new(dist, universe).draw(rng)
}

pub fn draw_subset(
    dist: &SamplingDistribution,
    universe: &ItemUniverse,
    rng: &mut StreamRng,
) -> Result<ContextSelection, EvalError> {
    universe.to_context(&draw_items(dist, universe, rng))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evaluator::Budget;
    use crate::rng;

    #[test]
    fn schedule_for_hundred_rounds() {
        let taus = temperature_schedule(100, 2.0);
        let expected: Vec<f64> = [6, 4, 2, 0, -2, -4, -6].iter().map(|&e| 2f64.powi(e)).collect();
        assert_eq!(taus, expected);
        assert_eq!(temperature_schedule(1, 2.0), vec![1.0]);
    }

    #[test]
    fn rung_count_at_exact_powers() {
        assert_eq!(max_rung(1000, 10.0), 3);
        assert_eq!(max_rung(999, 10.0), 2);
        assert_eq!(max_rung(243, 3.0), 5);
        assert_eq!(max_rung(1, 1.5), 0);
    }

    #[test]
    fn softmax_values() {
        let p = sampling_distribution(&[1.0, 0.0], 1.0).probabilities();
        let e = std::f64::consts::E;
        assert!((p[0] - e / (e + 1.0)).abs() < 1e-15);
        assert!((p[1] - 1.0 / (e + 1.0)).abs() < 1e-15);
        let flat = sampling_distribution(&[3.0; 5], 0.1).probabilities();
        assert!(flat.iter().all(|&v| (v - 0.2).abs() < 1e-15));
        let hot = sampling_distribution(&[0.0, 5.0, -3.0], 1e9).probabilities();
        assert!(hot.iter().all(|&v| (v - 1.0 / 3.0).abs() < 1e-6));
    }

    #[test]
    fn tiny_temperature_does_not_underflow_the_draw() {
        let dist = sampling_distribution(&[0.0, 1.0, 2.0, 3.0], 1e-4);
        let mut r = rng::stream(0, &[]);
        assert_eq!(draw_fixed_size(dist.log_probs(), 2, &mut r), vec![2, 3]);
    }

    #[test]
    fn inclusion_caps_at_one() {
        let lw: Vec<f64> = [0.9, 0.05, 0.05].iter().map(|w: &f64| w.ln()).collect();
        let pi = inclusion_probabilities(&lw, 2);
        assert_eq!(pi[0], 1.0);
        assert!((pi[1] - 0.5).abs() < 1e-12 && (pi[2] - 0.5).abs() < 1e-12);
        assert!((pi.iter().sum::<f64>() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn exhaustive_draw_returns_whole_kind() {
        let u = ItemUniverse::new(10, 2, &Budget::new(10, 1).unwrap()).unwrap();
        let dist = sampling_distribution(&[0.0; 2], 1.0);
        let mut r = rng::stream(1, &[]);
        let ctx = draw_subset(&dist, &u, &mut r).unwrap();
        assert_eq!(ctx.samples(), (0..10).collect::<Vec<_>>().as_slice());
        assert_eq!(ctx.n_features(), 1);
    }
}

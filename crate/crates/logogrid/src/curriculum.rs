//! Failure-weighted resampling of training data. Each training item gets
//! a categorical weight that grows when the model's predicted code failed
//! on it, and a seeded sampler draws a new dataset from that distribution.

use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::{Path, PathBuf};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum CurriculumError {
    #[error("beta must be non-negative, got {0}")]
    NegativeBeta(f64),
    #[error("outcomes are empty")]
    EmptyOutcomes,
    #[error("outcome index {index} out of range for {size} samples")]
    IndexOutOfRange { index: usize, size: usize },
    #[error("outcome index {0} appears more than once")]
    DuplicateIndex(usize),
    #[error("expected {expected} weights, got {got}")]
    WeightCountMismatch { expected: usize, got: usize },
    #[error("weights must be non-negative and sum to 1, got sum {0}")]
    NotNormalized(f64),
    #[error("a resample plan needs at least one draw")]
    ZeroDraws,
    #[error("cannot read {path}: {source}")]
    Read {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}, line {line}: {message}")]
    Line {
        path: PathBuf,
        line: usize,
        message: String,
    },
}

/// Did the model's predicted code fail on training item `index`?
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleOutcome {
    pub index: usize,
    pub failed: bool,
}

/// Per-item categorical weights: `raw[i] = (1 + beta·[failed_i]) / n`,
/// and the same divided through by their sum.
#[derive(Clone, Debug, PartialEq)]
pub struct Weights {
    pub raw: Vec<f64>,
    pub normalized: Vec<f64>,
}

/// Computes failure-boosted weights from one outcome per dataset index.
/// Outcomes may arrive in any order but must cover 0..n exactly once.
pub fn compute_weights(outcomes: &[SampleOutcome], beta: f64) -> Result<Weights, CurriculumError> {
    if beta < 0.0 {
        return Err(CurriculumError::NegativeBeta(beta));
    }
    let n = outcomes.len();
    if n == 0 {
        return Err(CurriculumError::EmptyOutcomes);
    }
    let mut raw = vec![f64::NAN; n];
    for outcome in outcomes {
        if outcome.index >= n {
            return Err(CurriculumError::IndexOutOfRange {
                index: outcome.index,
                size: n,
            });
        }
        if !raw[outcome.index].is_nan() {
            return Err(CurriculumError::DuplicateIndex(outcome.index));
        }
        let boost = if outcome.failed { beta } else { 0.0 };
        raw[outcome.index] = (1.0 + boost) / n as f64;
    }
    let sum: f64 = raw.iter().sum();
    let normalized = raw.iter().map(|w| w / sum).collect();
    Ok(Weights { raw, normalized })
}

/// How many draws to take and with which generator seed. `beta` is carried
/// along so manifests can record the full recipe.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ResamplePlan {
    pub beta: f64,
    pub n_draws: usize,
    pub seed: u64,
}

/// Draws `plan.n_draws` dataset indices, independently and with
/// replacement, from the categorical distribution given by `weights`.
/// Deterministic for a fixed plan.
pub fn resample(
    dataset_size: usize,
    weights: &[f64],
    plan: &ResamplePlan,
) -> Result<Vec<usize>, CurriculumError> {
    if plan.beta < 0.0 {
        return Err(CurriculumError::NegativeBeta(plan.beta));
    }
    if plan.n_draws == 0 {
        return Err(CurriculumError::ZeroDraws);
    }
    if weights.len() != dataset_size {
        return Err(CurriculumError::WeightCountMismatch {
            expected: dataset_size,
            got: weights.len(),
        });
    }
    let sum: f64 = weights.iter().sum();
    if weights.iter().any(|w| *w < 0.0) || (sum - 1.0).abs() > 1e-9 {
        return Err(CurriculumError::NotNormalized(sum));
    }

    let mut cdf = Vec::with_capacity(weights.len());
    let mut acc = 0.0;
    for w in weights {
        acc += w;
        cdf.push(acc);
    }

    let mut rng = ChaCha12Rng::seed_from_u64(plan.seed);
    let mut draws = Vec::with_capacity(plan.n_draws);
    for _ in 0..plan.n_draws {
        let x: f64 = rng.gen::<f64>() * sum;
        let index = cdf.partition_point(|&c| c <= x);
        draws.push(index.min(dataset_size - 1));
    }
    Ok(draws)
}

/// Recipe record written next to a resampled index file.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ResampleManifest {
    pub dataset_size: usize,
    pub n_draws: usize,
    pub beta: f64,
    pub seed: u64,
    pub failed: usize,
    pub passed: usize,
    pub with_replacement: bool,
}

impl ResampleManifest {
    pub fn new(outcomes: &[SampleOutcome], plan: &ResamplePlan) -> ResampleManifest {
        let failed = outcomes.iter().filter(|o| o.failed).count();
        ResampleManifest {
            dataset_size: outcomes.len(),
            n_draws: plan.n_draws,
            beta: plan.beta,
            seed: plan.seed,
            failed,
            passed: outcomes.len() - failed,
            with_replacement: true,
        }
    }
}

/// Loads outcomes JSONL: one `{"index": ..., "failed": ...}` object per line.
pub fn load_outcomes(path: impl AsRef<Path>) -> Result<Vec<SampleOutcome>, CurriculumError> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|source| CurriculumError::Read {
        path: path.to_path_buf(),
        source,
    })?;
    let mut outcomes = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|source| CurriculumError::Read {
            path: path.to_path_buf(),
            source,
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let outcome = serde_json::from_str(&line).map_err(|e| CurriculumError::Line {
            path: path.to_path_buf(),
            line: i + 1,
            message: format!("malformed outcome: {e}"),
        })?;
        outcomes.push(outcome);
    }
    Ok(outcomes)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn outcome(index: usize, failed: bool) -> SampleOutcome {
        SampleOutcome { index, failed }
    }

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() < 1e-12
    }

    #[test]
    fn weights_boost_failed_samples() {
        let outcomes = [
            outcome(0, true),
            outcome(1, false),
            outcome(2, false),
            outcome(3, true),
        ];
        let weights = compute_weights(&outcomes, 1.0).unwrap();
        assert_eq!(weights.raw, vec![0.5, 0.25, 0.25, 0.5]);
        let expected = [1.0 / 3.0, 1.0 / 6.0, 1.0 / 6.0, 1.0 / 3.0];
        for (got, want) in weights.normalized.iter().zip(expected) {
            assert!(close(*got, want), "{got} vs {want}");
        }
    }

    #[test]
    fn zero_beta_gives_uniform_weights() {
        let outcomes = [outcome(0, true), outcome(1, false), outcome(2, true)];
        let weights = compute_weights(&outcomes, 0.0).unwrap();
        for w in weights.normalized {
            assert!(close(w, 1.0 / 3.0));
        }
    }

    #[test]
    fn uniform_failures_cancel_out() {
        let outcomes = [outcome(0, true), outcome(1, true)];
        let weights = compute_weights(&outcomes, 2.5).unwrap();
        for w in weights.normalized {
            assert!(close(w, 0.5));
        }
    }

    #[test]
    fn outcome_order_does_not_matter() {
        let forward = [outcome(0, true), outcome(1, false), outcome(2, false)];
        let shuffled = [outcome(2, false), outcome(0, true), outcome(1, false)];
        assert_eq!(
            compute_weights(&forward, 1.0).unwrap(),
            compute_weights(&shuffled, 1.0).unwrap()
        );
    }

    #[test]
    fn negative_beta_is_rejected() {
        assert!(matches!(
            compute_weights(&[outcome(0, false)], -0.1),
            Err(CurriculumError::NegativeBeta(_))
        ));
    }

    #[test]
    fn incomplete_covers_are_rejected() {
        assert!(matches!(
            compute_weights(&[outcome(0, false), outcome(0, true)], 1.0),
            Err(CurriculumError::DuplicateIndex(0))
        ));
        assert!(matches!(
            compute_weights(&[outcome(5, false)], 1.0),
            Err(CurriculumError::IndexOutOfRange { .. })
        ));
        assert!(matches!(
            compute_weights(&[], 1.0),
            Err(CurriculumError::EmptyOutcomes)
        ));
    }

    #[test]
    fn normalized_weights_sum_to_one() {
        let outcomes: Vec<SampleOutcome> = (0..97).map(|i| outcome(i, i % 3 == 0)).collect();
        let weights = compute_weights(&outcomes, 4.0).unwrap();
        let sum: f64 = weights.normalized.iter().sum();
        assert!((sum - 1.0).abs() <= 1e-9);
    }

    #[test]
    fn per_item_weight_ratio_matches_the_boost() {
        let outcomes = [outcome(0, true), outcome(1, false)];
        let weights = compute_weights(&outcomes, 3.0).unwrap();
        assert!(close(weights.raw[0] / weights.raw[1], 4.0));
    }

    #[test]
    fn resampling_is_deterministic_and_in_range() {
        let plan = ResamplePlan {
            beta: 1.0,
            n_draws: 1000,
            seed: 7,
        };
        let weights = vec![0.25; 4];
        let a = resample(4, &weights, &plan).unwrap();
        let b = resample(4, &weights, &plan).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 1000);
        assert!(a.iter().all(|&i| i < 4));
        let different_seed = ResamplePlan { seed: 8, ..plan };
        assert_ne!(a, resample(4, &weights, &different_seed).unwrap());
    }

    #[test]
    fn degenerate_weights_always_pick_the_heavy_index() {
        let plan = ResamplePlan {
            beta: 0.0,
            n_draws: 50,
            seed: 1,
        };
        let weights = vec![0.0, 1.0, 0.0];
        let draws = resample(3, &weights, &plan).unwrap();
        assert!(draws.iter().all(|&i| i == 1));
    }

    #[test]
    fn unnormalized_weights_are_rejected() {
        let plan = ResamplePlan {
            beta: 0.0,
            n_draws: 1,
            seed: 0,
        };
        assert!(matches!(
            resample(2, &[0.7, 0.7], &plan),
            Err(CurriculumError::NotNormalized(_))
        ));
        assert!(matches!(
            resample(2, &[0.5], &plan),
            Err(CurriculumError::WeightCountMismatch { .. })
        ));
        assert!(matches!(
            resample(2, &[1.5, -0.5], &plan),
            Err(CurriculumError::NotNormalized(_))
        ));
    }

    #[test]
    fn manifest_counts_failures() {
        let outcomes = [outcome(0, true), outcome(1, false), outcome(2, true)];
        let plan = ResamplePlan {
            beta: 1.0,
            n_draws: 10,
            seed: 3,
        };
        let manifest = ResampleManifest::new(&outcomes, &plan);
        assert_eq!(manifest.failed, 2);
        assert_eq!(manifest.passed, 1);
        assert!(manifest.with_replacement);
    }
}

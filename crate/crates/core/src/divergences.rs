//! Proximity measures between probability vectors: Shannon entropy,
//! Kullback-Leibler divergence, total variation, classical fidelity
//! (Bhattacharyya coefficient), Hellinger distance and min-entropy.
//!
//! Natural logarithm for entropy and KL; base 2 only for min-entropy and key
//! lengths.

use crate::{Error, Result};

/// Weights more negative than this are treated as real violations rather
/// than round-off from squared moduli.
const NEGATIVE_CLAMP: f64 = -1e-15;
const SUM_TOL: f64 = 1e-10;

/// Probability vector: nonnegative weights summing to one.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbDist {
    weights: Vec<f64>,
}

impl ProbDist {
    /// Validates and clamps tiny negative round-off to zero.
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidProbability("empty weight vector".into()));
        }
        let mut clamped = weights;
        for w in &mut clamped {
            if !w.is_finite() {
                return Err(Error::InvalidProbability("non-finite weight".into()));
            }
            if *w < 0.0 {
                if *w < NEGATIVE_CLAMP {
                    return Err(Error::InvalidProbability(format!(
                        "weight {w} below clamping tolerance"
                    )));
                }
                *w = 0.0;
            }
        }
        let sum: f64 = clamped.iter().sum();
        if (sum - 1.0).abs() > SUM_TOL {
            return Err(Error::InvalidProbability(format!(
                "weights sum to {sum}, not 1"
            )));
        }
        Ok(Self { weights: clamped })
    }

    pub fn uniform(d: usize) -> Self {
        Self {
            weights: vec![1.0 / d as f64; d],
        }
    }

    pub fn point_mass(d: usize, i: usize) -> Self {
        let mut weights = vec![0.0; d];
        weights[i] = 1.0;
        Self { weights }
    }

    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
}

fn check_dims(p: &ProbDist, q: &ProbDist, context: &'static str) -> Result<()> {
    if p.dim() != q.dim() {
        return Err(Error::DimensionMismatch {
            context,
            expected: p.dim(),
            got: q.dim(),
        });
    }
    Ok(())
}

/// Shannon entropy in nats, with `0 log 0 = 0`. Lies in `[0, log d]`.
pub fn shannon_entropy(p: &ProbDist) -> f64 {
    p.weights()
        .iter()
        .filter(|&&w| w > 0.0)
        .map(|&w| -w * w.ln())
        .sum()
}

/// Kullback-Leibler divergence in nats. Returns `+inf` when the support of
/// `p` is not contained in the support of `q`.
pub fn kl_divergence(p: &ProbDist, q: &ProbDist) -> Result<f64> {
    check_dims(p, q, "kl_divergence")?;
    let mut acc = 0.0;
    for (&pi, &qi) in p.weights().iter().zip(q.weights()) {
        if pi == 0.0 {
            continue;
        }
        if qi == 0.0 {
            return Ok(f64::INFINITY);
        }
        acc += pi * (pi / qi).ln();
    }
    Ok(acc.max(0.0))
}

/// Total variation distance, `(1/2) sum_i |p_i - q_i|`, in `[0, 1]`.
pub fn total_variation(p: &ProbDist, q: &ProbDist) -> Result<f64> {
    check_dims(p, q, "total_variation")?;
    let sum: f64 = p
        .weights()
        .iter()
        .zip(q.weights())
        .map(|(a, b)| (a - b).abs())
        .sum();
    Ok(0.5 * sum)
}

/// Classical fidelity (Bhattacharyya coefficient), `sum_i sqrt(p_i q_i)`,
/// in `[0, 1]` with equality to 1 iff `p = q`.
pub fn fidelity(p: &ProbDist, q: &ProbDist) -> Result<f64> {
    check_dims(p, q, "fidelity")?;
    let sum: f64 = p
        .weights()
        .iter()
        .zip(q.weights())
        .map(|(a, b)| (a * b).sqrt())
        .sum();
    Ok(sum.min(1.0))
}

/// Hellinger distance, computed in the numerically stable form
/// `sqrt(sum (sqrt(p_i) - sqrt(q_i))^2 / 2)`; equals `sqrt(1 - F(p, q))`.
pub fn hellinger(p: &ProbDist, q: &ProbDist) -> Result<f64> {
    check_dims(p, q, "hellinger")?;
    let sum: f64 = p
        .weights()
        .iter()
        .zip(q.weights())
        .map(|(a, b)| {
            let diff = a.sqrt() - b.sqrt();
            diff * diff
        })
        .sum();
    Ok((0.5 * sum).sqrt().min(1.0))
}

/// Min-entropy in bits, `-log2(max_i p_i)`.
pub fn min_entropy(p: &ProbDist) -> f64 {
    let max = p.weights().iter().cloned().fold(0.0, f64::max);
    -max.log2()
}

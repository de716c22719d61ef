//! Per-configuration information measures under the Bernoulli leaf measure.
//!
//! A leaf at generation `n` has weight `pⁿ`. The configuration's normalization
//! is `Λ = Σ L_n pⁿ`, and each leaf's probability is `pⁿ/Λ`. Everything is
//! computed from the [`GenerationTally`] alone.

use serde::Serialize;

use crate::codec::CodeBook;
use crate::error::{Error, Result};
use crate::percolate::GenerationTally;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConfigMeasures {
    pub lambda: f64,
    pub entropy_bits: f64,
    pub avg_length: f64,
    pub leaf_total: u64,
}

fn weighted_generations(
    tally: &GenerationTally,
    p: f64,
) -> impl Iterator<Item = (usize, f64, f64)> + '_ {
    tally
        .leaf_counts()
        .iter()
        .enumerate()
        .filter(|(_, &l)| l > 0)
        .map(move |(n, &l)| (n, l as f64, p.powi(n as i32)))
}

/// `Λ = Σ_{n < depth_bound} L_n pⁿ`; zero when there are no leaves.
pub fn normalization(tally: &GenerationTally, p: f64) -> f64 {
    weighted_generations(tally, p).map(|(_, l, w)| l * w).sum()
}

fn positive_normalization(tally: &GenerationTally, p: f64, what: &'static str) -> Result<f64> {
    let lambda = normalization(tally, p);
    if lambda > 0.0 {
        Ok(lambda)
    } else {
        Err(Error::Undefined(what))
    }
}

/// Shannon entropy, in bits, of the normalized leaf distribution.
pub fn config_entropy(tally: &GenerationTally, p: f64) -> Result<f64> {
    let lambda = positive_normalization(tally, p, "entropy")?;
    let h = weighted_generations(tally, p)
        .filter(|&(_, _, w)| w > 0.0)
        .map(|(_, l, w)| {
            let prob = w / lambda;
            -l * prob * prob.log2()
        })
        .sum::<f64>();
    // a single outcome can round to -0.0 or a hair below zero
    Ok(h.max(0.0))
}

/// `Σ n L_n pⁿ / Λ`, the mean codeword length.
pub fn config_avg_length(tally: &GenerationTally, p: f64) -> Result<f64> {
    let lambda = positive_normalization(tally, p, "average codeword length")?;
    let total: f64 = weighted_generations(tally, p)
        .map(|(n, l, w)| n as f64 * l * w)
        .sum();
    Ok(total / lambda)
}

/// All three measures at once; fails when the configuration has no leaves.
pub fn measure(tally: &GenerationTally, p: f64) -> Result<ConfigMeasures> {
    Ok(ConfigMeasures {
        lambda: normalization(tally, p),
        entropy_bits: config_entropy(tally, p)?,
        avg_length: config_avg_length(tally, p)?,
        leaf_total: tally.leaf_total(),
    })
}

/// Normalized probability `p^len/Λ` of each entry of `book`.
pub fn symbol_probabilities(book: &CodeBook, p: f64) -> Result<Vec<f64>> {
    let weights: Vec<f64> = book
        .entries()
        .iter()
        .map(|w| p.powi(w.len() as i32))
        .collect();
    let lambda: f64 = weights.iter().sum();
    if lambda > 0.0 {
        Ok(weights.into_iter().map(|w| w / lambda).collect())
    } else {
        Err(Error::Undefined("symbol probabilities"))
    }
}

//! Closed forms for the binary percolation / branching process.
//!
//! Offspring generating function `f(ξ) = (pξ + q)²`, leaf generating function
//! `g(ζ) = q²ζ + 2pq + p²`, moments of the node and leaf counts per
//! generation, the extinction probability, and the expectations of the
//! normalization `Λ`, entropy and codeword length under the Bernoulli measure.
//!
//! Every function here is pure. Formulas whose series diverge for some `p`
//! return [`Error::Domain`] instead of a non-finite value.

use serde::Serialize;

use crate::error::{Error, Result};

const LAMBDA_WINDOW: &str = "2p^2 < 1 (p < 1/sqrt(2) ~ 0.7071)";
const LAMBDA_VAR_WINDOW: &str = "4p^3 < 1 (p < 1/cbrt(4) ~ 0.6300) or p = 1/2";

/// Percolation density and the constants derived from it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModelParams {
    p: f64,
    q: f64,
}

impl ModelParams {
    pub fn new(p: f64) -> Result<Self> {
        check_unit("p", p)?;
        Ok(Self { p, q: 1.0 - p })
    }

    /// Edge-open probability.
    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    /// Mean offspring count `2p`.
    pub fn mu(&self) -> f64 {
        2.0 * self.p
    }

    /// Probability of no offspring, `q²`.
    pub fn p0(&self) -> f64 {
        self.q * self.q
    }

    /// Probability of exactly one offspring, `2pq`.
    pub fn p1(&self) -> f64 {
        2.0 * self.p * self.q
    }

    /// Probability of two offspring, `p²`.
    pub fn p2(&self) -> f64 {
        self.p * self.p
    }

    /// Probability that a node is a leaf, `q²`.
    pub fn u1(&self) -> f64 {
        self.p0()
    }

    /// Probability that a node has at least one child, `2pq + p²`.
    pub fn u0(&self) -> f64 {
        self.p1() + self.p2()
    }
}

/// Mean and variance of a count.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MomentPair {
    pub mean: f64,
    pub variance: f64,
}

/// Leaf-count moments. Two variance forms are returned because the
/// `q²·Var[N]` and `u₁²·Var[N]` routes disagree; neither matches exact
/// enumeration (see `oracle::exact_enumeration`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LeafMoments {
    pub mean: f64,
    /// `q²·Var[N_n]`.
    pub var_q2_scaled: f64,
    /// `u₁²·Var[N_n] = q⁴·Var[N_n]`.
    pub var_u1_scaled: f64,
}

pub(crate) fn check_unit(name: &'static str, value: f64) -> Result<()> {
    if (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(Error::OutOfUnitInterval { name, value })
    }
}

fn offspring_pgf(params: ModelParams, xi: f64) -> f64 {
    let t = params.p * xi + params.q;
    t * t
}

/// `f(ξ) = (pξ + q)²`.
pub fn pgf_eval(params: ModelParams, xi: f64) -> Result<f64> {
    check_unit("xi", xi)?;
    Ok(offspring_pgf(params, xi))
}

/// `g(ζ) = u₁ζ + u₀`.
pub fn leaf_pgf_eval(params: ModelParams, zeta: f64) -> Result<f64> {
    check_unit("zeta", zeta)?;
    Ok(params.u1() * zeta + params.u0())
}

/// `f_n(ξ₀)`, the n-fold composition of `f` with `f_0(ξ) = ξ`.
///
/// `f_n(0)` is the probability that the root cluster has died out by
/// generation `n`.
pub fn pgf_iterate(params: ModelParams, n: u32, xi0: f64) -> Result<f64> {
    check_unit("xi0", xi0)?;
    Ok((0..n).fold(xi0, |xi, _| offspring_pgf(params, xi)))
}

/// Smallest fixed point of `ξ = f(ξ)`: 1 for `p ≤ 1/2`, `(q/p)²` above.
pub fn extinction_probability(params: ModelParams) -> f64 {
    if params.p <= 0.5 {
        1.0
    } else {
        let r = params.q / params.p;
        r * r
    }
}

/// Mean and variance of `N_n`.
///
/// The variance is `q(2p)ⁿ((2p)ⁿ − 1)/(2p − 1)`, which reduces to `n/2` at
/// `p = 1/2`. It is evaluated as `q·μⁿ·Σ_{k<n} μᵏ` so the critical point needs
/// no special case and nearby `p` do not cancel catastrophically.
pub fn node_moments(params: ModelParams, n: u32) -> MomentPair {
    let mu = params.mu();
    let mean = mu.powi(n as i32);
    let geometric: f64 = (0..n).map(|k| mu.powi(k as i32)).sum();
    MomentPair {
        mean,
        variance: params.q * mean * geometric,
    }
}

pub fn leaf_moments(params: ModelParams, n: u32) -> LeafMoments {
    let nodes = node_moments(params, n);
    let u1 = params.u1();
    LeafMoments {
        mean: u1 * nodes.mean,
        var_q2_scaled: params.q * params.q * nodes.variance,
        var_u1_scaled: u1 * u1 * nodes.variance,
    }
}

fn require_lambda_window(params: ModelParams, quantity: &'static str) -> Result<()> {
    if 2.0 * params.p2() < 1.0 {
        Ok(())
    } else {
        Err(Error::Domain {
            quantity,
            p: params.p,
            window: LAMBDA_WINDOW,
        })
    }
}

/// `λ = E[Λ] = q²/(1 − 2p²)`.
pub fn lambda_mean(params: ModelParams) -> Result<f64> {
    require_lambda_window(params, "lambda (mean normalization)")?;
    Ok(params.p0() / (1.0 - 2.0 * params.p2()))
}

/// `Var[Λ] = 2p²q³ / ((1 − 4p³)(1 − 2p²))`, and exactly `1/4` at `p = 1/2`.
pub fn lambda_var(params: ModelParams) -> Result<f64> {
    let p = params.p;
    if p == 0.5 {
        return Ok(0.25);
    }
    let p3 = p * p * p;
    if 4.0 * p3 >= 1.0 {
        return Err(Error::Domain {
            quantity: "Var[Lambda]",
            p,
            window: LAMBDA_VAR_WINDOW,
        });
    }
    let q = params.q;
    Ok(2.0 * p * p * q * q * q / ((1.0 - 4.0 * p3) * (1.0 - 2.0 * p * p)))
}

/// Expected entropy in bits, `2p²·log₂(1/p)/(1 − 2p²) + log₂ λ`.
pub fn expected_entropy(params: ModelParams) -> Result<f64> {
    let lambda = lambda_mean(params).map_err(|_| Error::Domain {
        quantity: "expected entropy",
        p: params.p,
        window: LAMBDA_WINDOW,
    })?;
    let two_p2 = 2.0 * params.p2();
    // 2p² log(1/p) -> 0 as p -> 0
    let first = if params.p == 0.0 {
        0.0
    } else {
        two_p2 * (1.0 / params.p).log2() / (1.0 - two_p2)
    };
    Ok(first + lambda.log2())
}

/// Expected average codeword length, `2p²/(1 − 2p²)`.
pub fn expected_code_length(params: ModelParams) -> Result<f64> {
    require_lambda_window(params, "expected codeword length")?;
    let two_p2 = 2.0 * params.p2();
    Ok(two_p2 / (1.0 - two_p2))
}

//! Exact reference answers at small sizes.
//!
//! * [`node_distribution`]: coefficients of `f_n(ξ)` by repeated dense
//!   polynomial substitution `f_k = (p·f_{k−1} + q)²`.
//! * [`joint_leaf_distribution`]: coefficients of `f_{n−1}(f(ξ·g(ζ)))`, the
//!   joint law of `(N_n, L_n)`.
//! * [`exact_enumeration`]: every open/closed assignment of a small perfect
//!   tree, pushed through the same grow/tally/measure code the sampler uses.

use serde::Serialize;

use crate::analytic::ModelParams;
use crate::error::{Error, Result};
use crate::infomeasure;
use crate::percolate::{survived, tally, Cluster, EdgeSite};

pub const MAX_NODE_GENERATION: u32 = 12;
pub const MAX_JOINT_GENERATION: u32 = 6;
pub const MAX_ENUMERATION_DEPTH: u32 = 3;

/// `P(N_n = k)` for `k = 0..=2ⁿ`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DistVector {
    probs: Vec<f64>,
}

impl DistVector {
    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn prob(&self, k: usize) -> f64 {
        self.probs.get(k).copied().unwrap_or(0.0)
    }

    pub fn total(&self) -> f64 {
        self.probs.iter().sum()
    }

    pub fn mean(&self) -> f64 {
        self.probs
            .iter()
            .enumerate()
            .map(|(k, p)| k as f64 * p)
            .sum()
    }

    pub fn variance(&self) -> f64 {
        let mean = self.mean();
        self.probs
            .iter()
            .enumerate()
            .map(|(k, p)| (k as f64 - mean).powi(2) * p)
            .sum()
    }

    /// Total-variation distance to an empirical histogram of counts.
    pub fn tv_distance_to_counts(&self, counts: &[(u64, u64)]) -> f64 {
        let total: u64 = counts.iter().map(|&(_, c)| c).sum();
        let mut empirical = vec![0.0; self.probs.len()];
        let mut outside = 0.0;
        for &(k, c) in counts {
            let f = c as f64 / total as f64;
            match empirical.get_mut(k as usize) {
                Some(slot) => *slot += f,
                None => outside += f,
            }
        }
        let inside: f64 = self
            .probs
            .iter()
            .zip(&empirical)
            .map(|(a, b)| (a - b).abs())
            .sum();
        0.5 * (inside + outside)
    }
}

fn square(a: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; 2 * a.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if *x == 0.0 {
            continue;
        }
        for (j, y) in a.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// Exact law of `N_n`.
pub fn node_distribution(params: ModelParams, n: u32) -> Result<DistVector> {
    if n > MAX_NODE_GENERATION {
        return Err(Error::Size {
            what: "node_distribution",
            limit_name: "n",
            limit: MAX_NODE_GENERATION as u64,
            got: n as u64,
        });
    }
    let (p, q) = (params.p(), params.q());
    let mut f = vec![0.0, 1.0];
    for _ in 0..n {
        let mut inner: Vec<f64> = f.iter().map(|c| p * c).collect();
        inner[0] += q;
        f = square(&inner);
    }
    Ok(DistVector { probs: f })
}

/// Dense polynomial in `ξ` (rows) and `ζ` (columns).
#[derive(Debug, Clone)]
struct Poly2 {
    cols: usize,
    coeffs: Vec<f64>,
}

impl Poly2 {
    fn rows(&self) -> usize {
        self.coeffs.len() / self.cols
    }

    fn square(&self) -> Self {
        let (rows, cols) = (2 * self.rows() - 1, 2 * self.cols - 1);
        let mut coeffs = vec![0.0; rows * cols];
        let nz: Vec<(usize, usize, f64)> = self
            .coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| **c != 0.0)
            .map(|(k, c)| (k / self.cols, k % self.cols, *c))
            .collect();
        for &(a, b, x) in &nz {
            for &(c, d, y) in &nz {
                coeffs[(a + c) * cols + (b + d)] += x * y;
            }
        }
        Self { cols, coeffs }
    }
}

/// `P(N_n = j, L_n = i)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct JointDist {
    /// `probs[j][i]`, `i ≤ j`.
    probs: Vec<Vec<f64>>,
}

impl JointDist {
    pub fn prob(&self, nodes: usize, leaves: usize) -> f64 {
        self.probs
            .get(nodes)
            .and_then(|row| row.get(leaves))
            .copied()
            .unwrap_or(0.0)
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.probs
    }

    pub fn total(&self) -> f64 {
        self.probs.iter().flatten().sum()
    }

    pub fn node_marginal(&self) -> DistVector {
        DistVector {
            probs: self.probs.iter().map(|row| row.iter().sum()).collect(),
        }
    }

    pub fn leaf_marginal(&self) -> DistVector {
        let mut probs = vec![0.0; self.probs.len()];
        for row in &self.probs {
            for (i, x) in row.iter().enumerate() {
                probs[i] += x;
            }
        }
        DistVector { probs }
    }
}

/// Exact joint law of node and leaf counts at generation `n ≥ 1`.
///
/// `L_n` counts generation-`n` nodes whose own edges are both closed, i.e.
/// leaves of the untruncated tree.
pub fn joint_leaf_distribution(params: ModelParams, n: u32) -> Result<JointDist> {
    if n == 0 || n > MAX_JOINT_GENERATION {
        return Err(Error::Size {
            what: "joint_leaf_distribution (n >= 1)",
            limit_name: "n",
            limit: MAX_JOINT_GENERATION as u64,
            got: n as u64,
        });
    }
    let (p, q) = (params.p(), params.q());
    // inner = p·ξ·g(ζ) + q = q + p·u0·ξ + p·u1·ξζ
    let inner = Poly2 {
        cols: 2,
        coeffs: vec![q, 0.0, p * params.u0(), p * params.u1()],
    };
    let mut h = inner.square();
    for _ in 1..n {
        let mut t = h.clone();
        for c in &mut t.coeffs {
            *c *= p;
        }
        t.coeffs[0] += q;
        h = t.square();
    }
    let probs = (0..h.rows())
        .map(|j| h.coeffs[j * h.cols..j * h.cols + j + 1].to_vec())
        .collect();
    Ok(JointDist { probs })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GenerationExact {
    pub n: u32,
    pub node_mean: f64,
    pub node_var: f64,
    /// Only for `n < depth`; generation-`depth` nodes are never leaves.
    pub leaf_mean: Option<f64>,
    pub leaf_var: Option<f64>,
    /// `P(N_n = k)` under the truncated tree.
    pub node_distribution: Vec<f64>,
}

/// Exact expectations over every edge configuration of a small tree.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExactStats {
    pub p: f64,
    pub depth: u32,
    pub configurations: u64,
    pub generations: Vec<GenerationExact>,
    /// `E[Λ]` over all configurations (leafless ones contribute 0).
    pub lambda_mean: f64,
    pub lambda_var: f64,
    pub leafless_probability: f64,
    /// `P(N_depth = 0)`.
    pub extinct_probability: f64,
    /// `E[H | Λ > 0]`; `None` when every configuration is leafless.
    pub entropy_bits_given_leaves: Option<f64>,
    pub avg_length_given_leaves: Option<f64>,
}

#[derive(Default)]
struct Moments {
    sum: f64,
    sum_sq: f64,
}

impl Moments {
    fn add(&mut self, weight: f64, x: f64) {
        self.sum += weight * x;
        self.sum_sq += weight * x * x;
    }

    fn mean(&self) -> f64 {
        self.sum
    }

    fn var(&self) -> f64 {
        (self.sum_sq - self.sum * self.sum).max(0.0)
    }
}

/// Edge index of `site` in heap order: the child at heap position `h` owns edge `h − 2`.
fn edge_index(site: EdgeSite) -> u32 {
    let parent_heap = (1u64 << site.generation) + site.position;
    (2 * parent_heap + site.side as u64 - 2) as u32
}

/// Brute force over all `2^E` assignments of the `E = 2^(depth+1) − 2` edges.
pub fn exact_enumeration(params: ModelParams, depth: u32) -> Result<ExactStats> {
    if depth > MAX_ENUMERATION_DEPTH {
        return Err(Error::Size {
            what: "exact_enumeration",
            limit_name: "depth",
            limit: MAX_ENUMERATION_DEPTH as u64,
            got: depth as u64,
        });
    }
    let (p, q) = (params.p(), params.q());
    let edges = (1u32 << (depth + 1)) - 2;
    let configurations = 1u64 << edges;
    let d = depth as usize;

    let mut nodes: Vec<Moments> = (0..=d).map(|_| Moments::default()).collect();
    let mut leaves: Vec<Moments> = (0..d).map(|_| Moments::default()).collect();
    let mut node_dist: Vec<Vec<f64>> = (0..=d).map(|n| vec![0.0; (1 << n) + 1]).collect();
    let mut lambda = Moments::default();
    let (mut leafless, mut extinct) = (0.0, 0.0);
    let (mut entropy, mut length) = (0.0, 0.0);

    for config in 0..configurations {
        let open = config.count_ones() as i32;
        let weight = p.powi(open) * q.powi(edges as i32 - open);
        let cluster = Cluster::grow(depth, &mut |site: EdgeSite| {
            config >> edge_index(site) & 1 == 1
        });
        let t = tally(&cluster);

        for (n, &count) in t.node_counts().iter().enumerate() {
            nodes[n].add(weight, count as f64);
            node_dist[n][count as usize] += weight;
        }
        for (n, &count) in t.leaf_counts().iter().enumerate() {
            leaves[n].add(weight, count as f64);
        }
        if !survived(&t) {
            extinct += weight;
        }
        lambda.add(weight, infomeasure::normalization(&t, p));
        match infomeasure::measure(&t, p) {
            Ok(m) => {
                entropy += weight * m.entropy_bits;
                length += weight * m.avg_length;
            }
            Err(_) => leafless += weight,
        }
    }

    let generations = (0..=d)
        .map(|n| GenerationExact {
            n: n as u32,
            node_mean: nodes[n].mean(),
            node_var: nodes[n].var(),
            leaf_mean: leaves.get(n).map(Moments::mean),
            leaf_var: leaves.get(n).map(Moments::var),
            node_distribution: node_dist[n].clone(),
        })
        .collect();
    let with_leaves = 1.0 - leafless;
    let conditional = |x: f64| (with_leaves > 0.0).then(|| x / with_leaves);

    Ok(ExactStats {
        p,
        depth,
        configurations,
        generations,
        lambda_mean: lambda.mean(),
        lambda_var: lambda.var(),
        leafless_probability: leafless,
        extinct_probability: extinct,
        entropy_bits_given_leaves: conditional(entropy),
        avg_length_given_leaves: conditional(length),
    })
}

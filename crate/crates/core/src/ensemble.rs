//! Monte Carlo ensembles of root clusters.
//!
//! Sample `i` of a cell always uses stream `(seed, i)`. Samples are grouped
//! into fixed chunks of [`CHUNK`] indices; each chunk is reduced in index
//! order and chunk results are merged in chunk order, so every statistic is
//! bit-identical for any rayon pool size.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;

use rayon::prelude::*;
use serde::Serialize;

use crate::analytic::{self, ModelParams};
use crate::error::{Error, Result};
use crate::infomeasure;
use crate::percolate::{sample_cluster, survived, tally, RNG_VERSION};

/// Samples per reduction chunk. Changing it changes low-order bits of output.
pub const CHUNK: u64 = 1024;

/// Column order of the sweep CSV.
pub const CSV_COLUMNS: [&str; 15] = [
    "p",
    "depth",
    "samples",
    "used",
    "skipped_leafless",
    "extinct_frac",
    "mean_N_final",
    "se_N_final",
    "mean_H_bits",
    "se_H_bits",
    "mean_L",
    "se_L",
    "analytic_H_bits",
    "analytic_L",
    "analytic_lambda",
];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnsembleConfig {
    pub ps: Vec<f64>,
    pub depths: Vec<u32>,
    pub samples: u64,
    pub seed: u64,
    /// CSV destination; `None` skips writing.
    pub output: Option<PathBuf>,
    pub rng_version: String,
}

impl EnsembleConfig {
    pub fn new(ps: Vec<f64>, depths: Vec<u32>, samples: u64, seed: u64) -> Self {
        Self {
            ps,
            depths,
            samples,
            seed,
            output: None,
            rng_version: RNG_VERSION.to_string(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.samples == 0 {
            return Err(Error::InvalidConfig("samples must be at least 1".into()));
        }
        if let Some(p) = self.ps.iter().find(|p| !(0.0..=1.0).contains(*p)) {
            return Err(Error::InvalidConfig(format!("p = {p} is outside [0, 1]")));
        }
        if self.depths.contains(&0) {
            return Err(Error::InvalidConfig("depths must be at least 1".into()));
        }
        if self.rng_version != RNG_VERSION {
            return Err(Error::InvalidConfig(format!(
                "rng version {:?} is not supported (this build provides {RNG_VERSION:?})",
                self.rng_version
            )));
        }
        Ok(())
    }
}

/// Sample mean with its standard error `sd/√count`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct Estimate {
    pub mean: f64,
    pub se: f64,
    pub count: u64,
}

#[derive(Debug, Clone, Default)]
struct Welford {
    n: u64,
    mean: f64,
    m2: f64,
}

impl Welford {
    fn push(&mut self, x: f64) {
        self.n += 1;
        let delta = x - self.mean;
        self.mean += delta / self.n as f64;
        self.m2 += delta * (x - self.mean);
    }

    fn merge(&mut self, other: &Welford) {
        if other.n == 0 {
            return;
        }
        if self.n == 0 {
            *self = other.clone();
            return;
        }
        let n = self.n + other.n;
        let delta = other.mean - self.mean;
        self.mean += delta * other.n as f64 / n as f64;
        self.m2 += other.m2 + delta * delta * (self.n as f64 * other.n as f64) / n as f64;
        self.n = n;
    }

    fn estimate(&self) -> Estimate {
        let se = if self.n > 1 {
            (self.m2 / (self.n - 1) as f64).sqrt() / (self.n as f64).sqrt()
        } else {
            0.0
        };
        Estimate {
            mean: if self.n > 0 { self.mean } else { 0.0 },
            se,
            count: self.n,
        }
    }
}

#[derive(Debug, Clone)]
struct CellAccumulator {
    samples: u64,
    extinct: u64,
    skipped: u64,
    n_final: Welford,
    leaf_counts: Vec<Welford>,
    lambda: Welford,
    entropy: Welford,
    length: Welford,
    histogram: BTreeMap<u64, u64>,
}

impl CellAccumulator {
    fn new(depth: u32) -> Self {
        Self {
            samples: 0,
            extinct: 0,
            skipped: 0,
            n_final: Welford::default(),
            leaf_counts: vec![Welford::default(); depth as usize],
            lambda: Welford::default(),
            entropy: Welford::default(),
            length: Welford::default(),
            histogram: BTreeMap::new(),
        }
    }

    fn push_sample(&mut self, params: ModelParams, depth: u32, seed: u64, index: u64) {
        let cluster = sample_cluster(params, depth, seed, index);
        let t = tally(&cluster);
        self.samples += 1;
        if !survived(&t) {
            self.extinct += 1;
        }
        let final_nodes = t.final_nodes();
        self.n_final.push(final_nodes as f64);
        *self.histogram.entry(final_nodes).or_default() += 1;
        for (acc, &l) in self.leaf_counts.iter_mut().zip(t.leaf_counts()) {
            acc.push(l as f64);
        }
        self.lambda.push(infomeasure::normalization(&t, params.p()));
        match infomeasure::measure(&t, params.p()) {
            Ok(m) => {
                self.entropy.push(m.entropy_bits);
                self.length.push(m.avg_length);
            }
            Err(_) => self.skipped += 1,
        }
    }

    fn merge(mut self, other: &CellAccumulator) -> Self {
        self.samples += other.samples;
        self.extinct += other.extinct;
        self.skipped += other.skipped;
        self.n_final.merge(&other.n_final);
        for (a, b) in self.leaf_counts.iter_mut().zip(&other.leaf_counts) {
            a.merge(b);
        }
        self.lambda.merge(&other.lambda);
        self.entropy.merge(&other.entropy);
        self.length.merge(&other.length);
        for (k, c) in &other.histogram {
            *self.histogram.entry(*k).or_default() += c;
        }
        self
    }
}

/// Closed-form values for the same density, where they are defined.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct AnalyticColumns {
    pub entropy_bits: Option<f64>,
    pub code_length: Option<f64>,
    pub lambda: Option<f64>,
}

impl AnalyticColumns {
    pub fn for_params(params: ModelParams) -> Self {
        Self {
            entropy_bits: analytic::expected_entropy(params).ok(),
            code_length: analytic::expected_code_length(params).ok(),
            lambda: analytic::lambda_mean(params).ok(),
        }
    }
}

/// One (p, depth) cell of an ensemble.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnsembleStats {
    pub p: f64,
    pub depth: u32,
    pub samples: u64,
    pub seed: u64,
    pub rng_version: String,
    /// Samples with at least one leaf; H and L average over these.
    pub used: u64,
    pub skipped_leafless: u64,
    pub extinct: u64,
    pub extinct_frac: f64,
    pub extinct_se: f64,
    pub n_final: Estimate,
    /// Per-generation leaf counts `L_0..L_{depth−1}` over all samples.
    pub leaf_counts: Vec<Estimate>,
    /// Configuration normalization `Λ` over all samples (0 when leafless).
    pub lambda: Estimate,
    pub entropy_bits: Estimate,
    pub avg_length: Estimate,
    /// `(N_depth, count)` pairs in increasing order.
    pub final_node_histogram: Vec<(u64, u64)>,
    pub analytic: AnalyticColumns,
}

impl EnsembleStats {
    fn from_accumulator(params: ModelParams, depth: u32, seed: u64, acc: CellAccumulator) -> Self {
        let frac = acc.extinct as f64 / acc.samples as f64;
        Self {
            p: params.p(),
            depth,
            samples: acc.samples,
            seed,
            rng_version: RNG_VERSION.to_string(),
            used: acc.samples - acc.skipped,
            skipped_leafless: acc.skipped,
            extinct: acc.extinct,
            extinct_frac: frac,
            extinct_se: (frac * (1.0 - frac) / acc.samples as f64).sqrt(),
            n_final: acc.n_final.estimate(),
            leaf_counts: acc.leaf_counts.iter().map(Welford::estimate).collect(),
            lambda: acc.lambda.estimate(),
            entropy_bits: acc.entropy.estimate(),
            avg_length: acc.length.estimate(),
            final_node_histogram: acc.histogram.into_iter().collect(),
            analytic: AnalyticColumns::for_params(params),
        }
    }

    /// The row in [`CSV_COLUMNS`] order; undefined analytic cells are empty.
    pub fn csv_record(&self) -> [String; 15] {
        let opt = |x: Option<f64>| x.map(|v| v.to_string()).unwrap_or_default();
        [
            self.p.to_string(),
            self.depth.to_string(),
            self.samples.to_string(),
            self.used.to_string(),
            self.skipped_leafless.to_string(),
            self.extinct_frac.to_string(),
            self.n_final.mean.to_string(),
            self.n_final.se.to_string(),
            self.entropy_bits.mean.to_string(),
            self.entropy_bits.se.to_string(),
            self.avg_length.mean.to_string(),
            self.avg_length.se.to_string(),
            opt(self.analytic.entropy_bits),
            opt(self.analytic.code_length),
            opt(self.analytic.lambda),
        ]
    }
}

/// Runs `samples` independent clusters on the current rayon pool.
pub fn run_ensemble(
    params: ModelParams,
    depth: u32,
    samples: u64,
    seed: u64,
) -> Result<EnsembleStats> {
    if samples == 0 {
        return Err(Error::InvalidConfig("samples must be at least 1".into()));
    }
    let chunks = samples.div_ceil(CHUNK);
    let partials: Vec<CellAccumulator> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut acc = CellAccumulator::new(depth);
            for index in c * CHUNK..((c + 1) * CHUNK).min(samples) {
                acc.push_sample(params, depth, seed, index);
            }
            acc
        })
        .collect();
    let total = partials
        .iter()
        .fold(CellAccumulator::new(depth), |acc, part| acc.merge(part));
    Ok(EnsembleStats::from_accumulator(params, depth, seed, total))
}

/// One row per `(p, depth)`, p-major, written as CSV when `output` is set.
pub fn sweep(config: &EnsembleConfig) -> Result<Vec<EnsembleStats>> {
    config.validate()?;
    let mut rows = Vec::with_capacity(config.ps.len() * config.depths.len());
    for &p in &config.ps {
        let params = ModelParams::new(p)?;
        for &depth in &config.depths {
            rows.push(run_ensemble(params, depth, config.samples, config.seed)?);
        }
    }
    if let Some(path) = &config.output {
        let io_err = |source| Error::Io {
            path: path.clone(),
            source,
        };
        let file = File::create(path).map_err(io_err)?;
        let mut w = BufWriter::new(file);
        write_csv(&rows, &mut w)?;
        w.flush().map_err(io_err)?;
    }
    Ok(rows)
}

/// Header plus one record per row.
pub fn write_csv<W: Write>(rows: &[EnsembleStats], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_COLUMNS)?;
    for row in rows {
        w.write_record(row.csv_record())?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

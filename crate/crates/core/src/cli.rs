//! The `treecode` command line.
//!
//! Exit codes: 0 on success, 2 on usage errors (unknown flags, malformed
//! numbers), 1 on domain or runtime errors. Every run writes one metadata
//! line with the RNG tag and the parsed parameters to stderr.

use std::fs;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use crate::analytic::{self, ModelParams};
use crate::codec::{self, BitString, CodeBook};
use crate::dump;
use crate::ensemble::{self, EnsembleConfig};
use crate::error::{Error, Result};
use crate::infomeasure;
use crate::oracle;
use crate::percolate::{sample_cluster, tally, Cluster, RNG_VERSION};

/// Master seed used when `--seed` is not given.
pub const DEFAULT_SEED: u64 = 20_240_601;

pub const DEFAULT_SAMPLES: u64 = 10_000;

#[derive(Debug, Parser)]
#[command(
    name = "treecode",
    version,
    about = "Percolation clusters on perfect binary trees as prefix codes"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "lowercase")]
enum Command {
    /// Closed-form table (lambda, Var[Lambda], E[H], E[L], extinction) as JSON
    Analytic(AnalyticArgs),
    /// Sample one root cluster and dump it
    Sample(SampleArgs),
    /// List the codewords of a sampled or loaded cluster
    Codebook(CodebookArgs),
    /// Run one (p, depth) ensemble cell
    Ensemble(EnsembleArgs),
    /// Run ensembles over a grid of p and depth and write CSV
    Sweep(SweepArgs),
    /// Exact statistics by enumerating every edge configuration (depth <= 3)
    Oracle(OracleArgs),
    /// Decode a bit string against a codebook file
    Decode(DecodeArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Format {
    Json,
    Dot,
    Csv,
}

#[derive(Debug, Args, Serialize)]
struct AnalyticArgs {
    /// Percolation density; repeat for several densities
    #[arg(long = "p", required = true)]
    p: Vec<f64>,
    /// Also tabulate node and leaf moments at these generations
    #[arg(long)]
    depth: Vec<u32>,
}

#[derive(Debug, Args, Serialize)]
struct SampleArgs {
    /// Percolation density
    #[arg(long = "p")]
    p: f64,
    /// Maximum generation of the truncated tree
    #[arg(long)]
    depth: u32,
    /// Master seed
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Sample index within the seed's streams
    #[arg(long, default_value_t = 0)]
    index: u64,
    /// json: nested cluster; dot: Graphviz; csv: per-generation tally
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Write to this file instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
struct CodebookArgs {
    /// Percolation density; with --cluster it only sets the probability column
    #[arg(long = "p", required_unless_present = "cluster")]
    p: Option<f64>,
    /// Maximum generation of the sampled tree
    #[arg(long, required_unless_present = "cluster", conflicts_with = "cluster")]
    depth: Option<u32>,
    /// Master seed
    #[arg(long, default_value_t = DEFAULT_SEED, conflicts_with = "cluster")]
    seed: u64,
    /// Sample index within the seed's streams
    #[arg(long, default_value_t = 0, conflicts_with = "cluster")]
    index: u64,
    /// Read the cluster from a JSON dump instead of sampling
    #[arg(long)]
    cluster: Option<PathBuf>,
    /// Write to this file instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
struct EnsembleArgs {
    /// Percolation density
    #[arg(long = "p")]
    p: f64,
    /// Maximum generation of the truncated tree
    #[arg(long)]
    depth: u32,
    /// Number of clusters
    #[arg(long, default_value_t = DEFAULT_SAMPLES)]
    samples: u64,
    /// Master seed
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Worker threads (0 = all cores); results do not depend on it
    #[arg(long, default_value_t = 0)]
    threads: usize,
    /// json: full statistics; csv: one sweep-style row
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Write to this file instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
struct SweepArgs {
    /// Percolation density; repeat for several
    #[arg(long = "p")]
    p: Vec<f64>,
    /// Maximum generation; repeat for several
    #[arg(long, required = true)]
    depth: Vec<u32>,
    /// Clusters per (p, depth) cell
    #[arg(long, default_value_t = DEFAULT_SAMPLES)]
    samples: u64,
    /// Master seed
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Worker threads (0 = all cores); results do not depend on it
    #[arg(long, default_value_t = 0)]
    threads: usize,
    /// Only csv is supported
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// CSV destination (stdout when absent)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
struct OracleArgs {
    /// Percolation density
    #[arg(long = "p")]
    p: f64,
    /// Tree depth, at most 3
    #[arg(long, default_value_t = 3)]
    depth: u32,
    /// Worker threads (0 = all cores); the enumeration itself is sequential
    #[arg(long, default_value_t = 0)]
    threads: usize,
}

#[derive(Debug, Args, Serialize)]
struct DecodeArgs {
    /// Codebook in the text format
    #[arg(long)]
    book: PathBuf,
    /// Bits to decode, as a 0/1 string
    #[arg(long)]
    bits: String,
}

/// Parses `args` (including the program name) and runs the subcommand.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{text}");
                    0
                }
                _ => {
                    let _ = write!(err, "{text}");
                    2
                }
            };
        }
    };
    let meta = json!({ "rng": RNG_VERSION, "command": &cli.command });
    let _ = writeln!(err, "treecode {meta}");
    match dispatch(&cli.command, out) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            1
        }
    }
}

fn dispatch(command: &Command, out: &mut dyn Write) -> Result<()> {
    match command {
        Command::Analytic(a) => analytic_cmd(a, out),
        Command::Sample(a) => sample_cmd(a, out),
        Command::Codebook(a) => codebook_cmd(a, out),
        Command::Ensemble(a) => ensemble_cmd(a, out),
        Command::Sweep(a) => sweep_cmd(a, out),
        Command::Oracle(a) => oracle_cmd(a, out),
        Command::Decode(a) => decode_cmd(a, out),
    }
}

fn with_threads<T: Send>(threads: usize, f: impl FnOnce() -> Result<T> + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::InvalidConfig(format!("cannot start {threads} threads: {e}")))?;
    pool.install(f)
}

fn io_err(path: &std::path::Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn emit(out: &mut dyn Write, dest: Option<&PathBuf>, text: &str) -> Result<()> {
    match dest {
        Some(path) => fs::write(path, text).map_err(io_err(path)),
        None => out
            .write_all(text.as_bytes())
            .map_err(io_err("<stdout>".as_ref())),
    }
}

fn analytic_entry(p: f64, depths: &[u32]) -> Result<serde_json::Value> {
    let params = ModelParams::new(p)?;
    // λ diverging takes E[H] and E[L] with it; Var[Λ] has a narrower window
    let lambda = analytic::lambda_mean(params)?;
    let (lambda_var, note) = match analytic::lambda_var(params) {
        Ok(v) => (Some(v), None),
        Err(e) => (None, Some(e.to_string())),
    };
    let generations: Vec<_> = depths
        .iter()
        .map(|&n| {
            json!({
                "n": n,
                "nodes": analytic::node_moments(params, n),
                "leaves": analytic::leaf_moments(params, n),
            })
        })
        .collect();
    let mut v = json!({
        "p": params.p(),
        "q": params.q(),
        "mu": params.mu(),
        "extinction_probability": analytic::extinction_probability(params),
        "lambda": lambda,
        "lambda_var": lambda_var,
        "expected_entropy_bits": analytic::expected_entropy(params)?,
        "expected_code_length": analytic::expected_code_length(params)?,
    });
    if let Some(note) = note {
        v["notes"] = json!([note]);
    }
    if !generations.is_empty() {
        v["generations"] = json!(generations);
    }
    Ok(v)
}

fn analytic_cmd(a: &AnalyticArgs, out: &mut dyn Write) -> Result<()> {
    let entries =
        a.p.iter()
            .map(|&p| analytic_entry(p, &a.depth))
            .collect::<Result<Vec<_>>>()?;
    let v = match <[_; 1]>::try_from(entries) {
        Ok([single]) => single,
        Err(many) => json!(many),
    };
    emit(
        out,
        None,
        &format!("{}\n", serde_json::to_string_pretty(&v)?),
    )
}

fn sample_cmd(a: &SampleArgs, out: &mut dyn Write) -> Result<()> {
    let params = ModelParams::new(a.p)?;
    let cluster = sample_cluster(params, a.depth, a.seed, a.index);
    let text = match a.format {
        Format::Json => dump::to_json(&cluster)? + "\n",
        Format::Dot => dump::to_dot(&cluster),
        Format::Csv => {
            let t = tally(&cluster);
            let mut s = String::from("generation,nodes,leaves\n");
            for (n, nodes) in t.node_counts().iter().enumerate() {
                let leaves = t
                    .leaf_counts()
                    .get(n)
                    .map(u64::to_string)
                    .unwrap_or_default();
                s.push_str(&format!("{n},{nodes},{leaves}\n"));
            }
            s
        }
    };
    emit(out, a.out.as_ref(), &text)
}

fn codebook_cmd(a: &CodebookArgs, out: &mut dyn Write) -> Result<()> {
    let cluster: Cluster = match &a.cluster {
        Some(path) => dump::from_json(&fs::read_to_string(path).map_err(io_err(path))?)?,
        None => {
            let params = ModelParams::new(a.p.unwrap_or_default())?;
            sample_cluster(params, a.depth.unwrap_or_default(), a.seed, a.index)
        }
    };
    let book = codec::extract_codebook(&cluster);
    let probs = match a.p {
        Some(p) if !book.is_empty() => {
            ModelParams::new(p)?;
            Some(infomeasure::symbol_probabilities(&book, p)?)
        }
        _ => None,
    };
    emit(out, a.out.as_ref(), &book.to_text(probs.as_deref()))
}

fn ensemble_cmd(a: &EnsembleArgs, out: &mut dyn Write) -> Result<()> {
    let params = ModelParams::new(a.p)?;
    let stats = with_threads(a.threads, || {
        ensemble::run_ensemble(params, a.depth, a.samples, a.seed)
    })?;
    let text = match a.format {
        Format::Csv => {
            let mut buf = Vec::new();
            ensemble::write_csv(std::slice::from_ref(&stats), &mut buf)?;
            String::from_utf8(buf).expect("csv output is ASCII")
        }
        Format::Json => serde_json::to_string_pretty(&stats)? + "\n",
        Format::Dot => {
            return Err(Error::InvalidConfig(
                "ensemble supports --format json or csv".into(),
            ))
        }
    };
    emit(out, a.out.as_ref(), &text)
}

fn sweep_cmd(a: &SweepArgs, out: &mut dyn Write) -> Result<()> {
    if a.format != Format::Csv {
        return Err(Error::InvalidConfig("sweep writes csv only".into()));
    }
    let mut config = EnsembleConfig::new(a.p.clone(), a.depth.clone(), a.samples, a.seed);
    config.output = a.out.clone();
    let rows = with_threads(a.threads, || ensemble::sweep(&config))?;
    if a.out.is_none() {
        ensemble::write_csv(&rows, out)?;
    }
    Ok(())
}

fn oracle_cmd(a: &OracleArgs, out: &mut dyn Write) -> Result<()> {
    let params = ModelParams::new(a.p)?;
    let stats = with_threads(a.threads, || oracle::exact_enumeration(params, a.depth))?;
    emit(
        out,
        None,
        &format!("{}\n", serde_json::to_string_pretty(&stats)?),
    )
}

fn decode_cmd(a: &DecodeArgs, out: &mut dyn Write) -> Result<()> {
    let book = CodeBook::parse_text(&fs::read_to_string(&a.book).map_err(io_err(&a.book))?)?;
    let bits: BitString = a.bits.parse()?;
    let indices = codec::decode(&book, &bits)?;
    let symbols: Vec<String> = indices.iter().map(|&i| CodeBook::symbol_label(i)).collect();
    let v = json!({ "indices": indices, "symbols": symbols });
    emit(out, None, &format!("{v}\n"))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn call(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let argv = std::iter::once("treecode").chain(args.iter().copied());
        let code = run(argv, &mut out, &mut err);
        (
            code,
            String::from_utf8(out).unwrap(),
            String::from_utf8(err).unwrap(),
        )
    }

    #[test]
    fn analytic_table() {
        let (code, out, err) = call(&["analytic", "--p", "0.6"]);
        assert_eq!(code, 0, "{err}");
        let v: serde_json::Value = serde_json::from_str(&out).unwrap();
        assert!((v["expected_code_length"].as_f64().unwrap() - 2.571429).abs() < 1e-6);
        assert!((v["extinction_probability"].as_f64().unwrap() - 4.0 / 9.0).abs() < 1e-12);
        assert!(err.contains(RNG_VERSION));
    }

    #[test]
    fn analytic_outside_window_exits_one() {
        let (code, _, err) = call(&["analytic", "--p", "0.75"]);
        assert_eq!(code, 1);
        assert!(err.contains("p < 1/sqrt(2)"), "{err}");
    }

    #[test]
    fn analytic_narrow_window_reports_null_variance() {
        let (code, out, _) = call(&["analytic", "--p", "0.65", "--p", "0.5", "--depth", "2"]);
        assert_eq!(code, 0);
        let v: serde_json::Value = serde_json::from_str(&out).unwrap();
        assert!(v[0]["lambda_var"].is_null());
        assert_eq!(v[1]["lambda_var"], json!(0.25));
        assert_eq!(v[1]["generations"][0]["nodes"]["variance"], json!(1.0));
    }

    #[test]
    fn usage_errors_exit_two() {
        assert_eq!(call(&["analytic", "--p", "0.5", "--bogus"]).0, 2);
        let (code, _, err) = call(&["sample", "--p", "0.5", "--depth", "eight"]);
        assert_eq!(code, 2);
        assert!(err.contains("--depth"), "{err}");
        assert_eq!(call(&["ensemble", "--p", "x", "--depth", "3"]).0, 2);
        assert_eq!(call(&[]).0, 2);
    }

    #[test]
    fn help_for_every_subcommand() {
        for sub in [
            "analytic", "sample", "codebook", "ensemble", "sweep", "oracle", "decode",
        ] {
            let (code, out, _) = call(&[sub, "--help"]);
            assert_eq!(code, 0, "{sub}");
            assert!(out.contains("Usage"), "{sub}");
        }
    }

    #[test]
    fn sample_is_deterministic() {
        let a = call(&["sample", "--p", "0.5", "--depth", "8", "--seed", "7"]);
        let b = call(&["sample", "--p", "0.5", "--depth", "8", "--seed", "7"]);
        assert_eq!(a.0, 0);
        assert_eq!(a.1, b.1);
        dump::from_json(&a.1).unwrap();
        let dot = call(&[
            "sample", "--p", "0.5", "--depth", "8", "--seed", "7", "--format", "dot",
        ]);
        assert!(dot.1.starts_with("digraph"));
    }

    #[test]
    fn domain_error_exits_one() {
        assert_eq!(call(&["sample", "--p", "1.5", "--depth", "3"]).0, 1);
        assert_eq!(call(&["oracle", "--p", "0.5", "--depth", "4"]).0, 1);
    }
}

//! The `cascade-forge` command line.
//!
//! Stages communicate through files in the output directory:
//!
//! | stage     | reads                                   | writes |
//! |-----------|-----------------------------------------|--------|
//! | `synth`   | –                                       | `tweets.jsonl`, `friends.tsv`, `truth.txt` |
//! | `build`   | `--tweets`, `--friends`                 | `cascades.jsonl` |
//! | `coord`   | `--tweets`                              | `coordination.csv` |
//! | `metrics` | `cascades.jsonl`, `coordination.csv`    | `labeled_cascades.jsonl`, `metrics.csv`, `nodes.csv` |
//! | `null`    | `labeled_cascades.jsonl`                | `null_metrics.csv` |
//! | `stats`   | `nodes.csv`, `metrics.csv`, `null_metrics.csv` | `bootstrap_stats.csv`, `kde.csv`, `spearman.csv`, `heatmap.csv`, `null_heatmap.csv` |
//! | `fit`     | `metrics.csv` or `--points`             | `fits.json` |
//!
//! Every stage is deterministic for a given input set and `--seed`.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::cascade::{build_all, group_retweets, node_features, CascadeError};
use crate::coordination::{build_user_vectors, label_coordinated};
use crate::infectivity::{cascade_metrics, quadrant, InfectivityError, QUADRANT_HIGH, QUADRANT_LOW};
use crate::ingest::{
    load_cascades, load_friend_lists, load_tweet_stream, save_cascades, write_friend_lists,
    write_tweet_stream, IngestError,
};
use crate::model::{Cascade, CascadeMetrics, ModelError};
use crate::nullmodel::{bootstrap_column_means, shuffle_replicates, NullModelError, Seed, DEFAULT_BOOTSTRAP_SAMPLES};
use crate::stats::{
    self, fit_exponential_saturation, fit_polynomial_anova, kde, spearman, wilcoxon_signed_rank,
    StatsError, DEFAULT_ALPHA, DEFAULT_KDE_POINTS, DEFAULT_MAX_ORDER,
};
use crate::synth::{generate, SynthConfig, SynthError, Topology};
use crate::tables::{self, fmt_g, CsvOut, MetricsRow, TableError};

pub const LOG_ENV: &str = "CASCADE_FORGE_LOG";

pub const TWEETS_FILE: &str = "tweets.jsonl";
pub const FRIENDS_FILE: &str = "friends.tsv";
pub const TRUTH_FILE: &str = "truth.txt";
pub const CASCADES_FILE: &str = "cascades.jsonl";
pub const COORDINATION_FILE: &str = "coordination.csv";
pub const LABELED_FILE: &str = "labeled_cascades.jsonl";
pub const METRICS_FILE: &str = "metrics.csv";
pub const NODES_FILE: &str = "nodes.csv";
pub const NULL_METRICS_FILE: &str = "null_metrics.csv";
pub const BOOTSTRAP_FILE: &str = "bootstrap_stats.csv";
pub const KDE_FILE: &str = "kde.csv";
pub const SPEARMAN_FILE: &str = "spearman.csv";
pub const HEATMAP_FILE: &str = "heatmap.csv";
pub const NULL_HEATMAP_FILE: &str = "null_heatmap.csv";
pub const FITS_FILE: &str = "fits.json";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Ingest(#[from] IngestError),
    #[error(transparent)]
    Build(#[from] CascadeError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Infectivity(#[from] InfectivityError),
    #[error(transparent)]
    NullModel(#[from] NullModelError),
    #[error(transparent)]
    Stats(#[from] StatsError),
    #[error(transparent)]
    Synth(#[from] SynthError),
    #[error(transparent)]
    Table(#[from] TableError),
    #[error("thread pool: {0}")]
    Pool(#[from] rayon::ThreadPoolBuildError),
}

#[derive(Debug, Parser)]
#[command(name = "cascade-forge", version, about = "Retweet cascade reconstruction and coordination analytics")]
pub struct Cli {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// Tweet archive (JSON lines).
    #[arg(long, global = true)]
    pub tweets: Option<PathBuf>,
    /// Friend lists (`user<TAB>friend friend ...`).
    #[arg(long, global = true)]
    pub friends: Option<PathBuf>,
    /// Directory for stage inputs and outputs.
    #[arg(long, global = true, default_value = ".")]
    pub out: PathBuf,
    /// Percentage of the strongest similarity edges kept.
    #[arg(long, global = true, default_value_t = crate::coordination::DEFAULT_PERCENTILE)]
    pub percentile: f64,
    #[arg(long = "bootstrap-n", global = true, default_value_t = DEFAULT_BOOTSTRAP_SAMPLES)]
    pub bootstrap_n: usize,
    #[arg(long, global = true, default_value_t = 7)]
    pub seed: u64,
    /// Worker threads; defaults to the number of CPUs.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Malformed tweet lines tolerated before giving up.
    #[arg(long = "max-bad-lines", global = true, default_value_t = 0)]
    pub max_bad_lines: usize,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Generate a synthetic archive with a planted coordinated cohort.
    Synth(SynthArgs),
    /// Reconstruct cascades from tweets and friend lists.
    Build,
    /// Label coordinated accounts from co-retweet similarity.
    Coord,
    /// Label cascades and compute per-cascade metrics.
    Metrics,
    /// Recompute metrics on label-shuffled replicates.
    Null {
        #[arg(long, default_value_t = 100)]
        replicates: usize,
    },
    /// Bootstrap comparisons, densities, correlations and heatmaps.
    Stats,
    /// Fit edge-type fractions against incidence.
    Fit {
        /// Fit an `x,y` CSV instead of `metrics.csv`.
        #[arg(long)]
        points: Option<PathBuf>,
        #[arg(long = "max-order", default_value_t = DEFAULT_MAX_ORDER)]
        max_order: usize,
    },
}

#[derive(Debug, Clone, Args)]
pub struct SynthArgs {
    #[arg(long, default_value_t = 1000)]
    pub users: usize,
    #[arg(long, default_value_t = 200)]
    pub cascades: usize,
    /// Planted cohort size.
    #[arg(long, default_value_t = 10)]
    pub cohort: usize,
    /// Original tweets the cohort co-retweets.
    #[arg(long, default_value_t = 50)]
    pub pool: usize,
    /// Probability that any ordered user pair is a follow.
    #[arg(long = "follow-prob")]
    pub follow_prob: Option<f64>,
    /// Power-law out-degree exponent (replaces Erdős–Rényi).
    #[arg(long = "power-law")]
    pub power_law: Option<f64>,
    #[arg(long = "coord-delay")]
    pub coord_delay: Option<f64>,
    #[arg(long = "noncoord-delay")]
    pub noncoord_delay: Option<f64>,
}

/// Validated settings shared by every stage.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub tweets: Option<PathBuf>,
    pub friends: Option<PathBuf>,
    pub out: PathBuf,
    pub percentile: f64,
    pub bootstrap_n: usize,
    pub seed: Seed,
    pub jobs: usize,
    pub max_bad_lines: usize,
}

impl RunConfig {
    pub fn from_args(a: &CommonArgs) -> Result<Self, CliError> {
        let jobs = a
            .jobs
            .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
        if jobs == 0 {
            return Err(CliError::Config("--jobs must be at least 1".into()));
        }
        if !(a.percentile > 0.0 && a.percentile <= 100.0) {
            return Err(CliError::Config(format!("--percentile must be in (0, 100], got {}", a.percentile)));
        }
        Ok(Self {
            tweets: a.tweets.clone(),
            friends: a.friends.clone(),
            out: a.out.clone(),
            percentile: a.percentile,
            bootstrap_n: a.bootstrap_n,
            seed: Seed(a.seed),
            jobs,
            max_bad_lines: a.max_bad_lines,
        })
    }

    fn out_file(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }

    fn tweets(&self) -> Result<&Path, CliError> {
        existing(self.tweets.as_deref(), "--tweets")
    }

    fn friends(&self) -> Result<&Path, CliError> {
        existing(self.friends.as_deref(), "--friends")
    }
}

fn existing<'a>(p: Option<&'a Path>, flag: &str) -> Result<&'a Path, CliError> {
    let p = p.ok_or_else(|| CliError::Config(format!("{flag} is required")))?;
    if !p.exists() {
        return Err(CliError::Config(format!("{flag}: {} does not exist", p.display())));
    }
    Ok(p)
}

fn input(cfg: &RunConfig, name: &str) -> Result<PathBuf, CliError> {
    let p = cfg.out_file(name);
    if !p.exists() {
        return Err(CliError::Config(format!(
            "{} not found; run the stage that produces it first",
            p.display()
        )));
    }
    Ok(p)
}

pub fn run(cli: &Cli) -> Result<(), CliError> {
    let cfg = RunConfig::from_args(&cli.common)?;
    fs::create_dir_all(&cfg.out).map_err(|source| CliError::Io {
        path: cfg.out.clone(),
        source,
    })?;
    let pool = rayon::ThreadPoolBuilder::new().num_threads(cfg.jobs).build()?;
    pool.install(|| match &cli.command {
        Command::Synth(args) => cmd_synth(&cfg, args),
        Command::Build => cmd_build(&cfg),
        Command::Coord => cmd_coord(&cfg),
        Command::Metrics => cmd_metrics(&cfg),
        Command::Null { replicates } => cmd_null(&cfg, *replicates),
        Command::Stats => cmd_stats(&cfg),
        Command::Fit { points, max_order } => cmd_fit(&cfg, points.as_deref(), *max_order),
    })
}

pub fn cmd_synth(cfg: &RunConfig, args: &SynthArgs) -> Result<(), CliError> {
    if args.users == 0 {
        return Err(CliError::Config("--users must be positive".into()));
    }
    let mut sc = SynthConfig {
        n_users: args.users,
        n_cascades: args.cascades,
        coordinated_fraction: args.cohort as f64 / args.users as f64,
        pool_size: args.pool,
        seed: cfg.seed,
        ..SynthConfig::default()
    };
    if let Some(p) = args.follow_prob {
        sc.topology = Topology::ErdosRenyi { follow_prob: p };
    }
    if let Some(exponent) = args.power_law {
        sc.topology = Topology::PowerLaw {
            exponent,
            max_degree: args.users - 1,
        };
    }
    if let Some(d) = args.coord_delay {
        sc.delay_scale_coord = d;
    }
    if let Some(d) = args.noncoord_delay {
        sc.delay_scale_noncoord = d;
    }
    let out = generate(&sc)?;
    write_tweet_stream(&cfg.out_file(TWEETS_FILE), &out.tweets)?;
    write_friend_lists(&cfg.out_file(FRIENDS_FILE), &out.friends)?;
    let truth: String = out.truth.iter().map(|u| format!("{u}\n")).collect();
    tables::write_text(&cfg.out_file(TRUTH_FILE), &truth)?;
    println!(
        "synth: {} tweets, {} users with friend lists, {} planted",
        out.tweets.len(),
        out.friends.len(),
        out.truth.len()
    );
    Ok(())
}

pub fn cmd_build(cfg: &RunConfig) -> Result<(), CliError> {
    let tweets = cfg.tweets()?;
    let friends_path = cfg.friends()?;
    let stream = load_tweet_stream(tweets, cfg.max_bad_lines)?;
    let friends = load_friend_lists(friends_path)?;
    if stream.records.is_empty() {
        log::warn!("{}: no tweets; writing an empty cascade store", tweets.display());
    }
    let (groups, report) = group_retweets(&stream.records);
    if report.orphans + report.self_retweets + report.before_original > 0 {
        log::warn!(
            "skipped {} orphan, {} self and {} premature retweets",
            report.orphans,
            report.self_retweets,
            report.before_original
        );
    }
    let built = build_all(&groups, &friends)?;
    let dups: usize = built.iter().map(|b| b.dropped_duplicates).sum();
    if dups > 0 {
        log::info!("dropped {dups} duplicate retweets");
    }
    let cascades: Vec<Cascade> = built.into_iter().map(|b| b.cascade).collect();
    save_cascades(&cascades, &cfg.out_file(CASCADES_FILE))?;
    let retweeters: usize = cascades.iter().map(|c| c.len() - 1).sum();
    let mean = if cascades.is_empty() {
        0.0
    } else {
        retweeters as f64 / cascades.len() as f64
    };
    println!("cascades: {}, mean retweeters per cascade: {}", cascades.len(), fmt_g(mean));
    Ok(())
}

pub fn cmd_coord(cfg: &RunConfig) -> Result<(), CliError> {
    let stream = load_tweet_stream(cfg.tweets()?, cfg.max_bad_lines)?;
    let (groups, _) = group_retweets(&stream.records);
    let events: Vec<_> = groups.into_iter().flat_map(|g| g.retweets).collect();
    let vectors = build_user_vectors(&events);
    let labeling = label_coordinated(&vectors, cfg.percentile)?;
    let users: Vec<_> = vectors.iter().map(|v| v.user.clone()).collect();
    tables::write_coordination(&cfg.out_file(COORDINATION_FILE), &users, &labeling.coordinated, |u| {
        labeling.max_similarity.get(u).copied().unwrap_or(0.0)
    })?;
    println!(
        "coordination: {} users, {} similarity edges kept, {} coordinated",
        users.len(),
        labeling.retained.len(),
        labeling.coordinated.len()
    );
    Ok(())
}

fn metrics_rows(cascades: &[Cascade], replicate: Option<usize>) -> Result<Vec<MetricsRow>, InfectivityError> {
    cascades
        .par_iter()
        .map(|c| {
            let metrics = cascade_metrics(c)?;
            let quadrant = quadrant(metrics.c_ir, metrics.ctnc_ir, QUADRANT_LOW, QUADRANT_HIGH);
            Ok(MetricsRow {
                metrics,
                quadrant,
                replicate,
            })
        })
        .collect()
}

pub fn cmd_metrics(cfg: &RunConfig) -> Result<(), CliError> {
    let cascades = load_cascades(&input(cfg, CASCADES_FILE)?)?;
    let coordinated: BTreeSet<_> = tables::read_coordination(&input(cfg, COORDINATION_FILE)?)?;
    let labeled: Vec<Cascade> = cascades
        .par_iter()
        .map(|c| c.with_labels(|u| coordinated.contains(u)))
        .collect();
    save_cascades(&labeled, &cfg.out_file(LABELED_FILE))?;
    let rows = metrics_rows(&labeled, None)?;
    tables::write_metrics(&cfg.out_file(METRICS_FILE), &rows, false)?;
    let nodes: Vec<_> = labeled
        .iter()
        .map(|c| (c.root_tweet().clone(), node_features(c)))
        .collect();
    tables::write_nodes(&cfg.out_file(NODES_FILE), &nodes)?;
    let with_c = rows.iter().filter(|r| r.metrics.s_c > 0).count();
    println!("metrics: {} cascades, {} with coordinated accounts", rows.len(), with_c);
    Ok(())
}

const NULL_SEED_TAG: u64 = 1;

pub fn cmd_null(cfg: &RunConfig, replicates: usize) -> Result<(), CliError> {
    let labeled = load_cascades(&input(cfg, LABELED_FILE)?)?;
    let reps = shuffle_replicates(&labeled, replicates, cfg.seed.derive(NULL_SEED_TAG));
    let mut rows = Vec::with_capacity(replicates * labeled.len());
    for (r, rep) in reps.iter().enumerate() {
        rows.extend(metrics_rows(rep, Some(r))?);
    }
    tables::write_metrics(&cfg.out_file(NULL_METRICS_FILE), &rows, true)?;
    println!("null model: {replicates} replicates of {} cascades", labeled.len());
    Ok(())
}

const BOOTSTRAP_SEED_TAG: u64 = 10;
const NODE_FEATURES: [&str; 3] = ["level", "action_delay_min", "out_degree"];
const EDGE_FRACTIONS: [&str; 3] = ["cc_fraction", "cn_fraction", "nn_fraction"];

fn edge_fractions(m: &CascadeMetrics) -> Option<[f64; 3]> {
    (m.m > 0).then(|| {
        let t = m.m as f64;
        [m.m_cc as f64 / t, m.m_cn as f64 / t, m.m_nn as f64 / t]
    })
}

pub fn cmd_stats(cfg: &RunConfig) -> Result<(), CliError> {
    let nodes = tables::read_nodes(&input(cfg, NODES_FILE)?)?;
    let metrics = tables::read_metrics(&input(cfg, METRICS_FILE)?)?;
    let null_path = cfg.out_file(NULL_METRICS_FILE);
    let null = if null_path.exists() {
        Some(tables::read_metrics(&null_path)?)
    } else {
        log::warn!("{} not found; skipping null-model outputs", null_path.display());
        None
    };

    let feature = |i: usize, coordinated: bool| -> Vec<f64> {
        nodes
            .iter()
            .filter(|n| n.3 == coordinated)
            .map(|n| [n.0, n.1, n.2][i])
            .collect()
    };

    // bootstrap comparison of node features
    let mut out = CsvOut::create(
        &cfg.out_file(BOOTSTRAP_FILE),
        &[
            "feature",
            "n_coordinated",
            "n_non_coordinated",
            "mean_coordinated",
            "mean_non_coordinated",
            "bootstrap_n",
            "bootstrap_mean_coordinated",
            "bootstrap_mean_non_coordinated",
            "wilcoxon_statistic",
            "p_value",
            "exact",
        ],
    )?;
    let groups = [true, false].map(|coordinated| {
        let cols: Vec<Vec<f64>> = (0..NODE_FEATURES.len()).map(|i| feature(i, coordinated)).collect();
        cols
    });
    if groups.iter().any(|g| g[0].is_empty()) || cfg.bootstrap_n == 0 {
        log::warn!("a node group is empty; no bootstrap comparison");
    } else {
        // one resample of nodes per replicate, shared by every feature
        let boot = groups
            .iter()
            .enumerate()
            .map(|(g, cols)| {
                let refs: Vec<&[f64]> = cols.iter().map(Vec::as_slice).collect();
                bootstrap_column_means(&refs, cfg.bootstrap_n, cfg.seed.derive(BOOTSTRAP_SEED_TAG + g as u64))
            })
            .collect::<Result<Vec<_>, _>>()?;
        for (i, name) in NODE_FEATURES.iter().enumerate() {
            let (c, n) = (&groups[0][i], &groups[1][i]);
            let (bc, bn) = (&boot[0][i], &boot[1][i]);
            let (stat, p, exact) = match wilcoxon_signed_rank(bc, bn) {
                Ok(w) => (fmt_g(w.statistic), fmt_g(w.p_two_sided), w.exact.to_string()),
                Err(e) => {
                    log::warn!("{name}: {e}");
                    ("nan".into(), "nan".into(), "false".into())
                }
            };
            out.row([
                name.to_string(),
                c.len().to_string(),
                n.len().to_string(),
                fmt_g(stats::mean(c)),
                fmt_g(stats::mean(n)),
                cfg.bootstrap_n.to_string(),
                fmt_g(stats::mean(bc)),
                fmt_g(stats::mean(bn)),
                stat,
                p,
                exact,
            ])?;
        }
    }
    out.finish()?;

    // densities
    let mut out = CsvOut::create(&cfg.out_file(KDE_FILE), &["feature", "group", "x", "density"])?;
    let mut emit = |feature: &str, group: &str, values: &[f64]| -> Result<(), CliError> {
        match kde(values, DEFAULT_KDE_POINTS) {
            Ok(curve) => {
                for (x, d) in curve.xs.iter().zip(&curve.density) {
                    out.row([feature, group, &fmt_g(*x), &fmt_g(*d)])?;
                }
            }
            Err(e) => log::warn!("kde {feature}/{group}: {e}"),
        }
        Ok(())
    };
    for (i, name) in NODE_FEATURES.iter().enumerate() {
        emit(name, "coordinated", &feature(i, true))?;
        emit(name, "non_coordinated", &feature(i, false))?;
    }
    let fractions = |rows: &[MetricsRow], k: usize| -> Vec<f64> {
        rows.iter().filter_map(|r| edge_fractions(&r.metrics)).map(|f| f[k]).collect()
    };
    for (k, name) in EDGE_FRACTIONS.iter().enumerate() {
        emit(name, "observed", &fractions(&metrics, k))?;
        if let Some(null) = &null {
            emit(name, "null", &fractions(null, k))?;
        }
    }
    out.finish()?;

    // rank correlations between cascade measures
    let columns: [(&str, fn(&CascadeMetrics) -> f64); 6] = [
        ("s", |m| m.s as f64),
        ("m", |m| m.m as f64),
        ("h_prime", |m| m.h_prime as f64),
        ("incidence", |m| m.incidence),
        ("c_ir", |m| m.c_ir),
        ("ctnc_ir", |m| m.ctnc_ir),
    ];
    let mut out = CsvOut::create(&cfg.out_file(SPEARMAN_FILE), &["x", "y", "n", "rho"])?;
    for (i, (xa, fa)) in columns.iter().enumerate() {
        for (ya, fb) in &columns[i + 1..] {
            let x: Vec<f64> = metrics.iter().map(|r| fa(&r.metrics)).collect();
            let y: Vec<f64> = metrics.iter().map(|r| fb(&r.metrics)).collect();
            let rho = spearman(&x, &y).map_or_else(|_| "nan".to_string(), fmt_g);
            out.row([*xa, *ya, &x.len().to_string(), &rho])?;
        }
    }
    out.finish()?;

    write_heatmap(&cfg.out_file(HEATMAP_FILE), &metrics)?;
    if let Some(null) = &null {
        write_heatmap(&cfg.out_file(NULL_HEATMAP_FILE), null)?;
    }
    println!("stats: {} nodes, {} cascades", nodes.len(), metrics.len());
    Ok(())
}

pub const HEATMAP_Y_BINS: usize = 10;

/// Lower edge of the power-of-two bin holding `x` (0 stays 0).
pub fn log2_bin(x: usize) -> usize {
    if x == 0 {
        0
    } else {
        1 << x.ilog2()
    }
}

pub fn incidence_bin(incidence: f64) -> usize {
    ((incidence * HEATMAP_Y_BINS as f64).floor() as usize).min(HEATMAP_Y_BINS - 1)
}

/// Counts keyed by (variable, x bin, y bin).
pub fn heatmap_counts(rows: &[MetricsRow]) -> BTreeMap<(&'static str, usize, usize), usize> {
    let mut counts = BTreeMap::new();
    for r in rows {
        let m = &r.metrics;
        let y = incidence_bin(m.incidence);
        for (var, x) in [
            ("edges", log2_bin(m.m)),
            ("height", m.h_prime as usize),
            ("size", log2_bin(m.s)),
        ] {
            *counts.entry((var, x, y)).or_insert(0) += 1;
        }
    }
    counts
}

fn write_heatmap(path: &Path, rows: &[MetricsRow]) -> Result<(), CliError> {
    let mut out = CsvOut::create(path, &["variable", "x_bin", "y_bin", "count"])?;
    for ((var, x, y), count) in heatmap_counts(rows) {
        let y_lo = y as f64 / HEATMAP_Y_BINS as f64;
        out.row([var, &x.to_string(), &fmt_g(y_lo), &count.to_string()])?;
    }
    out.finish()?;
    Ok(())
}

#[derive(Serialize)]
struct FitEntry {
    target: String,
    n: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    fit: Option<crate::model::FitResult>,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
}

fn fit_entry(target: &str, n: usize, r: Result<crate::model::FitResult, StatsError>) -> FitEntry {
    match r {
        Ok(fit) => FitEntry {
            target: target.into(),
            n,
            fit: Some(fit),
            error: None,
        },
        Err(e) => {
            log::warn!("fit {target}: {e}");
            FitEntry {
                target: target.into(),
                n,
                fit: None,
                error: Some(e.to_string()),
            }
        }
    }
}

pub fn cmd_fit(cfg: &RunConfig, points: Option<&Path>, max_order: usize) -> Result<(), CliError> {
    let entries = if let Some(p) = points {
        let (x, y) = tables::read_points(p)?;
        vec![
            fit_entry("polynomial", x.len(), fit_polynomial_anova(&x, &y, max_order, DEFAULT_ALPHA)),
            fit_entry("exponential_saturation", x.len(), fit_exponential_saturation(&x, &y)),
        ]
    } else {
        let rows = tables::read_metrics(&input(cfg, METRICS_FILE)?)?;
        let mut x = Vec::new();
        let mut f: [Vec<f64>; 3] = Default::default();
        for r in &rows {
            if let Some(fr) = edge_fractions(&r.metrics) {
                x.push(r.metrics.incidence);
                for k in 0..3 {
                    f[k].push(fr[k]);
                }
            }
        }
        let n = x.len();
        vec![
            fit_entry("cn_fraction", n, fit_exponential_saturation(&x, &f[1])),
            fit_entry("cc_fraction", n, fit_polynomial_anova(&x, &f[0], max_order, DEFAULT_ALPHA)),
            fit_entry("nn_fraction", n, fit_polynomial_anova(&x, &f[2], max_order, DEFAULT_ALPHA)),
        ]
    };
    let mut text = serde_json::to_string_pretty(&entries).expect("fit results serialize");
    text.push('\n');
    tables::write_text(&cfg.out_file(FITS_FILE), &text)?;
    for e in &entries {
        match &e.fit {
            Some(fit) => println!("fit {}: {:?}", e.target, fit.model_kind),
            None => println!("fit {}: failed", e.target),
        }
    }
    Ok(())
}

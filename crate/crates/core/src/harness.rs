//! Monte Carlo orchestration: repeated runs, parameter sweeps, empirical
//! minimum-node search and spatial snapshot export.
//!
//! Seeding: run `i` of an experiment uses `base_seed + i`. A sweep cell keyed
//! by `(n_nodes, target_duration)` uses the base `base_seed + 10⁶ · key`,
//! where `key` is [`cell_key`]. The key depends only on the cell's own
//! values, so adding or reordering cells never changes another cell, and all
//! models at the same `(n, t_d)` share initial deployments and targets.

use rayon::prelude::*;
use thiserror::Error;

use crate::analysis::{min_nodes_mobile, AnalysisError, CoverageParams};
use crate::engine::{drive_nodes, node_snapshots, run_single, EngineError, RunResult, SimConfig};
use crate::geometry::{distance, Point2};
use crate::mobility::MobilityModel;

/// Seed spacing between sweep cells.
pub const CELL_SEED_STRIDE: u64 = 1_000_000;

/// Histogram bin width for nearest-neighbor distances (m).
pub const NN_BIN_WIDTH: f64 = 50.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HarnessError {
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
    #[error("an experiment needs at least one run")]
    NoRuns,
    #[error("sweep axis `{0}` is empty")]
    EmptyAxis(&'static str),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Experiment {
    pub base_config: SimConfig,
    pub runs: u64,
    pub base_seed: u64,
}

impl Experiment {
    pub fn new(base_config: SimConfig, runs: u64, base_seed: u64) -> Self {
        Experiment { base_config, runs, base_seed }
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.runs == 0 {
            return Err(HarnessError::NoRuns);
        }
        self.base_config.validate()?;
        Ok(())
    }

    pub fn seed_for(&self, run: u64) -> u64 {
        self.base_seed.wrapping_add(run)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    DetectionProbability,
    TrackingPercentage,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Aggregate {
    pub mean: f64,
    pub std_error: f64,
    pub runs: u64,
    pub metric: Metric,
}

impl Aggregate {
    /// Bernoulli estimate from per-run detection flags.
    pub fn detection(flags: impl IntoIterator<Item = bool>) -> Self {
        let (mut hits, mut runs) = (0u64, 0u64);
        for f in flags {
            runs += 1;
            hits += f as u64;
        }
        let mean = if runs == 0 { 0.0 } else { hits as f64 / runs as f64 };
        let std_error = if runs == 0 { 0.0 } else { (mean * (1.0 - mean) / runs as f64).sqrt() };
        Aggregate { mean, std_error, runs, metric: Metric::DetectionProbability }
    }

    /// Sample mean and standard error of per-run tracked fractions.
    pub fn tracking(fractions: &[f64]) -> Self {
        let (mean, std_error) = mean_and_std_error(fractions);
        Aggregate { mean, std_error, runs: fractions.len() as u64, metric: Metric::TrackingPercentage }
    }
}

/// Mean and `s/√n` with the `n − 1` sample deviation; zero error for `n < 2`.
pub fn mean_and_std_error(xs: &[f64]) -> (f64, f64) {
    let n = xs.len();
    if n == 0 {
        return (0.0, 0.0);
    }
    let mean = xs.iter().sum::<f64>() / n as f64;
    if n < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}

/// Runs every seed of `exp` and returns `(detection, tracking)` aggregates.
/// Runs execute in parallel; results are reduced in run order.
pub fn monte_carlo(exp: &Experiment) -> Result<(Aggregate, Aggregate), HarnessError> {
    let results = run_all(exp)?;
    Ok(aggregate(&results))
}

pub fn run_all(exp: &Experiment) -> Result<Vec<RunResult>, HarnessError> {
    exp.validate()?;
    let results = (0..exp.runs)
        .into_par_iter()
        .map(|i| run_single(&exp.base_config, exp.seed_for(i)))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(results)
}

pub fn aggregate(results: &[RunResult]) -> (Aggregate, Aggregate) {
    let detection = Aggregate::detection(results.iter().map(|r| r.detected));
    let fractions: Vec<f64> = results.iter().map(RunResult::tracked_fraction).collect();
    (detection, Aggregate::tracking(&fractions))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepGrid {
    pub n_values: Vec<usize>,
    pub td_values: Vec<f64>,
    pub models: Vec<MobilityModel>,
}

impl SweepGrid {
    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.n_values.is_empty() {
            return Err(HarnessError::EmptyAxis("n_values"));
        }
        if self.td_values.is_empty() {
            return Err(HarnessError::EmptyAxis("td_values"));
        }
        if self.models.is_empty() {
            return Err(HarnessError::EmptyAxis("models"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub model: MobilityModel,
    pub n_nodes: usize,
    pub target_duration: f64,
    pub detection: Aggregate,
    pub tracking: Aggregate,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// 32-bit key of a `(n_nodes, target_duration)` cell.
pub fn cell_key(n_nodes: usize, target_duration: f64) -> u64 {
    splitmix64(splitmix64(n_nodes as u64) ^ target_duration.to_bits()) >> 32
}

pub fn cell_seed(base_seed: u64, n_nodes: usize, target_duration: f64) -> u64 {
    base_seed.wrapping_add(CELL_SEED_STRIDE.wrapping_mul(cell_key(n_nodes, target_duration)))
}

/// The experiment for one cell derived from `template`.
pub fn cell_experiment(template: &Experiment, model: MobilityModel, n_nodes: usize, target_duration: f64) -> Experiment {
    let mut config = template.base_config.clone();
    config.mobility.model = model;
    config.n_nodes = n_nodes;
    config.target.duration = target_duration;
    Experiment::new(config, template.runs, cell_seed(template.base_seed, n_nodes, target_duration))
}

/// One row per `(model, n, t_d)` cell, ordered by model name, then `n`, then `t_d`.
/// Every cell is validated before any run starts.
pub fn sweep(grid: &SweepGrid, template: &Experiment) -> Result<Vec<SweepRow>, HarnessError> {
    grid.validate()?;
    let mut cells = Vec::new();
    for &model in &grid.models {
        for &n in &grid.n_values {
            for &td in &grid.td_values {
                let exp = cell_experiment(template, model, n, td);
                exp.validate()?;
                cells.push((model, n, td, exp));
            }
        }
    }
    cells.sort_by(|a, b| a.0.name().cmp(b.0.name()).then(a.1.cmp(&b.1)).then(a.2.total_cmp(&b.2)));
    cells.dedup_by(|a, b| a.0 == b.0 && a.1 == b.1 && a.2 == b.2);

    cells
        .into_iter()
        .map(|(model, n_nodes, target_duration, exp)| {
            let (detection, tracking) = monte_carlo(&exp)?;
            Ok(SweepRow { model, n_nodes, target_duration, detection, tracking })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MinNodes {
    Found(usize),
    NotAchievable,
}

/// Smallest node count in `[analytic bound, n_max]` whose Monte Carlo
/// detection mean reaches `p_d_target`, scanning upward one node at a time.
/// The template's model and target duration are kept; each count is seeded
/// like the matching sweep cell.
pub fn find_min_nodes_empirical(p_d_target: f64, template: &Experiment, n_max: usize) -> Result<MinNodes, HarnessError> {
    let cfg = &template.base_config;
    let params = CoverageParams::new(cfg.arena.area(), cfg.mobility.range, cfg.mobility.effective_speed(), cfg.target.duration)?;
    let start = min_nodes_mobile(p_d_target, &params)? as usize;
    template.validate()?;
    for n in start..=n_max {
        let exp = cell_experiment(template, cfg.mobility.model, n, cfg.target.duration);
        let (detection, _) = monte_carlo(&exp)?;
        if detection.mean >= p_d_target {
            return Ok(MinNodes::Found(n));
        }
    }
    Ok(MinNodes::NotAchievable)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PositionRecord {
    pub time: f64,
    pub node_index: usize,
    pub pos: Point2,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HistogramBin {
    pub left: f64,
    pub right: f64,
    pub count: u64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SnapshotExport {
    /// Node positions of run 0 at each requested time.
    pub positions: Vec<PositionRecord>,
    /// Nearest-neighbor distances pooled over all runs at the latest requested time.
    pub histogram: Vec<HistogramBin>,
    /// Mean nearest-neighbor distance of each run at the latest requested time.
    pub run_mean_nn: Vec<f64>,
}

impl SnapshotExport {
    /// Pooled mean nearest-neighbor distance and its standard error over runs.
    pub fn mean_nn(&self) -> (f64, f64) {
        mean_and_std_error(&self.run_mean_nn)
    }
}

/// Distance from each point to its nearest other point.
pub fn nearest_neighbor_distances(points: &[Point2]) -> Vec<f64> {
    points
        .iter()
        .enumerate()
        .map(|(i, &p)| {
            points
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, &q)| distance(p, q))
                .fold(f64::INFINITY, f64::min)
        })
        .filter(|d| d.is_finite())
        .collect()
}

/// Empty 50 m bins spanning `[0, upper)`, with `upper` rounded up to a whole bin.
pub fn empty_histogram(upper: f64) -> Vec<HistogramBin> {
    let bins = (upper / NN_BIN_WIDTH).ceil().max(1.0) as usize;
    (0..bins)
        .map(|k| HistogramBin { left: k as f64 * NN_BIN_WIDTH, right: (k + 1) as f64 * NN_BIN_WIDTH, count: 0 })
        .collect()
}

fn add_to_histogram(hist: &mut [HistogramBin], d: f64) {
    let k = ((d / NN_BIN_WIDTH).floor() as usize).min(hist.len() - 1);
    hist[k].count += 1;
}

pub fn export_snapshots(exp: &Experiment, times: &[f64]) -> Result<SnapshotExport, HarnessError> {
    exp.validate()?;
    if times.is_empty() {
        return Ok(SnapshotExport::default());
    }
    let cfg = &exp.base_config;
    let positions = node_snapshots(cfg, exp.seed_for(0), times)?
        .into_iter()
        .flat_map(|s| {
            let time = s.time;
            s.positions.into_iter().enumerate().map(move |(node_index, pos)| PositionRecord { time, node_index, pos })
        })
        .collect();

    let last = times.iter().copied().fold(0.0, f64::max);
    let last_tick = cfg.ticks_for(last);
    let per_run: Vec<Vec<f64>> = (0..exp.runs)
        .into_par_iter()
        .map(|i| {
            let mut nn = Vec::new();
            drive_nodes(
                cfg,
                exp.seed_for(i),
                last_tick,
                |tick, nodes| {
                    if tick == last_tick {
                        let pts: Vec<Point2> = nodes.iter().map(|n| n.pos).collect();
                        nn = nearest_neighbor_distances(&pts);
                    }
                },
                |_, _, _| {},
            )
            .map(|_| nn)
        })
        .collect::<Result<_, _>>()?;

    let mut histogram = empty_histogram(cfg.arena.diagonal());
    let mut run_mean_nn = Vec::with_capacity(per_run.len());
    for nn in &per_run {
        for &d in nn {
            add_to_histogram(&mut histogram, d);
        }
        if !nn.is_empty() {
            run_mean_nn.push(nn.iter().sum::<f64>() / nn.len() as f64);
        }
    }
    Ok(SnapshotExport { positions, histogram, run_mean_nn })
}

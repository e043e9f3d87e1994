//! One seeded scenario, run tick by tick.
//!
//! Each tick evaluates coverage at the tick boundary, then advances the
//! target, then the nodes. Node and target draw from separate random
//! streams derived from the run seed, so node trajectories do not depend on
//! the target kind and every mobility model starts from the same positions.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::geometry::{distance, seg_point_distance, Arena, Point2};
use crate::mobility::{advance_traced, init_nodes, MobilityError, MobilityParams, NodeState};
use crate::target::{advance_target, spawn_target, TargetError, TargetSpec, TargetStatus};

/// Random stream used for node initialization and motion.
pub const NODE_STREAM: u64 = 0;
/// Random stream used for target spawn and motion.
pub const TARGET_STREAM: u64 = 1;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EngineError {
    #[error(transparent)]
    Mobility(#[from] MobilityError),
    #[error(transparent)]
    Target(#[from] TargetError),
    #[error("time step must be positive and finite, got {0}")]
    InvalidDt(f64),
    #[error("time step {dt} s too coarse: nodes and target may close {closing} m per tick, limit is range/10 = {limit} m")]
    TooCoarse { dt: f64, closing: f64, limit: f64 },
    #[error("grid resolution {resolution} m must be positive and at most range/5 = {limit} m")]
    GridTooCoarse { resolution: f64, limit: f64 },
    #[error("time must be non-negative and finite, got {0}")]
    InvalidTime(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub arena: Arena,
    pub n_nodes: usize,
    pub mobility: MobilityParams,
    pub target: TargetSpec,
    /// Tick length (s).
    pub dt: f64,
    /// Times (s) at which node positions are recorded into the result.
    pub snapshot_times: Vec<f64>,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            arena: Arena::new(4000.0).expect("positive side"),
            n_nodes: 10,
            mobility: MobilityParams::default(),
            target: TargetSpec::default(),
            dt: 1.0,
            snapshot_times: Vec::new(),
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<(), EngineError> {
        self.mobility.validate()?;
        self.target.validate()?;
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(EngineError::InvalidDt(self.dt));
        }
        let closing = (self.mobility.effective_speed() + self.target.effective_speed()) * self.dt;
        let limit = self.mobility.range / 10.0;
        if closing > limit {
            return Err(EngineError::TooCoarse { dt: self.dt, closing, limit });
        }
        if let Some(&t) = self.snapshot_times.iter().find(|t| !(**t >= 0.0 && t.is_finite())) {
            return Err(EngineError::InvalidTime(t));
        }
        Ok(())
    }

    /// Node density `n / a²`.
    pub fn density(&self) -> f64 {
        self.n_nodes as f64 / self.arena.area()
    }

    pub fn ticks_for(&self, horizon: f64) -> u64 {
        (horizon / self.dt).round() as u64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub time: f64,
    pub positions: Vec<Point2>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub detected: bool,
    pub detection_time: Option<f64>,
    pub tracked_ticks: u64,
    pub event_ticks: u64,
    pub snapshots: Vec<Snapshot>,
}

impl RunResult {
    /// Fraction of the event's ticks during which the target was covered.
    pub fn tracked_fraction(&self) -> f64 {
        if self.event_ticks == 0 {
            0.0
        } else {
            self.tracked_ticks as f64 / self.event_ticks as f64
        }
    }
}

/// Independent node and target streams for one run.
pub fn run_streams(seed: u64) -> (ChaCha8Rng, ChaCha8Rng) {
    let mut nodes = ChaCha8Rng::seed_from_u64(seed);
    nodes.set_stream(NODE_STREAM);
    let mut target = ChaCha8Rng::seed_from_u64(seed);
    target.set_stream(TARGET_STREAM);
    (nodes, target)
}

/// True iff some node lies within the closed disc of radius `range` around `target`.
pub fn covered_now(nodes: &[NodeState], target: Point2, range: f64) -> bool {
    nodes.iter().any(|n| distance(n.pos, target) <= range)
}

pub fn run_single(config: &SimConfig, seed: u64) -> Result<RunResult, EngineError> {
    config.validate()?;
    let (mut node_rng, mut target_rng) = run_streams(seed);
    let mut nodes = init_nodes(config.n_nodes, &config.mobility, &config.arena, &mut node_rng);
    let mut target = spawn_target(&config.target, &config.arena, &mut target_rng);

    let mut pending = sorted_times(&config.snapshot_times);
    pending.reverse();
    let mut result = RunResult { detected: false, detection_time: None, tracked_ticks: 0, event_ticks: 0, snapshots: Vec::new() };

    let mut tick: u64 = 0;
    loop {
        let now = tick as f64 * config.dt;
        while let Some(&t) = pending.last() {
            if config.ticks_for(t) > tick {
                break;
            }
            result.snapshots.push(Snapshot { time: t, positions: nodes.iter().map(|n| n.pos).collect() });
            pending.pop();
        }

        result.event_ticks += 1;
        if covered_now(&nodes, target.pos, config.mobility.range) {
            result.tracked_ticks += 1;
            if !result.detected {
                result.detected = true;
                result.detection_time = Some(now);
            }
        }

        let status = advance_target(&mut target, &config.target, &config.arena, config.dt, &mut target_rng)?;
        advance_traced(&mut nodes, &config.mobility, &config.arena, config.dt, &mut node_rng, |_, _, _| {});
        tick += 1;
        if status == TargetStatus::Finished {
            break;
        }
    }
    Ok(result)
}

fn sorted_times(times: &[f64]) -> Vec<f64> {
    let mut v = times.to_vec();
    v.sort_by(f64::total_cmp);
    v
}

/// Runs node dynamics alone (no target) for `ticks` ticks using the same node
/// stream as [`run_single`]. `at_tick` sees the nodes at every tick boundary
/// `0..=ticks`; `on_leg` sees every straight leg travelled.
pub fn drive_nodes<T, L>(config: &SimConfig, seed: u64, ticks: u64, mut at_tick: T, mut on_leg: L) -> Result<(), EngineError>
where
    T: FnMut(u64, &[NodeState]),
    L: FnMut(usize, Point2, Point2),
{
    config.validate()?;
    let (mut node_rng, _) = run_streams(seed);
    let mut nodes = init_nodes(config.n_nodes, &config.mobility, &config.arena, &mut node_rng);
    at_tick(0, &nodes);
    for tick in 1..=ticks {
        advance_traced(&mut nodes, &config.mobility, &config.arena, config.dt, &mut node_rng, &mut on_leg);
        at_tick(tick, &nodes);
    }
    Ok(())
}

/// Node positions at each requested time, from the node-only dynamics.
pub fn node_snapshots(config: &SimConfig, seed: u64, times: &[f64]) -> Result<Vec<Snapshot>, EngineError> {
    if let Some(&t) = times.iter().find(|t| !(**t >= 0.0 && t.is_finite())) {
        return Err(EngineError::InvalidTime(t));
    }
    if times.is_empty() {
        return Ok(Vec::new());
    }
    let wanted: Vec<(f64, u64)> = times.iter().map(|&t| (t, config.ticks_for(t))).collect();
    let last = wanted.iter().map(|&(_, k)| k).max().unwrap_or(0);
    let mut out: Vec<Option<Snapshot>> = vec![None; wanted.len()];
    drive_nodes(
        config,
        seed,
        last,
        |tick, nodes| {
            for (slot, &(t, k)) in out.iter_mut().zip(&wanted) {
                if k == tick {
                    *slot = Some(Snapshot { time: t, positions: nodes.iter().map(|n| n.pos).collect() });
                }
            }
        },
        |_, _, _| {},
    )?;
    Ok(out.into_iter().flatten().collect())
}

/// Regular grid of sample points over the arena used for area estimates.
#[derive(Debug, Clone)]
pub struct CoverageGrid {
    per_axis: usize,
    spacing: f64,
    range: f64,
    covered: Vec<bool>,
}

impl CoverageGrid {
    /// Cell-centered grid with spacing as close to `resolution` as divides the side.
    pub fn new(arena: &Arena, resolution: f64, range: f64) -> Self {
        let per_axis = (arena.side() / resolution).round().max(1.0) as usize;
        let spacing = arena.side() / per_axis as f64;
        CoverageGrid { per_axis, spacing, range, covered: vec![false; per_axis * per_axis] }
    }

    fn coord(&self, i: usize) -> f64 {
        (i as f64 + 0.5) * self.spacing
    }

    fn index_span(&self, lo: f64, hi: f64) -> Option<(usize, usize)> {
        let first = ((lo / self.spacing) - 0.5).ceil().max(0.0);
        let last = ((hi / self.spacing) - 0.5).floor().min(self.per_axis as f64 - 1.0);
        (first <= last).then_some((first as usize, last as usize))
    }

    /// Marks every grid point within `range` of the segment `ab`.
    pub fn mark_segment(&mut self, a: Point2, b: Point2) {
        let r = self.range;
        let Some((i0, i1)) = self.index_span(a.x.min(b.x) - r, a.x.max(b.x) + r) else { return };
        let Some((j0, j1)) = self.index_span(a.y.min(b.y) - r, a.y.max(b.y) + r) else { return };
        for j in j0..=j1 {
            let y = self.coord(j);
            for i in i0..=i1 {
                let cell = j * self.per_axis + i;
                if !self.covered[cell] && seg_point_distance(a, b, Point2::new(self.coord(i), y)) <= r {
                    self.covered[cell] = true;
                }
            }
        }
    }

    pub fn fraction(&self) -> f64 {
        self.covered.iter().filter(|&&c| c).count() as f64 / self.covered.len() as f64
    }
}

/// Fraction of grid points that come within `range` of at least one node's
/// path during `[0, horizon]`. Each travelled leg is a capsule, so the swept
/// region is the exact union of discs along the path.
pub fn estimate_area_coverage(config: &SimConfig, horizon: f64, grid_resolution: f64, seed: u64) -> Result<f64, EngineError> {
    let limit = config.mobility.range / 5.0;
    if !(grid_resolution > 0.0 && grid_resolution <= limit) {
        return Err(EngineError::GridTooCoarse { resolution: grid_resolution, limit });
    }
    if !(horizon >= 0.0 && horizon.is_finite()) {
        return Err(EngineError::InvalidTime(horizon));
    }
    let mut grid = CoverageGrid::new(&config.arena, grid_resolution, config.mobility.range);
    let mut initial: Vec<Point2> = Vec::new();
    let mut legs: Vec<(Point2, Point2)> = Vec::new();
    drive_nodes(
        config,
        seed,
        config.ticks_for(horizon),
        |tick, nodes| {
            if tick == 0 {
                initial = nodes.iter().map(|n| n.pos).collect();
            }
        },
        |_, a, b| legs.push((a, b)),
    )?;
    for p in initial {
        grid.mark_segment(p, p);
    }
    for (a, b) in legs {
        grid.mark_segment(a, b);
    }
    Ok(grid.fraction())
}

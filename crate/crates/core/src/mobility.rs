//! Node kinematics for the static, random walk, random direction,
//! parallel-path and coverage-based (repulsion) mobility models.
//!
//! Nodes move at a fixed speed. Direction decisions are taken every
//! `step_length` meters of travel; boundary contact fires the model's
//! boundary rule and the rest of the tick's distance is travelled along
//! the new heading, so a node covers exactly `speed * dt` per tick.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use thiserror::Error;

use crate::geometry::{distance, redirect_into_interior, sample_uniform_point, Arena, Heading, Point2, BOUNDARY_EPS};

/// Below this separation the repulsive force stops growing.
pub const MIN_FORCE_DISTANCE: f64 = 1.0;

/// Resultants shorter than this are treated as exact cancellation.
pub const ZERO_RESULTANT: f64 = 1e-12;

/// Direction components smaller than this are treated as exactly zero when
/// computing boundary exits, so axis-parallel motion never "exits" through
/// the edge it slides along.
const AXIS_SNAP: f64 = 1e-12;

const MAX_LEGS_PER_MOVE: usize = 1024;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MobilityError {
    #[error("unknown mobility model `{0}`")]
    UnknownModel(String),
    #[error("speed must satisfy 0 <= speed <= max_speed, got speed={speed}, max_speed={max_speed}")]
    InvalidSpeed { speed: f64, max_speed: f64 },
    #[error("range must be positive, got {0}")]
    InvalidRange(f64),
    #[error("step length must be positive, got {0}")]
    InvalidStepLength(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum MobilityModel {
    Static,
    RandomWalk,
    RandomDirection,
    ParallelPath,
    CoverageBased,
}

impl MobilityModel {
    pub const ALL: [MobilityModel; 5] = [
        MobilityModel::Static,
        MobilityModel::RandomWalk,
        MobilityModel::RandomDirection,
        MobilityModel::ParallelPath,
        MobilityModel::CoverageBased,
    ];

    pub fn name(self) -> &'static str {
        match self {
            MobilityModel::Static => "static",
            MobilityModel::RandomWalk => "random_walk",
            MobilityModel::RandomDirection => "random_direction",
            MobilityModel::ParallelPath => "parallel_path",
            MobilityModel::CoverageBased => "coverage_based",
        }
    }

    pub fn is_mobile(self) -> bool {
        self != MobilityModel::Static
    }
}

impl fmt::Display for MobilityModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MobilityModel {
    type Err = MobilityError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let key = s.trim().to_ascii_lowercase().replace('-', "_");
        MobilityModel::ALL
            .into_iter()
            .find(|m| m.name() == key || m.name().replace('_', "") == key)
            .ok_or_else(|| MobilityError::UnknownModel(s.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MobilityParams {
    pub model: MobilityModel,
    /// Fixed node speed (m/s).
    pub speed: f64,
    /// Upper end of the speed distribution. Nodes currently run at `speed`.
    pub max_speed: f64,
    /// Sensing/communication radius (m); also the neighbor-discovery radius.
    pub range: f64,
    /// Travel distance between direction decisions (m).
    pub step_length: f64,
}

impl MobilityParams {
    pub fn new(model: MobilityModel, speed: f64, range: f64, step_length: f64) -> Result<Self, MobilityError> {
        let p = MobilityParams { model, speed, max_speed: speed, range, step_length };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), MobilityError> {
        if !(self.speed >= 0.0 && self.speed <= self.max_speed && self.max_speed.is_finite()) {
            return Err(MobilityError::InvalidSpeed { speed: self.speed, max_speed: self.max_speed });
        }
        if !(self.range > 0.0 && self.range.is_finite()) {
            return Err(MobilityError::InvalidRange(self.range));
        }
        if !(self.step_length > 0.0 && self.step_length.is_finite()) {
            return Err(MobilityError::InvalidStepLength(self.step_length));
        }
        Ok(())
    }

    /// Speed the node actually moves at (zero for static networks).
    pub fn effective_speed(&self) -> f64 {
        if self.model.is_mobile() {
            self.speed
        } else {
            0.0
        }
    }
}

impl Default for MobilityParams {
    fn default() -> Self {
        MobilityParams {
            model: MobilityModel::CoverageBased,
            speed: 5.0,
            max_speed: 5.0,
            range: 500.0,
            step_length: 50.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NodeState {
    pub pos: Point2,
    pub heading: Heading,
    pub dist_since_decision: f64,
    /// Lane coordinate (y) for parallel-path sweeps.
    pub sweep_axis_coord: f64,
}

/// What caused a direction decision.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecisionTrigger {
    /// `step_length` meters travelled since the last decision.
    Step,
    /// The node reached the arena boundary.
    Boundary,
}

/// Places `n` nodes uniformly in the arena. All positions are drawn before
/// any heading so that different models share initial positions for the
/// same random stream.
pub fn init_nodes<R: Rng + ?Sized>(n: usize, params: &MobilityParams, arena: &Arena, rng: &mut R) -> Vec<NodeState> {
    let positions: Vec<Point2> = (0..n).map(|_| sample_uniform_point(arena, rng)).collect();
    positions
        .into_iter()
        .map(|pos| {
            let heading = match params.model {
                MobilityModel::ParallelPath => {
                    if rng.gen_bool(0.5) {
                        Heading::new(0.0)
                    } else {
                        Heading::new(std::f64::consts::PI)
                    }
                }
                _ => Heading::uniform(rng),
            };
            NodeState { pos, heading, dist_since_decision: 0.0, sweep_axis_coord: pos.y }
        })
        .collect()
}

/// Direction of the resultant of a `1/range` momentum force along the
/// node's heading plus a `1/d` repulsion from every neighbor.
///
/// With no neighbors, or when the forces cancel, the heading is kept.
/// Separations under [`MIN_FORCE_DISTANCE`] are capped; an exactly
/// coincident neighbor pushes along a random direction.
pub fn resultant_direction<R: Rng + ?Sized>(node: &NodeState, neighbors: &[Point2], range: f64, rng: &mut R) -> Heading {
    if neighbors.is_empty() {
        return node.heading;
    }
    let mut resultant = node.heading.unit() * (1.0 / range);
    for &q in neighbors {
        let d = distance(q, node.pos);
        let away = if d == 0.0 { Heading::uniform(rng).unit() } else { (node.pos - q) * (1.0 / d) };
        resultant = resultant + away * (1.0 / d.max(MIN_FORCE_DISTANCE));
    }
    if resultant.norm() < ZERO_RESULTANT {
        return node.heading;
    }
    Heading::from_vector(resultant).unwrap_or(node.heading)
}

/// Positions in `positions` within `range` of `positions[index]`, excluding itself.
pub fn neighbors_within(index: usize, positions: &[Point2], range: f64) -> Vec<Point2> {
    let center = positions[index];
    positions
        .iter()
        .enumerate()
        .filter(|&(j, &q)| j != index && distance(center, q) <= range)
        .map(|(_, &q)| q)
        .collect()
}

/// New heading for `node` after a decision event.
///
/// `neighbors` is only read by the coverage-based model on a step decision.
pub fn decide_direction<R: Rng + ?Sized>(
    node: &NodeState,
    trigger: DecisionTrigger,
    params: &MobilityParams,
    neighbors: &[Point2],
    arena: &Arena,
    rng: &mut R,
) -> Heading {
    use MobilityModel::*;
    match (params.model, trigger) {
        (Static, _) => node.heading,
        (RandomWalk, DecisionTrigger::Step) => Heading::uniform(rng),
        (CoverageBased, DecisionTrigger::Step) => resultant_direction(node, neighbors, params.range, rng),
        (RandomDirection | ParallelPath, DecisionTrigger::Step) => node.heading,
        (ParallelPath, DecisionTrigger::Boundary) => node.heading.reversed(),
        (RandomWalk | RandomDirection | CoverageBased, DecisionTrigger::Boundary) => {
            redirect_into_interior(node.pos, arena, rng).unwrap_or_else(|_| node.heading.reversed())
        }
    }
}

fn exit_distance(arena: &Arena, p: Point2, heading: Heading) -> f64 {
    let u = heading.unit();
    let snap = |c: f64| if c.abs() < AXIS_SNAP { 0.0 } else { c };
    let side = arena.side();
    let along = |pos: f64, dir: f64| {
        if dir > 0.0 {
            ((side - pos) / dir).max(0.0)
        } else if dir < 0.0 {
            (pos / -dir).max(0.0)
        } else {
            f64::INFINITY
        }
    };
    along(p.x, snap(u.x)).min(along(p.y, snap(u.y)))
}

fn snap_to_boundary(arena: &Arena, p: Point2) -> Point2 {
    let side = arena.side();
    let snap = |c: f64| {
        if c <= 0.5 * BOUNDARY_EPS {
            0.0
        } else if c >= side - 0.5 * BOUNDARY_EPS {
            side
        } else {
            c
        }
    };
    Point2::new(snap(p.x), snap(p.y))
}

/// Moves `state` by `length` meters along its heading, firing `decide` at
/// every step-length crossing and boundary contact. Each straight leg is
/// reported to `on_leg`.
pub(crate) fn travel<D, L>(
    state: &mut NodeState,
    length: f64,
    step_length: f64,
    arena: &Arena,
    mut decide: D,
    mut on_leg: L,
) where
    D: FnMut(&NodeState, DecisionTrigger) -> Heading,
    L: FnMut(Point2, Point2),
{
    let mut remaining = length;
    for _ in 0..MAX_LEGS_PER_MOVE {
        if remaining <= 0.0 {
            break;
        }
        let to_step = (step_length - state.dist_since_decision).max(0.0);
        let to_exit = exit_distance(arena, state.pos, state.heading);
        let leg = remaining.min(to_step).min(to_exit);
        let reached_step = to_step <= leg;
        let reached_exit = to_exit <= leg;

        if leg > 0.0 {
            let from = state.pos;
            let mut to = arena.clamp(from + state.heading.unit() * leg);
            if reached_exit {
                to = snap_to_boundary(arena, to);
            }
            state.pos = to;
            state.dist_since_decision += leg;
            remaining -= leg;
            on_leg(from, to);
        }

        if reached_step {
            state.dist_since_decision = 0.0;
            state.heading = decide(state, DecisionTrigger::Step);
        } else if reached_exit {
            state.heading = decide(state, DecisionTrigger::Boundary);
        }
    }
}

/// Advances every node by one tick of length `dt`.
pub fn advance<R: Rng + ?Sized>(nodes: &mut [NodeState], params: &MobilityParams, arena: &Arena, dt: f64, rng: &mut R) {
    advance_traced(nodes, params, arena, dt, rng, |_, _, _| {});
}

/// Like [`advance`], reporting every straight leg as `(node index, from, to)`.
///
/// Step decisions of the coverage-based model read the positions all nodes
/// had at the start of the tick.
pub fn advance_traced<R, F>(
    nodes: &mut [NodeState],
    params: &MobilityParams,
    arena: &Arena,
    dt: f64,
    rng: &mut R,
    mut on_leg: F,
) where
    R: Rng + ?Sized,
    F: FnMut(usize, Point2, Point2),
{
    if !params.model.is_mobile() {
        return;
    }
    let snapshot: Vec<Point2> = match params.model {
        MobilityModel::CoverageBased => nodes.iter().map(|n| n.pos).collect(),
        _ => Vec::new(),
    };
    let length = params.speed * dt;
    for (i, node) in nodes.iter_mut().enumerate() {
        let decide = |state: &NodeState, trigger: DecisionTrigger| -> Heading {
            if params.model == MobilityModel::CoverageBased && trigger == DecisionTrigger::Step {
                let neighbors = neighbors_within(i, &snapshot, params.range);
                let at_tick_start = NodeState { pos: snapshot[i], ..*state };
                resultant_direction(&at_tick_start, &neighbors, params.range, &mut *rng)
            } else {
                decide_direction(state, trigger, params, &[], arena, &mut *rng)
            }
        };
        travel(node, length, params.step_length, arena, decide, |a, b| on_leg(i, a, b));
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::{FRAC_PI_2, PI, TAU};

    fn arena() -> Arena {
        Arena::new(4000.0).unwrap()
    }

    fn node_at(x: f64, y: f64, heading: f64) -> NodeState {
        NodeState {
            pos: Point2::new(x, y),
            heading: Heading::new(heading),
            dist_since_decision: 0.0,
            sweep_axis_coord: y,
        }
    }

    fn params(model: MobilityModel) -> MobilityParams {
        MobilityParams { model, ..MobilityParams::default() }
    }

    #[test]
    fn model_names_round_trip() {
        for m in MobilityModel::ALL {
            assert_eq!(m.name().parse::<MobilityModel>().unwrap(), m);
        }
        assert_eq!("coverage-based".parse::<MobilityModel>().unwrap(), MobilityModel::CoverageBased);
        assert_eq!("RandomWalk".parse::<MobilityModel>().unwrap(), MobilityModel::RandomWalk);
        assert!("levy".parse::<MobilityModel>().is_err());
    }

    #[test]
    fn params_validation() {
        assert!(MobilityParams::new(MobilityModel::RandomWalk, 5.0, 500.0, 50.0).is_ok());
        assert!(MobilityParams::new(MobilityModel::RandomWalk, -1.0, 500.0, 50.0).is_err());
        assert!(MobilityParams::new(MobilityModel::RandomWalk, 5.0, 0.0, 50.0).is_err());
        assert!(MobilityParams::new(MobilityModel::RandomWalk, 5.0, 500.0, 0.0).is_err());
        let p = MobilityParams { max_speed: 4.0, ..MobilityParams::default() };
        assert!(p.validate().is_err());
    }

    #[test]
    fn init_nodes_empty_and_contained() {
        let a = arena();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!(init_nodes(0, &params(MobilityModel::RandomWalk), &a, &mut rng).is_empty());
        let nodes = init_nodes(200, &params(MobilityModel::CoverageBased), &a, &mut rng);
        assert_eq!(nodes.len(), 200);
        for n in &nodes {
            assert!(a.contains(n.pos));
            assert_eq!(n.dist_since_decision, 0.0);
            assert!((0.0..TAU).contains(&n.heading.angle()));
        }
    }

    #[test]
    fn init_nodes_deterministic_and_shared_positions() {
        let a = arena();
        let run = |m| init_nodes(50, &params(m), &a, &mut ChaCha8Rng::seed_from_u64(42));
        assert_eq!(run(MobilityModel::RandomWalk), run(MobilityModel::RandomWalk));
        let pp = run(MobilityModel::ParallelPath);
        let cb = run(MobilityModel::CoverageBased);
        for (p, c) in pp.iter().zip(&cb) {
            assert_eq!(p.pos, c.pos);
            assert!(p.heading.angle() == 0.0 || p.heading.angle() == PI);
            assert_eq!(p.sweep_axis_coord, p.pos.y);
        }
    }

    #[test]
    fn resultant_single_neighbor_reverses() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let n = node_at(0.0, 0.0, 0.0);
        let h = resultant_direction(&n, &[Point2::new(250.0, 0.0)], 500.0, &mut rng);
        assert_relative_eq!(h.angle(), PI, epsilon = 1e-12);
    }

    #[test]
    fn resultant_two_neighbors() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let n = node_at(0.0, 0.0, 0.0);
        let h = resultant_direction(&n, &[Point2::new(300.0, 0.0), Point2::new(0.0, 400.0)], 500.0, &mut rng);
        // hand components: (1/500 - 1/300, -1/400)
        let expected = (-1.0f64 / 400.0).atan2(1.0 / 500.0 - 1.0 / 300.0) + TAU;
        assert_relative_eq!(h.angle(), expected, epsilon = 1e-12);
        assert_relative_eq!(h.angle().to_degrees(), 241.93, epsilon = 0.01);
    }

    #[test]
    fn resultant_without_neighbors_keeps_heading() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let n = node_at(10.0, 10.0, 1.0);
        assert_eq!(resultant_direction(&n, &[], 500.0, &mut rng).angle(), 1.0);
    }

    #[test]
    fn resultant_exact_cancellation_keeps_heading() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        // momentum 1/500 along +x cancelled by a neighbor 500 m ahead
        let n = node_at(0.0, 0.0, 0.0);
        let h = resultant_direction(&n, &[Point2::new(500.0, 0.0)], 500.0, &mut rng);
        assert_eq!(h.angle(), 0.0);
    }

    #[test]
    fn resultant_coincident_neighbor_is_finite() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let n = node_at(100.0, 100.0, 0.3);
        let h = resultant_direction(&n, &[Point2::new(100.0, 100.0)], 500.0, &mut rng);
        assert!(h.angle().is_finite());
        // a near-coincident neighbor is capped at 1/MIN_FORCE_DISTANCE
        let h = resultant_direction(&n, &[Point2::new(100.0 + 1e-9, 100.0)], 500.0, &mut rng);
        assert!(h.angle().is_finite());
    }

    #[test]
    fn decide_direction_rules() {
        let a = arena();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mid = node_at(2000.0, 2000.0, 0.7);
        let rd = params(MobilityModel::RandomDirection);
        assert_eq!(decide_direction(&mid, DecisionTrigger::Step, &rd, &[], &a, &mut rng).angle(), 0.7);

        let edge = node_at(4000.0, 1000.0, 0.0);
        let pp = params(MobilityModel::ParallelPath);
        let h = decide_direction(&edge, DecisionTrigger::Boundary, &pp, &[], &a, &mut rng);
        assert_relative_eq!(h.angle(), PI);

        let cb = params(MobilityModel::CoverageBased);
        assert_eq!(decide_direction(&mid, DecisionTrigger::Step, &cb, &[], &a, &mut rng).angle(), 0.7);

        let h = decide_direction(&edge, DecisionTrigger::Boundary, &params(MobilityModel::RandomWalk), &[], &a, &mut rng);
        assert!(h.unit().x < 0.0);
    }

    #[test]
    fn static_nodes_never_move() {
        let a = arena();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let p = params(MobilityModel::Static);
        let mut nodes = init_nodes(20, &p, &a, &mut rng);
        let before = nodes.clone();
        for _ in 0..100 {
            advance(&mut nodes, &p, &a, 3.0, &mut rng);
        }
        assert_eq!(nodes, before);
    }

    #[test]
    fn uniform_motion_one_tick() {
        let a = arena();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut nodes = vec![node_at(100.0, 100.0, 0.0)];
        advance(&mut nodes, &params(MobilityModel::RandomWalk), &a, 1.0, &mut rng);
        assert_relative_eq!(nodes[0].pos.x, 105.0);
        assert_relative_eq!(nodes[0].pos.y, 100.0);
        assert_relative_eq!(nodes[0].dist_since_decision, 5.0);
    }

    #[test]
    fn random_walk_redraws_every_ten_ticks() {
        let a = arena();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let p = params(MobilityModel::RandomWalk);
        let mut nodes = vec![node_at(2000.0, 2000.0, 0.25)];
        for tick in 1..=30 {
            let before = nodes[0].heading;
            advance(&mut nodes, &p, &a, 1.0, &mut rng);
            if tick % 10 == 0 {
                assert_ne!(nodes[0].heading, before, "tick {tick}");
                assert_eq!(nodes[0].dist_since_decision, 0.0);
            } else {
                assert_eq!(nodes[0].heading, before, "tick {tick}");
            }
        }
    }

    #[test]
    fn boundary_hit_consumes_residual_distance() {
        let a = arena();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let p = params(MobilityModel::ParallelPath);
        let mut nodes = vec![node_at(3998.0, 1000.0, 0.0)];
        advance(&mut nodes, &p, &a, 1.0, &mut rng);
        assert_relative_eq!(nodes[0].pos.x, 3997.0, epsilon = 1e-9);
        assert_relative_eq!(nodes[0].heading.angle(), PI);
        assert_eq!(nodes[0].pos.y, 1000.0);
    }

    #[test]
    fn parallel_path_keeps_its_lane() {
        let a = arena();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let p = params(MobilityModel::ParallelPath);
        let mut nodes = init_nodes(10, &p, &a, &mut rng);
        nodes.push(node_at(10.0, 4000.0, PI));
        nodes.push(node_at(10.0, 0.0, PI));
        for _ in 0..3000 {
            advance(&mut nodes, &p, &a, 1.0, &mut rng);
        }
        for n in &nodes {
            assert!((n.pos.y - n.sweep_axis_coord).abs() < 1e-6);
            assert!(a.contains(n.pos));
        }
    }

    #[test]
    fn legs_sum_to_speed_times_dt() {
        let a = arena();
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for model in [MobilityModel::RandomWalk, MobilityModel::RandomDirection, MobilityModel::CoverageBased] {
            let p = MobilityParams { speed: 37.0, ..params(model) };
            let mut nodes = init_nodes(15, &p, &a, &mut rng);
            for _ in 0..500 {
                let mut travelled = vec![0.0; nodes.len()];
                advance_traced(&mut nodes, &p, &a, 1.0, &mut rng, |i, from, to| travelled[i] += distance(from, to));
                for t in travelled {
                    assert_relative_eq!(t, 37.0, epsilon = 1e-6);
                }
            }
        }
    }

    #[test]
    fn coverage_decisions_are_order_independent() {
        let a = arena();
        let p = params(MobilityModel::CoverageBased);
        let mut nodes = vec![node_at(1000.0, 1000.0, 0.0), node_at(1100.0, 1000.0, PI), node_at(1050.0, 1080.0, FRAC_PI_2)];
        for n in nodes.iter_mut() {
            n.dist_since_decision = 45.0;
        }
        let mut reversed: Vec<_> = nodes.iter().rev().cloned().collect();
        advance(&mut nodes, &p, &a, 1.0, &mut ChaCha8Rng::seed_from_u64(0));
        advance(&mut reversed, &p, &a, 1.0, &mut ChaCha8Rng::seed_from_u64(0));
        reversed.reverse();
        assert_eq!(nodes, reversed);
    }

    fn nearest_neighbor_mean(nodes: &[NodeState]) -> f64 {
        let total: f64 = nodes
            .iter()
            .enumerate()
            .map(|(i, a)| {
                nodes
                    .iter()
                    .enumerate()
                    .filter(|&(j, _)| j != i)
                    .map(|(_, b)| distance(a.pos, b.pos))
                    .fold(f64::INFINITY, f64::min)
            })
            .sum();
        total / nodes.len() as f64
    }

    #[test]
    fn coverage_based_disperses_more_than_random_walk() {
        let a = arena();
        let mut cb_total = 0.0;
        let mut rw_total = 0.0;
        for seed in 0..10 {
            for (model, total) in [(MobilityModel::CoverageBased, &mut cb_total), (MobilityModel::RandomWalk, &mut rw_total)] {
                let p = params(model);
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let mut nodes = init_nodes(50, &p, &a, &mut rng);
                for _ in 0..1000 {
                    advance(&mut nodes, &p, &a, 1.0, &mut rng);
                }
                *total += nearest_neighbor_mean(&nodes);
            }
        }
        assert!(cb_total >= rw_total, "cb={cb_total} rw={rw_total}");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(10_000))]

        #[test]
        fn repulsion_points_away(d in 1.0..499.0f64, heading in 0.0..TAU, seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let n = node_at(2000.0, 2000.0, heading);
            let neighbor = n.pos + Heading::new(heading).unit() * d;
            let h = resultant_direction(&n, &[neighbor], 500.0, &mut rng);
            let toward = (neighbor - n.pos) * (1.0 / d);
            // resultant is at least as far from the neighbor as perpendicular
            prop_assert!(h.unit().dot(toward) <= 1e-9);
        }

        #[test]
        fn mirror_neighbors_keep_axis(
            heading in 0.0..TAU, along in -400.0..400.0f64, off in 1.0..300.0f64, seed in any::<u64>(),
        ) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let n = node_at(2000.0, 2000.0, heading);
            let u = Heading::new(heading).unit();
            let v = Point2::new(-u.y, u.x);
            let left = n.pos + u * along + v * off;
            let right = n.pos + u * along - v * off;
            let h = resultant_direction(&n, &[left, right], 500.0, &mut rng);
            let cross = h.unit().x * u.y - h.unit().y * u.x;
            prop_assert!(cross.abs() < 1e-9, "cross = {}", cross);
        }

        #[test]
        fn direction_scale_invariant(
            heading in 0.0..TAU,
            pts in proptest::collection::vec((-300.0..300.0f64, -300.0..300.0f64), 1..6),
            scale in 0.5..20.0f64, seed in any::<u64>(),
        ) {
            let pts: Vec<Point2> = pts.into_iter().map(|(x, y)| Point2::new(x, y)).filter(|p| p.norm() >= 2.0).collect();
            prop_assume!(!pts.is_empty());
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let n = node_at(0.0, 0.0, heading);
            let base = resultant_direction(&n, &pts, 500.0, &mut rng);
            let scaled: Vec<Point2> = pts.iter().map(|&p| p * scale).collect();
            let h = resultant_direction(&n, &scaled, 500.0 * scale, &mut rng);
            let diff = (base.angle() - h.angle()).abs();
            prop_assert!(diff.min(TAU - diff) < 1e-7, "{} vs {}", base.angle(), h.angle());
        }

        #[test]
        fn no_neighbor_identity(heading in 0.0..TAU, range in 1.0..1e4f64) {
            let mut rng = ChaCha8Rng::seed_from_u64(0);
            let n = node_at(5.0, 5.0, heading);
            prop_assert_eq!(resultant_direction(&n, &[], range, &mut rng), n.heading);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn containment_and_cadence(model_ix in 1usize..5, seed in any::<u64>(), dt in 0.1..20.0f64) {
            let model = MobilityModel::ALL[model_ix];
            let a = Arena::new(1000.0).unwrap();
            let p = params(model);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut nodes = init_nodes(12, &p, &a, &mut rng);
            for _ in 0..200 {
                advance(&mut nodes, &p, &a, dt, &mut rng);
                for n in &nodes {
                    prop_assert!(a.contains(n.pos));
                    prop_assert!(n.pos.is_finite());
                    prop_assert!(n.dist_since_decision >= 0.0 && n.dist_since_decision < p.step_length);
                }
            }
        }
    }
}

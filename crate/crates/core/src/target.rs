//! The event to be detected: a stationary point, a border-to-border linear
//! crosser, or a random-walk wanderer, each with a finite lifetime.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use thiserror::Error;

use crate::geometry::{redirect_into_interior, sample_uniform_point, Arena, Heading, Point2};
use crate::mobility::{travel, DecisionTrigger, NodeState};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TargetError {
    #[error("unknown target kind `{0}`")]
    UnknownKind(String),
    #[error("target duration must be positive, got {0}")]
    InvalidDuration(f64),
    #[error("mobile target speed must be positive, got {0}")]
    InvalidSpeed(f64),
    #[error("target step length must be positive, got {0}")]
    InvalidStepLength(f64),
    #[error("target already finished")]
    AlreadyFinished,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TargetKind {
    Stationary,
    LinearCrossing,
    RandomWalk,
}

impl TargetKind {
    pub const ALL: [TargetKind; 3] = [TargetKind::Stationary, TargetKind::LinearCrossing, TargetKind::RandomWalk];

    pub fn name(self) -> &'static str {
        match self {
            TargetKind::Stationary => "stationary",
            TargetKind::LinearCrossing => "linear_crossing",
            TargetKind::RandomWalk => "random_walk",
        }
    }

    pub fn is_mobile(self) -> bool {
        self != TargetKind::Stationary
    }
}

impl fmt::Display for TargetKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TargetKind {
    type Err = TargetError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let key = s.trim().to_ascii_lowercase().replace('-', "_");
        match key.as_str() {
            "stationary" | "static" => Ok(TargetKind::Stationary),
            "linear_crossing" | "linear" | "linearcrossing" => Ok(TargetKind::LinearCrossing),
            "random_walk" | "randomwalk" => Ok(TargetKind::RandomWalk),
            _ => Err(TargetError::UnknownKind(s.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TargetSpec {
    pub kind: TargetKind,
    /// Event lifetime in seconds.
    pub duration: f64,
    /// m/s, mobile kinds only.
    pub speed: f64,
    /// Decision distance for the random-walk kind.
    pub step_length: f64,
}

impl Default for TargetSpec {
    fn default() -> Self {
        TargetSpec { kind: TargetKind::Stationary, duration: 100.0, speed: 5.0, step_length: 50.0 }
    }
}

impl TargetSpec {
    pub fn validate(&self) -> Result<(), TargetError> {
        if !(self.duration > 0.0 && self.duration.is_finite()) {
            return Err(TargetError::InvalidDuration(self.duration));
        }
        if self.kind.is_mobile() && !(self.speed > 0.0 && self.speed.is_finite()) {
            return Err(TargetError::InvalidSpeed(self.speed));
        }
        if !(self.step_length > 0.0 && self.step_length.is_finite()) {
            return Err(TargetError::InvalidStepLength(self.step_length));
        }
        Ok(())
    }

    /// Speed the target actually moves at.
    pub fn effective_speed(&self) -> f64 {
        if self.kind.is_mobile() {
            self.speed
        } else {
            0.0
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TargetState {
    pub pos: Point2,
    pub heading: Heading,
    pub dist_since_decision: f64,
    pub start: Point2,
    pub end: Point2,
    pub elapsed: f64,
    /// Path length covered so far.
    pub travelled: f64,
    pub finished: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TargetStatus {
    Active,
    Finished,
}

pub fn spawn_target<R: Rng + ?Sized>(spec: &TargetSpec, arena: &Arena, rng: &mut R) -> TargetState {
    let side = arena.side();
    let (pos, heading, start, end) = match spec.kind {
        TargetKind::Stationary => {
            let p = sample_uniform_point(arena, rng);
            (p, Heading::default(), p, p)
        }
        TargetKind::RandomWalk => {
            let p = sample_uniform_point(arena, rng);
            (p, Heading::uniform(rng), p, p)
        }
        TargetKind::LinearCrossing => {
            let edge = rng.gen_range(0..4u8);
            let u = rng.gen_range(0.0..=side);
            let v = rng.gen_range(0.0..=side);
            let (start, end) = match edge {
                0 => (Point2::new(0.0, u), Point2::new(side, v)),
                1 => (Point2::new(side, u), Point2::new(0.0, v)),
                2 => (Point2::new(u, 0.0), Point2::new(v, side)),
                _ => (Point2::new(u, side), Point2::new(v, 0.0)),
            };
            let heading = Heading::from_vector(end - start).unwrap_or_default();
            (start, heading, start, end)
        }
    };
    TargetState { pos, heading, dist_since_decision: 0.0, start, end, elapsed: 0.0, travelled: 0.0, finished: false }
}

fn lifetime_over(elapsed: f64, duration: f64) -> bool {
    elapsed >= duration * (1.0 - 1e-12)
}

/// Moves the target forward by `dt` seconds.
///
/// A linear crosser finishes at its end point or when its duration runs
/// out, whichever comes first.
pub fn advance_target<R: Rng + ?Sized>(
    state: &mut TargetState,
    spec: &TargetSpec,
    arena: &Arena,
    dt: f64,
    rng: &mut R,
) -> Result<TargetStatus, TargetError> {
    if state.finished {
        return Err(TargetError::AlreadyFinished);
    }
    state.elapsed += dt;
    match spec.kind {
        TargetKind::Stationary => {}
        TargetKind::LinearCrossing => {
            let path = state.end - state.start;
            let path_len = path.norm();
            state.travelled = (state.travelled + spec.speed * dt).min(path_len);
            if state.travelled >= path_len {
                state.pos = state.end;
                state.finished = true;
            } else {
                state.pos = state.start + path * (state.travelled / path_len);
            }
        }
        TargetKind::RandomWalk => {
            let mut kin = NodeState {
                pos: state.pos,
                heading: state.heading,
                dist_since_decision: state.dist_since_decision,
                sweep_axis_coord: state.pos.y,
            };
            let mut travelled = 0.0;
            travel(
                &mut kin,
                spec.speed * dt,
                spec.step_length,
                arena,
                |s, trigger| match trigger {
                    DecisionTrigger::Step => Heading::uniform(&mut *rng),
                    DecisionTrigger::Boundary => {
                        redirect_into_interior(s.pos, arena, &mut *rng).unwrap_or_else(|_| s.heading.reversed())
                    }
                },
                |a, b| travelled += crate::geometry::distance(a, b),
            );
            state.pos = kin.pos;
            state.heading = kin.heading;
            state.dist_since_decision = kin.dist_since_decision;
            state.travelled += travelled;
        }
    }
    if lifetime_over(state.elapsed, spec.duration) {
        state.finished = true;
    }
    Ok(if state.finished { TargetStatus::Finished } else { TargetStatus::Active })
}

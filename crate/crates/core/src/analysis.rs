//! Closed-form Poisson coverage results for uniformly deployed static and
//! mobile networks: k-coverage mass, detection probabilities, minimum node
//! counts and the non-overlapping bound.
//!
//! For `n` nodes of range `r` spread over area `A`, the number of nodes
//! covering a point is Poisson with mean `λ = nπr²/A`. A node moving at mean
//! speed `E[V]` for `t` seconds sweeps `πr² + 2rE[V]t`, which replaces `πr²`
//! in the mobile formulas.
//!
//! `e^(-λ)` underflows to zero for `λ > ~745`; probabilities then saturate
//! at exactly 1.

use std::f64::consts::PI;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalysisError {
    #[error("detection probability must lie strictly between 0 and 1, got {0}")]
    ProbabilityOutOfRange(f64),
    #[error("invalid coverage parameters: {0}")]
    InvalidParams(&'static str),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoverageParams {
    /// Monitored area (m²).
    pub area: f64,
    /// Sensing range (m).
    pub range: f64,
    /// Mean node speed (m/s).
    pub mean_speed: f64,
    /// Observation window (s).
    pub horizon: f64,
}

impl CoverageParams {
    pub fn new(area: f64, range: f64, mean_speed: f64, horizon: f64) -> Result<Self, AnalysisError> {
        let p = CoverageParams { area, range, mean_speed, horizon };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), AnalysisError> {
        if !(self.area > 0.0 && self.area.is_finite()) {
            return Err(AnalysisError::InvalidParams("area must be positive"));
        }
        if !(self.range > 0.0 && self.range.is_finite()) {
            return Err(AnalysisError::InvalidParams("range must be positive"));
        }
        if !(self.mean_speed >= 0.0 && self.mean_speed.is_finite()) {
            return Err(AnalysisError::InvalidParams("mean speed must be non-negative"));
        }
        if !(self.horizon >= 0.0 && self.horizon.is_finite()) {
            return Err(AnalysisError::InvalidParams("horizon must be non-negative"));
        }
        Ok(())
    }

    pub fn with_horizon(self, horizon: f64) -> Self {
        CoverageParams { horizon, ..self }
    }

    /// Area of one sensing disc.
    pub fn disc_area(&self) -> f64 {
        PI * self.range * self.range
    }

    /// Area one moving node sweeps over `horizon`: disc plus a `2r`-wide band.
    pub fn swept_area(&self, horizon: f64) -> f64 {
        self.disc_area() + 2.0 * self.range * self.mean_speed * horizon
    }

    /// Poisson mean of covering nodes for a static deployment.
    pub fn static_lambda(&self, n: u64) -> f64 {
        n as f64 * self.disc_area() / self.area
    }

    pub fn mobile_lambda(&self, n: u64) -> f64 {
        n as f64 * self.swept_area(self.horizon) / self.area
    }
}

/// Probability that a point is covered by exactly `k` of `n` static nodes.
pub fn prob_k_coverage(n: u64, params: &CoverageParams, k: u64) -> f64 {
    poisson_pmf(params.static_lambda(n), k)
}

fn poisson_pmf(lambda: f64, k: u64) -> f64 {
    if lambda == 0.0 {
        return if k == 0 { 1.0 } else { 0.0 };
    }
    let ln_k_factorial: f64 = (2..=k).map(|i| (i as f64).ln()).sum();
    (-lambda + k as f64 * lambda.ln() - ln_k_factorial).exp()
}

/// Fraction of the area covered by at least one of `n` static nodes, which
/// is also the probability of detecting a stationary event at a random spot.
pub fn detect_prob_static(n: u64, params: &CoverageParams) -> f64 {
    1.0 - (-params.static_lambda(n)).exp()
}

/// Fraction of the area swept by at least one of `n` mobile nodes within
/// `params.horizon`.
pub fn detect_prob_mobile(n: u64, params: &CoverageParams) -> f64 {
    1.0 - (-params.mobile_lambda(n)).exp()
}

fn check_probability(p_d: f64) -> Result<(), AnalysisError> {
    if p_d > 0.0 && p_d < 1.0 {
        Ok(())
    } else {
        Err(AnalysisError::ProbabilityOutOfRange(p_d))
    }
}

/// Smallest `n` with `prob(n) >= p_d`, starting from the real-valued bound
/// `-ln(1 - p_d) * A / per_node_area` and correcting for rounding so the
/// result is exact with respect to `prob`.
fn smallest_count(p_d: f64, real_bound: f64, prob: impl Fn(u64) -> f64) -> u64 {
    let mut n = real_bound.ceil().max(1.0) as u64;
    while prob(n) < p_d {
        n += 1;
    }
    while n > 1 && prob(n - 1) >= p_d {
        n -= 1;
    }
    n
}

pub fn min_nodes_static(p_d: f64, params: &CoverageParams) -> Result<u64, AnalysisError> {
    check_probability(p_d)?;
    let bound = -params.area * (-p_d).ln_1p() / params.disc_area();
    Ok(smallest_count(p_d, bound, |n| detect_prob_static(n, params)))
}

pub fn min_nodes_mobile(p_d: f64, params: &CoverageParams) -> Result<u64, AnalysisError> {
    check_probability(p_d)?;
    let bound = -params.area * (-p_d).ln_1p() / params.swept_area(params.horizon);
    Ok(smallest_count(p_d, bound, |n| detect_prob_mobile(n, params)))
}

/// Node count needed if swept regions never overlapped during `event_duration`.
pub fn nodes_no_overlap(params: &CoverageParams, event_duration: f64) -> u64 {
    (params.area / params.swept_area(event_duration)).ceil() as u64
}

//! UAV kinematics, Gauss-Markov target mobility, and the separation and
//! mission geometry that the agent is scored against.

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use std::ops::{Add, Sub};

/// Horizontal position in meters.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Pos2 {
    pub x: f64,
    pub y: f64,
}

impl Pos2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn norm_sqr(self) -> f64 {
        self.x * self.x + self.y * self.y
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn dist(self, other: Pos2) -> f64 {
        (self - other).norm()
    }

    pub fn heading(angle: f64, len: f64) -> Self {
        Self::new(len * angle.cos(), len * angle.sin())
    }
}

impl Add for Pos2 {
    type Output = Pos2;
    fn add(self, o: Pos2) -> Pos2 {
        Pos2::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Pos2 {
    type Output = Pos2;
    fn sub(self, o: Pos2) -> Pos2 {
        Pos2::new(self.x - o.x, self.y - o.y)
    }
}

/// Movement decision for one UAV in one slot.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Heading {
    /// Fly `step_len` meters along this azimuth (radians).
    Toward(f64),
    /// Stay put. Only issued to a UAV sitting on its goal in straight-flight mode.
    Hover,
}

impl Heading {
    pub fn angle(self) -> Option<f64> {
        match self {
            Heading::Toward(a) => Some(a),
            Heading::Hover => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UavState {
    pub pos: Pos2,
    pub altitude: f64,
    pub start: Pos2,
    pub goal: Pos2,
    /// Distance covered per slot, `v·Δt`.
    pub step_len: f64,
}

impl UavState {
    pub fn new(start: Pos2, goal: Pos2, altitude: f64, step_len: f64) -> Self {
        debug_assert!(altitude > 0.0 && step_len > 0.0);
        Self {
            pos: start,
            altitude,
            start,
            goal,
            step_len,
        }
    }

    pub fn step(&self, heading: Heading) -> UavState {
        let mut next = self.clone();
        if let Heading::Toward(angle) = heading {
            next.pos = self.pos + Pos2::heading(angle, self.step_len);
        }
        next
    }

    pub fn dist_to_goal(&self) -> f64 {
        self.pos.dist(self.goal)
    }

    /// Fewest slots needed to reach the goal flying straight: `⌈d / (v·Δt)⌉`.
    pub fn min_slots_to_goal(&self) -> usize {
        (self.dist_to_goal() / self.step_len).ceil() as usize
    }

    /// Bearing to the goal, or `Hover` when already on it.
    pub fn straight_flight(&self) -> Heading {
        let d = self.goal - self.pos;
        if d.norm() <= self.step_len * 1e-12 {
            Heading::Hover
        } else {
            Heading::Toward(d.y.atan2(d.x))
        }
    }

    pub fn within(&self, tol: f64) -> bool {
        self.dist_to_goal() <= tol
    }
}

pub fn uav_step(s: &UavState, angle: f64) -> UavState {
    s.step(Heading::Toward(angle))
}

pub fn min_slots_to_goal(s: &UavState) -> usize {
    s.min_slots_to_goal()
}

pub fn straight_flight_angle(s: &UavState) -> Heading {
    s.straight_flight()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TargetState {
    pub pos: Pos2,
    pub altitude: f64,
    /// Azimuth of motion (radians), kept unwrapped.
    pub azimuth: f64,
    /// Elevation of motion (radians), kept unwrapped.
    pub elevation: f64,
    pub step_len: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MobilityParams {
    pub mu_a: f64,
    pub mu_e: f64,
    pub xi_a: f64,
    pub xi_e: f64,
    pub sigma_phi: f64,
    pub sigma_vphi: f64,
    /// Altitude floor for the target (meters).
    pub min_altitude: f64,
}

impl MobilityParams {
    pub fn validate(&self) -> Result<(), String> {
        for (name, mu) in [("mu_a", self.mu_a), ("mu_e", self.mu_e)] {
            if !(0.0..=1.0).contains(&mu) {
                return Err(format!("{name} must lie in [0, 1], got {mu}"));
            }
        }
        for (name, s) in [("sigma_phi", self.sigma_phi), ("sigma_vphi", self.sigma_vphi)] {
            if !(s >= 0.0 && s.is_finite()) {
                return Err(format!("{name} must be a finite non-negative value, got {s}"));
            }
        }
        Ok(())
    }
}

fn ar1(prev: f64, mu: f64, mean: f64, innovation: f64) -> f64 {
    mu * prev + (1.0 - mu) * mean + (1.0 - mu * mu).max(0.0).sqrt() * innovation
}

/// Moves the target one slot along its current direction, then draws the
/// next direction from the correlated angle process.
pub fn gauss_markov_step<R: Rng + ?Sized>(t: &TargetState, p: &MobilityParams, rng: &mut R) -> TargetState {
    let horiz = t.step_len * t.elevation.cos();
    let pos = t.pos + Pos2::heading(t.azimuth, horiz);
    let altitude = (t.altitude + t.step_len * t.elevation.sin()).max(p.min_altitude);

    let d_phi = draw(rng, p.sigma_phi);
    let d_vphi = draw(rng, p.sigma_vphi);
    TargetState {
        pos,
        altitude,
        azimuth: ar1(t.azimuth, p.mu_a, p.xi_a, d_phi),
        elevation: ar1(t.elevation, p.mu_e, p.xi_e, d_vphi),
        step_len: t.step_len,
    }
}

fn draw<R: Rng + ?Sized>(rng: &mut R, sigma: f64) -> f64 {
    // both draws always happen so the stream stays aligned when a sigma is zero
    let z: f64 = Normal::new(0.0, 1.0).expect("unit normal").sample(rng);
    sigma * z
}

fn sep_sqr(a: Pos2, ha: f64, b: Pos2, hb: f64) -> f64 {
    (a - b).norm_sqr() + (ha - hb).powi(2)
}

/// True when two UAVs are closer than `d_min`.
pub fn uav_pair_collision(a: &UavState, b: &UavState, d_min: f64) -> bool {
    sep_sqr(a.pos, a.altitude, b.pos, b.altitude) < d_min * d_min
}

pub fn uav_target_collision(a: &UavState, t: &TargetState, d_min: f64) -> bool {
    sep_sqr(a.pos, a.altitude, t.pos, t.altitude) < d_min * d_min
}

/// Any pairwise or UAV-target separation violation.
pub fn any_collision(uavs: &[UavState], target: &TargetState, d_min: f64) -> bool {
    uavs.iter().enumerate().any(|(i, a)| {
        uav_target_collision(a, target, d_min)
            || uavs[i + 1..].iter().any(|b| uav_pair_collision(a, b, d_min))
    })
}

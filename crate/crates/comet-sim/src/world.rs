//! Domain types, scenario configuration, and the shared 2-D frame conventions.
//!
//! Frame convention: X forward from the robot/camera, Y to the left (right-handed,
//! Z up). Positive rotation angles are counterclockwise. Lengths are meters,
//! angles radians, time seconds.

use serde::{Deserialize, Serialize};
use std::fmt;
use thiserror::Error;

use crate::cohesion::{CohesionLevel, CombineMode};
use crate::grouping::GroupingRule;
use crate::sensor::SensorConfig;
use crate::tracking::TrackerConfig;

/// 2-D vector in the world or camera frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { x: 0.0, y: 0.0 };

    pub fn new(x: f64, y: f64) -> Self {
        Vec2 { x, y }
    }

    pub fn dot(self, other: Vec2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    /// Z component of the 3-D cross product; positive when `other` is CCW of `self`.
    pub fn cross(self, other: Vec2) -> f64 {
        self.x * other.y - self.y * other.x
    }

    pub fn norm_sq(self) -> f64 {
        self.dot(self)
    }

    pub fn norm(self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn distance(self, other: Vec2) -> f64 {
        (self - other).norm()
    }

    /// Unit vector in the same direction, or zero for a zero vector.
    pub fn normalized(self) -> Vec2 {
        let n = self.norm();
        if n > 0.0 {
            self * (1.0 / n)
        } else {
            Vec2::ZERO
        }
    }

    /// CCW rotation by `angle` radians.
    pub fn rotated(self, angle: f64) -> Vec2 {
        let (s, c) = angle.sin_cos();
        Vec2::new(c * self.x - s * self.y, s * self.x + c * self.y)
    }

    /// Angle of this vector from the +X axis, in (-pi, pi].
    pub fn angle(self) -> f64 {
        self.y.atan2(self.x)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn from_angle(angle: f64) -> Vec2 {
        Vec2::new(angle.cos(), angle.sin())
    }
}

impl From<[f64; 2]> for Vec2 {
    fn from(a: [f64; 2]) -> Self {
        Vec2::new(a[0], a[1])
    }
}

impl From<Vec2> for [f64; 2] {
    fn from(v: Vec2) -> Self {
        [v.x, v.y]
    }
}

impl std::ops::Add for Vec2 {
    type Output = Vec2;
    fn add(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x + o.x, self.y + o.y)
    }
}

impl std::ops::Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x - o.x, self.y - o.y)
    }
}

impl std::ops::Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, k: f64) -> Vec2 {
        Vec2::new(self.x * k, self.y * k)
    }
}

impl std::ops::Neg for Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

/// Signed angle from `a` to `b`, in (-pi, pi].
pub fn signed_angle(a: Vec2, b: Vec2) -> f64 {
    a.cross(b).atan2(a.dot(b))
}

/// Wrap an angle into (-pi, pi].
pub fn wrap_angle(a: f64) -> f64 {
    let mut r = a % std::f64::consts::TAU;
    if r > std::f64::consts::PI {
        r -= std::f64::consts::TAU;
    } else if r <= -std::f64::consts::PI {
        r += std::f64::consts::TAU;
    }
    r
}

/// 3-D vector, used only for face poses.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 3]", into = "[f64; 3]")]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Vec3 { x, y, z }
    }

    pub fn norm(self) -> f64 {
        (self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }

    /// Projection onto the X-Y plane.
    pub fn xy(self) -> Vec2 {
        Vec2::new(self.x, self.y)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }
}

impl From<[f64; 3]> for Vec3 {
    fn from(a: [f64; 3]) -> Self {
        Vec3::new(a[0], a[1], a[2])
    }
}

impl From<Vec3> for [f64; 3] {
    fn from(v: Vec3) -> Self {
        [v.x, v.y, v.z]
    }
}

impl std::ops::Add for Vec3 {
    type Output = Vec3;
    fn add(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl std::ops::Sub for Vec3 {
    type Output = Vec3;
    fn sub(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

/// Face position (meters) and unit orientation vector.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FacePose {
    pub position: Vec3,
    pub orientation: Vec3,
}

/// Opaque two-valued gender label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Gender {
    A,
    B,
}

/// Ground-truth pedestrian state; the source for all sensed quantities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentState {
    pub id: u64,
    pub position: Vec2,
    pub velocity: Vec2,
    pub face: FacePose,
    pub gender: Gender,
    pub goal: Vec2,
}

/// Robot start/goal and kinematic limits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RobotConfig {
    pub start: Vec2,
    pub goal: Vec2,
    pub v_max: f64,
    pub omega_max: f64,
    pub radius: f64,
}

impl Default for RobotConfig {
    fn default() -> Self {
        RobotConfig {
            start: Vec2::ZERO,
            goal: Vec2::new(20.0, 0.0),
            v_max: 1.0,
            omega_max: 1.5,
            radius: 0.3,
        }
    }
}

/// Weights and thresholds shared by grouping, cohesion scoring, and navigation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ParamSet {
    pub k_p: f64,
    pub k_w: f64,
    pub k_s: f64,
    pub k_i: f64,
    pub k_g: f64,
    /// Pairwise distance threshold for grouping (m).
    pub gamma: f64,
    /// Walking-speed score assigned to static groups.
    pub eta: f64,
    pub tau_low: f64,
    pub tau_high: f64,
    /// Prediction horizon (s).
    pub t_h: f64,
    /// Camera field of view (rad); mirrored into the sensor config when absent there.
    pub fov: f64,
    pub combine_mode: CombineMode,
    /// Floor applied to pairwise distances in the proximity score (m).
    pub d_clamp: f64,
    /// Radius of the region ahead of the robot scanned for freezing groups (m).
    pub sense_radius: f64,
    /// Max angle between a group's walking vector and the group-to-robot
    /// direction for the group to count as approaching (rad).
    pub alpha_pf: f64,
    /// Deviation-search angular resolution (rad).
    pub dphi: f64,
    pub grouping_rule: GroupingRule,
    /// Speeds below this are treated as standing still (m/s).
    pub static_speed: f64,
    /// Slack on the non-divergence grouping condition (m): pairs whose
    /// one-step distance grows by less than this still group. Keeps
    /// perfectly co-moving pairs from flickering on estimate noise.
    pub divergence_tol: f64,
    /// Upper bound on pedestrian speed accepted by validation (m/s).
    pub v_max_ped: f64,
}

impl Default for ParamSet {
    fn default() -> Self {
        ParamSet {
            k_p: 1.0,
            k_w: 1.0,
            k_s: 1.0,
            k_i: 1.0,
            k_g: 1.5,
            gamma: 2.0,
            eta: 10.0,
            tau_low: 4.0,
            tau_high: 7.0,
            t_h: 3.0,
            fov: 86.0_f64.to_radians(),
            combine_mode: CombineMode::Additive,
            d_clamp: 0.05,
            sense_radius: 5.0,
            alpha_pf: 100.0_f64.to_radians(),
            dphi: 1.0_f64.to_radians(),
            grouping_rule: GroupingRule::NonDivergence,
            static_speed: 0.05,
            divergence_tol: 0.05,
            v_max_ped: 2.0,
        }
    }
}

/// Harness-level constants: goal tolerance, freeze detection, tracker tuning.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SimConfig {
    pub goal_tol: f64,
    /// Speed below which the robot counts as halted (m/s).
    pub v_freeze: f64,
    /// Consecutive halted seconds before a trial is marked frozen.
    pub t_freeze: f64,
    pub ped_radius: f64,
    /// Deviations beyond this angle abandon goal progress entirely; the
    /// robot halts instead of retreating and reports a freeze (rad).
    pub max_deviation: f64,
    pub tracker: TrackerConfig,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            goal_tol: 0.3,
            v_freeze: 0.05,
            t_freeze: 3.0,
            ped_radius: 0.25,
            max_deviation: std::f64::consts::FRAC_PI_2,
            tracker: TrackerConfig::default(),
        }
    }
}

/// Optional ground-truth group annotation carried by a scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupsTruth {
    pub members: Vec<Vec<u64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cohesion: Option<Vec<CohesionLevel>>,
}

/// A complete simulation setup: agents, robot, parameters, sensor model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub dt: f64,
    pub max_steps: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub corridor_halfwidth: Option<f64>,
    pub robot: RobotConfig,
    #[serde(default)]
    pub params: ParamSet,
    #[serde(default)]
    pub sensor: SensorConfig,
    #[serde(default)]
    pub sim: SimConfig,
    #[serde(default)]
    pub agents: Vec<AgentState>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub groups_truth: Option<GroupsTruth>,
}

impl Scenario {
    pub fn to_toml_string(&self) -> Result<String, toml::ser::Error> {
        toml::to_string(self)
    }

    pub fn from_toml_str(s: &str) -> Result<Scenario, toml::de::Error> {
        toml::from_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ValidationError {
    #[error("duplicate id {0}")]
    DuplicateId(u64),
    #[error("dt must be positive")]
    NonPositiveDt,
    #[error("max_steps must be positive")]
    ZeroMaxSteps,
    #[error("degenerate robot start/goal")]
    DegenerateRobot,
    #[error("non-finite value in {0}")]
    NonFinite(String),
    #[error("agent {id} speed {speed:.3} exceeds v_max_ped {limit:.3}")]
    SpeedExceedsMax { id: u64, speed: f64, limit: f64 },
    #[error("agent {0} face orientation is not a unit vector")]
    FaceNotUnit(u64),
    #[error("invalid parameter: {0}")]
    BadParam(String),
    #[error("groups_truth references unknown agent id {0}")]
    TruthUnknownId(u64),
    #[error("groups_truth lists agent id {0} more than once")]
    TruthDuplicateId(u64),
    #[error("groups_truth cohesion annotation length mismatch")]
    TruthCohesionLen,
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "scenario: {} agents, robot {:?} -> {:?}",
            self.agents.len(),
            <[f64; 2]>::from(self.robot.start),
            <[f64; 2]>::from(self.robot.goal)
        )
    }
}

/// Check every type invariant; pure, returns the full error list.
pub fn validate_scenario(s: &Scenario) -> Result<(), Vec<ValidationError>> {
    let mut errors = Vec::new();

    if s.dt.is_nan() || s.dt <= 0.0 {
        errors.push(ValidationError::NonPositiveDt);
    }
    if s.max_steps == 0 {
        errors.push(ValidationError::ZeroMaxSteps);
    }
    if !s.robot.start.is_finite() || !s.robot.goal.is_finite() {
        errors.push(ValidationError::NonFinite("robot".into()));
    } else if s.robot.start == s.robot.goal {
        errors.push(ValidationError::DegenerateRobot);
    }

    let p = &s.params;
    for (name, ok) in [
        ("gamma", p.gamma > 0.0),
        ("eta", p.eta > 0.0),
        ("tau_low < tau_high", p.tau_low < p.tau_high),
        ("t_h", p.t_h > 0.0),
        ("fov", p.fov > 0.0 && p.fov <= std::f64::consts::PI),
        ("d_clamp", p.d_clamp > 0.0),
        ("dphi", p.dphi > 0.0),
    ] {
        if !ok {
            errors.push(ValidationError::BadParam(name.into()));
        }
    }

    let mut seen = std::collections::BTreeSet::new();
    for a in &s.agents {
        if !seen.insert(a.id) {
            errors.push(ValidationError::DuplicateId(a.id));
        }
        if !a.position.is_finite()
            || !a.velocity.is_finite()
            || !a.goal.is_finite()
            || !a.face.position.is_finite()
            || !a.face.orientation.is_finite()
        {
            errors.push(ValidationError::NonFinite(format!("agent {}", a.id)));
            continue;
        }
        let speed = a.velocity.norm();
        if speed > p.v_max_ped {
            errors.push(ValidationError::SpeedExceedsMax {
                id: a.id,
                speed,
                limit: p.v_max_ped,
            });
        }
        if (a.face.orientation.norm() - 1.0).abs() > 1e-9 {
            errors.push(ValidationError::FaceNotUnit(a.id));
        }
    }

    if let Some(truth) = &s.groups_truth {
        let mut listed = std::collections::BTreeSet::new();
        for group in &truth.members {
            for &id in group {
                if !seen.contains(&id) {
                    errors.push(ValidationError::TruthUnknownId(id));
                }
                if !listed.insert(id) {
                    errors.push(ValidationError::TruthDuplicateId(id));
                }
            }
        }
        if let Some(levels) = &truth.cohesion {
            if levels.len() != truth.members.len() {
                errors.push(ValidationError::TruthCohesionLen);
            }
        }
    }

    if errors.is_empty() {
        Ok(())
    } else {
        Err(errors)
    }
}

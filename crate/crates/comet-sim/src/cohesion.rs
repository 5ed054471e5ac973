//! Group cohesion scoring: proximity, walking speed, group size, interaction,
//! and the optional gender factor, combined into a total score and a
//! low/medium/high level.
//!
//! Conventions resolved here once and used everywhere:
//! - pair sums run over unordered pairs, ordered by ascending member ID;
//! - the interaction angle is measured between one face orientation and the
//!   *reflected* orientation of the other, so mutual facing gives an angle
//!   near zero;
//! - sign(0) counts as +1;
//! - pairs outside the +/- pi/4 window contribute nothing;
//! - the walking-speed ratio is capped at `eta`, the value a static group
//!   receives, which keeps every component inside its stated bound.

use serde::{Deserialize, Serialize};

use crate::world::{FacePose, Gender, ParamSet, Vec2};

pub const INTERACTION_WINDOW: f64 = std::f64::consts::FRAC_PI_4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CohesionLevel {
    Low,
    Medium,
    High,
}

impl CohesionLevel {
    pub fn as_str(self) -> &'static str {
        match self {
            CohesionLevel::Low => "low",
            CohesionLevel::Medium => "medium",
            CohesionLevel::High => "high",
        }
    }
}

/// How component scores combine into the total.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum CombineMode {
    /// c_p + c_w + c_s + c_i
    #[default]
    Additive,
    /// c_p + c_g * (c_w + c_s) + c_i
    GenderWeighted,
}

/// Which features were detectable for a group.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub struct FeatureSet {
    pub proximity: bool,
    pub speed: bool,
    pub size: bool,
    pub interaction: bool,
    pub gender: bool,
}

/// All component scores for one group. Absent features contribute zero
/// (the gender factor defaults to one).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CohesionBreakdown {
    pub c_p: f64,
    pub c_w: f64,
    pub c_s: f64,
    pub c_i: f64,
    pub c_g: f64,
    pub c_tot: f64,
    pub level: CohesionLevel,
    pub features: FeatureSet,
}

impl CohesionBreakdown {
    /// Breakdown with every feature absent.
    pub fn absent(params: &ParamSet) -> Self {
        CohesionBreakdown {
            c_p: 0.0,
            c_w: 0.0,
            c_s: 0.0,
            c_i: 0.0,
            c_g: 1.0,
            c_tot: 0.0,
            level: classify(0.0, params.tau_low, params.tau_high),
            features: FeatureSet::default(),
        }
    }
}

/// Proximity score: k_p * n / sum of pairwise distances, each distance floored
/// at `d_clamp`. Needs at least two members.
pub fn proximity_score(positions: &[Vec2], k_p: f64, d_clamp: f64) -> Option<f64> {
    let n = positions.len();
    if n < 2 {
        return None;
    }
    let mut sum = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            sum += positions[i].distance(positions[j]).max(d_clamp);
        }
    }
    Some(k_p * n as f64 / sum)
}

/// Walking-speed score: scene mean speed over group mean speed, times k_w.
/// Static groups score k_w * eta; the ratio is capped at eta so the static
/// value stays the maximum.
pub fn walking_speed_score(
    group_speeds: &[f64],
    scene_speeds: &[f64],
    k_w: f64,
    eta: f64,
    static_speed: f64,
) -> Option<f64> {
    if group_speeds.is_empty() || scene_speeds.is_empty() {
        return None;
    }
    let group_mean = group_speeds.iter().sum::<f64>() / group_speeds.len() as f64;
    let scene_mean = scene_speeds.iter().sum::<f64>() / scene_speeds.len() as f64;
    if group_mean < static_speed || scene_mean < static_speed {
        return Some(k_w * eta);
    }
    Some(k_w * (scene_mean / group_mean).min(eta))
}

/// Group-size score: k_s * n.
pub fn group_size_score(n: usize, k_s: f64) -> f64 {
    k_s * n as f64
}

/// Two people interact when their faces are closer than the points one unit
/// ahead of their faces: ||fp_i - fp_j|| > ||fp_i + fo_i - (fp_j + fo_j)||.
pub fn is_interacting(f_i: &FacePose, f_j: &FacePose) -> bool {
    let gap = (f_i.position - f_j.position).norm();
    let extrapolated = (f_i.position + f_i.orientation - (f_j.position + f_j.orientation)).norm();
    gap > extrapolated
}

/// Per-pair interaction term sign(theta)/cos(theta), where theta is the signed
/// X-Y-plane angle between `f_i`'s orientation and the reflection of `f_j`'s.
/// Zero outside |theta| <= pi/4 or when either projection degenerates.
pub fn interaction_pair_ratio(f_i: &FacePose, f_j: &FacePose) -> f64 {
    let a = f_i.orientation.xy();
    let b = -f_j.orientation.xy();
    if a.norm() < 1e-9 || b.norm() < 1e-9 {
        return 0.0;
    }
    let theta = crate::world::signed_angle(a, b);
    if theta.abs() > INTERACTION_WINDOW {
        return 0.0;
    }
    let sign = if theta < 0.0 { -1.0 } else { 1.0 };
    sign / theta.cos()
}

/// Interaction score: k_i / n times the sum of pair ratios over unordered
/// pairs (ascending ID order). `faces` holds the members with an available
/// face pose; `n` is the full group size.
pub fn interaction_score(faces: &[(u64, FacePose)], n: usize, k_i: f64) -> Option<f64> {
    if n < 2 || faces.len() < 2 {
        return None;
    }
    let mut ordered: Vec<&(u64, FacePose)> = faces.iter().collect();
    ordered.sort_by_key(|(id, _)| *id);
    let mut sum = 0.0;
    for i in 0..ordered.len() {
        for j in (i + 1)..ordered.len() {
            sum += interaction_pair_ratio(&ordered[i].1, &ordered[j].1);
        }
    }
    Some(k_i * sum / n as f64)
}

/// Gender factor: 1 for a uniform group, k_g for a mixed one. Unknown genders
/// fall back to the neutral 1.
pub fn gender_score(genders: &[Option<Gender>], k_g: f64) -> f64 {
    let mut known = genders.iter().flatten();
    let Some(first) = known.next() else {
        return 1.0;
    };
    if genders.iter().any(|g| g.is_none()) {
        return 1.0;
    }
    if known.all(|g| g == first) {
        1.0
    } else {
        k_g
    }
}

/// Combine component scores into the total.
pub fn total_score(c_p: f64, c_w: f64, c_s: f64, c_i: f64, c_g: f64, mode: CombineMode) -> f64 {
    match mode {
        CombineMode::Additive => c_p + c_w + c_s + c_i,
        CombineMode::GenderWeighted => c_p + c_g * (c_w + c_s) + c_i,
    }
}

/// Half-open classification: Low below tau_low, Medium in [tau_low, tau_high),
/// High at or above tau_high.
pub fn classify(c_tot: f64, tau_low: f64, tau_high: f64) -> CohesionLevel {
    if c_tot < tau_low {
        CohesionLevel::Low
    } else if c_tot < tau_high {
        CohesionLevel::Medium
    } else {
        CohesionLevel::High
    }
}

/// Inputs for scoring one group against the scene.
pub struct GroupObservation<'a> {
    /// Member positions, any order.
    pub positions: &'a [Vec2],
    /// Member speed estimates.
    pub speeds: &'a [f64],
    /// Speeds of every tracked pedestrian in the scene.
    pub scene_speeds: &'a [f64],
    /// (member id, face pose) for members whose face is available.
    pub faces: &'a [(u64, FacePose)],
    /// Gender per member, None when unavailable.
    pub genders: &'a [Option<Gender>],
}

/// Score one group. Features that cannot be computed are absent: they
/// contribute zero (gender contributes the neutral factor one).
pub fn score_group(obs: &GroupObservation<'_>, params: &ParamSet) -> CohesionBreakdown {
    let n = obs.positions.len();
    let c_p = proximity_score(obs.positions, params.k_p, params.d_clamp);
    let c_w = walking_speed_score(
        obs.speeds,
        obs.scene_speeds,
        params.k_w,
        params.eta,
        params.static_speed,
    );
    let c_s = if n >= 1 {
        Some(group_size_score(n, params.k_s))
    } else {
        None
    };
    let c_i = interaction_score(obs.faces, n, params.k_i);

    let gender_on = params.combine_mode == CombineMode::GenderWeighted;
    let gender_known = gender_on && !obs.genders.is_empty() && obs.genders.iter().all(|g| g.is_some());
    let c_g = if gender_on {
        gender_score(obs.genders, params.k_g)
    } else {
        1.0
    };

    let features = FeatureSet {
        proximity: c_p.is_some(),
        speed: c_w.is_some(),
        size: c_s.is_some(),
        interaction: c_i.is_some(),
        gender: gender_known,
    };
    let (c_p, c_w, c_s, c_i) = (
        c_p.unwrap_or(0.0),
        c_w.unwrap_or(0.0),
        c_s.unwrap_or(0.0),
        c_i.unwrap_or(0.0),
    );
    let c_tot = total_score(c_p, c_w, c_s, c_i, c_g, params.combine_mode);
    CohesionBreakdown {
        c_p,
        c_w,
        c_s,
        c_i,
        c_g,
        c_tot,
        level: classify(c_tot, params.tau_low, params.tau_high),
        features,
    }
}

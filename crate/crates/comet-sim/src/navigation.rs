//! Potentially freezing group selection, freezing-zone construction, the two
//! deviation-angle planners, and the dynamic-window baseline.
//!
//! A potential freezing zone (PFZ) is the convex hull of predicted pedestrian
//! positions at horizon `t_h`, inflated by the robot radius. Inflation is
//! realized through distance-based containment (the exact Minkowski sum with a
//! disc), which also handles point and segment hulls uniformly.

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

use crate::cohesion::CohesionBreakdown;
use crate::geometry::{convex_hull, GeometryError, Hull};
use crate::grouping::Group;
use crate::tracking::Track;
use crate::world::{signed_angle, Vec2};

#[derive(Debug, Clone, PartialEq)]
pub struct RobotState {
    pub position: Vec2,
    pub heading: f64,
    /// Velocity the planner deviates; at most `v_max` in norm.
    pub velocity: Vec2,
    pub goal: Vec2,
    pub v_max: f64,
    pub omega_max: f64,
    pub radius: f64,
}

/// Freezing zone: hull of predicted positions, owning group, cached cohesion.
/// `inflation` is the robot radius applied through containment queries.
#[derive(Debug, Clone, PartialEq)]
pub struct Pfz {
    pub hull: Hull,
    pub group_id: Option<u32>,
    pub cohesion: Option<CohesionBreakdown>,
    pub inflation: f64,
}

impl Pfz {
    pub fn contains_point(&self, p: Vec2) -> bool {
        self.hull.contains(p, self.inflation)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PlannerKind {
    Dwa,
    Frozone,
    Comet,
}

impl PlannerKind {
    pub fn as_str(self) -> &'static str {
        match self {
            PlannerKind::Dwa => "dwa",
            PlannerKind::Frozone => "frozone",
            PlannerKind::Comet => "comet",
        }
    }
}

impl std::str::FromStr for PlannerKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "dwa" => Ok(PlannerKind::Dwa),
            "frozone" => Ok(PlannerKind::Frozone),
            "comet" => Ok(PlannerKind::Comet),
            other => Err(format!("unknown planner '{other}'")),
        }
    }
}

/// Static environment constraints applied to candidate positions: corridor
/// walls are forbidden half-planes for the robot only.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct NavEnv {
    pub corridor_halfwidth: Option<f64>,
    /// Robot radius kept clear of the walls.
    pub margin: f64,
}

impl NavEnv {
    pub fn open() -> Self {
        NavEnv::default()
    }

    pub fn corridor(halfwidth: f64, margin: f64) -> Self {
        NavEnv {
            corridor_halfwidth: Some(halfwidth),
            margin,
        }
    }

    pub fn admits(&self, p: Vec2) -> bool {
        match self.corridor_halfwidth {
            Some(hw) => p.y.abs() <= hw - self.margin,
            None => true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum NavError {
    #[error("robot velocity is zero; no direction to rotate")]
    ZeroVelocity,
    #[error("empty point set for freezing zone")]
    EmptyZone,
}

/// Planner verdict: rotate the velocity by an angle, or halt.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Deviation {
    Angle(f64),
    Freeze,
}

impl Deviation {
    pub fn angle(self) -> Option<f64> {
        match self {
            Deviation::Angle(a) => Some(a),
            Deviation::Freeze => None,
        }
    }
}

/// Select the groups likely to cause freezing: centroid inside the sensing
/// region (within `sense_radius`, in the half-plane ahead of the robot), and
/// either static or walking toward the robot (angle between the group's
/// average walking vector and the group-to-robot direction below `alpha_pf`).
/// Such groups close in on the robot over the horizon. Returns indices into
/// `groups`.
pub fn potentially_freezing(
    groups: &[Group],
    tracks: &BTreeMap<u64, Track>,
    robot: &RobotState,
    _t_h: f64,
    sense_radius: f64,
    alpha_pf: f64,
    static_speed: f64,
) -> Vec<usize> {
    let ahead = Vec2::from_angle(robot.heading);
    let mut out = Vec::new();
    for (idx, g) in groups.iter().enumerate() {
        let members: Vec<&Track> = g.members.iter().filter_map(|id| tracks.get(id)).collect();
        if members.is_empty() {
            continue;
        }
        let centroid = members
            .iter()
            .fold(Vec2::ZERO, |acc, t| acc + t.position())
            * (1.0 / members.len() as f64);
        let rel = centroid - robot.position;
        if rel.dot(ahead) < 0.0 || rel.norm() > sense_radius {
            continue;
        }
        let approaching = if g.avg_velocity.norm() < static_speed {
            true
        } else {
            let to_robot = robot.position - centroid;
            to_robot.norm() > 0.0
                && signed_angle(g.avg_velocity, to_robot).abs() < alpha_pf
        };
        if approaching {
            out.push(idx);
        }
    }
    out
}

/// Advance every member by the group's mean walking vector for `t_h` seconds.
pub fn predict_group_positions(
    group: &Group,
    tracks: &BTreeMap<u64, Track>,
    t_h: f64,
) -> Vec<Vec2> {
    group
        .members
        .iter()
        .filter_map(|id| tracks.get(id))
        .map(|t| t.position() + group.avg_velocity * t_h)
        .collect()
}

/// Hull of the predicted member positions, inflated by the robot radius.
pub fn build_pfz(
    predicted: &[Vec2],
    group_id: u32,
    cohesion: CohesionBreakdown,
    robot_radius: f64,
) -> Result<Pfz, GeometryError> {
    Ok(Pfz {
        hull: convex_hull(predicted)?,
        group_id: Some(group_id),
        cohesion: Some(cohesion),
        inflation: robot_radius,
    })
}

/// Single hull over all potentially freezing pedestrians, each advanced by its
/// own velocity.
pub fn frozone_pfz(
    pf_tracks: &[(Vec2, Vec2)],
    t_h: f64,
    robot_radius: f64,
) -> Result<Pfz, NavError> {
    if pf_tracks.is_empty() {
        return Err(NavError::EmptyZone);
    }
    let predicted: Vec<Vec2> = pf_tracks.iter().map(|&(p, v)| p + v * t_h).collect();
    let hull = convex_hull(&predicted).map_err(|_| NavError::EmptyZone)?;
    Ok(Pfz {
        hull,
        group_id: None,
        cohesion: None,
        inflation: robot_radius,
    })
}

/// Grid argmin over deviation angles {0, +/-dphi, ..., +/-pi}: among feasible
/// candidate points c(phi) = position + R(phi) v t_h, return the angle whose
/// point lies closest to the goal. Ties prefer the smaller magnitude, then the
/// positive sign. `None` when no candidate is feasible.
pub fn deviation_search<F: Fn(Vec2) -> bool>(
    robot: &RobotState,
    feasible: F,
    t_h: f64,
    dphi: f64,
) -> Result<Option<f64>, NavError> {
    if robot.velocity.norm() == 0.0 {
        return Err(NavError::ZeroVelocity);
    }
    let steps = (std::f64::consts::PI / dphi).ceil() as i64;
    let mut best: Option<(f64, f64)> = None; // (dist, phi)
    let mut consider = |phi: f64| {
        let c = robot.position + robot.velocity.rotated(phi) * t_h;
        if !feasible(c) {
            return;
        }
        let d = c.distance(robot.goal);
        // strict improvement keeps the earlier (smaller |phi|, positive) angle
        if best.is_none_or(|(bd, _)| d < bd - 1e-12) {
            best = Some((d, phi));
        }
    };
    consider(0.0);
    for k in 1..=steps {
        let phi = (k as f64 * dphi).min(std::f64::consts::PI);
        consider(phi);
        if phi < std::f64::consts::PI {
            consider(-phi);
        }
    }
    Ok(best.map(|(_, phi)| phi))
}

/// Cohesion-aware deviation. Phase 1 searches for the smallest deviation whose
/// horizon point avoids every group zone. When nothing qualifies, phase 2
/// admits points inside the minimum-cohesion zone (minus overlaps with other
/// zones), letting the robot pass through the most permeable group. No
/// deviation is returned while the undisturbed horizon point is already clear.
pub fn comet_deviation(
    robot: &RobotState,
    pfzs: &[Pfz],
    env: &NavEnv,
    t_h: f64,
    dphi: f64,
) -> Result<Deviation, NavError> {
    if robot.velocity.norm() == 0.0 {
        return Err(NavError::ZeroVelocity);
    }
    let outside_all = |p: Vec2| pfzs.iter().all(|z| !z.contains_point(p));
    let phase1 = |p: Vec2| env.admits(p) && outside_all(p);

    let straight = robot.position + robot.velocity * t_h;
    if phase1(straight) {
        return Ok(Deviation::Angle(0.0));
    }
    if let Some(phi) = deviation_search(robot, phase1, t_h, dphi)? {
        return Ok(Deviation::Angle(phi));
    }

    // phase 2: pass through the lowest-cohesion zone
    let Some(min_idx) = lowest_cohesion_index(pfzs, robot.position) else {
        return Ok(Deviation::Freeze);
    };
    let in_region = |p: Vec2| {
        pfzs[min_idx].contains_point(p)
            && pfzs
                .iter()
                .enumerate()
                .all(|(i, z)| i == min_idx || !z.contains_point(p))
    };
    let phase2 = |p: Vec2| env.admits(p) && (in_region(p) || outside_all(p));
    match deviation_search(robot, phase2, t_h, dphi)? {
        Some(phi) => Ok(Deviation::Angle(phi)),
        None => Ok(Deviation::Freeze),
    }
}

/// Index of the zone with minimum total cohesion; ties go to the zone nearest
/// the robot. Zones without a cohesion score rank last.
pub fn lowest_cohesion_index(pfzs: &[Pfz], robot_position: Vec2) -> Option<usize> {
    (0..pfzs.len()).min_by(|&a, &b| {
        let ca = pfzs[a].cohesion.map_or(f64::INFINITY, |c| c.c_tot);
        let cb = pfzs[b].cohesion.map_or(f64::INFINITY, |c| c.c_tot);
        ca.total_cmp(&cb).then_with(|| {
            pfzs[a]
                .hull
                .distance(robot_position)
                .total_cmp(&pfzs[b].hull.distance(robot_position))
        })
    })
}

/// Hull-avoidance deviation over a single zone. phi_1 is the boundary argmin;
/// phi_2 is the bearing of the nearest potentially freezing pedestrian,
/// accepted only when nonzero and when its horizon point lies outside the
/// zone. The smaller magnitude wins; with neither available the planner
/// reports a freeze.
pub fn frozone_deviation(
    robot: &RobotState,
    pfz: &Pfz,
    nearest_pf: Vec2,
    env: &NavEnv,
    t_h: f64,
    dphi: f64,
) -> Result<Deviation, NavError> {
    if robot.velocity.norm() == 0.0 {
        return Err(NavError::ZeroVelocity);
    }
    let feasible = |p: Vec2| env.admits(p) && !pfz.contains_point(p);

    let straight = robot.position + robot.velocity * t_h;
    if feasible(straight) {
        return Ok(Deviation::Angle(0.0));
    }

    let phi1 = deviation_search(robot, feasible, t_h, dphi)?;
    let phi2 = {
        let bearing = signed_angle(robot.velocity, nearest_pf - robot.position);
        let candidate = robot.position + robot.velocity.rotated(bearing) * t_h;
        (bearing != 0.0 && feasible(candidate)).then_some(bearing)
    };
    match (phi1, phi2) {
        (Some(a), Some(b)) => Ok(Deviation::Angle(if b.abs() < a.abs() { b } else { a })),
        (Some(a), None) => Ok(Deviation::Angle(a)),
        (None, Some(b)) => Ok(Deviation::Angle(b)),
        (None, None) => Ok(Deviation::Freeze),
    }
}

/// Dynamic-window baseline configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DwaConfig {
    pub accel: f64,
    pub alpha_accel: f64,
    pub v_samples: usize,
    pub omega_samples: usize,
    pub control_dt: f64,
    pub rollout_dt: f64,
    pub w_heading: f64,
    pub w_clearance: f64,
    pub w_velocity: f64,
    pub clearance_cap: f64,
}

impl Default for DwaConfig {
    fn default() -> Self {
        DwaConfig {
            accel: 2.5,
            alpha_accel: 6.0,
            v_samples: 6,
            omega_samples: 15,
            control_dt: 0.1,
            rollout_dt: 0.3,
            w_heading: 1.0,
            w_clearance: 0.4,
            w_velocity: 1.2,
            clearance_cap: 2.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DwaCommand {
    pub v: f64,
    pub omega: f64,
    pub freeze: bool,
}

/// Roll a (v, omega) arc forward from a pose. Heading integrates first, then
/// position advances along the updated heading.
pub fn rollout_arc(
    start: Vec2,
    heading: f64,
    v: f64,
    omega: f64,
    horizon: f64,
    dt: f64,
) -> Vec<(Vec2, f64)> {
    let n = (horizon / dt).ceil() as usize;
    let mut out = Vec::with_capacity(n);
    let mut p = start;
    let mut h = heading;
    for _ in 0..n {
        h += omega * dt;
        p = p + Vec2::from_angle(h) * (v * dt);
        out.push((p, h));
    }
    out
}

/// Sample the admissible dynamic window, score collision-free rollouts by
/// goal heading, clearance, and speed, and return the best command. With no
/// admissible sample the robot halts and flags a freeze.
#[allow(clippy::too_many_arguments)]
pub fn dwa_plan(
    robot: &RobotState,
    v_cur: f64,
    omega_cur: f64,
    obstacles: &[Vec2],
    obstacle_radius: f64,
    env: &NavEnv,
    cfg: &DwaConfig,
    t_h: f64,
) -> DwaCommand {
    let v_lo = (v_cur - cfg.accel * cfg.control_dt).max(0.0);
    let v_hi = (v_cur + cfg.accel * cfg.control_dt).min(robot.v_max);
    let w_lo = (omega_cur - cfg.alpha_accel * cfg.control_dt).max(-robot.omega_max);
    let w_hi = (omega_cur + cfg.alpha_accel * cfg.control_dt).min(robot.omega_max);
    let collide_dist = robot.radius + obstacle_radius;
    // a body already in contact cannot be avoided by any command; plan
    // against the rest and let the clearance term pull the robot free
    let obstacles: Vec<Vec2> = obstacles
        .iter()
        .copied()
        .filter(|ob| ob.distance(robot.position) > collide_dist)
        .collect();

    let mut best: Option<(f64, f64, f64)> = None; // (score, v, omega)
    for i in 0..cfg.v_samples {
        let v = if cfg.v_samples == 1 {
            v_lo
        } else {
            v_lo + (v_hi - v_lo) * i as f64 / (cfg.v_samples - 1) as f64
        };
        for j in 0..cfg.omega_samples {
            let omega = if cfg.omega_samples == 1 {
                w_lo
            } else {
                w_lo + (w_hi - w_lo) * j as f64 / (cfg.omega_samples - 1) as f64
            };
            let path = rollout_arc(robot.position, robot.heading, v, omega, t_h, cfg.rollout_dt);
            let mut clearance = cfg.clearance_cap;
            let mut collides = false;
            for &(p, _) in &path {
                if !env.admits(p) {
                    collides = true;
                    break;
                }
                for ob in &obstacles {
                    let d = p.distance(*ob) - collide_dist;
                    if d <= 0.0 {
                        collides = true;
                        break;
                    }
                    clearance = clearance.min(d);
                }
                if collides {
                    break;
                }
            }
            if collides {
                continue;
            }
            let (end, end_heading) = *path.last().expect("non-empty rollout");
            let heading_err = crate::world::wrap_angle((robot.goal - end).angle() - end_heading);
            let score = cfg.w_heading * (std::f64::consts::PI - heading_err.abs())
                / std::f64::consts::PI
                + cfg.w_clearance * clearance / cfg.clearance_cap
                + cfg.w_velocity * v / robot.v_max.max(1e-9);
            if best.is_none_or(|(bs, _, _)| score > bs + 1e-12) {
                best = Some((score, v, omega));
            }
        }
    }
    match best {
        Some((_, v, omega)) => DwaCommand {
            v,
            omega,
            freeze: false,
        },
        None => DwaCommand {
            v: 0.0,
            omega: 0.0,
            freeze: true,
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cohesion::{classify, CohesionLevel};
    use crate::world::ParamSet;

    fn robot_toward(goal: Vec2) -> RobotState {
        RobotState {
            position: Vec2::ZERO,
            heading: 0.0,
            velocity: (goal - Vec2::ZERO).normalized() * 1.0,
            goal,
            v_max: 1.0,
            omega_max: 1.5,
            radius: 0.3,
        }
    }

    fn breakdown(c_tot: f64) -> CohesionBreakdown {
        CohesionBreakdown {
            c_p: 0.0,
            c_w: 0.0,
            c_s: c_tot,
            c_i: 0.0,
            c_g: 1.0,
            c_tot,
            level: classify(c_tot, 4.0, 7.0),
            features: Default::default(),
        }
    }

    fn zone(points: &[Vec2], c_tot: f64) -> Pfz {
        build_pfz(points, 0, breakdown(c_tot), 0.0).unwrap()
    }

    fn mk_track(id: u64, p: Vec2, v: Vec2) -> Track {
        Track {
            id,
            state: [p.x, p.y, v.x, v.y],
            cov: [[0.0; 4]; 4],
            last_seen: 0,
        }
    }

    fn group_of(tracks: &[Track]) -> (Group, BTreeMap<u64, Track>) {
        let members: Vec<u64> = tracks.iter().map(|t| t.id).collect();
        let avg = tracks
            .iter()
            .fold(Vec2::ZERO, |acc, t| acc + t.velocity())
            * (1.0 / tracks.len() as f64);
        let map = tracks.iter().map(|t| (t.id, t.clone())).collect();
        (
            Group {
                id: 0,
                members,
                avg_velocity: avg,
            },
            map,
        )
    }

    #[test]
    fn head_on_group_is_potentially_freezing() {
        let tracks = [
            mk_track(0, Vec2::new(3.0, 0.2), Vec2::new(-1.0, 0.0)),
            mk_track(1, Vec2::new(3.0, -0.2), Vec2::new(-1.0, 0.0)),
        ];
        let (g, map) = group_of(&tracks);
        let robot = robot_toward(Vec2::new(10.0, 0.0));
        let sel = potentially_freezing(&[g], &map, &robot, 3.0, 5.0, 1.745, 0.05);
        assert_eq!(sel, vec![0]);
    }

    #[test]
    fn group_behind_is_not_selected() {
        let tracks = [mk_track(0, Vec2::new(-3.0, 0.0), Vec2::new(-1.0, 0.0))];
        let (g, map) = group_of(&tracks);
        let robot = robot_toward(Vec2::new(10.0, 0.0));
        let sel = potentially_freezing(&[g], &map, &robot, 3.0, 5.0, 1.745, 0.05);
        assert!(sel.is_empty());
    }

    #[test]
    fn receding_group_is_not_selected() {
        // walking away faster than the robot: range rate is positive
        let p = Vec2::new(3.0, 0.0);
        let v = Vec2::new(1.4, 0.0);
        let range_rate = (p - Vec2::ZERO).normalized().dot(v);
        assert!(range_rate > 0.0);
        let tracks = [mk_track(0, p, v)];
        let (g, map) = group_of(&tracks);
        let robot = robot_toward(Vec2::new(10.0, 0.0));
        let sel = potentially_freezing(&[g], &map, &robot, 3.0, 5.0, 1.745, 0.05);
        assert!(sel.is_empty());
    }

    #[test]
    fn prediction_uses_shared_mean_velocity() {
        let tracks = [
            mk_track(0, Vec2::new(1.0, 0.0), Vec2::new(1.0, 0.0)),
            mk_track(1, Vec2::new(1.0, 1.0), Vec2::new(1.0, 0.0)),
        ];
        let (g, map) = group_of(&tracks);
        let pred = predict_group_positions(&g, &map, 2.0);
        assert_eq!(pred, vec![Vec2::new(3.0, 0.0), Vec2::new(3.0, 1.0)]);

        let mixed = [
            mk_track(0, Vec2::new(0.0, 0.0), Vec2::new(1.0, 0.0)),
            mk_track(1, Vec2::new(1.0, 0.0), Vec2::new(0.0, 1.0)),
        ];
        let (g, map) = group_of(&mixed);
        let pred = predict_group_positions(&g, &map, 1.0);
        assert_eq!(pred[0], Vec2::new(0.5, 0.5));
        assert_eq!(pred[1], Vec2::new(1.5, 0.5));
    }

    #[test]
    fn static_group_prediction_is_identity() {
        let tracks = [
            mk_track(0, Vec2::new(2.0, 1.0), Vec2::ZERO),
            mk_track(1, Vec2::new(2.5, 1.0), Vec2::ZERO),
        ];
        let (g, map) = group_of(&tracks);
        assert_eq!(
            predict_group_positions(&g, &map, 3.0),
            vec![Vec2::new(2.0, 1.0), Vec2::new(2.5, 1.0)]
        );
    }

    #[test]
    fn pfz_degenerate_shapes() {
        let single = zone(&[Vec2::new(1.0, 1.0)], 1.0);
        assert!(single.hull.is_point());
        let dyad = zone(&[Vec2::new(1.0, 0.0), Vec2::new(2.0, 0.0)], 1.0);
        assert!(dyad.hull.is_segment());
        let tri = zone(
            &[Vec2::new(0.0, 0.0), Vec2::new(1.0, 0.0), Vec2::new(0.5, 1.0)],
            1.0,
        );
        assert_eq!(tri.hull.vertices().len(), 3);
    }

    #[test]
    fn frozone_hull_covers_group_zones() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..200 {
            // clusters with shared velocity so predictions coincide
            let mut pf: Vec<(Vec2, Vec2)> = Vec::new();
            let mut zones = Vec::new();
            for _ in 0..rng.gen_range(1..5) {
                let c = Vec2::new(rng.gen_range(1.0..6.0), rng.gen_range(-3.0..3.0));
                let v = Vec2::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                let pts: Vec<Vec2> = (0..rng.gen_range(1..5))
                    .map(|_| c + Vec2::new(rng.gen_range(-0.7..0.7), rng.gen_range(-0.7..0.7)))
                    .collect();
                for &p in &pts {
                    pf.push((p, v));
                }
                let predicted: Vec<Vec2> = pts.iter().map(|&p| p + v * 3.0).collect();
                zones.push(zone(&predicted, 1.0));
            }
            let big = frozone_pfz(&pf, 3.0, 0.0).unwrap();
            for z in &zones {
                for &vtx in z.hull.vertices() {
                    assert!(big.hull.contains(vtx, 1e-9));
                }
            }
        }
    }

    #[test]
    fn straight_path_feasible_gives_zero() {
        let robot = robot_toward(Vec2::new(10.0, 0.0));
        let phi = deviation_search(&robot, |_| true, 3.0, 0.01745)
            .unwrap()
            .unwrap();
        assert_eq!(phi, 0.0);
    }

    #[test]
    fn fully_enclosed_is_infeasible() {
        let robot = robot_toward(Vec2::new(10.0, 0.0));
        let phi = deviation_search(&robot, |_| false, 3.0, 0.01745).unwrap();
        assert!(phi.is_none());
    }

    #[test]
    fn zero_velocity_is_error() {
        let mut robot = robot_toward(Vec2::new(10.0, 0.0));
        robot.velocity = Vec2::ZERO;
        assert_eq!(
            deviation_search(&robot, |_| true, 3.0, 0.01745).unwrap_err(),
            NavError::ZeroVelocity
        );
    }

    #[test]
    fn symmetric_block_breaks_tie_positive() {
        // square zone symmetric about the goal line
        let robot = robot_toward(Vec2::new(10.0, 0.0));
        let z = zone(
            &[
                Vec2::new(2.0, -1.0),
                Vec2::new(4.0, -1.0),
                Vec2::new(4.0, 1.0),
                Vec2::new(2.0, 1.0),
            ],
            1.0,
        );
        let phi = deviation_search(&robot, |p| !z.contains_point(p), 3.0, 0.017453292519943295)
            .unwrap()
            .unwrap();
        assert!(phi > 0.0, "tie should resolve to the positive side: {phi}");
    }

    #[test]
    fn comet_no_zones_means_no_deviation() {
        let robot = robot_toward(Vec2::new(10.0, 0.0));
        let d = comet_deviation(&robot, &[], &NavEnv::open(), 3.0, 0.01745).unwrap();
        assert_eq!(d, Deviation::Angle(0.0));
    }

    #[test]
    fn comet_clear_trajectory_means_no_deviation() {
        let robot = robot_toward(Vec2::new(10.0, 0.0));
        let z = zone(
            &[Vec2::new(2.0, 2.0), Vec2::new(3.0, 2.0), Vec2::new(2.5, 3.0)],
            1.0,
        );
        let d = comet_deviation(&robot, &[z], &NavEnv::open(), 3.0, 0.01745).unwrap();
        assert_eq!(d, Deviation::Angle(0.0));
    }

    #[test]
    fn comet_phase2_enters_lowest_cohesion_zone() {
        // robot fully ringed by one large low-cohesion zone plus a high one;
        // phase 1 fails, phase 2 returns an angle into the low zone
        let robot = robot_toward(Vec2::new(10.0, 0.0));
        let low = zone(
            &[
                Vec2::new(-4.0, -4.0),
                Vec2::new(4.0, -4.0),
                Vec2::new(4.0, 4.0),
                Vec2::new(-4.0, 4.0),
            ],
            1.0,
        );
        let high = zone(
            &[
                Vec2::new(2.0, -0.5),
                Vec2::new(3.5, -0.5),
                Vec2::new(3.5, 0.5),
                Vec2::new(2.0, 0.5),
            ],
            9.0,
        );
        let d = comet_deviation(&robot, &[low.clone(), high.clone()], &NavEnv::open(), 3.0, 0.01745).unwrap();
        let phi = d.angle().expect("phase 2 should find an angle");
        let c = robot.position + robot.velocity.rotated(phi) * 3.0;
        assert!(low.contains_point(c) && !high.contains_point(c));
        assert!(phi.abs() > 0.0);
    }

    #[test]
    fn comet_freezes_only_when_nothing_admits() {
        let robot = robot_toward(Vec2::new(10.0, 0.0));
        // min-cohesion zone out of reach of the 3 m horizon circle, another
        // zone engulfing the whole circle
        let engulf = zone(
            &[
                Vec2::new(-5.0, -5.0),
                Vec2::new(5.0, -5.0),
                Vec2::new(5.0, 5.0),
                Vec2::new(-5.0, 5.0),
            ],
            8.0,
        );
        let far_low = zone(&[Vec2::new(9.0, 9.0)], 0.5);
        let d = comet_deviation(&robot, &[engulf, far_low], &NavEnv::open(), 3.0, 0.01745).unwrap();
        assert_eq!(d, Deviation::Freeze);
    }

    #[test]
    fn frozone_clear_trajectory_means_no_deviation() {
        let robot = robot_toward(Vec2::new(10.0, 0.0));
        let z = zone(
            &[Vec2::new(2.0, 2.0), Vec2::new(3.0, 2.0), Vec2::new(2.5, 3.0)],
            1.0,
        );
        let d =
            frozone_deviation(&robot, &z, Vec2::new(2.5, 2.5), &NavEnv::open(), 3.0, 0.01745)
                .unwrap();
        assert_eq!(d, Deviation::Angle(0.0));
    }

    #[test]
    fn frozone_picks_smaller_magnitude_branch() {
        let robot = robot_toward(Vec2::new(10.0, 0.0));
        // zone blocking straight ahead, nearest pedestrian at ~30 degrees
        let z = zone(
            &[
                Vec2::new(2.0, -1.2),
                Vec2::new(4.0, -1.2),
                Vec2::new(4.0, 0.6),
                Vec2::new(2.0, 0.6),
            ],
            1.0,
        );
        let near = Vec2::new(2.0, 1.1547); // bearing 30 degrees
        let d = frozone_deviation(&robot, &z, near, &NavEnv::open(), 3.0, 0.017453292519943295)
            .unwrap();
        let phi = d.angle().unwrap();
        // phi1 needs > 11 degrees on the positive side; phi2 = 30 degrees
        let phi1 = deviation_search(&robot, |p| !z.contains_point(p), 3.0, 0.017453292519943295)
            .unwrap()
            .unwrap();
        let expected = if (30.0f64).to_radians().abs() < phi1.abs() {
            (30.0f64).to_radians()
        } else {
            phi1
        };
        assert!((phi - expected).abs() < 1e-9);
    }

    #[test]
    fn dwa_empty_world_runs_fast_toward_goal() {
        let robot = robot_toward(Vec2::new(10.0, 0.0));
        let cfg = DwaConfig::default();
        let cmd = dwa_plan(&robot, 0.9, 0.0, &[], 0.25, &NavEnv::open(), &cfg, 3.0);
        assert!(!cmd.freeze);
        assert!(cmd.v > 0.9);
        assert!(cmd.omega.abs() < 0.3);
    }

    #[test]
    fn dwa_boxed_in_freezes() {
        let robot = robot_toward(Vec2::new(10.0, 0.0));
        let cfg = DwaConfig::default();
        let ring: Vec<Vec2> = (0..24)
            .map(|i| Vec2::from_angle(i as f64 * std::f64::consts::TAU / 24.0) * 0.7)
            .collect();
        let cmd = dwa_plan(&robot, 0.5, 0.0, &ring, 0.25, &NavEnv::open(), &cfg, 3.0);
        assert!(cmd.freeze);
        assert_eq!((cmd.v, cmd.omega), (0.0, 0.0));
    }

    #[test]
    fn dwa_obstacle_ahead_turns() {
        let robot = robot_toward(Vec2::new(10.0, 0.0));
        let cfg = DwaConfig::default();
        let cmd = dwa_plan(
            &robot,
            0.8,
            0.0,
            &[Vec2::new(2.5, 0.0)],
            0.25,
            &NavEnv::open(),
            &cfg,
            3.0,
        );
        assert!(!cmd.freeze);
        assert!(cmd.omega.abs() > 0.0, "must steer around: {:?}", cmd);
    }

    #[test]
    fn dwa_matches_independent_sampler() {
        // oracle: same candidate lattice, independently written rollout/score
        let robot = robot_toward(Vec2::new(10.0, 0.0));
        let cfg = DwaConfig::default();
        let obstacles = [Vec2::new(2.5, 0.0), Vec2::new(3.0, 0.8)];
        let cmd = dwa_plan(&robot, 0.8, 0.0, &obstacles, 0.25, &NavEnv::open(), &cfg, 3.0);

        let mut best: Option<(f64, f64, f64)> = None;
        let v_lo = (0.8 - cfg.accel * cfg.control_dt).max(0.0);
        let v_hi = (0.8 + cfg.accel * cfg.control_dt).min(robot.v_max);
        let w_lo = (0.0 - cfg.alpha_accel * cfg.control_dt).max(-robot.omega_max);
        let w_hi = (0.0 + cfg.alpha_accel * cfg.control_dt).min(robot.omega_max);
        for i in 0..cfg.v_samples {
            let v = v_lo + (v_hi - v_lo) * i as f64 / (cfg.v_samples - 1) as f64;
            for j in 0..cfg.omega_samples {
                let w = w_lo + (w_hi - w_lo) * j as f64 / (cfg.omega_samples - 1) as f64;
                let steps = (3.0f64 / cfg.rollout_dt).ceil() as usize;
                let (mut p, mut h) = (robot.position, robot.heading);
                let mut clear = cfg.clearance_cap;
                let mut hit = false;
                let mut end = (p, h);
                for _ in 0..steps {
                    h += w * cfg.rollout_dt;
                    p = p + Vec2::from_angle(h) * (v * cfg.rollout_dt);
                    for ob in &obstacles {
                        let d = p.distance(*ob) - (robot.radius + 0.25);
                        if d <= 0.0 {
                            hit = true;
                        }
                        clear = clear.min(d.max(0.0));
                    }
                    end = (p, h);
                    if hit {
                        break;
                    }
                }
                if hit {
                    continue;
                }
                let err = crate::world::wrap_angle((robot.goal - end.0).angle() - end.1);
                let score = cfg.w_heading * (std::f64::consts::PI - err.abs())
                    / std::f64::consts::PI
                    + cfg.w_clearance * clear / cfg.clearance_cap
                    + cfg.w_velocity * v / robot.v_max;
                if best.is_none_or(|(bs, _, _)| score > bs + 1e-12) {
                    best = Some((score, v, w));
                }
            }
        }
        let (_, bv, bw) = best.unwrap();
        assert!((cmd.v - bv).abs() < 1e-9 && (cmd.omega - bw).abs() < 1e-9);
    }

    #[test]
    fn zone_union_containment_at_zero_horizon() {
        // with per-member velocities disabled by a zero horizon, group zones
        // sit inside the single hull even for heterogeneous velocities
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(13);
        for _ in 0..100 {
            let mut pf: Vec<(Vec2, Vec2)> = Vec::new();
            let mut zones = Vec::new();
            for _ in 0..rng.gen_range(1..4) {
                let c = Vec2::new(rng.gen_range(1.0..5.0), rng.gen_range(-2.0..2.0));
                let pts: Vec<Vec2> = (0..rng.gen_range(1..5))
                    .map(|_| c + Vec2::new(rng.gen_range(-0.6..0.6), rng.gen_range(-0.6..0.6)))
                    .collect();
                for &p in &pts {
                    let v = Vec2::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                    pf.push((p, v));
                }
                zones.push(zone(&pts, 1.0));
            }
            let big = frozone_pfz(&pf, 0.0, 0.0).unwrap();
            for z in &zones {
                for &vtx in z.hull.vertices() {
                    assert!(big.hull.contains(vtx, 1e-9));
                }
            }
        }
    }

    #[test]
    fn zone_choice_tie_breaks_to_nearest() {
        let zones = vec![
            zone(&[Vec2::new(5.0, 5.0)], 2.0),
            zone(&[Vec2::new(1.0, 0.0)], 2.0),
        ];
        assert_eq!(lowest_cohesion_index(&zones, Vec2::ZERO), Some(1));
    }

    #[test]
    fn deviation_magnitude_is_rotation_invariant() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(21);
        let dphi = 0.017453292519943295;
        for _ in 0..50 {
            let pts: Vec<Vec2> = (0..5)
                .map(|_| {
                    Vec2::new(rng.gen_range(1.5..4.5), rng.gen_range(-1.5..1.5))
                })
                .collect();
            let hull = convex_hull(&pts).unwrap();
            let beta = rng.gen_range(-3.0..3.0);
            let rotated_pts: Vec<Vec2> = pts.iter().map(|p| p.rotated(beta)).collect();
            let rotated_hull = convex_hull(&rotated_pts).unwrap();

            let robot = robot_toward(Vec2::new(10.0, 0.0));
            let mut rotated_robot = robot.clone();
            rotated_robot.goal = robot.goal.rotated(beta);
            rotated_robot.velocity = robot.velocity.rotated(beta);
            rotated_robot.heading = robot.heading + beta;

            let a = deviation_search(&robot, |p| !hull.contains(p, 0.3), 3.0, dphi).unwrap();
            let b = deviation_search(
                &rotated_robot,
                |p| !rotated_hull.contains(p, 0.3),
                3.0,
                dphi,
            )
            .unwrap();
            match (a, b) {
                (Some(pa), Some(pb)) => {
                    assert!(
                        (pa.abs() - pb.abs()).abs() <= dphi + 1e-9,
                        "|{pa}| vs |{pb}| under rotation {beta}"
                    );
                }
                (None, None) => {}
                other => panic!("feasibility changed under rotation: {other:?}"),
            }
        }
    }

    #[test]
    fn levels_are_ordered_inputs_for_zone_choice() {
        let zones = vec![
            zone(&[Vec2::new(1.0, 1.0)], 5.0),
            zone(&[Vec2::new(2.0, 2.0)], 2.0),
            zone(&[Vec2::new(3.0, 3.0)], 8.0),
        ];
        assert_eq!(lowest_cohesion_index(&zones, Vec2::ZERO), Some(1));
        assert_eq!(zones[2].cohesion.unwrap().level, CohesionLevel::High);
        let _ = ParamSet::default();
    }
}

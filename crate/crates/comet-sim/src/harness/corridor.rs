//! Randomized corridor scenarios: clustered pedestrians walking the length of
//! a corridor the robot has to traverse.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::world::{AgentState, FacePose, Gender, Scenario, Vec2, Vec3};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CorridorConfig {
    /// Straight-line start-goal distance (m).
    pub length: f64,
    pub halfwidth: f64,
    pub cluster_min: u32,
    pub cluster_max: u32,
    pub speed_min: f64,
    pub speed_max: f64,
    /// Probability a cluster walks against the robot.
    pub p_oncoming: f64,
    /// Probability a member's face points at the cluster centroid rather than
    /// along its velocity.
    pub p_face_centroid: f64,
    pub spawn_x_min: f64,
    pub spawn_x_max: f64,
    /// Minimum distance between cluster centers at spawn.
    pub min_cluster_sep: f64,
    /// Member scatter around the cluster center (m, per axis).
    pub position_jitter: f64,
    pub face_height: f64,
    /// Spawn keep-out distance from the walls.
    pub wall_margin: f64,
}

impl Default for CorridorConfig {
    fn default() -> Self {
        CorridorConfig {
            length: 20.0,
            halfwidth: 3.0,
            cluster_min: 2,
            cluster_max: 5,
            speed_min: 0.5,
            speed_max: 1.5,
            p_oncoming: 0.8,
            p_face_centroid: 0.7,
            spawn_x_min: 3.0,
            spawn_x_max: 14.0,
            min_cluster_sep: 2.2,
            position_jitter: 0.6,
            face_height: 1.7,
            wall_margin: 0.4,
        }
    }
}

fn mix_seed(seed: u64, count: u32) -> u64 {
    let mut x = seed
        .wrapping_mul(0x9E37_79B9_7F4A_7C15)
        .wrapping_add(count as u64);
    x ^= x >> 30;
    x = x.wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x ^= x >> 27;
    x
}

/// Generate a corridor scenario with `count` pedestrians grouped into
/// co-moving clusters. The pedestrian layout depends only on
/// (count, seed, config); the `base` scenario supplies every other knob.
pub fn corridor_scenario(count: u32, seed: u64, c: &CorridorConfig, base: &Scenario) -> Scenario {
    let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(seed, count));
    let mut scenario = base.clone();
    scenario.corridor_halfwidth = Some(c.halfwidth);
    scenario.robot.start = Vec2::ZERO;
    scenario.robot.goal = Vec2::new(c.length, 0.0);

    let y_span = c.halfwidth - c.wall_margin;
    let mut centers: Vec<Vec2> = Vec::new();
    let mut agents: Vec<AgentState> = Vec::new();
    let mut truth: Vec<Vec<u64>> = Vec::new();
    let mut id = 0u64;

    while (agents.len() as u32) < count {
        let remaining = count - agents.len() as u32;
        let size = rng.gen_range(c.cluster_min..=c.cluster_max).min(remaining);

        let mut center = Vec2::ZERO;
        for attempt in 0..200 {
            center = Vec2::new(
                rng.gen_range(c.spawn_x_min..c.spawn_x_max),
                rng.gen_range(-y_span..y_span),
            );
            let sep_ok = centers
                .iter()
                .all(|&o| o.distance(center) >= c.min_cluster_sep);
            if sep_ok || attempt == 199 {
                break;
            }
        }
        centers.push(center);

        let oncoming = rng.gen_bool(c.p_oncoming);
        let speed = rng.gen_range(c.speed_min..c.speed_max);
        let dir = if oncoming {
            Vec2::new(-1.0, 0.0)
        } else {
            Vec2::new(1.0, 0.0)
        };
        let velocity = dir * speed;

        let mut member_ids = Vec::new();
        let mut members = Vec::new();
        for _ in 0..size {
            let jitter = Vec2::new(
                rng.gen_range(-c.position_jitter..c.position_jitter),
                rng.gen_range(-c.position_jitter..c.position_jitter),
            );
            let position = Vec2::new(center.x + jitter.x, (center.y + jitter.y).clamp(-y_span, y_span));
            members.push(position);
            member_ids.push(id);
            id += 1;
        }
        let centroid = members.iter().fold(Vec2::ZERO, |a, &p| a + p) * (1.0 / members.len() as f64);

        for (&position, &mid) in members.iter().zip(&member_ids) {
            let toward_centroid = rng.gen_bool(c.p_face_centroid);
            let face_dir = if toward_centroid && centroid.distance(position) > 1e-6 {
                (centroid - position).normalized()
            } else {
                dir
            };
            let gender = if rng.gen_bool(0.5) { Gender::A } else { Gender::B };
            agents.push(AgentState {
                id: mid,
                position,
                velocity,
                face: FacePose {
                    position: Vec3::new(position.x, position.y, c.face_height),
                    orientation: Vec3::new(face_dir.x, face_dir.y, 0.0),
                },
                gender,
                goal: position + dir * 100.0,
            });
        }
        truth.push(member_ids);
    }

    scenario.agents = agents;
    scenario.groups_truth = Some(crate::world::GroupsTruth {
        members: truth,
        cohesion: None,
    });
    scenario
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::world::{validate_scenario, RobotConfig};

    fn base() -> Scenario {
        Scenario {
            dt: 0.1,
            max_steps: 600,
            corridor_halfwidth: None,
            robot: RobotConfig::default(),
            params: Default::default(),
            sensor: Default::default(),
            sim: Default::default(),
            agents: vec![],
            groups_truth: None,
        }
    }

    #[test]
    fn generates_requested_count_and_validates() {
        let cfg = CorridorConfig::default();
        for count in [10u32, 30, 50] {
            let s = corridor_scenario(count, 9, &cfg, &base());
            assert_eq!(s.agents.len() as u32, count);
            assert!(validate_scenario(&s).is_ok(), "{:?}", validate_scenario(&s));
            assert_eq!(s.corridor_halfwidth, Some(cfg.halfwidth));
        }
    }

    #[test]
    fn same_seed_same_layout() {
        let cfg = CorridorConfig::default();
        let a = corridor_scenario(20, 4, &cfg, &base());
        let b = corridor_scenario(20, 4, &cfg, &base());
        assert_eq!(a, b);
        let c = corridor_scenario(20, 5, &cfg, &base());
        assert_ne!(a, c);
    }

    #[test]
    fn clusters_share_velocity() {
        let cfg = CorridorConfig::default();
        let s = corridor_scenario(30, 2, &cfg, &base());
        let truth = s.groups_truth.as_ref().unwrap();
        for group in &truth.members {
            let velocities: Vec<Vec2> = group
                .iter()
                .map(|&id| s.agents.iter().find(|a| a.id == id).unwrap().velocity)
                .collect();
            for v in &velocities {
                assert_eq!(*v, velocities[0]);
            }
        }
    }

    #[test]
    fn cluster_sizes_in_range() {
        let cfg = CorridorConfig::default();
        let s = corridor_scenario(47, 13, &cfg, &base());
        let truth = s.groups_truth.as_ref().unwrap();
        for (i, group) in truth.members.iter().enumerate() {
            let is_last = i + 1 == truth.members.len();
            assert!(group.len() <= cfg.cluster_max as usize);
            if !is_last {
                assert!(group.len() >= cfg.cluster_min as usize);
            }
        }
    }
}

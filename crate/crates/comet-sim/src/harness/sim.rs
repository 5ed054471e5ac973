//! Closed-loop trial execution: sense, track, group, score, plan, integrate.
//!
//! Pedestrians are non-cooperative: they walk at constant speed straight
//! toward their goals and never react to the robot, so the pedestrian world a
//! planner sees depends only on (scenario, seed). The robot integrates as a
//! unicycle clamped to (v_max, omega_max).

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;

use crate::cohesion::{score_group, CohesionBreakdown, GroupObservation};
use crate::grouping::{partition_groups, Group};
use crate::navigation::{
    build_pfz, comet_deviation, dwa_plan, frozone_deviation, frozone_pfz, potentially_freezing,
    predict_group_positions, Deviation, DwaConfig, NavEnv, Pfz, PlannerKind, RobotState,
};
use crate::sensor::{angular_displacement, depth_estimate, localize, observe};
use crate::tracking::{step_tracks, Measurement, Track, TrackStore};
use crate::world::{wrap_angle, AgentState, Gender, Scenario, Vec2};

use super::metrics::{metric_avg_deviation, metric_normalized_path_length};

/// One logged control step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepRecord {
    pub t: f64,
    pub position: Vec2,
    /// Velocity applied over [t, t + dt].
    pub velocity: Vec2,
    /// Deviation angle commanded by the planner (zero for the DWA baseline).
    pub phi: f64,
    /// Planner reported a freeze at this step.
    pub frozen: bool,
}

/// Full per-trial log plus the three benchmark metrics.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialResult {
    pub planner: PlannerKind,
    pub seed: u64,
    pub steps: Vec<StepRecord>,
    pub reached_goal: bool,
    pub froze: bool,
    pub avg_deviation_deg: f64,
    pub path_length: f64,
    /// Present only when the goal was reached.
    pub normalized_path_length: Option<f64>,
    /// Steps during which the robot overlapped a pedestrian (diagnostic).
    pub collision_steps: u32,
}

/// Unified planner command for the unicycle integrator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepCommand {
    pub v: f64,
    pub omega: f64,
    pub phi: f64,
    pub freeze: bool,
}

/// Advance every pedestrian one step toward its goal at constant speed, then
/// integrate the robot command. Pedestrians at their goal stay there.
pub fn step_world(
    agents: &mut [AgentState],
    robot_position: &mut Vec2,
    robot_heading: &mut f64,
    cmd: (f64, f64),
    dt: f64,
) {
    for a in agents.iter_mut() {
        let speed = a.velocity.norm();
        if speed == 0.0 {
            continue;
        }
        let to_goal = a.goal - a.position;
        let dist = to_goal.norm();
        let displacement = if dist <= speed * dt {
            a.velocity = Vec2::ZERO;
            to_goal
        } else {
            a.velocity = to_goal.normalized() * speed;
            a.velocity * dt
        };
        a.position = a.position + displacement;
        a.face.position.x += displacement.x;
        a.face.position.y += displacement.y;
    }
    let (v, omega) = cmd;
    *robot_position = *robot_position + Vec2::from_angle(*robot_heading) * (v * dt);
    *robot_heading = wrap_angle(*robot_heading + omega * dt);
}

/// Sensing + tracking + grouping state for one rollout.
pub struct SimState {
    pub agents: Vec<AgentState>,
    pub robot_position: Vec2,
    pub robot_heading: f64,
    pub tracks: TrackStore,
    rng: ChaCha8Rng,
}

impl SimState {
    pub fn new(scenario: &Scenario, seed: u64) -> Self {
        let start = scenario.robot.start;
        let goal = scenario.robot.goal;
        SimState {
            agents: scenario.agents.clone(),
            robot_position: start,
            robot_heading: (goal - start).angle(),
            tracks: TrackStore::new(),
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// Observe the world, localize detections into the world frame, and
    /// advance the tracker. Returns the post-update track snapshot.
    pub fn sense_and_track(&mut self, scenario: &Scenario) -> Vec<Track> {
        let detections = observe(
            &self.agents,
            self.robot_position,
            self.robot_heading,
            &scenario.sensor,
            &mut self.rng,
        );
        let w = scenario.sensor.image_width as f64;
        let mut measurements = Vec::with_capacity(detections.len());
        for det in &detections {
            let Ok(range) = depth_estimate(det) else {
                continue;
            };
            let psi = angular_displacement(det.centroid[0], w, scenario.sensor.fov);
            let Ok(camera) = localize(range, psi) else {
                continue;
            };
            let world = self.robot_position + camera.rotated(self.robot_heading);
            measurements.push(Measurement {
                id: det.id,
                position: world,
            });
        }
        step_tracks(
            &mut self.tracks,
            &measurements,
            scenario.dt,
            &scenario.sim.tracker,
        )
        .expect("positive measurement variance");
        self.tracks.snapshot()
    }

    /// Advance only the pedestrian world (robot stays put).
    pub fn advance_agents(&mut self, dt: f64) {
        let mut pos = self.robot_position;
        let mut heading = self.robot_heading;
        step_world(&mut self.agents, &mut pos, &mut heading, (0.0, 0.0), dt);
    }
}

/// Partition a track snapshot and score every group against the scene.
/// Face poses and genders come from the ground-truth agents by ID.
pub fn groups_with_cohesion(
    snapshot: &[Track],
    agents: &[AgentState],
    scenario: &Scenario,
) -> (Vec<Group>, Vec<CohesionBreakdown>) {
    let groups = partition_groups(snapshot, &scenario.params);
    let by_id: BTreeMap<u64, &Track> = snapshot.iter().map(|t| (t.id, t)).collect();
    let agents_by_id: BTreeMap<u64, &AgentState> = agents.iter().map(|a| (a.id, a)).collect();
    let scene_speeds: Vec<f64> = snapshot.iter().map(|t| t.speed()).collect();

    let cohesions = groups
        .iter()
        .map(|g| {
            let positions: Vec<Vec2> = g
                .members
                .iter()
                .filter_map(|id| by_id.get(id).map(|t| t.position()))
                .collect();
            let speeds: Vec<f64> = g
                .members
                .iter()
                .filter_map(|id| by_id.get(id).map(|t| t.speed()))
                .collect();
            let faces: Vec<(u64, crate::world::FacePose)> = g
                .members
                .iter()
                .filter_map(|id| agents_by_id.get(id).map(|a| (*id, a.face)))
                .collect();
            let genders: Vec<Option<Gender>> = g
                .members
                .iter()
                .map(|id| agents_by_id.get(id).map(|a| a.gender))
                .collect();
            score_group(
                &GroupObservation {
                    positions: &positions,
                    speeds: &speeds,
                    scene_speeds: &scene_speeds,
                    faces: &faces,
                    genders: &genders,
                },
                &scenario.params,
            )
        })
        .collect();
    (groups, cohesions)
}

fn nav_env(scenario: &Scenario) -> NavEnv {
    match scenario.corridor_halfwidth {
        Some(hw) => NavEnv::corridor(hw, scenario.robot.radius),
        None => NavEnv::open(),
    }
}

/// Build the freezing zones the cohesion-aware planner reasons about.
fn comet_pfzs(
    groups: &[Group],
    cohesions: &[CohesionBreakdown],
    pf_indices: &[usize],
    tracks: &BTreeMap<u64, Track>,
    scenario: &Scenario,
) -> Vec<Pfz> {
    pf_indices
        .iter()
        .filter_map(|&i| {
            let predicted = predict_group_positions(&groups[i], tracks, scenario.params.t_h);
            build_pfz(
                &predicted,
                groups[i].id,
                cohesions[i],
                scenario.robot.radius,
            )
            .ok()
        })
        .collect()
}

#[allow(clippy::too_many_arguments)]
fn plan_step(
    planner: PlannerKind,
    snapshot: &[Track],
    groups: &[Group],
    cohesions: &[CohesionBreakdown],
    robot: &mut RobotState,
    scenario: &Scenario,
    env: &NavEnv,
    dwa_cfg: &DwaConfig,
    v_cur: f64,
    omega_cur: f64,
) -> StepCommand {
    let params = &scenario.params;
    let nominal = (robot.goal - robot.position).normalized() * robot.v_max;
    robot.velocity = nominal;

    let obstacles: Vec<Vec2> = snapshot.iter().map(|t| t.position()).collect();
    match planner {
        PlannerKind::Dwa => {
            let cmd = dwa_plan(
                robot,
                v_cur,
                omega_cur,
                &obstacles,
                scenario.sim.ped_radius,
                env,
                dwa_cfg,
                params.t_h,
            );
            StepCommand {
                v: cmd.v,
                omega: cmd.omega,
                phi: 0.0,
                freeze: cmd.freeze,
            }
        }
        PlannerKind::Comet | PlannerKind::Frozone => {
            let tracks_map: BTreeMap<u64, Track> =
                snapshot.iter().map(|t| (t.id, t.clone())).collect();
            let pf = potentially_freezing(
                groups,
                &tracks_map,
                robot,
                params.t_h,
                params.sense_radius,
                params.alpha_pf,
                params.static_speed,
            );
            let zones = if planner == PlannerKind::Comet {
                comet_pfzs(groups, cohesions, &pf, &tracks_map, scenario)
            } else {
                let pf_tracks: Vec<(Vec2, Vec2)> = pf
                    .iter()
                    .flat_map(|&i| groups[i].members.iter())
                    .filter_map(|id| tracks_map.get(id))
                    .map(|t| (t.position(), t.velocity()))
                    .collect();
                frozone_pfz(&pf_tracks, params.t_h, scenario.robot.radius)
                    .map(|z| vec![z])
                    .unwrap_or_default()
            };
            let deviation = if planner == PlannerKind::Comet {
                comet_deviation(robot, &zones, env, params.t_h, params.dphi)
            } else if zones.is_empty() {
                Ok(Deviation::Angle(0.0))
            } else {
                let nearest = pf
                    .iter()
                    .flat_map(|&i| groups[i].members.iter())
                    .filter_map(|id| tracks_map.get(id))
                    .map(|t| t.position())
                    .min_by(|a, b| {
                        a.distance(robot.position).total_cmp(&b.distance(robot.position))
                    })
                    .expect("non-empty zone");
                frozone_deviation(robot, &zones[0], nearest, env, params.t_h, params.dphi)
            };
            // the deviated horizon point becomes the local target of a
            // dynamic-window executor that handles the actual bodies; an
            // all-blocked window is an emergency stop, and sustained
            // blockage surfaces through the halt rule
            match deviation.expect("nominal velocity is nonzero") {
                Deviation::Angle(phi) if phi.abs() <= scenario.sim.max_deviation => {
                    let mut local = robot.clone();
                    local.goal = robot.position + nominal.rotated(phi) * params.t_h;
                    let cmd = dwa_plan(
                        &local,
                        v_cur,
                        omega_cur,
                        &obstacles,
                        scenario.sim.ped_radius,
                        env,
                        dwa_cfg,
                        params.t_h,
                    );
                    StepCommand {
                        v: cmd.v,
                        omega: cmd.omega,
                        phi,
                        freeze: false,
                    }
                }
                // a deviation past max_deviation means no forward progress
                // is possible: the robot halts rather than retreats
                Deviation::Angle(_) | Deviation::Freeze => StepCommand {
                    v: 0.0,
                    omega: 0.0,
                    phi: 0.0,
                    freeze: true,
                },
            }
        }
    }
}

/// Run the full pipeline until the robot reaches its goal (within `goal_tol`)
/// or `max_steps` elapse. Deterministic in (scenario, planner, seed).
pub fn run_trial(scenario: &Scenario, planner: PlannerKind, seed: u64) -> TrialResult {
    let mut sim = SimState::new(scenario, seed);
    let env = nav_env(scenario);
    let dwa_cfg = DwaConfig {
        control_dt: scenario.dt,
        ..DwaConfig::default()
    };
    let start = scenario.robot.start;
    let goal = scenario.robot.goal;
    let mut robot = RobotState {
        position: start,
        heading: sim.robot_heading,
        velocity: Vec2::ZERO,
        goal,
        v_max: scenario.robot.v_max,
        omega_max: scenario.robot.omega_max,
        radius: scenario.robot.radius,
    };

    let mut steps = Vec::new();
    let mut reached_goal = false;
    let mut froze = false;
    let mut slow_time = 0.0;
    let mut collision_steps = 0u32;
    let (mut v_cur, mut omega_cur) = (0.0, 0.0);

    for step in 0..scenario.max_steps {
        if sim.robot_position.distance(goal) <= scenario.sim.goal_tol {
            reached_goal = true;
            break;
        }
        let snapshot = sim.sense_and_track(scenario);
        let (groups, cohesions) = groups_with_cohesion(&snapshot, &sim.agents, scenario);

        robot.position = sim.robot_position;
        robot.heading = sim.robot_heading;
        let cmd = plan_step(
            planner,
            &snapshot,
            &groups,
            &cohesions,
            &mut robot,
            scenario,
            &env,
            &dwa_cfg,
            v_cur,
            omega_cur,
        );

        steps.push(StepRecord {
            t: step as f64 * scenario.dt,
            position: sim.robot_position,
            velocity: Vec2::from_angle(sim.robot_heading) * cmd.v,
            phi: cmd.phi,
            frozen: cmd.freeze,
        });

        step_world(
            &mut sim.agents,
            &mut sim.robot_position,
            &mut sim.robot_heading,
            (cmd.v, cmd.omega),
            scenario.dt,
        );
        (v_cur, omega_cur) = (cmd.v, cmd.omega);

        if cmd.freeze {
            froze = true;
        }
        if cmd.v < scenario.sim.v_freeze {
            slow_time += scenario.dt;
            if slow_time >= scenario.sim.t_freeze {
                froze = true;
            }
        } else {
            slow_time = 0.0;
        }

        let collide = scenario.robot.radius + scenario.sim.ped_radius;
        if sim
            .agents
            .iter()
            .any(|a| a.position.distance(sim.robot_position) < collide)
        {
            collision_steps += 1;
        }
    }
    if !reached_goal && sim.robot_position.distance(goal) <= scenario.sim.goal_tol {
        reached_goal = true;
    }

    let mut positions: Vec<Vec2> = steps.iter().map(|s| s.position).collect();
    positions.push(sim.robot_position);
    let path_length: f64 = positions.windows(2).map(|w| w[0].distance(w[1])).sum();
    let normalized_path_length = if reached_goal {
        Some(metric_normalized_path_length(&positions, start, goal))
    } else {
        None
    };

    TrialResult {
        planner,
        seed,
        avg_deviation_deg: metric_avg_deviation(&steps, start, goal),
        steps,
        reached_goal,
        froze,
        path_length,
        normalized_path_length,
        collision_steps,
    }
}

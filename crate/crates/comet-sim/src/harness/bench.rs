//! Paired-seed corridor benchmark: every planner runs on the identical
//! pedestrian world for each (count, seed) cell, and per-cell aggregates
//! reproduce the deviation / freezing / path-length table layout.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

use crate::navigation::PlannerKind;
use crate::sensor::SensorConfig;
use crate::world::{ParamSet, RobotConfig, Scenario, SimConfig};

use super::corridor::{corridor_scenario, CorridorConfig};
use super::exec::{par_map, ExecMode};
use super::metrics::metric_freezing_rate;
use super::output::config_hash;
use super::sim::{run_trial, TrialResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BenchConfig {
    pub counts: Vec<u32>,
    /// Paired-seed trials per (planner, count) cell.
    pub trials: u32,
    pub planners: Vec<PlannerKind>,
    pub base_seed: u64,
    pub bootstrap_samples: u32,
    pub dt: f64,
    pub max_steps: u32,
    pub corridor: CorridorConfig,
    pub params: ParamSet,
    pub sensor: SensorConfig,
    pub sim: SimConfig,
    pub robot: RobotConfig,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            counts: vec![10, 20, 30, 40, 50],
            trials: 50,
            planners: vec![PlannerKind::Dwa, PlannerKind::Frozone, PlannerKind::Comet],
            base_seed: 1,
            bootstrap_samples: 1000,
            dt: 0.1,
            max_steps: 600,
            corridor: CorridorConfig::default(),
            // the sensing region must reach past the deviation horizon
            // (v_max * t_h plus prediction travel), or approaching groups
            // enter it only after their zones have passed the robot
            params: ParamSet {
                sense_radius: 8.0,
                ..ParamSet::default()
            },
            sensor: SensorConfig::default(),
            sim: SimConfig::default(),
            robot: RobotConfig::default(),
        }
    }
}

impl BenchConfig {
    /// Scenario template shared by every generated world.
    fn base_scenario(&self) -> Scenario {
        Scenario {
            dt: self.dt,
            max_steps: self.max_steps,
            corridor_halfwidth: Some(self.corridor.halfwidth),
            robot: self.robot.clone(),
            params: self.params.clone(),
            sensor: self.sensor.clone(),
            sim: self.sim.clone(),
            agents: vec![],
            groups_truth: None,
        }
    }

    /// The world for one benchmark cell trial.
    pub fn scenario_for(&self, count: u32, seed: u64) -> Scenario {
        corridor_scenario(count, seed, &self.corridor, &self.base_scenario())
    }

    pub fn to_toml_string(&self) -> Result<String, toml::ser::Error> {
        toml::to_string(self)
    }

    pub fn from_toml_str(s: &str) -> Result<BenchConfig, toml::de::Error> {
        toml::from_str(s)
    }
}

/// Aggregates for one (planner, pedestrian count) cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellStats {
    pub planner: PlannerKind,
    pub count: u32,
    pub trials: u32,
    pub mean_avg_deviation_deg: f64,
    pub freezing_rate: f64,
    pub freeze_ci_low: f64,
    pub freeze_ci_high: f64,
    /// Mean over goal-reaching trials only; absent when none reached.
    pub mean_npl: Option<f64>,
    pub npl_trials: u32,
    pub mean_collision_steps: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchReport {
    pub cells: Vec<CellStats>,
    pub trial_count: u32,
    pub config_hash: String,
}

impl BatchReport {
    pub fn cell(&self, planner: PlannerKind, count: u32) -> Option<&CellStats> {
        self.cells
            .iter()
            .find(|c| c.planner == planner && c.count == count)
    }
}

/// Percentile bootstrap interval for a Bernoulli rate.
fn bootstrap_rate_ci(flags: &[bool], samples: u32, seed: u64) -> (f64, f64) {
    if flags.is_empty() || samples == 0 {
        return (0.0, 0.0);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = flags.len();
    let mut rates: Vec<f64> = (0..samples)
        .map(|_| {
            let hits = (0..n).filter(|_| flags[rng.gen_range(0..n)]).count();
            hits as f64 / n as f64
        })
        .collect();
    rates.sort_by(f64::total_cmp);
    let pick = |q: f64| rates[((q * (samples as f64 - 1.0)).round() as usize).min(rates.len() - 1)];
    (pick(0.025), pick(0.975))
}

fn aggregate(
    planner: PlannerKind,
    count: u32,
    results: &[TrialResult],
    bootstrap_samples: u32,
) -> CellStats {
    let froze: Vec<bool> = results.iter().map(|r| r.froze).collect();
    let npls: Vec<f64> = results
        .iter()
        .filter_map(|r| r.normalized_path_length)
        .collect();
    let mean = |xs: &[f64]| xs.iter().sum::<f64>() / xs.len().max(1) as f64;
    let (lo, hi) = bootstrap_rate_ci(
        &froze,
        bootstrap_samples,
        0xB007 ^ (count as u64) << 8 ^ planner as u64,
    );
    CellStats {
        planner,
        count,
        trials: results.len() as u32,
        mean_avg_deviation_deg: mean(
            &results
                .iter()
                .map(|r| r.avg_deviation_deg)
                .collect::<Vec<_>>(),
        ),
        freezing_rate: metric_freezing_rate(&froze),
        freeze_ci_low: lo,
        freeze_ci_high: hi,
        mean_npl: (!npls.is_empty()).then(|| mean(&npls)),
        npl_trials: npls.len() as u32,
        mean_collision_steps: mean(
            &results
                .iter()
                .map(|r| r.collision_steps as f64)
                .collect::<Vec<_>>(),
        ),
    }
}

/// Run every (planner, count, seed) trial and aggregate per cell. Trials are
/// independent pure computations; results merge in deterministic
/// (planner, count, seed) order regardless of execution mode.
pub fn run_benchmark(cfg: &BenchConfig, mode: ExecMode) -> BatchReport {
    let mut specs: Vec<(PlannerKind, u32, u64)> = Vec::new();
    for &planner in &cfg.planners {
        for &count in &cfg.counts {
            for trial in 0..cfg.trials {
                specs.push((planner, count, cfg.base_seed + trial as u64));
            }
        }
    }
    let results = par_map(
        specs,
        |(planner, count, seed)| {
            let scenario = cfg.scenario_for(count, seed);
            (planner, count, run_trial(&scenario, planner, seed))
        },
        mode,
    );

    let mut by_cell: BTreeMap<(u32, u32), Vec<TrialResult>> = BTreeMap::new();
    for (planner, count, result) in results {
        by_cell
            .entry((planner as u32, count))
            .or_default()
            .push(result);
    }
    let cells: Vec<CellStats> = cfg
        .planners
        .iter()
        .flat_map(|&planner| {
            cfg.counts.iter().map(move |&count| (planner, count))
        })
        .map(|(planner, count)| {
            let results = &by_cell[&(planner as u32, count)];
            aggregate(planner, count, results, cfg.bootstrap_samples)
        })
        .collect();

    let config_toml = cfg.to_toml_string().unwrap_or_default();
    BatchReport {
        trial_count: cells.iter().map(|c| c.trials).sum(),
        cells,
        config_hash: config_hash(&config_toml),
    }
}

//! File export: trajectory CSVs, the benchmark table, and trial summaries.
//! Every file embeds the full resolved configuration as `#` comment lines so
//! a result can be reproduced from the file alone.

use std::fmt::Write as _;

use crate::navigation::PlannerKind;
use crate::world::Scenario;

use super::bench::{BatchReport, BenchConfig};
use super::sim::TrialResult;

/// FNV-1a over the canonical config text; stable across runs and platforms.
pub fn config_hash(text: &str) -> String {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for b in text.bytes() {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    format!("{hash:016x}")
}

fn embed_comment(out: &mut String, label: &str, body: &str) {
    let _ = writeln!(out, "# --- {label} ---");
    for line in body.lines() {
        let _ = writeln!(out, "# {line}");
    }
}

/// Per-step trajectory table: t, x, y, vx, vy, phi, frozen.
pub fn trajectory_csv(trial: &TrialResult, scenario: &Scenario) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# planner = \"{}\"", trial.planner.as_str());
    let _ = writeln!(out, "# seed = {}", trial.seed);
    let scenario_toml = scenario.to_toml_string().unwrap_or_default();
    let _ = writeln!(out, "# config_hash = \"{}\"", config_hash(&scenario_toml));
    embed_comment(&mut out, "resolved scenario", &scenario_toml);
    let _ = writeln!(out, "t,x,y,vx,vy,phi,frozen");
    for s in &trial.steps {
        let _ = writeln!(
            out,
            "{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{}",
            s.t,
            s.position.x,
            s.position.y,
            s.velocity.x,
            s.velocity.y,
            s.phi,
            s.frozen as u8
        );
    }
    out
}

/// Trial summary as a structured text document.
pub fn trial_summary_toml(trial: &TrialResult, scenario: &Scenario) -> String {
    let scenario_toml = scenario.to_toml_string().unwrap_or_default();
    let mut out = String::new();
    let _ = writeln!(out, "planner = \"{}\"", trial.planner.as_str());
    let _ = writeln!(out, "seed = {}", trial.seed);
    let _ = writeln!(out, "reached_goal = {}", trial.reached_goal);
    let _ = writeln!(out, "froze = {}", trial.froze);
    let _ = writeln!(out, "avg_deviation_deg = {:.6}", trial.avg_deviation_deg);
    let _ = writeln!(out, "path_length = {:.6}", trial.path_length);
    match trial.normalized_path_length {
        Some(npl) => {
            let _ = writeln!(out, "normalized_path_length = {npl:.6}");
        }
        None => {
            let _ = writeln!(out, "# normalized_path_length absent: goal not reached");
        }
    }
    let _ = writeln!(out, "collision_steps = {}", trial.collision_steps);
    let _ = writeln!(out, "steps = {}", trial.steps.len());
    let _ = writeln!(out, "config_hash = \"{}\"", config_hash(&scenario_toml));
    let _ = writeln!(out, "\n[scenario]");
    for line in scenario_toml.lines() {
        let _ = writeln!(out, "# {line}");
    }
    out
}

/// Benchmark table shaped metric x method with one column per count.
pub fn bench_table_csv(report: &BatchReport, cfg: &BenchConfig) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# config_hash = \"{}\"", report.config_hash);
    embed_comment(
        &mut out,
        "resolved benchmark config",
        &cfg.to_toml_string().unwrap_or_default(),
    );
    let counts = &cfg.counts;
    let mut header = String::from("metric,method");
    for c in counts {
        let _ = write!(header, ",{c}");
    }
    let _ = writeln!(out, "{header}");

    let fmt_cell = |planner: PlannerKind, count: u32, f: &dyn Fn(&super::bench::CellStats) -> String| {
        report
            .cell(planner, count)
            .map(f)
            .unwrap_or_else(|| "".into())
    };
    for (metric, f) in [
        (
            "avg_deviation_deg",
            (&|c: &super::bench::CellStats| format!("{:.4}", c.mean_avg_deviation_deg))
                as &dyn Fn(&super::bench::CellStats) -> String,
        ),
        ("freezing_rate", &|c: &super::bench::CellStats| {
            format!("{:.4}", c.freezing_rate)
        }),
        ("normalized_path_length", &|c: &super::bench::CellStats| {
            c.mean_npl.map(|v| format!("{v:.4}")).unwrap_or_default()
        }),
    ] {
        for &planner in &cfg.planners {
            let mut row = format!("{},{}", metric, planner.as_str());
            for &count in counts {
                let _ = write!(row, ",{}", fmt_cell(planner, count, f));
            }
            let _ = writeln!(out, "{row}");
        }
    }
    out
}

/// Flat per-cell table with bootstrap intervals.
pub fn bench_cells_csv(report: &BatchReport, cfg: &BenchConfig) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# config_hash = \"{}\"", report.config_hash);
    embed_comment(
        &mut out,
        "resolved benchmark config",
        &cfg.to_toml_string().unwrap_or_default(),
    );
    let _ = writeln!(
        out,
        "planner,count,trials,avg_deviation_deg,freezing_rate,freeze_ci_low,freeze_ci_high,mean_npl,npl_trials,mean_collision_steps"
    );
    for c in &report.cells {
        let _ = writeln!(
            out,
            "{},{},{},{:.4},{:.4},{:.4},{:.4},{},{},{:.4}",
            c.planner.as_str(),
            c.count,
            c.trials,
            c.mean_avg_deviation_deg,
            c.freezing_rate,
            c.freeze_ci_low,
            c.freeze_ci_high,
            c.mean_npl.map(|v| format!("{v:.4}")).unwrap_or_default(),
            c.npl_trials,
            c.mean_collision_steps,
        );
    }
    out
}

/// Console rendering of the benchmark table.
pub fn bench_table_pretty(report: &BatchReport, cfg: &BenchConfig) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "trials per cell: {}", cfg.trials);
    for (metric, f) in [
        (
            "avg deviation (deg)",
            (&|c: &super::bench::CellStats| format!("{:>8.2}", c.mean_avg_deviation_deg))
                as &dyn Fn(&super::bench::CellStats) -> String,
        ),
        ("freezing rate", &|c: &super::bench::CellStats| {
            format!(
                "{:>8}",
                format!("{:.2}", c.freezing_rate)
            )
        }),
        ("normalized path length", &|c: &super::bench::CellStats| {
            c.mean_npl
                .map(|v| format!("{v:>8.2}"))
                .unwrap_or_else(|| format!("{:>8}", "-"))
        }),
    ] {
        let _ = writeln!(out, "\n{metric} (lower better)");
        let mut header = format!("{:>10}", "method");
        for c in &cfg.counts {
            let _ = write!(header, "{:>9}", format!("{c}ped"));
        }
        let _ = writeln!(out, "{header}");
        for &planner in &cfg.planners {
            let mut row = format!("{:>10}", planner.as_str());
            for &count in &cfg.counts {
                match report.cell(planner, count) {
                    Some(c) => {
                        let _ = write!(row, " {}", f(c));
                    }
                    None => {
                        let _ = write!(row, " {:>8}", "-");
                    }
                }
            }
            let _ = writeln!(out, "{row}");
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hash_is_stable_and_sensitive() {
        assert_eq!(config_hash("abc"), config_hash("abc"));
        assert_ne!(config_hash("abc"), config_hash("abd"));
        // FNV-1a 64 reference value for the empty string
        assert_eq!(config_hash(""), "cbf29ce484222325");
    }

    #[test]
    fn csv_floats_are_fixed_precision() {
        use crate::harness::sim::{StepRecord, TrialResult};
        use crate::world::Vec2;
        let trial = TrialResult {
            planner: PlannerKind::Comet,
            seed: 3,
            steps: vec![StepRecord {
                t: 0.0,
                position: Vec2::new(1.0 / 3.0, 2.0 / 3.0),
                velocity: Vec2::new(0.1, -0.2),
                phi: 0.5,
                frozen: false,
            }],
            reached_goal: true,
            froze: false,
            avg_deviation_deg: 1.25,
            path_length: 10.0,
            normalized_path_length: Some(1.01),
            collision_steps: 0,
        };
        let scenario = crate::world::Scenario {
            dt: 0.1,
            max_steps: 10,
            corridor_halfwidth: None,
            robot: Default::default(),
            params: Default::default(),
            sensor: Default::default(),
            sim: Default::default(),
            agents: vec![],
            groups_truth: None,
        };
        let csv = trajectory_csv(&trial, &scenario);
        assert!(csv.contains("t,x,y,vx,vy,phi,frozen"));
        assert!(csv.contains("0.000000,0.333333,0.666667,0.100000,-0.200000,0.500000,0"));
        let summary = trial_summary_toml(&trial, &scenario);
        assert!(summary.contains("normalized_path_length = 1.010000"));
    }
}

//! Command-line front end: score a scenario's groups, run single trials,
//! run the corridor benchmark, and render figures from CSV logs.

use clap::{Parser, Subcommand};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use comet_sim::harness::output::{
    bench_cells_csv, bench_table_csv, bench_table_pretty, trajectory_csv, trial_summary_toml,
};
use comet_sim::harness::plot::{
    metrics_svg, parse_cells_csv, parse_trajectory_csv, trajectories_svg, TrajectorySeries,
};
use comet_sim::harness::sim::{groups_with_cohesion, SimState};
use comet_sim::harness::{exec, run_benchmark, run_trial, BenchConfig, ExecMode};
use comet_sim::navigation::PlannerKind;
use comet_sim::world::{validate_scenario, Scenario};

#[derive(Parser)]
#[command(
    name = "comet-sim",
    about = "Group-cohesion scoring and cohesion-aware crowd navigation simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Base seed override.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Parameter overrides, e.g. --params params.gamma=1.5 --params sensor.fov=1.2.
    /// Bare keys target the [params] table.
    #[arg(long = "params", global = true, value_name = "KEY=VAL")]
    params: Vec<String>,
    /// Worker threads for batch runs (requires the parallel feature).
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Print the per-group cohesion report for one frame of a scenario.
    Score {
        #[arg(long)]
        scenario: PathBuf,
        /// Frames to simulate before scoring (tracker velocities need a few).
        #[arg(long, default_value_t = 25)]
        frame: u32,
    },
    /// Run one trial and write the trajectory table plus a summary.
    Run {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        planner: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the paired-seed corridor benchmark and write the report tables.
    Bench {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Render figures from previously written CSV logs.
    Plot {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        exec::configure_threads(n);
    }
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::FAILURE
        }
    }
}

fn dispatch(cli: Cli) -> Result<(), String> {
    match cli.command {
        Command::Score { scenario, frame } => cmd_score(&scenario, frame, &cli.params),
        Command::Run {
            scenario,
            planner,
            seed,
            out,
        } => {
            let planner: PlannerKind = planner.parse()?;
            let seed = cli.seed.unwrap_or(seed);
            cmd_run(&scenario, planner, seed, &out, &cli.params)
        }
        Command::Bench { config, out } => cmd_bench(&config, &out, cli.seed, &cli.params),
        Command::Plot { input, out } => cmd_plot(&input, &out),
    }
}

/// Apply `a.b=value` overrides onto a parsed TOML document. Bare keys land in
/// `bare_table` when given (scenario files route them to [params]); bench
/// configs take them at the top level.
fn apply_overrides(
    doc: &mut toml::Value,
    overrides: &[String],
    bare_table: Option<&str>,
) -> Result<(), String> {
    for entry in overrides {
        let (key, raw) = entry
            .split_once('=')
            .ok_or_else(|| format!("override '{entry}' is not KEY=VAL"))?;
        let path: Vec<&str> = key.split('.').collect();
        let path: Vec<String> = match (path.len(), bare_table) {
            (1, Some(table)) => vec![table.into(), path[0].into()],
            _ => path.iter().map(|s| s.to_string()).collect(),
        };
        // parse VAL as a TOML value (number, bool, array, quoted string);
        // anything unparseable falls back to a plain string
        let value: toml::Value = format!("v = {raw}")
            .parse::<toml::Value>()
            .ok()
            .and_then(|mut t| t.as_table_mut().and_then(|t| t.remove("v")))
            .unwrap_or_else(|| toml::Value::String(raw.to_string()));
        let (last, parents) = path.split_last().expect("non-empty path");
        let mut cursor = &mut *doc;
        for part in parents {
            let table = cursor
                .as_table_mut()
                .ok_or_else(|| format!("cannot override '{key}': not a table"))?;
            cursor = table
                .entry(part.clone())
                .or_insert_with(|| toml::Value::Table(Default::default()));
        }
        cursor
            .as_table_mut()
            .ok_or_else(|| format!("cannot override '{key}': not a table"))?
            .insert(last.clone(), value);
    }
    Ok(())
}

fn load_scenario(path: &Path, overrides: &[String]) -> Result<Scenario, String> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    let mut doc: toml::Value = text
        .parse()
        .map_err(|e| format!("{}: {e}", path.display()))?;
    apply_overrides(&mut doc, overrides, Some("params"))?;
    let scenario: Scenario = doc
        .try_into()
        .map_err(|e| format!("{}: {e}", path.display()))?;
    validate_scenario(&scenario).map_err(|errs| {
        let lines: Vec<String> = errs.iter().map(|e| format!("  - {e}")).collect();
        format!("invalid scenario:\n{}", lines.join("\n"))
    })?;
    Ok(scenario)
}

fn cmd_score(path: &Path, frame: u32, overrides: &[String]) -> Result<(), String> {
    let scenario = load_scenario(path, overrides)?;
    let mut sim = SimState::new(&scenario, 0);
    for _ in 0..frame {
        sim.sense_and_track(&scenario);
        sim.advance_agents(scenario.dt);
    }
    let snapshot = sim.sense_and_track(&scenario);
    let (groups, cohesions) = groups_with_cohesion(&snapshot, &sim.agents, &scenario);

    println!("frame,group_id,members,n,c_p,c_w,c_s,c_i,c_g,c_tot,level,features");
    for (g, c) in groups.iter().zip(&cohesions) {
        if g.size() < 2 {
            continue; // singletons are navigation-only, not scored
        }
        let members = g
            .members
            .iter()
            .map(|m| m.to_string())
            .collect::<Vec<_>>()
            .join(";");
        let features = [
            ("p", c.features.proximity),
            ("w", c.features.speed),
            ("s", c.features.size),
            ("i", c.features.interaction),
            ("g", c.features.gender),
        ]
        .iter()
        .filter(|(_, on)| *on)
        .map(|(n, _)| *n)
        .collect::<String>();
        println!(
            "{frame},{},{members},{},{:.4},{:.4},{:.4},{:.4},{:.4},{:.4},{},{features}",
            g.id,
            g.size(),
            c.c_p,
            c.c_w,
            c.c_s,
            c.c_i,
            c.c_g,
            c.c_tot,
            c.level.as_str(),
        );
    }
    Ok(())
}

fn cmd_run(
    path: &Path,
    planner: PlannerKind,
    seed: u64,
    out: &Path,
    overrides: &[String],
) -> Result<(), String> {
    let scenario = load_scenario(path, overrides)?;
    let trial = run_trial(&scenario, planner, seed);
    std::fs::create_dir_all(out).map_err(|e| format!("cannot create {}: {e}", out.display()))?;
    let stem = format!("trial_{}_{}", planner.as_str(), seed);
    let csv_path = out.join(format!("{stem}.csv"));
    let toml_path = out.join(format!("{stem}.toml"));
    std::fs::write(&csv_path, trajectory_csv(&trial, &scenario)).map_err(|e| e.to_string())?;
    std::fs::write(&toml_path, trial_summary_toml(&trial, &scenario))
        .map_err(|e| e.to_string())?;
    println!(
        "planner={} seed={} reached_goal={} froze={} avg_deviation_deg={:.2} npl={}",
        planner.as_str(),
        seed,
        trial.reached_goal,
        trial.froze,
        trial.avg_deviation_deg,
        trial
            .normalized_path_length
            .map(|v| format!("{v:.3}"))
            .unwrap_or_else(|| "-".into()),
    );
    println!("wrote {}", csv_path.display());
    println!("wrote {}", toml_path.display());
    Ok(())
}

fn cmd_bench(
    config: &Path,
    out: &Path,
    seed: Option<u64>,
    overrides: &[String],
) -> Result<(), String> {
    let text = std::fs::read_to_string(config)
        .map_err(|e| format!("cannot read {}: {e}", config.display()))?;
    let mut doc: toml::Value = text
        .parse()
        .map_err(|e| format!("{}: {e}", config.display()))?;
    apply_overrides(&mut doc, overrides, None)?;
    let mut cfg: BenchConfig = doc
        .try_into()
        .map_err(|e| format!("{}: {e}", config.display()))?;
    if let Some(s) = seed {
        cfg.base_seed = s;
    }
    let report = run_benchmark(&cfg, ExecMode::Parallel);
    std::fs::create_dir_all(out).map_err(|e| format!("cannot create {}: {e}", out.display()))?;
    let table_path = out.join("bench_table.csv");
    let cells_path = out.join("bench_cells.csv");
    let config_path = out.join("bench_config_resolved.toml");
    std::fs::write(&table_path, bench_table_csv(&report, &cfg)).map_err(|e| e.to_string())?;
    std::fs::write(&cells_path, bench_cells_csv(&report, &cfg)).map_err(|e| e.to_string())?;
    std::fs::write(
        &config_path,
        format!(
            "# config_hash = \"{}\"\n{}",
            report.config_hash,
            cfg.to_toml_string().map_err(|e| e.to_string())?
        ),
    )
    .map_err(|e| e.to_string())?;
    print!("{}", bench_table_pretty(&report, &cfg));
    println!("\nwrote {}", table_path.display());
    println!("wrote {}", cells_path.display());
    println!("wrote {}", config_path.display());
    Ok(())
}

fn cmd_plot(input: &Path, out: &Path) -> Result<(), String> {
    let cells = input.join("bench_cells.csv");
    let svg = if cells.is_file() {
        let text = std::fs::read_to_string(&cells).map_err(|e| e.to_string())?;
        metrics_svg(&parse_cells_csv(&text))
    } else {
        let mut series: Vec<TrajectorySeries> = Vec::new();
        let mut corridor = None;
        let mut entries: Vec<PathBuf> = std::fs::read_dir(input)
            .map_err(|e| format!("cannot read {}: {e}", input.display()))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "csv"))
            .collect();
        entries.sort();
        for path in entries {
            let text = std::fs::read_to_string(&path).map_err(|e| e.to_string())?;
            if !text.contains("t,x,y,vx,vy,phi,frozen") {
                continue;
            }
            if corridor.is_none() {
                corridor = text
                    .lines()
                    .find_map(|l| l.strip_prefix("# corridor_halfwidth = "))
                    .and_then(|v| v.trim().parse::<f64>().ok());
            }
            let stem = path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_default();
            series.push(parse_trajectory_csv(&text, &stem));
        }
        if series.is_empty() {
            return Err(format!(
                "no trajectory CSVs or bench_cells.csv under {}",
                input.display()
            ));
        }
        trajectories_svg(&series, corridor)
    };
    std::fs::write(out, svg).map_err(|e| e.to_string())?;
    println!("wrote {}", out.display());
    Ok(())
}

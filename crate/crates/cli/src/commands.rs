//! The four experiment commands. Each writes its data files plus a
//! manifest into the output directory and returns a short report.

use std::path::{Path, PathBuf};
use std::time::Instant;

use colpitts_sync::{
    lyapunov_values, pso_optimize, simulate_pair, simulate_single, sso_optimize, transform_error,
    Algorithm, GainObjective, OptResult,
};
use rayon::prelude::*;
use serde::Serialize;

use crate::batch::BatchSummary;
use crate::config::ExperimentConfig;
use crate::output::{write_file, write_json, Csv, RunManifest};
use crate::CliError;

pub const SIMULATE_HEADER: [&str; 4] = ["t", "x", "y", "z"];
pub const SYNC_HEADER: [&str; 12] = [
    "t", "x_m", "y_m", "z_m", "x_s", "y_s", "z_s", "e1", "e2", "e3", "u", "v3",
];
pub const CONVERGENCE_HEADER: [&str; 5] =
    ["stage", "best_cost", "best_k1", "best_k3", "cumulative_evals"];
pub const TABLE_HEADER: [&str; 4] = ["experiment", "k1", "k3", "tss"];

fn prepare(out: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(out).map_err(|e| CliError::Io(format!("{}: {e}", out.display())))
}

fn finish<R: Serialize>(
    command: &str,
    stem: &str,
    cfg: &ExperimentConfig,
    out: &Path,
    outputs: Vec<PathBuf>,
    results: R,
    started: Instant,
) -> Result<PathBuf, CliError> {
    let manifest = RunManifest::new(command, cfg, outputs, results, started.elapsed().as_secs_f64());
    let path = out.join(format!("{stem}.manifest.json"));
    write_json(&path, &manifest)?;
    Ok(path)
}

#[derive(Debug, Serialize)]
pub struct SimulateResults {
    pub samples: usize,
    pub max_abs_state: f64,
}

pub fn cmd_simulate(cfg: &ExperimentConfig, out: &Path) -> Result<SimulateResults, CliError> {
    let started = Instant::now();
    cfg.oscillator.validate()?;
    let run = &cfg.single;
    let samples = simulate_single(&cfg.oscillator, run.initial_state, run.dt, run.t_final, run.record_stride)?;
    prepare(out)?;
    let mut csv = Csv::new(&SIMULATE_HEADER);
    for (t, s) in &samples {
        csv.row(&[*t, s.x, s.y, s.z]);
    }
    let csv_path = out.join("simulate.csv");
    csv.write(&csv_path)?;
    let results = SimulateResults {
        samples: samples.len(),
        max_abs_state: samples.iter().map(|(_, s)| s.max_abs()).fold(0.0, f64::max),
    };
    finish("simulate", "simulate", cfg, out, vec![csv_path.clone()], &results, started)?;
    Ok(results)
}

#[derive(Debug, Serialize)]
pub struct SyncResults {
    pub tss: f64,
    pub final_error_max_abs: f64,
}

pub fn cmd_sync(cfg: &ExperimentConfig, out: &Path) -> Result<SyncResults, CliError> {
    let started = Instant::now();
    let gains = cfg.gains()?;
    let traj = simulate_pair(&cfg.oscillator, &gains, &cfg.sync)?;
    prepare(out)?;
    let mut csv = Csv::new(&SYNC_HEADER);
    for i in 0..traj.len() {
        let (m, s, e) = (traj.master[i], traj.slave[i], traj.errors[i]);
        let v3 = lyapunov_values(transform_error(e, &gains)).v3;
        csv.row(&[
            traj.times[i],
            m.x,
            m.y,
            m.z,
            s.x,
            s.y,
            s.z,
            e.e1,
            e.e2,
            e.e3,
            traj.control[i].0,
            v3,
        ]);
    }
    let csv_path = out.join("sync.csv");
    csv.write(&csv_path)?;
    let results = SyncResults {
        tss: traj.tss,
        final_error_max_abs: traj.errors.last().map_or(0.0, |e| e.max_abs()),
    };
    finish("sync", "sync", cfg, out, vec![csv_path], &results, started)?;
    Ok(results)
}

/// Runs one optimization of the gain objective with the configured seed.
pub fn run_optimizer(cfg: &ExperimentConfig, algo: Algorithm, objective: &GainObjective) -> Result<OptResult, CliError> {
    let f = |x: &[f64]| objective.evaluate(x);
    let res = match algo {
        Algorithm::Sso => sso_optimize(&f, &cfg.sso)?,
        Algorithm::Pso => pso_optimize(&f, &cfg.pso)?,
    };
    Ok(res)
}

pub fn convergence_csv(res: &OptResult) -> Csv {
    let mut csv = Csv::new(&CONVERGENCE_HEADER);
    for h in &res.history {
        csv.row(&[
            h.stage as f64,
            h.best_cost,
            h.best_point[0],
            h.best_point[1],
            h.evals as f64,
        ]);
    }
    csv
}

pub fn cmd_optimize(cfg: &ExperimentConfig, algo: Algorithm, out: &Path) -> Result<OptResult, CliError> {
    let started = Instant::now();
    cfg.validate()?;
    let objective = GainObjective::new(cfg.oscillator, cfg.objective.clone())?;
    let res = run_optimizer(cfg, algo, &objective)?;
    prepare(out)?;
    let stem = format!("optimize_{algo}");
    let csv_path = out.join(format!("{stem}.csv"));
    convergence_csv(&res).write(&csv_path)?;
    let json_path = out.join(format!("{stem}.json"));
    write_json(&json_path, &res)?;
    finish("optimize", &stem, cfg, out, vec![csv_path, json_path], &res, started)?;
    Ok(res)
}

pub fn cmd_table(cfg: &ExperimentConfig, algo: Algorithm, out: &Path) -> Result<BatchSummary, CliError> {
    let started = Instant::now();
    cfg.validate()?;
    let objective = GainObjective::new(cfg.oscillator, cfg.objective.clone())?;
    let runs: Vec<OptResult> = (0..cfg.table.repeats)
        .into_par_iter()
        .map(|i| {
            let mut run_cfg = cfg.clone();
            let seed = cfg.seed.wrapping_add(i as u64);
            run_cfg.sso.seed = seed;
            run_cfg.pso.seed = seed;
            run_optimizer(&run_cfg, algo, &objective)
        })
        .collect::<Result<_, _>>()?;
    let summary = BatchSummary::from_results(algo, &runs);

    prepare(out)?;
    let stem = format!("table_{algo}");
    let mut csv = Csv::new(&TABLE_HEADER);
    for r in &summary.rows {
        csv.row_with_index(&[r.experiment as u64], &[r.k1, r.k3, r.tss]);
    }
    let rows_path = out.join(format!("{stem}.csv"));
    csv.write(&rows_path)?;
    let agg_path = out.join(format!("{stem}_aggregate.csv"));
    let agg = format!(
        "statistic,tss\nmin,{}\nmedian,{}\nmax,{}\nspread,{}\n",
        crate::output::sig9(summary.min_tss),
        crate::output::sig9(summary.median_tss),
        crate::output::sig9(summary.max_tss),
        crate::output::sig9(summary.spread),
    );
    write_file(&agg_path, &agg)?;
    finish("table", &stem, cfg, out, vec![rows_path, agg_path], &summary, started)?;
    Ok(summary)
}

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use colpitts_sync::{Algorithm, SimConfig};

use crate::commands::{cmd_optimize, cmd_simulate, cmd_sync, cmd_table};
use crate::config::ExperimentConfig;
use crate::CliError;

#[derive(Debug, Parser)]
#[command(name = "colpitts-sync", version, about = "Chaotic Colpitts oscillator synchronization experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Common {
    /// TOML config file, or a previous run's manifest
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Output directory
    #[arg(long, value_name = "DIR", default_value = "out")]
    pub out: PathBuf,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long = "t-final")]
    pub t_final: Option<f64>,
    /// Controller switch-on time (ignored by `simulate`)
    #[arg(long = "t-activate")]
    pub t_activate: Option<f64>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum AlgoArg {
    Sso,
    Pso,
}

impl From<AlgoArg> for Algorithm {
    fn from(a: AlgoArg) -> Self {
        match a {
            AlgoArg::Sso => Algorithm::Sso,
            AlgoArg::Pso => Algorithm::Pso,
        }
    }
}

#[derive(Debug, Args)]
pub struct OptimizerArgs {
    #[arg(long, value_enum)]
    pub algo: AlgoArg,
    /// Raise PSO's iteration count to SSO's evaluation budget
    #[arg(long)]
    pub match_budget: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Free-running oscillator trajectory (t, x, y, z)
    Simulate(Common),
    /// Master/slave synchronization run
    Sync {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        k1: Option<f64>,
        #[arg(long)]
        k3: Option<f64>,
    },
    /// Tune (k1, k3) with one optimizer run
    Optimize {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        opt: OptimizerArgs,
    },
    /// Repeated seeded optimizations summarized as a table
    Table {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        opt: OptimizerArgs,
        #[arg(long)]
        repeats: Option<usize>,
    },
}

fn override_sim(sim: &mut SimConfig, c: &Common) {
    if let Some(dt) = c.dt {
        sim.dt = dt;
    }
    if let Some(t) = c.t_final {
        sim.t_final = t;
    }
    if let Some(t) = c.t_activate {
        sim.t_activate = t;
    }
}

fn base_config(c: &Common) -> Result<ExperimentConfig, CliError> {
    let mut cfg = match &c.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = c.seed {
        cfg.seed = seed;
    }
    Ok(cfg)
}

/// Resolves configuration for the command and runs it, returning the
/// text to print on success.
pub fn run(cli: Cli) -> Result<String, CliError> {
    match cli.command {
        Command::Simulate(c) => {
            let mut cfg = base_config(&c)?;
            if let Some(dt) = c.dt {
                cfg.single.dt = dt;
            }
            if let Some(t) = c.t_final {
                cfg.single.t_final = t;
            }
            let r = cmd_simulate(&cfg.resolve(), &c.out)?;
            Ok(format!(
                "samples = {}\nmax |state| = {}",
                r.samples, r.max_abs_state
            ))
        }
        Command::Sync { common: c, k1, k3 } => {
            let mut cfg = base_config(&c)?;
            override_sim(&mut cfg.sync, &c);
            if let Some(k1) = k1 {
                cfg.gains.k1 = k1;
            }
            if let Some(k3) = k3 {
                cfg.gains.k3 = k3;
            }
            let r = cmd_sync(&cfg.resolve(), &c.out)?;
            Ok(format!(
                "tss = {}\nfinal max |e| = {:e}",
                r.tss, r.final_error_max_abs
            ))
        }
        Command::Optimize { common: c, opt } => {
            let mut cfg = base_config(&c)?;
            override_sim(&mut cfg.objective, &c);
            cfg.match_budget |= opt.match_budget;
            let r = cmd_optimize(&cfg.resolve(), opt.algo.into(), &c.out)?;
            Ok(format!(
                "best k1 = {}\nbest k3 = {}\nbest tss = {}\nevaluations = {}",
                r.best_point[0], r.best_point[1], r.best_cost, r.evals
            ))
        }
        Command::Table {
            common: c,
            opt,
            repeats,
        } => {
            let mut cfg = base_config(&c)?;
            override_sim(&mut cfg.objective, &c);
            cfg.match_budget |= opt.match_budget;
            if let Some(n) = repeats {
                cfg.table.repeats = n;
            }
            let s = cmd_table(&cfg.resolve(), opt.algo.into(), &c.out)?;
            let mut text = String::from("experiment k1 k3 tss\n");
            for r in &s.rows {
                text.push_str(&format!("{} {:.6e} {:.6} {:.6}\n", r.experiment, r.k1, r.k3, r.tss));
            }
            text.push_str(&format!(
                "tss min {:.6} median {:.6} max {:.6} spread {:.3e}",
                s.min_tss, s.median_tss, s.max_tss, s.spread
            ));
            Ok(text)
        }
    }
}

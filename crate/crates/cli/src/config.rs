//! Experiment configuration: a TOML file with one section per concern,
//! overridden by command-line flags.
//!
//! ```toml
//! seed = 0
//! match_budget = false
//!
//! [oscillator]      # a, b, c, d, e
//! [single]          # free-running run: initial_state, dt, t_final, record_stride
//! [sync]            # coupled run: dt, t_final, t_activate, master_ic, slave_ic, record_stride, control_law
//! [gains]           # k1, k3 used by `sync`
//! [objective]       # coupled run scored by the optimizers (same keys as [sync])
//! [sso]             # np, stages, local_points, mu, alpha, gamma, stage_interval, fd_step, bounds, execution
//! [pso]             # swarm, iters, inertia, c1, c2, vmax, bounds, execution
//! [table]           # repeats
//! ```
//!
//! Every key is optional. A run manifest (`*.manifest.json`) is also
//! accepted as a config file; its `config` object is used verbatim.

use std::path::Path;

use colpitts_sync::{ControlLaw, Gains, OscillatorParams, PsoConfig, SimConfig, SsoConfig, State3};
use serde::{Deserialize, Deserializer, Serialize};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SingleRun {
    pub initial_state: State3,
    pub dt: f64,
    pub t_final: f64,
    pub record_stride: usize,
}

impl Default for SingleRun {
    fn default() -> Self {
        Self {
            initial_state: State3::new(8.0, 2.0, 3.0),
            dt: 1e-3,
            t_final: 500.0,
            record_stride: 10,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GainSettings {
    pub k1: f64,
    pub k3: f64,
}

impl Default for GainSettings {
    fn default() -> Self {
        Self { k1: 0.0, k3: 2.4982 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TableSettings {
    pub repeats: usize,
}

impl Default for TableSettings {
    fn default() -> Self {
        Self { repeats: 10 }
    }
}

/// Objective protocol for gain tuning: controller engaged from the start.
pub fn default_objective() -> SimConfig {
    SimConfig {
        t_activate: 0.0,
        ..SimConfig::default()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: u64,
    /// Give PSO as many objective evaluations as SSO by raising its
    /// iteration count.
    pub match_budget: bool,
    pub oscillator: OscillatorParams,
    pub single: SingleRun,
    #[serde(deserialize_with = "sync_section")]
    pub sync: SimConfig,
    pub gains: GainSettings,
    #[serde(deserialize_with = "objective_section")]
    pub objective: SimConfig,
    pub sso: SsoConfig,
    pub pso: PsoConfig,
    pub table: TableSettings,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            match_budget: false,
            oscillator: OscillatorParams::TYPICAL,
            single: SingleRun::default(),
            sync: SimConfig::default(),
            gains: GainSettings::default(),
            objective: default_objective(),
            sso: SsoConfig::default(),
            pso: PsoConfig::default(),
            table: TableSettings::default(),
        }
    }
}

/// A `[sync]` or `[objective]` section; absent keys keep the section's
/// own defaults.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PartialSim {
    dt: Option<f64>,
    t_final: Option<f64>,
    t_activate: Option<f64>,
    master_ic: Option<State3>,
    slave_ic: Option<State3>,
    record_stride: Option<usize>,
    control_law: Option<ControlLaw>,
}

impl PartialSim {
    fn over(self, mut base: SimConfig) -> SimConfig {
        base.dt = self.dt.unwrap_or(base.dt);
        base.t_final = self.t_final.unwrap_or(base.t_final);
        base.t_activate = self.t_activate.unwrap_or(base.t_activate);
        base.master_ic = self.master_ic.unwrap_or(base.master_ic);
        base.slave_ic = self.slave_ic.unwrap_or(base.slave_ic);
        base.record_stride = self.record_stride.unwrap_or(base.record_stride);
        base.control_law = self.control_law.unwrap_or(base.control_law);
        base
    }
}

fn sync_section<'de, D: Deserializer<'de>>(d: D) -> Result<SimConfig, D::Error> {
    Ok(PartialSim::deserialize(d)?.over(SimConfig::default()))
}

fn objective_section<'de, D: Deserializer<'de>>(d: D) -> Result<SimConfig, D::Error> {
    Ok(PartialSim::deserialize(d)?.over(default_objective()))
}

#[derive(Deserialize)]
struct ManifestConfig {
    config: ExperimentConfig,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(format!("config: {e}")))
    }

    /// Reads a TOML config, or the `config` object of a JSON manifest.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        if path.extension().is_some_and(|e| e == "json") {
            serde_json::from_str::<ManifestConfig>(&text)
                .map(|m| m.config)
                .map_err(|e| CliError::Config(format!("manifest {}: {e}", path.display())))
        } else {
            Self::from_toml(&text)
        }
    }

    /// Propagates the shared seed into the optimizer sections.
    pub fn resolve(mut self) -> Self {
        self.sso.seed = self.seed;
        self.pso.seed = self.seed;
        if self.match_budget {
            self.pso.iters = matched_pso_iters(&self.sso, &self.pso);
        }
        self
    }

    pub fn gains(&self) -> Result<Gains, CliError> {
        Ok(Gains::new(self.gains.k1, self.gains.k3, &self.oscillator)?)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        self.oscillator.validate()?;
        self.sync.validate()?;
        self.objective.validate()?;
        self.sso.validate()?;
        self.pso.validate()?;
        if self.table.repeats == 0 {
            return Err(CliError::Config("repeats must be at least 1".into()));
        }
        if self.sso.dim() != 2 || self.pso.bounds.dim() != 2 {
            return Err(CliError::Config(
                "gain tuning searches (k1, k3): bounds must be two-dimensional".into(),
            ));
        }
        Ok(())
    }
}

/// PSO iteration count whose evaluation total is closest to, without
/// exceeding, a full SSO run.
pub fn matched_pso_iters(sso: &SsoConfig, pso: &PsoConfig) -> usize {
    let budget = sso.evaluation_budget() as usize;
    (budget / pso.swarm).saturating_sub(1).max(1)
}

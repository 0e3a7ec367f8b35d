//! Global-best particle swarm optimization, used as the baseline for the
//! shark smell optimizer.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::optim::{evaluate_batch, seeded_rng, Algorithm, Bounds, Execution, Incumbent, OptResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PsoConfig {
    pub swarm: usize,
    pub iters: usize,
    pub inertia: f64,
    /// Cognitive (personal best) weight.
    pub c1: f64,
    /// Social (global best) weight.
    pub c2: f64,
    /// Per-dimension speed cap. Empty means `0.2 * width`.
    pub vmax: Vec<f64>,
    pub bounds: Bounds,
    pub seed: u64,
    pub execution: Execution,
}

impl Default for PsoConfig {
    fn default() -> Self {
        Self {
            swarm: 50,
            iters: 30,
            inertia: 0.729,
            c1: 1.49445,
            c2: 1.49445,
            vmax: Vec::new(),
            bounds: Bounds::gain_box(),
            seed: 0,
            execution: Execution::Parallel,
        }
    }
}

impl PsoConfig {
    pub fn with_bounds(bounds: Bounds) -> Self {
        Self {
            bounds,
            ..Self::default()
        }
    }

    /// Speed cap per dimension, with the default filled in.
    pub fn speed_cap(&self) -> Vec<f64> {
        if self.vmax.is_empty() {
            (0..self.bounds.dim())
                .map(|j| 0.2 * self.bounds.width(j))
                .collect()
        } else {
            self.vmax.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.bounds.validate()?;
        if self.swarm == 0 || self.iters == 0 {
            return Err(Error::OptConfig("swarm and iters must be at least 1".into()));
        }
        if !(0.0..=1.0).contains(&self.inertia) {
            return Err(Error::OptConfig("inertia must lie in [0, 1]".into()));
        }
        if !(self.c1 >= 0.0 && self.c2 >= 0.0 && self.c1.is_finite() && self.c2.is_finite()) {
            return Err(Error::OptConfig("c1 and c2 must be non-negative".into()));
        }
        let cap = self.speed_cap();
        if cap.len() != self.bounds.dim() || cap.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(Error::OptConfig(
                "vmax needs one positive entry per dimension".into(),
            ));
        }
        Ok(())
    }

    pub fn evaluation_budget(&self) -> u64 {
        (self.swarm * (self.iters + 1)) as u64
    }
}

/// Standard global-best PSO. Velocities start uniform in `±vmax`; the
/// global best used in an iteration's update is the one known at the start
/// of that iteration, so evaluation order cannot matter.
pub fn pso_optimize<F>(objective: &F, cfg: &PsoConfig) -> Result<OptResult>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    cfg.validate()?;
    let dim = cfg.bounds.dim();
    let vmax = cfg.speed_cap();
    let mut rng = seeded_rng(cfg.seed);

    let mut positions = Vec::with_capacity(cfg.swarm);
    let mut velocities = Vec::with_capacity(cfg.swarm);
    for _ in 0..cfg.swarm {
        positions.push(cfg.bounds.sample(&mut rng));
        velocities.push(
            (0..dim)
                .map(|j| (2.0 * rng.random::<f64>() - 1.0) * vmax[j])
                .collect::<Vec<f64>>(),
        );
    }
    let costs = evaluate_batch(objective, &positions, cfg.execution);
    let mut evals = cfg.swarm as u64;
    let mut pbest = positions.clone();
    let mut pbest_cost = costs;
    let mut gbest = Incumbent::from_population(&pbest, &pbest_cost);
    let mut history = Vec::with_capacity(cfg.iters);

    for it in 0..cfg.iters {
        for i in 0..cfg.swarm {
            for j in 0..dim {
                let r1 = rng.random::<f64>();
                let r2 = rng.random::<f64>();
                let x = positions[i][j];
                let v = cfg.inertia * velocities[i][j]
                    + cfg.c1 * r1 * (pbest[i][j] - x)
                    + cfg.c2 * r2 * (gbest.point[j] - x);
                velocities[i][j] = v.clamp(-vmax[j], vmax[j]);
                positions[i][j] = x + velocities[i][j];
            }
            cfg.bounds.clamp(&mut positions[i]);
        }
        let costs = evaluate_batch(objective, &positions, cfg.execution);
        evals += cfg.swarm as u64;
        for i in 0..cfg.swarm {
            if costs[i] < pbest_cost[i] {
                pbest_cost[i] = costs[i];
                pbest[i].clone_from(&positions[i]);
            }
        }
        for i in 0..cfg.swarm {
            gbest.offer(&pbest[i], pbest_cost[i]);
        }
        history.push(gbest.snapshot(it + 1, evals));
    }

    Ok(OptResult {
        algorithm: Algorithm::Pso,
        best_point: gbest.point,
        best_cost: gbest.cost,
        history,
        evals,
        seed: cfg.seed,
    })
}

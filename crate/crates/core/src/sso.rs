//! Shark smell optimization.
//!
//! Each stage moves every shark along a gradient-driven velocity (the
//! "forward" move), probes `K` multiplicative perturbations of the landing
//! point (the "rotational" move), and keeps the cheapest of those
//! candidates. The method is formulated as ascent on an odor concentration;
//! for cost minimization the odor is `-cost`, so the velocity follows the
//! negative cost gradient.
//!
//! Note that the rotational move `Z = Y + r*Y` scales `Y` componentwise: a
//! component at exactly zero stays at zero in every rotational candidate.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::optim::{
    argmin, evaluate_batch, is_sentinel, seeded_rng, Algorithm, Bounds, Execution, Incumbent,
    OptResult,
};

/// A per-stage coefficient: one value for every stage, or one per stage.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Schedule {
    Constant(f64),
    PerStage(Vec<f64>),
}

impl Schedule {
    /// Value at zero-based stage `m`.
    pub fn at(&self, m: usize) -> f64 {
        match self {
            Schedule::Constant(v) => *v,
            Schedule::PerStage(v) => v[m],
        }
    }

    fn values(&self) -> &[f64] {
        match self {
            Schedule::Constant(v) => std::slice::from_ref(v),
            Schedule::PerStage(v) => v,
        }
    }

    fn check(&self, name: &str, stages: usize, ok: impl Fn(f64) -> bool) -> Result<()> {
        if let Schedule::PerStage(v) = self {
            if v.len() != stages {
                return Err(Error::OptConfig(format!(
                    "{name} schedule has {} entries for {stages} stages",
                    v.len()
                )));
            }
        }
        match self.values().iter().find(|v| !ok(**v)) {
            Some(v) => Err(Error::OptConfig(format!("{name} value {v} out of range"))),
            None => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SsoConfig {
    /// Population size.
    pub np: usize,
    /// Stage count.
    pub stages: usize,
    /// Rotational (local search) points per shark and stage.
    pub local_points: usize,
    /// Gradient coefficient.
    pub mu: Schedule,
    /// Inertia coefficient.
    pub alpha: Schedule,
    /// Velocity ratio limiter.
    pub gamma: Schedule,
    /// Time interval of the forward move.
    pub stage_interval: f64,
    /// Finite-difference step per dimension.
    pub fd_step: Vec<f64>,
    pub bounds: Bounds,
    pub seed: u64,
    pub execution: Execution,
}

impl Default for SsoConfig {
    fn default() -> Self {
        Self {
            np: 50,
            stages: 30,
            local_points: 4,
            mu: Schedule::Constant(0.9),
            alpha: Schedule::Constant(0.1),
            gamma: Schedule::Constant(4.0),
            stage_interval: 1.0,
            fd_step: vec![1e-3; 2],
            bounds: Bounds::gain_box(),
            seed: 0,
            execution: Execution::Parallel,
        }
    }
}

impl SsoConfig {
    /// Defaults over an arbitrary box.
    pub fn with_bounds(bounds: Bounds) -> Self {
        Self {
            fd_step: vec![1e-3; bounds.dim()],
            bounds,
            ..Self::default()
        }
    }

    pub fn dim(&self) -> usize {
        self.bounds.dim()
    }

    pub fn validate(&self) -> Result<()> {
        self.bounds.validate()?;
        if self.np == 0 || self.stages == 0 || self.local_points == 0 {
            return Err(Error::OptConfig(
                "np, stages and local_points must be at least 1".into(),
            ));
        }
        // zero mu and alpha are allowed for degenerate/diagnostic runs
        self.mu.check("mu", self.stages, |v| v.is_finite() && v >= 0.0)?;
        self.alpha.check("alpha", self.stages, |v| (0.0..1.0).contains(&v))?;
        self.gamma.check("gamma", self.stages, |v| v.is_finite() && v > 0.0)?;
        if !(self.stage_interval.is_finite() && self.stage_interval > 0.0) {
            return Err(Error::OptConfig("stage_interval must be positive".into()));
        }
        if self.fd_step.len() != self.dim() || self.fd_step.iter().any(|h| !(h.is_finite() && *h > 0.0)) {
            return Err(Error::OptConfig(
                "fd_step needs one positive entry per dimension".into(),
            ));
        }
        Ok(())
    }

    /// Exact evaluation count of a full run.
    pub fn evaluation_budget(&self) -> u64 {
        let per_stage = self.np * (2 * self.dim() + 1 + self.local_points);
        (self.np + self.stages * per_stage) as u64
    }
}

/// Finite-difference stencil chosen for one dimension.
#[derive(Debug, Clone, Copy, PartialEq)]
enum Stencil {
    /// Probes at `x + h`, `x - h`.
    Central(f64),
    /// Probes at `x + h`, `x + 2h` (second order, uses `f(x)`).
    Forward(f64),
    /// Probes at `x - h`, `x - 2h` (second order, uses `f(x)`).
    Backward(f64),
    /// Box narrower than the stencil: probes at the clamped ends.
    Span(f64, f64),
}

#[derive(Debug, Clone, Copy)]
struct DimProbe {
    stencil: Stencil,
    at: [f64; 2],
}

fn plan_probes(x: &[f64], h: &[f64], bounds: &Bounds) -> Vec<DimProbe> {
    (0..x.len())
        .map(|j| {
            let (xj, hj) = (x[j], h[j]);
            let (lo, hi) = (bounds.lower[j], bounds.upper[j]);
            if xj - hj >= lo && xj + hj <= hi {
                DimProbe { stencil: Stencil::Central(hj), at: [xj + hj, xj - hj] }
            } else if xj + 2.0 * hj <= hi && xj >= lo {
                DimProbe { stencil: Stencil::Forward(hj), at: [xj + hj, xj + 2.0 * hj] }
            } else if xj - 2.0 * hj >= lo && xj <= hi {
                DimProbe { stencil: Stencil::Backward(hj), at: [xj - hj, xj - 2.0 * hj] }
            } else {
                let (a, b) = ((xj + hj).min(hi), (xj - hj).max(lo));
                DimProbe { stencil: Stencil::Span(a, b), at: [a, b] }
            }
        })
        .collect()
}

fn probe_points(x: &[f64], plan: &[DimProbe]) -> Vec<Vec<f64>> {
    let mut pts = Vec::with_capacity(2 * plan.len());
    for (j, p) in plan.iter().enumerate() {
        for at in p.at {
            let mut pt = x.to_vec();
            pt[j] = at;
            pts.push(pt);
        }
    }
    pts
}

/// Numerical gradient and whether any component had to be zeroed because
/// a probe hit the divergence sentinel.
#[derive(Debug, Clone, PartialEq)]
pub struct FdGradient {
    pub grad: Vec<f64>,
    pub degraded: bool,
}

fn assemble(plan: &[DimProbe], fx: f64, probe_costs: &[f64]) -> FdGradient {
    let mut degraded = false;
    let grad = plan
        .iter()
        .enumerate()
        .map(|(j, p)| {
            let (fa, fb) = (probe_costs[2 * j], probe_costs[2 * j + 1]);
            let needs_fx = matches!(p.stencil, Stencil::Forward(_) | Stencil::Backward(_));
            if is_sentinel(fa) || is_sentinel(fb) || (needs_fx && is_sentinel(fx)) {
                degraded = true;
                return 0.0;
            }
            match p.stencil {
                Stencil::Central(h) => (fa - fb) / (2.0 * h),
                Stencil::Forward(h) => (-3.0 * fx + 4.0 * fa - fb) / (2.0 * h),
                Stencil::Backward(h) => (3.0 * fx - 4.0 * fa + fb) / (2.0 * h),
                Stencil::Span(a, b) if a > b => (fa - fb) / (a - b),
                Stencil::Span(..) => 0.0,
            }
        })
        .collect();
    FdGradient { grad, degraded }
}

/// Finite-difference gradient of a black-box objective inside a box.
///
/// Uses central differences where `x ± h` fits in the box and second-order
/// one-sided differences at the edges. Every dimension costs exactly two
/// probe evaluations; `f(x)` is evaluated only when a one-sided stencil is
/// needed.
pub fn fd_gradient<F>(objective: &F, x: &[f64], h: &[f64], bounds: &Bounds) -> FdGradient
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let plan = plan_probes(x, h, bounds);
    let costs = evaluate_batch(objective, &probe_points(x, &plan), Execution::Serial);
    let one_sided = plan
        .iter()
        .any(|p| matches!(p.stencil, Stencil::Forward(_) | Stencil::Backward(_)));
    let fx = if one_sided { objective(x) } else { f64::NAN };
    assemble(&plan, fx, &costs)
}

/// Per-stage coefficients of the velocity update.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StageCoefficients {
    pub mu: f64,
    pub alpha: f64,
    pub gamma: f64,
}

/// Velocity update: `mu*r1*(-grad) + alpha*r2*v_prev`, then each component's
/// magnitude is limited to `|gamma * v_prev|` keeping its sign.
pub fn sso_velocity(
    grad: &[f64],
    v_prev: &[f64],
    c: StageCoefficients,
    r1: f64,
    r2: f64,
) -> Vec<f64> {
    grad.iter()
        .zip(v_prev)
        .map(|(g, v)| {
            let raw = c.mu * r1 * -g + c.alpha * r2 * v;
            let cap = (c.gamma * v).abs();
            raw.signum() * raw.abs().min(cap)
        })
        .map(|v| if v == 0.0 { 0.0 } else { v })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SharkPopulation {
    pub positions: Vec<Vec<f64>>,
    pub velocities: Vec<Vec<f64>>,
    pub costs: Vec<f64>,
    /// Number of completed stages.
    pub stage: usize,
}

impl SharkPopulation {
    /// Uniform positions in the box; velocities uniform in
    /// `±0.1 * width` per dimension (a zero start would stay frozen under
    /// the velocity limiter).
    pub fn initialize<F, R>(objective: &F, cfg: &SsoConfig, rng: &mut R) -> Self
    where
        F: Fn(&[f64]) -> f64 + Sync,
        R: Rng,
    {
        let b = &cfg.bounds;
        let mut positions = Vec::with_capacity(cfg.np);
        let mut velocities = Vec::with_capacity(cfg.np);
        for _ in 0..cfg.np {
            positions.push(b.sample(rng));
            velocities.push(
                (0..b.dim())
                    .map(|j| (2.0 * rng.random::<f64>() - 1.0) * 0.1 * b.width(j))
                    .collect(),
            );
        }
        let costs = evaluate_batch(objective, &positions, cfg.execution);
        Self {
            positions,
            velocities,
            costs,
            stage: 0,
        }
    }
}

/// Everything one stage evaluated, for inspection.
#[derive(Debug, Clone, PartialEq)]
pub struct StageOutcome {
    pub population: SharkPopulation,
    /// Per shark: the forward point followed by the rotational points.
    pub candidates: Vec<Vec<Vec<f64>>>,
    pub candidate_costs: Vec<Vec<f64>>,
    /// Index into `candidates[i]` of the point each shark moved to.
    pub selected: Vec<usize>,
    pub gradients: Vec<FdGradient>,
    pub evals: u64,
}

/// Random draws for one shark, taken in a fixed order before any
/// evaluation is dispatched.
struct SharkDraws {
    r1: f64,
    r2: f64,
    /// `local_points × dim`, each in (-1, 1).
    r3: Vec<Vec<f64>>,
}

fn draw_stage<R: Rng>(rng: &mut R, np: usize, k: usize, dim: usize) -> Vec<SharkDraws> {
    (0..np)
        .map(|_| {
            let r1 = rng.random::<f64>();
            let r2 = rng.random::<f64>();
            let r3 = (0..k)
                .map(|_| (0..dim).map(|_| 2.0 * rng.random::<f64>() - 1.0).collect())
                .collect();
            SharkDraws { r1, r2, r3 }
        })
        .collect()
}

/// Advances the population by one stage.
pub fn sso_stage<F, R>(pop: &SharkPopulation, objective: &F, cfg: &SsoConfig, rng: &mut R) -> StageOutcome
where
    F: Fn(&[f64]) -> f64 + Sync,
    R: Rng,
{
    let m = pop.stage;
    let dim = cfg.dim();
    let coeffs = StageCoefficients {
        mu: cfg.mu.at(m),
        alpha: cfg.alpha.at(m),
        gamma: cfg.gamma.at(m),
    };

    // gradients at the current positions
    let plans: Vec<Vec<DimProbe>> = pop
        .positions
        .iter()
        .map(|x| plan_probes(x, &cfg.fd_step, &cfg.bounds))
        .collect();
    let probes: Vec<Vec<f64>> = pop
        .positions
        .iter()
        .zip(&plans)
        .flat_map(|(x, plan)| probe_points(x, plan))
        .collect();
    let probe_costs = evaluate_batch(objective, &probes, cfg.execution);
    let gradients: Vec<FdGradient> = plans
        .iter()
        .enumerate()
        .map(|(i, plan)| assemble(plan, pop.costs[i], &probe_costs[i * 2 * dim..(i + 1) * 2 * dim]))
        .collect();

    let draws = draw_stage(rng, cfg.np, cfg.local_points, dim);

    let mut velocities = Vec::with_capacity(cfg.np);
    let mut candidates = Vec::with_capacity(cfg.np);
    for i in 0..cfg.np {
        let d = &draws[i];
        let v = sso_velocity(&gradients[i].grad, &pop.velocities[i], coeffs, d.r1, d.r2);
        let mut forward: Vec<f64> = pop.positions[i]
            .iter()
            .zip(&v)
            .map(|(x, v)| x + v * cfg.stage_interval)
            .collect();
        cfg.bounds.clamp(&mut forward);
        let mut set = Vec::with_capacity(1 + cfg.local_points);
        for r3 in &d.r3 {
            let mut z: Vec<f64> = forward.iter().zip(r3).map(|(y, r)| y + r * y).collect();
            cfg.bounds.clamp(&mut z);
            set.push(z);
        }
        set.insert(0, forward);
        candidates.push(set);
        velocities.push(v);
    }

    let flat: Vec<Vec<f64>> = candidates.iter().flatten().cloned().collect();
    let flat_costs = evaluate_batch(objective, &flat, cfg.execution);
    let per = 1 + cfg.local_points;
    let candidate_costs: Vec<Vec<f64>> = flat_costs.chunks(per).map(<[f64]>::to_vec).collect();

    let selected: Vec<usize> = candidate_costs.iter().map(|c| argmin(c)).collect();
    let positions = candidates
        .iter()
        .zip(&selected)
        .map(|(set, &k)| set[k].clone())
        .collect();
    let costs = candidate_costs
        .iter()
        .zip(&selected)
        .map(|(c, &k)| c[k])
        .collect();

    StageOutcome {
        population: SharkPopulation {
            positions,
            velocities,
            costs,
            stage: m + 1,
        },
        evals: (probes.len() + flat.len()) as u64,
        candidates,
        candidate_costs,
        selected,
        gradients,
    }
}

/// Runs the full optimizer and returns the best position ever held by a
/// shark. Deterministic for a given seed, whatever the execution mode.
pub fn sso_optimize<F>(objective: &F, cfg: &SsoConfig) -> Result<OptResult>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    cfg.validate()?;
    let mut rng = seeded_rng(cfg.seed);
    let mut pop = SharkPopulation::initialize(objective, cfg, &mut rng);
    let mut evals = cfg.np as u64;
    let mut best = Incumbent::from_population(&pop.positions, &pop.costs);
    let mut history = Vec::with_capacity(cfg.stages);
    for m in 0..cfg.stages {
        let out = sso_stage(&pop, objective, cfg, &mut rng);
        evals += out.evals;
        pop = out.population;
        for (x, c) in pop.positions.iter().zip(&pop.costs) {
            best.offer(x, *c);
        }
        history.push(best.snapshot(m + 1, evals));
    }
    Ok(OptResult {
        algorithm: Algorithm::Sso,
        best_point: best.point,
        best_cost: best.cost,
        history,
        evals,
        seed: cfg.seed,
    })
}

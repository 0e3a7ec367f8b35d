//! Pieces shared by the population optimizers: search box, evaluation
//! dispatch, and the result record.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sim::DIVERGED_COST;

/// Axis-aligned search box.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl Bounds {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        let b = Self { lower, upper };
        b.validate()?;
        Ok(b)
    }

    /// The `(k1, k3)` box used for gain tuning.
    pub fn gain_box() -> Self {
        Self {
            lower: vec![0.0, 0.0],
            upper: vec![0.79, 10.0],
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.lower.is_empty() || self.lower.len() != self.upper.len() {
            return Err(Error::OptConfig(
                "bounds need matching, non-empty lower/upper vectors".into(),
            ));
        }
        for (j, (lo, hi)) in self.lower.iter().zip(&self.upper).enumerate() {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(Error::OptConfig(format!(
                    "dimension {j}: lower bound {lo} must be below upper bound {hi}"
                )));
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn width(&self, j: usize) -> f64 {
        self.upper[j] - self.lower[j]
    }

    pub fn clamp(&self, x: &mut [f64]) {
        for (j, v) in x.iter_mut().enumerate() {
            *v = v.clamp(self.lower[j], self.upper[j]);
        }
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim()
            && x
                .iter()
                .enumerate()
                .all(|(j, v)| (self.lower[j]..=self.upper[j]).contains(v))
    }

    pub(crate) fn sample<R: Rng>(&self, rng: &mut R) -> Vec<f64> {
        (0..self.dim())
            .map(|j| self.lower[j] + rng.random::<f64>() * self.width(j))
            .collect()
    }
}

/// How a batch of objective evaluations is dispatched. Results do not
/// depend on the choice.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Execution {
    Serial,
    #[default]
    Parallel,
}

pub fn is_sentinel(cost: f64) -> bool {
    !cost.is_finite() || cost >= DIVERGED_COST
}

fn sanitize(cost: f64) -> f64 {
    if is_sentinel(cost) {
        DIVERGED_COST
    } else {
        cost
    }
}

/// Evaluates every point, preserving order. Non-finite costs are mapped to
/// [`DIVERGED_COST`].
pub(crate) fn evaluate_batch<F>(objective: &F, points: &[Vec<f64>], exec: Execution) -> Vec<f64>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    match exec {
        Execution::Serial => points.iter().map(|x| sanitize(objective(x))).collect(),
        Execution::Parallel => points.par_iter().map(|x| sanitize(objective(x))).collect(),
    }
}

pub(crate) fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Index of the smallest cost; ties go to the lowest index.
pub fn argmin(costs: &[f64]) -> usize {
    let mut best = 0;
    for (i, c) in costs.iter().enumerate().skip(1) {
        if *c < costs[best] {
            best = i;
        }
    }
    best
}

/// Best-so-far snapshot after one stage (SSO) or iteration (PSO).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergencePoint {
    pub stage: usize,
    pub best_cost: f64,
    pub best_point: Vec<f64>,
    /// Objective evaluations spent up to and including this stage.
    pub evals: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Sso,
    Pso,
}

impl std::fmt::Display for Algorithm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Algorithm::Sso => "sso",
            Algorithm::Pso => "pso",
        })
    }
}

impl std::str::FromStr for Algorithm {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "sso" => Ok(Self::Sso),
            "pso" => Ok(Self::Pso),
            other => Err(format!("unknown algorithm '{other}' (expected sso or pso)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptResult {
    pub algorithm: Algorithm,
    pub best_point: Vec<f64>,
    pub best_cost: f64,
    pub history: Vec<ConvergencePoint>,
    pub evals: u64,
    pub seed: u64,
}

/// Running best-so-far tracker.
#[derive(Debug, Clone)]
pub(crate) struct Incumbent {
    pub point: Vec<f64>,
    pub cost: f64,
}

impl Incumbent {
    pub fn from_population(points: &[Vec<f64>], costs: &[f64]) -> Self {
        let i = argmin(costs);
        Self {
            point: points[i].clone(),
            cost: costs[i],
        }
    }

    pub fn offer(&mut self, point: &[f64], cost: f64) {
        if cost < self.cost {
            self.cost = cost;
            self.point = point.to_vec();
        }
    }

    pub fn snapshot(&self, stage: usize, evals: u64) -> ConvergencePoint {
        ConvergencePoint {
            stage,
            best_cost: self.cost,
            best_point: self.point.clone(),
            evals,
        }
    }
}

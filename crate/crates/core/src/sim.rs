//! Fixed-step integration of the master/slave pair and the synchronization
//! cost.
//!
//! Both oscillators are advanced together as one six-dimensional state with
//! classical RK4. The control input is re-evaluated at every Runge–Kutta
//! stage, so the closed loop is integrated as a continuous-time system. The
//! cost (total sum of squared errors) is accumulated with the trapezoidal
//! rule on every integration step, independent of how often samples are
//! recorded.

use serde::{Deserialize, Serialize};

use crate::control::{control_law_with, lyapunov_values, transform_error, ControlLaw, Gains};
use crate::error::{Error, Result};
use crate::model::{
    master_derivative, slave_derivative, ControlSignal, ErrorState, OscillatorParams, State3,
};

/// Cost reported for a run that diverged or could not be started. Kept
/// finite so it survives JSON serialization.
pub const DIVERGED_COST: f64 = f64::MAX;

/// The RK4 update produced a non-finite component.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NonFiniteStep;

/// One classical fourth-order Runge–Kutta step of an autonomous field.
#[inline]
pub fn rk4_step<const N: usize, F>(field: F, s: &[f64; N], dt: f64) -> Result<[f64; N], NonFiniteStep>
where
    F: Fn(&[f64; N]) -> [f64; N],
{
    let offset = |base: &[f64; N], k: &[f64; N], h: f64| {
        let mut out = *base;
        for (o, k) in out.iter_mut().zip(k) {
            *o += h * k;
        }
        out
    };
    let k1 = field(s);
    let k2 = field(&offset(s, &k1, 0.5 * dt));
    let k3 = field(&offset(s, &k2, 0.5 * dt));
    let k4 = field(&offset(s, &k3, dt));
    let mut next = *s;
    for i in 0..N {
        next[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        if !next[i].is_finite() {
            return Err(NonFiniteStep);
        }
    }
    Ok(next)
}

/// Settings for one coupled run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    pub dt: f64,
    pub t_final: f64,
    /// Instant at which the controller switches on.
    pub t_activate: f64,
    pub master_ic: State3,
    pub slave_ic: State3,
    /// Keep one sample every `record_stride` steps.
    pub record_stride: usize,
    pub control_law: ControlLaw,
}

impl Default for SimConfig {
    /// Reference protocol: controller off for 20 time units, horizon 70.
    fn default() -> Self {
        Self {
            dt: 1e-3,
            t_final: 70.0,
            t_activate: 20.0,
            master_ic: State3::new(10.45, 0.718, 8.89),
            slave_ic: State3::new(8.0, 2.0, 3.0),
            record_stride: 10,
            control_law: ControlLaw::Expanded,
        }
    }
}

// Upper limit on the step count; keeps `n as f64 * dt` exact.
const MAX_STEPS: f64 = 9.0e15;

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::SimConfig("dt must be positive".into()));
        }
        if !(self.t_final.is_finite() && self.t_final >= 0.0) {
            return Err(Error::SimConfig("t_final must be non-negative".into()));
        }
        if !(self.t_activate.is_finite() && (0.0..=self.t_final).contains(&self.t_activate)) {
            return Err(Error::SimConfig(
                "t_activate must lie in [0, t_final]".into(),
            ));
        }
        if self.record_stride == 0 {
            return Err(Error::SimConfig("record_stride must be at least 1".into()));
        }
        if self.t_final / self.dt > MAX_STEPS {
            return Err(Error::SimConfig("t_final / dt overflows the step counter".into()));
        }
        if !(self.master_ic.is_finite() && self.slave_ic.is_finite()) {
            return Err(Error::SimConfig("initial conditions must be finite".into()));
        }
        Ok(())
    }

    /// Number of integration steps; the horizon is rounded to a whole step.
    pub fn steps(&self) -> u64 {
        (self.t_final / self.dt).round() as u64
    }

    /// First step driven by the controller, or `None` when no integration
    /// step falls at or after `t_activate`.
    pub fn activation_step(&self) -> Option<u64> {
        let a = (self.t_activate / self.dt).round() as u64;
        (a < self.steps()).then_some(a)
    }
}

/// Recorded master/slave run.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub master: Vec<State3>,
    pub slave: Vec<State3>,
    pub errors: Vec<ErrorState>,
    pub control: Vec<ControlSignal>,
    /// Total sum of squared errors over the whole horizon.
    pub tss: f64,
    pub t_final: f64,
}

impl Trajectory {
    /// Builds a trajectory from error samples alone (slave at the origin),
    /// integrating the cost over the given samples.
    pub fn from_error_samples(times: Vec<f64>, errors: Vec<ErrorState>) -> Self {
        assert_eq!(times.len(), errors.len());
        let master: Vec<State3> = errors
            .iter()
            .map(|e| State3::new(e.e1, e.e2, e.e3))
            .collect();
        let mut tss = 0.0;
        for i in 1..times.len() {
            tss += 0.5 * (times[i] - times[i - 1]) * (errors[i - 1].norm_sq() + errors[i].norm_sq());
        }
        Self {
            t_final: times.last().copied().unwrap_or(0.0),
            slave: vec![State3::ZERO; times.len()],
            control: vec![ControlSignal::OFF; times.len()],
            times,
            master,
            errors,
            tss,
        }
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Lyapunov function `v3` at each sample for the given gains.
    pub fn lyapunov_v3(&self, g: &Gains) -> Vec<f64> {
        self.errors
            .iter()
            .map(|e| lyapunov_values(transform_error(*e, g)).v3)
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CostResult {
    pub tss: f64,
    /// Integration horizon the cost was accumulated over.
    pub horizon: f64,
}

pub fn tss_cost(traj: &Trajectory) -> CostResult {
    CostResult {
        tss: traj.tss,
        horizon: traj.t_final,
    }
}

#[inline]
fn split(s: &[f64; 6]) -> (State3, State3) {
    (
        State3::new(s[0], s[1], s[2]),
        State3::new(s[3], s[4], s[5]),
    )
}

#[inline]
fn error_sq(s: &[f64; 6]) -> f64 {
    let (m, sl) = split(s);
    ErrorState::between(m, sl).norm_sq()
}

#[inline]
fn pair_field(
    s: &[f64; 6],
    p: &OscillatorParams,
    controller: Option<(&Gains, ControlLaw)>,
) -> [f64; 6] {
    let (m, sl) = split(s);
    let u = controller_input(m, sl, p, controller);
    let dm = master_derivative(m, p);
    let ds = slave_derivative(sl, p, u);
    [dm.x, dm.y, dm.z, ds.x, ds.y, ds.z]
}

#[inline]
fn controller_input(
    m: State3,
    sl: State3,
    p: &OscillatorParams,
    controller: Option<(&Gains, ControlLaw)>,
) -> ControlSignal {
    match controller {
        Some((g, law)) => control_law_with(law, ErrorState::between(m, sl), m.z, g, p),
        None => ControlSignal::OFF,
    }
}

/// Integration position: state after `step` steps and the cost so far.
#[derive(Debug, Clone, Copy)]
struct Cursor {
    state: [f64; 6],
    step: u64,
    tss: f64,
    err_sq: f64,
}

impl Cursor {
    fn start(cfg: &SimConfig) -> Self {
        let m = cfg.master_ic;
        let s = cfg.slave_ic;
        let state = [m.x, m.y, m.z, s.x, s.y, s.z];
        Self {
            err_sq: error_sq(&state),
            state,
            step: 0,
            tss: 0.0,
        }
    }
}

/// Advances `cur` up to step `until`, calling `observe` after every step.
fn advance(
    p: &OscillatorParams,
    gains: Option<&Gains>,
    cfg: &SimConfig,
    cur: &mut Cursor,
    until: u64,
    mut observe: impl FnMut(&Cursor),
) -> Result<()> {
    let dt = cfg.dt;
    let activate = cfg.activation_step();
    while cur.step < until {
        let active = matches!(activate, Some(a) if cur.step >= a);
        let controller = if active {
            gains.map(|g| (g, cfg.control_law))
        } else {
            None
        };
        let next = rk4_step(|s| pair_field(s, p, controller), &cur.state, dt).map_err(|_| {
            Error::Diverged {
                t: (cur.step + 1) as f64 * dt,
            }
        })?;
        let err_sq = error_sq(&next);
        cur.tss += 0.5 * dt * (cur.err_sq + err_sq);
        cur.err_sq = err_sq;
        cur.state = next;
        cur.step += 1;
        observe(cur);
    }
    Ok(())
}

/// Integrates master and slave together, recording every
/// `record_stride`-th step. The controller is off before `t_activate` and
/// applies `cfg.control_law` from then on.
pub fn simulate_pair(p: &OscillatorParams, g: &Gains, cfg: &SimConfig) -> Result<Trajectory> {
    p.validate()?;
    cfg.validate()?;
    // re-check gains against these params (they may have been built for others)
    Gains::new(g.k1(), g.k3(), p)?;

    let steps = cfg.steps();
    let stride = cfg.record_stride as u64;
    let activate = cfg.activation_step();
    let n_samples = (steps / stride + 1) as usize;
    let mut traj = Trajectory {
        times: Vec::with_capacity(n_samples),
        master: Vec::with_capacity(n_samples),
        slave: Vec::with_capacity(n_samples),
        errors: Vec::with_capacity(n_samples),
        control: Vec::with_capacity(n_samples),
        tss: 0.0,
        t_final: steps as f64 * cfg.dt,
    };
    let mut record = |cur: &Cursor| {
        if cur.step % stride != 0 {
            return;
        }
        let (m, sl) = split(&cur.state);
        let active = matches!(activate, Some(a) if cur.step >= a);
        let u = controller_input(m, sl, p, active.then_some((g, cfg.control_law)));
        traj.times.push(cur.step as f64 * cfg.dt);
        traj.master.push(m);
        traj.slave.push(sl);
        traj.errors.push(ErrorState::between(m, sl));
        traj.control.push(u);
    };
    let mut cur = Cursor::start(cfg);
    record(&cur);
    advance(p, Some(g), cfg, &mut cur, steps, &mut record)?;
    traj.tss = cur.tss;
    Ok(traj)
}

/// Runs the coupled system for gains `(k1, 0, k3)` and returns its total
/// sum of squared errors. Invalid gains and divergent runs both map to
/// [`DIVERGED_COST`].
pub fn evaluate_gains(k1: f64, k3: f64, p: &OscillatorParams, cfg: &SimConfig) -> f64 {
    let Ok(g) = Gains::new(k1, k3, p) else {
        return DIVERGED_COST;
    };
    if p.validate().is_err() || cfg.validate().is_err() {
        return DIVERGED_COST;
    }
    let mut cur = Cursor::start(cfg);
    match advance(p, Some(&g), cfg, &mut cur, cfg.steps(), |_| {}) {
        Ok(()) => cur.tss,
        Err(_) => DIVERGED_COST,
    }
}

/// Gain-tuning objective with the controller-independent prefix cached.
///
/// Everything before the activation step is the same for all gains, so it
/// is integrated once; each evaluation resumes from that point. Results are
/// bit-identical to [`evaluate_gains`].
#[derive(Debug, Clone)]
pub struct GainObjective {
    params: OscillatorParams,
    cfg: SimConfig,
    prefix: Option<Cursor>,
}

impl GainObjective {
    pub fn new(params: OscillatorParams, cfg: SimConfig) -> Result<Self> {
        params.validate()?;
        cfg.validate()?;
        let mut cur = Cursor::start(&cfg);
        let until = cfg.activation_step().unwrap_or(cfg.steps());
        let prefix = match advance(&params, None, &cfg, &mut cur, until, |_| {}) {
            Ok(()) => Some(cur),
            Err(Error::Diverged { .. }) => None,
            Err(e) => return Err(e),
        };
        Ok(Self {
            params,
            cfg,
            prefix,
        })
    }

    pub fn params(&self) -> &OscillatorParams {
        &self.params
    }

    pub fn sim_config(&self) -> &SimConfig {
        &self.cfg
    }

    /// Cost of gains `(k1, 0, k3)`.
    pub fn cost(&self, k1: f64, k3: f64) -> f64 {
        let (Some(prefix), Ok(g)) = (self.prefix, Gains::new(k1, k3, &self.params)) else {
            return DIVERGED_COST;
        };
        let mut cur = prefix;
        match advance(&self.params, Some(&g), &self.cfg, &mut cur, self.cfg.steps(), |_| {}) {
            Ok(()) => cur.tss,
            Err(_) => DIVERGED_COST,
        }
    }

    /// Objective over the decision vector `[k1, k3]`.
    pub fn evaluate(&self, x: &[f64]) -> f64 {
        assert_eq!(x.len(), 2, "gain objective takes [k1, k3]");
        self.cost(x[0], x[1])
    }
}

/// Free-running single oscillator, sampled every `record_stride` steps.
pub fn simulate_single(
    p: &OscillatorParams,
    ic: State3,
    dt: f64,
    t_final: f64,
    record_stride: usize,
) -> Result<Vec<(f64, State3)>> {
    p.validate()?;
    let cfg = SimConfig {
        dt,
        t_final,
        t_activate: t_final,
        master_ic: ic,
        slave_ic: ic,
        record_stride,
        ..SimConfig::default()
    };
    cfg.validate()?;
    let steps = cfg.steps();
    let stride = record_stride as u64;
    let mut out = Vec::with_capacity((steps / stride + 1) as usize);
    let mut s = ic.to_array();
    out.push((0.0, ic));
    for n in 1..=steps {
        s = rk4_step(|v| master_derivative(State3::from(*v), p).to_array(), &s, dt)
            .map_err(|_| Error::Diverged { t: n as f64 * dt })?;
        if n % stride == 0 {
            out.push((n as f64 * dt, State3::from(s)));
        }
    }
    Ok(out)
}

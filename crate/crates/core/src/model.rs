//! Dimensionless Colpitts oscillator model.
//!
//! The master runs free, the slave receives an additive control input on
//! its first equation, and the error system tracks `master - slave`.

use std::ops::{Add, Mul, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The five dimensionless coefficients of the Colpitts model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OscillatorParams {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub e: f64,
}

impl OscillatorParams {
    /// Parameter set that puts the oscillator in its chaotic regime.
    pub const TYPICAL: Self = Self {
        a: 30.0,
        b: 0.8,
        c: 20.0,
        d: 0.08,
        e: 10.0,
    };

    pub fn new(a: f64, b: f64, c: f64, d: f64, e: f64) -> Result<Self> {
        let p = Self { a, b, c, d, e };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let named = [
            ("a", self.a),
            ("b", self.b),
            ("c", self.c),
            ("d", self.d),
        ];
        for (name, v) in named {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Params(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.e.is_finite() && self.e > 1.0) {
            return Err(Error::Params(format!("e must exceed 1, got {}", self.e)));
        }
        Ok(())
    }

    /// Voltage at which the drive nonlinearity switches off (`e - 1`).
    pub fn breakpoint(&self) -> f64 {
        self.e - 1.0
    }

    /// Fixed point of the free-running oscillator in the active branch
    /// (`z < e - 1`).
    pub fn equilibrium(&self) -> State3 {
        let z = self.a * self.breakpoint() / (self.a + self.d);
        let y = self.d * z;
        State3::new(self.c - self.b * y - z, y, z)
    }
}

impl Default for OscillatorParams {
    fn default() -> Self {
        Self::TYPICAL
    }
}

/// A point in the oscillator phase space.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "[f64; 3]", into = "[f64; 3]")]
pub struct State3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl State3 {
    pub const ZERO: Self = Self::new(0.0, 0.0, 0.0);

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    pub fn max_abs(&self) -> f64 {
        self.x.abs().max(self.y.abs()).max(self.z.abs())
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }
}

impl From<State3> for [f64; 3] {
    fn from(s: State3) -> Self {
        s.to_array()
    }
}

impl From<[f64; 3]> for State3 {
    fn from([x, y, z]: [f64; 3]) -> Self {
        Self { x, y, z }
    }
}

impl Add for State3 {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl Sub for State3 {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Mul<f64> for State3 {
    type Output = Self;
    fn mul(self, k: f64) -> Self {
        Self::new(self.x * k, self.y * k, self.z * k)
    }
}

/// Scalar control input added to the slave's first equation.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ControlSignal(pub f64);

impl ControlSignal {
    pub const OFF: Self = Self(0.0);

    pub fn value(self) -> f64 {
        self.0
    }
}

/// Synchronization error, master minus slave, per component.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ErrorState {
    pub e1: f64,
    pub e2: f64,
    pub e3: f64,
}

impl ErrorState {
    pub const ZERO: Self = Self::new(0.0, 0.0, 0.0);

    pub const fn new(e1: f64, e2: f64, e3: f64) -> Self {
        Self { e1, e2, e3 }
    }

    pub fn between(master: State3, slave: State3) -> Self {
        Self::new(master.x - slave.x, master.y - slave.y, master.z - slave.z)
    }

    pub fn norm_sq(&self) -> f64 {
        self.e1 * self.e1 + self.e2 * self.e2 + self.e3 * self.e3
    }

    pub fn max_abs(&self) -> f64 {
        self.e1.abs().max(self.e2.abs()).max(self.e3.abs())
    }

    pub fn is_finite(&self) -> bool {
        self.e1.is_finite() && self.e2.is_finite() && self.e3.is_finite()
    }
}

/// Piecewise-linear drive `F(z)`: `e - 1 - z` below the breakpoint, zero
/// at or above it.
#[inline]
pub fn nonlinearity(z: f64, p: &OscillatorParams) -> f64 {
    let knee = p.breakpoint();
    if z < knee {
        knee - z
    } else {
        0.0
    }
}

/// Vector field of the free-running (master) oscillator.
#[inline]
pub fn master_derivative(s: State3, p: &OscillatorParams) -> State3 {
    State3::new(
        s.y - p.a * nonlinearity(s.z, p),
        p.c - s.x - p.b * s.y - s.z,
        s.y - p.d * s.z,
    )
}

/// Vector field of the controlled (slave) oscillator.
#[inline]
pub fn slave_derivative(s: State3, p: &OscillatorParams, u: ControlSignal) -> State3 {
    let mut ds = master_derivative(s, p);
    ds.x += u.0;
    ds
}

/// Vector field of the synchronization error, written directly in error
/// coordinates; only the master's `z` is needed to evaluate the drive terms.
#[inline]
pub fn error_derivative(
    err: ErrorState,
    z_master: f64,
    p: &OscillatorParams,
    u: ControlSignal,
) -> ErrorState {
    ErrorState::new(
        err.e2 - p.a * nonlinearity(z_master, p) + p.a * nonlinearity(z_master - err.e3, p) - u.0,
        -err.e1 - p.b * err.e2 - err.e3,
        err.e2 - p.d * err.e3,
    )
}

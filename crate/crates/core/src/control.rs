//! Backstepping synchronization controller.
//!
//! The error system is rewritten in the residual coordinates
//! `(e3, w2, w3) = (e3, e2 + k1*e3, e1)` (the second virtual gain is pinned
//! to zero), where a suitable control input turns it into a stable linear
//! system.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{nonlinearity, ControlSignal, ErrorState, OscillatorParams};

/// Controller gains.
///
/// `k2` is kept as a field but is always zero: the third Lyapunov step
/// needs `k2 >= 0` from the first step and `k2 <= 0` for negative
/// definiteness, which leaves only `k2 = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Gains {
    k1: f64,
    k2: f64,
    k3: f64,
}

impl Gains {
    /// Builds gains for a given oscillator, enforcing `0 <= k1 < b` and
    /// `k3 >= 0`.
    pub fn new(k1: f64, k3: f64, p: &OscillatorParams) -> Result<Self> {
        if !(k1.is_finite() && k1 >= 0.0) {
            return Err(Error::Gains(format!("k1 must be non-negative, got {k1}")));
        }
        if k1 >= p.b {
            return Err(Error::Gains(format!(
                "k1 must be below b = {}, got {k1}",
                p.b
            )));
        }
        if !(k3.is_finite() && k3 >= 0.0) {
            return Err(Error::Gains(format!("k3 must be non-negative, got {k3}")));
        }
        Ok(Self { k1, k2: 0.0, k3 })
    }

    pub fn k1(&self) -> f64 {
        self.k1
    }

    pub fn k2(&self) -> f64 {
        self.k2
    }

    pub fn k3(&self) -> f64 {
        self.k3
    }
}

/// Which algebraic form of the control input to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ControlLaw {
    /// Polynomial-coefficient form, whose `e3` coefficient starts with `d*k1`.
    /// Closes the loop onto [`closed_loop_matrix`] exactly only at `k1 = 0`.
    #[default]
    Expanded,
    /// Input chosen so that `dw3/dt = w2 - k3*w3` holds for every `k1`.
    Reduced,
}

impl std::str::FromStr for ControlLaw {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "expanded" => Ok(Self::Expanded),
            "reduced" => Ok(Self::Reduced),
            other => Err(format!(
                "unknown control law '{other}' (expected expanded or reduced)"
            )),
        }
    }
}

/// Error expressed in backstepping residual coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct TransformedError {
    pub e3: f64,
    pub w2: f64,
    pub w3: f64,
}

impl TransformedError {
    pub const fn new(e3: f64, w2: f64, w3: f64) -> Self {
        Self { e3, w2, w3 }
    }

    /// Inverse of [`transform_error`].
    pub fn to_error(self, g: &Gains) -> ErrorState {
        ErrorState::new(self.w3, self.w2 - g.k1 * self.e3, self.e3)
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.e3, self.w2, self.w3]
    }
}

pub fn transform_error(err: ErrorState, g: &Gains) -> TransformedError {
    TransformedError::new(err.e3, err.e2 + g.k1 * err.e3, err.e1)
}

/// Control input of the published law.
pub fn control_law(
    err: ErrorState,
    z_master: f64,
    g: &Gains,
    p: &OscillatorParams,
) -> ControlSignal {
    control_law_with(ControlLaw::Expanded, err, z_master, g, p)
}

/// Control input for either variant of the law.
#[inline]
pub fn control_law_with(
    law: ControlLaw,
    err: ErrorState,
    z_master: f64,
    g: &Gains,
    p: &OscillatorParams,
) -> ControlSignal {
    let t = transform_error(err, g);
    let drive = -p.a * nonlinearity(z_master, p) + p.a * nonlinearity(z_master - err.e3, p);
    let k1 = g.k1;
    let (d, b) = (p.d, p.b);
    let u = match law {
        ControlLaw::Expanded => {
            let w2_coeff = k1 * k1 - b * k1 + d * k1;
            let e3_coeff = d * k1 - k1 + b * k1 * k1 - k1 * k1 * k1 - 2.0 * d * k1 * k1 - d * d * k1;
            drive + g.k3 * t.w3 + w2_coeff * t.w2 + e3_coeff * t.e3
        }
        ControlLaw::Reduced => drive - k1 * t.e3 + g.k3 * t.w3,
    };
    ControlSignal(u)
}

/// Target closed-loop dynamics in `(e3, w2, w3)`:
///
/// ```text
/// de3/dt = -(k1 + d) e3 + w2
/// dw2/dt = -e3 + (k1 - b) w2 - w3
/// dw3/dt = w2 - k3 w3
/// ```
pub fn closed_loop_matrix(g: &Gains, p: &OscillatorParams) -> [[f64; 3]; 3] {
    [
        [-(g.k1 + p.d), 1.0, 0.0],
        [-1.0, g.k1 - p.b, -1.0],
        [0.0, 1.0, -g.k3],
    ]
}

/// Coefficients `[c2, c1, c0]` of the monic characteristic polynomial
/// `s^3 + c2 s^2 + c1 s + c0` of a 3x3 matrix.
pub fn characteristic_polynomial(m: &[[f64; 3]; 3]) -> [f64; 3] {
    let trace = m[0][0] + m[1][1] + m[2][2];
    let minors = m[0][0] * m[1][1] - m[0][1] * m[1][0] + m[0][0] * m[2][2] - m[0][2] * m[2][0]
        + m[1][1] * m[2][2]
        - m[1][2] * m[2][1];
    let det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
    [-trace, minors, -det]
}

/// Routh–Hurwitz test: every eigenvalue of `m` has a negative real part.
pub fn is_hurwitz(m: &[[f64; 3]; 3]) -> bool {
    let [c2, c1, c0] = characteristic_polynomial(m);
    c2 > 0.0 && c0 > 0.0 && c2 * c1 > c0
}

/// Nested backstepping Lyapunov functions.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LyapunovValues {
    pub v1: f64,
    pub v2: f64,
    pub v3: f64,
}

pub fn lyapunov_values(t: TransformedError) -> LyapunovValues {
    let v1 = 0.5 * t.e3 * t.e3;
    let v2 = v1 + 0.5 * t.w2 * t.w2;
    let v3 = v2 + 0.5 * t.w3 * t.w3;
    LyapunovValues { v1, v2, v3 }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    const P: OscillatorParams = OscillatorParams::TYPICAL;

    fn gains(k1: f64, k3: f64) -> Gains {
        Gains::new(k1, k3, &P).unwrap()
    }

    #[test]
    fn gain_validation() {
        assert!(Gains::new(0.8, 1.0, &P).is_err());
        assert!(Gains::new(-0.1, 1.0, &P).is_err());
        assert!(Gains::new(0.1, -1.0, &P).is_err());
        assert!(Gains::new(0.1, f64::INFINITY, &P).is_err());
        let g = gains(0.79, 0.0);
        assert_eq!(g.k2(), 0.0);
    }

    #[test]
    fn transform_examples() {
        let err = ErrorState::new(1.0, 2.0, 3.0);
        assert_eq!(transform_error(err, &gains(0.0, 1.0)), TransformedError::new(3.0, 2.0, 1.0));
        assert_eq!(transform_error(err, &gains(0.5, 1.0)), TransformedError::new(3.0, 3.5, 1.0));
        assert_eq!(
            transform_error(ErrorState::ZERO, &gains(0.3, 2.0)),
            TransformedError::default()
        );
    }

    #[test]
    fn control_examples() {
        let g = gains(0.0, 2.4982);
        let u = control_law(ErrorState::new(1.0, 2.0, 3.0), 20.0, &g, &P);
        assert_abs_diff_eq!(u.0, 2.4982, epsilon = 1e-12);
        let u = control_law(ErrorState::new(1.0, 0.0, 1.0), 5.0, &gains(0.0, 1.0), &P);
        assert_abs_diff_eq!(u.0, 31.0, epsilon = 1e-12);
    }

    #[test]
    fn variants_agree_at_zero_k1() {
        let g = gains(0.0, 1.7);
        let err = ErrorState::new(0.3, -1.2, 2.2);
        let a = control_law_with(ControlLaw::Expanded, err, 7.0, &g, &P);
        let b = control_law_with(ControlLaw::Reduced, err, 7.0, &g, &P);
        assert_eq!(a, b);
    }

    #[test]
    fn corrected_law_closes_loop_for_any_k1() {
        // with the corrected input, d(w3)/dt from the error field must equal
        // w2 - k3*w3 for any k1
        let g = gains(0.37, 1.3);
        let err = ErrorState::new(0.4, -0.7, 1.9);
        let u = control_law_with(ControlLaw::Reduced, err, 6.0, &g, &P);
        let de = crate::model::error_derivative(err, 6.0, &P, u);
        let t = transform_error(err, &g);
        assert_abs_diff_eq!(de.e1, t.w2 - g.k3() * t.w3, epsilon = 1e-12);
    }

    #[test]
    fn matrix_at_zero_gains() {
        assert_eq!(
            closed_loop_matrix(&gains(0.0, 0.0), &P),
            [[-0.08, 1.0, 0.0], [-1.0, -0.8, -1.0], [0.0, 1.0, 0.0]]
        );
    }

    #[test]
    fn characteristic_polynomial_coefficients() {
        // frozen from numpy.poly on the same matrix
        let c = characteristic_polynomial(&closed_loop_matrix(&gains(0.0, 2.4982), &P));
        assert_abs_diff_eq!(c[0], 3.3782, epsilon = 1e-12);
        assert_abs_diff_eq!(c[1], 4.262416, epsilon = 1e-12);
        assert_abs_diff_eq!(c[2], 2.7380848, epsilon = 1e-12);
        assert!(is_hurwitz(&closed_loop_matrix(&gains(0.0, 2.4982), &P)));
        assert!(!is_hurwitz(&[[1.0, 0.0, 0.0], [0.0, -1.0, 0.0], [0.0, 0.0, -1.0]]));
    }

    #[test]
    fn lyapunov_examples() {
        assert_eq!(lyapunov_values(TransformedError::default()), LyapunovValues::default());
        let l = lyapunov_values(TransformedError::new(1.0, 1.0, 1.0));
        assert_eq!((l.v1, l.v2, l.v3), (0.5, 1.0, 1.5));
        let l = lyapunov_values(TransformedError::new(2.0, 0.0, 0.0));
        assert_eq!((l.v1, l.v2, l.v3), (2.0, 2.0, 2.0));
    }

    #[test]
    fn law_parses() {
        assert_eq!("expanded".parse::<ControlLaw>(), Ok(ControlLaw::Expanded));
        assert!("other".parse::<ControlLaw>().is_err());
    }

    proptest! {
        #[test]
        fn zero_error_gives_zero_control(
            k1 in 0.0..0.79f64, k3 in 0.0..10.0f64, z in -50.0..50.0f64,
        ) {
            let g = gains(k1, k3);
            for law in [ControlLaw::Expanded, ControlLaw::Reduced] {
                prop_assert_eq!(control_law_with(law, ErrorState::ZERO, z, &g, &P).0, 0.0);
            }
        }

        #[test]
        fn transform_round_trips(
            e in prop::array::uniform3(-100.0..100.0f64),
            k1 in prop::sample::select(vec![0.0, 0.25, 0.5]),
        ) {
            let g = gains(k1, 1.0);
            let err = ErrorState::new(e[0], e[1], e[2]);
            let back = transform_error(err, &g).to_error(&g);
            prop_assert_eq!(back.e1, err.e1);
            prop_assert_eq!(back.e3, err.e3);
            // (e2 + k1*e3) - k1*e3 can round once in the addition
            let scale = err.e2.abs().max((k1 * err.e3).abs());
            prop_assert!((back.e2 - err.e2).abs() <= 2.0 * f64::EPSILON * scale);
            if k1 == 0.0 {
                prop_assert_eq!(back, err);
            }
        }

        #[test]
        fn lyapunov_ordering(t in prop::array::uniform3(-100.0..100.0f64)) {
            let l = lyapunov_values(TransformedError::new(t[0], t[1], t[2]));
            prop_assert!(0.0 <= l.v1 && l.v1 <= l.v2 && l.v2 <= l.v3);
        }
    }
}

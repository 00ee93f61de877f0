//! Discrete PID controller with integral and output clamping.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PidGains {
    pub kp: f64,
    pub ki: f64,
    pub kd: f64,
    /// Bound on |integral| (error-seconds).
    pub integral_clamp: f64,
    /// Bound on |output|.
    pub output_clamp: f64,
}

impl PidGains {
    pub const fn new(kp: f64, ki: f64, kd: f64) -> Self {
        Self {
            kp,
            ki,
            kd,
            integral_clamp: 0.5,
            output_clamp: 1.0,
        }
    }

    pub const fn with_output_clamp(mut self, clamp: f64) -> Self {
        self.output_clamp = clamp;
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Pid {
    gains: PidGains,
    integral: f64,
    prev_error: Option<f64>,
}

impl Pid {
    pub fn new(gains: PidGains) -> Self {
        Self {
            gains,
            integral: 0.0,
            prev_error: None,
        }
    }

    pub fn gains(&self) -> PidGains {
        self.gains
    }

    pub fn integral(&self) -> f64 {
        self.integral
    }

    pub fn reset(&mut self) {
        self.integral = 0.0;
        self.prev_error = None;
    }

    /// One control step over `dt` seconds. The first step after a reset has
    /// no derivative term.
    pub fn update(&mut self, error: f64, dt: f64) -> f64 {
        let g = self.gains;
        let dt = if dt > 0.0 { dt } else { 0.0 };
        self.integral = (self.integral + error * dt).clamp(-g.integral_clamp, g.integral_clamp);
        let derivative = match self.prev_error {
            Some(prev) if dt > 0.0 => (error - prev) / dt,
            _ => 0.0,
        };
        self.prev_error = Some(error);
        let out = g.kp * error + g.ki * self.integral + g.kd * derivative;
        out.clamp(-g.output_clamp, g.output_clamp)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn zero_error_zero_state_is_exactly_zero() {
        let mut p = Pid::new(PidGains::new(1.2, 0.05, 0.1));
        assert_eq!(p.update(0.0, 0.066), 0.0);
        assert_eq!(p.update(0.0, 0.066), 0.0);
    }

    #[test]
    fn proportional_sign() {
        let mut p = Pid::new(PidGains::new(2.0, 0.0, 0.0));
        assert!((p.update(-0.2, 0.1) + 0.4).abs() < 1e-12);
    }

    #[test]
    fn derivative_after_first_step() {
        let mut p = Pid::new(PidGains::new(0.0, 0.0, 1.0));
        assert_eq!(p.update(0.1, 0.1), 0.0);
        assert!((p.update(0.2, 0.1) - 1.0).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn integral_and_output_stay_clamped(
            errors in proptest::collection::vec(-10.0f64..10.0, 1..300),
            dt in 0.001f64..1.0,
        ) {
            let g = PidGains::new(1.0, 0.5, 0.1);
            let mut p = Pid::new(g);
            for e in errors {
                let out = p.update(e, dt);
                prop_assert!(p.integral().abs() <= g.integral_clamp);
                prop_assert!(out.abs() <= g.output_clamp);
            }
        }
    }
}

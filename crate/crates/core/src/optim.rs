//! Shared optimizer interface and moment-estimation helpers.

use crate::error::Result;
use crate::hvadam::StepDiagnostics;
use crate::projection::BoxConstraint;
use crate::vector::ParamVector;

/// A stateful first-order optimizer. One instance owns one parameter group.
pub trait Optimizer: Send {
    /// Short registry id (`"adam"`, `"hvadam"`, ...).
    fn id(&self) -> &'static str;

    /// Consumes one gradient evaluated at `params` and returns the next iterate.
    fn step(
        &mut self,
        params: &ParamVector,
        grad: &ParamVector,
        feasible: Option<&BoxConstraint>,
    ) -> Result<ParamVector>;

    /// Number of steps taken so far.
    fn steps_taken(&self) -> u64;

    /// Hidden-vector diagnostics of the last step, for optimizers that have them.
    fn diagnostics(&self) -> Option<StepDiagnostics> {
        None
    }
}

/// `beta * prev + (1 - beta) * sample`, elementwise.
pub fn ema_update(prev: &ParamVector, sample: &ParamVector, beta: f64) -> Result<ParamVector> {
    prev.zip_map(sample, |p, s| beta * p + (1.0 - beta) * s)
}

/// `x / (1 - beta^t)`. Requires `t >= 1`.
pub fn bias_correct(x: &ParamVector, beta: f64, t: u64) -> Result<ParamVector> {
    assert!(t >= 1, "bias correction needs t >= 1");
    let c = 1.0 - DecayPower::exact(beta, t);
    x.map(|v| v / c)
}

/// Interval at which [`DecayPower`] recomputes `beta^t` from scratch.
pub const POWER_REFRESH_INTERVAL: u64 = 1000;

/// Running `beta^t`, advanced by multiplication and refreshed from `powi`
/// every [`POWER_REFRESH_INTERVAL`] steps so rounding drift stays bounded.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DecayPower {
    base: f64,
    exp: u64,
    value: f64,
}

impl DecayPower {
    pub fn new(base: f64) -> Self {
        DecayPower { base, exp: 0, value: 1.0 }
    }

    pub(crate) fn from_parts(base: f64, exp: u64, value: f64) -> Self {
        DecayPower { base, exp, value }
    }

    pub fn exact(base: f64, exp: u64) -> f64 {
        match i32::try_from(exp) {
            Ok(e) => base.powi(e),
            Err(_) => base.powf(exp as f64),
        }
    }

    pub fn advance(&mut self) -> f64 {
        self.exp += 1;
        if self.exp.is_multiple_of(POWER_REFRESH_INTERVAL) {
            self.value = Self::exact(self.base, self.exp);
        } else {
            self.value *= self.base;
        }
        self.value
    }

    pub fn reset(&mut self) {
        self.exp = 0;
        self.value = 1.0;
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn exponent(&self) -> u64 {
        self.exp
    }

    /// `1 - beta^t` for the current exponent.
    pub fn correction(&self) -> f64 {
        1.0 - self.value
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vector::pv;

    #[test]
    fn ema_examples() {
        let r = ema_update(&ParamVector::zeros(2), &pv(&[5.0, -3.0]), 0.9).unwrap();
        assert!((r[0] - 0.5).abs() < 1e-15 && (r[1] + 0.3).abs() < 1e-15);
        let x = pv(&[1.25, -4.0]);
        assert_eq!(ema_update(&x, &x, 0.37).unwrap(), x);
        assert_eq!(ema_update(&pv(&[9.0, 9.0]), &x, 0.0).unwrap(), x);
    }

    #[test]
    fn bias_correction_examples() {
        let r = bias_correct(&pv(&[0.5, -0.3]), 0.9, 1).unwrap();
        assert!((r[0] - 5.0).abs() < 1e-12 && (r[1] + 3.0).abs() < 1e-12);
        let r = bias_correct(&pv(&[0.15, 0.23]), 0.9, 2).unwrap();
        assert!((r[0] - 0.15 / 0.19).abs() < 1e-12 && (r[1] - 0.23 / 0.19).abs() < 1e-12);
        assert!((r[0] - 0.7895).abs() < 5e-5 && (r[1] - 1.2105).abs() < 5e-5);
        let x = pv(&[3.0, -1.0]);
        assert_eq!(bias_correct(&x, 0.0, 7).unwrap(), x);
    }

    #[test]
    fn constant_sample_is_unbiased_after_correction() {
        let g = pv(&[0.3, -2.0, 7.0]);
        let mut m = ParamVector::zeros(3);
        for t in 1..=300 {
            m = ema_update(&m, &g, 0.9).unwrap();
            let mh = bias_correct(&m, 0.9, t).unwrap();
            for i in 0..3 {
                assert!((mh[i] - g[i]).abs() <= 1e-12 * g[i].abs().max(1.0));
            }
        }
    }

    #[test]
    fn running_power_tracks_exact_power() {
        let mut p = DecayPower::new(0.999);
        for t in 1..=5000u64 {
            let v = p.advance();
            let exact = 0.999f64.powi(t as i32);
            assert!((v - exact).abs() <= 1e-12 * exact, "t = {t}");
        }
        assert_eq!(p.exponent(), 5000);
        assert_eq!(p.value(), 0.999f64.powi(5000));
    }
}

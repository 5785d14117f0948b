//! SGD with heavy-ball momentum, Adam and AdaBelief.
//!
//! These share [`OptimizerConfig`] and the EMA / bias-correction helpers with
//! the hidden-vector optimizer so that races compare update rules rather than
//! implementation details.

use serde::{Deserialize, Serialize};

use crate::config::{parse_f64, ConfigValue};
use crate::error::{OptError, Result};
use crate::optim::{DecayPower, Optimizer};
use crate::projection::{project, BoxConstraint};
use crate::vector::ParamVector;

/// Hyperparameters for the baseline optimizers.
///
/// `momentum` is only read by SGDM; `beta1`, `beta2` and `epsilon` only by
/// Adam and AdaBelief.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptimizerConfig {
    pub alpha1: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub momentum: f64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig {
            alpha1: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            momentum: 0.9,
        }
    }
}

impl OptimizerConfig {
    /// Settings used for the two-dimensional toy races: lr 0.001, eps 1e-12.
    pub fn toy() -> Self {
        OptimizerConfig { epsilon: 1e-12, ..Self::default() }
    }

    pub const KEYS: [&'static str; 5] = ["alpha1", "beta1", "beta2", "epsilon", "momentum"];

    pub fn validate(&self) -> Result<()> {
        let unit = |name: &str, x: f64| {
            if (0.0..1.0).contains(&x) {
                Ok(())
            } else {
                Err(OptError::InvalidConfig(format!("{name} = {x} must lie in [0, 1)")))
            }
        };
        if !(self.alpha1 > 0.0 && self.alpha1.is_finite()) {
            return Err(OptError::InvalidConfig(format!("alpha1 = {} must be > 0", self.alpha1)));
        }
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(OptError::InvalidConfig(format!("epsilon = {} must be > 0", self.epsilon)));
        }
        unit("beta1", self.beta1)?;
        unit("beta2", self.beta2)?;
        unit("momentum", self.momentum)
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let slot = match key {
            "alpha1" | "lr" => &mut self.alpha1,
            "beta1" => &mut self.beta1,
            "beta2" => &mut self.beta2,
            "epsilon" | "eps" => &mut self.epsilon,
            "momentum" => &mut self.momentum,
            _ => return Err(OptError::UnknownKey(key.to_string())),
        };
        *slot = parse_f64(key, value)?;
        Ok(())
    }

    pub fn has_key(key: &str) -> bool {
        matches!(key, "alpha1" | "lr" | "beta1" | "beta2" | "epsilon" | "eps" | "momentum")
    }

    pub fn entries(&self) -> Vec<(&'static str, ConfigValue)> {
        vec![
            ("alpha1", ConfigValue::Float(self.alpha1)),
            ("beta1", ConfigValue::Float(self.beta1)),
            ("beta2", ConfigValue::Float(self.beta2)),
            ("epsilon", ConfigValue::Float(self.epsilon)),
            ("momentum", ConfigValue::Float(self.momentum)),
        ]
    }
}

/// Per-instance buffers shared by the baselines.
///
/// `second` holds the EMA of `g^2` for Adam and the EMA of `(g - m)^2` for
/// AdaBelief; SGDM keeps its velocity in `first` and leaves `second` unused.
#[derive(Clone, Debug, PartialEq)]
pub struct BaselineState {
    pub first: ParamVector,
    pub second: ParamVector,
    pub t: u64,
    beta1_pow: DecayPower,
    beta2_pow: DecayPower,
}

impl BaselineState {
    pub fn new(dim: usize, cfg: &OptimizerConfig) -> Self {
        BaselineState {
            first: ParamVector::zeros(dim),
            second: ParamVector::zeros(dim),
            t: 0,
            beta1_pow: DecayPower::new(cfg.beta1),
            beta2_pow: DecayPower::new(cfg.beta2),
        }
    }

    fn check(&self, params: &ParamVector, grad: &ParamVector) -> Result<()> {
        self.first.check_dim(params)?;
        params.check_dim(grad)?;
        grad.check_finite("gradient")
    }
}

/// Which second-moment estimate the adaptive baseline keeps.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum SecondMoment {
    GradSquare,
    Belief,
}

fn adaptive_step(
    state: &mut BaselineState,
    params: &ParamVector,
    grad: &ParamVector,
    cfg: &OptimizerConfig,
    kind: SecondMoment,
    feasible: Option<&BoxConstraint>,
) -> Result<ParamVector> {
    state.check(params, grad)?;
    state.t += 1;
    let c1 = 1.0 - state.beta1_pow.advance();
    let c2 = 1.0 - state.beta2_pow.advance();
    let (b1, b2, eps) = (cfg.beta1, cfg.beta2, cfg.epsilon);

    let dim = params.dim();
    let mut next = Vec::with_capacity(dim);
    let mut metric = Vec::with_capacity(dim);
    let m = state.first.as_mut_slice();
    let a = state.second.as_mut_slice();
    for i in 0..dim {
        let g = grad[i];
        m[i] = b1 * m[i] + (1.0 - b1) * g;
        a[i] = match kind {
            SecondMoment::GradSquare => b2 * a[i] + (1.0 - b2) * g * g,
            SecondMoment::Belief => {
                let d = g - m[i];
                b2 * a[i] + (1.0 - b2) * d * d + eps
            }
        };
        let m_hat = m[i] / c1;
        let denom = (a[i] / c2).sqrt() + eps;
        next.push(params[i] - cfg.alpha1 * m_hat / denom);
        metric.push(denom);
    }
    let next = ParamVector::new(next)?;
    next.check_finite("adaptive update")?;
    project(&next, feasible, &ParamVector::new(metric)?)
}

/// Adam with bias correction on both moments; `epsilon` is added outside the root.
#[derive(Clone, Debug)]
pub struct Adam {
    pub cfg: OptimizerConfig,
    pub state: BaselineState,
}

impl Adam {
    pub fn new(dim: usize, cfg: OptimizerConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(Adam { state: BaselineState::new(dim, &cfg), cfg })
    }
}

impl Optimizer for Adam {
    fn id(&self) -> &'static str {
        "adam"
    }

    fn step(
        &mut self,
        params: &ParamVector,
        grad: &ParamVector,
        feasible: Option<&BoxConstraint>,
    ) -> Result<ParamVector> {
        adaptive_step(&mut self.state, params, grad, &self.cfg, SecondMoment::GradSquare, feasible)
    }

    fn steps_taken(&self) -> u64 {
        self.state.t
    }
}

/// AdaBelief: the second moment is the EMA of `(g - m)^2` with `epsilon`
/// added inside the recursion every step.
#[derive(Clone, Debug)]
pub struct AdaBelief {
    pub cfg: OptimizerConfig,
    pub state: BaselineState,
}

impl AdaBelief {
    pub fn new(dim: usize, cfg: OptimizerConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(AdaBelief { state: BaselineState::new(dim, &cfg), cfg })
    }
}

impl Optimizer for AdaBelief {
    fn id(&self) -> &'static str {
        "adabelief"
    }

    fn step(
        &mut self,
        params: &ParamVector,
        grad: &ParamVector,
        feasible: Option<&BoxConstraint>,
    ) -> Result<ParamVector> {
        adaptive_step(&mut self.state, params, grad, &self.cfg, SecondMoment::Belief, feasible)
    }

    fn steps_taken(&self) -> u64 {
        self.state.t
    }
}

/// Heavy-ball SGD: `velocity <- momentum * velocity + g`, `theta <- theta - alpha1 * velocity`.
#[derive(Clone, Debug)]
pub struct Sgdm {
    pub cfg: OptimizerConfig,
    pub state: BaselineState,
}

impl Sgdm {
    pub fn new(dim: usize, cfg: OptimizerConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(Sgdm { state: BaselineState::new(dim, &cfg), cfg })
    }
}

impl Optimizer for Sgdm {
    fn id(&self) -> &'static str {
        "sgdm"
    }

    fn step(
        &mut self,
        params: &ParamVector,
        grad: &ParamVector,
        feasible: Option<&BoxConstraint>,
    ) -> Result<ParamVector> {
        self.state.check(params, grad)?;
        self.state.t += 1;
        let mu = self.cfg.momentum;
        let vel = self.state.first.as_mut_slice();
        let mut next = Vec::with_capacity(vel.len());
        for (i, v) in vel.iter_mut().enumerate() {
            *v = mu * *v + grad[i];
            next.push(params[i] - self.cfg.alpha1 * *v);
        }
        let next = ParamVector::new(next)?;
        next.check_finite("momentum update")?;
        project(&next, feasible, &ParamVector::filled(params.dim(), 1.0))
    }

    fn steps_taken(&self) -> u64 {
        self.state.t
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vector::pv;

    fn cfg(alpha1: f64) -> OptimizerConfig {
        OptimizerConfig { alpha1, ..OptimizerConfig::default() }
    }

    #[test]
    fn adam_first_step() {
        let mut adam = Adam::new(1, cfg(0.1)).unwrap();
        let th = adam.step(&pv(&[0.0]), &pv(&[1.0]), None).unwrap();
        let expect = -0.1 / (1.0 + 1e-8);
        assert!((th[0] - expect).abs() < 1e-15);
        assert_eq!(adam.steps_taken(), 1);
    }

    #[test]
    fn adam_constant_gradient_moves_alpha_per_step() {
        let mut adam = Adam::new(1, cfg(0.1)).unwrap();
        let mut th = pv(&[0.0]);
        for k in 1..=2 {
            th = adam.step(&th, &pv(&[1.0]), None).unwrap();
            assert!((th[0] + 0.1 * k as f64).abs() < 1e-7);
        }
    }

    #[test]
    fn zero_gradients_leave_theta_fixed() {
        let start = pv(&[0.7, -1.3]);
        let c = OptimizerConfig::default();
        let mut opts: Vec<Box<dyn Optimizer>> = vec![
            Box::new(Adam::new(2, c).unwrap()),
            Box::new(AdaBelief::new(2, c).unwrap()),
            Box::new(Sgdm::new(2, c).unwrap()),
        ];
        for opt in &mut opts {
            let mut th = start.clone();
            for _ in 0..50 {
                th = opt.step(&th, &ParamVector::zeros(2), None).unwrap();
            }
            assert_eq!(th, start, "{}", opt.id());
        }
    }

    #[test]
    fn adabelief_first_step_second_moment() {
        let mut ab = AdaBelief::new(1, cfg(0.1)).unwrap();
        ab.step(&pv(&[0.0]), &pv(&[1.0]), None).unwrap();
        assert!((ab.state.first[0] - 0.1).abs() < 1e-15);
        assert!((ab.state.second[0] - (0.00081 + 1e-8)).abs() < 1e-15);
    }

    #[test]
    fn adabelief_corrected_belief_shrinks_under_constant_gradient() {
        // The raw EMA still grows over the first steps; the bias-corrected
        // estimate is the quantity that contracts.
        let c = OptimizerConfig { epsilon: 1e-16, ..OptimizerConfig::default() };
        let mut ab = AdaBelief::new(1, c).unwrap();
        let mut th = pv(&[0.0]);
        let mut prev = f64::INFINITY;
        for t in 1..=150u64 {
            th = ab.step(&th, &pv(&[1.0]), None).unwrap();
            let s_hat = ab.state.second[0] / (1.0 - 0.999f64.powi(t as i32));
            assert!(s_hat < prev, "t = {t}");
            prev = s_hat;
        }
        // Steps outgrow Adam's alpha-per-step once the belief has collapsed.
        let before = th[0];
        th = ab.step(&th, &pv(&[1.0]), None).unwrap();
        assert!(before - th[0] > 2.0 * c.alpha1);
    }

    #[test]
    fn sgdm_examples() {
        let plain = OptimizerConfig { alpha1: 0.1, momentum: 0.0, ..OptimizerConfig::default() };
        let mut sgd = Sgdm::new(1, plain).unwrap();
        let th = sgd.step(&pv(&[0.0]), &pv(&[2.0]), None).unwrap();
        assert!((th[0] + 0.2).abs() < 1e-15);

        let mut sgdm = Sgdm::new(1, cfg(0.1)).unwrap();
        let th = sgdm.step(&pv(&[0.0]), &pv(&[1.0]), None).unwrap();
        let th = sgdm.step(&th, &pv(&[1.0]), None).unwrap();
        assert!((sgdm.state.first[0] - 1.9).abs() < 1e-15);
        assert!((th[0] + 0.1 * 2.9).abs() < 1e-15);
    }

    #[test]
    fn adam_second_moment_bounded_by_max_square() {
        let grads = [3.0, -0.5, 1.5, -4.0, 0.2, 2.5];
        let mut adam = Adam::new(1, OptimizerConfig::default()).unwrap();
        let mut th = pv(&[0.0]);
        let mut max_sq: f64 = 0.0;
        for (t, g) in grads.iter().cycle().take(60).enumerate() {
            th = adam.step(&th, &pv(&[*g]), None).unwrap();
            max_sq = max_sq.max(g * g);
            let a_hat = adam.state.second[0] / (1.0 - 0.999f64.powi(t as i32 + 1));
            assert!(a_hat >= 0.0 && a_hat <= max_sq * (1.0 + 1e-12));
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(Adam::new(2, cfg(0.0)).is_err());
        assert!(Adam::new(2, OptimizerConfig { beta1: 1.0, ..Default::default() }).is_err());
        let mut adam = Adam::new(2, cfg(0.1)).unwrap();
        assert!(matches!(
            adam.step(&pv(&[0.0, 0.0]), &pv(&[f64::NAN, 0.0]), None),
            Err(OptError::NonFinite { index: 0, .. })
        ));
        assert!(adam.step(&pv(&[0.0]), &pv(&[1.0]), None).is_err());
    }

    #[test]
    fn box_projection_applies() {
        let b = BoxConstraint::uniform(1, -0.05, 0.05).unwrap();
        let mut adam = Adam::new(1, cfg(0.1)).unwrap();
        let th = adam.step(&pv(&[0.0]), &pv(&[1.0]), Some(&b)).unwrap();
        assert_eq!(th[0], -0.05);
    }
}

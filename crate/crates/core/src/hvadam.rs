//! The hidden-vector adaptive optimizer.
//!
//! Each step runs three coupled pieces on top of an Adam-style first moment:
//!
//! * **Hidden vector.** `v` tracks the stable component of successive
//!   bias-corrected moments `m_hat`. Given the previous `v` and the new
//!   `m_hat`, the update moves `v` to the foot of the perpendicular dropped
//!   from the origin onto the line through `v` and `m_hat`:
//!
//!   ```text
//!   k     = <v - m_hat, v> / ||v - m_hat||^2      (0 when v == m_hat)
//!   v_new = k * m_hat + (1 - k) * v
//!   ```
//!
//!   `k` is deliberately unclamped; the combination is affine. After every
//!   update `||v_new||^2 == <v_new, m_hat>`, so `||v||` never grows within a
//!   segment and never exceeds the smallest `||m_hat||` seen in it.
//!
//! * **Restart controller.** `delta` is an EMA (rate `beta2`) of
//!   `cos(v, m_hat)` since the last restart and `delta_hat` its bias-corrected
//!   value. The hidden-vector step size `b = lr(delta, delta_hat)` is zero when
//!   `delta_hat` drops below the restart threshold. A zero `b` schedules a
//!   restart, and on the next step `v` is re-seeded with `m_hat`.
//!
//! * **Preconditioner.** The denominator tracks how far the gradient strays
//!   from the hidden vector, relative to how far it strays from its own mean:
//!
//!   ```text
//!   p   = (g - v_prev)^2
//!   eta = p / ((g - m)^2 + gamma * p + eps)
//!   s   = beta2 * s + (1 - beta2) * eta * p + eps
//!   ```
//!
//! The parameter update is
//! `theta <- proj(theta - alpha1 * m_hat / (sqrt(s_hat) + eps) - alpha2 * b * v)`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::config::{parse_f64, ConfigValue};
use crate::error::{OptError, Result};
use crate::optim::{DecayPower, Optimizer};
use crate::projection::{project, BoxConstraint};
use crate::vector::{cosine, dot_slices, ParamVector};

/// Absolute floor on `||v - m_hat||^2` below which the two are treated as equal.
pub const HIDDEN_VECTOR_EQ_FLOOR: f64 = 1e-30;

/// Relative floor: `v` and `m_hat` are also equal when
/// `||v - m_hat||^2 < HIDDEN_VECTOR_EQ_REL_FLOOR * max(||v||^2, ||m_hat||^2)`.
///
/// A constant gradient leaves `m_hat` equal to `v` up to a few ulps; without
/// this floor the rounding residue is divided by its own square and `k`
/// reaches 1e15.
pub const HIDDEN_VECTOR_EQ_REL_FLOOR: f64 = 1e-20;

/// Snapshot format version written by [`HVAdam::snapshot`].
pub const SNAPSHOT_VERSION: i64 = 1;

/// Mapping from the cosine EMA to the hidden-vector step size `b`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LrSchedule {
    /// `10^(6 * delta - 3)`: spans 1e-3 ..= 1e3.
    Exponential,
    /// `(delta / 0.9) * 10`.
    Linear,
}

impl LrSchedule {
    pub fn as_str(self) -> &'static str {
        match self {
            LrSchedule::Exponential => "exponential",
            LrSchedule::Linear => "linear",
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        match text.trim() {
            "exponential" | "exp" => Ok(LrSchedule::Exponential),
            "linear" | "lin" => Ok(LrSchedule::Linear),
            other => Err(OptError::InvalidValue {
                key: "schedule".into(),
                value: other.into(),
            }),
        }
    }
}

/// Hyperparameters of [`HVAdam`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HVAdamConfig {
    pub alpha1: f64,
    /// Step size along the hidden vector; `None` means "same as `alpha1`".
    pub alpha2: Option<f64>,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    /// Limits `eta` to `[0, 1/gamma)`. Zero disables the limit.
    pub gamma: f64,
    pub restart_threshold: f64,
    pub schedule: LrSchedule,
}

impl Default for HVAdamConfig {
    fn default() -> Self {
        HVAdamConfig {
            alpha1: 1e-3,
            alpha2: None,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            gamma: 0.0,
            restart_threshold: 0.1,
            schedule: LrSchedule::Exponential,
        }
    }
}

impl HVAdamConfig {
    /// Settings for the two-dimensional toy races: lr 0.001, eps 1e-12,
    /// gamma 0.5 and the linear step-size schedule.
    pub fn toy() -> Self {
        HVAdamConfig {
            epsilon: 1e-12,
            gamma: 0.5,
            schedule: LrSchedule::Linear,
            ..Self::default()
        }
    }

    pub fn alpha2(&self) -> f64 {
        self.alpha2.unwrap_or(self.alpha1)
    }

    pub const KEYS: [&'static str; 8] = [
        "alpha1",
        "alpha2",
        "beta1",
        "beta2",
        "epsilon",
        "gamma",
        "restart_threshold",
        "schedule",
    ];

    pub fn has_key(key: &str) -> bool {
        Self::KEYS.contains(&key) || matches!(key, "lr" | "eps")
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(OptError::InvalidConfig(msg));
        if !(self.alpha1 > 0.0 && self.alpha1.is_finite()) {
            return bad(format!("alpha1 = {} must be > 0", self.alpha1));
        }
        let a2 = self.alpha2();
        if !(a2 >= 0.0 && a2.is_finite()) {
            return bad(format!("alpha2 = {a2} must be >= 0"));
        }
        for (name, x) in [("beta1", self.beta1), ("beta2", self.beta2)] {
            if !(0.0..1.0).contains(&x) {
                return bad(format!("{name} = {x} must lie in [0, 1)"));
            }
        }
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return bad(format!("epsilon = {} must be > 0", self.epsilon));
        }
        if !(self.gamma >= 0.0 && self.gamma.is_finite()) {
            return bad(format!("gamma = {} must be >= 0", self.gamma));
        }
        if !(self.restart_threshold > 0.0 && self.restart_threshold < 1.0) {
            return bad(format!(
                "restart_threshold = {} must lie in (0, 1)",
                self.restart_threshold
            ));
        }
        Ok(())
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "alpha1" | "lr" => self.alpha1 = parse_f64(key, value)?,
            "alpha2" => self.alpha2 = Some(parse_f64(key, value)?),
            "beta1" => self.beta1 = parse_f64(key, value)?,
            "beta2" => self.beta2 = parse_f64(key, value)?,
            "epsilon" | "eps" => self.epsilon = parse_f64(key, value)?,
            "gamma" => self.gamma = parse_f64(key, value)?,
            "restart_threshold" => self.restart_threshold = parse_f64(key, value)?,
            "schedule" => self.schedule = LrSchedule::parse(value)?,
            _ => return Err(OptError::UnknownKey(key.to_string())),
        }
        Ok(())
    }

    pub fn entries(&self) -> Vec<(&'static str, ConfigValue)> {
        vec![
            ("alpha1", ConfigValue::Float(self.alpha1)),
            ("alpha2", ConfigValue::Float(self.alpha2())),
            ("beta1", ConfigValue::Float(self.beta1)),
            ("beta2", ConfigValue::Float(self.beta2)),
            ("epsilon", ConfigValue::Float(self.epsilon)),
            ("gamma", ConfigValue::Float(self.gamma)),
            ("restart_threshold", ConfigValue::Float(self.restart_threshold)),
            ("schedule", ConfigValue::Schedule(self.schedule)),
        ]
    }
}

/// What the controller saw on the most recent step.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct StepDiagnostics {
    /// Projection coefficient of the hidden-vector update.
    pub k: f64,
    /// `cos(v, m_hat)` after the update.
    pub cos_vm: f64,
    pub delta_hat: f64,
    /// Hidden-vector step size.
    pub b: f64,
    /// This step scheduled a restart.
    pub restarted: bool,
}

/// Second-moment rule. `GradientSquare` turns the optimizer into Adam's
/// denominator and exists to isolate the hidden-vector terms in tests.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Preconditioner {
    HiddenVector,
    GradientSquare,
}

/// Mutable buffers of one [`HVAdam`] instance.
#[derive(Clone, Debug, PartialEq)]
pub struct HVAdamState {
    pub m: ParamVector,
    pub s: ParamVector,
    pub v: ParamVector,
    pub delta: f64,
    pub t: u64,
    /// Steps since the last restart; `-1` means "re-seed `v` on the next step".
    pub t2: i64,
    pub last_diag: StepDiagnostics,
    beta1_pow: DecayPower,
    beta2_pow: DecayPower,
    delta_pow: DecayPower,
}

impl HVAdamState {
    pub fn new(dim: usize, cfg: &HVAdamConfig) -> Self {
        HVAdamState {
            m: ParamVector::zeros(dim),
            s: ParamVector::zeros(dim),
            v: ParamVector::zeros(dim),
            delta: 0.0,
            t: 0,
            t2: -1,
            last_diag: StepDiagnostics::default(),
            beta1_pow: DecayPower::new(cfg.beta1),
            beta2_pow: DecayPower::new(cfg.beta2),
            delta_pow: DecayPower::new(cfg.beta2),
        }
    }

    pub fn dim(&self) -> usize {
        self.m.dim()
    }
}

/// One hidden-vector update. Returns `(k, v_new)`.
pub fn hidden_vector_update(v_prev: &ParamVector, m_hat: &ParamVector) -> Result<(f64, ParamVector)> {
    v_prev.check_dim(m_hat)?;
    v_prev.check_finite("hidden vector")?;
    m_hat.check_finite("bias-corrected moment")?;
    let (v, m) = (v_prev.as_slice(), m_hat.as_slice());
    let diff: Vec<f64> = v.iter().zip(m).map(|(a, b)| a - b).collect();
    let dist_sq = dot_slices(&diff, &diff);
    let scale = dot_slices(v, v).max(dot_slices(m, m));
    if dist_sq < HIDDEN_VECTOR_EQ_FLOOR.max(HIDDEN_VECTOR_EQ_REL_FLOOR * scale) {
        return Ok((0.0, v_prev.clone()));
    }
    let k = dot_slices(&diff, v) / dist_sq;
    let v_new = ParamVector::new(v.iter().zip(m).map(|(a, b)| k * b + (1.0 - k) * a).collect())?;
    v_new.check_finite("hidden vector")?;
    Ok((k, v_new))
}

/// `eta = p / ((g - m)^2 + gamma * p + eps)` with `p = (g - v_prev)^2`, elementwise.
pub fn noise_ratio(
    grad: &ParamVector,
    m: &ParamVector,
    v_prev: &ParamVector,
    gamma: f64,
    epsilon: f64,
) -> Result<ParamVector> {
    grad.check_dim(m)?;
    grad.check_dim(v_prev)?;
    let out: Vec<f64> = (0..grad.dim())
        .map(|i| {
            let p = (grad[i] - v_prev[i]).powi(2);
            let gm = (grad[i] - m[i]).powi(2);
            p / (gm + gamma * p + epsilon)
        })
        .collect();
    let out = ParamVector::new(out)?;
    out.check_finite("noise ratio")?;
    Ok(out)
}

/// New second-moment buffer `s`. `m` must already hold this step's first
/// moment and `v_prev` the hidden vector from before this step.
pub fn preconditioner_update(
    s_prev: &ParamVector,
    m: &ParamVector,
    v_prev: &ParamVector,
    grad: &ParamVector,
    cfg: &HVAdamConfig,
) -> Result<ParamVector> {
    s_prev.check_dim(grad)?;
    let eta = noise_ratio(grad, m, v_prev, cfg.gamma, cfg.epsilon)?;
    let b2 = cfg.beta2;
    let out: Vec<f64> = (0..grad.dim())
        .map(|i| {
            let p = (grad[i] - v_prev[i]).powi(2);
            b2 * s_prev[i] + (1.0 - b2) * eta[i] * p + cfg.epsilon
        })
        .collect();
    let out = ParamVector::new(out)?;
    out.check_finite("preconditioner s")?;
    Ok(out)
}

/// Hidden-vector step size. Zero whenever `delta_hat < threshold`.
pub fn step_size_b(delta: f64, delta_hat: f64, schedule: LrSchedule, threshold: f64) -> f64 {
    if !(delta_hat >= threshold) {
        return 0.0;
    }
    match schedule {
        LrSchedule::Exponential => 10f64.powf(6.0 * delta - 3.0),
        LrSchedule::Linear => (delta / 0.9) * 10.0,
    }
    .max(0.0)
}

/// Advances the hidden vector and restart bookkeeping for one step.
///
/// `state.t2` must already have been incremented for this step.
pub fn restart_controller_step(
    state: &mut HVAdamState,
    m_hat: &ParamVector,
    cfg: &HVAdamConfig,
) -> Result<StepDiagnostics> {
    restart_controller_step_with(state, m_hat, cfg, hidden_vector_update)
}

pub(crate) fn restart_controller_step_with(
    state: &mut HVAdamState,
    m_hat: &ParamVector,
    cfg: &HVAdamConfig,
    update: impl Fn(&ParamVector, &ParamVector) -> Result<(f64, ParamVector)>,
) -> Result<StepDiagnostics> {
    if state.t2 <= 0 {
        state.t2 = 0;
        state.v = m_hat.clone();
        state.delta = 0.0;
        state.delta_pow.reset();
        return Ok(StepDiagnostics {
            k: 0.0,
            cos_vm: cosine(&state.v, m_hat)?,
            delta_hat: 0.0,
            b: 0.0,
            restarted: false,
        });
    }
    let (k, v_new) = update(&state.v, m_hat)?;
    state.v = v_new;
    let cos_vm = cosine(&state.v, m_hat)?;
    let b2 = cfg.beta2;
    state.delta = b2 * state.delta + (1.0 - b2) * cos_vm;
    let delta_hat = state.delta / state.delta_pow_correction();
    let b = step_size_b(state.delta, delta_hat, cfg.schedule, cfg.restart_threshold);
    let restarted = b == 0.0;
    if restarted {
        state.t2 = -1;
    }
    Ok(StepDiagnostics { k, cos_vm, delta_hat, b, restarted })
}

impl HVAdamState {
    fn delta_pow_correction(&mut self) -> f64 {
        1.0 - self.delta_pow.advance()
    }
}

/// The hidden-vector optimizer. See the module docs for the update rule.
#[derive(Clone, Debug)]
pub struct HVAdam {
    pub cfg: HVAdamConfig,
    pub state: HVAdamState,
    preconditioner: Preconditioner,
}

impl HVAdam {
    pub fn new(dim: usize, cfg: HVAdamConfig) -> Result<Self> {
        cfg.validate()?;
        if dim == 0 {
            return Err(OptError::EmptyVector);
        }
        Ok(HVAdam {
            state: HVAdamState::new(dim, &cfg),
            cfg,
            preconditioner: Preconditioner::HiddenVector,
        })
    }

    /// Replaces the hidden-vector preconditioner with the EMA of `g^2`
    /// (no additive epsilon). With `alpha2 = 0` the optimizer then follows Adam.
    #[doc(hidden)]
    pub fn with_gradient_square_preconditioner(mut self) -> Self {
        self.preconditioner = Preconditioner::GradientSquare;
        self
    }

    pub fn last_diagnostics(&self) -> StepDiagnostics {
        self.state.last_diag
    }

    fn step_impl(
        &mut self,
        params: &ParamVector,
        grad: &ParamVector,
        feasible: Option<&BoxConstraint>,
    ) -> Result<ParamVector> {
        let cfg = self.cfg;
        let st = &mut self.state;
        st.m.check_dim(params)?;
        params.check_dim(grad)?;
        grad.check_finite("gradient")?;

        st.t += 1;
        st.t2 += 1;
        let c1 = 1.0 - st.beta1_pow.advance();
        let c2 = 1.0 - st.beta2_pow.advance();
        let dim = params.dim();

        let (b1, b2) = (cfg.beta1, cfg.beta2);
        for (m, g) in st.m.as_mut_slice().iter_mut().zip(grad.iter()) {
            *m = b1 * *m + (1.0 - b1) * g;
        }
        st.m.check_finite("first moment m")?;

        st.s = match self.preconditioner {
            Preconditioner::HiddenVector => preconditioner_update(&st.s, &st.m, &st.v, grad, &cfg)?,
            Preconditioner::GradientSquare => {
                st.s.zip_map(grad, |s, g| b2 * s + (1.0 - b2) * g * g)?
            }
        };

        let m_hat = st.m.map(|m| m / c1)?;
        let diag = restart_controller_step(st, &m_hat, &cfg)?;
        st.last_diag = diag;

        let alpha2 = cfg.alpha2();
        let mut next = Vec::with_capacity(dim);
        let mut metric = Vec::with_capacity(dim);
        for i in 0..dim {
            let denom = (st.s[i] / c2).sqrt() + cfg.epsilon;
            next.push(params[i] - cfg.alpha1 * m_hat[i] / denom - alpha2 * diag.b * st.v[i]);
            metric.push(denom);
        }
        let next = ParamVector::new(next)?;
        next.check_finite("parameter update")?;
        project(&next, feasible, &ParamVector::new(metric)?)
    }

    /// Flat key/value record of config, buffers and counters.
    pub fn snapshot(&self) -> Snapshot {
        let mut map = BTreeMap::new();
        let f = |x: f64| Value::from(x);
        let vecv = |v: &ParamVector| Value::from(v.as_slice().to_vec());
        map.insert("format".into(), Value::from("hvadam-state"));
        map.insert("version".into(), Value::from(SNAPSHOT_VERSION));
        let c = &self.cfg;
        map.insert("config.alpha1".into(), f(c.alpha1));
        map.insert(
            "config.alpha2".into(),
            c.alpha2.map(Value::from).unwrap_or(Value::Null),
        );
        map.insert("config.beta1".into(), f(c.beta1));
        map.insert("config.beta2".into(), f(c.beta2));
        map.insert("config.epsilon".into(), f(c.epsilon));
        map.insert("config.gamma".into(), f(c.gamma));
        map.insert("config.restart_threshold".into(), f(c.restart_threshold));
        map.insert("config.schedule".into(), Value::from(c.schedule.as_str()));
        let s = &self.state;
        map.insert("state.m".into(), vecv(&s.m));
        map.insert("state.s".into(), vecv(&s.s));
        map.insert("state.v".into(), vecv(&s.v));
        map.insert("state.delta".into(), f(s.delta));
        map.insert("state.t".into(), Value::from(s.t));
        map.insert("state.t2".into(), Value::from(s.t2));
        map.insert("state.beta1_pow".into(), f(s.beta1_pow.value()));
        map.insert("state.beta2_pow".into(), f(s.beta2_pow.value()));
        map.insert("state.delta_pow".into(), f(s.delta_pow.value()));
        map.insert("state.delta_pow_exp".into(), Value::from(s.delta_pow.exponent()));
        map.insert(
            "state.preconditioner".into(),
            Value::from(match self.preconditioner {
                Preconditioner::HiddenVector => "hidden-vector",
                Preconditioner::GradientSquare => "gradient-square",
            }),
        );
        let d = &s.last_diag;
        map.insert("diag.k".into(), f(d.k));
        map.insert("diag.cos_vm".into(), f(d.cos_vm));
        map.insert("diag.delta_hat".into(), f(d.delta_hat));
        map.insert("diag.b".into(), f(d.b));
        map.insert("diag.restarted".into(), Value::from(d.restarted));
        Snapshot(map)
    }

    /// Rebuilds an optimizer from [`HVAdam::snapshot`] output.
    pub fn restore(snap: &Snapshot) -> Result<Self> {
        if snap.text("format")? != "hvadam-state" {
            return Err(OptError::Snapshot("not an hvadam-state record".into()));
        }
        let version = snap.int("version")?;
        if version != SNAPSHOT_VERSION {
            return Err(OptError::Snapshot(format!("unsupported version {version}")));
        }
        let cfg = HVAdamConfig {
            alpha1: snap.float("config.alpha1")?,
            alpha2: match snap.get("config.alpha2")? {
                Value::Null => None,
                v => Some(v.as_f64().ok_or_else(|| snap_err("config.alpha2"))?),
            },
            beta1: snap.float("config.beta1")?,
            beta2: snap.float("config.beta2")?,
            epsilon: snap.float("config.epsilon")?,
            gamma: snap.float("config.gamma")?,
            restart_threshold: snap.float("config.restart_threshold")?,
            schedule: LrSchedule::parse(snap.text("config.schedule")?)?,
        };
        cfg.validate()?;
        let t = u64::try_from(snap.int("state.t")?).map_err(|_| snap_err("state.t"))?;
        let t2 = snap.int("state.t2")?;
        let delta_exp =
            u64::try_from(snap.int("state.delta_pow_exp")?).map_err(|_| snap_err("state.delta_pow_exp"))?;
        let m = snap.vector("state.m")?;
        let s = snap.vector("state.s")?;
        let v = snap.vector("state.v")?;
        m.check_dim(&s)?;
        m.check_dim(&v)?;
        let state = HVAdamState {
            m,
            s,
            v,
            delta: snap.float("state.delta")?,
            t,
            t2,
            last_diag: StepDiagnostics {
                k: snap.float("diag.k")?,
                cos_vm: snap.float("diag.cos_vm")?,
                delta_hat: snap.float("diag.delta_hat")?,
                b: snap.float("diag.b")?,
                restarted: snap.get("diag.restarted")?.as_bool().ok_or_else(|| snap_err("diag.restarted"))?,
            },
            beta1_pow: DecayPower::from_parts(cfg.beta1, t, snap.float("state.beta1_pow")?),
            beta2_pow: DecayPower::from_parts(cfg.beta2, t, snap.float("state.beta2_pow")?),
            delta_pow: DecayPower::from_parts(cfg.beta2, delta_exp, snap.float("state.delta_pow")?),
        };
        let preconditioner = match snap.text("state.preconditioner")? {
            "hidden-vector" => Preconditioner::HiddenVector,
            "gradient-square" => Preconditioner::GradientSquare,
            other => return Err(OptError::Snapshot(format!("unknown preconditioner {other}"))),
        };
        Ok(HVAdam { cfg, state, preconditioner })
    }
}

impl Optimizer for HVAdam {
    fn id(&self) -> &'static str {
        "hvadam"
    }

    fn step(
        &mut self,
        params: &ParamVector,
        grad: &ParamVector,
        feasible: Option<&BoxConstraint>,
    ) -> Result<ParamVector> {
        self.step_impl(params, grad, feasible)
    }

    fn steps_taken(&self) -> u64 {
        self.state.t
    }

    fn diagnostics(&self) -> Option<StepDiagnostics> {
        Some(self.state.last_diag)
    }
}

fn snap_err(key: &str) -> OptError {
    OptError::Snapshot(format!("missing or malformed `{key}`"))
}

/// Versioned flat key/value record of an optimizer, serialized as JSON.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Snapshot(BTreeMap<String, Value>);

impl Snapshot {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.0).expect("snapshot values are plain JSON")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let map: BTreeMap<String, Value> =
            serde_json::from_str(text).map_err(|e| OptError::Snapshot(e.to_string()))?;
        if let Some((k, _)) = map.iter().find(|(_, v)| v.is_object()) {
            return Err(OptError::Snapshot(format!("`{k}` is nested; record must be flat")));
        }
        Ok(Snapshot(map))
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.0.keys().map(String::as_str)
    }

    fn get(&self, key: &str) -> Result<&Value> {
        self.0.get(key).ok_or_else(|| snap_err(key))
    }

    fn float(&self, key: &str) -> Result<f64> {
        self.get(key)?.as_f64().ok_or_else(|| snap_err(key))
    }

    fn int(&self, key: &str) -> Result<i64> {
        self.get(key)?.as_i64().ok_or_else(|| snap_err(key))
    }

    fn text(&self, key: &str) -> Result<&str> {
        self.get(key)?.as_str().ok_or_else(|| snap_err(key))
    }

    fn vector(&self, key: &str) -> Result<ParamVector> {
        let arr = self.get(key)?.as_array().ok_or_else(|| snap_err(key))?;
        let data = arr
            .iter()
            .map(|x| x.as_f64().ok_or_else(|| snap_err(key)))
            .collect::<Result<Vec<_>>>()?;
        ParamVector::new(data)
    }
}

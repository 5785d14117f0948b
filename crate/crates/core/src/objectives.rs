//! Benchmark objectives with exact (sub)gradients.
//!
//! The two-dimensional toy functions are
//!
//! | id        | definition                                  | minimizer  |
//! |-----------|---------------------------------------------|------------|
//! | `f1`      | `4*sqrt(2)*|x| + (sqrt(2)/10)*|y|`          | `(0, 0)`   |
//! | `f2`      | `4*|x - y| + |(x + y)/10|`                  | `(0, 0)`   |
//! | `f2-fig3` | `4*|x - y| + |x + y|`                       | `(0, 0)`   |
//! | `f3`      | `ln(1 + Beale(x, y)) / 10`                  | `(3, 0.5)` |
//! | `f4`      | `Rosenbrock(x, y) = (1-x)^2 + 100(y-x^2)^2` | `(1, 1)`   |
//!
//! with `Beale(x, y) = (1.5 - x + xy)^2 + (2.25 - x + xy^2)^2 + (2.625 - x + xy^3)^2`.
//!
//! Subgradients of the piecewise-linear functions use `sign(0) = 0`, which
//! picks the zero subgradient on a valley floor.
//!
//! `logistic-N-D-SEED` is an L2-regularized logistic regression on a seeded
//! synthetic dataset; append `-bB` for minibatches of `B` rows per step.

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{OptError, Result};
use crate::vector::{dot_slices, norm2, pv, ParamVector};

/// A differentiable (or subdifferentiable) function with a known minimizer.
pub trait Objective: Send + Sync {
    fn id(&self) -> String;

    fn dim(&self) -> usize;

    fn eval(&self, theta: &ParamVector) -> f64;

    /// Gradient, or the `sign(0) = 0` subgradient at kinks.
    fn grad(&self, theta: &ParamVector) -> ParamVector;

    fn optimum(&self) -> ParamVector;

    fn optimum_value(&self) -> f64;

    /// Frozen starting point used by the races.
    fn default_start(&self) -> ParamVector;

    /// Distance from `theta` to the nearest non-differentiable locus, or
    /// `None` for smooth objectives. Finite-difference checks are only
    /// meaningful farther than the probe step from a kink.
    fn kink_distance(&self, _theta: &ParamVector) -> Option<f64> {
        None
    }

    /// Gradient used by the run loop. Deterministic objectives ignore `rng`.
    fn sample_grad(&self, theta: &ParamVector, _rng: &mut ChaCha8Rng) -> ParamVector {
        self.grad(theta)
    }
}

fn sign(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

fn xy(theta: &ParamVector) -> (f64, f64) {
    assert_eq!(theta.dim(), 2, "toy objectives are two-dimensional");
    (theta[0], theta[1])
}

const BEALE_C: [f64; 3] = [1.5, 2.25, 2.625];

/// Standard Beale function.
pub fn beale(x: f64, y: f64) -> f64 {
    let mut yp = 1.0;
    BEALE_C
        .iter()
        .map(|c| {
            yp *= y;
            (c - x + x * yp).powi(2)
        })
        .sum()
}

/// Gradient of [`beale`].
pub fn beale_grad(x: f64, y: f64) -> (f64, f64) {
    let (mut gx, mut gy) = (0.0, 0.0);
    let mut y_prev = 1.0; // y^(i-1)
    for (i, c) in BEALE_C.iter().enumerate() {
        let yi = y_prev * y;
        let r = c - x + x * yi;
        gx += 2.0 * r * (yi - 1.0);
        gy += 2.0 * r * x * (i as f64 + 1.0) * y_prev;
        y_prev = yi;
    }
    (gx, gy)
}

/// Standard Rosenbrock function `(1 - x)^2 + 100 (y - x^2)^2`.
pub fn rosenbrock(x: f64, y: f64) -> f64 {
    (1.0 - x).powi(2) + 100.0 * (y - x * x).powi(2)
}

pub fn rosenbrock_grad(x: f64, y: f64) -> (f64, f64) {
    (
        -2.0 * (1.0 - x) - 400.0 * x * (y - x * x),
        200.0 * (y - x * x),
    )
}

/// The two-dimensional toy functions.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ToyFunction {
    F1,
    F2,
    /// `f2` without the `/10` on the `x + y` term.
    F2Fig3,
    F3,
    F4,
}

impl ToyFunction {
    pub const ALL: [ToyFunction; 5] = [
        ToyFunction::F1,
        ToyFunction::F2,
        ToyFunction::F2Fig3,
        ToyFunction::F3,
        ToyFunction::F4,
    ];

    /// The four functions raced by default.
    pub const RACE: [ToyFunction; 4] = [ToyFunction::F1, ToyFunction::F2, ToyFunction::F3, ToyFunction::F4];

    pub fn as_str(self) -> &'static str {
        match self {
            ToyFunction::F1 => "f1",
            ToyFunction::F2 => "f2",
            ToyFunction::F2Fig3 => "f2-fig3",
            ToyFunction::F3 => "f3",
            ToyFunction::F4 => "f4",
        }
    }

    pub fn parse(id: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|f| f.as_str() == id)
    }

    fn valley_weight(self) -> f64 {
        match self {
            ToyFunction::F2Fig3 => 1.0,
            _ => 0.1,
        }
    }
}

impl Objective for ToyFunction {
    fn id(&self) -> String {
        self.as_str().to_string()
    }

    fn dim(&self) -> usize {
        2
    }

    fn eval(&self, theta: &ParamVector) -> f64 {
        let (x, y) = xy(theta);
        match self {
            ToyFunction::F1 => 4.0 * 2f64.sqrt() * x.abs() + (2f64.sqrt() / 10.0) * y.abs(),
            ToyFunction::F2 | ToyFunction::F2Fig3 => {
                4.0 * (x - y).abs() + self.valley_weight() * (x + y).abs()
            }
            ToyFunction::F3 => (1.0 + beale(x, y)).ln() / 10.0,
            ToyFunction::F4 => rosenbrock(x, y),
        }
    }

    fn grad(&self, theta: &ParamVector) -> ParamVector {
        let (x, y) = xy(theta);
        match self {
            ToyFunction::F1 => pv(&[4.0 * 2f64.sqrt() * sign(x), (2f64.sqrt() / 10.0) * sign(y)]),
            ToyFunction::F2 | ToyFunction::F2Fig3 => {
                let w = self.valley_weight();
                let (d, s) = (sign(x - y), sign(x + y));
                pv(&[4.0 * d + w * s, -4.0 * d + w * s])
            }
            ToyFunction::F3 => {
                let b = beale(x, y);
                let (gx, gy) = beale_grad(x, y);
                let scale = 10.0 * (1.0 + b);
                pv(&[gx / scale, gy / scale])
            }
            ToyFunction::F4 => {
                let (gx, gy) = rosenbrock_grad(x, y);
                pv(&[gx, gy])
            }
        }
    }

    fn optimum(&self) -> ParamVector {
        match self {
            ToyFunction::F1 | ToyFunction::F2 | ToyFunction::F2Fig3 => pv(&[0.0, 0.0]),
            ToyFunction::F3 => pv(&[3.0, 0.5]),
            ToyFunction::F4 => pv(&[1.0, 1.0]),
        }
    }

    fn optimum_value(&self) -> f64 {
        0.0
    }

    fn default_start(&self) -> ParamVector {
        match self {
            ToyFunction::F1 => pv(&[1.0, 1.5]),
            ToyFunction::F2 | ToyFunction::F2Fig3 => pv(&[2.0, 2.0]),
            ToyFunction::F3 => pv(&[2.0, -0.5]),
            ToyFunction::F4 => pv(&[-1.0, 1.5]),
        }
    }

    fn kink_distance(&self, theta: &ParamVector) -> Option<f64> {
        let (x, y) = xy(theta);
        match self {
            ToyFunction::F1 => Some(x.abs().min(y.abs())),
            ToyFunction::F2 | ToyFunction::F2Fig3 => {
                Some((x - y).abs().min((x + y).abs()) / 2f64.sqrt())
            }
            ToyFunction::F3 | ToyFunction::F4 => None,
        }
    }
}

/// L2 coefficient of the logistic task: the loss adds `(lambda/2) ||w||^2`.
pub const LOGISTIC_L2: f64 = 1e-4;

/// Gradient-norm target of the gradient-descent reference solve.
pub const LOGISTIC_ORACLE_TOL: f64 = 1e-10;

const LOGISTIC_ORACLE_MAX_ITERS: usize = 2_000_000;

/// Seeded synthetic binary classification with mean logistic loss.
#[derive(Clone, Debug)]
pub struct LogisticTask {
    n: usize,
    d: usize,
    seed: u64,
    batch: Option<usize>,
    /// Row-major `n x d`.
    features: Vec<f64>,
    /// Labels in `{-1, +1}`.
    labels: Vec<f64>,
    true_weights: Vec<f64>,
    optimum: ParamVector,
    optimum_value: f64,
    oracle_iterations: usize,
}

fn softplus(u: f64) -> f64 {
    u.max(0.0) + (-u.abs()).exp().ln_1p()
}

fn sigmoid(u: f64) -> f64 {
    if u >= 0.0 {
        1.0 / (1.0 + (-u).exp())
    } else {
        let e = u.exp();
        e / (1.0 + e)
    }
}

impl LogisticTask {
    /// Generates the dataset and solves for the optimum by full-batch gradient descent.
    pub fn new(n: usize, d: usize, seed: u64) -> Result<Self> {
        if d == 0 || n < d {
            return Err(OptError::InvalidConfig(format!(
                "logistic task needs n >= d >= 1, got n = {n}, d = {d}"
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let true_weights: Vec<f64> = (0..d)
            .map(|j| {
                let mag = 0.5 + j as f64 / (2.0 * d as f64);
                if j % 2 == 0 { mag } else { -mag }
            })
            .collect();
        let mut features = Vec::with_capacity(n * d);
        let mut labels = Vec::with_capacity(n);
        for _ in 0..n {
            let row: Vec<f64> = (0..d).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
            let p = sigmoid(dot_slices(&row, &true_weights));
            labels.push(if rng.gen::<f64>() < p { 1.0 } else { -1.0 });
            features.extend(row);
        }
        let mut task = LogisticTask {
            n,
            d,
            seed,
            batch: None,
            features,
            labels,
            true_weights,
            optimum: ParamVector::zeros(d),
            optimum_value: 0.0,
            oracle_iterations: 0,
        };
        let (w, iters) = task.solve_by_gradient_descent()?;
        task.optimum_value = task.eval(&w);
        task.optimum = w;
        task.oracle_iterations = iters;
        Ok(task)
    }

    /// Uses `size` uniformly drawn rows per [`Objective::sample_grad`] call.
    pub fn with_batch(mut self, size: usize) -> Result<Self> {
        if size == 0 || size > self.n {
            return Err(OptError::InvalidConfig(format!(
                "batch size {size} must lie in 1..={}",
                self.n
            )));
        }
        self.batch = Some(size);
        Ok(self)
    }

    pub fn samples(&self) -> usize {
        self.n
    }

    pub fn true_weights(&self) -> &[f64] {
        &self.true_weights
    }

    pub fn oracle_iterations(&self) -> usize {
        self.oracle_iterations
    }

    fn row(&self, i: usize) -> &[f64] {
        &self.features[i * self.d..(i + 1) * self.d]
    }

    /// Smoothness bound `lambda + sum ||x_i||^2 / (4 n)`.
    fn lipschitz_bound(&self) -> f64 {
        LOGISTIC_L2 + self.features.iter().map(|x| x * x).sum::<f64>() / (4.0 * self.n as f64)
    }

    fn grad_rows(&self, w: &[f64], rows: impl Iterator<Item = usize>, count: usize) -> Vec<f64> {
        let mut g = vec![0.0; self.d];
        for i in rows {
            let x = self.row(i);
            let y = self.labels[i];
            let coef = -y * sigmoid(-y * dot_slices(x, w));
            for (gj, xj) in g.iter_mut().zip(x) {
                *gj += coef * xj;
            }
        }
        for (gj, wj) in g.iter_mut().zip(w) {
            *gj = *gj / count as f64 + LOGISTIC_L2 * wj;
        }
        g
    }

    fn solve_by_gradient_descent(&self) -> Result<(ParamVector, usize)> {
        let step = 1.0 / self.lipschitz_bound();
        let mut w = vec![0.0; self.d];
        for iter in 0..LOGISTIC_ORACLE_MAX_ITERS {
            let g = self.grad_rows(&w, 0..self.n, self.n);
            if dot_slices(&g, &g).sqrt() < LOGISTIC_ORACLE_TOL {
                return Ok((ParamVector::new(w)?, iter));
            }
            for (wj, gj) in w.iter_mut().zip(&g) {
                *wj -= step * gj;
            }
        }
        Err(OptError::InvalidConfig(format!(
            "reference gradient descent did not reach gradient norm {LOGISTIC_ORACLE_TOL}"
        )))
    }
}

impl Objective for LogisticTask {
    fn id(&self) -> String {
        match self.batch {
            Some(b) => format!("logistic-{}-{}-{}-b{b}", self.n, self.d, self.seed),
            None => format!("logistic-{}-{}-{}", self.n, self.d, self.seed),
        }
    }

    fn dim(&self) -> usize {
        self.d
    }

    fn eval(&self, theta: &ParamVector) -> f64 {
        assert_eq!(theta.dim(), self.d);
        let w = theta.as_slice();
        let loss: f64 = (0..self.n)
            .map(|i| softplus(-self.labels[i] * dot_slices(self.row(i), w)))
            .sum::<f64>()
            / self.n as f64;
        loss + 0.5 * LOGISTIC_L2 * dot_slices(w, w)
    }

    fn grad(&self, theta: &ParamVector) -> ParamVector {
        assert_eq!(theta.dim(), self.d);
        ParamVector::new(self.grad_rows(theta.as_slice(), 0..self.n, self.n)).expect("d >= 1")
    }

    fn optimum(&self) -> ParamVector {
        self.optimum.clone()
    }

    fn optimum_value(&self) -> f64 {
        self.optimum_value
    }

    fn default_start(&self) -> ParamVector {
        ParamVector::zeros(self.d)
    }

    fn sample_grad(&self, theta: &ParamVector, rng: &mut ChaCha8Rng) -> ParamVector {
        match self.batch {
            None => self.grad(theta),
            Some(b) => {
                let rows = sample(rng, self.n, b);
                ParamVector::new(self.grad_rows(theta.as_slice(), rows.into_iter(), b)).expect("d >= 1")
            }
        }
    }
}

/// Ids accepted by [`objective_by_id`] besides the `logistic-N-D-SEED[-bB]` family.
pub const TOY_IDS: [&str; 5] = ["f1", "f2", "f2-fig3", "f3", "f4"];

/// Looks up an objective by registry id.
pub fn objective_by_id(id: &str) -> Result<Box<dyn Objective>> {
    if let Some(f) = ToyFunction::parse(id) {
        return Ok(Box::new(f));
    }
    let unknown = || OptError::UnknownObjective(id.to_string());
    let rest = id.strip_prefix("logistic-").ok_or_else(unknown)?;
    let parts: Vec<&str> = rest.split('-').collect();
    let num = |s: &str| s.parse::<u64>().map_err(|_| unknown());
    let (n, d, seed, batch) = match parts.as_slice() {
        [n, d, seed] => (num(n)?, num(d)?, num(seed)?, None),
        [n, d, seed, b] => {
            let b = b.strip_prefix('b').ok_or_else(unknown)?;
            (num(n)?, num(d)?, num(seed)?, Some(num(b)? as usize))
        }
        _ => return Err(unknown()),
    };
    let task = LogisticTask::new(n as usize, d as usize, seed)?;
    Ok(match batch {
        Some(b) => Box::new(task.with_batch(b)?),
        None => Box::new(task),
    })
}

/// Max over coordinates of `|central difference - analytic| / max(1, |analytic|)`.
///
/// Only meaningful when `theta` is at least `h` away from any kink
/// (see [`Objective::kink_distance`]).
pub fn fd_check(obj: &dyn Objective, theta: &ParamVector, h: f64) -> f64 {
    let analytic = obj.grad(theta);
    let mut worst: f64 = 0.0;
    for i in 0..theta.dim() {
        let mut plus = theta.clone();
        let mut minus = theta.clone();
        plus.as_mut_slice()[i] += h;
        minus.as_mut_slice()[i] -= h;
        let span = plus[i] - minus[i];
        let fd = (obj.eval(&plus) - obj.eval(&minus)) / span;
        let err = (fd - analytic[i]).abs() / analytic[i].abs().max(1.0);
        worst = worst.max(err);
    }
    worst
}

/// Euclidean distance to the objective's minimizer.
pub fn distance_to_optimum(obj: &dyn Objective, theta: &ParamVector) -> f64 {
    let opt = obj.optimum();
    norm2(&theta.sub(&opt).expect("dimension checked by caller"))
}

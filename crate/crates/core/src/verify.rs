//! Executable property suites for the hidden-vector machinery.
//!
//! Every suite is seeded and the report text depends only on the options,
//! so two runs with equal [`VerifyOptions`] render byte-identical reports
//! whether trials run on the rayon pool or sequentially.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::Result;
use crate::hvadam::{
    hidden_vector_update, noise_ratio, restart_controller_step_with, HVAdam, HVAdamConfig,
    HVAdamState,
};
use crate::optim::Optimizer;
use crate::par;
use crate::vector::{dot, norm2, pv, ParamVector};

/// Signature of the hidden-vector update used by the suites.
pub type HiddenUpdate = fn(&ParamVector, &ParamVector) -> Result<(f64, ParamVector)>;

/// Absolute slack on the norm chain and relative slack on the inner-product identity.
pub const INVARIANT_TOL: f64 = 1e-9;

/// Gradient sequence of the two-dimensional valley example `4|x - y| + |x + y|`.
pub const VALLEY_GRADIENTS: [[f64; 2]; 5] = [[5.0, -3.0], [-3.0, 5.0], [5.0, -3.0], [-3.0, 5.0], [5.0, -3.0]];

/// Printed magnitudes of the bias-corrected moment for the valley example, steps 2..=5.
pub const VALLEY_MHAT_MAGNITUDES: [[f64; 2]; 4] =
    [[0.7895, 1.2105], [2.3432, 0.3432], [0.7895, 1.2105], [1.8177, 0.1823]];

#[derive(Clone, Copy, Debug)]
pub struct VerifyOptions {
    /// Randomized trials for the norm-chain, identity and restart suites.
    pub seeds: u64,
    pub seq_len: usize,
    pub dim: usize,
    pub eta_tuples: u64,
    pub hidden_update: HiddenUpdate,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            seeds: 100,
            seq_len: 200,
            dim: 10,
            eta_tuples: 10_000,
            hidden_update: hidden_vector_update,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Failure {
    pub seed: u64,
    pub step: usize,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PropertyOutcome {
    pub name: &'static str,
    pub trials: u64,
    pub failure: Option<Failure>,
}

impl PropertyOutcome {
    pub fn passed(&self) -> bool {
        self.failure.is_none()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct VerifyReport {
    pub outcomes: Vec<PropertyOutcome>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.outcomes.iter().all(PropertyOutcome::passed)
    }

    pub fn outcome(&self, name: &str) -> Option<&PropertyOutcome> {
        self.outcomes.iter().find(|o| o.name == name)
    }

    /// One line per property, then a totals line.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for o in &self.outcomes {
            match &o.failure {
                None => writeln!(out, "PASS {:<24} trials={}", o.name, o.trials),
                Some(f) => writeln!(
                    out,
                    "FAIL {:<24} trials={} seed={} step={} {}",
                    o.name, o.trials, f.seed, f.step, f.detail
                ),
            }
            .unwrap();
        }
        let passed = self.outcomes.iter().filter(|o| o.passed()).count();
        writeln!(out, "{passed}/{} properties passed", self.outcomes.len()).unwrap();
        out
    }
}

/// Runs every suite.
pub fn run_suites(opts: &VerifyOptions) -> VerifyReport {
    let (norm_chain, identity) = hidden_vector_suites(opts);
    VerifyReport {
        outcomes: vec![
            valley_golden(opts.hidden_update),
            norm_chain,
            identity,
            eta_bound(opts.eta_tuples),
            restart_soundness(opts.seeds, opts.seq_len),
        ],
    }
}

fn outcome(name: &'static str, trials: u64, failures: Vec<Option<Failure>>) -> PropertyOutcome {
    PropertyOutcome { name, trials, failure: failures.into_iter().flatten().next() }
}

/// Runs the controller over [`VALLEY_GRADIENTS`] with `beta1 = 0.9` and
/// returns `(m_hat, v)` after each step.
pub fn valley_trace(update: HiddenUpdate) -> Result<Vec<(ParamVector, ParamVector)>> {
    let cfg = HVAdamConfig { beta1: 0.9, ..HVAdamConfig::default() };
    let mut state = HVAdamState::new(2, &cfg);
    let mut m = ParamVector::zeros(2);
    let mut out = Vec::new();
    for (i, g) in VALLEY_GRADIENTS.iter().enumerate() {
        m = m.zip_map(&pv(g), |m, g| cfg.beta1 * m + (1.0 - cfg.beta1) * g)?;
        let m_hat = m.scale(1.0 / (1.0 - cfg.beta1.powi(i as i32 + 1)))?;
        state.t2 += 1;
        restart_controller_step_with(&mut state, &m_hat, &cfg, update)?;
        out.push((m_hat, state.v.clone()));
    }
    Ok(out)
}

fn valley_golden(update: HiddenUpdate) -> PropertyOutcome {
    let fail = |step: usize, detail: String| Some(Failure { seed: 0, step, detail });
    let failure = match valley_trace(update) {
        Err(e) => fail(0, e.to_string()),
        Ok(trace) => {
            let mut found = None;
            for (i, (m_hat, v)) in trace.iter().enumerate() {
                let want = if i == 0 { [5.0, -3.0] } else { [1.0, 1.0] };
                if v.iter().zip(want).any(|(a, b)| (a - b).abs() > INVARIANT_TOL) {
                    found = fail(i + 1, format!("v = {:?}, expected {:?}", v.as_slice(), want));
                    break;
                }
                if i > 0 {
                    let printed = VALLEY_MHAT_MAGNITUDES[i - 1];
                    if m_hat.iter().zip(printed).any(|(a, b)| (a.abs() - b).abs() > 5e-5) {
                        found = fail(i + 1, format!("|m_hat| = {:?}, printed {:?}", m_hat.as_slice(), printed));
                        break;
                    }
                }
            }
            found
        }
    };
    PropertyOutcome { name: "valley-golden-trace", trials: 1, failure }
}

/// Moment sequence for one randomized trial: a fixed trend plus unit noise.
pub fn random_moments(seed: u64, len: usize, dim: usize) -> Vec<ParamVector> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let trend: Vec<f64> = (0..dim).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
    (0..len)
        .map(|_| {
            let v = trend.iter().map(|c| c + rng.sample::<f64, _>(StandardNormal)).collect();
            ParamVector::new(v).expect("dim > 0")
        })
        .collect()
}

/// Returns (norm-chain failure, identity failure) for one seed.
fn hidden_vector_trial(seed: u64, len: usize, dim: usize, update: HiddenUpdate) -> (Option<Failure>, Option<Failure>) {
    let moments = random_moments(seed, len, dim);
    let mut v = moments[0].clone();
    let mut min_m = norm2(&v);
    let (mut chain, mut identity) = (None, None);
    for (step, m_hat) in moments.iter().enumerate().skip(1) {
        let v_new = match update(&v, m_hat) {
            Ok((_, v_new)) => v_new,
            Err(e) => {
                let f = Some(Failure { seed, step, detail: e.to_string() });
                return (f.clone(), f);
            }
        };
        min_m = min_m.min(norm2(m_hat));
        let (prev, next) = (norm2(&v), norm2(&v_new));
        if chain.is_none() && (next > prev + INVARIANT_TOL || next > min_m + INVARIANT_TOL) {
            chain = Some(Failure {
                seed,
                step,
                detail: format!("|v| {next:.6e} after {prev:.6e}, min |m_hat| {min_m:.6e}"),
            });
        }
        let sq = next * next;
        let inner = dot(&v_new, m_hat).unwrap_or(f64::NAN);
        if identity.is_none() && !((sq - inner).abs() <= INVARIANT_TOL * (1.0 + sq)) {
            identity = Some(Failure {
                seed,
                step,
                detail: format!("|v|^2 = {sq:.6e}, <v, m_hat> = {inner:.6e}"),
            });
        }
        if chain.is_some() && identity.is_some() {
            break;
        }
        v = v_new;
    }
    (chain, identity)
}

fn hidden_vector_suites(opts: &VerifyOptions) -> (PropertyOutcome, PropertyOutcome) {
    let seeds: Vec<u64> = (0..opts.seeds).collect();
    let (len, dim, update) = (opts.seq_len.max(2), opts.dim.max(1), opts.hidden_update);
    let results = par::map_ordered(&seeds, |&s| hidden_vector_trial(s, len, dim, update));
    let (chain, identity): (Vec<_>, Vec<_>) = results.into_iter().unzip();
    (
        outcome("norm-chain", opts.seeds, chain),
        outcome("inner-product-identity", opts.seeds, identity),
    )
}

/// Gamma values exercised by the noise-ratio bound.
pub const ETA_GAMMAS: [f64; 4] = [0.1, 0.5, 1.0, 2.0];

const ETA_EPSILON: f64 = 1e-8;

fn log_uniform(rng: &mut ChaCha8Rng) -> f64 {
    let mag = 10f64.powf(rng.gen_range(-4.0..2.0));
    if rng.gen_bool(0.5) {
        mag
    } else {
        -mag
    }
}

fn eta_tuple(seed: u64) -> Option<Failure> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let gamma = ETA_GAMMAS[rng.gen_range(0..ETA_GAMMAS.len())];
    let mut draw = || -> Vec<f64> { (0..4).map(|_| log_uniform(&mut rng)).collect() };
    let (g, mut m, mut v) = (draw(), draw(), draw());
    // coincident entries hit the p = 0 and (g - m) = 0 corners
    m[1] = g[1];
    v[2] = g[2];
    let fail = |detail: String| Some(Failure { seed, step: 0, detail });
    match noise_ratio(&pv(&g), &pv(&m), &pv(&v), gamma, ETA_EPSILON) {
        Err(e) => fail(e.to_string()),
        Ok(eta) => eta
            .iter()
            .position(|&e| !(e >= 0.0 && e < 1.0 / gamma))
            .and_then(|i| fail(format!("eta[{i}] = {:e} with gamma {gamma}", eta[i]))),
    }
}

fn eta_bound(tuples: u64) -> PropertyOutcome {
    let seeds: Vec<u64> = (0..tuples).collect();
    outcome("eta-bound", tuples, par::map_ordered(&seeds, |&s| eta_tuple(s)))
}

/// Gradients whose trend flips sign at random intervals, with noise.
fn flipping_gradients(seed: u64, len: usize) -> Vec<ParamVector> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut trend = [rng.sample::<f64, _>(StandardNormal), rng.sample::<f64, _>(StandardNormal)];
    let mut next_flip = rng.gen_range(10..60);
    (0..len)
        .map(|t| {
            if t == next_flip {
                trend = [-trend[0], -trend[1]];
                next_flip += rng.gen_range(10..60);
            }
            let noise: f64 = rng.sample(StandardNormal);
            let zig = if t % 2 == 0 { 2.0 } else { -2.0 };
            pv(&[trend[0] + zig + 0.1 * noise, trend[1] - zig + 0.1 * noise])
        })
        .collect()
}

fn restart_trial(seed: u64, len: usize) -> Option<Failure> {
    let cfg = HVAdamConfig::toy();
    let mut opt = HVAdam::new(2, cfg).expect("toy config is valid");
    let mut theta = pv(&[0.0, 0.0]);
    for (step, g) in flipping_gradients(seed, len).iter().enumerate() {
        let mut twin = opt.clone();
        twin.cfg.alpha2 = Some(0.0);
        let fail = |detail: String| Some(Failure { seed, step: step + 1, detail });
        let next = match opt.step(&theta, g, None) {
            Ok(x) => x,
            Err(e) => return fail(e.to_string()),
        };
        let diag = opt.last_diagnostics();
        if diag.b < 0.0 || (diag.restarted && diag.b != 0.0) {
            return fail(format!("b = {:e} with restarted = {}", diag.b, diag.restarted));
        }
        if opt.state.t2 == 0 {
            if diag.b != 0.0 {
                return fail(format!("b = {:e} on a seeding step", diag.b));
            }
            match twin.step(&theta, g, None) {
                Ok(plain) if plain == next => {}
                Ok(plain) => {
                    return fail(format!("hidden-vector term moved theta: {:?} vs {:?}", next.as_slice(), plain.as_slice()))
                }
                Err(e) => return fail(e.to_string()),
            }
        }
        theta = next;
    }
    None
}

fn restart_soundness(seeds: u64, len: usize) -> PropertyOutcome {
    let ids: Vec<u64> = (0..seeds).collect();
    outcome("restart-soundness", seeds, par::map_ordered(&ids, |&s| restart_trial(s, len)))
}

//! Deterministic trajectory runner, races and hyperparameter sweeps.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::baselines::{AdaBelief, Adam, OptimizerConfig, Sgdm};
use crate::config::{parse_f64, ConfigValue};
use crate::error::{OptError, Result};
use crate::hvadam::{HVAdam, HVAdamConfig, StepDiagnostics};
use crate::objectives::{distance_to_optimum, objective_by_id, Objective};
use crate::optim::Optimizer;
use crate::par;
use crate::projection::BoxConstraint;
use crate::vector::ParamVector;

/// Default number of optimizer steps per run.
pub const DEFAULT_STEPS: u64 = 1500;

/// A run has reached the optimum once `||theta - theta*|| < DEFAULT_TOLERANCE`.
pub const DEFAULT_TOLERANCE: f64 = 0.1;

/// Optimizer id together with its hyperparameters.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum OptimizerSpec {
    HVAdam(HVAdamConfig),
    Adam(OptimizerConfig),
    AdaBelief(OptimizerConfig),
    Sgdm(OptimizerConfig),
}

impl OptimizerSpec {
    pub const IDS: [&'static str; 4] = ["hvadam", "adam", "adabelief", "sgdm"];

    /// Toy-race settings: lr 0.001, betas (0.9, 0.999), eps 1e-12,
    /// momentum 0.9, and for HVAdam gamma 0.5 with the linear schedule.
    pub fn toy(id: &str) -> Result<Self> {
        Ok(match id {
            "hvadam" => OptimizerSpec::HVAdam(HVAdamConfig::toy()),
            "adam" => OptimizerSpec::Adam(OptimizerConfig::toy()),
            "adabelief" => OptimizerSpec::AdaBelief(OptimizerConfig::toy()),
            "sgdm" => OptimizerSpec::Sgdm(OptimizerConfig::toy()),
            other => return Err(OptError::UnknownOptimizer(other.to_string())),
        })
    }

    pub fn id(&self) -> &'static str {
        match self {
            OptimizerSpec::HVAdam(_) => "hvadam",
            OptimizerSpec::Adam(_) => "adam",
            OptimizerSpec::AdaBelief(_) => "adabelief",
            OptimizerSpec::Sgdm(_) => "sgdm",
        }
    }

    /// Whether `key` names a hyperparameter this optimizer reads.
    pub fn has_key(&self, key: &str) -> bool {
        match self {
            OptimizerSpec::HVAdam(_) => HVAdamConfig::has_key(key),
            OptimizerSpec::Sgdm(_) => matches!(key, "alpha1" | "lr" | "momentum"),
            OptimizerSpec::Adam(_) | OptimizerSpec::AdaBelief(_) => {
                OptimizerConfig::has_key(key) && key != "momentum"
            }
        }
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        if !self.has_key(key) {
            return Err(OptError::UnknownKey(format!("{}.{key}", self.id())));
        }
        match self {
            OptimizerSpec::HVAdam(c) => c.set(key, value),
            OptimizerSpec::Adam(c) | OptimizerSpec::AdaBelief(c) | OptimizerSpec::Sgdm(c) => {
                c.set(key, value)
            }
        }
    }

    /// The hyperparameters this optimizer reads, in a fixed order.
    pub fn entries(&self) -> Vec<(&'static str, ConfigValue)> {
        match self {
            OptimizerSpec::HVAdam(c) => c.entries(),
            OptimizerSpec::Sgdm(c) => c
                .entries()
                .into_iter()
                .filter(|(k, _)| matches!(*k, "alpha1" | "momentum"))
                .collect(),
            OptimizerSpec::Adam(c) | OptimizerSpec::AdaBelief(c) => {
                c.entries().into_iter().filter(|(k, _)| *k != "momentum").collect()
            }
        }
    }

    pub fn build(&self, dim: usize) -> Result<Box<dyn Optimizer>> {
        Ok(match *self {
            OptimizerSpec::HVAdam(c) => Box::new(HVAdam::new(dim, c)?),
            OptimizerSpec::Adam(c) => Box::new(Adam::new(dim, c)?),
            OptimizerSpec::AdaBelief(c) => Box::new(AdaBelief::new(dim, c)?),
            OptimizerSpec::Sgdm(c) => Box::new(Sgdm::new(dim, c)?),
        })
    }

    fn sort_key(&self) -> String {
        let cfg: Vec<String> = self.entries().iter().map(|(k, v)| format!("{k}={v}")).collect();
        format!("{}:{}", self.id(), cfg.join(","))
    }
}

/// Everything needed to reproduce one trajectory.
#[derive(Clone, Debug, PartialEq)]
pub struct RunSpec {
    pub objective_id: String,
    pub optimizer: OptimizerSpec,
    pub start: ParamVector,
    pub steps: u64,
    pub seed: u64,
    pub record_every: u64,
    pub feasible: Option<BoxConstraint>,
    pub tolerance: f64,
}

impl RunSpec {
    /// Toy-race defaults for `optimizer_id` on `obj`, starting from its frozen start.
    pub fn toy(obj: &dyn Objective, optimizer_id: &str) -> Result<Self> {
        Ok(RunSpec {
            objective_id: obj.id(),
            optimizer: OptimizerSpec::toy(optimizer_id)?,
            start: obj.default_start(),
            steps: DEFAULT_STEPS,
            seed: 0,
            record_every: 1,
            feasible: None,
            tolerance: DEFAULT_TOLERANCE,
        })
    }

    /// Sets a run-level key (`steps`, `seed`, `record_every`, `tolerance`)
    /// or, failing that, an optimizer hyperparameter.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let int = |v: &str| {
            v.trim().parse::<u64>().map_err(|_| OptError::InvalidValue {
                key: key.to_string(),
                value: v.to_string(),
            })
        };
        match key {
            "steps" => self.steps = int(value)?,
            "seed" => self.seed = int(value)?,
            "record_every" => self.record_every = int(value)?,
            "tolerance" => self.tolerance = parse_f64(key, value)?,
            _ => self.optimizer.set(key, value)?,
        }
        Ok(())
    }

    pub fn validate(&self, obj: &dyn Objective) -> Result<()> {
        if self.steps == 0 {
            return Err(OptError::InvalidConfig("steps must be at least 1".into()));
        }
        if self.record_every == 0 {
            return Err(OptError::InvalidConfig("record_every must be at least 1".into()));
        }
        if !(self.tolerance > 0.0) {
            return Err(OptError::InvalidConfig("tolerance must be > 0".into()));
        }
        if self.objective_id != obj.id() {
            return Err(OptError::InvalidConfig(format!(
                "spec names objective {} but got {}",
                self.objective_id,
                obj.id()
            )));
        }
        if self.start.dim() != obj.dim() {
            return Err(OptError::DimensionMismatch { left: self.start.dim(), right: obj.dim() });
        }
        self.start.check_finite("start")?;
        if let Some(b) = &self.feasible {
            if b.dim() != obj.dim() {
                return Err(OptError::DimensionMismatch { left: b.dim(), right: obj.dim() });
            }
        }
        Ok(())
    }
}

/// One recorded step.
#[derive(Clone, Debug, PartialEq)]
pub struct TraceRow {
    pub t: u64,
    pub loss: f64,
    pub dist_to_opt: f64,
    pub theta: Vec<f64>,
    /// Only present for optimizers with a hidden vector.
    pub diag: Option<StepDiagnostics>,
    /// Gradient fed to the optimizer at this step.
    pub grad: Vec<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RunSummary {
    pub final_loss: f64,
    pub best_loss: f64,
    pub first_step_within_tol: Option<u64>,
    pub steps_completed: u64,
}

/// Trace plus summary of one run.
#[derive(Clone, Debug, PartialEq)]
pub struct RunRecord {
    pub objective: String,
    pub optimizer: OptimizerSpec,
    pub dim: usize,
    pub rows: Vec<TraceRow>,
    pub summary: RunSummary,
    /// Set when the run aborted on a non-finite value; rows hold the partial trace.
    pub failure: Option<String>,
}

impl RunRecord {
    pub fn failed(&self) -> bool {
        self.failure.is_some()
    }
}

/// Runs `spec` against an objective resolved from the registry.
pub fn run(spec: &RunSpec) -> Result<RunRecord> {
    let obj = objective_by_id(&spec.objective_id)?;
    run_on(obj.as_ref(), spec)
}

/// Runs `spec` against an already-built objective.
pub fn run_on(obj: &dyn Objective, spec: &RunSpec) -> Result<RunRecord> {
    spec.validate(obj)?;
    let mut opt = spec.optimizer.build(obj.dim())?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut theta = spec.start.clone();
    let mut rows = Vec::with_capacity((spec.steps / spec.record_every) as usize + 1);
    let mut first_within =
        (distance_to_optimum(obj, &theta) < spec.tolerance).then_some(0u64);
    let mut best = f64::INFINITY;
    let mut last = f64::NAN;
    let mut completed = 0;
    let mut failure = None;

    for t in 1..=spec.steps {
        let grad = obj.sample_grad(&theta, &mut rng);
        theta = match opt.step(&theta, &grad, spec.feasible.as_ref()) {
            Ok(next) => next,
            Err(e) => {
                failure = Some(format!("step {t}: {e}"));
                break;
            }
        };
        let loss = obj.eval(&theta);
        if !loss.is_finite() {
            failure = Some(format!("step {t}: non-finite loss"));
            break;
        }
        completed = t;
        last = loss;
        best = best.min(loss);
        let dist = distance_to_optimum(obj, &theta);
        if first_within.is_none() && dist < spec.tolerance {
            first_within = Some(t);
        }
        if t % spec.record_every == 0 || t == spec.steps {
            rows.push(TraceRow {
                t,
                loss,
                dist_to_opt: dist,
                theta: theta.as_slice().to_vec(),
                diag: opt.diagnostics(),
                grad: grad.into_vec(),
            });
        }
    }

    Ok(RunRecord {
        objective: obj.id(),
        optimizer: spec.optimizer,
        dim: obj.dim(),
        rows,
        summary: RunSummary {
            final_loss: last,
            best_loss: best,
            first_step_within_tol: first_within,
            steps_completed: completed,
        },
        failure,
    })
}

/// Runs independent specs on one objective, parallel when the feature is on.
pub fn run_batch(obj: &dyn Objective, specs: &[RunSpec]) -> Vec<Result<RunRecord>> {
    par::map_ordered(specs, |s| run_on(obj, s))
}

pub fn run_batch_sequential(obj: &dyn Objective, specs: &[RunSpec]) -> Vec<Result<RunRecord>> {
    par::map_sequential(specs, |s| run_on(obj, s))
}

#[cfg(feature = "parallel")]
pub fn run_batch_parallel(obj: &dyn Objective, specs: &[RunSpec]) -> Vec<Result<RunRecord>> {
    par::map_parallel(specs, |s| run_on(obj, s))
}

/// One optimizer's line in a race.
#[derive(Clone, Debug, PartialEq)]
pub struct RaceEntry {
    pub optimizer: OptimizerSpec,
    pub summary: RunSummary,
    /// 1-based; equal results share a rank.
    pub rank: usize,
}

/// Result of racing several optimizers from one start on one objective.
#[derive(Clone, Debug, PartialEq)]
pub struct RaceTable {
    pub objective: String,
    pub entries: Vec<RaceEntry>,
    pub records: Vec<RunRecord>,
}

impl RaceTable {
    pub fn entry(&self, optimizer_id: &str) -> Option<&RaceEntry> {
        self.entries.iter().find(|e| e.optimizer.id() == optimizer_id)
    }

    /// Per-step losses aligned on `t`; `None` where a run has no row.
    pub fn aligned_losses(&self) -> Vec<(u64, Vec<Option<f64>>)> {
        let mut ts: Vec<u64> = self.records.iter().flat_map(|r| r.rows.iter().map(|row| row.t)).collect();
        ts.sort_unstable();
        ts.dedup();
        ts.into_iter()
            .map(|t| {
                let col = self
                    .records
                    .iter()
                    .map(|r| r.rows.binary_search_by_key(&t, |row| row.t).ok().map(|i| r.rows[i].loss))
                    .collect();
                (t, col)
            })
            .collect()
    }
}

/// Races specs that share an objective and start.
///
/// Ranking orders by first step within tolerance (never reached sorts last),
/// then by final loss.
pub fn race(specs: &[RunSpec]) -> Result<RaceTable> {
    let first = specs
        .first()
        .ok_or_else(|| OptError::MismatchedRace("no specs given".into()))?;
    let obj = objective_by_id(&first.objective_id)?;
    race_on(obj.as_ref(), specs)
}

pub fn race_on(obj: &dyn Objective, specs: &[RunSpec]) -> Result<RaceTable> {
    let first = specs
        .first()
        .ok_or_else(|| OptError::MismatchedRace("no specs given".into()))?;
    for s in specs {
        if s.objective_id != first.objective_id {
            return Err(OptError::MismatchedRace(format!(
                "{} vs {}",
                first.objective_id, s.objective_id
            )));
        }
        if s.start != first.start {
            return Err(OptError::MismatchedRace("different start points".into()));
        }
    }
    let records = run_batch(obj, specs).into_iter().collect::<Result<Vec<_>>>()?;
    let ranks = rank(&records);
    let entries = records
        .iter()
        .zip(ranks)
        .map(|(r, rank)| RaceEntry { optimizer: r.optimizer, summary: r.summary, rank })
        .collect();
    Ok(RaceTable { objective: obj.id(), entries, records })
}

fn rank(records: &[RunRecord]) -> Vec<usize> {
    let key = |r: &RunRecord| {
        let reached = r.summary.first_step_within_tol.unwrap_or(u64::MAX);
        let loss = if r.failed() { f64::INFINITY } else { r.summary.final_loss };
        (reached, loss)
    };
    let better = |a: &RunRecord, b: &RunRecord| {
        let (ka, kb) = (key(a), key(b));
        ka.0 < kb.0 || (ka.0 == kb.0 && ka.1.total_cmp(&kb.1).is_lt())
    };
    // Competition ranking: 1 + number of strictly better runs.
    records
        .iter()
        .map(|r| 1 + records.iter().filter(|o| better(o, r)).count())
        .collect()
}

/// One point of a sweep.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepEntry {
    pub assignments: Vec<(String, String)>,
    pub spec: RunSpec,
    pub summary: RunSummary,
    pub failed: bool,
    /// Lowest final loss among non-failed entries (first one on ties).
    pub best: bool,
}

/// Evaluates the Cartesian product of `grid` applied on top of `base`.
///
/// Entries come out in odometer order: the last grid dimension varies fastest.
pub fn sweep(base: &RunSpec, grid: &[(String, Vec<String>)]) -> Result<Vec<SweepEntry>> {
    let obj = objective_by_id(&base.objective_id)?;
    sweep_on(obj.as_ref(), base, grid)
}

pub fn sweep_on(
    obj: &dyn Objective,
    base: &RunSpec,
    grid: &[(String, Vec<String>)],
) -> Result<Vec<SweepEntry>> {
    if grid.is_empty() {
        return Err(OptError::InvalidConfig("sweep grid is empty".into()));
    }
    if let Some((k, _)) = grid.iter().find(|(_, vals)| vals.is_empty()) {
        return Err(OptError::InvalidConfig(format!("sweep dimension `{k}` has no values")));
    }
    let mut points: Vec<Vec<(String, String)>> = vec![vec![]];
    for (key, values) in grid {
        points = points
            .into_iter()
            .flat_map(|p| {
                values.iter().map(move |v| {
                    let mut q = p.clone();
                    q.push((key.clone(), v.clone()));
                    q
                })
            })
            .collect();
    }
    let specs = points
        .iter()
        .map(|assign| {
            let mut s = base.clone();
            for (k, v) in assign {
                s.set(k, v)?;
            }
            Ok(s)
        })
        .collect::<Result<Vec<_>>>()?;
    let records = run_batch(obj, &specs).into_iter().collect::<Result<Vec<_>>>()?;
    let mut entries: Vec<SweepEntry> = points
        .into_iter()
        .zip(specs)
        .zip(records)
        .map(|((assignments, spec), rec)| SweepEntry {
            assignments,
            spec,
            summary: rec.summary,
            failed: rec.failed(),
            best: false,
        })
        .collect();
    let best = entries
        .iter()
        .enumerate()
        .filter(|(_, e)| !e.failed && e.summary.final_loss.is_finite())
        .min_by(|a, b| a.1.summary.final_loss.total_cmp(&b.1.summary.final_loss))
        .map(|(i, _)| i);
    if let Some(i) = best {
        entries[i].best = true;
    }
    Ok(entries)
}

/// Sort key that makes race output independent of spec order.
pub fn canonical_order(specs: &[RunSpec]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..specs.len()).collect();
    idx.sort_by_key(|&i| specs[i].optimizer.sort_key());
    idx
}

const RUN_KEYS: [&str; 4] = ["steps", "seed", "record_every", "tolerance"];

/// Applies `key=value` overrides to a group of specs, in order.
///
/// A key prefixed with an optimizer id (`hvadam.gamma`) only touches specs
/// of that optimizer. Run-level keys apply to every spec. Any other key
/// applies to each spec whose optimizer reads it and is an error when no
/// spec does.
pub fn apply_overrides(specs: &mut [RunSpec], pairs: &[(String, String)]) -> Result<()> {
    for (key, value) in pairs {
        let (scope, name) = match key.split_once('.') {
            Some((opt, name)) => {
                if !OptimizerSpec::IDS.contains(&opt) {
                    return Err(OptError::UnknownOptimizer(opt.to_string()));
                }
                (Some(opt), name)
            }
            None => (None, key.as_str()),
        };
        let mut hit = false;
        for spec in specs.iter_mut() {
            if scope.is_some_and(|opt| opt != spec.optimizer.id()) {
                continue;
            }
            if RUN_KEYS.contains(&name) || spec.optimizer.has_key(name) {
                spec.set(name, value)?;
                hit = true;
            }
        }
        // a key scoped to an unselected optimizer is fine if that optimizer reads it
        let valid_elsewhere = match scope {
            Some(opt) if !specs.iter().any(|s| s.optimizer.id() == opt) => {
                RUN_KEYS.contains(&name) || OptimizerSpec::toy(opt)?.has_key(name)
            }
            _ => false,
        };
        if !hit && !valid_elsewhere {
            return Err(OptError::UnknownKey(key.clone()));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::objectives::ToyFunction;
    use crate::vector::pv;

    fn toy_specs(f: ToyFunction, ids: &[&str]) -> Vec<RunSpec> {
        ids.iter().map(|id| RunSpec::toy(&f, id).unwrap()).collect()
    }

    #[test]
    fn run_records_every_step() {
        let spec = RunSpec { steps: 50, ..RunSpec::toy(&ToyFunction::F2, "hvadam").unwrap() };
        let rec = run(&spec).unwrap();
        assert_eq!(rec.rows.len(), 50);
        assert!(rec.rows.windows(2).all(|w| w[0].t < w[1].t));
        assert_eq!(rec.summary.final_loss, rec.rows.last().unwrap().loss);
        let min = rec.rows.iter().map(|r| r.loss).fold(f64::INFINITY, f64::min);
        assert_eq!(rec.summary.best_loss, min);
        assert!(rec.rows.iter().all(|r| r.diag.unwrap().b >= 0.0));
    }

    #[test]
    fn record_every_thins_rows_but_keeps_last() {
        let spec = RunSpec { steps: 95, record_every: 10, ..RunSpec::toy(&ToyFunction::F4, "adam").unwrap() };
        let rec = run(&spec).unwrap();
        let ts: Vec<u64> = rec.rows.iter().map(|r| r.t).collect();
        assert_eq!(ts, vec![10, 20, 30, 40, 50, 60, 70, 80, 90, 95]);
        assert!(rec.rows.iter().all(|r| r.diag.is_none()));
    }

    #[test]
    fn start_at_optimum_stays_put() {
        for f in ToyFunction::ALL {
            for id in OptimizerSpec::IDS {
                let spec = RunSpec { start: f.optimum(), steps: 30, ..RunSpec::toy(&f, id).unwrap() };
                let rec = run_on(&f, &spec).unwrap();
                assert!(rec.rows.iter().all(|r| r.loss == 0.0), "{id} on {}", f.as_str());
                assert_eq!(rec.summary.first_step_within_tol, Some(0));
            }
        }
    }

    #[test]
    fn hvadam_ends_lowest_on_the_diagonal_valley() {
        let f = ToyFunction::F2;
        let table = race(&toy_specs(f, &OptimizerSpec::IDS)).unwrap();
        let hv = table.entry("hvadam").unwrap();
        let last = &table.records[0].rows.last().unwrap();
        assert_eq!(table.records[0].optimizer.id(), "hvadam");
        assert!(last.dist_to_opt < 0.1);
        for id in ["adam", "adabelief", "sgdm"] {
            assert!(hv.summary.final_loss < table.entry(id).unwrap().summary.final_loss, "{id}");
        }
    }

    #[test]
    fn hvadam_diagnostics_stay_in_range() {
        for f in ToyFunction::ALL {
            let spec = RunSpec::toy(&f, "hvadam").unwrap();
            let mut opt = HVAdam::new(2, HVAdamConfig::toy()).unwrap();
            let mut theta = spec.start.clone();
            for _ in 0..spec.steps {
                theta = opt.step(&theta, &f.grad(&theta), None).unwrap();
                let d = opt.last_diagnostics();
                assert!(d.b >= 0.0 && (!d.restarted || d.b == 0.0));
                assert!(opt.state.s.iter().all(|&s| s > 0.0));
            }
        }
    }

    #[test]
    fn plain_sgd_reproduces_zigzag_gradients() {
        let f = ToyFunction::F2Fig3;
        let mut spec = RunSpec::toy(&f, "sgdm").unwrap();
        spec.set("momentum", "0").unwrap();
        spec.set("alpha1", "0.001").unwrap();
        spec.start = pv(&[1.002, 0.998]);
        spec.steps = 5;
        let rec = run_on(&f, &spec).unwrap();
        let expect = [[5.0, -3.0], [-3.0, 5.0], [5.0, -3.0], [-3.0, 5.0], [5.0, -3.0]];
        for (row, g) in rec.rows.iter().zip(expect) {
            assert_eq!(row.grad, g.to_vec(), "t = {}", row.t);
        }
    }

    #[test]
    fn invalid_specs_are_rejected() {
        let f = ToyFunction::F1;
        let base = RunSpec::toy(&f, "adam").unwrap();
        assert!(run_on(&f, &RunSpec { steps: 0, ..base.clone() }).is_err());
        assert!(run_on(&f, &RunSpec { start: pv(&[1.0]), ..base.clone() }).is_err());
        assert!(run_on(&ToyFunction::F2, &base).is_err());
        assert!(OptimizerSpec::toy("lion").is_err());
        let mut s = base.clone();
        assert!(matches!(s.set("gamma", "1"), Err(OptError::UnknownKey(_))));
        assert!(s.set("steps", "-3").is_err());
        let mut sg = RunSpec::toy(&f, "sgdm").unwrap();
        assert!(sg.set("beta2", "0.9").is_err());
    }

    #[test]
    fn nonfinite_loss_aborts_with_partial_record() {
        let f = ToyFunction::F4;
        let mut spec = RunSpec::toy(&f, "sgdm").unwrap();
        spec.set("alpha1", "0.5").unwrap();
        let rec = run_on(&f, &spec).unwrap();
        assert!(rec.failed());
        assert!(rec.summary.steps_completed < spec.steps);
        assert_eq!(rec.rows.len() as u64, rec.summary.steps_completed);
    }

    #[test]
    fn race_ranks_and_determinism() {
        let specs = toy_specs(ToyFunction::F2, &["hvadam", "adam", "adam"]);
        let table = race(&specs).unwrap();
        assert_eq!(table.entries.len(), 3);
        assert_eq!(table.records[1].rows, table.records[2].rows);
        assert_eq!(table.entries[1].rank, table.entries[2].rank);

        let single = race(&specs[..1]).unwrap();
        assert_eq!(single.entries.len(), 1);
        assert_eq!(single.entries[0].rank, 1);
        assert!(race(&[]).is_err());

        let mut other = specs.clone();
        other[1].objective_id = "f1".into();
        assert!(matches!(race(&other), Err(OptError::MismatchedRace(_))));
    }

    #[test]
    fn race_ranking_ignores_listing_order() {
        let ids = ["hvadam", "adam", "adabelief", "sgdm"];
        let specs = toy_specs(ToyFunction::F4, &ids);
        let fwd = race(&specs).unwrap();
        let rev_specs: Vec<RunSpec> = specs.iter().rev().cloned().collect();
        let rev = race(&rev_specs).unwrap();
        for id in ids {
            assert_eq!(fwd.entry(id).unwrap().rank, rev.entry(id).unwrap().rank);
        }
        let aligned = fwd.aligned_losses();
        assert_eq!(aligned.len(), 1500);
        assert!(aligned.iter().all(|(_, col)| col.len() == 4));
    }

    #[test]
    fn sweep_cardinality_and_best_flag() {
        let f = ToyFunction::F2;
        let base = RunSpec { steps: 200, ..RunSpec::toy(&f, "hvadam").unwrap() };
        let grid = vec![("gamma".to_string(), vec!["0".into(), "0.5".into(), "1".into()])];
        let out = sweep_on(&f, &base, &grid).unwrap();
        assert_eq!(out.len(), 3);
        assert_eq!(out.iter().filter(|e| e.best).count(), 1);
        let best = out.iter().find(|e| e.best).unwrap();
        assert!(out.iter().all(|e| best.summary.final_loss <= e.summary.final_loss));

        let grid2 = vec![
            ("alpha1".to_string(), vec!["0.01".into(), "0.001".into()]),
            ("gamma".to_string(), vec!["0".into(), "1".into()]),
        ];
        let out = sweep_on(&f, &base, &grid2).unwrap();
        let order: Vec<_> = out.iter().map(|e| e.assignments.clone()).collect();
        assert_eq!(order[1], vec![("alpha1".into(), "0.01".into()), ("gamma".into(), "1".into())]);

        assert!(sweep_on(&f, &base, &[]).is_err());
        assert!(sweep_on(&f, &base, &[("gamma".into(), vec![])]).is_err());
        assert!(sweep_on(&f, &base, &[("bogus".into(), vec!["1".into()])]).is_err());
    }

    #[test]
    fn canonical_order_sorts_by_optimizer() {
        let specs = toy_specs(ToyFunction::F1, &["sgdm", "adam", "hvadam"]);
        let order: Vec<&str> = canonical_order(&specs).iter().map(|&i| specs[i].optimizer.id()).collect();
        assert_eq!(order, vec!["adam", "hvadam", "sgdm"]);
    }

    #[test]
    fn overrides_respect_scope() {
        let mut specs = toy_specs(ToyFunction::F2, &["hvadam", "adam", "sgdm"]);
        let pairs = |items: &[(&str, &str)]| -> Vec<(String, String)> {
            items.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect()
        };
        apply_overrides(&mut specs, &pairs(&[("steps", "9"), ("gamma", "1"), ("adam.lr", "0.01"), ("momentum", "0.5")])).unwrap();
        assert!(specs.iter().all(|s| s.steps == 9));
        match (&specs[0].optimizer, &specs[1].optimizer, &specs[2].optimizer) {
            (OptimizerSpec::HVAdam(h), OptimizerSpec::Adam(a), OptimizerSpec::Sgdm(g)) => {
                assert_eq!(h.gamma, 1.0);
                assert_eq!(h.alpha1, 1e-3);
                assert_eq!(a.alpha1, 0.01);
                assert_eq!(g.momentum, 0.5);
            }
            _ => unreachable!(),
        }
        // scoped to an optimizer that is not selected: accepted, no effect
        apply_overrides(&mut specs, &pairs(&[("adabelief.lr", "0.5")])).unwrap();
        assert!(apply_overrides(&mut specs, &pairs(&[("bogus", "1")])).is_err());
        assert!(apply_overrides(&mut specs, &pairs(&[("adam.gamma", "1")])).is_err());
        assert!(apply_overrides(&mut specs, &pairs(&[("adabelief.gamma", "1")])).is_err());
        assert!(apply_overrides(&mut specs, &pairs(&[("nadam.lr", "1")])).is_err());
        assert!(apply_overrides(&mut specs, &pairs(&[("gamma", "x")])).is_err());
    }
}

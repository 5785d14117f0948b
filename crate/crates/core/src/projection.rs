//! Axis-aligned feasible boxes and the metric-weighted projection onto them.

use serde::{Deserialize, Serialize};

use crate::error::{OptError, Result};
use crate::vector::ParamVector;

/// A box `lo <= x <= hi`, checked elementwise.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoxConstraint {
    lo: ParamVector,
    hi: ParamVector,
}

impl BoxConstraint {
    pub fn new(lo: ParamVector, hi: ParamVector) -> Result<Self> {
        lo.check_dim(&hi)?;
        for (i, (l, h)) in lo.iter().zip(hi.iter()).enumerate() {
            if l.is_nan() || h.is_nan() || l > h {
                return Err(OptError::InvalidBox(format!(
                    "lo[{i}] = {l} exceeds hi[{i}] = {h}"
                )));
            }
        }
        Ok(BoxConstraint { lo, hi })
    }

    /// The cube `[lo, hi]^dim`.
    pub fn uniform(dim: usize, lo: f64, hi: f64) -> Result<Self> {
        Self::new(ParamVector::filled(dim, lo), ParamVector::filled(dim, hi))
    }

    pub fn lo(&self) -> &ParamVector {
        &self.lo
    }

    pub fn hi(&self) -> &ParamVector {
        &self.hi
    }

    pub fn dim(&self) -> usize {
        self.lo.dim()
    }

    pub fn contains(&self, x: &ParamVector) -> bool {
        x.dim() == self.dim()
            && x
                .iter()
                .zip(self.lo.iter().zip(self.hi.iter()))
                .all(|(v, (l, h))| l <= v && v <= h)
    }
}

/// `argmin_{x in box} ||diag(metric)^{1/2} (x - y)||`.
///
/// With a diagonal positive metric and an axis-aligned box the objective
/// separates per coordinate, so the minimizer is the clamp of `y` whatever
/// the metric values are. Without a box this is the identity.
pub fn project(
    y: &ParamVector,
    feasible: Option<&BoxConstraint>,
    metric_diag: &ParamVector,
) -> Result<ParamVector> {
    let Some(b) = feasible else {
        return Ok(y.clone());
    };
    y.check_dim(metric_diag)?;
    if let Some(i) = metric_diag.iter().position(|&w| !(w > 0.0) || !w.is_finite()) {
        return Err(OptError::InvalidBox(format!(
            "projection metric entry {i} is not positive"
        )));
    }
    y.clamp(b.lo(), b.hi())
}

//! Lower-confidence-bound acquisition functions over a federation of
//! surrogates.
//!
//! The server never sees client data, so predictive uncertainty is taken
//! from the disagreement between the uploaded local models and the
//! aggregated global model.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::aggregation::ClientWeights;
use crate::error::{Error, Result};
use crate::surrogate::RbfnParams;

/// Default exploration coefficient.
pub const DEFAULT_MU: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AcquisitionKind {
    /// Mean of local and global predictions, spread over all of them.
    #[default]
    Flcb,
    /// Weighted local mean, spread of the locals around it.
    Llcb,
    /// Global prediction, spread of the locals around it.
    Glcb,
}

impl AcquisitionKind {
    pub const ALL: [AcquisitionKind; 3] = [AcquisitionKind::Flcb, AcquisitionKind::Llcb, AcquisitionKind::Glcb];
}

impl fmt::Display for AcquisitionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AcquisitionKind::Flcb => "flcb",
            AcquisitionKind::Llcb => "llcb",
            AcquisitionKind::Glcb => "glcb",
        })
    }
}

impl FromStr for AcquisitionKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "flcb" => Ok(AcquisitionKind::Flcb),
            "llcb" => Ok(AcquisitionKind::Llcb),
            "glcb" => Ok(AcquisitionKind::Glcb),
            _ => Err(Error::invalid(format!("unknown acquisition `{s}` (expected flcb | llcb | glcb)"))),
        }
    }
}

/// Predicted mean and variance at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub mean: f64,
    pub variance: f64,
}

impl Estimate {
    pub fn lcb(self, mu: f64) -> f64 {
        self.mean - mu * self.variance.sqrt()
    }
}

#[derive(Debug, Clone)]
pub struct AcquisitionContext {
    global: RbfnParams,
    locals: Vec<RbfnParams>,
    weights: ClientWeights,
    mu: f64,
}

impl AcquisitionContext {
    pub fn new(global: RbfnParams, locals: Vec<RbfnParams>, weights: ClientWeights, mu: f64) -> Result<Self> {
        if locals.is_empty() {
            return Err(Error::invalid("acquisition needs at least one local model"));
        }
        if locals.len() != weights.len() {
            return Err(Error::invalid(format!("{} local models but {} weights", locals.len(), weights.len())));
        }
        if let Some(w) = locals.iter().find(|w| w.dim() != global.dim()) {
            return Err(Error::invalid(format!(
                "local model dimension {} differs from global dimension {}",
                w.dim(),
                global.dim()
            )));
        }
        if !(mu >= 0.0) || !mu.is_finite() {
            return Err(Error::invalid(format!("trade-off coefficient must be finite and >= 0, got {mu}")));
        }
        Ok(AcquisitionContext { global, locals, weights, mu })
    }

    pub fn dim(&self) -> usize {
        self.global.dim()
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn with_mu(&self, mu: f64) -> Result<Self> {
        AcquisitionContext::new(self.global.clone(), self.locals.clone(), self.weights.clone(), mu)
    }

    pub fn global(&self) -> &RbfnParams {
        &self.global
    }

    pub fn locals(&self) -> &[RbfnParams] {
        &self.locals
    }

    fn check(&self, kind: AcquisitionKind, x: &[f64]) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::invalid(format!(
                "candidate has {} values, models have dimension {}",
                x.len(),
                self.dim()
            )));
        }
        if kind != AcquisitionKind::Flcb && self.locals.len() < 2 {
            return Err(Error::invalid(format!("{kind} needs at least two local models, got {}", self.locals.len())));
        }
        Ok(())
    }

    /// Ensure `kind` is usable with this context for candidates of dimension `dim`.
    pub fn validate(&self, kind: AcquisitionKind, dim: usize) -> Result<()> {
        self.check(kind, &vec![0.0; dim])
    }

    pub fn estimate(&self, kind: AcquisitionKind, x: &[f64]) -> Result<Estimate> {
        self.check(kind, x)?;
        Ok(self.estimate_unchecked(kind, x))
    }

    pub fn score(&self, kind: AcquisitionKind, x: &[f64]) -> Result<f64> {
        Ok(self.estimate(kind, x)?.lcb(self.mu))
    }

    pub(crate) fn score_unchecked(&self, kind: AcquisitionKind, x: &[f64]) -> f64 {
        self.estimate_unchecked(kind, x).lcb(self.mu)
    }

    fn estimate_unchecked(&self, kind: AcquisitionKind, x: &[f64]) -> Estimate {
        let mut local = [0.0f64; 16];
        let mut spill;
        let preds: &mut [f64] = if self.locals.len() <= local.len() {
            &mut local[..self.locals.len()]
        } else {
            spill = vec![0.0; self.locals.len()];
            &mut spill
        };
        for (p, w) in preds.iter_mut().zip(&self.locals) {
            *p = w.predict_unchecked(x);
        }
        let local_mean: f64 = preds.iter().zip(self.weights.as_slice()).map(|(f, p)| p * f).sum();
        let n = preds.len() as f64;
        let sq_dev = |center: f64| preds.iter().map(|f| (f - center) * (f - center)).sum::<f64>();

        match kind {
            AcquisitionKind::Flcb => {
                let fed = self.global.predict_unchecked(x);
                let mean = 0.5 * (local_mean + fed);
                let variance = (sq_dev(mean) + (fed - mean) * (fed - mean)) / n;
                Estimate { mean, variance }
            }
            AcquisitionKind::Llcb => Estimate { mean: local_mean, variance: sq_dev(local_mean) / (n - 1.0) },
            AcquisitionKind::Glcb => {
                let fed = self.global.predict_unchecked(x);
                Estimate { mean: fed, variance: sq_dev(fed) / (n - 1.0) }
            }
        }
    }

    pub fn f_lcb(&self, x: &[f64]) -> Result<f64> {
        self.score(AcquisitionKind::Flcb, x)
    }

    pub fn l_lcb(&self, x: &[f64]) -> Result<f64> {
        self.score(AcquisitionKind::Llcb, x)
    }

    pub fn g_lcb(&self, x: &[f64]) -> Result<f64> {
        self.score(AcquisitionKind::Glcb, x)
    }
}

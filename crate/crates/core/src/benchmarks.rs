//! Expensive benchmark objectives and the per-client data regimes built on
//! top of them (additive Gaussian noise, infeasible sampling domains).

use std::f64::consts::{E, PI};
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The five benchmark problems. Every one of them has global optimum 0.0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProblemId {
    Ellipsoid,
    Ackley,
    Rastrigin,
    Griewank,
    Rosenbrock,
}

impl ProblemId {
    pub const ALL: [ProblemId; 5] =
        [ProblemId::Ellipsoid, ProblemId::Ackley, ProblemId::Rastrigin, ProblemId::Griewank, ProblemId::Rosenbrock];

    pub fn name(self) -> &'static str {
        match self {
            ProblemId::Ellipsoid => "ellipsoid",
            ProblemId::Ackley => "ackley",
            ProblemId::Rastrigin => "rastrigin",
            ProblemId::Griewank => "griewank",
            ProblemId::Rosenbrock => "rosenbrock",
        }
    }

    /// The per-dimension search interval shared by every coordinate.
    pub fn interval(self) -> (f64, f64) {
        match self {
            ProblemId::Ellipsoid | ProblemId::Rastrigin => (-5.12, 5.12),
            ProblemId::Ackley => (-32.768, 32.768),
            ProblemId::Griewank => (-600.0, 600.0),
            ProblemId::Rosenbrock => (-2.048, 2.048),
        }
    }

    pub fn bounds(self, dim: usize) -> Bounds {
        let (lo, hi) = self.interval();
        Bounds::uniform(lo, hi, dim).expect("problem intervals are non-empty")
    }

    /// Location of the global minimizer in `dim` dimensions.
    pub fn optimum(self, dim: usize) -> Vec<f64> {
        match self {
            ProblemId::Rosenbrock => vec![1.0; dim],
            _ => vec![0.0; dim],
        }
    }
}

impl fmt::Display for ProblemId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ProblemId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let lower = s.trim().to_ascii_lowercase();
        ProblemId::ALL
            .into_iter()
            .find(|p| p.name() == lower)
            .ok_or_else(|| Error::invalid(format!("unknown problem `{s}`")))
    }
}

/// Axis-aligned box `lower[i] <= x[i] <= upper[i]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl Bounds {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.is_empty() {
            return Err(Error::invalid("bounds must have at least one dimension"));
        }
        if lower.len() != upper.len() {
            return Err(Error::invalid(format!(
                "bounds length mismatch: {} lower vs {} upper",
                lower.len(),
                upper.len()
            )));
        }
        if let Some(i) = (0..lower.len()).find(|&i| !(lower[i] < upper[i])) {
            return Err(Error::invalid(format!("empty interval in dimension {i}: [{}, {}]", lower[i], upper[i])));
        }
        Ok(Bounds { lower, upper })
    }

    pub fn uniform(lower: f64, upper: f64, dim: usize) -> Result<Self> {
        Bounds::new(vec![lower; dim], vec![upper; dim])
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn width(&self, i: usize) -> f64 {
        self.upper[i] - self.lower[i]
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim()
            && x.iter().zip(self.lower.iter().zip(&self.upper)).all(|(&v, (&lo, &hi))| lo <= v && v <= hi)
    }

    pub fn clip(&self, i: usize, v: f64) -> f64 {
        v.clamp(self.lower[i], self.upper[i])
    }
}

/// Additive Gaussian noise level `alpha` in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct NoiseSpec(f64);

impl NoiseSpec {
    pub const NONE: NoiseSpec = NoiseSpec(0.0);

    pub fn new(alpha: f64) -> Result<Self> {
        if (0.0..=1.0).contains(&alpha) {
            Ok(NoiseSpec(alpha))
        } else {
            Err(Error::invalid(format!("noise level {alpha} outside [0, 1]")))
        }
    }

    pub fn alpha(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for NoiseSpec {
    type Error = Error;

    fn try_from(alpha: f64) -> Result<Self> {
        NoiseSpec::new(alpha)
    }
}

impl From<NoiseSpec> for f64 {
    fn from(n: NoiseSpec) -> f64 {
        n.0
    }
}

/// Noiseless objective value. Rejects empty and out-of-box inputs.
pub fn evaluate(problem: ProblemId, x: &[f64]) -> Result<f64> {
    if x.is_empty() {
        return Err(Error::invalid("objective needs at least one dimension"));
    }
    let (lo, hi) = problem.interval();
    if let Some(i) = x.iter().position(|v| !(lo <= *v && *v <= hi)) {
        return Err(Error::invalid(format!("{problem}: coordinate {i} = {} outside [{lo}, {hi}]", x[i])));
    }
    Ok(objective(problem, x))
}

/// Objective value without the bounds check.
pub(crate) fn objective(problem: ProblemId, x: &[f64]) -> f64 {
    match problem {
        ProblemId::Ellipsoid => x.iter().enumerate().map(|(i, v)| (i + 1) as f64 * v * v).sum(),
        ProblemId::Ackley => {
            let d = x.len() as f64;
            let sq = x.iter().map(|v| v * v).sum::<f64>() / d;
            let cs = x.iter().map(|v| (2.0 * PI * v).cos()).sum::<f64>() / d;
            // Grouped so the zero vector yields exactly 0.0.
            20.0 * (1.0 - (-0.2 * sq.sqrt()).exp()) + (E - cs.exp())
        }
        ProblemId::Rastrigin => x.iter().map(|v| v * v - 10.0 * (2.0 * PI * v).cos() + 10.0).sum(),
        ProblemId::Griewank => {
            let sum = x.iter().map(|v| v * v).sum::<f64>() / 4000.0;
            let prod = x.iter().enumerate().map(|(i, v)| (v / ((i + 1) as f64).sqrt()).cos()).product::<f64>();
            1.0 + sum - prod
        }
        ProblemId::Rosenbrock => {
            x.windows(2).map(|w| 100.0 * (w[1] - w[0] * w[0]).powi(2) + (1.0 - w[0]).powi(2)).sum()
        }
    }
}

/// `evaluate(problem, x) + alpha * xi` with `xi ~ N(0, 1)` drawn from `rng`.
///
/// One normal draw is consumed per call, even when `alpha == 0`, so the
/// stream position does not depend on the noise level.
pub fn evaluate_noisy<R: Rng + ?Sized>(problem: ProblemId, x: &[f64], noise: NoiseSpec, rng: &mut R) -> Result<f64> {
    let clean = evaluate(problem, x)?;
    let xi: f64 = rng.sample(StandardNormal);
    if noise.0 == 0.0 {
        Ok(clean)
    } else {
        Ok(clean + noise.0 * xi)
    }
}

/// The closed interval of the designated dimension in which client `k`
/// (1-based) cannot sample, or `None` when `tau == 0`.
pub fn infeasible_interval(k: usize, tau: usize, n_clients: usize, b: &Bounds, dim: usize) -> Option<(f64, f64)> {
    if tau == 0 {
        return None;
    }
    let (lb, ub) = (b.lower()[dim], b.upper()[dim]);
    let gap = (ub - lb) / n_clients as f64;
    let lo = lb + (k - 1) as f64 * gap;
    let end = k + tau - 1;
    let hi = if end >= n_clients { ub } else { (lb + end as f64 * gap).min(ub) };
    Some((lo, hi))
}

/// Whether client `k` (1-based, out of `n_clients`) can sample `x`.
pub fn is_feasible(k: usize, tau: usize, x: &[f64], n_clients: usize, b: &Bounds, dim: usize) -> bool {
    match infeasible_interval(k, tau, n_clients, b, dim) {
        None => true,
        Some((lo, hi)) => !(lo <= x[dim] && x[dim] <= hi),
    }
}

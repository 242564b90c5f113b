//! Experiment configuration and its validation.

use serde::{Deserialize, Serialize};

use crate::acquisition::{AcquisitionKind, DEFAULT_MU};
use crate::aggregation::Aggregator;
use crate::benchmarks::{NoiseSpec, ProblemId};
use crate::error::{Error, Result};
use crate::evolution::GaConfig;
use crate::surrogate::TrainingSpace;

/// Everything needed to reproduce an experiment, apart from the code.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub problem: ProblemId,
    pub dim: usize,
    /// Total number of clients `N`.
    pub clients: usize,
    /// Fraction of clients taking part in each round.
    pub participation: f64,
    /// Local training epochs per round.
    pub epochs: usize,
    pub learning_rate: f64,
    /// Coordinates in which local gradient steps are taken.
    pub training_space: TrainingSpace,
    /// RBF nodes per surrogate.
    pub nodes: usize,
    pub mu: f64,
    /// Width of each client's infeasible domain, in units of `range / N`.
    pub tau: usize,
    /// Dimension inspected by the feasibility test.
    pub feasible_dim: usize,
    pub alpha: NoiseSpec,
    pub acquisition: AcquisitionKind,
    pub aggregator: Aggregator,
    pub ga: GaConfig,
    pub runs: usize,
    pub master_seed: u64,
}

impl ExperimentConfig {
    pub fn new(problem: ProblemId, dim: usize) -> Self {
        ExperimentConfig {
            problem,
            dim,
            clients: 100,
            participation: 0.1,
            epochs: 20,
            learning_rate: 0.12,
            training_space: TrainingSpace::Standardized,
            nodes: 2 * dim + 1,
            mu: DEFAULT_MU,
            tau: 0,
            feasible_dim: 0,
            alpha: NoiseSpec::NONE,
            acquisition: AcquisitionKind::Flcb,
            aggregator: Aggregator::Sorted,
            ga: GaConfig::for_dim(dim),
            runs: 20,
            master_seed: 42,
        }
    }

    /// Number of clients selected per round, `round(participation * clients)`.
    pub fn participants(&self) -> usize {
        (self.participation * self.clients as f64).round() as usize
    }

    /// Size of the initial Latin hypercube design.
    pub fn initial_samples(&self) -> usize {
        5 * self.dim
    }

    /// Total fitness-evaluation budget, initial design included.
    pub fn budget(&self) -> usize {
        11 * self.dim
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::invalid(msg));
        if self.dim == 0 {
            return bad("dimension must be >= 1".into());
        }
        if self.clients == 0 {
            return bad("at least one client is required".into());
        }
        if !(self.participation > 0.0 && self.participation <= 1.0) {
            return bad(format!("participation ratio {} outside (0, 1]", self.participation));
        }
        if self.participants() == 0 {
            return bad(format!("participation {} of {} clients selects nobody", self.participation, self.clients));
        }
        if !(self.learning_rate > 0.0) || !self.learning_rate.is_finite() {
            return bad(format!("learning rate must be positive, got {}", self.learning_rate));
        }
        if self.nodes == 0 || self.nodes > self.initial_samples() {
            return bad(format!(
                "node count {} must lie in [1, {}] (the initial design size)",
                self.nodes,
                self.initial_samples()
            ));
        }
        if !(self.mu >= 0.0) || !self.mu.is_finite() {
            return bad(format!("mu must be finite and >= 0, got {}", self.mu));
        }
        if self.feasible_dim >= self.dim {
            return bad(format!("feasibility dimension {} out of range for d = {}", self.feasible_dim, self.dim));
        }
        if self.acquisition != AcquisitionKind::Flcb && self.participants() < 2 {
            return bad(format!("{} needs at least two participants per round", self.acquisition));
        }
        self.ga.validate()?;
        if self.runs == 0 {
            return bad("runs must be >= 1".into());
        }
        Ok(())
    }
}

/// Optional overrides applied on top of [`ExperimentConfig::new`]. Used by
/// the CLI flags and by sweep files, so both accept the same keys.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Settings {
    pub problem: Option<ProblemId>,
    pub dim: Option<usize>,
    pub clients: Option<usize>,
    pub lambda: Option<f64>,
    pub epochs: Option<usize>,
    pub lr: Option<f64>,
    pub train_space: Option<TrainingSpace>,
    pub nodes: Option<usize>,
    pub mu: Option<f64>,
    pub tau: Option<usize>,
    pub feasible_dim: Option<usize>,
    pub alpha: Option<f64>,
    pub acq: Option<AcquisitionKind>,
    pub agg: Option<Aggregator>,
    pub runs: Option<usize>,
    pub seed: Option<u64>,
    pub population: Option<usize>,
    pub generations: Option<usize>,
    pub crossover_prob: Option<f64>,
    pub mutation_prob: Option<f64>,
    pub eta_c: Option<f64>,
    pub eta_m: Option<f64>,
    pub tournament: Option<usize>,
}

impl Settings {
    /// Fields set in `other` replace those in `self`.
    pub fn merged(&self, other: &Settings) -> Settings {
        macro_rules! pick {
            ($($f:ident),*) => { Settings { $($f: other.$f.clone().or_else(|| self.$f.clone()),)* } };
        }
        pick!(
            problem,
            dim,
            clients,
            lambda,
            epochs,
            lr,
            train_space,
            nodes,
            mu,
            tau,
            feasible_dim,
            alpha,
            acq,
            agg,
            runs,
            seed,
            population,
            generations,
            crossover_prob,
            mutation_prob,
            eta_c,
            eta_m,
            tournament
        )
    }

    pub fn to_config(&self) -> Result<ExperimentConfig> {
        let problem = self.problem.ok_or_else(|| Error::Config("`problem` is required".into()))?;
        let dim = self.dim.ok_or_else(|| Error::Config("`dim` is required".into()))?;
        let mut cfg = ExperimentConfig::new(problem, dim);
        macro_rules! set {
            ($($src:ident => $($dst:ident).+),* $(,)?) => { $(if let Some(v) = self.$src { cfg.$($dst).+ = v; })* };
        }
        set!(
            clients => clients, lambda => participation, epochs => epochs, lr => learning_rate,
            train_space => training_space,            nodes => nodes, mu => mu, tau => tau, feasible_dim => feasible_dim, acq => acquisition,
            agg => aggregator, runs => runs, seed => master_seed, population => ga.population_size,
            generations => ga.generations, crossover_prob => ga.crossover_prob,
            mutation_prob => ga.mutation_prob, eta_c => ga.eta_c, eta_m => ga.eta_m,
            tournament => ga.tournament_size,
        );
        if let Some(alpha) = self.alpha {
            cfg.alpha = NoiseSpec::new(alpha)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_follow_reference_settings() {
        let cfg = ExperimentConfig::new(ProblemId::Ellipsoid, 10);
        assert_eq!(cfg.clients, 100);
        assert_eq!(cfg.participants(), 10);
        assert_eq!(cfg.epochs, 20);
        assert_eq!(cfg.learning_rate, 0.12);
        assert_eq!(cfg.nodes, 21);
        assert_eq!(cfg.ga.generations, 100);
        assert_eq!(cfg.mu, 2.0);
        assert_eq!(cfg.initial_samples(), 50);
        assert_eq!(cfg.budget(), 110);
        assert!(cfg.validate().is_ok());
    }

    #[test]
    fn rejects_inconsistent_configs() {
        let base = ExperimentConfig::new(ProblemId::Ackley, 4);
        let cases = [
            ExperimentConfig { dim: 0, ..base.clone() },
            ExperimentConfig { clients: 0, ..base.clone() },
            ExperimentConfig { participation: 0.0, ..base.clone() },
            ExperimentConfig { participation: 1.5, ..base.clone() },
            ExperimentConfig { participation: 0.001, ..base.clone() },
            ExperimentConfig { learning_rate: 0.0, ..base.clone() },
            ExperimentConfig { nodes: 21, ..base.clone() },
            ExperimentConfig { feasible_dim: 4, ..base.clone() },
            ExperimentConfig { runs: 0, ..base.clone() },
            ExperimentConfig { clients: 1, participation: 1.0, acquisition: AcquisitionKind::Llcb, ..base.clone() },
        ];
        for cfg in cases {
            assert!(cfg.validate().is_err(), "{cfg:?}");
        }
    }

    #[test]
    fn settings_override_defaults() {
        let s = Settings {
            problem: Some(ProblemId::Rastrigin),
            dim: Some(5),
            lambda: Some(0.2),
            alpha: Some(0.5),
            generations: Some(10),
            ..Settings::default()
        };
        let cfg = s.to_config().unwrap();
        assert_eq!(cfg.participation, 0.2);
        assert_eq!(cfg.alpha.alpha(), 0.5);
        assert_eq!(cfg.ga.generations, 10);
        assert_eq!(cfg.nodes, 11);
        assert_eq!(cfg.training_space, TrainingSpace::Standardized);
        let raw = Settings { train_space: Some(TrainingSpace::Raw), ..s.clone() }.to_config().unwrap();
        assert_eq!(raw.training_space, TrainingSpace::Raw);
        assert!(Settings { alpha: Some(2.0), ..s.clone() }.to_config().is_err());
        assert!(Settings { problem: None, ..s.clone() }.to_config().is_err());

        let over = Settings { dim: Some(7), ..Settings::default() };
        let merged = s.merged(&over);
        assert_eq!(merged.dim, Some(7));
        assert_eq!(merged.lambda, Some(0.2));
    }
}

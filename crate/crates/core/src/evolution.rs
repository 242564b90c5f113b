//! Real-coded genetic algorithm: tournament selection, simulated binary
//! crossover, polynomial mutation, and single-elite generational
//! replacement.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::benchmarks::Bounds;
use crate::error::{Error, Result};
use crate::exec::Execution;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaConfig {
    pub population_size: usize,
    pub generations: usize,
    pub crossover_prob: f64,
    /// Per-gene mutation probability.
    pub mutation_prob: f64,
    pub eta_c: f64,
    pub eta_m: f64,
    pub tournament_size: usize,
}

impl GaConfig {
    /// Defaults for a `dim`-dimensional search (mutation probability `1/dim`).
    pub fn for_dim(dim: usize) -> Self {
        GaConfig {
            population_size: 50,
            generations: 100,
            crossover_prob: 0.9,
            mutation_prob: 1.0 / dim.max(1) as f64,
            eta_c: 15.0,
            eta_m: 15.0,
            tournament_size: 2,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.population_size < 4 || !self.population_size.is_multiple_of(2) {
            return Err(Error::invalid(format!("population size must be even and >= 4, got {}", self.population_size)));
        }
        if self.generations == 0 {
            return Err(Error::invalid("at least one generation is required"));
        }
        for (name, p) in [("crossover", self.crossover_prob), ("mutation", self.mutation_prob)] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::invalid(format!("{name} probability {p} outside [0, 1]")));
            }
        }
        if !(self.eta_c > 0.0) || !(self.eta_m > 0.0) {
            return Err(Error::invalid("distribution indices must be positive"));
        }
        if self.tournament_size == 0 {
            return Err(Error::invalid("tournament size must be >= 1"));
        }
        Ok(())
    }
}

/// SBX spread factor for a uniform draw `u` in `[0, 1)`.
pub fn sbx_beta(u: f64, eta_c: f64) -> f64 {
    let e = 1.0 / (eta_c + 1.0);
    if u <= 0.5 {
        (2.0 * u).powf(e)
    } else {
        (1.0 / (2.0 * (1.0 - u))).powf(e)
    }
}

/// SBX children before clipping. Children are symmetric about the parents'
/// midpoint in every coordinate.
pub fn sbx_unclipped<R: Rng + ?Sized>(p1: &[f64], p2: &[f64], eta_c: f64, rng: &mut R) -> (Vec<f64>, Vec<f64>) {
    let mut c1 = Vec::with_capacity(p1.len());
    let mut c2 = Vec::with_capacity(p1.len());
    for (&a, &b) in p1.iter().zip(p2) {
        let beta = sbx_beta(rng.random::<f64>(), eta_c);
        c1.push(0.5 * ((1.0 + beta) * a + (1.0 - beta) * b));
        c2.push(0.5 * ((1.0 - beta) * a + (1.0 + beta) * b));
    }
    (c1, c2)
}

pub fn sbx_crossover<R: Rng + ?Sized>(
    p1: &[f64],
    p2: &[f64],
    eta_c: f64,
    b: &Bounds,
    rng: &mut R,
) -> (Vec<f64>, Vec<f64>) {
    let (mut c1, mut c2) = sbx_unclipped(p1, p2, eta_c, rng);
    for i in 0..c1.len() {
        c1[i] = b.clip(i, c1[i]);
        c2[i] = b.clip(i, c2[i]);
    }
    (c1, c2)
}

/// Polynomial perturbation (as a fraction of the range) for a uniform draw `u`.
pub fn mutation_delta(u: f64, eta_m: f64) -> f64 {
    let e = 1.0 / (eta_m + 1.0);
    if u < 0.5 {
        (2.0 * u).powf(e) - 1.0
    } else {
        1.0 - (2.0 * (1.0 - u)).powf(e)
    }
}

pub fn polynomial_mutation<R: Rng + ?Sized>(x: &[f64], eta_m: f64, pm: f64, b: &Bounds, rng: &mut R) -> Vec<f64> {
    x.iter()
        .enumerate()
        .map(|(i, &v)| {
            if pm > 0.0 && rng.random::<f64>() < pm {
                let delta = mutation_delta(rng.random::<f64>(), eta_m);
                b.clip(i, v + delta * b.width(i))
            } else {
                v
            }
        })
        .collect()
}

/// Index of the lowest-fitness individual among `k` entrants drawn
/// uniformly with replacement. Ties go to the first entrant drawn.
pub fn tournament_select<R: Rng + ?Sized>(fitness: &[f64], k: usize, rng: &mut R) -> usize {
    let mut best = rng.random_range(0..fitness.len());
    for _ in 1..k {
        let c = rng.random_range(0..fitness.len());
        if fitness[c] < fitness[best] {
            best = c;
        }
    }
    best
}

#[derive(Debug, Clone, PartialEq)]
pub struct GaOutcome {
    pub best_x: Vec<f64>,
    pub best_score: f64,
    /// Best-ever score after the initial population and after each generation.
    pub history: Vec<f64>,
    pub evaluations: usize,
}

fn score_all<F>(objective: &F, pop: &[Vec<f64>], exec: Execution) -> Result<Vec<f64>>
where
    F: Fn(&[f64]) -> f64 + Sync + Send,
{
    let scores = exec.map(pop, |x| objective(x));
    if let Some(i) = scores.iter().position(|s| !s.is_finite()) {
        return Err(Error::NonFiniteObjective { point: pop[i].clone(), value: scores[i] });
    }
    Ok(scores)
}

fn argmin(v: &[f64]) -> usize {
    (0..v.len()).fold(0, |a, i| if v[i] < v[a] { i } else { a })
}

/// Minimize `objective` over `b`.
///
/// All random draws happen outside objective evaluation, so the result is
/// the same for every [`Execution`] mode.
pub fn minimize<F, R>(objective: F, b: &Bounds, cfg: &GaConfig, rng: &mut R, exec: Execution) -> Result<GaOutcome>
where
    F: Fn(&[f64]) -> f64 + Sync + Send,
    R: Rng + ?Sized,
{
    cfg.validate()?;
    let d = b.dim();
    let n = cfg.population_size;
    let mut pop: Vec<Vec<f64>> =
        (0..n).map(|_| (0..d).map(|i| rng.random_range(b.lower()[i]..=b.upper()[i])).collect()).collect();
    let mut scores = score_all(&objective, &pop, exec)?;
    let mut evaluations = n;
    let i = argmin(&scores);
    let (mut best_x, mut best_score) = (pop[i].clone(), scores[i]);
    let mut history = Vec::with_capacity(cfg.generations + 1);
    history.push(best_score);

    for _ in 0..cfg.generations {
        let mut offspring = Vec::with_capacity(n);
        while offspring.len() < n {
            let a = tournament_select(&scores, cfg.tournament_size, rng);
            let c = tournament_select(&scores, cfg.tournament_size, rng);
            let (c1, c2) = if rng.random::<f64>() < cfg.crossover_prob {
                sbx_crossover(&pop[a], &pop[c], cfg.eta_c, b, rng)
            } else {
                (pop[a].clone(), pop[c].clone())
            };
            offspring.push(polynomial_mutation(&c1, cfg.eta_m, cfg.mutation_prob, b, rng));
            offspring.push(polynomial_mutation(&c2, cfg.eta_m, cfg.mutation_prob, b, rng));
        }
        let mut next_scores = score_all(&objective, &offspring, exec)?;
        evaluations += n;

        let worst = (0..n).fold(0, |w, i| if next_scores[i] > next_scores[w] { i } else { w });
        if best_score < next_scores[worst] {
            offspring[worst] = best_x.clone();
            next_scores[worst] = best_score;
        }
        pop = offspring;
        scores = next_scores;

        let i = argmin(&scores);
        if scores[i] < best_score {
            best_score = scores[i];
            best_x = pop[i].clone();
        }
        history.push(best_score);
    }
    Ok(GaOutcome { best_x, best_score, history, evaluations })
}

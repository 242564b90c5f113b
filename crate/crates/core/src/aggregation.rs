//! Server-side aggregation of uploaded surrogates.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::surrogate::RbfnParams;

/// Per-client aggregation weights `n_k / sum(n)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ClientWeights(Vec<f64>);

impl ClientWeights {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

pub fn client_weights(counts: &[usize]) -> Result<ClientWeights> {
    if counts.is_empty() {
        return Err(Error::invalid("client weights need at least one client"));
    }
    if counts.contains(&0) {
        return Err(Error::invalid("every client must hold at least one sample"));
    }
    let total: usize = counts.iter().sum();
    Ok(ClientWeights(counts.iter().map(|&n| n as f64 / total as f64).collect()))
}

/// Squared norm of every center: `M_j = sum_i c_{j,i}^2`.
pub fn matching_metric(centers: &[f64], dim: usize) -> Vec<f64> {
    centers.chunks_exact(dim).map(|c| c.iter().map(|v| v * v).sum()).collect()
}

/// Node order by ascending matching metric; ties keep their original order.
pub fn sort_order(model: &RbfnParams) -> Vec<usize> {
    let metric = matching_metric(model.centers(), model.dim());
    let mut order: Vec<usize> = (0..metric.len()).collect();
    order.sort_by(|&a, &b| metric[a].total_cmp(&metric[b]));
    order
}

fn check_inputs(models: &[RbfnParams], p: &ClientWeights) -> Result<()> {
    let Some(first) = models.first() else {
        return Err(Error::invalid("nothing to aggregate"));
    };
    if models.len() != p.len() {
        return Err(Error::invalid(format!("{} models but {} weights", models.len(), p.len())));
    }
    if let Some(bad) = models.iter().find(|w| w.dim() != first.dim() || w.nodes() != first.nodes()) {
        return Err(Error::invalid(format!(
            "model shape mismatch: ({}, {}) vs ({}, {})",
            bad.nodes(),
            bad.dim(),
            first.nodes(),
            first.dim()
        )));
    }
    Ok(())
}

fn weighted_sum<'a>(
    models: impl Iterator<Item = &'a RbfnParams>,
    p: &ClientWeights,
    m: usize,
    d: usize,
) -> Result<RbfnParams> {
    let mut centers = vec![0.0; m * d];
    let mut weights = vec![0.0; m];
    let mut spreads = vec![0.0; m];
    let mut bias = 0.0;
    for (w, &pk) in models.zip(p.as_slice()) {
        for (acc, v) in centers.iter_mut().zip(w.centers()) {
            *acc += pk * v;
        }
        for (acc, v) in weights.iter_mut().zip(w.weights()) {
            *acc += pk * v;
        }
        for (acc, v) in spreads.iter_mut().zip(w.spreads()) {
            *acc += pk * v;
        }
        bias += pk * w.bias();
    }
    RbfnParams::new(d, centers, weights, spreads, bias)
}

/// Reorder each model's nodes by ascending matching metric, then average
/// node-wise with weights `p`.
pub fn sorted_average(models: &[RbfnParams], p: &ClientWeights) -> Result<RbfnParams> {
    check_inputs(models, p)?;
    let sorted = models.iter().map(|w| w.permute_nodes(&sort_order(w))).collect::<Result<Vec<_>>>()?;
    weighted_sum(sorted.iter(), p, models[0].nodes(), models[0].dim())
}

/// Plain node-index averaging (FedAvg) with weights `p`.
pub fn index_average(models: &[RbfnParams], p: &ClientWeights) -> Result<RbfnParams> {
    check_inputs(models, p)?;
    weighted_sum(models.iter(), p, models[0].nodes(), models[0].dim())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Aggregator {
    #[default]
    Sorted,
    Index,
}

impl Aggregator {
    pub fn aggregate(self, models: &[RbfnParams], p: &ClientWeights) -> Result<RbfnParams> {
        match self {
            Aggregator::Sorted => sorted_average(models, p),
            Aggregator::Index => index_average(models, p),
        }
    }
}

impl fmt::Display for Aggregator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Aggregator::Sorted => "sorted",
            Aggregator::Index => "index",
        })
    }
}

impl FromStr for Aggregator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "sorted" => Ok(Aggregator::Sorted),
            "index" => Ok(Aggregator::Index),
            _ => Err(Error::invalid(format!("unknown aggregator `{s}` (expected sorted | index)"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn model(centers: &[f64], weights: &[f64], spreads: &[f64], bias: f64) -> RbfnParams {
        let d = centers.len() / weights.len();
        RbfnParams::new(d, centers.to_vec(), weights.to_vec(), spreads.to_vec(), bias).unwrap()
    }

    #[test]
    fn weights_from_counts() {
        assert_eq!(client_weights(&[10, 30]).unwrap().as_slice(), &[0.25, 0.75]);
        assert_eq!(client_weights(&[7, 7, 7, 7]).unwrap().as_slice(), &[0.25; 4]);
        assert!(client_weights(&[]).is_err());
        assert!(client_weights(&[3, 0]).is_err());
    }

    #[test]
    fn metric_worked_examples() {
        assert_eq!(matching_metric(&[3.0, 4.0], 2), vec![25.0]);
        assert_eq!(matching_metric(&[0.0, 0.0, 0.0], 3), vec![0.0]);
        assert_eq!(matching_metric(&[1.0, 0.0, 0.0, 2.0], 2), vec![1.0, 4.0]);
    }

    #[test]
    fn ties_are_stable() {
        let w = model(&[1.0, 0.0, 0.0, 1.0, -1.0, 0.0, 0.5, 0.0], &[1.0, 2.0, 3.0, 4.0], &[1.0; 4], 0.0);
        assert_eq!(sort_order(&w), vec![3, 0, 1, 2]);
    }

    #[test]
    fn single_model_is_identity() {
        let w = model(&[0.1, 3.0, -2.0], &[1.0, -1.0, 0.5], &[0.4, 0.8, 1.2], 2.0);
        let p = client_weights(&[5]).unwrap();
        assert_eq!(sorted_average(std::slice::from_ref(&w), &p).unwrap(), w.permute_nodes(&sort_order(&w)).unwrap());
        assert_eq!(index_average(std::slice::from_ref(&w), &p).unwrap(), w);
        let sorted = w.permute_nodes(&sort_order(&w)).unwrap();
        assert_eq!(sorted_average(std::slice::from_ref(&sorted), &p).unwrap(), sorted);
    }

    #[test]
    fn one_node_models_average_arithmetically() {
        let a = model(&[1.0, 2.0], &[3.0], &[0.5], 1.0);
        let b = model(&[3.0, -2.0], &[-1.0], &[1.5], 5.0);
        let p = client_weights(&[4, 4]).unwrap();
        let avg = sorted_average(&[a, b], &p).unwrap();
        assert_eq!(avg.centers(), &[2.0, 0.0]);
        assert_eq!(avg.weights(), &[1.0]);
        assert_eq!(avg.spreads(), &[1.0]);
        assert_eq!(avg.bias(), 3.0);
    }

    #[test]
    fn shape_and_count_mismatch() {
        let a = model(&[1.0], &[1.0], &[1.0], 0.0);
        let b = model(&[1.0, 2.0], &[1.0, 1.0], &[1.0, 1.0], 0.0);
        let p2 = client_weights(&[1, 1]).unwrap();
        assert!(sorted_average(&[a.clone(), b], &p2).is_err());
        assert!(index_average(std::slice::from_ref(&a), &p2).is_err());
        assert!(sorted_average(&[], &p2).is_err());
    }

    #[test]
    fn already_sorted_models_agree() {
        let a = model(&[0.1, 1.0, 2.0], &[1.0, 2.0, 3.0], &[1.0; 3], 0.0);
        let b = model(&[-0.2, 1.1, -2.5], &[0.0, 1.0, 1.0], &[0.5; 3], 1.0);
        let p = client_weights(&[2, 3]).unwrap();
        assert_eq!(sorted_average(&[a.clone(), b.clone()], &p).unwrap(), index_average(&[a, b], &p).unwrap());
    }

    #[test]
    fn reversed_copy_differs_under_index_averaging() {
        let a = model(&[-2.0, 0.5, 3.0], &[1.0, -2.0, 4.0], &[0.5, 0.7, 0.9], 0.2);
        let b = a.permute_nodes(&[2, 1, 0]).unwrap();
        let p = client_weights(&[1, 1]).unwrap();
        let sorted = sorted_average(&[a.clone(), b.clone()], &p).unwrap();
        let indexed = index_average(&[a.clone(), b], &p).unwrap();
        assert_eq!(sorted, a.permute_nodes(&sort_order(&a)).unwrap());
        assert_ne!(sorted, indexed);
    }
}

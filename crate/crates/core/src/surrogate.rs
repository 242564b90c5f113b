//! Gaussian radial-basis-function network surrogates.
//!
//! A model predicts `sum_j a_j * exp(-|x - c_j|^2 / (2 s_j^2)) + b`. Centers
//! are seeded by k-means, spreads by the maximum inter-center distance, and
//! every parameter is then refined by full-batch gradient descent on the
//! mean squared error.

use std::fmt;
use std::str::FromStr;

use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Lower clip applied to spreads after every gradient step.
pub const MIN_SPREAD: f64 = 1e-6;

const KMEANS_MAX_ITERS: usize = 100;
const KMEANS_TOL: f64 = 1e-8;

/// Network parameters: `m` centers in `d` dimensions (row-major), one
/// weight and one spread per center, and a scalar bias.
#[derive(Debug, Clone, PartialEq)]
pub struct RbfnParams {
    dim: usize,
    centers: Vec<f64>,
    weights: Vec<f64>,
    spreads: Vec<f64>,
    bias: f64,
}

impl RbfnParams {
    pub fn new(dim: usize, centers: Vec<f64>, weights: Vec<f64>, spreads: Vec<f64>, bias: f64) -> Result<Self> {
        let m = weights.len();
        if dim == 0 || m == 0 {
            return Err(Error::invalid("a model needs d >= 1 and m >= 1"));
        }
        if centers.len() != m * dim || spreads.len() != m {
            return Err(Error::invalid(format!(
                "inconsistent model shape: {} center values, {} weights, {} spreads for d = {dim}",
                centers.len(),
                m,
                spreads.len()
            )));
        }
        if let Some(s) = spreads.iter().find(|s| !(**s > 0.0)) {
            return Err(Error::invalid(format!("spreads must be positive, got {s}")));
        }
        Ok(RbfnParams { dim, centers, weights, spreads, bias })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nodes(&self) -> usize {
        self.weights.len()
    }

    pub fn centers(&self) -> &[f64] {
        &self.centers
    }

    pub fn center(&self, j: usize) -> &[f64] {
        &self.centers[j * self.dim..(j + 1) * self.dim]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn spreads(&self) -> &[f64] {
        &self.spreads
    }

    pub fn bias(&self) -> f64 {
        self.bias
    }

    /// Reorder nodes so that node `i` of the result is node `order[i]` of `self`.
    pub fn permute_nodes(&self, order: &[usize]) -> Result<RbfnParams> {
        let m = self.nodes();
        let mut seen = vec![false; m];
        if order.len() != m || order.iter().any(|&j| j >= m || std::mem::replace(&mut seen[j], true)) {
            return Err(Error::invalid(format!("{order:?} is not a permutation of {m} nodes")));
        }
        Ok(RbfnParams {
            dim: self.dim,
            centers: order.iter().flat_map(|&j| self.center(j).iter().copied()).collect(),
            weights: order.iter().map(|&j| self.weights[j]).collect(),
            spreads: order.iter().map(|&j| self.spreads[j]).collect(),
            bias: self.bias,
        })
    }

    pub fn is_finite(&self) -> bool {
        self.centers
            .iter()
            .chain(&self.weights)
            .chain(&self.spreads)
            .chain(std::iter::once(&self.bias))
            .all(|v| v.is_finite())
    }

    /// All parameters as one flat vector in record order.
    pub fn values(&self) -> impl Iterator<Item = f64> + '_ {
        self.centers.iter().chain(&self.weights).chain(&self.spreads).copied().chain(std::iter::once(self.bias))
    }

    pub fn to_flat(&self) -> FlatModel {
        FlatModel { nodes: self.nodes(), dim: self.dim, values: self.values().collect() }
    }

    pub fn from_flat(flat: &FlatModel) -> Result<RbfnParams> {
        let (m, d) = (flat.nodes, flat.dim);
        if flat.values.len() != m * d + 2 * m + 1 {
            return Err(Error::invalid(format!(
                "flat record holds {} values, expected {} for m = {m}, d = {d}",
                flat.values.len(),
                m * d + 2 * m + 1
            )));
        }
        let v = &flat.values;
        RbfnParams::new(
            d,
            v[..m * d].to_vec(),
            v[m * d..m * d + m].to_vec(),
            v[m * d + m..m * d + 2 * m].to_vec(),
            v[m * d + 2 * m],
        )
    }

    #[inline]
    pub(crate) fn predict_unchecked(&self, x: &[f64]) -> f64 {
        let mut y = self.bias;
        for ((c, &a), &s) in self.centers.chunks_exact(self.dim).zip(&self.weights).zip(&self.spreads) {
            let r2 = sq_dist(x, c);
            y += a * (-r2 / (2.0 * s * s)).exp();
        }
        y
    }
}

/// Wire/debug form of a model: `centers (row-major) ++ weights ++ spreads ++ [bias]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlatModel {
    pub nodes: usize,
    pub dim: usize,
    pub values: Vec<f64>,
}

/// A client archive: `n` input rows with their observed fitness.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    dim: usize,
    inputs: Vec<f64>,
    targets: Vec<f64>,
}

impl Dataset {
    pub fn new(dim: usize, inputs: Vec<f64>, targets: Vec<f64>) -> Result<Self> {
        if dim == 0 || targets.is_empty() {
            return Err(Error::invalid("a dataset needs d >= 1 and at least one sample"));
        }
        if inputs.len() != dim * targets.len() {
            return Err(Error::invalid(format!(
                "{} input values do not form {} rows of dimension {dim}",
                inputs.len(),
                targets.len()
            )));
        }
        Ok(Dataset { dim, inputs, targets })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.targets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }

    pub fn inputs(&self) -> &[f64] {
        &self.inputs
    }

    pub fn input(&self, i: usize) -> &[f64] {
        &self.inputs[i * self.dim..(i + 1) * self.dim]
    }

    pub fn targets(&self) -> &[f64] {
        &self.targets
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[f64], f64)> + '_ {
        self.inputs.chunks_exact(self.dim).zip(self.targets.iter().copied())
    }

    pub fn push(&mut self, x: &[f64], y: f64) -> Result<()> {
        if x.len() != self.dim {
            return Err(Error::invalid(format!("sample has {} values, dataset dimension is {}", x.len(), self.dim)));
        }
        self.inputs.extend_from_slice(x);
        self.targets.push(y);
        Ok(())
    }
}

#[inline]
fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(u, v)| (u - v) * (u - v)).sum()
}

/// Lloyd's k-means over the rows of `points` (row-major, `dim` columns).
///
/// Centers start at `m` distinct rows sampled without replacement. Empty
/// clusters are re-seeded at the point farthest from its current center.
pub fn kmeans<R: Rng + ?Sized>(points: &[f64], dim: usize, m: usize, rng: &mut R) -> Result<Vec<f64>> {
    if dim == 0 || !points.len().is_multiple_of(dim) {
        return Err(Error::invalid(format!("{} values do not form rows of dimension {dim}", points.len())));
    }
    let n = points.len() / dim;
    if m == 0 || n < m {
        return Err(Error::invalid(format!("k-means needs 1 <= m <= n (got m = {m}, n = {n})")));
    }
    let row = |i: usize| &points[i * dim..(i + 1) * dim];
    let mut centers: Vec<f64> = index::sample(rng, n, m).into_iter().flat_map(|i| row(i).iter().copied()).collect();
    let mut assign = vec![0usize; n];
    let mut dist = vec![0.0f64; n];

    for _ in 0..KMEANS_MAX_ITERS {
        for i in 0..n {
            let (best, d2) = centers
                .chunks_exact(dim)
                .map(|c| sq_dist(row(i), c))
                .enumerate()
                .fold((0, f64::INFINITY), |acc, (j, d2)| if d2 < acc.1 { (j, d2) } else { acc });
            assign[i] = best;
            dist[i] = d2;
        }

        let mut sums = vec![0.0; m * dim];
        let mut counts = vec![0usize; m];
        for i in 0..n {
            counts[assign[i]] += 1;
            for (s, v) in sums[assign[i] * dim..(assign[i] + 1) * dim].iter_mut().zip(row(i)) {
                *s += v;
            }
        }
        for j in 0..m {
            if counts[j] == 0 {
                let far = (0..n).fold(0, |a, i| if dist[i] > dist[a] { i } else { a });
                dist[far] = 0.0;
                sums[j * dim..(j + 1) * dim].copy_from_slice(row(far));
                counts[j] = 1;
            }
        }

        let mut shift = 0.0f64;
        for j in 0..m {
            let inv = 1.0 / counts[j] as f64;
            let c = &mut centers[j * dim..(j + 1) * dim];
            let mut moved = 0.0;
            for (cv, s) in c.iter_mut().zip(&sums[j * dim..(j + 1) * dim]) {
                let next = s * inv;
                moved += (next - *cv) * (next - *cv);
                *cv = next;
            }
            shift = shift.max(moved.sqrt());
        }
        if shift < KMEANS_TOL {
            break;
        }
    }
    Ok(centers)
}

/// Common spread `d_max / sqrt(2m)` for every node, or 1.0 when no
/// positive inter-center distance exists.
pub fn compute_spreads(centers: &[f64], dim: usize) -> Vec<f64> {
    let m = centers.len() / dim;
    let mut d_max = 0.0f64;
    for i in 0..m {
        for j in i + 1..m {
            d_max = d_max.max(sq_dist(&centers[i * dim..(i + 1) * dim], &centers[j * dim..(j + 1) * dim]));
        }
    }
    let d_max = d_max.sqrt();
    let spread = if d_max > 0.0 { d_max / (2.0 * m as f64).sqrt() } else { 1.0 };
    vec![spread; m]
}

pub fn predict(p: &RbfnParams, x: &[f64]) -> Result<f64> {
    if x.len() != p.dim {
        return Err(Error::invalid(format!("input has {} values, model dimension is {}", x.len(), p.dim)));
    }
    Ok(p.predict_unchecked(x))
}

/// Fresh surrogate: k-means centers, shared spread, zero weights, bias at
/// the target mean.
pub fn init_surrogate<R: Rng + ?Sized>(data: &Dataset, m: usize, rng: &mut R) -> Result<RbfnParams> {
    let centers = kmeans(data.inputs(), data.dim(), m, rng)?;
    let spreads = compute_spreads(&centers, data.dim());
    let bias = data.targets().iter().sum::<f64>() / data.len() as f64;
    RbfnParams::new(data.dim(), centers, vec![0.0; m], spreads, bias)
}

/// Gradient of the mean squared error with respect to every parameter,
/// laid out like [`RbfnParams`].
#[derive(Debug, Clone, PartialEq)]
pub struct RbfnGradient {
    pub centers: Vec<f64>,
    pub weights: Vec<f64>,
    pub spreads: Vec<f64>,
    pub bias: f64,
}

fn check_shapes(p: &RbfnParams, data: &Dataset) -> Result<()> {
    if p.dim != data.dim {
        return Err(Error::invalid(format!("model dimension {} does not match data dimension {}", p.dim, data.dim)));
    }
    Ok(())
}

/// `(1/n) * sum_i (predict(x_i) - y_i)^2`.
pub fn mse_loss(p: &RbfnParams, data: &Dataset) -> Result<f64> {
    check_shapes(p, data)?;
    Ok(loss_unchecked(p, data))
}

fn loss_unchecked(p: &RbfnParams, data: &Dataset) -> f64 {
    data.iter().map(|(x, y)| (p.predict_unchecked(x) - y).powi(2)).sum::<f64>() / data.len() as f64
}

pub fn mse_gradient(p: &RbfnParams, data: &Dataset) -> Result<RbfnGradient> {
    check_shapes(p, data)?;
    let mut scratch = Scratch::new(p.nodes());
    let (_, grad) = scratch.loss_and_gradient(p, data);
    Ok(grad)
}

struct Scratch {
    phi: Vec<f64>,
    r2: Vec<f64>,
}

impl Scratch {
    fn new(m: usize) -> Self {
        Scratch { phi: vec![0.0; m], r2: vec![0.0; m] }
    }

    #[allow(clippy::needless_range_loop)]
    fn loss_and_gradient(&mut self, p: &RbfnParams, data: &Dataset) -> (f64, RbfnGradient) {
        let (m, d) = (p.nodes(), p.dim);
        let scale = 2.0 / data.len() as f64;
        let inv_two_var: Vec<f64> = p.spreads.iter().map(|s| 1.0 / (2.0 * s * s)).collect();
        let mut g = RbfnGradient { centers: vec![0.0; m * d], weights: vec![0.0; m], spreads: vec![0.0; m], bias: 0.0 };
        let mut loss = 0.0;

        for (x, y) in data.iter() {
            let mut pred = p.bias;
            for j in 0..m {
                let r2 = sq_dist(x, p.center(j));
                let phi = (-r2 * inv_two_var[j]).exp();
                self.r2[j] = r2;
                self.phi[j] = phi;
                pred += p.weights[j] * phi;
            }
            let err = pred - y;
            loss += err * err;
            let e = scale * err;
            g.bias += e;
            for j in 0..m {
                let s = p.spreads[j];
                let phi = self.phi[j];
                g.weights[j] += e * phi;
                let k = e * p.weights[j] * phi;
                g.spreads[j] += k * self.r2[j] / (s * s * s);
                let kc = k / (s * s);
                for ((gc, &xv), &cv) in g.centers[j * d..(j + 1) * d].iter_mut().zip(x).zip(p.center(j)) {
                    *gc += kc * (xv - cv);
                }
            }
        }
        (loss / data.len() as f64, g)
    }
}

/// Affine change of coordinates under which training runs: inputs are
/// centered per axis and divided by one common scale (keeping the Gaussian
/// nodes isotropic), targets are standardized.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Standardization {
    input_scale: f64,
    target_mean: f64,
    target_scale: f64,
}

impl Standardization {
    fn identity(dim: usize) -> (Self, Vec<f64>) {
        (Standardization { input_scale: 1.0, target_mean: 0.0, target_scale: 1.0 }, vec![0.0; dim])
    }

    fn fit(data: &Dataset) -> (Self, Vec<f64>) {
        let (n, d) = (data.len() as f64, data.dim);
        let mut mean = vec![0.0; d];
        for (x, _) in data.iter() {
            for (m, v) in mean.iter_mut().zip(x) {
                *m += v / n;
            }
        }
        let var = data.iter().map(|(x, _)| sq_dist(x, &mean)).sum::<f64>() / (n * d as f64);
        let target_mean = data.targets().iter().sum::<f64>() / n;
        let target_var = data.targets().iter().map(|y| (y - target_mean).powi(2)).sum::<f64>() / n;
        let scale_or_one = |v: f64| if v.sqrt() > 1e-12 { v.sqrt() } else { 1.0 };
        let std =
            Standardization { input_scale: scale_or_one(var), target_mean, target_scale: scale_or_one(target_var) };
        (std, mean)
    }

    fn forward_data(&self, data: &Dataset, shift: &[f64]) -> Dataset {
        let inputs = data
            .inputs()
            .chunks(data.dim)
            .flat_map(|x| x.iter().zip(shift).map(|(v, s)| (v - s) / self.input_scale))
            .collect();
        let targets = data.targets().iter().map(|y| (y - self.target_mean) / self.target_scale).collect();
        Dataset { dim: data.dim, inputs, targets }
    }

    fn forward_model(&self, p: &RbfnParams, shift: &[f64]) -> RbfnParams {
        let mut q = p.clone();
        for c in q.centers.chunks_mut(p.dim) {
            for (v, s) in c.iter_mut().zip(shift) {
                *v = (*v - s) / self.input_scale;
            }
        }
        q.spreads.iter_mut().for_each(|v| *v /= self.input_scale);
        q.weights.iter_mut().for_each(|v| *v /= self.target_scale);
        q.bias = (q.bias - self.target_mean) / self.target_scale;
        q
    }

    fn backward_model(&self, q: &RbfnParams, shift: &[f64]) -> RbfnParams {
        let mut p = q.clone();
        for c in p.centers.chunks_mut(q.dim) {
            for (v, s) in c.iter_mut().zip(shift) {
                *v = *v * self.input_scale + s;
            }
        }
        p.spreads.iter_mut().for_each(|v| *v = (*v * self.input_scale).max(MIN_SPREAD));
        p.weights.iter_mut().for_each(|v| *v *= self.target_scale);
        p.bias = p.bias * self.target_scale + self.target_mean;
        p
    }
}

/// Coordinates in which the gradient steps of [`train_in`] are taken.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TrainingSpace {
    /// Inputs centered and divided by one common scale, targets
    /// standardized, using the statistics of the training archive. The
    /// model is mapped back to raw units afterwards, so the minimizers are
    /// unchanged but one learning rate behaves alike across problems.
    #[default]
    Standardized,
    /// Plain gradient descent on the raw-unit loss.
    Raw,
}

impl TrainingSpace {
    pub const ALL: [TrainingSpace; 2] = [TrainingSpace::Standardized, TrainingSpace::Raw];

    pub fn name(self) -> &'static str {
        match self {
            TrainingSpace::Standardized => "standardized",
            TrainingSpace::Raw => "raw",
        }
    }
}

impl fmt::Display for TrainingSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TrainingSpace {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        TrainingSpace::ALL
            .into_iter()
            .find(|t| t.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::invalid(format!("unknown training space '{s}' (expected standardized or raw)")))
    }
}

/// `epochs` full-batch gradient-descent steps on the mean squared error,
/// updating centers, spreads, weights and bias, in standardized coordinates.
pub fn train(p: &RbfnParams, data: &Dataset, epochs: usize, rate: f64) -> Result<RbfnParams> {
    train_in(p, data, epochs, rate, TrainingSpace::Standardized)
}

/// [`train`] with an explicit choice of coordinates.
pub fn train_in(p: &RbfnParams, data: &Dataset, epochs: usize, rate: f64, space: TrainingSpace) -> Result<RbfnParams> {
    train_traced(p, data, epochs, rate, space).map(|(model, _)| model)
}

/// Like [`train_in`], also returning the raw-unit loss seen at the start of
/// each epoch followed by the final loss.
pub fn train_traced(
    p: &RbfnParams,
    data: &Dataset,
    epochs: usize,
    rate: f64,
    space: TrainingSpace,
) -> Result<(RbfnParams, Vec<f64>)> {
    check_shapes(p, data)?;
    if !(rate > 0.0) {
        return Err(Error::invalid(format!("learning rate must be positive, got {rate}")));
    }
    if epochs == 0 {
        return Ok((p.clone(), Vec::new()));
    }
    let (std, shift) = match space {
        TrainingSpace::Standardized => Standardization::fit(data),
        TrainingSpace::Raw => Standardization::identity(data.dim),
    };
    let unit_data = std.forward_data(data, &shift);
    let mut model = std.forward_model(p, &shift);
    let min_spread = MIN_SPREAD / std.input_scale;
    let loss_scale = std.target_scale * std.target_scale;
    let mut history = Vec::with_capacity(epochs + 1);
    let mut scratch = Scratch::new(model.nodes());
    for epoch in 0..epochs {
        let (loss, g) = scratch.loss_and_gradient(&model, &unit_data);
        if !loss.is_finite() {
            return Err(Error::TrainingDivergence { epoch, loss: loss * loss_scale });
        }
        history.push(loss * loss_scale);
        model.bias -= rate * g.bias;
        for (v, gv) in model.weights.iter_mut().zip(&g.weights) {
            *v -= rate * gv;
        }
        for (v, gv) in model.centers.iter_mut().zip(&g.centers) {
            *v -= rate * gv;
        }
        for (v, gv) in model.spreads.iter_mut().zip(&g.spreads) {
            *v = (*v - rate * gv).max(min_spread);
        }
        if !model.is_finite() {
            return Err(Error::TrainingDivergence { epoch, loss: f64::NAN });
        }
    }
    let model = std.backward_model(&model, &shift);
    let loss = loss_unchecked(&model, data);
    if !loss.is_finite() || !model.is_finite() {
        return Err(Error::TrainingDivergence { epoch: epochs, loss });
    }
    history.push(loss);
    Ok((model, history))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::spawn_stream;
    use rand::Rng;

    fn random_model(rng: &mut impl Rng, m: usize, d: usize) -> RbfnParams {
        RbfnParams::new(
            d,
            (0..m * d).map(|_| rng.random_range(-1.0..1.0)).collect(),
            (0..m).map(|_| rng.random_range(-2.0..2.0)).collect(),
            (0..m).map(|_| rng.random_range(0.5..1.5)).collect(),
            rng.random_range(-1.0..1.0),
        )
        .unwrap()
    }

    fn random_data(rng: &mut impl Rng, n: usize, d: usize) -> Dataset {
        Dataset::new(
            d,
            (0..n * d).map(|_| rng.random_range(-1.0..1.0)).collect(),
            (0..n).map(|_| rng.random_range(-3.0..3.0)).collect(),
        )
        .unwrap()
    }

    #[test]
    fn kmeans_distinct_rows_are_their_own_centers() {
        let rows = vec![0.0, 0.0, 5.0, 1.0, -3.0, 2.0, 7.0, 7.0];
        let mut centers: Vec<(f64, f64)> =
            kmeans(&rows, 2, 4, &mut spawn_stream(1, "km")).unwrap().chunks(2).map(|c| (c[0], c[1])).collect();
        centers.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_eq!(centers, vec![(-3.0, 2.0), (0.0, 0.0), (5.0, 1.0), (7.0, 7.0)]);
    }

    #[test]
    fn kmeans_duplicate_rows_reseed_empty_clusters() {
        let rows = vec![1.0, 1.0, 1.0, 4.0, 4.0, 9.0];
        for seed in 0..20 {
            let mut c = kmeans(&rows, 1, 3, &mut spawn_stream(seed, "km")).unwrap();
            c.sort_by(|a, b| a.partial_cmp(b).unwrap());
            assert_eq!(c, vec![1.0, 4.0, 9.0]);
        }
    }

    #[test]
    fn kmeans_identical_rows() {
        let rows: Vec<f64> = [2.5, -1.0].repeat(6);
        let c = kmeans(&rows, 2, 3, &mut spawn_stream(0, "km")).unwrap();
        assert!(c.chunks(2).all(|r| r == [2.5, -1.0]));
    }

    #[test]
    fn kmeans_two_blobs() {
        let rows = [-0.1, -0.05, 0.0, 0.04, 0.1, 9.9, 9.95, 10.0, 10.02, 10.1];
        for seed in 0..20 {
            let mut c = kmeans(&rows, 1, 2, &mut spawn_stream(seed, "km")).unwrap();
            c.sort_by(|a, b| a.partial_cmp(b).unwrap());
            assert!(c[0].abs() < 0.2 && (c[1] - 10.0).abs() < 0.2, "{c:?}");
        }
    }

    #[test]
    fn kmeans_rejects_too_few_points() {
        assert!(kmeans(&[1.0, 2.0], 1, 3, &mut spawn_stream(0, "km")).is_err());
        assert!(kmeans(&[1.0, 2.0], 1, 0, &mut spawn_stream(0, "km")).is_err());
    }

    #[test]
    fn spreads_from_max_distance() {
        let s = compute_spreads(&[0.0, 0.0, 1.0, 1.0], 2);
        assert!((s[0] - 2f64.sqrt() / 2.0).abs() < 1e-15);
        assert_eq!(s[0], s[1]);
        assert_eq!(compute_spreads(&[3.0, 4.0], 2), vec![1.0]);
        assert_eq!(compute_spreads(&[3.0, 4.0, 3.0, 4.0, 3.0, 4.0], 2), vec![1.0; 3]);
    }

    #[test]
    fn predict_worked_examples() {
        let one = RbfnParams::new(2, vec![0.5, -0.5], vec![1.0], vec![0.7], 0.0).unwrap();
        assert_eq!(predict(&one, &[0.5, -0.5]).unwrap(), 1.0);

        let flat = RbfnParams::new(1, vec![0.0, 2.0], vec![0.0, 0.0], vec![1.0, 1.0], -4.25).unwrap();
        assert_eq!(predict(&flat, &[123.0]).unwrap(), -4.25);

        let two = RbfnParams::new(1, vec![0.0, 2.0], vec![1.0, 1.0], vec![1.0, 1.0], 0.5).unwrap();
        let expected = 2.0 * (-0.5f64).exp() + 0.5;
        assert!((predict(&two, &[1.0]).unwrap() - expected).abs() < 1e-15);
        assert!((expected - 1.7131).abs() < 1e-4);

        assert!(predict(&two, &[1.0, 2.0]).is_err());
    }

    #[test]
    fn model_validation() {
        assert!(RbfnParams::new(2, vec![0.0; 3], vec![0.0], vec![1.0], 0.0).is_err());
        assert!(RbfnParams::new(1, vec![0.0], vec![0.0], vec![0.0], 0.0).is_err());
        assert!(RbfnParams::new(1, vec![], vec![], vec![], 0.0).is_err());
    }

    #[test]
    fn zero_epochs_is_identity() {
        let mut rng = spawn_stream(2, "t");
        let p = random_model(&mut rng, 3, 2);
        let data = random_data(&mut rng, 5, 2);
        assert_eq!(train(&p, &data, 0, 0.12).unwrap(), p);
    }

    #[test]
    fn single_point_error_shrinks() {
        let data = Dataset::new(2, vec![0.3, -0.2], vec![4.0]).unwrap();
        let p = init_surrogate(&data, 1, &mut spawn_stream(0, "t")).unwrap();
        let p = RbfnParams::new(2, vec![0.0, 0.0], p.weights().to_vec(), vec![1.0], 0.0).unwrap();
        let before = (predict(&p, &[0.3, -0.2]).unwrap() - 4.0).abs();
        let trained = train(&p, &data, 200, 0.12).unwrap();
        let after = (predict(&trained, &[0.3, -0.2]).unwrap() - 4.0).abs();
        assert!(after < before, "{after} !< {before}");
    }

    // Independent oracle: central differences of the loss computed through
    // the public prediction path.
    fn finite_difference(p: &RbfnParams, data: &Dataset, h: f64) -> Vec<f64> {
        let loss = |q: &RbfnParams| {
            data.iter().map(|(x, y)| (predict(q, x).unwrap() - y).powi(2)).sum::<f64>() / data.len() as f64
        };
        let flat = p.to_flat();
        (0..flat.values.len())
            .map(|i| {
                let mut plus = flat.clone();
                let mut minus = flat.clone();
                plus.values[i] += h;
                minus.values[i] -= h;
                (loss(&RbfnParams::from_flat(&plus).unwrap()) - loss(&RbfnParams::from_flat(&minus).unwrap()))
                    / (2.0 * h)
            })
            .collect()
    }

    #[test]
    fn analytic_gradient_matches_finite_differences() {
        for seed in 0..20 {
            let mut rng = spawn_stream(seed, "grad");
            let p = random_model(&mut rng, 3, 2);
            let data = random_data(&mut rng, 5, 2);
            let g = mse_gradient(&p, &data).unwrap();
            let analytic: Vec<f64> =
                g.centers.iter().chain(&g.weights).chain(&g.spreads).copied().chain([g.bias]).collect();
            let numeric = finite_difference(&p, &data, 1e-6);
            for (i, (a, n)) in analytic.iter().zip(&numeric).enumerate() {
                let rel = (a - n).abs() / a.abs().max(n.abs()).max(1e-3);
                assert!(rel < 1e-4, "seed {seed} param {i}: analytic {a} vs numeric {n}");
            }
        }
    }

    #[test]
    fn small_rate_loss_is_non_increasing() {
        for seed in 0..10 {
            let mut rng = spawn_stream(seed, "mono");
            let p = random_model(&mut rng, 4, 3);
            let data = random_data(&mut rng, 12, 3);
            for space in TrainingSpace::ALL {
                let (_, history) = train_traced(&p, &data, 100, 1e-3, space).unwrap();
                for w in history.windows(2) {
                    assert!(w[1] <= w[0] + 1e-12, "seed {seed} {space}: {} -> {}", w[0], w[1]);
                }
            }
        }
    }

    #[test]
    fn raw_space_is_plain_gradient_descent() {
        let mut rng = spawn_stream(4, "raw");
        let p = random_model(&mut rng, 3, 2);
        let data = random_data(&mut rng, 6, 2);
        let g = mse_gradient(&p, &data).unwrap();
        let step = train_in(&p, &data, 1, 0.01, TrainingSpace::Raw).unwrap();
        for (j, (after, before)) in step.weights().iter().zip(p.weights()).enumerate() {
            assert_eq!(*after, before - 0.01 * g.weights[j]);
        }
        for (j, (after, before)) in step.centers().iter().zip(p.centers()).enumerate() {
            assert_eq!(*after, before - 0.01 * g.centers[j]);
        }
        assert_eq!(step.bias(), p.bias() - 0.01 * g.bias);
    }

    #[test]
    fn standardized_training_is_affine_equivariant() {
        // Rescaling inputs and targets and training from the correspondingly
        // rescaled model gives the rescaled result.
        let (sx, tx, sy, ty) = (7.5, -3.0, 40.0, 250.0);
        for seed in 0..5 {
            let mut rng = spawn_stream(seed, "equiv");
            let p = random_model(&mut rng, 3, 2);
            let data = random_data(&mut rng, 10, 2);
            let scaled_data = Dataset::new(
                2,
                data.inputs().iter().map(|v| v * sx + tx).collect(),
                data.targets().iter().map(|y| y * sy + ty).collect(),
            )
            .unwrap();
            let scaled_p = RbfnParams::new(
                2,
                p.centers().iter().map(|v| v * sx + tx).collect(),
                p.weights().iter().map(|a| a * sy).collect(),
                p.spreads().iter().map(|s| s * sx).collect(),
                p.bias() * sy + ty,
            )
            .unwrap();
            let a = train(&p, &data, 20, 0.12).unwrap();
            let b = train(&scaled_p, &scaled_data, 20, 0.12).unwrap();
            for x in data.inputs().chunks(2) {
                let xs: Vec<f64> = x.iter().map(|v| v * sx + tx).collect();
                let expected = predict(&a, x).unwrap() * sy + ty;
                let got = predict(&b, &xs).unwrap();
                assert!((expected - got).abs() < 1e-8 * expected.abs().max(1.0), "seed {seed}: {expected} vs {got}");
            }
        }
    }

    #[test]
    fn training_is_deterministic() {
        let mut rng = spawn_stream(8, "det");
        let p = random_model(&mut rng, 3, 2);
        let data = random_data(&mut rng, 9, 2);
        assert_eq!(train(&p, &data, 20, 0.12).unwrap(), train(&p, &data, 20, 0.12).unwrap());
    }

    #[test]
    fn divergence_reports_epoch() {
        let data = Dataset::new(1, vec![0.0, 1.0], vec![1e300, -1e300]).unwrap();
        let p = RbfnParams::new(1, vec![0.5], vec![1.0], vec![1.0], 0.0).unwrap();
        match train_in(&p, &data, 5, 10.0, TrainingSpace::Raw) {
            Err(Error::TrainingDivergence { epoch, .. }) => assert!(epoch <= 5),
            other => panic!("expected divergence, got {other:?}"),
        }
    }

    #[test]
    fn init_with_constant_targets_predicts_constant() {
        let mut rng = spawn_stream(4, "init");
        let d = 3;
        let inputs: Vec<f64> = (0..30 * d).map(|_| rng.random_range(-5.0..5.0)).collect();
        let data = Dataset::new(d, inputs, vec![3.0; 30]).unwrap();
        let p = init_surrogate(&data, 2 * d + 1, &mut rng).unwrap();
        assert_eq!(p.nodes(), 7);
        assert_eq!(p.spreads().to_vec(), compute_spreads(p.centers(), d));
        for _ in 0..20 {
            let x: Vec<f64> = (0..d).map(|_| rng.random_range(-5.0..5.0)).collect();
            assert_eq!(predict(&p, &x).unwrap(), 3.0);
        }
        assert!(init_surrogate(&data, 31, &mut rng).is_err());
    }

    #[test]
    fn prediction_bounded_by_weight_mass() {
        let mut rng = spawn_stream(12, "bound");
        for _ in 0..50 {
            let p = random_model(&mut rng, 5, 3);
            let limit = p.bias().abs() + p.weights().iter().map(|a| a.abs()).sum::<f64>();
            let x: Vec<f64> = (0..3).map(|_| rng.random_range(-10.0..10.0)).collect();
            assert!(predict(&p, &x).unwrap().abs() <= limit + 1e-12);
        }
    }

    #[test]
    fn flat_record_layout() {
        let p = RbfnParams::new(2, vec![1.0, 2.0, 3.0, 4.0], vec![5.0, 6.0], vec![7.0, 8.0], 9.0).unwrap();
        let flat = p.to_flat();
        assert_eq!(flat.values, (1..=9).map(f64::from).collect::<Vec<_>>());
        assert_eq!(RbfnParams::from_flat(&flat).unwrap(), p);
        let short = FlatModel { values: flat.values[..8].to_vec(), ..flat };
        assert!(RbfnParams::from_flat(&short).is_err());
    }
}

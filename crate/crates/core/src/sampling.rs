//! Random-stream fan-out and Latin hypercube designs.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

use crate::benchmarks::Bounds;
use crate::error::{Error, Result};

/// The random stream type used by every stochastic component.
pub type Stream = ChaCha8Rng;

/// Derive the substream for `label` from `master_seed`.
///
/// The 256-bit ChaCha key is the SHA-256 digest of the little-endian seed
/// followed by the label bytes.
pub fn spawn_stream(master_seed: u64, label: &str) -> Stream {
    let mut hasher = Sha256::new();
    hasher.update(master_seed.to_le_bytes());
    hasher.update(label.as_bytes());
    let key: [u8; 32] = hasher.finalize().into();
    ChaCha8Rng::from_seed(key)
}

/// An `n x d` matrix of sample points, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignMatrix {
    dim: usize,
    data: Vec<f64>,
}

impl DesignMatrix {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.data.chunks_exact(self.dim)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }
}

/// Latin hypercube design of `n` points in `b`.
///
/// Each axis is cut into `n` equal strata; every stratum holds exactly one
/// point, placed uniformly inside it, and the stratum order is an
/// independent shuffle per axis.
pub fn latin_hypercube<R: Rng + ?Sized>(n: usize, d: usize, b: &Bounds, rng: &mut R) -> Result<DesignMatrix> {
    if n == 0 || d == 0 {
        return Err(Error::invalid(format!("latin hypercube needs n >= 1 and d >= 1 (got n={n}, d={d})")));
    }
    if b.dim() != d {
        return Err(Error::invalid(format!("bounds have {} dimensions, expected {d}", b.dim())));
    }
    let mut data = vec![0.0; n * d];
    let mut strata: Vec<usize> = (0..n).collect();
    for j in 0..d {
        strata.shuffle(rng);
        let (lo, width) = (b.lower()[j], b.width(j));
        for (i, &s) in strata.iter().enumerate() {
            let u: f64 = rng.random();
            let v = lo + width * (s as f64 + u) / n as f64;
            data[i * d + j] = v.min(b.upper()[j]);
        }
    }
    Ok(DesignMatrix { dim: d, data })
}

use std::sync::Arc;

use rand::Rng;

use crate::entity::EntityId;
use crate::error::{Error, Result};
use crate::hyper::Hyperparams;
use crate::labels::Labels;

/// Half-width of the uniform initialization interval.
pub const INIT_SCALE: f64 = 0.01;

/// Dense `k x n` latent matrix; column `c` is the embedding of `labels[c]`.
/// Stored column-major so each embedding is a contiguous slice.
#[derive(Clone, Debug, PartialEq)]
pub struct FactorMatrix {
    k: usize,
    labels: Arc<Labels>,
    values: Vec<f64>,
}

impl FactorMatrix {
    pub fn zeros(k: usize, labels: Arc<Labels>) -> Self {
        let values = vec![0.0; k * labels.len()];
        FactorMatrix { k, labels, values }
    }

    pub fn from_values(k: usize, labels: Arc<Labels>, values: Vec<f64>) -> Result<Self> {
        if values.len() != k * labels.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} values for {}x{} factor matrix",
                values.len(),
                k,
                labels.len()
            )));
        }
        Ok(FactorMatrix { k, labels, values })
    }

    /// Uniform draws in `[-INIT_SCALE, INIT_SCALE]` from the stream for
    /// `(seed, role)`.
    pub fn random(k: usize, labels: Arc<Labels>, seed: u64, role: &str) -> Self {
        let mut rng = crate::rng::stream(seed, role);
        let values = (0..k * labels.len())
            .map(|_| rng.gen_range(-INIT_SCALE..=INIT_SCALE))
            .collect();
        FactorMatrix { k, labels, values }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n_cols(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &Labels {
        &self.labels
    }

    pub fn labels_arc(&self) -> Arc<Labels> {
        self.labels.clone()
    }

    pub fn col(&self, c: usize) -> &[f64] {
        &self.values[c * self.k..(c + 1) * self.k]
    }

    pub fn col_mut(&mut self, c: usize) -> &mut [f64] {
        &mut self.values[c * self.k..(c + 1) * self.k]
    }

    pub fn col_of(&self, id: &EntityId) -> Option<&[f64]> {
        self.labels.position(id).map(|c| self.col(c))
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn frobenius_sq(&self) -> f64 {
        self.values.iter().map(|x| x * x).sum()
    }

    pub fn max_abs_diff(&self, other: &FactorMatrix) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// `self += other`, column by column, with identical labels required.
    pub fn add_assign(&mut self, other: &FactorMatrix) -> Result<()> {
        if self.k != other.k || self.labels != other.labels {
            return Err(Error::DimensionMismatch("add of unaligned factor matrices".into()));
        }
        for (a, b) in self.values.iter_mut().zip(&other.values) {
            *a += b;
        }
        Ok(())
    }

    /// Writes one line per column: `key<TAB>v_1<TAB>...<TAB>v_k`.
    pub fn to_tsv(&self) -> String {
        use std::fmt::Write as _;
        let mut out = String::new();
        for (c, id) in self.labels.iter().enumerate() {
            out.push_str(&id.key);
            for v in self.col(c) {
                let _ = write!(out, "\t{v}");
            }
            out.push('\n');
        }
        out
    }
}

/// Initial factors for `labels` under `hyper`; `role` names the matrix
/// (e.g. `"U"`, `"user:0/Z"`) so that each matrix draws its own stream.
pub fn init_factors(labels: Arc<Labels>, hyper: &Hyperparams, role: &str) -> FactorMatrix {
    FactorMatrix::random(hyper.k, labels, hyper.seed, role)
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `acc += scale * x`
pub(crate) fn axpy(acc: &mut [f64], scale: f64, x: &[f64]) {
    for (a, v) in acc.iter_mut().zip(x) {
        *a += scale * v;
    }
}

use serde::{Deserialize, Serialize};

use crate::entity::{SourceId, SourceKind};
use crate::error::{Error, Result};

/// Weights attached to one source matrix: `s` scales its reconstruction
/// error, `z` regularizes its attribute factors.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SourceLambdas {
    pub s: f64,
    pub z: f64,
}

impl Default for SourceLambdas {
    fn default() -> Self {
        SourceLambdas { s: 0.8, z: 0.1 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Hyperparams {
    /// Latent dimensionality.
    pub k: usize,
    /// Learning rate.
    pub alpha: f64,
    /// Stop once the relative loss decrease of an iteration drops below this.
    pub epsilon: f64,
    pub max_iters: usize,
    pub lambda_u: f64,
    pub lambda_v: f64,
    /// Per user source, indexed by source index. Missing entries fall back to
    /// `source_default`.
    pub user_sources: Vec<SourceLambdas>,
    pub item_sources: Vec<SourceLambdas>,
    pub source_default: SourceLambdas,
    pub seed: u64,
}

impl Default for Hyperparams {
    fn default() -> Self {
        Hyperparams {
            k: 10,
            alpha: 0.01,
            epsilon: 1e-6,
            max_iters: 1000,
            lambda_u: 0.1,
            lambda_v: 0.1,
            user_sources: Vec::new(),
            item_sources: Vec::new(),
            source_default: SourceLambdas::default(),
            seed: 0,
        }
    }
}

impl Hyperparams {
    pub fn source_lambdas(&self, id: SourceId) -> SourceLambdas {
        let table = match id.kind {
            SourceKind::User => &self.user_sources,
            SourceKind::Item => &self.item_sources,
        };
        table.get(id.index).copied().unwrap_or(self.source_default)
    }

    /// Regularization weight applied to a source's entity factors (`U^n`
    /// takes `lambda_u`, `V^m` takes `lambda_v`).
    pub fn entity_lambda(&self, kind: SourceKind) -> f64 {
        match kind {
            SourceKind::User => self.lambda_u,
            SourceKind::Item => self.lambda_v,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidHyperparams(msg));
        if self.k == 0 {
            return bad("k must be at least 1".into());
        }
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return bad(format!("alpha must be positive and finite, got {}", self.alpha));
        }
        if self.epsilon.is_nan() || self.epsilon < 0.0 {
            return bad(format!("epsilon must be >= 0, got {}", self.epsilon));
        }
        let lambdas = [("lambda_u", self.lambda_u), ("lambda_v", self.lambda_v)]
            .into_iter()
            .chain(
                self.user_sources
                    .iter()
                    .chain(&self.item_sources)
                    .chain(std::iter::once(&self.source_default))
                    .flat_map(|l| [("lambda_s", l.s), ("lambda_z", l.z)]),
            );
        for (name, value) in lambdas {
            if !(value >= 0.0 && value.is_finite()) {
                return bad(format!("{name} must be finite and >= 0, got {value}"));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        Hyperparams::default().validate().unwrap();
    }

    #[test]
    fn rejects_bad_values() {
        let mut h = Hyperparams { k: 0, ..Default::default() };
        assert!(h.validate().is_err());
        h.k = 2;
        h.alpha = 0.0;
        assert!(h.validate().is_err());
        h.alpha = 0.1;
        h.item_sources.push(SourceLambdas { s: -1.0, z: 0.0 });
        assert!(h.validate().is_err());
    }

    #[test]
    fn infinite_epsilon_allowed() {
        let h = Hyperparams { epsilon: f64::INFINITY, ..Default::default() };
        h.validate().unwrap();
    }

    #[test]
    fn per_source_fallback() {
        let h = Hyperparams {
            user_sources: vec![SourceLambdas { s: 2.0, z: 3.0 }],
            ..Default::default()
        };
        assert_eq!(h.source_lambdas(SourceId::user(0)).s, 2.0);
        assert_eq!(h.source_lambdas(SourceId::user(1)), SourceLambdas::default());
        assert_eq!(h.source_lambdas(SourceId::item(0)), SourceLambdas::default());
    }
}

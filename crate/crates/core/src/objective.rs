//! The joint multi-source objective, its gradients, the label-aware merge
//! operator, and rating prediction.
//!
//! Factor matrices are `k x n` with one column per entity. A source's local
//! entity matrix (`U^n` or `V^m`) has a column for every entity the source
//! describes; columns of entities that also exist globally are tied to the
//! global `U`/`V` column. All loss and gradient code reads those tied
//! columns from the global matrix, so the local copies are only mirrors.
//! Tied columns are therefore regularized once, through `U`/`V`.

use crate::dataset::{Problem, RatingDataset, SourceMatrix};
use crate::entity::{EntityId, SourceId};
use crate::error::{Error, Result};
use crate::factors::{axpy, dot, init_factors, FactorMatrix};
use crate::hyper::{Hyperparams, SourceLambdas};
use crate::sparse::SparseMatrix;

/// Latent factors owned by one source: its entity embeddings and its
/// attribute embeddings `Z`.
#[derive(Clone, Debug, PartialEq)]
pub struct SourceFactors {
    pub id: SourceId,
    pub local: FactorMatrix,
    pub z: FactorMatrix,
}

/// Every parameter of the model. Also used as the container for gradients,
/// which have identical shapes.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelState {
    pub u: FactorMatrix,
    pub v: FactorMatrix,
    pub user_sources: Vec<SourceFactors>,
    pub item_sources: Vec<SourceFactors>,
}

/// Role tags used to seed each factor matrix's initial draws.
pub fn role_tag(id: SourceId, part: &str) -> String {
    format!("{id}/{part}")
}

impl ModelState {
    pub fn init(problem: &Problem, hyper: &Hyperparams) -> Self {
        let u = init_factors(problem.ratings.ratings.row_labels_arc(), hyper, "U");
        let v = init_factors(problem.ratings.ratings.col_labels_arc(), hyper, "V");
        let init_source = |s: &SourceMatrix| SourceFactors {
            id: s.id,
            local: init_factors(s.matrix.row_labels_arc(), hyper, &role_tag(s.id, "entities")),
            z: init_factors(s.matrix.col_labels_arc(), hyper, &role_tag(s.id, "attributes")),
        };
        let mut state = ModelState {
            u,
            v,
            user_sources: problem.user_sources.iter().map(init_source).collect(),
            item_sources: problem.item_sources.iter().map(init_source).collect(),
        };
        state.sync_shared(problem);
        state
    }

    pub fn zeros_like(&self) -> Self {
        let zero = |f: &FactorMatrix| FactorMatrix::zeros(f.k(), f.labels_arc());
        let zero_src = |s: &SourceFactors| SourceFactors {
            id: s.id,
            local: zero(&s.local),
            z: zero(&s.z),
        };
        ModelState {
            u: zero(&self.u),
            v: zero(&self.v),
            user_sources: self.user_sources.iter().map(zero_src).collect(),
            item_sources: self.item_sources.iter().map(zero_src).collect(),
        }
    }

    /// Copies the global columns into every source's tied columns.
    pub fn sync_shared(&mut self, problem: &Problem) {
        for (s, f) in problem.user_sources.iter().zip(&mut self.user_sources) {
            copy_shared(s, &self.u, &mut f.local);
        }
        for (s, f) in problem.item_sources.iter().zip(&mut self.item_sources) {
            copy_shared(s, &self.v, &mut f.local);
        }
    }

    pub fn sources(&self) -> impl Iterator<Item = &SourceFactors> {
        self.user_sources.iter().chain(&self.item_sources)
    }

    pub fn sources_mut(&mut self) -> impl Iterator<Item = &mut SourceFactors> {
        self.user_sources.iter_mut().chain(&mut self.item_sources)
    }

    /// All factor matrices with stable names, in canonical order.
    pub fn named_factors(&self) -> Vec<(String, &FactorMatrix)> {
        let mut out = vec![("U".to_string(), &self.u), ("V".to_string(), &self.v)];
        for s in self.sources() {
            let side = match s.id.kind {
                crate::entity::SourceKind::User => "U",
                crate::entity::SourceKind::Item => "V",
            };
            out.push((format!("{}_{}_{}", s.id.kind, s.id.index, side), &s.local));
            out.push((format!("{}_{}_Z", s.id.kind, s.id.index), &s.z));
        }
        out
    }

    pub fn max_abs_diff(&self, other: &ModelState) -> f64 {
        self.named_factors()
            .iter()
            .zip(other.named_factors())
            .map(|((_, a), (_, b))| a.max_abs_diff(b))
            .fold(0.0, f64::max)
    }

    pub fn check_aligned(&self, problem: &Problem) -> Result<()> {
        let k = self.u.k();
        let mismatch = |what: &str| Err(Error::DimensionMismatch(what.to_string()));
        if self.u.labels() != problem.ratings.users() {
            return mismatch("U columns differ from rating rows");
        }
        if self.v.labels() != problem.ratings.items() {
            return mismatch("V columns differ from rating columns");
        }
        if self.user_sources.len() != problem.user_sources.len()
            || self.item_sources.len() != problem.item_sources.len()
        {
            return mismatch("source count differs from problem");
        }
        let pairs = problem.sources().zip(self.sources());
        for (s, f) in pairs {
            if s.id != f.id
                || f.local.labels() != s.entities()
                || f.z.labels() != s.attributes()
            {
                return Err(Error::DimensionMismatch(format!("factors of source {}", s.id)));
            }
            if f.local.k() != k || f.z.k() != k {
                return mismatch("latent dimensionality differs between factor matrices");
            }
        }
        if self.v.k() != k {
            return mismatch("latent dimensionality differs between U and V");
        }
        Ok(())
    }
}

fn copy_shared(source: &SourceMatrix, global: &FactorMatrix, local: &mut FactorMatrix) {
    for sh in &source.shared.shared {
        local.col_mut(sh.local).copy_from_slice(global.col(sh.global));
    }
}

/// A source's entity factors with tied columns taken from `global`.
pub fn effective_local(
    source: &SourceMatrix,
    local: &FactorMatrix,
    global: &FactorMatrix,
) -> FactorMatrix {
    let mut eff = local.clone();
    copy_shared(source, global, &mut eff);
    eff
}

/// Loss split into its named parts.
#[derive(Clone, Debug, PartialEq)]
pub struct LossBreakdown {
    pub rating_term: f64,
    pub user_source_terms: Vec<f64>,
    pub item_source_terms: Vec<f64>,
    pub regularization: f64,
    pub total: f64,
}

/// Reconstruction and regularization contribution of one source.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SourceLoss {
    pub data: f64,
    pub regularization: f64,
}

impl SourceLoss {
    pub fn total(&self) -> f64 {
        self.data + self.regularization
    }
}

/// `1/2 * sum over observed (r_ij - U_i.V_j)^2`
pub fn rating_loss(r: &SparseMatrix, u: &FactorMatrix, v: &FactorMatrix) -> f64 {
    0.5 * r
        .entries()
        .iter()
        .map(|e| {
            let res = e.value - dot(u.col(e.row), v.col(e.col));
            res * res
        })
        .sum::<f64>()
}

/// Loss terms owned by one source, given its effective entity factors.
pub fn source_loss(
    source: &SourceMatrix,
    local_eff: &FactorMatrix,
    z: &FactorMatrix,
    entity_lambda: f64,
    lambdas: SourceLambdas,
) -> SourceLoss {
    let sq: f64 = source
        .matrix
        .entries()
        .iter()
        .map(|e| {
            let res = e.value - dot(local_eff.col(e.row), z.col(e.col));
            res * res
        })
        .sum();
    let mask = source.shared_mask();
    let free_sq: f64 = (0..local_eff.n_cols())
        .filter(|&p| !mask[p])
        .map(|p| local_eff.col(p).iter().map(|x| x * x).sum::<f64>())
        .sum();
    SourceLoss {
        data: 0.5 * lambdas.s * sq,
        regularization: 0.5 * entity_lambda * free_sq + 0.5 * lambdas.z * z.frobenius_sq(),
    }
}

pub fn loss(problem: &Problem, state: &ModelState, hyper: &Hyperparams) -> Result<LossBreakdown> {
    state.check_aligned(problem)?;
    let rating_term = rating_loss(&problem.ratings.ratings, &state.u, &state.v);
    let mut regularization =
        0.5 * hyper.lambda_u * state.u.frobenius_sq() + 0.5 * hyper.lambda_v * state.v.frobenius_sq();
    let mut side_terms = |sources: &[SourceMatrix], factors: &[SourceFactors], global: &FactorMatrix| {
        sources
            .iter()
            .zip(factors)
            .map(|(s, f)| {
                let eff = effective_local(s, &f.local, global);
                let l = source_loss(
                    s,
                    &eff,
                    &f.z,
                    hyper.entity_lambda(s.kind()),
                    hyper.source_lambdas(s.id),
                );
                regularization += l.regularization;
                l.data
            })
            .collect::<Vec<_>>()
    };
    let user_source_terms = side_terms(&problem.user_sources, &state.user_sources, &state.u);
    let item_source_terms = side_terms(&problem.item_sources, &state.item_sources, &state.v);
    let total = rating_term
        + user_source_terms.iter().sum::<f64>()
        + item_source_terms.iter().sum::<f64>()
        + regularization;
    Ok(LossBreakdown {
        rating_term,
        user_source_terms,
        item_source_terms,
        regularization,
        total,
    })
}

/// Gradient of the rating term plus the global regularizers:
/// `sum_j (U_i.V_j - r_ij) V_j + lambda_u U_i` and the symmetric `V` part.
pub fn rating_gradient(
    r: &SparseMatrix,
    u: &FactorMatrix,
    v: &FactorMatrix,
    lambda_u: f64,
    lambda_v: f64,
) -> (FactorMatrix, FactorMatrix) {
    let mut gu = FactorMatrix::zeros(u.k(), u.labels_arc());
    let mut gv = FactorMatrix::zeros(v.k(), v.labels_arc());
    for e in r.entries() {
        let res = dot(u.col(e.row), v.col(e.col)) - e.value;
        axpy(gu.col_mut(e.row), res, v.col(e.col));
        axpy(gv.col_mut(e.col), res, u.col(e.row));
    }
    axpy(gu.values_mut(), lambda_u, u.values());
    axpy(gv.values_mut(), lambda_v, v.values());
    (gu, gv)
}

/// Everything one source contributes to the gradient.
#[derive(Clone, Debug, PartialEq)]
pub struct SourceGradient {
    /// Reconstruction gradient for tied entities, labelled by their global
    /// ids; merged into the global gradient with [`oplus`].
    pub partial: FactorMatrix,
    /// Gradient for the source's entity factors. Tied columns are zero.
    pub local: FactorMatrix,
    pub z: FactorMatrix,
}

pub fn source_gradient(
    source: &SourceMatrix,
    local_eff: &FactorMatrix,
    z: &FactorMatrix,
    entity_lambda: f64,
    lambdas: SourceLambdas,
) -> SourceGradient {
    let k = local_eff.k();
    let mut g_entity = FactorMatrix::zeros(k, local_eff.labels_arc());
    let mut g_attr = FactorMatrix::zeros(k, z.labels_arc());
    for e in source.matrix.entries() {
        let res = dot(local_eff.col(e.row), z.col(e.col)) - e.value;
        axpy(g_entity.col_mut(e.row), res, z.col(e.col));
        axpy(g_attr.col_mut(e.col), res, local_eff.col(e.row));
    }

    let shared_ids = crate::labels::Labels::from_ids(source.shared.ids().cloned());
    let mut partial = FactorMatrix::zeros(k, std::sync::Arc::new(shared_ids));
    for (c, sh) in source.shared.shared.iter().enumerate() {
        for (dst, g) in partial.col_mut(c).iter_mut().zip(g_entity.col(sh.local)) {
            *dst = lambdas.s * g;
        }
    }

    let mask = source.shared_mask();
    let mut local = FactorMatrix::zeros(k, local_eff.labels_arc());
    for p in (0..local.n_cols()).filter(|&p| !mask[p]) {
        let out = local.col_mut(p);
        for ((dst, g), x) in out.iter_mut().zip(g_entity.col(p)).zip(local_eff.col(p)) {
            *dst = lambdas.s * g + entity_lambda * x;
        }
    }

    let mut gz = FactorMatrix::zeros(k, z.labels_arc());
    for ((dst, g), x) in gz.values_mut().iter_mut().zip(g_attr.values()).zip(z.values()) {
        *dst = lambdas.s * g + lambdas.z * x;
    }

    SourceGradient {
        partial,
        local,
        z: gz,
    }
}

/// Full gradient of [`loss`]. Source partials are merged into the global
/// gradient after the rating term, in ascending source index order.
pub fn grad(problem: &Problem, state: &ModelState, hyper: &Hyperparams) -> Result<ModelState> {
    state.check_aligned(problem)?;
    let (mut gu, mut gv) = rating_gradient(
        &problem.ratings.ratings,
        &state.u,
        &state.v,
        hyper.lambda_u,
        hyper.lambda_v,
    );
    let side = |sources: &[SourceMatrix],
                factors: &[SourceFactors],
                global: &FactorMatrix,
                acc: &mut FactorMatrix|
     -> Result<Vec<SourceFactors>> {
        let mut out = Vec::with_capacity(sources.len());
        for (s, f) in sources.iter().zip(factors) {
            let eff = effective_local(s, &f.local, global);
            let g = source_gradient(
                s,
                &eff,
                &f.z,
                hyper.entity_lambda(s.kind()),
                hyper.source_lambdas(s.id),
            );
            oplus_assign(acc, &g.partial)?;
            out.push(SourceFactors {
                id: s.id,
                local: g.local,
                z: g.z,
            });
        }
        Ok(out)
    };
    let user_sources = side(&problem.user_sources, &state.user_sources, &state.u, &mut gu)?;
    let item_sources = side(&problem.item_sources, &state.item_sources, &state.v, &mut gv)?;
    Ok(ModelState {
        u: gu,
        v: gv,
        user_sources,
        item_sources,
    })
}

/// Label-aware addition: every column of `a` whose entity also labels a
/// column of `b` gains that column; other columns of `a` are unchanged and
/// columns of `b` without a match are ignored.
pub fn oplus(a: &FactorMatrix, b: &FactorMatrix) -> Result<FactorMatrix> {
    let mut out = a.clone();
    oplus_assign(&mut out, b)?;
    Ok(out)
}

pub fn oplus_assign(a: &mut FactorMatrix, b: &FactorMatrix) -> Result<()> {
    if a.k() != b.k() {
        return Err(Error::RowCountMismatch {
            left: a.k(),
            right: b.k(),
        });
    }
    for (bc, id) in b.labels().iter().enumerate() {
        if let Some(ac) = a.labels().position(id) {
            for (x, y) in a.col_mut(ac).iter_mut().zip(b.col(bc)) {
                *x += y;
            }
        }
    }
    Ok(())
}

/// Predicted rating `U_i.V_j`, clamped to the rating scale.
pub fn predict(
    state: &ModelState,
    user: &EntityId,
    item: &EntityId,
    scale: (f64, f64),
) -> Result<f64> {
    let u = state
        .u
        .col_of(user)
        .ok_or_else(|| Error::UnknownEntity(user.clone()))?;
    let v = state
        .v
        .col_of(item)
        .ok_or_else(|| Error::UnknownEntity(item.clone()))?;
    Ok(dot(u, v).clamp(scale.0, scale.1))
}

/// Prediction by global positions; caller guarantees bounds.
pub fn predict_at(state: &ModelState, user: usize, item: usize, ratings: &RatingDataset) -> f64 {
    ratings.clamp(dot(state.u.col(user), state.v.col(item)))
}

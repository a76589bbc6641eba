//! Shared fixtures and independent oracles for the integration tests.
#![allow(dead_code)]

use mspmf::dataset::{Problem, RatingDataset, SourceMatrix};
use mspmf::entity::{Namespace, SourceId, SourceKind};
use mspmf::hyper::{Hyperparams, SourceLambdas};
use mspmf::objective::ModelState;
use mspmf::sparse::SparseMatrix;
use mspmf::FactorMatrix;
use rand::Rng;

pub struct InstanceShape {
    pub users: usize,
    pub items: usize,
    pub user_sources: usize,
    pub item_sources: usize,
    pub max_attributes: usize,
    pub k: usize,
}

/// Random problem with partial overlap between sources and the global
/// namespaces (some source entities are unknown to the rating matrix and
/// some global entities are absent from a source).
pub fn random_problem(seed: u64, shape: &InstanceShape) -> Problem {
    let mut rng = mspmf::rng::stream(seed, "test/instance");
    let mut triples = Vec::new();
    for u in 0..shape.users {
        for i in 0..shape.items {
            if rng.gen_bool(0.35) {
                triples.push((format!("u{u}"), format!("i{i}"), rng.gen_range(1.0..5.0)));
            }
        }
    }
    // every user and item appears at least once
    for u in 0..shape.users {
        let i = u % shape.items;
        if !triples.iter().any(|(a, b, _)| a == &format!("u{u}") && b == &format!("i{i}")) {
            triples.push((format!("u{u}"), format!("i{i}"), rng.gen_range(1.0..5.0)));
        }
    }
    for i in 0..shape.items {
        let u = i % shape.users;
        if !triples.iter().any(|(a, b, _)| a == &format!("u{u}") && b == &format!("i{i}")) {
            triples.push((format!("u{u}"), format!("i{i}"), rng.gen_range(1.0..5.0)));
        }
    }
    let r = SparseMatrix::build(triples, Namespace::User, Namespace::Item).unwrap();
    let ratings = RatingDataset::new(r, 1.0, 5.0).unwrap();

    let mut sources = Vec::new();
    let make = |id: SourceId, prefix: &str, n_global: usize, rng: &mut rand_chacha::ChaCha8Rng| {
        let n_attr = rng.gen_range(1..=shape.max_attributes);
        let mut triples = Vec::new();
        for p in 0..n_global + 2 {
            // global entities with prob 0.7, plus two source-only entities
            let key = if p < n_global {
                if !rng.gen_bool(0.7) {
                    continue;
                }
                format!("{prefix}{p}")
            } else {
                format!("{prefix}-{}-{}-only{p}", id.kind, id.index)
            };
            for a in 0..n_attr {
                if rng.gen_bool(0.5) {
                    triples.push((key.clone(), format!("a{a}"), rng.gen_range(-1.0..1.0)));
                }
            }
        }
        if triples.is_empty() {
            triples.push((format!("{prefix}0"), "a0".to_string(), 0.5));
        }
        SourceMatrix::from_triples(id, triples).unwrap()
    };
    for n in 0..shape.user_sources {
        sources.push(make(SourceId::user(n), "u", shape.users, &mut rng));
    }
    for m in 0..shape.item_sources {
        sources.push(make(SourceId::item(m), "i", shape.items, &mut rng));
    }
    Problem::new(ratings, sources).unwrap()
}

pub fn random_hyper(seed: u64, k: usize, n_user: usize, n_item: usize) -> Hyperparams {
    let mut rng = mspmf::rng::stream(seed, "test/hyper");
    let mut lam = || SourceLambdas {
        s: rng.gen_range(0.1..1.5),
        z: rng.gen_range(0.05..0.5),
    };
    let user_sources = (0..n_user).map(|_| lam()).collect();
    let item_sources = (0..n_item).map(|_| lam()).collect();
    Hyperparams {
        k,
        alpha: 0.01,
        epsilon: 1e-9,
        max_iters: 30,
        lambda_u: rng.gen_range(0.05..0.5),
        lambda_v: rng.gen_range(0.05..0.5),
        user_sources,
        item_sources,
        seed,
        ..Hyperparams::default()
    }
}

/// Replaces every parameter with a draw in `[-scale, scale]` and re-ties
/// shared columns.
pub fn randomize_state(state: &mut ModelState, problem: &Problem, seed: u64, scale: f64) {
    let mut rng = mspmf::rng::stream(seed, "test/state");
    let mut fill = |f: &mut FactorMatrix| {
        for x in f.values_mut() {
            *x = rng.gen_range(-scale..scale);
        }
    };
    fill(&mut state.u);
    fill(&mut state.v);
    for s in state.sources_mut() {
        fill(&mut s.local);
        fill(&mut s.z);
    }
    state.sync_shared(problem);
}

fn col(f: &FactorMatrix, c: usize) -> Vec<f64> {
    (0..f.k()).map(|r| f.values()[c * f.k() + r]).collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut s = 0.0;
    for i in 0..a.len() {
        s += a[i] * b[i];
    }
    s
}

fn sq_norm(a: &[f64]) -> f64 {
    dot(a, a)
}

/// Finds the global column for a source entity by scanning keys.
fn global_column(global: &FactorMatrix, key: &str, ns: Namespace) -> Option<usize> {
    (0..global.n_cols()).find(|&c| global.labels()[c].key == key && global.labels()[c].namespace == ns)
}

/// Term-by-term evaluation of the joint objective with plain loops over
/// every cell of every matrix. Shares no code with the library's loss.
pub fn brute_force_loss(problem: &Problem, state: &ModelState, hyper: &Hyperparams) -> f64 {
    let r = &problem.ratings.ratings;
    let mut total = 0.0;
    for i in 0..r.n_rows() {
        for j in 0..r.n_cols() {
            if let Some(x) = r.get(i, j) {
                let e = x - dot(&col(&state.u, i), &col(&state.v, j));
                total += 0.5 * e * e;
            }
        }
    }
    let mut reg = 0.5 * hyper.lambda_u * (0..state.u.n_cols()).map(|c| sq_norm(&col(&state.u, c))).sum::<f64>()
        + 0.5 * hyper.lambda_v * (0..state.v.n_cols()).map(|c| sq_norm(&col(&state.v, c))).sum::<f64>();

    for (src, f) in problem.sources().zip(state.sources()) {
        let (global, ns, lambda_entity) = match src.kind() {
            SourceKind::User => (&state.u, Namespace::User, hyper.lambda_u),
            SourceKind::Item => (&state.v, Namespace::Item, hyper.lambda_v),
        };
        let lam = hyper.source_lambdas(src.id);
        let m = &src.matrix;
        let entity_vec = |p: usize| -> (Vec<f64>, bool) {
            match global_column(global, &m.row_labels()[p].key, ns) {
                Some(g) => (col(global, g), true),
                None => (col(&f.local, p), false),
            }
        };
        for p in 0..m.n_rows() {
            let (vec_p, tied) = entity_vec(p);
            for a in 0..m.n_cols() {
                if let Some(x) = m.get(p, a) {
                    let e = x - dot(&vec_p, &col(&f.z, a));
                    total += 0.5 * lam.s * e * e;
                }
            }
            if !tied {
                reg += 0.5 * lambda_entity * sq_norm(&vec_p);
            }
        }
        for a in 0..m.n_cols() {
            reg += 0.5 * lam.z * sq_norm(&col(&f.z, a));
        }
    }
    total + reg
}

/// Every free parameter as (matrix selector, flat index). Tied columns of
/// source entity matrices are not free.
#[derive(Clone, Copy, Debug)]
pub enum Param {
    U(usize),
    V(usize),
    Local(usize, usize),
    Z(usize, usize),
}

pub fn free_params(problem: &Problem, state: &ModelState) -> Vec<Param> {
    let mut out: Vec<Param> = (0..state.u.values().len()).map(Param::U).collect();
    out.extend((0..state.v.values().len()).map(Param::V));
    for (s, (src, f)) in problem.sources().zip(state.sources()).enumerate() {
        let mask = src.shared_mask();
        let k = f.local.k();
        for p in 0..f.local.n_cols() {
            if !mask[p] {
                out.extend((0..k).map(|r| Param::Local(s, p * k + r)));
            }
        }
        out.extend((0..f.z.values().len()).map(|i| Param::Z(s, i)));
    }
    out
}

pub fn param_mut(state: &mut ModelState, p: Param) -> &mut f64 {
    match p {
        Param::U(i) => &mut state.u.values_mut()[i],
        Param::V(i) => &mut state.v.values_mut()[i],
        Param::Local(s, i) => &mut state.sources_mut().nth(s).unwrap().local.values_mut()[i],
        Param::Z(s, i) => &mut state.sources_mut().nth(s).unwrap().z.values_mut()[i],
    }
}

pub fn param_get(state: &ModelState, p: Param) -> f64 {
    match p {
        Param::U(i) => state.u.values()[i],
        Param::V(i) => state.v.values()[i],
        Param::Local(s, i) => state.sources().nth(s).unwrap().local.values()[i],
        Param::Z(s, i) => state.sources().nth(s).unwrap().z.values()[i],
    }
}

/// Central difference of the brute-force loss along one parameter.
pub fn finite_difference(problem: &Problem, state: &ModelState, hyper: &Hyperparams, p: Param, h: f64) -> f64 {
    let mut plus = state.clone();
    *param_mut(&mut plus, p) += h;
    let mut minus = state.clone();
    *param_mut(&mut minus, p) -= h;
    (brute_force_loss(problem, &plus, hyper) - brute_force_loss(problem, &minus, hyper)) / (2.0 * h)
}

/// Denominator floor for the gradient relative error, so that partials that
/// are numerically zero are compared absolutely.
pub const GRAD_REL_FLOOR: f64 = 1e-8;

pub fn grad_rel_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(GRAD_REL_FLOOR)
}

/// Worst relative error over every free parameter of a random instance.
pub fn worst_gradient_error(problem: &Problem, state: &ModelState, hyper: &Hyperparams) -> (f64, usize) {
    let g = mspmf::grad(problem, state, hyper).unwrap();
    let params = free_params(problem, state);
    let worst = params
        .iter()
        .map(|&p| grad_rel_error(param_get(&g, p), finite_difference(problem, state, hyper, p, 1e-6)))
        .fold(0.0, f64::max);
    (worst, params.len())
}

pub const EQUIV_SHAPE: InstanceShape = InstanceShape {
    users: 12,
    items: 10,
    user_sources: 2,
    item_sources: 2,
    max_attributes: 5,
    k: 3,
};

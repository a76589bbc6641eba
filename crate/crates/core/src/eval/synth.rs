//! Seeded synthetic datasets: a low-rank rating matrix plus source matrices
//! that are either generated from the same latent factors (informative) or
//! from unrelated ones (noise).
//!
//! Ratings are `clamp(u.v + noise)` with no offset, so the default scale is
//! centred on zero. True factors have standard deviation `1/sqrt(rank)`.

use rand::distributions::{Distribution, WeightedIndex};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{LogNormal, Normal};
use serde::{Deserialize, Serialize};
use std::collections::HashSet;

use crate::dataset::{RatingDataset, SourceMatrix};
use crate::entity::{Namespace, SourceId};
use crate::error::{Error, Result};
use crate::rng::stream;
use crate::sparse::SparseMatrix;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthConfig {
    pub users: usize,
    pub items: usize,
    /// Rank of the generating factors.
    pub rank: usize,
    /// Fraction of user x item cells observed.
    pub density: f64,
    /// Spread of per-user activity (log-normal sigma); 0 means uniform.
    pub activity_spread: f64,
    pub noise: f64,
    pub scale_lo: f64,
    pub scale_hi: f64,
    pub user_sources: usize,
    pub item_sources: usize,
    pub attributes_per_source: usize,
    /// Fraction of entity x attribute cells observed in each source.
    pub source_density: f64,
    pub source_noise: f64,
    /// Entities that exist only in a source, not in the rating matrix.
    pub source_only_entities: usize,
    /// Sources derive from the true factors when set, otherwise from
    /// independent draws.
    pub informative: bool,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            users: 100,
            items: 80,
            rank: 3,
            density: 0.1,
            activity_spread: 1.0,
            noise: 0.1,
            scale_lo: -2.0,
            scale_hi: 2.0,
            user_sources: 1,
            item_sources: 0,
            attributes_per_source: 30,
            source_density: 0.3,
            source_noise: 0.05,
            source_only_entities: 0,
            informative: true,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug)]
pub struct SynthDataset {
    pub ratings: RatingDataset,
    /// User sources first, then item sources, each by ascending index.
    pub sources: Vec<SourceMatrix>,
}

fn gaussian_factors(rng: &mut ChaCha8Rng, rank: usize, n: usize) -> Vec<Vec<f64>> {
    let normal = Normal::new(0.0, 1.0 / (rank as f64).sqrt()).expect("positive sd");
    (0..n)
        .map(|_| (0..rank).map(|_| normal.sample(rng)).collect())
        .collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Draws `target` distinct cells; rows by `row_weights`, columns uniformly.
fn sample_cells(rng: &mut ChaCha8Rng, row_weights: &[f64], n_cols: usize, target: usize) -> Vec<(usize, usize)> {
    let rows = WeightedIndex::new(row_weights).expect("positive weights");
    let mut seen = HashSet::with_capacity(target);
    let mut cells = Vec::with_capacity(target);
    // Heavy users may saturate their rows; cap the attempts.
    let mut attempts = 0usize;
    while cells.len() < target && attempts < target.saturating_mul(200) + 1000 {
        attempts += 1;
        let cell = (rows.sample(rng), rng.gen_range(0..n_cols));
        if seen.insert(cell) {
            cells.push(cell);
        }
    }
    cells
}

pub fn generate(cfg: &SynthConfig) -> Result<SynthDataset> {
    if cfg.users == 0 || cfg.items == 0 || cfg.rank == 0 {
        return Err(Error::InvalidDataset("users, items and rank must be positive".into()));
    }
    if !(cfg.density > 0.0 && cfg.density <= 1.0) || !(cfg.source_density > 0.0 && cfg.source_density <= 1.0) {
        return Err(Error::InvalidDataset("densities must lie in (0, 1]".into()));
    }
    let seed = cfg.seed;
    let true_u = gaussian_factors(&mut stream(seed, "synth/U"), cfg.rank, cfg.users);
    let true_v = gaussian_factors(&mut stream(seed, "synth/V"), cfg.rank, cfg.items);

    let mut rng = stream(seed, "synth/ratings");
    let activity: Vec<f64> = if cfg.activity_spread > 0.0 {
        let ln = LogNormal::new(0.0, cfg.activity_spread).expect("valid sigma");
        (0..cfg.users).map(|_| ln.sample(&mut rng)).collect()
    } else {
        vec![1.0; cfg.users]
    };
    let target = ((cfg.users * cfg.items) as f64 * cfg.density).round() as usize;
    let cells = sample_cells(&mut rng, &activity, cfg.items, target.max(1));
    let noise = Normal::new(0.0, cfg.noise.max(0.0)).expect("valid sd");
    let mut triples: Vec<_> = cells
        .into_iter()
        .map(|(u, i)| {
            let x = dot(&true_u[u], &true_v[i]) + noise.sample(&mut rng);
            (u, i, x.clamp(cfg.scale_lo, cfg.scale_hi))
        })
        .collect();
    triples.sort_by_key(|&(u, i, _)| (u, i));
    let ratings = SparseMatrix::build(
        triples.into_iter().map(|(u, i, x)| (format!("u{u}"), format!("i{i}"), x)),
        Namespace::User,
        Namespace::Item,
    )?;
    let ratings = RatingDataset::new(ratings, cfg.scale_lo, cfg.scale_hi)?;

    let mut sources = Vec::new();
    for (kind_ids, truth, prefix, n) in [
        ((0..cfg.user_sources).map(SourceId::user).collect::<Vec<_>>(), &true_u, "u", cfg.users),
        ((0..cfg.item_sources).map(SourceId::item).collect::<Vec<_>>(), &true_v, "i", cfg.items),
    ] {
        for id in kind_ids {
            sources.push(generate_source(cfg, id, truth, prefix, n)?);
        }
    }
    Ok(SynthDataset { ratings, sources })
}

fn generate_source(cfg: &SynthConfig, id: SourceId, truth: &[Vec<f64>], prefix: &str, n: usize) -> Result<SourceMatrix> {
    let tag = |part: &str| format!("synth/{id}/{part}");
    let attrs = gaussian_factors(&mut stream(cfg.seed, &tag("attributes")), cfg.rank, cfg.attributes_per_source);
    let extra = gaussian_factors(&mut stream(cfg.seed, &tag("extra")), cfg.rank, cfg.source_only_entities);
    let entity_factors: Vec<Vec<f64>> = if cfg.informative {
        truth.iter().cloned().chain(extra).collect()
    } else {
        gaussian_factors(&mut stream(cfg.seed, &tag("noise")), cfg.rank, n + cfg.source_only_entities)
    };
    let n_entities = entity_factors.len();
    let mut rng = stream(cfg.seed, &tag("cells"));
    let target = ((n_entities * cfg.attributes_per_source) as f64 * cfg.source_density).round() as usize;
    let mut cells = sample_cells(&mut rng, &vec![1.0; n_entities], cfg.attributes_per_source, target.max(1));
    cells.sort_unstable();
    let noise = Normal::new(0.0, cfg.source_noise.max(0.0)).expect("valid sd");
    let triples: Vec<_> = cells
        .into_iter()
        .map(|(p, a)| {
            let key = if p < n {
                format!("{prefix}{p}")
            } else {
                format!("{prefix}-{id}-extra{}", p - n)
            };
            let value = dot(&entity_factors[p], &attrs[a]) + noise.sample(&mut rng);
            (key, format!("a{a}"), value)
        })
        .collect();
    SourceMatrix::from_triples(id, triples)
}

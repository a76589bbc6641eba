//! Rating matrix, source matrices, and their alignment onto the global
//! user and item namespaces.

use crate::entity::{EntityId, Namespace, SourceId, SourceKind};
use crate::error::{Error, Result};
use crate::labels::Labels;
use crate::sparse::SparseMatrix;

/// Users x items preference matrix together with its rating scale.
#[derive(Clone, Debug, PartialEq)]
pub struct RatingDataset {
    pub ratings: SparseMatrix,
    pub scale_lo: f64,
    pub scale_hi: f64,
}

impl RatingDataset {
    pub fn new(ratings: SparseMatrix, scale_lo: f64, scale_hi: f64) -> Result<Self> {
        if !(scale_lo < scale_hi) {
            return Err(Error::InvalidDataset(format!(
                "rating scale [{scale_lo}, {scale_hi}] is empty"
            )));
        }
        if let Some(e) = ratings
            .entries()
            .iter()
            .find(|e| e.value < scale_lo || e.value > scale_hi)
        {
            return Err(Error::InvalidDataset(format!(
                "rating {} for ({}, {}) outside [{scale_lo}, {scale_hi}]",
                e.value,
                ratings.row_labels()[e.row],
                ratings.col_labels()[e.col]
            )));
        }
        if ratings.row_labels().iter().any(|id| id.namespace != Namespace::User)
            || ratings.col_labels().iter().any(|id| id.namespace != Namespace::Item)
        {
            return Err(Error::InvalidDataset("rating matrix must be users x items".into()));
        }
        Ok(RatingDataset {
            ratings,
            scale_lo,
            scale_hi,
        })
    }

    pub fn users(&self) -> &Labels {
        self.ratings.row_labels()
    }

    pub fn items(&self) -> &Labels {
        self.ratings.col_labels()
    }

    pub fn clamp(&self, x: f64) -> f64 {
        x.clamp(self.scale_lo, self.scale_hi)
    }

    /// Same labels and scale with a different set of observed ratings.
    pub fn with_ratings(&self, ratings: SparseMatrix) -> Self {
        RatingDataset {
            ratings,
            scale_lo: self.scale_lo,
            scale_hi: self.scale_hi,
        }
    }
}

/// One entity that appears both in a source and in the global namespace.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SharedEntity {
    /// Row position inside the source matrix.
    pub local: usize,
    /// Column position in the global `U` (or `V`).
    pub global: usize,
    pub id: EntityId,
}

/// Result of matching a source's entities against the global namespace,
/// in global order.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct AlignmentReport {
    pub shared: Vec<SharedEntity>,
}

impl AlignmentReport {
    pub fn len(&self) -> usize {
        self.shared.len()
    }

    pub fn is_empty(&self) -> bool {
        self.shared.is_empty()
    }

    pub fn ids(&self) -> impl Iterator<Item = &EntityId> {
        self.shared.iter().map(|s| &s.id)
    }
}

/// A user-attribute (`kind = User`) or item-attribute (`kind = Item`)
/// matrix. Rows are users (resp. items); columns are the source's own
/// attributes.
#[derive(Clone, Debug)]
pub struct SourceMatrix {
    pub id: SourceId,
    pub matrix: SparseMatrix,
    /// Filled by [`Problem::new`]; empty until the source is aligned.
    pub shared: AlignmentReport,
}

impl SourceMatrix {
    pub fn new(id: SourceId, matrix: SparseMatrix) -> Result<Self> {
        let entity_ns = entity_namespace(id.kind);
        if matrix.row_labels().iter().any(|l| l.namespace != entity_ns) {
            return Err(Error::InvalidDataset(format!(
                "source {id}: rows must be in the {} namespace",
                id.kind
            )));
        }
        if matrix
            .col_labels()
            .iter()
            .any(|l| l.namespace != Namespace::Attribute(id))
        {
            return Err(Error::InvalidDataset(format!(
                "source {id}: columns must be attributes of that source"
            )));
        }
        Ok(SourceMatrix {
            id,
            matrix,
            shared: AlignmentReport::default(),
        })
    }

    /// Builds a source from `(entity_key, attribute_key, value)` triples.
    pub fn from_triples<I, R, C>(id: SourceId, triples: I) -> Result<Self>
    where
        I: IntoIterator<Item = (R, C, f64)>,
        R: Into<String>,
        C: Into<String>,
    {
        let m = SparseMatrix::build(triples, entity_namespace(id.kind), Namespace::Attribute(id))?;
        Self::new(id, m)
    }

    pub fn kind(&self) -> SourceKind {
        self.id.kind
    }

    pub fn entities(&self) -> &Labels {
        self.matrix.row_labels()
    }

    pub fn attributes(&self) -> &Labels {
        self.matrix.col_labels()
    }

    /// `is_shared[p]` is true iff local entity `p` also lives in the global
    /// namespace.
    pub fn shared_mask(&self) -> Vec<bool> {
        let mut mask = vec![false; self.matrix.n_rows()];
        for s in &self.shared.shared {
            mask[s.local] = true;
        }
        mask
    }
}

pub fn entity_namespace(kind: SourceKind) -> Namespace {
    match kind {
        SourceKind::User => Namespace::User,
        SourceKind::Item => Namespace::Item,
    }
}

/// Finds the entities a source shares with the global users (for a user
/// source) or items (for an item source). Order follows the global list.
pub fn align_source(
    source: &SourceMatrix,
    global_users: &Labels,
    global_items: &Labels,
) -> AlignmentReport {
    let global = match source.kind() {
        SourceKind::User => global_users,
        SourceKind::Item => global_items,
    };
    let local = source.entities();
    let shared = global
        .iter()
        .enumerate()
        .filter_map(|(g, id)| {
            local.position(id).map(|l| SharedEntity {
                local: l,
                global: g,
                id: id.clone(),
            })
        })
        .collect();
    AlignmentReport { shared }
}

/// A rating matrix plus aligned sources, each side sorted by source index.
/// This is the input every trainer consumes.
#[derive(Clone, Debug)]
pub struct Problem {
    pub ratings: RatingDataset,
    pub user_sources: Vec<SourceMatrix>,
    pub item_sources: Vec<SourceMatrix>,
}

impl Problem {
    pub fn new(ratings: RatingDataset, sources: Vec<SourceMatrix>) -> Result<Self> {
        let (mut user_sources, mut item_sources): (Vec<_>, Vec<_>) =
            sources.into_iter().partition(|s| s.kind() == SourceKind::User);
        for side in [&mut user_sources, &mut item_sources] {
            side.sort_by_key(|s| s.id.index);
            if let Some(w) = side.windows(2).find(|w| w[0].id == w[1].id) {
                return Err(Error::InvalidDataset(format!("duplicate source {}", w[0].id)));
            }
            for s in side.iter_mut() {
                s.shared = align_source(s, ratings.users(), ratings.items());
            }
        }
        Ok(Problem {
            ratings,
            user_sources,
            item_sources,
        })
    }

    pub fn without_sources(ratings: RatingDataset) -> Self {
        Problem {
            ratings,
            user_sources: Vec::new(),
            item_sources: Vec::new(),
        }
    }

    /// Same sources, different rating matrix (e.g. a training split).
    pub fn with_ratings(&self, ratings: RatingDataset) -> Result<Self> {
        Self::new(ratings, self.sources().cloned().collect())
    }

    /// All sources in canonical order: user sources, then item sources.
    pub fn sources(&self) -> impl Iterator<Item = &SourceMatrix> {
        self.user_sources.iter().chain(&self.item_sources)
    }

    pub fn total_nnz(&self) -> usize {
        self.ratings.ratings.nnz() + self.sources().map(|s| s.matrix.nnz()).sum::<usize>()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn global_users(n: usize) -> Labels {
        Labels::from_ids((1..=n).map(|i| EntityId::user(format!("u{i}"))))
    }

    fn user_source(keys: &[&str]) -> SourceMatrix {
        SourceMatrix::from_triples(
            SourceId::user(0),
            keys.iter().map(|k| (k.to_string(), "a".to_string(), 1.0)),
        )
        .unwrap()
    }

    fn shared_keys(r: &AlignmentReport) -> Vec<&str> {
        r.ids().map(|id| id.key.as_str()).collect()
    }

    #[test]
    fn partial_overlap() {
        let r = align_source(&user_source(&["u4", "u3"]), &global_users(5), &Labels::new());
        assert_eq!(shared_keys(&r), ["u3", "u4"]);
        assert_eq!(r.shared[0].local, 1);
        assert_eq!(r.shared[0].global, 2);
    }

    #[test]
    fn disjoint_is_empty() {
        let r = align_source(&user_source(&["x", "y"]), &global_users(5), &Labels::new());
        assert!(r.is_empty());
    }

    #[test]
    fn leading_users() {
        let s = user_source(&["u1", "u2", "u3"]);
        let r = align_source(&s, &global_users(5), &Labels::new());
        assert_eq!(shared_keys(&r), ["u1", "u2", "u3"]);
        assert_eq!(r, align_source(&s, &global_users(5), &Labels::new()));
    }

    #[test]
    fn namespaces_must_match_exactly() {
        // an item called "u1" is not the user "u1"
        let s = SourceMatrix::from_triples(SourceId::item(0), [("u1", "a", 1.0)]).unwrap();
        let items = Labels::from_ids([EntityId::item("i1")]);
        let r = align_source(&s, &global_users(3), &items);
        assert!(r.is_empty());
    }

    #[test]
    fn rating_scale_enforced() {
        let m = SparseMatrix::build([("u1", "i1", 6.0)], Namespace::User, Namespace::Item).unwrap();
        assert!(RatingDataset::new(m.clone(), 1.0, 5.0).is_err());
        assert!(RatingDataset::new(m, 5.0, 1.0).is_err());
    }
}

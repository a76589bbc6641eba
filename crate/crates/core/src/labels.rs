use std::collections::HashMap;
use std::ops::Index;

use crate::entity::EntityId;

/// Ordered, duplicate-free list of entity labels with position lookup.
#[derive(Clone, Debug, Default)]
pub struct Labels {
    ids: Vec<EntityId>,
    positions: HashMap<EntityId, usize>,
}

impl Labels {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds from an iterator, keeping first-appearance order and dropping
    /// repeats.
    pub fn from_ids<I: IntoIterator<Item = EntityId>>(ids: I) -> Self {
        let mut labels = Labels::new();
        for id in ids {
            labels.intern(id);
        }
        labels
    }

    /// Returns the position of `id`, appending it if unseen.
    pub fn intern(&mut self, id: EntityId) -> usize {
        if let Some(&pos) = self.positions.get(&id) {
            return pos;
        }
        let pos = self.ids.len();
        self.positions.insert(id.clone(), pos);
        self.ids.push(id);
        pos
    }

    pub fn position(&self, id: &EntityId) -> Option<usize> {
        self.positions.get(id).copied()
    }

    pub fn contains(&self, id: &EntityId) -> bool {
        self.positions.contains_key(id)
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, EntityId> {
        self.ids.iter()
    }

    pub fn as_slice(&self) -> &[EntityId] {
        &self.ids
    }
}

impl Index<usize> for Labels {
    type Output = EntityId;

    fn index(&self, pos: usize) -> &EntityId {
        &self.ids[pos]
    }
}

impl PartialEq for Labels {
    fn eq(&self, other: &Self) -> bool {
        self.ids == other.ids
    }
}

impl<'a> IntoIterator for &'a Labels {
    type Item = &'a EntityId;
    type IntoIter = std::slice::Iter<'a, EntityId>;

    fn into_iter(self) -> Self::IntoIter {
        self.ids.iter()
    }
}

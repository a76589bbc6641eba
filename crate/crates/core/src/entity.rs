use std::fmt;

use serde::{Deserialize, Serialize};

/// Which side of the model a data source describes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SourceKind {
    User,
    Item,
}

impl fmt::Display for SourceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SourceKind::User => f.write_str("user"),
            SourceKind::Item => f.write_str("item"),
        }
    }
}

/// Identifies one source matrix: its side and its index on that side.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SourceId {
    pub kind: SourceKind,
    pub index: usize,
}

impl SourceId {
    pub fn user(index: usize) -> Self {
        SourceId {
            kind: SourceKind::User,
            index,
        }
    }

    pub fn item(index: usize) -> Self {
        SourceId {
            kind: SourceKind::Item,
            index,
        }
    }
}

impl fmt::Display for SourceId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.kind, self.index)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Namespace {
    User,
    Item,
    /// Attribute columns of one source matrix (tags, genres, friends...).
    Attribute(SourceId),
}

/// An entity label. Two ids are the same entity iff namespace and key are
/// byte-identical; no fuzzy linking is attempted.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EntityId {
    pub namespace: Namespace,
    pub key: String,
}

impl EntityId {
    pub fn new(namespace: Namespace, key: impl Into<String>) -> Self {
        EntityId {
            namespace,
            key: key.into(),
        }
    }

    pub fn user(key: impl Into<String>) -> Self {
        Self::new(Namespace::User, key)
    }

    pub fn item(key: impl Into<String>) -> Self {
        Self::new(Namespace::Item, key)
    }
}

impl fmt::Display for EntityId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.namespace {
            Namespace::User => write!(f, "user/{}", self.key),
            Namespace::Item => write!(f, "item/{}", self.key),
            Namespace::Attribute(src) => write!(f, "attr[{src}]/{}", self.key),
        }
    }
}

//! Coordinate-form sparse matrices with entity-labelled rows and columns.
//!
//! Every observed cell is one [`Entry`]. The set of stored coordinates is the
//! indicator of the matrix: a cell contributes to the loss iff it is present.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;
use std::sync::Arc;

use crate::entity::{EntityId, Namespace};
use crate::error::{Error, Result};
use crate::labels::Labels;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Entry {
    pub row: usize,
    pub col: usize,
    pub value: f64,
}

#[derive(Clone, Debug)]
pub struct SparseMatrix {
    rows: Arc<Labels>,
    cols: Arc<Labels>,
    entries: Vec<Entry>,
    lookup: HashMap<(usize, usize), usize>,
}

impl SparseMatrix {
    /// Builds a matrix from `(row_key, col_key, value)` triples. Labels are
    /// assigned in order of first appearance.
    pub fn build<I, R, C>(triples: I, row_ns: Namespace, col_ns: Namespace) -> Result<Self>
    where
        I: IntoIterator<Item = (R, C, f64)>,
        R: Into<String>,
        C: Into<String>,
    {
        let mut rows = Labels::new();
        let mut cols = Labels::new();
        let mut entries = Vec::new();
        for (r, c, value) in triples {
            let row = rows.intern(EntityId::new(row_ns, r));
            let col = cols.intern(EntityId::new(col_ns, c));
            entries.push(Entry { row, col, value });
        }
        Self::from_parts(Arc::new(rows), Arc::new(cols), entries)
    }

    /// Assembles a matrix over fixed label sets, validating every entry.
    pub fn from_parts(rows: Arc<Labels>, cols: Arc<Labels>, entries: Vec<Entry>) -> Result<Self> {
        let mut lookup = HashMap::with_capacity(entries.len());
        for (pos, e) in entries.iter().enumerate() {
            if e.row >= rows.len() || e.col >= cols.len() {
                return Err(Error::DimensionMismatch(format!(
                    "entry ({}, {}) outside {}x{} matrix",
                    e.row,
                    e.col,
                    rows.len(),
                    cols.len()
                )));
            }
            if !e.value.is_finite() {
                return Err(Error::NonFiniteValue {
                    row: rows[e.row].key.clone(),
                    col: cols[e.col].key.clone(),
                    value: e.value,
                });
            }
            if lookup.insert((e.row, e.col), pos).is_some() {
                return Err(Error::DuplicateCoordinate {
                    row: rows[e.row].key.clone(),
                    col: cols[e.col].key.clone(),
                });
            }
        }
        Ok(SparseMatrix {
            rows,
            cols,
            entries,
            lookup,
        })
    }

    /// Same labels, different observed cells.
    pub fn with_entries(&self, entries: Vec<Entry>) -> Result<Self> {
        Self::from_parts(self.rows.clone(), self.cols.clone(), entries)
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_cols(&self) -> usize {
        self.cols.len()
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> &[Entry] {
        &self.entries
    }

    pub fn row_labels(&self) -> &Labels {
        &self.rows
    }

    pub fn col_labels(&self) -> &Labels {
        &self.cols
    }

    pub fn row_labels_arc(&self) -> Arc<Labels> {
        self.rows.clone()
    }

    pub fn col_labels_arc(&self) -> Arc<Labels> {
        self.cols.clone()
    }

    /// Indicator function: true iff the cell was observed.
    pub fn contains(&self, row: usize, col: usize) -> bool {
        self.lookup.contains_key(&(row, col))
    }

    pub fn get(&self, row: usize, col: usize) -> Option<f64> {
        self.lookup.get(&(row, col)).map(|&p| self.entries[p].value)
    }

    /// Number of observed cells in each row.
    pub fn row_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.n_rows()];
        for e in &self.entries {
            counts[e.row] += 1;
        }
        counts
    }

    /// Number of observed cells in each column.
    pub fn col_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.n_cols()];
        for e in &self.entries {
            counts[e.col] += 1;
        }
        counts
    }

    /// Serializes as tab-separated `row_key<TAB>col_key<TAB>value` lines in
    /// entry order.
    pub fn to_triples(&self) -> String {
        let mut out = String::new();
        for e in &self.entries {
            let _ = writeln!(
                out,
                "{}\t{}\t{}",
                self.rows[e.row].key, self.cols[e.col].key, e.value
            );
        }
        out
    }

    /// Parses the triple format. Blank lines and `#` comments are skipped.
    pub fn parse_triples(
        text: &str,
        row_ns: Namespace,
        col_ns: Namespace,
        origin: &Path,
    ) -> Result<Self> {
        let mut triples = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let parse_err = |msg: String| Error::Parse {
                path: origin.to_path_buf(),
                line: lineno + 1,
                msg,
            };
            let mut fields = line.split('\t');
            let (Some(r), Some(c), Some(v), None) =
                (fields.next(), fields.next(), fields.next(), fields.next())
            else {
                return Err(parse_err("expected 3 tab-separated fields".into()));
            };
            let value: f64 = v
                .trim()
                .parse()
                .map_err(|_| parse_err(format!("bad value {v:?}")))?;
            triples.push((r.to_owned(), c.to_owned(), value));
        }
        Self::build(triples, row_ns, col_ns)
    }

    pub fn read_triples(path: &Path, row_ns: Namespace, col_ns: Namespace) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse_triples(&text, row_ns, col_ns, path)
    }
}

impl PartialEq for SparseMatrix {
    fn eq(&self, other: &Self) -> bool {
        self.rows == other.rows && self.cols == other.cols && self.entries == other.entries
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ns() -> (Namespace, Namespace) {
        (Namespace::User, Namespace::Item)
    }

    #[test]
    fn single_entry() {
        let (r, c) = ns();
        let m = SparseMatrix::build([("u1", "i1", 1.0)], r, c).unwrap();
        assert_eq!((m.n_rows(), m.n_cols(), m.nnz()), (1, 1, 1));
        assert_eq!(m.get(0, 0), Some(1.0));
    }

    #[test]
    fn duplicate_rejected() {
        let (r, c) = ns();
        let err = SparseMatrix::build([("u1", "i1", 1.0), ("u1", "i1", 2.0)], r, c).unwrap_err();
        assert!(matches!(err, Error::DuplicateCoordinate { .. }));
    }

    #[test]
    fn non_finite_rejected() {
        let (r, c) = ns();
        let err = SparseMatrix::build([("u1", "i1", f64::NAN)], r, c).unwrap_err();
        assert!(matches!(err, Error::NonFiniteValue { .. }));
    }

    #[test]
    fn indicator_matches_hand_enumeration() {
        let (r, c) = ns();
        let m = SparseMatrix::build(
            [("u1", "i1", 1.0), ("u1", "i2", 2.0), ("u2", "i2", 3.0)],
            r,
            c,
        )
        .unwrap();
        assert_eq!((m.n_rows(), m.n_cols(), m.nnz()), (2, 2, 3));
        let observed = [(0, 0), (0, 1), (1, 1)];
        for row in 0..2 {
            for col in 0..2 {
                assert_eq!(m.contains(row, col), observed.contains(&(row, col)));
            }
        }
        assert!(!m.contains(1, 0));
        assert_eq!(m.row_counts(), vec![2, 1]);
        assert_eq!(m.col_counts(), vec![1, 2]);
    }

    #[test]
    fn parse_skips_comments_and_reports_line() {
        let text = "# header\nu1\ti1\t0.5\n\nu2\ti1\tnope\n";
        let err = SparseMatrix::parse_triples(text, Namespace::User, Namespace::Item, Path::new("x.tsv"))
            .unwrap_err();
        match err {
            Error::Parse { line, .. } => assert_eq!(line, 4),
            other => panic!("unexpected {other:?}"),
        }
    }

    proptest! {
        #[test]
        fn triple_round_trip(cells in proptest::collection::btree_map((0u8..12, 0u8..12), -1e6f64..1e6, 0..40)) {
            let triples: Vec<_> = cells.iter().map(|(&(r, c), &v)| (format!("r{r}"), format!("c{c}"), v)).collect();
            let m = SparseMatrix::build(triples, Namespace::User, Namespace::Attribute(crate::entity::SourceId::user(0))).unwrap();
            let back = SparseMatrix::parse_triples(&m.to_triples(), Namespace::User, Namespace::Attribute(crate::entity::SourceId::user(0)), Path::new("-")).unwrap();
            prop_assert_eq!(&m, &back);
            prop_assert_eq!(m.nnz(), cells.len());
            for e in m.entries() {
                prop_assert!(m.contains(e.row, e.col));
            }
        }
    }
}

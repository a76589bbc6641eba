//! Build a rating matrix and two sources from triples, align them, then
//! round-trip the dataset through a manifest on disk.
//!
//!     cargo run --example ingest_and_align

use mspmf::io::{load_dataset, write_dataset};
use mspmf::{Namespace, Problem, RatingDataset, SourceId, SourceMatrix, SparseMatrix};

fn main() -> mspmf::Result<()> {
    let ratings = SparseMatrix::build(
        [
            ("u1", "i1", 5.0),
            ("u1", "i3", 3.0),
            ("u2", "i2", 4.0),
            ("u3", "i1", 1.0),
            ("u4", "i3", 2.0),
            ("u5", "i2", 4.5),
        ],
        Namespace::User,
        Namespace::Item,
    )?;
    let ratings = RatingDataset::new(ratings, 1.0, 5.0)?;

    // A social graph over u1..u3 and a tag profile over u3, u4 and a user
    // the recommender has never seen.
    let social = SourceMatrix::from_triples(
        SourceId::user(0),
        [("u1", "u2", 1.0), ("u2", "u3", 1.0), ("u3", "u1", 1.0)],
    )?;
    let tags = SourceMatrix::from_triples(
        SourceId::user(1),
        [("u3", "jazz", 0.7), ("u4", "rock", 0.9), ("guest", "jazz", 0.4)],
    )?;

    let problem = Problem::new(ratings.clone(), vec![social.clone(), tags.clone()])?;
    for s in problem.sources() {
        let shared: Vec<_> = s.shared.ids().map(|id| id.key.as_str()).collect();
        println!(
            "{}: {} entities x {} attributes, shared with ratings: {:?}",
            s.id,
            s.entities().len(),
            s.attributes().len(),
            shared
        );
    }

    let dir = tempfile::tempdir().expect("temp dir");
    let manifest = write_dataset(dir.path(), &ratings, &[social, tags])?;
    println!("\n{}", std::fs::read_to_string(&manifest).expect("manifest"));
    let back = load_dataset(&manifest)?;
    assert_eq!(back.ratings, ratings);
    println!("reloaded {} ratings and {} sources", back.ratings.ratings.nnz(), back.sources.len());
    Ok(())
}

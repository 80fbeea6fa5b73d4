//! Regenerates the files bundled under `data/`. Everything is seeded, so the
//! outputs are byte-stable across runs.
//!
//! ```text
//! cargo run -p ensemble-geometry --example regen_data
//! ```

use std::path::PathBuf;

use ensemble_geometry::io::{save_scores_document, write_dataset_csv, ScoresDocument};
use ensemble_geometry::learners::{build_forest, stratified_split};
use ensemble_geometry::space::{EnsembleGroup, IdealLabels, ScoreMatrix};
use ensemble_geometry::synth;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let data = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data");
    std::fs::create_dir_all(&data)?;

    // The 2-instance, 3-class worked scenario with three base classifiers.
    let group = EnsembleGroup::new(vec![
        ScoreMatrix::new("cf1", 2, 3, vec![0.5, 0.6, 0.3, 0.7, 0.3, 0.9])?,
        ScoreMatrix::new("cf2", 2, 3, vec![0.4, 0.7, 0.2, 0.3, 0.6, 0.7])?,
        ScoreMatrix::new("cf3", 2, 3, vec![0.6, 0.8, 0.4, 0.2, 0.6, 0.8])?,
    ])?;
    let ideal = IdealLabels::new(2, 3, vec![0.0, 1.0, 0.0, 1.0, 0.0, 1.0])?;
    let mut doc = ScoresDocument::new(group, ideal);
    doc.class_names = Some(vec!["cl1".into(), "cl2".into(), "cl3".into()]);
    save_scores_document(&doc, data.join("example_scores.json"))?;

    // A realistic selection playground: eight trees scoring a held-out
    // partition of the separable synthetic dataset.
    let ds = synth::separable(60, 13);
    let (train, test) = stratified_split(&ds, 0.8, 13)?;
    let forest = build_forest(&train, 8, 13)?;
    let mut demo = ScoresDocument::new(forest.score_group(&test)?, test.ideal_labels()?);
    demo.class_names = Some(test.class_names().to_vec());
    save_scores_document(&demo, data.join("selection_demo.json"))?;

    write_dataset_csv(&synth::separable(510, 2024), data.join("synthetic_separable.csv"))?;
    write_dataset_csv(&synth::noisy(500, 2025), data.join("synthetic_noisy.csv"))?;

    println!("regenerated data/ under {}", data.display());
    Ok(())
}

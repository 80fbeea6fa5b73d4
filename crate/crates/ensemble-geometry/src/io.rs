//! File formats: the scores-group JSON document, dataset CSV, results tables,
//! and plain numeric column files.
//!
//! Loaders re-validate every domain invariant — a file is never trusted just
//! because this crate wrote it. Floats are serialized in shortest round-trip
//! decimal form, so save-then-load reproduces every value bit-exactly.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eval::ExperimentRow;
use crate::learners::Dataset;
use crate::space::{EnsembleGroup, IdealLabels, ScoreMatrix, ScorePoint};
use crate::weights::WeightVector;

/// A parsed scores file: group + ideal point, with optional class names and a
/// previously fitted weight vector for reuse on other partitions.
#[derive(Debug, Clone)]
pub struct ScoresDocument {
    pub group: EnsembleGroup,
    pub ideal: IdealLabels,
    pub class_names: Option<Vec<String>>,
    pub weights: Option<WeightVector>,
}

impl ScoresDocument {
    pub fn new(group: EnsembleGroup, ideal: IdealLabels) -> Self {
        ScoresDocument { group, ideal, class_names: None, weights: None }
    }
}

#[derive(Serialize, Deserialize)]
struct ScoresRepr {
    n: usize,
    p: usize,
    m: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    class_names: Option<Vec<String>>,
    labels: Vec<Vec<f64>>,
    classifiers: Vec<ClassifierRepr>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    weights: Option<Vec<f64>>,
}

#[derive(Serialize, Deserialize)]
struct ClassifierRepr {
    id: String,
    scores: Vec<Vec<f64>>,
}

fn flatten_rows(rows: &[Vec<f64>], n: usize, p: usize, what: &str) -> Result<Vec<f64>> {
    if rows.len() != n {
        return Err(Error::Parse(format!(
            "{what}: declared n={n} but found {} rows",
            rows.len()
        )));
    }
    let mut flat = Vec::with_capacity(n * p);
    for (i, row) in rows.iter().enumerate() {
        if row.len() != p {
            return Err(Error::Parse(format!(
                "{what}: row {} has {} values, expected p={p}",
                i + 1,
                row.len()
            )));
        }
        flat.extend_from_slice(row);
    }
    Ok(flat)
}

/// Parses and fully validates a scores JSON document.
pub fn parse_scores_json(bytes: &[u8]) -> Result<ScoresDocument> {
    let repr: ScoresRepr =
        serde_json::from_slice(bytes).map_err(|e| Error::Parse(e.to_string()))?;
    if repr.classifiers.len() != repr.m {
        return Err(Error::Parse(format!(
            "declared m={} but found {} classifier payloads",
            repr.m,
            repr.classifiers.len()
        )));
    }
    let ideal = IdealLabels::new(repr.n, repr.p, flatten_rows(&repr.labels, repr.n, repr.p, "labels")?)?;
    let members = repr
        .classifiers
        .iter()
        .map(|c| {
            let flat = flatten_rows(&c.scores, repr.n, repr.p, &format!("classifier {:?}", c.id))?;
            ScoreMatrix::new(c.id.clone(), repr.n, repr.p, flat)
        })
        .collect::<Result<Vec<_>>>()?;
    let group = EnsembleGroup::new(members)?;
    if let Some(names) = &repr.class_names {
        if names.len() != repr.p {
            return Err(Error::Parse(format!(
                "{} class names for p={} classes",
                names.len(),
                repr.p
            )));
        }
    }
    let weights = match repr.weights {
        None => None,
        Some(values) => {
            if values.len() != repr.m {
                return Err(Error::Parse(format!(
                    "{} weights for m={} classifiers",
                    values.len(),
                    repr.m
                )));
            }
            Some(WeightVector::new(values)?)
        }
    };
    Ok(ScoresDocument { group, ideal, class_names: repr.class_names, weights })
}

pub fn load_scores_document(path: impl AsRef<Path>) -> Result<ScoresDocument> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    parse_scores_json(&bytes)
}

/// Loads just the group and ideal point from a scores file.
pub fn load_scores_json(path: impl AsRef<Path>) -> Result<(EnsembleGroup, IdealLabels)> {
    let doc = load_scores_document(path)?;
    Ok((doc.group, doc.ideal))
}

pub fn scores_document_to_json(doc: &ScoresDocument) -> String {
    let (n, p) = doc.group.shape();
    let to_rows = |flat: &[f64]| -> Vec<Vec<f64>> {
        (0..n).map(|i| flat[i * p..(i + 1) * p].to_vec()).collect()
    };
    let repr = ScoresRepr {
        n,
        p,
        m: doc.group.len(),
        class_names: doc.class_names.clone(),
        labels: to_rows(doc.ideal.coords()),
        classifiers: doc
            .group
            .members()
            .iter()
            .map(|s| ClassifierRepr {
                id: s.classifier_id().to_string(),
                scores: to_rows(s.coords()),
            })
            .collect(),
        weights: doc.weights.as_ref().map(|w| w.values().to_vec()),
    };
    let mut out = serde_json::to_string_pretty(&repr).expect("representation serializes");
    out.push('\n');
    out
}

pub fn save_scores_document(doc: &ScoresDocument, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, scores_document_to_json(doc)).map_err(|e| Error::io(path, e))
}

/// Saves a group and ideal point; round-trips bit-exactly through
/// [`load_scores_json`].
pub fn save_scores_json(
    group: &EnsembleGroup,
    ideal: &IdealLabels,
    path: impl AsRef<Path>,
) -> Result<()> {
    save_scores_document(&ScoresDocument::new(group.clone(), ideal.clone()), path)
}

/// Parses a dataset CSV: header row, numeric feature columns, and a label
/// column named `class`. Class indices follow the lexicographic order of the
/// distinct label strings.
pub fn parse_dataset_csv(bytes: &[u8]) -> Result<Dataset> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(bytes);
    let headers = reader
        .headers()
        .map_err(|e| Error::Parse(format!("header row: {e}")))?
        .clone();
    if headers.is_empty() {
        return Err(Error::Parse("empty file".into()));
    }
    let class_col = headers
        .iter()
        .position(|h| h == "class")
        .ok_or_else(|| Error::Parse("missing \"class\" column".into()))?;
    let feature_cols: Vec<usize> =
        (0..headers.len()).filter(|&c| c != class_col).collect();
    if feature_cols.is_empty() {
        return Err(Error::Parse("no feature columns besides \"class\"".into()));
    }

    let mut features: Vec<f64> = Vec::new();
    let mut label_strings: Vec<String> = Vec::new();
    for (r, record) in reader.records().enumerate() {
        let row = r + 1;
        let record = record.map_err(|e| Error::Parse(format!("row {row}: {e}")))?;
        if record.len() != headers.len() {
            return Err(Error::Parse(format!(
                "row {row}: {} fields, expected {}",
                record.len(),
                headers.len()
            )));
        }
        for &c in &feature_cols {
            let cell = record.get(c).unwrap_or("").trim();
            if cell.is_empty() {
                return Err(Error::Parse(format!(
                    "row {row}: missing value in column {:?}",
                    &headers[c]
                )));
            }
            let value: f64 = cell.parse().map_err(|_| {
                Error::Parse(format!(
                    "row {row}: non-numeric value {cell:?} in column {:?}",
                    &headers[c]
                ))
            })?;
            if !value.is_finite() {
                return Err(Error::Parse(format!(
                    "row {row}: non-finite value in column {:?}",
                    &headers[c]
                )));
            }
            features.push(value);
        }
        let label = record.get(class_col).unwrap_or("").trim();
        if label.is_empty() {
            return Err(Error::Parse(format!("row {row}: missing value in column \"class\"")));
        }
        label_strings.push(label.to_string());
    }
    if label_strings.is_empty() {
        return Err(Error::Parse("empty file: no data rows".into()));
    }

    let mut class_names: Vec<String> = label_strings.clone();
    class_names.sort_unstable();
    class_names.dedup();
    let labels: Vec<usize> = label_strings
        .iter()
        .map(|s| class_names.binary_search(s).expect("label is in the sorted name list"))
        .collect();
    Dataset::new(features, feature_cols.len(), labels, class_names)
}

pub fn load_dataset_csv(path: impl AsRef<Path>) -> Result<Dataset> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    parse_dataset_csv(&bytes)
}

/// Writes a dataset back out in the CSV layout [`parse_dataset_csv`] reads,
/// with generated feature headers `x1..xd`.
pub fn write_dataset_csv(ds: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut out = String::new();
    for j in 0..ds.num_features() {
        out.push_str(&format!("x{},", j + 1));
    }
    out.push_str("class\n");
    for i in 0..ds.num_instances() {
        for v in ds.row(i) {
            out.push_str(&format!("{v},"));
        }
        out.push_str(&ds.class_names()[ds.labels()[i]]);
        out.push('\n');
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

/// Results-table output format.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ResultsFormat {
    Csv,
    Json,
}

pub const RESULTS_CSV_HEADER: &str = "m,rf_train_acc,wrf_train_acc,rf_train_dist,wrf_train_dist,\
rf_test_acc,wrf_test_acc,rf_test_dist,wrf_test_dist,best_single_acc,avg_single_acc";

/// Formats a value to `sig` significant digits in plain decimal notation.
pub fn fmt_sig(x: f64, sig: usize) -> String {
    let sig = sig.max(1);
    if x == 0.0 {
        return format!("{:.*}", sig - 1, 0.0);
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let magnitude = x.abs().log10().floor() as i32;
    let decimals = (sig as i32 - 1 - magnitude).clamp(0, 17) as usize;
    format!("{x:.decimals$}")
}

pub fn results_to_csv(rows: &[ExperimentRow]) -> String {
    let mut out = String::from(RESULTS_CSV_HEADER);
    out.push('\n');
    for r in rows {
        let cells = [
            r.rf_train_acc,
            r.wrf_train_acc,
            r.rf_train_dist,
            r.wrf_train_dist,
            r.rf_test_acc,
            r.wrf_test_acc,
            r.rf_test_dist,
            r.wrf_test_dist,
            r.best_single_acc,
            r.avg_single_acc,
        ];
        out.push_str(&r.m.to_string());
        for v in cells {
            out.push(',');
            out.push_str(&fmt_sig(v, 6));
        }
        out.push('\n');
    }
    out
}

pub fn results_to_json(rows: &[ExperimentRow]) -> String {
    let mut out = serde_json::to_string_pretty(rows).expect("rows serialize");
    out.push('\n');
    out
}

/// Writes the experiment rows in the chosen format.
pub fn write_results(
    rows: &[ExperimentRow],
    path: impl AsRef<Path>,
    format: ResultsFormat,
) -> Result<()> {
    let path = path.as_ref();
    let body = match format {
        ResultsFormat::Csv => results_to_csv(rows),
        ResultsFormat::Json => results_to_json(rows),
    };
    fs::write(path, body).map_err(|e| Error::io(path, e))
}

/// Parses a plain numeric column: one value per non-empty line.
pub fn parse_column(bytes: &[u8]) -> Result<Vec<f64>> {
    let text =
        std::str::from_utf8(bytes).map_err(|e| Error::Parse(format!("not UTF-8: {e}")))?;
    let mut values = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let v: f64 = line
            .parse()
            .map_err(|_| Error::Parse(format!("line {}: non-numeric value {line:?}", i + 1)))?;
        if !v.is_finite() {
            return Err(Error::Parse(format!("line {}: non-finite value", i + 1)));
        }
        values.push(v);
    }
    Ok(values)
}

pub fn load_column(path: impl AsRef<Path>) -> Result<Vec<f64>> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    parse_column(&bytes)
}

//! CSV ingestion and output, and train/test/validation splits.

use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::types::{Dataset, LabelVector};

fn is_missing(cell: &str) -> bool {
    let c = cell.trim();
    c.is_empty()
        || ["na", "n/a", "?", "null", "nan", "none"]
            .iter()
            .any(|m| c.eq_ignore_ascii_case(m))
}

fn parse_label(cell: &str, row: usize) -> Result<u8> {
    match cell.trim().parse::<f64>() {
        Ok(0.0) => Ok(0),
        Ok(1.0) => Ok(1),
        _ => Err(Error::NonBinaryLabel {
            row,
            value: cell.to_string(),
        }),
    }
}

/// Reads a CSV with a header row. Every column except `label_col` is a
/// numeric feature; `excluded_cols` names features left out of distances.
/// Rows with any missing cell are dropped. Reported row numbers count data
/// rows from 1.
pub fn load_csv(
    path: impl AsRef<Path>,
    label_col: &str,
    excluded_cols: &[String],
) -> Result<Dataset> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path.as_ref())?;
    let headers: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
    let label_position = headers
        .iter()
        .position(|h| h == label_col)
        .ok_or_else(|| Error::InvalidConfig(format!("no column named '{label_col}'")))?;
    let feature_names: Vec<String> = headers
        .iter()
        .enumerate()
        .filter(|&(c, _)| c != label_position)
        .map(|(_, h)| h.clone())
        .collect();
    let mut excluded = Vec::with_capacity(excluded_cols.len());
    for name in excluded_cols {
        let idx = feature_names
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::InvalidConfig(format!("no feature column named '{name}'")))?;
        excluded.push(idx);
    }

    let mut features = Vec::new();
    let mut labels = Vec::new();
    let mut dropped = 0usize;
    for (r, record) in reader.records().enumerate() {
        let row = r + 1;
        let record = record?;
        if record.len() != headers.len() || record.iter().any(is_missing) {
            dropped += 1;
            continue;
        }
        let mut values = Vec::with_capacity(feature_names.len());
        for (c, cell) in record.iter().enumerate() {
            if c == label_position {
                continue;
            }
            let v: f64 = cell.parse().map_err(|e| Error::Parse {
                row,
                column: headers[c].clone(),
                message: format!("{e}"),
            })?;
            if !v.is_finite() {
                return Err(Error::Parse {
                    row,
                    column: headers[c].clone(),
                    message: "value is not finite".into(),
                });
            }
            values.push(v);
        }
        labels.push(parse_label(&record[label_position], row)?);
        features.push(values);
    }
    if dropped > 0 {
        log::info!("dropped {dropped} rows with missing values");
    }
    if features.is_empty() {
        return Err(Error::EmptyDataset);
    }
    Dataset::new(features, labels)?
        .with_column_names(feature_names, label_col, label_position)?
        .with_excluded_cols(excluded)
}

fn write_rows(
    dataset: &Dataset,
    labels: &[u8],
    flipped: Option<&LabelVector>,
    path: &Path,
) -> Result<()> {
    let mut writer = csv::Writer::from_path(path)?;
    let pos = dataset.label_position();
    let mut header: Vec<String> = dataset.feature_names().to_vec();
    header.insert(pos, dataset.label_name().to_string());
    if flipped.is_some() {
        header.push("flipped".into());
    }
    writer.write_record(&header)?;
    for (r, row) in dataset.features().iter().enumerate() {
        let mut cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        cells.insert(pos, labels[r].to_string());
        if let Some(l) = flipped {
            cells.push(u8::from(l.is_flipped(r)).to_string());
        }
        writer.write_record(&cells)?;
    }
    writer.flush()?;
    Ok(())
}

/// Writes the dataset with its original column order.
pub fn save_csv(dataset: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    write_rows(dataset, dataset.labels(), None, path.as_ref())
}

/// Writes the dataset with the label column replaced by the repaired labels
/// and an extra `flipped` 0/1 column.
pub fn write_repaired_csv(
    dataset: &Dataset,
    repaired: &LabelVector,
    path: impl AsRef<Path>,
) -> Result<()> {
    if repaired.len() != dataset.len() {
        return Err(Error::LengthMismatch {
            expected: dataset.len(),
            got: repaired.len(),
        });
    }
    write_rows(dataset, repaired.current(), Some(repaired), path.as_ref())
}

/// A seeded three-way split, with the source row of every example.
#[derive(Debug, Clone)]
pub struct Split {
    pub train: Dataset,
    pub test: Dataset,
    pub validation: Option<Dataset>,
    pub train_rows: Vec<usize>,
    pub test_rows: Vec<usize>,
    pub validation_rows: Vec<usize>,
}

/// Shuffles rows with `seed` and cuts them by `fractions`
/// (train, test, validation), which must sum to 1.
pub fn split_dataset(dataset: &Dataset, fractions: [f64; 3], seed: u64) -> Result<Split> {
    let sum: f64 = fractions.iter().sum();
    if fractions.iter().any(|&f| !(f >= 0.0)) || (sum - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidConfig(format!(
            "split fractions {fractions:?} must be non-negative and sum to 1"
        )));
    }
    let n = dataset.len();
    let mut rows: Vec<usize> = (0..n).collect();
    rows.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let n_train = (fractions[0] * n as f64).round() as usize;
    let n_test = ((fractions[1] * n as f64).round() as usize).min(n - n_train.min(n));
    if n_train == 0 || n_test == 0 {
        return Err(Error::InvalidConfig(format!(
            "{n} rows are too few for split {fractions:?}"
        )));
    }
    let train_rows = rows[..n_train].to_vec();
    let test_rows = rows[n_train..n_train + n_test].to_vec();
    let validation_rows = rows[n_train + n_test..].to_vec();
    Ok(Split {
        train: dataset.subset(&train_rows)?,
        test: dataset.subset(&test_rows)?,
        validation: if validation_rows.is_empty() {
            None
        } else {
            Some(dataset.subset(&validation_rows)?)
        },
        train_rows,
        test_rows,
        validation_rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write(dir: &tempfile::TempDir, name: &str, text: &str) -> std::path::PathBuf {
        let path = dir.path().join(name);
        std::fs::File::create(&path)
            .unwrap()
            .write_all(text.as_bytes())
            .unwrap();
        path
    }

    #[test]
    fn missing_cells_drop_rows() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(&dir, "a.csv", "a,b,label\n1,2,0\n3,,1\n5,6,1\n");
        let d = load_csv(&p, "label", &[]).unwrap();
        assert_eq!(d.len(), 2);
        assert_eq!(d.labels(), &[0, 1]);
        assert_eq!(d.features()[1], vec![5.0, 6.0]);
    }

    #[test]
    fn non_binary_labels_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(&dir, "a.csv", "a,label\n1,0\n2,2\n");
        assert!(matches!(
            load_csv(&p, "label", &[]),
            Err(Error::NonBinaryLabel { row: 2, .. })
        ));
        let p = write(&dir, "b.csv", "a,label\n1,0\nx,1\n");
        assert!(matches!(
            load_csv(&p, "label", &[]),
            Err(Error::Parse { row: 2, ref column, .. }) if column == "a"
        ));
        let p = write(&dir, "c.csv", "a,label\n?,0\n");
        assert!(matches!(
            load_csv(&p, "label", &[]),
            Err(Error::EmptyDataset)
        ));
    }

    #[test]
    fn save_then_load_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(
            &dir,
            "a.csv",
            "y,age,sex,score\n1,31.5,0,0.125\n0,40,1,-2e-3\n",
        );
        let d = load_csv(&p, "y", &["sex".to_string()]).unwrap();
        assert_eq!(d.label_position(), 0);
        assert_eq!(
            d.excluded_cols().iter().copied().collect::<Vec<_>>(),
            vec![1]
        );
        let out = dir.path().join("b.csv");
        save_csv(&d, &out).unwrap();
        let again = load_csv(&out, "y", &["sex".to_string()]).unwrap();
        assert_eq!(d, again);
    }

    #[test]
    fn repaired_csv_has_flipped_column() {
        let dir = tempfile::tempdir().unwrap();
        let d = Dataset::new(vec![vec![1.0], vec![2.0]], vec![1, 0]).unwrap();
        let l = LabelVector::from_parts(vec![0, 0], vec![1, 0]).unwrap();
        let out = dir.path().join("r.csv");
        write_repaired_csv(&d, &l, &out).unwrap();
        let text = std::fs::read_to_string(out).unwrap();
        assert_eq!(text, "x1,label,flipped\n1,0,1\n2,0,0\n");
    }

    #[test]
    fn split_is_seeded_and_disjoint() {
        let d = Dataset::new((0..100).map(|i| vec![i as f64]).collect(), vec![0; 100]).unwrap();
        let s = split_dataset(&d, [0.6, 0.3, 0.1], 4).unwrap();
        assert_eq!((s.train.len(), s.test.len()), (60, 30));
        assert_eq!(s.validation.as_ref().unwrap().len(), 10);
        let mut all: Vec<usize> = s
            .train_rows
            .iter()
            .chain(&s.test_rows)
            .chain(&s.validation_rows)
            .copied()
            .collect();
        all.sort_unstable();
        assert_eq!(all, (0..100).collect::<Vec<_>>());
        assert_eq!(
            split_dataset(&d, [0.6, 0.3, 0.1], 4).unwrap().train_rows,
            s.train_rows
        );
        assert!(split_dataset(&d, [0.6, 0.3, 0.3], 4).is_err());
    }
}

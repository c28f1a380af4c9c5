use std::io::Write;
use std::path::Path;

use crate::data::TabularDataset;
use crate::linalg::Matrix;
use crate::{Error, HardPredictions, Result, SoftPredictions};

#[derive(Debug, Clone, Copy, Default)]
pub struct LoadOptions {
    /// Treat a feature column that duplicates the sensitive column as an error.
    pub strict: bool,
}

/// Model outputs ingested from a predictions CSV.
#[derive(Debug, Clone, PartialEq)]
pub enum Predictions {
    Soft(SoftPredictions),
    Hard(HardPredictions),
}

impl Predictions {
    pub fn len(&self) -> usize {
        match self {
            Predictions::Soft(p) => p.len(),
            Predictions::Hard(p) => p.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PredictionFile {
    pub predictions: Predictions,
    pub sensitive: Vec<u8>,
    pub labels: Option<Vec<u8>>,
}

fn parse_binary(raw: &str, row: usize, col: &str) -> Result<u8> {
    match raw.trim() {
        "0" => Ok(0),
        "1" => Ok(1),
        _ => Err(Error::NonBinaryValue {
            row,
            col: col.to_string(),
        }),
    }
}

fn parse_real(raw: &str, row: usize, col: &str) -> Result<f64> {
    raw.trim()
        .parse::<f64>()
        .map_err(|_| Error::UnparseableNumeric {
            row,
            col: col.to_string(),
        })
}

fn column_index(headers: &csv::StringRecord, name: &str) -> Option<usize> {
    headers.iter().position(|h| h.trim() == name)
}

pub fn load_csv(
    path: impl AsRef<Path>,
    label_col: &str,
    sensitive_col: &str,
) -> Result<TabularDataset> {
    load_csv_with(path, label_col, sensitive_col, LoadOptions::default())
}

/// Reads a header-first, comma-separated file; `label_col` and `sensitive_col`
/// are removed from the features and every other column must be numeric.
pub fn load_csv_with(
    path: impl AsRef<Path>,
    label_col: &str,
    sensitive_col: &str,
    opts: LoadOptions,
) -> Result<TabularDataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path.as_ref())?;
    let headers = rdr.headers()?.clone();
    let yi =
        column_index(&headers, label_col).ok_or_else(|| Error::MissingColumn(label_col.into()))?;
    let si = column_index(&headers, sensitive_col)
        .ok_or_else(|| Error::MissingColumn(sensitive_col.into()))?;
    let feat_idx: Vec<usize> = (0..headers.len()).filter(|&j| j != yi && j != si).collect();
    let feature_names: Vec<String> = feat_idx
        .iter()
        .map(|&j| headers[j].trim().to_string())
        .collect();

    let mut data = Vec::new();
    let mut labels = Vec::new();
    let mut sensitive = Vec::new();
    for (row, rec) in rdr.records().enumerate() {
        let rec = rec?;
        labels.push(parse_binary(&rec[yi], row, label_col)?);
        sensitive.push(parse_binary(&rec[si], row, sensitive_col)?);
        for (&j, name) in feat_idx.iter().zip(&feature_names) {
            data.push(parse_real(&rec[j], row, name)?);
        }
    }
    if labels.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let features = Matrix::new(labels.len(), feat_idx.len(), data)?;
    let dataset = TabularDataset::new(features, labels, sensitive, feature_names)?;
    let dup = dataset.censoring_violations();
    if !dup.is_empty() {
        if opts.strict {
            return Err(Error::CensoringViolation(dup));
        }
        log::warn!("feature column(s) {dup:?} duplicate the sensitive attribute `{sensitive_col}`");
    }
    Ok(dataset)
}

/// Writes features followed by the label and sensitive columns.
pub fn write_csv(
    dataset: &TabularDataset,
    path: impl AsRef<Path>,
    label_col: &str,
    sensitive_col: &str,
) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(Vec::new());
    let mut header: Vec<&str> = dataset.feature_names().iter().map(String::as_str).collect();
    header.push(label_col);
    header.push(sensitive_col);
    wtr.write_record(&header)?;
    for (i, r) in dataset.features().iter_rows().enumerate() {
        let mut rec: Vec<String> = r.iter().map(|v| v.to_string()).collect();
        rec.push(dataset.labels()[i].to_string());
        rec.push(dataset.sensitive()[i].to_string());
        wtr.write_record(&rec)?;
    }
    let bytes = wtr.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    write_atomic(path.as_ref(), &bytes)
}

/// Reads `score` (soft) or `hard` predictions with `s` and optional `y`.
pub fn load_predictions_csv(path: impl AsRef<Path>) -> Result<PredictionFile> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path.as_ref())?;
    let headers = rdr.headers()?.clone();
    let score = column_index(&headers, "score");
    let hard = column_index(&headers, "hard");
    let si = column_index(&headers, "s").ok_or_else(|| Error::MissingColumn("s".into()))?;
    let yi = column_index(&headers, "y");
    let pred_col = match (score, hard) {
        (Some(_), Some(_)) => return Err(Error::AmbiguousColumns),
        (None, None) => return Err(Error::MissingColumn("score".into())),
        (Some(c), None) | (None, Some(c)) => c,
    };

    let mut soft = Vec::new();
    let mut hard_vals = Vec::new();
    let mut sensitive = Vec::new();
    let mut labels = Vec::new();
    for (row, rec) in rdr.records().enumerate() {
        let rec = rec?;
        if score.is_some() {
            let v = parse_real(&rec[pred_col], row, "score")?;
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::ScoreOutOfRange(row));
            }
            soft.push(v);
        } else {
            hard_vals.push(parse_binary(&rec[pred_col], row, "hard")?);
        }
        sensitive.push(parse_binary(&rec[si], row, "s")?);
        if let Some(yi) = yi {
            labels.push(parse_binary(&rec[yi], row, "y")?);
        }
    }
    if sensitive.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let predictions = if score.is_some() {
        Predictions::Soft(SoftPredictions(soft))
    } else {
        Predictions::Hard(HardPredictions(hard_vals))
    };
    Ok(PredictionFile {
        predictions,
        sensitive,
        labels: yi.map(|_| labels),
    })
}

pub fn write_predictions_csv(file: &PredictionFile, path: impl AsRef<Path>) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(Vec::new());
    let first = match file.predictions {
        Predictions::Soft(_) => "score",
        Predictions::Hard(_) => "hard",
    };
    let mut header = vec![first, "s"];
    if file.labels.is_some() {
        header.push("y");
    }
    wtr.write_record(&header)?;
    for i in 0..file.sensitive.len() {
        let mut rec = vec![match &file.predictions {
            Predictions::Soft(p) => p.0[i].to_string(),
            Predictions::Hard(p) => p.0[i].to_string(),
        }];
        rec.push(file.sensitive[i].to_string());
        if let Some(y) = &file.labels {
            rec.push(y[i].to_string());
        }
        wtr.write_record(&rec)?;
    }
    let bytes = wtr.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    write_atomic(path.as_ref(), &bytes)
}

/// Writes through a temporary file in the target directory, then renames.
pub(crate) fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.flush()?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write_tmp(dir: &tempfile::TempDir, name: &str, body: &str) -> std::path::PathBuf {
        let p = dir.path().join(name);
        std::fs::write(&p, body).unwrap();
        p
    }

    #[test]
    fn loads_two_rows() {
        let dir = tempfile::tempdir().unwrap();
        let p = write_tmp(&dir, "d.csv", "a,y,s\n0.5,1,0\n0.2,0,1\n");
        let d = load_csv(&p, "y", "s").unwrap();
        assert_eq!(d.len(), 2);
        assert_eq!(d.dim(), 1);
        assert_eq!(d.labels(), &[1, 0]);
        assert_eq!(d.sensitive(), &[0, 1]);
        assert_eq!(d.features().col_values(0), vec![0.5, 0.2]);
    }

    #[test]
    fn load_errors() {
        let dir = tempfile::tempdir().unwrap();
        let p = write_tmp(&dir, "a.csv", "a,y\n0.5,1\n");
        assert!(matches!(load_csv(&p, "y", "s"), Err(Error::MissingColumn(c)) if c == "s"));
        let p = write_tmp(&dir, "b.csv", "a,y,s\n0.5,1,2\n");
        assert!(matches!(
            load_csv(&p, "y", "s"),
            Err(Error::NonBinaryValue { row: 0, .. })
        ));
        let p = write_tmp(&dir, "c.csv", "a,y,s\n");
        assert!(matches!(load_csv(&p, "y", "s"), Err(Error::EmptyDataset)));
        let p = write_tmp(&dir, "d.csv", "a,y,s\n0.1,1,0\nabc,1,1\n");
        assert!(matches!(
            load_csv(&p, "y", "s"),
            Err(Error::UnparseableNumeric { row: 1, .. })
        ));
    }

    #[test]
    fn censoring_warning_vs_strict() {
        let dir = tempfile::tempdir().unwrap();
        let p = write_tmp(&dir, "d.csv", "copy,a,y,s\n1,0.5,1,1\n0,0.2,0,0\n");
        let d = load_csv(&p, "y", "s").unwrap();
        assert_eq!(d.censoring_violations(), vec!["copy".to_string()]);
        let strict = load_csv_with(&p, "y", "s", LoadOptions { strict: true });
        assert!(matches!(strict, Err(Error::CensoringViolation(_))));
    }

    #[test]
    fn predictions_files() {
        let dir = tempfile::tempdir().unwrap();
        let p = write_tmp(&dir, "p.csv", "score,s\n0.9,1\n0.1,0\n");
        let f = load_predictions_csv(&p).unwrap();
        assert_eq!(
            f.predictions,
            Predictions::Soft(SoftPredictions(vec![0.9, 0.1]))
        );
        assert_eq!(f.sensitive, vec![1, 0]);
        assert_eq!(f.labels, None);

        let p = write_tmp(&dir, "h.csv", "hard,s,y\n1,1,1\n0,0,0\n");
        let f = load_predictions_csv(&p).unwrap();
        assert_eq!(
            f.predictions,
            Predictions::Hard(HardPredictions(vec![1, 0]))
        );
        assert_eq!(f.labels, Some(vec![1, 0]));

        let p = write_tmp(&dir, "o.csv", "score,s\n1.5,0\n");
        assert!(matches!(
            load_predictions_csv(&p),
            Err(Error::ScoreOutOfRange(0))
        ));
        let p = write_tmp(&dir, "x.csv", "score,hard,s\n0.5,1,0\n");
        assert!(matches!(
            load_predictions_csv(&p),
            Err(Error::AmbiguousColumns)
        ));
        let p = write_tmp(&dir, "m.csv", "score\n0.5\n");
        assert!(matches!(
            load_predictions_csv(&p),
            Err(Error::MissingColumn(_))
        ));
    }

    #[test]
    fn predictions_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let f = PredictionFile {
            predictions: Predictions::Soft(SoftPredictions(vec![0.125, 1.0 / 3.0])),
            sensitive: vec![1, 0],
            labels: Some(vec![0, 1]),
        };
        let p = dir.path().join("p.csv");
        write_predictions_csv(&f, &p).unwrap();
        assert_eq!(load_predictions_csv(&p).unwrap(), f);
    }
}

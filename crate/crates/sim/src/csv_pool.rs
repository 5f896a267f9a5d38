//! File-loaded pools: a covariate and a label column from a headered CSV,
//! with an optional filter keeping only the covariate tails.

use std::path::Path;

use partibandits_core::seeding::derive_seed;
use partibandits_core::LabeledPool;

use crate::SimError;

/// Loads a pool from `path`. Labels must form a small finite alphabet.
/// With `tail_quantile = Some(q)`, only rows whose covariate falls in the
/// bottom-`q` or top-`q` quantile tails are kept,
/// mirroring studies that estimate the mean within the tails where the
/// proxy covariate is most informative. The filter runs before pool
/// construction, so stratum weights refer to the filtered subpopulation.
pub fn load_csv_pool(
    path: impl AsRef<Path>,
    x_column: &str,
    y_column: &str,
    tail_quantile: Option<f64>,
) -> Result<LabeledPool, SimError> {
    let path = path.as_ref();
    let display = path.display().to_string();
    let mut reader = csv::Reader::from_path(path).map_err(|e| SimError::CsvParse {
        path: display.clone(),
        row: 0,
        message: e.to_string(),
    })?;

    let headers = reader
        .headers()
        .map_err(|e| SimError::CsvParse {
            path: display.clone(),
            row: 1,
            message: e.to_string(),
        })?
        .clone();
    let col = |name: &str| -> Result<usize, SimError> {
        headers.iter().position(|h| h == name).ok_or_else(|| {
            SimError::config(
                "columns",
                format!("column `{name}` not found; header has: {}", headers.iter().collect::<Vec<_>>().join(", ")),
            )
        })
    };
    let x_idx = col(x_column)?;
    let y_idx = col(y_column)?;

    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let row = i as u64 + 2; // 1-based, after the header line
        let record = record.map_err(|e| SimError::CsvParse {
            path: display.clone(),
            row,
            message: e.to_string(),
        })?;
        let parse = |idx: usize, name: &str| -> Result<f64, SimError> {
            let raw = record.get(idx).unwrap_or("");
            raw.trim().parse::<f64>().map_err(|_| SimError::CsvParse {
                path: display.clone(),
                row,
                message: format!("column `{name}`: `{raw}` is not a number"),
            })
        };
        xs.push(parse(x_idx, x_column)?);
        ys.push(parse(y_idx, y_column)?);
    }
    if xs.is_empty() {
        return Err(SimError::CsvParse {
            path: display,
            row: 2,
            message: "file has no data rows".to_string(),
        });
    }

    if let Some(q) = tail_quantile {
        if !(q > 0.0 && q < 0.5) {
            return Err(SimError::config(
                "tail_quantile",
                format!("must lie in (0, 0.5), got {q}"),
            ));
        }
        let mut sorted = xs.clone();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let rank = |p: f64| -> f64 {
            let idx = ((p * sorted.len() as f64).ceil() as usize).max(1) - 1;
            sorted[idx]
        };
        let low = rank(q);
        let high = rank(1.0 - q);
        let keep: Vec<usize> = (0..xs.len())
            .filter(|&i| xs[i] <= low || xs[i] >= high)
            .collect();
        xs = keep.iter().map(|&i| xs[i]).collect();
        ys = keep.iter().map(|&i| ys[i]).collect();
    }

    let id = derive_seed(
        xs.len() as u64,
        &[display.len() as u64, display.bytes().map(u64::from).sum()],
    );
    LabeledPool::new(xs, ys, id).map_err(|e| match e {
        partibandits_core::Error::Domain {
            parameter: "alphabet size",
            value,
        } => {
            SimError::CsvParse {
                path: display,
                row: 0,
                message: format!("label column has {value} distinct values; the alphabet cap is {}", partibandits_core::pool::MAX_ALPHABET),
            }
        }
        other => SimError::from(other),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write_csv(content: &str) -> tempfile::NamedTempFile {
        let mut file = tempfile::NamedTempFile::new().unwrap();
        file.write_all(content.as_bytes()).unwrap();
        file
    }

    #[test]
    fn loads_binary_pool() {
        let file = write_csv("x,y\n0.1,0\n0.6,1\n0.9,1\n");
        let pool = load_csv_pool(file.path(), "x", "y", None).unwrap();
        assert_eq!(pool.len(), 3);
        assert_eq!(pool.alphabet(), &[0.0, 1.0]);
        assert!((pool.census_mean() - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn accepts_multiclass_alphabet() {
        let file = write_csv("x,y\n0.1,0\n0.5,1\n0.9,2\n");
        let pool = load_csv_pool(file.path(), "x", "y", None).unwrap();
        assert_eq!(pool.alphabet(), &[0.0, 1.0, 2.0]);
        assert_eq!(pool.classes_minus_one(), 2);
    }

    #[test]
    fn names_the_row_on_parse_errors() {
        let file = write_csv("x,y\n0.1,0\n0.5,yes\n");
        match load_csv_pool(file.path(), "x", "y", None).unwrap_err() {
            SimError::CsvParse { row, message, .. } => {
                assert_eq!(row, 3);
                assert!(message.contains("yes"));
            }
            other => panic!("unexpected error {other}"),
        }
    }

    #[test]
    fn names_missing_columns() {
        let file = write_csv("a,b\n1,0\n");
        match load_csv_pool(file.path(), "x", "b", None).unwrap_err() {
            SimError::Config { message, .. } => assert!(message.contains("`x`")),
            other => panic!("unexpected error {other}"),
        }
    }

    #[test]
    fn tail_filter_keeps_both_tails() {
        let rows: String = (0..100)
            .map(|i| format!("{},{}\n", i as f64 / 100.0, i % 2))
            .collect();
        let file = write_csv(&format!("x,y\n{rows}"));
        let pool = load_csv_pool(file.path(), "x", "y", Some(0.05)).unwrap();
        // Bottom 5 and top ~5 covariates survive.
        assert!(pool.len() <= 12 && pool.len() >= 9, "kept {}", pool.len());
        let (lo, hi) = pool.support();
        assert!(lo <= 0.05 && hi >= 0.94);
    }
}

use std::path::Path;

use crate::error::{Error, Result};
use crate::numerics::{Matrix, Real};

/// A multichannel series as read from disk: `T x C` values plus the untouched date column.
#[derive(Clone, Debug, PartialEq)]
pub struct RawSeries {
    pub timestamps: Vec<String>,
    pub values: Matrix,
    pub channel_names: Vec<String>,
}

impl RawSeries {
    pub fn len(&self) -> usize {
        self.values.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.values.rows() == 0
    }

    pub fn num_channels(&self) -> usize {
        self.values.cols()
    }

    /// The first `n` time steps (all of them if shorter).
    pub fn prefix(&self, n: usize) -> RawSeries {
        let n = n.min(self.len());
        RawSeries {
            timestamps: self.timestamps[..n].to_vec(),
            values: self.values.slice_rows(0, n),
            channel_names: self.channel_names.clone(),
        }
    }
}

/// Reads a CSV whose first column is a timestamp and whose remaining columns are numeric channels.
pub fn load_csv(path: &Path) -> Result<RawSeries> {
    let format_err = |msg: String| Error::Format {
        path: path.to_path_buf(),
        msg,
    };
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(false)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| match e.into_kind() {
            csv::ErrorKind::Io(source) => Error::Io {
                path: path.to_path_buf(),
                source,
            },
            other => format_err(format!("{other:?}")),
        })?;

    let headers = reader
        .headers()
        .map_err(|e| format_err(e.to_string()))?
        .clone();
    if headers.len() < 2 || headers.iter().all(str::is_empty) {
        return Err(format_err(
            "expected a header with a date column and at least one channel".into(),
        ));
    }
    let channel_names: Vec<String> = headers.iter().skip(1).map(str::to_string).collect();
    let cols = channel_names.len();

    let mut timestamps = Vec::new();
    let mut data: Vec<Real> = Vec::new();
    for (i, record) in reader.records().enumerate() {
        // Line 1 is the header.
        let row = i + 2;
        let record = record.map_err(|e| match e.kind() {
            csv::ErrorKind::UnequalLengths {
                expected_len, len, ..
            } => format_err(format!(
                "row {row} has {len} fields, expected {expected_len}"
            )),
            _ => format_err(e.to_string()),
        })?;
        timestamps.push(record[0].to_string());
        for (c, field) in record.iter().enumerate().skip(1) {
            let v: Real = field.parse().map_err(|_| Error::Parse {
                path: path.to_path_buf(),
                row,
                column: c + 1,
                value: field.to_string(),
            })?;
            if !v.is_finite() {
                return Err(Error::Parse {
                    path: path.to_path_buf(),
                    row,
                    column: c + 1,
                    value: field.to_string(),
                });
            }
            data.push(v);
        }
    }
    if timestamps.is_empty() {
        return Err(format_err("no data rows".into()));
    }
    Ok(RawSeries {
        values: Matrix::from_vec(timestamps.len(), cols, data)?,
        timestamps,
        channel_names,
    })
}

#[cfg(test)]
mod tests {
    use std::io::Write;

    use super::*;

    fn write(dir: &tempfile::TempDir, name: &str, text: &str) -> std::path::PathBuf {
        let p = dir.path().join(name);
        std::fs::File::create(&p)
            .unwrap()
            .write_all(text.as_bytes())
            .unwrap();
        p
    }

    #[test]
    fn reads_fixture() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(
            &dir,
            "a.csv",
            "date,HUFL,OT\n2016-07-01 00:00:00,5.827,30.531\n2016-07-01 01:00:00,5.693,27.787\n2016-07-01 02:00:00,-0.5,1e2\n",
        );
        let s = load_csv(&p).unwrap();
        assert_eq!((s.len(), s.num_channels()), (3, 2));
        assert_eq!(s.channel_names, ["HUFL", "OT"]);
        assert_eq!(s.values.row(2), &[-0.5, 100.0]);
        assert_eq!(s.timestamps[1], "2016-07-01 01:00:00");
        assert_eq!(s.prefix(2).values.rows(), 2);
    }

    #[test]
    fn empty_and_header_only_are_format_errors() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(&dir, "e.csv", "");
        assert!(matches!(load_csv(&p), Err(Error::Format { .. })));
        let p = write(&dir, "h.csv", "date,a\n");
        assert!(matches!(load_csv(&p), Err(Error::Format { .. })));
    }

    #[test]
    fn bad_cell_reports_location() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(&dir, "b.csv", "date,a,b\nt0,1,2\nt1,3,oops\n");
        match load_csv(&p) {
            Err(Error::Parse {
                row, column, value, ..
            }) => {
                assert_eq!((row, column, value.as_str()), (3, 3, "oops"));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn ragged_rows_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(&dir, "r.csv", "date,a,b\nt0,1,2\nt1,3\n");
        let err = load_csv(&p).unwrap_err();
        assert!(matches!(err, Error::Format { .. }), "{err}");
    }

    #[test]
    fn missing_file_is_io() {
        assert!(load_csv(Path::new("/no/such/file.csv"))
            .unwrap_err()
            .is_io());
    }
}

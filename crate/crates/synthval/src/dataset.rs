//! Observational datasets: validation, CSV ingestion, empirical resampling.
//!
//! A dataset is `n` rows of (covariates, binary treatment, real outcome).
//! Storage is column-major 64-bit floats since the tree learners scan
//! columns for splits. Datasets are immutable after construction and safe
//! to share across threads.

use std::io::{Read, Write};
use std::path::Path;

use rand::Rng;

use crate::error::{Error, Result};
use crate::rng::RngSeed;

/// Number of redraws allowed before a bootstrap sample is declared degenerate.
pub const BOOTSTRAP_REDRAW_CAP: usize = 100;

/// An immutable observational study: covariates, binary treatment, outcome.
#[derive(Clone, Debug, PartialEq)]
pub struct ObservationalDataset {
    /// Column-major covariates: `p` columns of length `n`.
    columns: Vec<Vec<f64>>,
    /// Treatment indicator per row, exactly 0 or 1.
    treatment: Vec<u8>,
    outcome: Vec<f64>,
    column_names: Vec<String>,
    treatment_name: String,
    outcome_name: String,
}

impl ObservationalDataset {
    /// Validate and construct a dataset from column-major parts.
    pub fn new(
        columns: Vec<Vec<f64>>,
        column_names: Vec<String>,
        treatment: Vec<u8>,
        outcome: Vec<f64>,
    ) -> Result<Self> {
        Self::with_names(columns, column_names, treatment, outcome, "w", "y")
    }

    /// As [`ObservationalDataset::new`] but keeping the original treatment
    /// and outcome column names (used by the CSV round trip).
    pub fn with_names(
        columns: Vec<Vec<f64>>,
        column_names: Vec<String>,
        treatment: Vec<u8>,
        outcome: Vec<f64>,
        treatment_name: &str,
        outcome_name: &str,
    ) -> Result<Self> {
        if columns.len() != column_names.len() {
            return Err(Error::LengthMismatch(format!(
                "{} covariate columns but {} names",
                columns.len(),
                column_names.len()
            )));
        }
        let n = outcome.len();
        if treatment.len() != n {
            return Err(Error::LengthMismatch(format!(
                "treatment has {} rows, outcome has {}",
                treatment.len(),
                n
            )));
        }
        for (j, col) in columns.iter().enumerate() {
            if col.len() != n {
                return Err(Error::LengthMismatch(format!(
                    "column {:?} has {} rows, outcome has {}",
                    column_names[j],
                    col.len(),
                    n
                )));
            }
        }
        if n < 2 {
            return Err(Error::TooFewRows(n));
        }
        for (i, &w) in treatment.iter().enumerate() {
            if w > 1 {
                return Err(Error::InvalidTreatment {
                    row: i,
                    value: w.to_string(),
                });
            }
        }
        if !treatment.iter().any(|&w| w == 1) {
            return Err(Error::EmptyArm { arm: "treated" });
        }
        if !treatment.iter().any(|&w| w == 0) {
            return Err(Error::EmptyArm { arm: "untreated" });
        }
        for (i, &y) in outcome.iter().enumerate() {
            if !y.is_finite() {
                return Err(Error::NonFinite {
                    row: i,
                    column: outcome_name.to_string(),
                });
            }
        }
        for (j, col) in columns.iter().enumerate() {
            for (i, &x) in col.iter().enumerate() {
                if !x.is_finite() {
                    return Err(Error::NonFinite {
                        row: i,
                        column: column_names[j].clone(),
                    });
                }
            }
        }
        Ok(ObservationalDataset {
            columns,
            treatment,
            outcome,
            column_names,
            treatment_name: treatment_name.to_string(),
            outcome_name: outcome_name.to_string(),
        })
    }

    pub fn n_rows(&self) -> usize {
        self.outcome.len()
    }

    pub fn n_covariates(&self) -> usize {
        self.columns.len()
    }

    /// Column-major covariate storage.
    pub fn columns(&self) -> &[Vec<f64>] {
        &self.columns
    }

    pub fn column_names(&self) -> &[String] {
        &self.column_names
    }

    pub fn treatment_name(&self) -> &str {
        &self.treatment_name
    }

    pub fn outcome_name(&self) -> &str {
        &self.outcome_name
    }

    pub fn treatment(&self) -> &[u8] {
        &self.treatment
    }

    pub fn outcome(&self) -> &[f64] {
        &self.outcome
    }

    /// Copy covariate row `i` into `buf` (resized to `p`).
    pub fn covariate_row_into(&self, i: usize, buf: &mut Vec<f64>) {
        buf.clear();
        buf.extend(self.columns.iter().map(|col| col[i]));
    }

    pub fn covariate_row(&self, i: usize) -> Vec<f64> {
        let mut buf = Vec::with_capacity(self.columns.len());
        self.covariate_row_into(i, &mut buf);
        buf
    }

    /// Sorted row indices of the arm with treatment value `w`.
    ///
    /// The two arms partition `0..n`.
    pub fn arm_indices(&self, w: u8) -> Vec<usize> {
        self.treatment
            .iter()
            .enumerate()
            .filter(|&(_, &t)| t == w)
            .map(|(i, _)| i)
            .collect()
    }

    /// Sample mean of the outcomes in arm `w`.
    pub fn arm_outcome_mean(&self, w: u8) -> f64 {
        let idx = self.arm_indices(w);
        idx.iter().map(|&i| self.outcome[i]).sum::<f64>() / idx.len() as f64
    }

    /// Draw `m` i.i.d. (covariate row index) samples from the empirical
    /// distribution of (x, w) pairs. Rows are referenced by index so the
    /// pair always stays intact.
    pub fn resample_xw_indices(&self, m: usize, seed: &RngSeed) -> Vec<usize> {
        let n = self.n_rows();
        let mut rng = seed.rng();
        (0..m).map(|_| rng.random_range(0..n)).collect()
    }

    /// Draw `m` i.i.d. (covariate row, treatment) pairs with replacement
    /// from the observed rows.
    pub fn resample_xw(&self, m: usize, seed: &RngSeed) -> Vec<(Vec<f64>, u8)> {
        self.resample_xw_indices(m, seed)
            .into_iter()
            .map(|i| (self.covariate_row(i), self.treatment[i]))
            .collect()
    }

    /// Parse a dataset from a CSV reader.
    ///
    /// The first record is a header. `treatment_col` and `outcome_col` name
    /// the treatment and outcome columns; every other column whose first
    /// data cell parses as a number becomes a covariate, and any later
    /// non-numeric cell in such a column is an error. Columns whose first
    /// cell is non-numeric (e.g. string identifiers) are ignored. Missing
    /// values are a hard error.
    pub fn read_csv<R: Read>(reader: R, treatment_col: &str, outcome_col: &str) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(true)
            .flexible(false)
            .from_reader(reader);

        let headers = rdr
            .headers()
            .map_err(|e| Error::CsvFormat {
                line: 1,
                message: e.to_string(),
            })?
            .clone();
        let find = |name: &str| headers.iter().position(|h| h == name);
        let w_idx = find(treatment_col).ok_or_else(|| Error::MissingColumn {
            name: treatment_col.to_string(),
        })?;
        let y_idx = find(outcome_col).ok_or_else(|| Error::MissingColumn {
            name: outcome_col.to_string(),
        })?;
        if w_idx == y_idx {
            return Err(Error::InvalidParameter(format!(
                "treatment and outcome both named {treatment_col:?}"
            )));
        }

        let mut records: Vec<csv::StringRecord> = Vec::new();
        for (i, rec) in rdr.records().enumerate() {
            let rec = rec.map_err(|e| Error::CsvFormat {
                line: i + 2,
                message: e.to_string(),
            })?;
            records.push(rec);
        }
        if records.len() < 2 {
            return Err(Error::TooFewRows(records.len()));
        }

        // Classify candidate covariate columns by their first data cell.
        let mut cov_idx: Vec<usize> = Vec::new();
        for (j, first_cell) in records[0].iter().enumerate() {
            if j == w_idx || j == y_idx {
                continue;
            }
            if first_cell.trim().is_empty() {
                return Err(Error::NonNumeric {
                    row: 0,
                    column: headers[j].to_string(),
                    value: String::new(),
                });
            }
            if parse_cell(first_cell).is_some() {
                cov_idx.push(j);
            }
        }

        let n = records.len();
        let mut columns: Vec<Vec<f64>> = vec![Vec::with_capacity(n); cov_idx.len()];
        let mut treatment: Vec<u8> = Vec::with_capacity(n);
        let mut outcome: Vec<f64> = Vec::with_capacity(n);

        for (i, rec) in records.iter().enumerate() {
            let w_cell = rec.get(w_idx).unwrap_or("");
            let w_val = parse_cell(w_cell).ok_or_else(|| Error::NonNumeric {
                row: i,
                column: treatment_col.to_string(),
                value: w_cell.to_string(),
            })?;
            if w_val == 0.0 {
                treatment.push(0);
            } else if w_val == 1.0 {
                treatment.push(1);
            } else {
                return Err(Error::InvalidTreatment {
                    row: i,
                    value: w_cell.to_string(),
                });
            }

            let y_cell = rec.get(y_idx).unwrap_or("");
            let y_val = parse_cell(y_cell).ok_or_else(|| Error::NonNumeric {
                row: i,
                column: outcome_col.to_string(),
                value: y_cell.to_string(),
            })?;
            if !y_val.is_finite() {
                return Err(Error::NonFinite {
                    row: i,
                    column: outcome_col.to_string(),
                });
            }
            outcome.push(y_val);

            for (c, &j) in cov_idx.iter().enumerate() {
                let cell = rec.get(j).unwrap_or("");
                let val = parse_cell(cell).ok_or_else(|| Error::NonNumeric {
                    row: i,
                    column: headers[j].to_string(),
                    value: cell.to_string(),
                })?;
                if !val.is_finite() {
                    return Err(Error::NonFinite {
                        row: i,
                        column: headers[j].to_string(),
                    });
                }
                columns[c].push(val);
            }
        }

        let column_names = cov_idx.iter().map(|&j| headers[j].to_string()).collect();
        Self::with_names(
            columns,
            column_names,
            treatment,
            outcome,
            treatment_col,
            outcome_col,
        )
    }

    /// Load a dataset from a CSV file. Row order is preserved.
    pub fn load_csv<P: AsRef<Path>>(
        path: P,
        treatment_col: &str,
        outcome_col: &str,
    ) -> Result<Self> {
        let file = std::fs::File::open(path)?;
        Self::read_csv(std::io::BufReader::new(file), treatment_col, outcome_col)
    }

    /// Write the dataset as CSV: covariate columns in order, then the
    /// treatment and outcome columns, one record per row in row order.
    /// Floats are written in shortest round-trip form, so
    /// `read_csv(write_csv(d))` reproduces `d` exactly.
    pub fn write_csv_to<W: Write>(&self, writer: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(writer);
        let mut header: Vec<&str> = self.column_names.iter().map(|s| s.as_str()).collect();
        header.push(&self.treatment_name);
        header.push(&self.outcome_name);
        wtr.write_record(&header).map_err(csv_io)?;
        let mut record: Vec<String> = Vec::with_capacity(header.len());
        for i in 0..self.n_rows() {
            record.clear();
            record.extend(self.columns.iter().map(|col| format_f64(col[i])));
            record.push(self.treatment[i].to_string());
            record.push(format_f64(self.outcome[i]));
            wtr.write_record(&record).map_err(csv_io)?;
        }
        wtr.flush()?;
        Ok(())
    }

    pub fn write_csv<P: AsRef<Path>>(&self, path: P) -> Result<()> {
        let file = std::fs::File::create(path)?;
        self.write_csv_to(std::io::BufWriter::new(file))
    }
}

fn csv_io(e: csv::Error) -> Error {
    Error::CsvFormat {
        line: 0,
        message: e.to_string(),
    }
}

fn format_f64(v: f64) -> String {
    // Shortest representation that round-trips; integral values keep a
    // trailing ".0" so the column stays self-evidently numeric.
    let s = format!("{v}");
    if s.contains(['.', 'e', 'E']) || !v.is_finite() {
        s
    } else {
        format!("{s}.0")
    }
}

fn parse_cell(cell: &str) -> Option<f64> {
    let t = cell.trim();
    if t.is_empty() {
        return None;
    }
    t.parse::<f64>().ok()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn small() -> ObservationalDataset {
        ObservationalDataset::new(
            vec![vec![-1.0, -2.0, 1.0, 2.0]],
            vec!["x1".into()],
            vec![0, 0, 1, 1],
            vec![0.5, 0.25, 10.0, 11.0],
        )
        .unwrap()
    }

    #[test]
    fn load_csv_four_rows() {
        let data = "x1,w,y\n-1.0,0,0.5\n-2.0,0,0.25\n1.0,1,10.0\n2.0,1,11.0\n";
        let d = ObservationalDataset::read_csv(data.as_bytes(), "w", "y").unwrap();
        assert_eq!(d.n_rows(), 4);
        assert_eq!(d.n_covariates(), 1);
        assert_eq!(d.arm_indices(0).len(), 2);
        assert_eq!(d.arm_indices(1).len(), 2);
        assert_eq!(d.columns()[0], vec![-1.0, -2.0, 1.0, 2.0]);
    }

    #[test]
    fn empty_treated_arm_is_an_error() {
        let data = "x1,w,y\n1,0,1\n2,0,2\n3,0,3\n4,0,4\n";
        let err = ObservationalDataset::read_csv(data.as_bytes(), "w", "y").unwrap_err();
        assert!(matches!(err, Error::EmptyArm { arm: "treated" }));
    }

    #[test]
    fn nan_outcome_names_the_row() {
        let data = "x1,w,y\n1,0,1\n2,1,NaN\n3,0,3\n";
        let err = ObservationalDataset::read_csv(data.as_bytes(), "w", "y").unwrap_err();
        match err {
            Error::NonFinite { row, column } => {
                assert_eq!(row, 1);
                assert_eq!(column, "y");
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn treatment_value_two_names_the_row() {
        let data = "x1,w,y\n1,0,1\n2,2,2\n3,1,3\n";
        let err = ObservationalDataset::read_csv(data.as_bytes(), "w", "y").unwrap_err();
        match err {
            Error::InvalidTreatment { row, value } => {
                assert_eq!(row, 1);
                assert_eq!(value, "2");
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn missing_column_is_reported() {
        let data = "x1,w,y\n1,0,1\n2,1,2\n";
        let err = ObservationalDataset::read_csv(data.as_bytes(), "treat", "y").unwrap_err();
        assert!(matches!(err, Error::MissingColumn { .. }));
    }

    #[test]
    fn string_id_column_is_ignored() {
        let data = "id,x1,w,y\nalpha,1,0,1\nbeta,2,1,2\n";
        let d = ObservationalDataset::read_csv(data.as_bytes(), "w", "y").unwrap();
        assert_eq!(d.n_covariates(), 1);
        assert_eq!(d.column_names(), ["x1"]);
    }

    #[test]
    fn arm_indices_partition_rows() {
        let d = small();
        assert_eq!(d.arm_indices(1), vec![2, 3]);
        assert_eq!(d.arm_indices(0), vec![0, 1]);
        let mut all = d.arm_indices(0);
        all.extend(d.arm_indices(1));
        all.sort_unstable();
        assert_eq!(all, vec![0, 1, 2, 3]);
    }

    #[test]
    fn resample_is_deterministic_and_never_fabricates() {
        let d = small();
        let seed = RngSeed::new(11).child(crate::rng::stream::RESAMPLE);
        let a = d.resample_xw(1000, &seed);
        let b = d.resample_xw(1000, &seed);
        assert_eq!(a, b);
        for (x, w) in &a {
            let matches = (0..d.n_rows())
                .any(|i| d.covariate_row(i) == *x && d.treatment()[i] == *w);
            assert!(matches, "resampled pair not among observed rows");
        }
    }

    #[test]
    fn resample_frequencies_match_binomial_oracle() {
        // m draws of each of n rows: count_i ~ Binomial(m, 1/n), so the
        // empirical frequency should sit within 3 standard errors of 1/n.
        let n = 1000;
        let m = 100_000;
        let columns = vec![(0..n).map(|i| i as f64).collect::<Vec<_>>()];
        let treatment: Vec<u8> = (0..n).map(|i| (i % 2) as u8).collect();
        let outcome: Vec<f64> = (0..n).map(|i| i as f64 / 7.0).collect();
        let d = ObservationalDataset::new(columns, vec!["x1".into()], treatment, outcome).unwrap();
        let idx = d.resample_xw_indices(m, &RngSeed::new(5));
        let mut counts = vec![0usize; n];
        for i in idx {
            counts[i] += 1;
        }
        let p = 1.0 / n as f64;
        let se = (p * (1.0 - p) / m as f64).sqrt();
        let mut violations = 0;
        for &c in &counts {
            let freq = c as f64 / m as f64;
            if (freq - p).abs() > 3.0 * se {
                violations += 1;
            }
        }
        // Roughly 0.27% of bins may exceed 3 SE by chance; allow 1%.
        assert!(violations <= n / 100, "{violations} rows outside 3 SE");
    }

    #[test]
    fn csv_round_trip_is_identity() {
        let d = small();
        let mut buf = Vec::new();
        d.write_csv_to(&mut buf).unwrap();
        let back = ObservationalDataset::read_csv(buf.as_slice(), "w", "y").unwrap();
        assert_eq!(d, back);
    }

    proptest! {
        #[test]
        fn csv_round_trip_property(
            rows in proptest::collection::vec((any::<bool>(), -1e6f64..1e6, -1e6f64..1e6), 2..40)
        ) {
            prop_assume!(rows.iter().any(|r| r.0) && rows.iter().any(|r| !r.0));
            let treatment: Vec<u8> = rows.iter().map(|r| r.0 as u8).collect();
            let col: Vec<f64> = rows.iter().map(|r| r.1).collect();
            let outcome: Vec<f64> = rows.iter().map(|r| r.2).collect();
            let d = ObservationalDataset::new(
                vec![col], vec!["x1".into()], treatment, outcome,
            ).unwrap();
            let mut buf = Vec::new();
            d.write_csv_to(&mut buf).unwrap();
            let back = ObservationalDataset::read_csv(buf.as_slice(), "w", "y").unwrap();
            prop_assert_eq!(d, back);
        }
    }
}

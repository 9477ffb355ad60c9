//! CSV ingestion for vertically partitioned experiments.
//!
//! Rows align by index (the row index is the sample id), columns route to
//! parties per the experiment config, missing numeric cells are imputed
//! with the column median.

use std::path::Path;

use fedboost::boosting::dataset::{PartyFeatures, VerticalDataset};
use fedboost::error::{Error, Result};

/// A parsed numeric table with named columns.
pub struct Table {
    pub headers: Vec<String>,
    /// Column-major; `None` marks a missing cell before imputation.
    pub columns: Vec<Vec<Option<f64>>>,
}

pub fn read_table(path: &Path) -> Result<Table> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .map_err(|e| Error::Usage(format!("cannot open {}: {e}", path.display())))?;
    let headers: Vec<String> = reader
        .headers()
        .map_err(|e| Error::Usage(format!("bad header row: {e}")))?
        .iter()
        .map(str::to_owned)
        .collect();
    let mut columns: Vec<Vec<Option<f64>>> = vec![Vec::new(); headers.len()];
    for (row_idx, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::Usage(format!("row {}: {e}", row_idx + 2)))?;
        if record.len() != headers.len() {
            return Err(Error::Usage(format!(
                "row {}: expected {} cells, found {}",
                row_idx + 2,
                headers.len(),
                record.len()
            )));
        }
        for (col_idx, cell) in record.iter().enumerate() {
            let trimmed = cell.trim();
            let value = if trimmed.is_empty() || trimmed == "NA" {
                None
            } else {
                Some(trimmed.parse::<f64>().map_err(|_| {
                    Error::Usage(format!(
                        "row {} column {:?}: non-numeric cell {trimmed:?}",
                        row_idx + 2,
                        headers[col_idx]
                    ))
                })?)
            };
            columns[col_idx].push(value);
        }
    }
    Ok(Table { headers, columns })
}

fn median(values: &mut Vec<f64>) -> f64 {
    values.sort_by(|a, b| a.total_cmp(b));
    let n = values.len();
    if n == 0 {
        return 0.0;
    }
    if n % 2 == 1 {
        values[n / 2]
    } else {
        (values[n / 2 - 1] + values[n / 2]) / 2.0
    }
}

impl Table {
    pub fn n_rows(&self) -> usize {
        self.columns.first().map_or(0, Vec::len)
    }

    fn column_index(&self, name: &str) -> Result<usize> {
        self.headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Usage(format!("configured column {name:?} not in the file")))
    }

    /// One column with missing cells imputed to the column median.
    pub fn numeric_column(&self, name: &str) -> Result<Vec<f64>> {
        let idx = self.column_index(name)?;
        let mut present: Vec<f64> = self.columns[idx].iter().flatten().copied().collect();
        let fill = median(&mut present);
        Ok(self.columns[idx].iter().map(|v| v.unwrap_or(fill)).collect())
    }

    pub fn label_column(&self, name: &str) -> Result<Vec<u8>> {
        let values = self.numeric_column(name)?;
        values
            .iter()
            .map(|&v| {
                if v == 0.0 {
                    Ok(0u8)
                } else if v == 1.0 {
                    Ok(1u8)
                } else {
                    Err(Error::Usage(format!("label column {name:?} has non-binary value {v}")))
                }
            })
            .collect()
    }
}

/// Load a CSV and route columns to parties. `parties[p]` lists party p's
/// column names; party 0 additionally owns the label column.
pub fn load_csv_vertical(
    path: &Path,
    label: &str,
    parties: &[Vec<String>],
) -> Result<VerticalDataset> {
    let table = read_table(path)?;
    if table.n_rows() == 0 {
        return Err(Error::Usage(format!("{} has no data rows", path.display())));
    }
    // Column assignments must partition the schema: no column may belong to
    // two parties or double as the label.
    let mut seen = std::collections::HashSet::new();
    for name in parties.iter().flatten() {
        if name == label {
            return Err(Error::Usage(format!("label column {label:?} cannot also be a feature")));
        }
        if !seen.insert(name) {
            return Err(Error::Usage(format!("column {name:?} assigned to more than one party")));
        }
    }
    let labels = table.label_column(label)?;
    let mut party_features = Vec::with_capacity(parties.len());
    for names in parties {
        let mut columns = Vec::with_capacity(names.len());
        for name in names {
            columns.push(table.numeric_column(name)?);
        }
        party_features.push(PartyFeatures::new(names.clone(), columns));
    }
    VerticalDataset::from_columns(party_features, labels)
}

/// Write a dataset (all parties' columns plus the label) to one CSV.
pub fn save_csv(path: &Path, dataset: &VerticalDataset, label: &str) -> Result<()> {
    let mut writer = csv::Writer::from_path(path)
        .map_err(|e| Error::Usage(format!("cannot write {}: {e}", path.display())))?;
    let mut headers = Vec::new();
    for party in dataset.parties() {
        headers.extend(party.names.iter().cloned());
    }
    headers.push(label.to_string());
    writer
        .write_record(&headers)
        .map_err(|e| Error::Usage(format!("csv write failed: {e}")))?;
    for row in 0..dataset.n_samples() {
        let mut record: Vec<String> = Vec::with_capacity(headers.len());
        for party in dataset.parties() {
            for column in &party.columns {
                record.push(format!("{}", column[row]));
            }
        }
        record.push(dataset.labels()[row].to_string());
        writer
            .write_record(&record)
            .map_err(|e| Error::Usage(format!("csv write failed: {e}")))?;
    }
    writer.flush().map_err(|e| Error::Usage(format!("csv flush failed: {e}")))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write_temp(content: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(content.as_bytes()).unwrap();
        f
    }

    #[test]
    fn small_csv_round_trips() {
        let f = write_temp("a,b,y\n1,4,0\n2,5,1\n3,6,0\n");
        let ds = load_csv_vertical(
            f.path(),
            "y",
            &[vec!["a".to_string()], vec!["b".to_string()]],
        )
        .unwrap();
        assert_eq!(ds.party(0).columns[0], vec![1.0, 2.0, 3.0]);
        assert_eq!(ds.party(1).columns[0], vec![4.0, 5.0, 6.0]);
        assert_eq!(ds.labels(), &[0, 1, 0]);

        let out = tempfile::NamedTempFile::new().unwrap();
        save_csv(out.path(), &ds, "y").unwrap();
        let again = load_csv_vertical(
            out.path(),
            "y",
            &[vec!["a".to_string()], vec!["b".to_string()]],
        )
        .unwrap();
        assert_eq!(again.party(0).columns, ds.party(0).columns);
        assert_eq!(again.labels(), ds.labels());
    }

    #[test]
    fn missing_cells_impute_to_the_median() {
        let f = write_temp("income,y\n100,0\n,1\n300,0\n200,1\n");
        let ds = load_csv_vertical(f.path(), "y", &[vec!["income".to_string()]]).unwrap();
        // Median of {100, 300, 200} is 200.
        assert_eq!(ds.party(0).columns[0][1], 200.0);
    }

    #[test]
    fn non_numeric_cell_reports_row_and_column() {
        let f = write_temp("a,y\noops,0\n");
        let err = load_csv_vertical(f.path(), "y", &[vec!["a".to_string()]]).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("row 2"), "{msg}");
        assert!(msg.contains("\"a\""), "{msg}");
    }

    #[test]
    fn missing_configured_column_is_an_error() {
        let f = write_temp("a,y\n1,0\n");
        assert!(load_csv_vertical(f.path(), "y", &[vec!["b".to_string()]]).is_err());
    }

    #[test]
    fn non_binary_label_is_an_error() {
        let f = write_temp("a,y\n1,2\n");
        assert!(load_csv_vertical(f.path(), "y", &[vec!["a".to_string()]]).is_err());
    }

    #[test]
    fn overlapping_party_columns_are_rejected() {
        let f = write_temp("a,b,y\n1,2,0\n");
        let err = load_csv_vertical(
            f.path(),
            "y",
            &[vec!["a".to_string()], vec!["a".to_string()]],
        );
        assert!(err.is_err());
        let err = load_csv_vertical(f.path(), "y", &[vec!["y".to_string()]]);
        assert!(err.is_err());
    }
}

//! Feature tables on disk: `features_pages.csv` and `features.csv`.
//!
//! Layout: an id column, a `scope` column, then one column per feature in
//! registry order. Missing values are empty cells; present values use the
//! shortest round-trip decimal form.

use std::io::{Read, Write};

use thiserror::Error;

use crate::features::{FeatureVector, Scope};

#[derive(Debug, Error)]
pub enum TableError {
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("row {row}: {message}")]
    Malformed { row: usize, message: String },
    #[error("row {row}: feature names differ from the table header")]
    RegistryMismatch { row: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureTable {
    pub id_column: String,
    pub scope: Scope,
    pub names: Vec<String>,
    pub ids: Vec<String>,
    pub rows: Vec<Vec<Option<f64>>>,
}

pub fn scope_name(s: Scope) -> &'static str {
    match s {
        Scope::Page => "page",
        Scope::Session => "session",
    }
}

pub fn format_value(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

impl FeatureTable {
    pub fn new(id_column: &str, scope: Scope, names: Vec<String>) -> Self {
        FeatureTable {
            id_column: id_column.to_string(),
            scope,
            names,
            ids: Vec::new(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, id: &str, v: &FeatureVector) -> Result<(), TableError> {
        if v.names() != self.names.as_slice() {
            return Err(TableError::RegistryMismatch { row: self.rows.len() });
        }
        self.ids.push(id.to_string());
        self.rows.push(v.values().to_vec());
        Ok(())
    }

    pub fn row(&self, id: &str) -> Option<FeatureVector> {
        let i = self.ids.iter().position(|x| x == id)?;
        FeatureVector::new(self.names.clone(), self.rows[i].clone(), self.scope).ok()
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<(), TableError> {
        let mut out = csv::Writer::from_writer(w);
        let mut header = vec![self.id_column.clone(), "scope".to_string()];
        header.extend(self.names.iter().cloned());
        out.write_record(&header)?;
        for (id, row) in self.ids.iter().zip(&self.rows) {
            let mut rec = vec![id.clone(), scope_name(self.scope).to_string()];
            rec.extend(row.iter().map(|v| format_value(*v)));
            out.write_record(&rec)?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(r: R) -> Result<Self, TableError> {
        let mut rdr = csv::Reader::from_reader(r);
        let header = rdr.headers()?.clone();
        if header.len() < 2 || &header[1] != "scope" {
            return Err(TableError::Malformed {
                row: 0,
                message: "header must start with an id column and `scope`".into(),
            });
        }
        let names: Vec<String> = header.iter().skip(2).map(str::to_string).collect();
        let mut table = FeatureTable::new(&header[0], Scope::Page, names);
        for (i, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let row = i + 1;
            let bad = |message: String| TableError::Malformed { row, message };
            table.scope = match &rec[1] {
                "page" => Scope::Page,
                "session" => Scope::Session,
                other => return Err(bad(format!("unknown scope `{other}`"))),
            };
            let mut values = Vec::with_capacity(table.names.len());
            for (j, cell) in rec.iter().skip(2).enumerate() {
                if cell.is_empty() {
                    values.push(None);
                    continue;
                }
                let x: f64 = cell
                    .parse()
                    .map_err(|_| bad(format!("`{}` is not a number", cell)))?;
                if !x.is_finite() {
                    return Err(bad(format!("{} is not finite", table.names[j])));
                }
                values.push(Some(x));
            }
            table.ids.push(rec[0].to_string());
            table.rows.push(values);
        }
        Ok(table)
    }
}

use std::fmt::Write as _;
use std::path::Path;

use super::CliError;

/// A numeric table written as CSV: one header row, `f64` cells printed
/// with 17 significant digits so they parse back to the same bits.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvTable {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl CsvTable {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        Self {
            header: header.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        assert_eq!(row.len(), self.header.len(), "row width must match the header");
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.header.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }

    pub fn render(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for row in &self.rows {
            for (i, v) in row.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                write!(out, "{}", format_cell(*v)).expect("writing to a String");
            }
            out.push('\n');
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut lines = text.lines();
        let header: Vec<String> = lines
            .next()
            .ok_or_else(|| CliError::Config("empty CSV".into()))?
            .split(',')
            .map(str::to_owned)
            .collect();
        let mut table = Self {
            header,
            rows: Vec::new(),
        };
        for (i, line) in lines.enumerate() {
            let row = line
                .split(',')
                .map(|cell| {
                    cell.parse::<f64>()
                        .map_err(|_| CliError::Config(format!("row {}: bad cell {cell:?}", i + 2)))
                })
                .collect::<Result<Vec<_>, _>>()?;
            if row.len() != table.header.len() {
                return Err(CliError::Config(format!(
                    "row {} has {} cells, header has {}",
                    i + 2,
                    row.len(),
                    table.header.len()
                )));
            }
            table.rows.push(row);
        }
        Ok(table)
    }

    pub fn write(&self, path: &Path) -> Result<(), CliError> {
        std::fs::write(path, self.render()).map_err(|e| CliError::Io {
            path: path.to_path_buf(),
            source: e,
        })
    }
}

fn format_cell(v: f64) -> String {
    if v.is_nan() {
        "NaN".into()
    } else if v == 0.0 {
        // keep the sign of negative zero out of the files
        "0.0000000000000000e0".into()
    } else {
        format!("{v:.16e}")
    }
}

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Text(String),
    Empty,
}

impl Cell {
    pub fn render(&self) -> String {
        match self {
            Cell::Num(x) => format_number(*x),
            Cell::Text(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }

    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Cell::Num(x) => Some(*x),
            _ => None,
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

/// Seventeen significant digits, enough to round-trip any `f64`.
pub fn format_number(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        format!("{x}")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CsvTable {
    pub header: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl CsvTable {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        CsvTable {
            header: header.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) -> CliResult<()> {
        if row.len() != self.header.len() {
            return Err(CliError::Validation(format!(
                "row has {} cells, header has {}",
                row.len(),
                self.header.len()
            )));
        }
        self.rows.push(row);
        Ok(())
    }

    pub fn push_numbers(&mut self, row: &[f64]) -> CliResult<()> {
        self.push(row.iter().map(|&x| Cell::Num(x)).collect())
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }

    pub fn column(&self, index: usize) -> Vec<Option<f64>> {
        self.rows.iter().map(|row| row[index].as_f64()).collect()
    }

    /// Column counts agree and the first column, when numeric, strictly
    /// increases.
    pub fn validate(&self) -> CliResult<()> {
        if self.header.is_empty() {
            return Err(CliError::Validation("table has no columns".into()));
        }
        if let Some(row) = self.rows.iter().find(|r| r.len() != self.header.len()) {
            return Err(CliError::Validation(format!(
                "row has {} cells, header has {}",
                row.len(),
                self.header.len()
            )));
        }
        let first: Vec<Option<f64>> = self.column(0);
        if first.iter().all(Option::is_some) && first.windows(2).any(|w| w[1] <= w[0]) {
            return Err(CliError::Validation(format!(
                "first column `{}` is not strictly increasing",
                self.header[0]
            )));
        }
        Ok(())
    }

    pub fn to_csv(&self) -> CliResult<String> {
        self.validate()?;
        let mut writer = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        let csv_err = |e: csv::Error| CliError::Csv(e.to_string());
        writer.write_record(&self.header).map_err(csv_err)?;
        for row in &self.rows {
            writer
                .write_record(row.iter().map(Cell::render))
                .map_err(csv_err)?;
        }
        let bytes = writer
            .into_inner()
            .map_err(|e| CliError::Csv(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| CliError::Csv(e.to_string()))
    }

    pub fn from_csv(text: &str) -> CliResult<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(true)
            .from_reader(text.as_bytes());
        let csv_err = |e: csv::Error| CliError::Csv(e.to_string());
        let header: Vec<String> = reader
            .headers()
            .map_err(csv_err)?
            .iter()
            .map(str::to_string)
            .collect();
        let mut table = CsvTable {
            header,
            rows: Vec::new(),
        };
        for record in reader.records() {
            let record = record.map_err(csv_err)?;
            let row = record
                .iter()
                .map(|s| {
                    if s.is_empty() {
                        Cell::Empty
                    } else {
                        s.parse().map(Cell::Num).unwrap_or_else(|_| Cell::Text(s.to_string()))
                    }
                })
                .collect();
            table.push(row)?;
        }
        Ok(table)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_round_trip() {
        for x in [0.0, 1.0, -2.5e-300, std::f64::consts::PI, 1e300, 0.1 + 0.2, f64::MIN_POSITIVE] {
            let s = format_number(x);
            assert_eq!(s.parse::<f64>().unwrap(), x, "{s}");
        }
        assert_eq!(format_number(0.5), "5.0000000000000000e-1");
    }

    #[test]
    fn csv_round_trip() {
        let mut t = CsvTable::new(["t", "C", "note"]);
        t.push(vec![0.0.into(), 0.1.into(), Cell::Text("1/3".into())]).unwrap();
        t.push(vec![1.0.into(), (1.0f64 / 3.0).into(), Cell::Empty]).unwrap();
        let text = t.to_csv().unwrap();
        assert!(text.ends_with('\n') && !text.contains('\r'));
        let back = CsvTable::from_csv(&text).unwrap();
        assert_eq!(back, t);
    }

    #[test]
    fn rejects_non_increasing_axis() {
        let mut t = CsvTable::new(["t", "C"]);
        t.push_numbers(&[1.0, 0.0]).unwrap();
        t.push_numbers(&[1.0, 0.0]).unwrap();
        assert!(t.to_csv().is_err());
        assert!(t.push_numbers(&[2.0]).is_err());
    }
}

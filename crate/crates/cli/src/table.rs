//! Result tables emitted as RFC-4180 CSV. Complex values always travel as
//! adjacent re/im columns; float formatting uses the shortest round-trip
//! representation, so identical runs produce byte-identical files.

use std::io::Write;
use std::path::Path;

use anyhow::Context;

#[derive(Debug, Clone)]
pub struct ResultTable {
    pub headers: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl ResultTable {
    pub fn new(headers: Vec<String>) -> Self {
        Self {
            headers,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        assert_eq!(row.len(), self.headers.len(), "ragged result row");
        self.rows.push(row);
    }

    pub fn write_csv(&self, path: &Path) -> anyhow::Result<()> {
        let file = std::fs::File::create(path)
            .with_context(|| format!("cannot create {}", path.display()))?;
        self.write_csv_to(std::io::BufWriter::new(file))
    }

    pub fn write_csv_to<W: Write>(&self, out: W) -> anyhow::Result<()> {
        let mut writer = csv::Writer::from_writer(out);
        writer.write_record(&self.headers)?;
        for row in &self.rows {
            writer.write_record(row.iter().map(|v| v.to_string()))?;
        }
        writer.flush()?;
        Ok(())
    }
}

//! CSV, JSON and gnuplot rendering. Every file starts with (or contains)
//! the resolved configuration.

use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::args::FormatArg;
use crate::config::RunConfig;
use crate::CliError;

const CONFIG_PREFIX: &str = "# config: ";

#[derive(Debug, Clone, Copy)]
pub enum Cell {
    F(f64),
    U(u64),
    B(bool),
}

impl Cell {
    fn text(self) -> String {
        match self {
            Cell::F(v) => format!("{v:.16e}"),
            Cell::U(v) => v.to_string(),
            Cell::B(v) => u8::from(v).to_string(),
        }
    }

    fn json(self) -> Value {
        match self {
            Cell::F(v) => json!(v),
            Cell::U(v) => json!(v),
            Cell::B(v) => json!(v),
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::F(v)
    }
}

#[derive(Debug, Clone)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&'static str]) -> Self {
        Self {
            columns: columns.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }
}

pub struct Output {
    pub table: Table,
    pub summary: Map<String, Value>,
    /// gnuplot plotting commands; `DATA` stands for the data file name.
    pub plot: String,
}

/// What gets embedded in each file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Recorded {
    pub format: FormatArg,
    pub run: RunConfig,
}

impl Recorded {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("configs serialize")
    }
}

pub fn render(rec: &Recorded, out: &Output) -> Result<String, CliError> {
    match rec.format {
        FormatArg::Csv => render_csv(rec, &out.table),
        FormatArg::Json => {
            let rows: Vec<Value> = out.table.rows.iter().map(|r| Value::Array(r.iter().map(|c| c.json()).collect())).collect();
            let doc = json!({
                "config": rec,
                "summary": out.summary,
                "columns": out.table.columns,
                "rows": rows,
            });
            Ok(format!("{doc}\n"))
        }
    }
}

fn render_csv(rec: &Recorded, table: &Table) -> Result<String, CliError> {
    let mut buf = format!("{CONFIG_PREFIX}{}\n", rec.to_json()).into_bytes();
    {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(&mut buf);
        let io = |e: csv::Error| CliError::Io(e.to_string());
        w.write_record(&table.columns).map_err(io)?;
        for row in &table.rows {
            w.write_record(row.iter().map(|c| c.text())).map_err(io)?;
        }
        w.flush().map_err(|e| CliError::Io(e.to_string()))?;
    }
    Ok(String::from_utf8(buf).expect("ascii output"))
}

pub fn gnuplot_script(rec: &Recorded, data_file: &str, plot: &str) -> String {
    format!(
        "{CONFIG_PREFIX}{}\nset datafile separator ','\nset key autotitle columnhead\n{}\n",
        rec.to_json(),
        plot.replace("DATA", &format!("'{data_file}'"))
    )
}

/// The configuration recorded in a file written by [`render`].
pub fn read_recorded(text: &str) -> Result<Recorded, CliError> {
    let bad = |e: serde_json::Error| CliError::Validation(format!("unreadable config: {e}"));
    if let Some(rest) = text.strip_prefix(CONFIG_PREFIX) {
        let line = rest.lines().next().unwrap_or_default();
        return serde_json::from_str(line).map_err(bad);
    }
    #[derive(Deserialize)]
    struct Doc {
        config: Recorded,
    }
    let doc: Doc = serde_json::from_str(text).map_err(bad)?;
    Ok(doc.config)
}

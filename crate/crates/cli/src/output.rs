use std::io::Write;

use serde_json::{Map, Value};

/// One cell of an output table.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(u64),
    /// Quantity not defined at this row.
    Missing,
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Num(x) => sig12(*x),
            Cell::Int(n) => n.to_string(),
            Cell::Missing => String::new(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Num(x) => serde_json::Number::from_f64(*x)
                .map(Value::Number)
                .unwrap_or(Value::Null),
            Cell::Int(n) => Value::from(*n),
            Cell::Missing => Value::Null,
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<Option<f64>> for Cell {
    fn from(x: Option<f64>) -> Self {
        x.map_or(Cell::Missing, Cell::Num)
    }
}

impl From<usize> for Cell {
    fn from(n: usize) -> Self {
        Cell::Int(n as u64)
    }
}

impl From<u64> for Cell {
    fn from(n: u64) -> Self {
        Cell::Int(n)
    }
}

/// Formats `x` with 12 significant digits, in fixed notation when the
/// exponent lies in `[-4, 12)` and in scientific notation otherwise.
pub fn sig12(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    // round first so that 9.99999999999995 moves to the next decade
    let sci = format!("{x:.11e}");
    let exp: i32 = sci[sci.find('e').unwrap() + 1..].parse().unwrap();
    if (-4..12).contains(&exp) {
        let decimals = (11 - exp) as usize;
        format!("{x:.decimals$}")
    } else {
        sci
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new<S: AsRef<str>>(columns: &[S]) -> Self {
        Table {
            columns: columns.iter().map(|c| c.as_ref().to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width");
        self.rows.push(row);
    }

    pub fn write_csv<W: Write>(&self, out: W) -> std::io::Result<()> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(out);
        w.write_record(&self.columns)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::csv))?;
        }
        w.flush()
    }

    pub fn json_rows(&self) -> Vec<Value> {
        self.rows
            .iter()
            .map(|row| {
                let mut m = Map::new();
                for (k, c) in self.columns.iter().zip(row) {
                    m.insert(k.clone(), c.json());
                }
                Value::Object(m)
            })
            .collect()
    }
}

/// What a command produces.
#[derive(Debug, Clone)]
pub enum Output {
    /// A single flat record.
    Record(Table),
    /// A table of rows.
    Rows(Table),
    /// A table plus named records that only appear in JSON (and on stderr for CSV).
    RowsWithFits {
        table: Table,
        fits: Vec<(&'static str, Table)>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

pub fn render<W: Write>(output: &Output, format: Format, mut out: W) -> std::io::Result<()> {
    match (format, output) {
        (Format::Csv, Output::Record(t) | Output::Rows(t)) => t.write_csv(out),
        (Format::Csv, Output::RowsWithFits { table, fits }) => {
            table.write_csv(&mut out)?;
            let stderr = std::io::stderr();
            let mut err = stderr.lock();
            for (name, fit) in fits {
                writeln!(err, "# {name}")?;
                fit.write_csv(&mut err)?;
            }
            Ok(())
        }
        (Format::Json, out_kind) => {
            let value = match out_kind {
                Output::Record(t) => t.json_rows().into_iter().next().unwrap_or(Value::Null),
                Output::Rows(t) => Value::Array(t.json_rows()),
                Output::RowsWithFits { table, fits } => {
                    let mut m = Map::new();
                    m.insert("rows".into(), Value::Array(table.json_rows()));
                    for (name, fit) in fits {
                        let v = fit.json_rows().into_iter().next().unwrap_or(Value::Null);
                        m.insert((*name).to_string(), v);
                    }
                    Value::Object(m)
                }
            };
            serde_json::to_writer_pretty(&mut out, &value)?;
            writeln!(out)
        }
    }
}

//! Row tables rendered as CSV or JSON with a fixed number of significant digits.

use serde_json::{Map, Value};

use crate::config::Format;
use crate::error::{config_err, CliResult};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Cell {
    Num(f64),
    Flag(bool),
    Empty,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

/// Scientific notation with `precision` significant digits; non-finite
/// values as inf, -inf, nan.
pub fn format_number(v: f64, precision: usize) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{:.*e}", precision.saturating_sub(1), v)
    }
}

impl Table {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        Self {
            header: header.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }

    pub fn render(&self, format: Format, precision: usize) -> CliResult<String> {
        match format {
            Format::Csv => self.to_csv(precision),
            Format::Json => self.to_json(precision),
        }
    }

    fn to_csv(&self, precision: usize) -> CliResult<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header).map_err(config_err)?;
        for row in &self.rows {
            w.write_record(row.iter().map(|c| match c {
                Cell::Num(v) => format_number(*v, precision),
                Cell::Flag(b) => b.to_string(),
                Cell::Empty => String::new(),
            }))
            .map_err(config_err)?;
        }
        let bytes = w.into_inner().map_err(config_err)?;
        String::from_utf8(bytes).map_err(config_err)
    }

    /// Numbers are rounded through the same decimal form as the CSV;
    /// non-finite and empty cells become null.
    fn to_json(&self, precision: usize) -> CliResult<String> {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|row| {
                let mut m = Map::new();
                for (h, c) in self.header.iter().zip(row) {
                    let v = match c {
                        Cell::Num(v) if v.is_finite() => format_number(*v, precision)
                            .parse::<f64>()
                            .ok()
                            .and_then(serde_json::Number::from_f64)
                            .map_or(Value::Null, Value::Number),
                        Cell::Flag(b) => Value::Bool(*b),
                        _ => Value::Null,
                    };
                    m.insert(h.clone(), v);
                }
                Value::Object(m)
            })
            .collect();
        let mut s = serde_json::to_string_pretty(&rows).map_err(config_err)?;
        s.push('\n');
        Ok(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digits_round_trip() {
        for v in [0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, f64::MIN_POSITIVE] {
            let s = format_number(v, 17);
            assert_eq!(s.parse::<f64>().unwrap().to_bits(), v.to_bits(), "{s}");
        }
        assert_eq!(format_number(f64::INFINITY, 17), "inf");
        assert_eq!(format_number(1.0, 3), "1.00e0");
    }

    #[test]
    fn csv_and_json_agree() {
        let mut t = Table::new(["a", "b", "c"]);
        t.rows.push(vec![Cell::Num(0.5), Cell::Empty, Cell::Flag(true)]);
        t.rows.push(vec![Cell::Num(f64::INFINITY), Cell::Num(-1.0), Cell::Flag(false)]);
        let csv = t.render(Format::Csv, 17).unwrap();
        assert_eq!(
            csv,
            "a,b,c\n5.0000000000000000e-1,,true\ninf,-1.0000000000000000e0,false\n"
        );
        let json: Value = serde_json::from_str(&t.render(Format::Json, 17).unwrap()).unwrap();
        assert_eq!(json[0]["a"], 0.5);
        assert!(json[0]["b"].is_null() && json[1]["a"].is_null());
        assert_eq!(json[1]["c"], false);
    }
}

//! Artifacts: numeric tables as CSV, the JSON report, and a gnuplot script.

use std::fs;
use std::path::Path;

use crate::error::CliError;

/// Column-major numeric table written with 17 significant digits.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self { header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }
}

/// `d.dddddddddddddddde±x`: 17 significant digits, '.' separator, no locale.
pub fn fmt_num(x: f64) -> String {
    if x.is_nan() {
        "NaN".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{x:.16e}")
    }
}

pub fn write_csv(path: &Path, table: &Table) -> Result<(), CliError> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_path(path)?;
    w.write_record(&table.header)?;
    for row in &table.rows {
        w.write_record(row.iter().map(|v| fmt_num(*v)))?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_json(path: &Path, value: &serde_json::Value) -> Result<(), CliError> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| CliError::Io(e.to_string()))?;
    s.push('\n');
    fs::write(path, s)?;
    Ok(())
}

/// Gnuplot script plotting every column against the first.
pub fn plot_script(csv_name: &str, table: &Table, title: &str) -> String {
    let mut s = String::new();
    s.push_str("# gnuplot script; run with: gnuplot -p <this file>\n");
    s.push_str("set datafile separator ','\n");
    s.push_str("set key autotitle columnhead\n");
    s.push_str(&format!("set title '{title}'\n"));
    s.push_str(&format!("set xlabel '{}'\n", table.header.first().map(String::as_str).unwrap_or("x")));
    s.push_str("set grid\n");
    let n = table.header.len();
    if n >= 2 {
        let parts: Vec<String> = (2..=n)
            .map(|k| if k == 2 { format!("'{csv_name}' using 1:{k} with lines") } else { format!("'' using 1:{k} with lines") })
            .collect();
        s.push_str("plot ");
        s.push_str(&parts.join(", \\\n     "));
        s.push('\n');
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digits() {
        assert_eq!(fmt_num(0.1), "1.0000000000000001e-1");
        assert_eq!(fmt_num(-2.0), "-2.0000000000000000e0");
        let x = 1.0 / 3.0;
        assert_eq!(fmt_num(x).parse::<f64>().unwrap(), x);
    }

    #[test]
    fn plot_references_csv() {
        let t = Table::new(&["t", "p", "q"]);
        let s = plot_script("data.csv", &t, "x");
        assert!(s.contains("'data.csv' using 1:2") && s.contains("'' using 1:3"));
    }
}

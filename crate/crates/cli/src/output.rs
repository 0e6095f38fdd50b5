//! Tabular output as CSV and as whitespace-separated gnuplot data.

use std::io::{self, Write};
use std::path::Path;

/// Header plus preformatted rows.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(columns: &[&'static str]) -> Self {
        Table {
            columns: columns.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut s = self.columns.join(",");
        s.push('\n');
        for r in &self.rows {
            s.push_str(&r.join(","));
            s.push('\n');
        }
        s
    }

    /// `#`-prefixed header; a new data block (two blank lines) whenever the
    /// first column changes and is not numeric.
    pub fn to_dat(&self) -> String {
        let mut s = format!("# {}\n", self.columns.join(" "));
        let grouped = self
            .rows
            .first()
            .is_some_and(|r| r[0].parse::<f64>().is_err());
        let mut prev: Option<&str> = None;
        for r in &self.rows {
            if grouped {
                if prev.is_some_and(|p| p != r[0]) {
                    s.push_str("\n\n");
                }
                prev = Some(&r[0]);
            }
            s.push_str(&r.join(" "));
            s.push('\n');
        }
        s
    }
}

/// Fixed decimals; non-finite values print as `NaN`.
pub fn fixed(x: f64, decimals: usize) -> String {
    if x.is_finite() {
        let s = format!("{x:.decimals$}");
        // Avoid "-0.0000".
        if s.trim_start_matches('-').chars().all(|c| c == '0' || c == '.') {
            s.trim_start_matches('-').to_string()
        } else {
            s
        }
    } else {
        "NaN".to_string()
    }
}

pub fn fixed_or_nan<E>(r: &Result<f64, E>, decimals: usize) -> String {
    r.as_ref().map_or_else(|_| "NaN".to_string(), |&x| fixed(x, decimals))
}

/// Writes to `path`, or to stdout when `path` is `None`.
pub fn emit(text: &str, path: Option<&Path>) -> io::Result<()> {
    match path {
        Some(p) => {
            if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir)?;
            }
            std::fs::write(p, text)
        }
        None => {
            let mut out = io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixed_formatting() {
        assert_eq!(fixed(1.23456, 4), "1.2346");
        assert_eq!(fixed(-0.00001, 4), "0.0000");
        assert_eq!(fixed(f64::NAN, 1), "NaN");
        assert_eq!(fixed(f64::INFINITY, 1), "NaN");
        assert_eq!(fixed(-2.5, 1), "-2.5");
        assert_eq!(fixed_or_nan::<()>(&Err(()), 2), "NaN");
    }

    #[test]
    fn csv_and_dat_layouts() {
        let mut t = Table::new(&["config", "x"]);
        t.push(vec!["a".into(), "1".into()]);
        t.push(vec!["a".into(), "2".into()]);
        t.push(vec!["b".into(), "3".into()]);
        assert_eq!(t.to_csv(), "config,x\na,1\na,2\nb,3\n");
        assert_eq!(t.to_dat(), "# config x\na 1\na 2\n\n\nb 3\n");
        let mut u = Table::new(&["snr_db", "y"]);
        u.push(vec!["0.0".into(), "1".into()]);
        u.push(vec!["1.0".into(), "2".into()]);
        assert_eq!(u.to_dat(), "# snr_db y\n0.0 1\n1.0 2\n");
    }
}

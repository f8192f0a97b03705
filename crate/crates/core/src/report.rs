//! CSV output with a fixed numeric format.
//!
//! Numbers are written with 17 significant digits in scientific notation
//! and a signed two-digit exponent (`1.5707963267948966e+00`); fields are
//! separated by `,` and rows end with `\n`.

use std::fmt::Write as _;

/// Formats `x` as `d.dddddddddddddddde+XX`.
pub fn sci(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let s = format!("{x:.16e}");
    let (mantissa, exp) = s.split_once('e').expect("scientific format has an exponent");
    let exp: i32 = exp.parse().expect("exponent is an integer");
    let sign = if exp < 0 { '-' } else { '+' };
    format!("{mantissa}e{sign}{:02}", exp.abs())
}

/// A CSV table with a fixed header.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvTable {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl CsvTable {
    pub fn new(header: &[&str]) -> Self {
        Self {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn header(&self) -> &[String] {
        &self.header
    }

    pub fn rows(&self) -> &[Vec<String>] {
        &self.rows
    }

    /// Appends a row; panics if the width differs from the header.
    pub fn push(&mut self, row: Vec<String>) {
        assert_eq!(row.len(), self.header.len(), "CSV row width mismatch");
        self.rows.push(row);
    }

    /// Appends a row of numbers.
    pub fn push_numbers(&mut self, values: &[f64]) {
        self.push(values.iter().map(|&v| sci(v)).collect());
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{}", self.header.join(","));
        for row in &self.rows {
            let _ = writeln!(out, "{}", row.join(","));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scientific_format() {
        assert_eq!(sci(std::f64::consts::FRAC_PI_2), "1.5707963267948966e+00");
        assert_eq!(sci(0.0), "0.0000000000000000e+00");
        assert_eq!(sci(-0.25), "-2.5000000000000000e-01");
        assert_eq!(sci(-2.5e-7), "-2.4999999999999999e-07");
        assert_eq!(sci(2f64.powi(400)), "2.5822498780869086e+120");
        assert_eq!(sci(f64::NAN), "nan");
    }

    #[test]
    fn round_trip_is_exact() {
        for x in [0.1, 1.0 / 3.0, 6.02214076e23, -1e-300, 0.979_056_1] {
            let back: f64 = sci(x).parse().unwrap();
            assert_eq!(back, x);
        }
    }

    #[test]
    fn render_layout() {
        let mut t = CsvTable::new(&["a", "b"]);
        t.push_numbers(&[1.0, -2.0]);
        assert_eq!(
            t.render(),
            "a,b\n1.0000000000000000e+00,-2.0000000000000000e+00\n"
        );
    }
}

//! Power grids and CSV tables for parameter sweeps.

use std::fmt::Write as _;

use crate::gaussian_schemes::Example1Row;
use crate::{Error, Result};

/// Significant digits written to CSV.
pub const CSV_DIGITS: usize = 6;

/// `steps` evenly spaced points from `lo` to `hi` inclusive.
pub fn linear_grid(lo: f64, hi: f64, steps: usize) -> Result<Vec<f64>> {
    if steps < 2 {
        return Err(Error::Unsupported(format!("a sweep needs at least 2 steps, got {steps}")));
    }
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(Error::Unsupported(format!("sweep bounds {lo}..{hi} are not ordered")));
    }
    let h = (hi - lo) / (steps - 1) as f64;
    Ok((0..steps).map(|i| if i + 1 == steps { hi } else { lo + h * i as f64 }).collect())
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(p: f64) -> f64 {
    10.0 * p.log10()
}

/// Formats `v` with [`CSV_DIGITS`] significant digits, trailing zeros
/// removed.
pub fn format_sig(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    if v.is_nan() {
        return "nan".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let sci = format!("{:.*e}", CSV_DIGITS - 1, v);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-5..15).contains(&exp) {
        return format!("{}e{exp}", trim_zeros(mantissa));
    }
    let decimals = (CSV_DIGITS as i32 - 1 - exp).max(0) as usize;
    trim_zeros(&format!("{v:.decimals$}")).to_string()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Rows of numbers under named columns; the first column is the sweep
/// variable.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(columns: Vec<String>) -> Self {
        Self { columns, rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<f64>) -> Result<()> {
        if row.len() != self.columns.len() {
            return Err(Error::DimensionMismatch(format!("row has {} cells, table has {} columns", row.len(), self.columns.len())));
        }
        self.rows.push(row);
        Ok(())
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }

    /// One line per row: the header then comma-separated values.
    pub fn to_wide_csv(&self) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|&v| format_sig(v)).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    /// `key,scheme,value_name` rows sorted by key then scheme name.
    pub fn to_long_csv(&self, value_name: &str) -> String {
        let mut schemes: Vec<(usize, &String)> = self.columns.iter().enumerate().skip(1).collect();
        schemes.sort_by(|a, b| a.1.cmp(b.1));
        let mut rows: Vec<&Vec<f64>> = self.rows.iter().collect();
        rows.sort_by(|a, b| a[0].total_cmp(&b[0]));
        let mut out = format!("{},scheme,{value_name}\n", self.columns[0]);
        for row in rows {
            for &(i, name) in &schemes {
                let _ = writeln!(out, "{},{name},{}", format_sig(row[0]), format_sig(row[i]));
            }
        }
        out
    }

    /// Parses the output of [`Table::to_wide_csv`].
    pub fn parse_wide_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let header = lines.next().ok_or_else(|| Error::Unsupported("empty CSV".into()))?;
        let mut table = Table::new(header.split(',').map(str::to_string).collect());
        for (n, line) in lines.enumerate() {
            let row = line
                .split(',')
                .map(|c| c.parse::<f64>().map_err(|e| Error::Unsupported(format!("line {}: {e}", n + 2))))
                .collect::<Result<Vec<_>>>()?;
            table.push(row)?;
        }
        Ok(table)
    }
}

/// The two-relay example sweep as a table with a `P_dB` column.
pub fn example1_table(rows: &[Example1Row]) -> Table {
    let mut columns = vec!["P_dB".to_string()];
    columns.extend(Example1Row::SCHEMES.iter().map(|s| s.to_string()));
    let mut t = Table::new(columns);
    for r in rows {
        let mut row = vec![r.p_db];
        row.extend(Example1Row::SCHEMES.iter().map(|s| r.get(s).expect("registered scheme")));
        t.push(row).expect("row width matches");
    }
    t
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn grids() {
        assert_eq!(linear_grid(-20.0, 20.0, 41).unwrap()[13], -7.0);
        assert_eq!(*linear_grid(0.0, 1.0, 7).unwrap().last().unwrap(), 1.0);
        assert!(linear_grid(0.0, 1.0, 1).is_err());
        assert!(linear_grid(1.0, 0.0, 5).is_err());
        assert!((db_to_linear(30.0) - 1000.0).abs() < 1e-9);
        assert!((linear_to_db(db_to_linear(-13.0)) + 13.0).abs() < 1e-12);
    }

    #[test]
    fn significant_digits() {
        assert_eq!(format_sig(0.0), "0");
        assert_eq!(format_sig(1.0), "1");
        assert_eq!(format_sig(0.5849625007), "0.584963");
        assert_eq!(format_sig(-20.0), "-20");
        assert_eq!(format_sig(123456.78), "123457");
        assert_eq!(format_sig(1.5e-7), "1.5e-7");
        assert_eq!(format_sig(f64::INFINITY), "inf");
    }

    #[test]
    fn wide_and_long_layouts() {
        let mut t = Table::new(vec!["P_dB".into(), "zeta".into(), "alpha".into()]);
        t.push(vec![1.0, 0.25, 0.5]).unwrap();
        t.push(vec![-1.0, 0.125, 1.0 / 3.0]).unwrap();
        assert!(t.push(vec![0.0]).is_err());
        assert_eq!(t.to_wide_csv(), "P_dB,zeta,alpha\n1,0.25,0.5\n-1,0.125,0.333333\n");
        assert_eq!(
            t.to_long_csv("rate_bits"),
            "P_dB,scheme,rate_bits\n-1,alpha,0.333333\n-1,zeta,0.125\n1,alpha,0.5\n1,zeta,0.25\n"
        );
        let back = Table::parse_wide_csv(&t.to_wide_csv()).unwrap();
        assert_eq!(back.columns, t.columns);
        assert_eq!(back.column("zeta").unwrap(), vec![0.25, 0.125]);
    }

    proptest! {
        #[test]
        fn format_round_trips_to_six_digits(v in -1e9f64..1e9) {
            let back: f64 = format_sig(v).parse().unwrap();
            prop_assert!((back - v).abs() <= 5e-6 * v.abs() + 1e-300);
        }
    }
}

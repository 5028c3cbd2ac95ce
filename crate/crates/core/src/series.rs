//! Recorded diagnostics: named columns of per-record scalars, written as CSV.

use std::io::{BufRead, Write};

use crate::error::{Error, Result};

#[derive(Clone, Debug, Default, PartialEq)]
pub struct TimeSeries {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl TimeSeries {
    pub fn new(columns: &[&str]) -> Self {
        Self { columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let j = self.index(name)?;
        Some(self.rows.iter().map(|r| r[j]).collect())
    }

    pub fn last(&self, name: &str) -> Option<f64> {
        let j = self.index(name)?;
        self.rows.last().map(|r| r[j])
    }

    /// Rows whose `name` column satisfies the predicate.
    pub fn filter(&self, name: &str, keep: impl Fn(f64) -> bool) -> TimeSeries {
        let Some(j) = self.index(name) else { return TimeSeries { columns: self.columns.clone(), rows: vec![] } };
        TimeSeries { columns: self.columns.clone(), rows: self.rows.iter().filter(|r| keep(r[j])).cloned().collect() }
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "{}", self.columns.join(","))?;
        for r in &self.rows {
            let line: Vec<String> = r.iter().map(|v| format!("{v:.15e}")).collect();
            writeln!(w, "{}", line.join(","))?;
        }
        Ok(())
    }

    pub fn read_csv<R: BufRead>(r: R) -> Result<Self> {
        let mut lines = r.lines();
        let header = lines.next().ok_or_else(|| Error::Parse("empty csv".into()))??;
        let columns: Vec<String> = header.split(',').map(|s| s.trim().to_string()).collect();
        let mut rows = Vec::new();
        for (k, line) in lines.enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let row: std::result::Result<Vec<f64>, _> = line.split(',').map(|s| s.trim().parse::<f64>()).collect();
            let row = row.map_err(|e| Error::Parse(format!("line {}: {e}", k + 2)))?;
            if row.len() != columns.len() {
                return Err(Error::Parse(format!("line {}: expected {} fields, found {}", k + 2, columns.len(), row.len())));
            }
            rows.push(row);
        }
        Ok(Self { columns, rows })
    }
}

/// `(b − a)/ln(b/a)`, the exact mean of an exponential between two samples.
pub fn log_mean(a: f64, b: f64) -> f64 {
    let r = b / a;
    if (r - 1.0).abs() < 1e-6 {
        // series of (r−1)/ln r about r = 1
        a * (1.0 + (r - 1.0) / 2.0 - (r - 1.0).powi(2) / 12.0)
    } else {
        (b - a) / r.ln()
    }
}

/// Worst relative violation of `Δt = (R^d/M) Δτ` between consecutive rows,
/// with `R^d/M` averaged by [`log_mean`].
pub fn clock_chain_defect(series: &TimeSeries, d: u32) -> Option<f64> {
    let (t, tau, r, m) = (series.column("t")?, series.column("tau")?, series.column("R")?, series.column("M")?);
    let g: Vec<f64> = r.iter().zip(&m).map(|(r, m)| r.powi(d as i32) / m).collect();
    let mut worst: f64 = 0.0;
    for i in 1..t.len() {
        let dt = t[i] - t[i - 1];
        let pred = log_mean(g[i - 1], g[i]) * (tau[i] - tau[i - 1]);
        if dt != 0.0 {
            worst = worst.max(((dt - pred) / dt).abs());
        }
    }
    Some(worst)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trip() {
        let mut s = TimeSeries::new(&["t", "R"]);
        s.push(vec![0.0, 1.0]);
        s.push(vec![0.5, 0.25]);
        let mut buf = Vec::new();
        s.write_csv(&mut buf).unwrap();
        let back = TimeSeries::read_csv(&buf[..]).unwrap();
        assert_eq!(back, s);
        assert!(TimeSeries::read_csv(&b"a,b\n1,2,3\n"[..]).is_err());
    }

    #[test]
    fn log_mean_is_exact_for_exponentials() {
        let (a, b) = (2.0f64, 2.0 * 1.5f64.exp());
        assert!((log_mean(a, b) - 2.0 * (1.5f64.exp() - 1.0) / 1.5).abs() < 1e-12);
        assert!((log_mean(3.0, 3.0 * (1.0 + 1e-8)) - 3.0 * (1.0 + 5e-9)).abs() < 1e-12);
    }
}

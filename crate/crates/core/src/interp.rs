//! Monotone piecewise cubic Hermite interpolation (Fritsch-Carlson slopes).

use crate::error::{Error, Result};

#[derive(Clone, Debug)]
pub struct Pchip {
    x: Vec<f64>,
    y: Vec<f64>,
    slope: Vec<f64>,
}

impl Pchip {
    pub fn new(x: &[f64], y: &[f64]) -> Result<Self> {
        let n = x.len();
        if n < 2 || y.len() != n {
            return Err(Error::DegenerateGrid(format!("pchip needs matching data, got {} and {}", n, y.len())));
        }
        if x.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::DegenerateGrid("pchip nodes must increase".into()));
        }
        let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
        let del: Vec<f64> = (0..n - 1).map(|i| (y[i + 1] - y[i]) / h[i]).collect();
        let mut slope = vec![0.0; n];
        if n == 2 {
            slope[0] = del[0];
            slope[1] = del[0];
            return Ok(Self { x: x.to_vec(), y: y.to_vec(), slope });
        }
        for i in 1..n - 1 {
            if del[i - 1] * del[i] > 0.0 {
                let w1 = 2.0 * h[i] + h[i - 1];
                let w2 = h[i] + 2.0 * h[i - 1];
                slope[i] = (w1 + w2) / (w1 / del[i - 1] + w2 / del[i]);
            }
        }
        slope[0] = end_slope(h[0], h[1], del[0], del[1]);
        slope[n - 1] = end_slope(h[n - 2], h[n - 3], del[n - 2], del[n - 3]);
        Ok(Self { x: x.to_vec(), y: y.to_vec(), slope })
    }

    fn cell(&self, t: f64) -> usize {
        let n = self.x.len();
        match self.x.binary_search_by(|v| v.partial_cmp(&t).unwrap()) {
            Ok(i) => i.min(n - 2),
            Err(0) => 0,
            Err(i) => (i - 1).min(n - 2),
        }
    }

    /// Value at `t`; constant extension outside the data range.
    pub fn eval(&self, t: f64) -> f64 {
        let n = self.x.len();
        if t <= self.x[0] {
            return self.y[0];
        }
        if t >= self.x[n - 1] {
            return self.y[n - 1];
        }
        let i = self.cell(t);
        let h = self.x[i + 1] - self.x[i];
        let s = (t - self.x[i]) / h;
        let h00 = (1.0 + 2.0 * s) * (1.0 - s) * (1.0 - s);
        let h10 = s * (1.0 - s) * (1.0 - s);
        let h01 = s * s * (3.0 - 2.0 * s);
        let h11 = s * s * (s - 1.0);
        h00 * self.y[i] + h10 * h * self.slope[i] + h01 * self.y[i + 1] + h11 * h * self.slope[i + 1]
    }

    pub fn eval_many(&self, ts: &[f64]) -> Vec<f64> {
        ts.iter().map(|t| self.eval(*t)).collect()
    }
}

// three-point end formula, shape-preserving
fn end_slope(h0: f64, h1: f64, d0: f64, d1: f64) -> f64 {
    let s = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
    if s * d0 <= 0.0 {
        0.0
    } else if d0 * d1 <= 0.0 && s.abs() > 3.0 * d0.abs() {
        3.0 * d0
    } else {
        s
    }
}

/// Piecewise-linear interpolation with constant extension.
pub fn linear(x: &[f64], y: &[f64], t: f64) -> f64 {
    let n = x.len();
    if t <= x[0] {
        return y[0];
    }
    if t >= x[n - 1] {
        return y[n - 1];
    }
    let i = x.partition_point(|v| *v <= t) - 1;
    let w = (t - x[i]) / (x[i + 1] - x[i]);
    y[i] + w * (y[i + 1] - y[i])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reproduces_data_and_keeps_monotone() {
        let x: Vec<f64> = (0..30).map(|i| (i as f64 * 0.2).powf(1.3)).collect();
        let y: Vec<f64> = x.iter().map(|v| (v - 2.0).tanh()).collect();
        let p = Pchip::new(&x, &y).unwrap();
        for (a, b) in x.iter().zip(&y) {
            assert!((p.eval(*a) - b).abs() < 1e-15);
        }
        let fine: Vec<f64> = (0..2000).map(|i| i as f64 * x[29] / 1999.0).collect();
        let v = p.eval_many(&fine);
        assert!(v.windows(2).all(|w| w[1] >= w[0] - 1e-15));
        let worst = fine.iter().zip(&v).map(|(t, u)| (u - (t - 2.0).tanh()).abs()).fold(0.0, f64::max);
        assert!(worst < 5e-3);
    }

    #[test]
    fn third_order_on_smooth_data() {
        let err = |n: usize| {
            let x: Vec<f64> = (0..=n).map(|i| i as f64 / n as f64).collect();
            let y: Vec<f64> = x.iter().map(|v| (2.0 * v).exp()).collect();
            let p = Pchip::new(&x, &y).unwrap();
            (0..997).map(|k| k as f64 / 996.0).map(|t| (p.eval(t) - (2.0 * t).exp()).abs()).fold(0.0, f64::max)
        };
        let rate = (err(40) / err(80)).log2();
        assert!(rate > 2.5, "{rate}");
        assert!(Pchip::new(&[0.0, 0.0], &[1.0, 2.0]).is_err());
    }
}

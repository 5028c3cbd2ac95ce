//! Nonuniform 1D grids, quadrature and finite-difference jets.

use crate::error::{Error, Result};
use crate::jet::Jet;
use crate::profiles::eval_omega0;

/// Inner-variable mesh with trapezoid and ω₀-weighted trapezoid weights.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightedGrid {
    pub nodes: Vec<f64>,
    pub spacing: Vec<f64>,
    /// Trapezoid weight times ω₀ at the node.
    pub weights: Vec<f64>,
    /// Plain trapezoid weight.
    pub trap: Vec<f64>,
}

impl WeightedGrid {
    pub fn from_nodes(nodes: Vec<f64>) -> Result<Self> {
        if nodes.len() < 3 {
            return Err(Error::DegenerateGrid(format!("{} nodes, need at least 3", nodes.len())));
        }
        let spacing: Vec<f64> = nodes.windows(2).map(|w| w[1] - w[0]).collect();
        if spacing.iter().any(|h| !(*h > 0.0)) {
            return Err(Error::DegenerateGrid("nodes are not strictly increasing".into()));
        }
        let trap = trapezoid_weights(&nodes);
        let weights = nodes.iter().zip(&trap).map(|(x, w)| w * eval_omega0(*x)).collect();
        Ok(Self { nodes, spacing, weights, trap })
    }

    /// Uniform grid on `[lo, hi]` with spacing close to `h`.
    pub fn uniform(lo: f64, hi: f64, h: f64) -> Result<Self> {
        if !(hi > lo && h > 0.0) {
            return Err(Error::DegenerateGrid(format!("[{lo}, {hi}] with h = {h}")));
        }
        let n = ((hi - lo) / h).round() as usize;
        let hh = (hi - lo) / n as f64;
        Self::from_nodes((0..=n).map(|i| lo + hh * i as f64).collect())
    }

    /// Uniform symmetric box `[−L, L]`.
    pub fn symmetric(l: f64, h: f64) -> Result<Self> {
        Self::uniform(-l, l, h)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn is_uniform(&self) -> bool {
        let h0 = self.spacing[0];
        self.spacing.iter().all(|h| (h - h0).abs() <= 1e-9 * h0)
    }

    pub fn sample(&self, f: impl Fn(f64) -> f64) -> Vec<f64> {
        self.nodes.iter().map(|x| f(*x)).collect()
    }

    /// `∫ f g ω₀`.
    pub fn inner(&self, f: &[f64], g: &[f64]) -> f64 {
        self.weights.iter().zip(f).zip(g).map(|((w, a), b)| w * a * b).sum()
    }

    pub fn norm(&self, f: &[f64]) -> f64 {
        self.inner(f, f).sqrt()
    }

    /// Plain trapezoid `∫ f`.
    pub fn integrate(&self, f: &[f64]) -> f64 {
        self.trap.iter().zip(f).map(|(w, a)| w * a).sum()
    }

    /// Unweighted discrete L² norm.
    pub fn l2(&self, f: &[f64]) -> f64 {
        self.trap.iter().zip(f).map(|(w, a)| w * a * a).sum::<f64>().sqrt()
    }
}

pub fn trapezoid_weights(nodes: &[f64]) -> Vec<f64> {
    let n = nodes.len();
    let mut w = vec![0.0; n];
    for i in 0..n - 1 {
        let h = nodes[i + 1] - nodes[i];
        w[i] += 0.5 * h;
        w[i + 1] += 0.5 * h;
    }
    w
}

pub fn trapezoid(nodes: &[f64], f: &[f64]) -> f64 {
    nodes
        .windows(2)
        .zip(f.windows(2))
        .map(|(x, y)| 0.5 * (x[1] - x[0]) * (y[0] + y[1]))
        .sum()
}

/// First- and second-derivative weights of the quadratic through `x` at `at`.
fn quad_weights(x: [f64; 3], at: f64) -> ([f64; 3], [f64; 3]) {
    let mut d1 = [0.0; 3];
    let mut d2 = [0.0; 3];
    for j in 0..3 {
        let (a, b) = match j {
            0 => (x[1], x[2]),
            1 => (x[0], x[2]),
            _ => (x[0], x[1]),
        };
        let den = (x[j] - a) * (x[j] - b);
        d1[j] = ((at - a) + (at - b)) / den;
        d2[j] = 2.0 / den;
    }
    (d1, d2)
}

/// Three-point first and second derivatives on a nonuniform grid
/// (one-sided at the ends).
pub fn derivatives(nodes: &[f64], f: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let n = nodes.len();
    let mut d1 = vec![0.0; n];
    let mut d2 = vec![0.0; n];
    for i in 0..n {
        let c = i.clamp(1, n - 2);
        let x = [nodes[c - 1], nodes[c], nodes[c + 1]];
        let (w1, w2) = quad_weights(x, nodes[i]);
        let v = [f[c - 1], f[c], f[c + 1]];
        d1[i] = w1[0] * v[0] + w1[1] * v[1] + w1[2] * v[2];
        d2[i] = w2[0] * v[0] + w2[1] * v[1] + w2[2] * v[2];
    }
    (d1, d2)
}

pub fn derivative(nodes: &[f64], f: &[f64]) -> Vec<f64> {
    derivatives(nodes, f).0
}

/// Finite-difference jets `(f, f', f'', f''')` at every node.
pub fn fd_jets(nodes: &[f64], f: &[f64]) -> Vec<Jet> {
    let (d1, d2) = derivatives(nodes, f);
    let d3 = derivative(nodes, &d2);
    (0..nodes.len()).map(|i| Jet([f[i], d1[i], d2[i], d3[i]])).collect()
}

/// Graded mesh: uniform spacing `h` on `[core_lo, core_hi]`, geometric growth
/// by `ratio` up to `h_max` towards `lo` and `hi`. End points are hit exactly.
pub fn graded_mesh(lo: f64, hi: f64, core_lo: f64, core_hi: f64, h: f64, ratio: f64, h_max: f64) -> Vec<f64> {
    let core_lo = core_lo.max(lo);
    let core_hi = core_hi.min(hi);
    let n_core = (((core_hi - core_lo) / h).ceil() as usize).max(1);
    let hc = (core_hi - core_lo) / n_core as f64;
    let mut core: Vec<f64> = (0..=n_core).map(|i| core_lo + hc * i as f64).collect();
    *core.last_mut().unwrap() = core_hi;

    let grow = |start: f64, end: f64, dir: f64| -> Vec<f64> {
        let mut out = Vec::new();
        let mut x = start;
        let mut step = hc;
        loop {
            step = (step * ratio).min(h_max);
            let next = x + dir * step;
            if (end - next) * dir <= 0.5 * step {
                break;
            }
            out.push(next);
            x = next;
        }
        if (end - start) * dir > 0.0 {
            out.push(end);
        }
        out
    };
    let mut nodes: Vec<f64> = grow(core_lo, lo, -1.0).into_iter().rev().collect();
    nodes.extend(core);
    nodes.extend(grow(core_hi, hi, 1.0));
    nodes
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverse_weight_quadrature() {
        let g = WeightedGrid::symmetric(20.0, 0.05).unwrap();
        let inv: Vec<f64> = g.nodes.iter().map(|x| 1.0 / eval_omega0(*x)).collect();
        let q = g.integrate(&inv);
        // ω₀⁻¹ = 2Q', so the integral over [−L, L] is 2 tanh(L/4)
        let exact = 2.0 * (20.0f64 / 4.0).tanh();
        assert!((q - exact).abs() / exact < 0.01);
    }

    #[test]
    fn rejects_degenerate() {
        assert!(WeightedGrid::from_nodes(vec![0.0, 1.0]).is_err());
        assert!(WeightedGrid::from_nodes(vec![0.0, 1.0, 1.0]).is_err());
    }

    #[test]
    fn derivatives_exact_on_quadratics() {
        let nodes = vec![0.0, 0.1, 0.25, 0.3, 0.6, 1.0];
        let f: Vec<f64> = nodes.iter().map(|x| 3.0 * x * x - x + 2.0).collect();
        let (d1, d2) = derivatives(&nodes, &f);
        for (i, x) in nodes.iter().enumerate() {
            assert!((d1[i] - (6.0 * x - 1.0)).abs() < 1e-12);
            assert!((d2[i] - 6.0).abs() < 1e-10);
        }
    }

    #[test]
    fn graded_mesh_hits_ends() {
        let m = graded_mesh(0.0, 4.0, 0.8, 1.2, 0.01, 1.05, 0.1);
        assert_eq!(m[0], 0.0);
        assert_eq!(*m.last().unwrap(), 4.0);
        assert!(m.windows(2).all(|w| w[1] > w[0]));
        let core = m.iter().filter(|x| **x >= 0.8 && **x <= 1.2).count();
        assert!(core >= 40);
    }
}

//! Tridiagonal operators with Dirichlet ends and the linear solvers used
//! around them.

use std::io::Write;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OperatorKind {
    L0,
    M0,
    A1Right,
    A1Left,
    Custom,
}

/// Tridiagonal operator over all grid nodes. Rows 0 and n−1 are Dirichlet
/// rows: `apply` returns 0 there and the boundary values are stored apart.
#[derive(Clone, Debug, PartialEq)]
pub struct BandedOperator {
    /// `sub[i]` multiplies `f[i-1]` in row i (`sub[0]` unused).
    pub sub: Vec<f64>,
    pub diag: Vec<f64>,
    /// `sup[i]` multiplies `f[i+1]` in row i (last entry unused).
    pub sup: Vec<f64>,
    pub kind: OperatorKind,
    pub boundary: (f64, f64),
}

impl BandedOperator {
    pub fn zeros(n: usize, kind: OperatorKind) -> Self {
        Self { sub: vec![0.0; n], diag: vec![0.0; n], sup: vec![0.0; n], kind, boundary: (0.0, 0.0) }
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    /// Applies the interior rows; boundary rows give 0.
    pub fn apply(&self, f: &[f64]) -> Vec<f64> {
        let n = self.len();
        let mut out = vec![0.0; n];
        for i in 1..n - 1 {
            out[i] = self.sub[i] * f[i - 1] + self.diag[i] * f[i] + self.sup[i] * f[i + 1];
        }
        out
    }

    /// Interior block (homogeneous Dirichlet), as a tridiagonal of size n−2.
    pub fn interior(&self) -> Tridiagonal {
        let n = self.len();
        Tridiagonal {
            sub: self.sub[1..n - 1].to_vec(),
            diag: self.diag[1..n - 1].to_vec(),
            sup: self.sup[1..n - 1].to_vec(),
        }
    }

    /// Largest `|A[i][i+1] − A[i+1][i]|` over interior rows.
    pub fn symmetry_defect(&self) -> f64 {
        let n = self.len();
        (1..n - 2).map(|i| (self.sup[i] - self.sub[i + 1]).abs()).fold(0.0, f64::max)
    }

    /// Bandwidth actually used by interior rows (0, 1 or 2 off-diagonals).
    pub fn stencil_width(&self) -> usize {
        let n = self.len();
        let lower = (1..n - 1).any(|i| self.sub[i] != 0.0) as usize;
        let upper = (1..n - 1).any(|i| self.sup[i] != 0.0) as usize;
        lower + upper + 1
    }

    /// CSV dump with columns `node, sub, diag, super`.
    pub fn write_csv<W: Write>(&self, nodes: &[f64], mut w: W) -> std::io::Result<()> {
        writeln!(w, "node,sub,diag,super")?;
        for i in 0..self.len() {
            writeln!(w, "{:.12e},{:.12e},{:.12e},{:.12e}", nodes[i], self.sub[i], self.diag[i], self.sup[i])?;
        }
        Ok(())
    }
}

/// Plain tridiagonal matrix; `sub[0]` and `sup[n-1]` are ignored.
#[derive(Clone, Debug, PartialEq)]
pub struct Tridiagonal {
    pub sub: Vec<f64>,
    pub diag: Vec<f64>,
    pub sup: Vec<f64>,
}

impl Tridiagonal {
    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    pub fn apply(&self, f: &[f64]) -> Vec<f64> {
        let n = self.len();
        (0..n)
            .map(|i| {
                let mut v = self.diag[i] * f[i];
                if i > 0 {
                    v += self.sub[i] * f[i - 1];
                }
                if i + 1 < n {
                    v += self.sup[i] * f[i + 1];
                }
                v
            })
            .collect()
    }

    /// Thomas algorithm; intended for diagonally dominant systems.
    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        thomas(&self.sub, &self.diag, &self.sup, rhs)
    }

    /// Gaussian elimination with partial pivoting; stable for shifted
    /// (indefinite) systems as in inverse iteration.
    pub fn solve_pivoted(&self, rhs: &[f64]) -> Vec<f64> {
        let n = self.len();
        let mut dl: Vec<f64> = (0..n).map(|i| if i + 1 < n { self.sub[i + 1] } else { 0.0 }).collect();
        let mut d = self.diag.clone();
        let mut du = self.sup.clone();
        let mut du2 = vec![0.0; n];
        let mut b = rhs.to_vec();
        let tiny = f64::MIN_POSITIVE.sqrt();
        for i in 0..n.saturating_sub(1) {
            if d[i].abs() >= dl[i].abs() {
                let l = if d[i] != 0.0 { dl[i] / d[i] } else { 0.0 };
                dl[i] = l;
                d[i + 1] -= l * du[i];
                b[i + 1] -= l * b[i];
            } else {
                let l = d[i] / dl[i];
                d[i] = dl[i];
                dl[i] = l;
                let t = du[i];
                du[i] = d[i + 1];
                d[i + 1] = t - l * d[i + 1];
                if i + 2 < n {
                    du2[i] = du[i + 1];
                    du[i + 1] *= -l;
                }
                b.swap(i, i + 1);
                b[i + 1] -= l * b[i];
            }
        }
        let mut x = vec![0.0; n];
        for i in (0..n).rev() {
            let mut v = b[i];
            if i + 1 < n {
                v -= du[i] * x[i + 1];
            }
            if i + 2 < n {
                v -= du2[i] * x[i + 2];
            }
            let piv = if d[i].abs() < tiny { tiny.copysign(d[i] + 0.0) } else { d[i] };
            x[i] = v / piv;
        }
        x
    }
}

pub fn thomas(sub: &[f64], diag: &[f64], sup: &[f64], rhs: &[f64]) -> Vec<f64> {
    let n = diag.len();
    let mut c = vec![0.0; n];
    let mut x = vec![0.0; n];
    let mut beta = diag[0];
    x[0] = rhs[0] / beta;
    for i in 1..n {
        c[i] = sup[i - 1] / beta;
        beta = diag[i] - sub[i] * c[i];
        x[i] = (rhs[i] - sub[i] * x[i - 1]) / beta;
    }
    for i in (0..n - 1).rev() {
        x[i] -= c[i + 1] * x[i + 1];
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Tridiagonal {
        Tridiagonal {
            sub: vec![0.0, 1.0, -2.0, 0.5, 3.0],
            diag: vec![0.1, -0.2, 0.05, 1.0, -0.3],
            sup: vec![2.0, 1.5, -1.0, 0.7, 0.0],
        }
    }

    #[test]
    fn pivoted_solve_inverts_apply() {
        let t = sample();
        let x = vec![1.0, -2.0, 0.5, 3.0, -1.0];
        let b = t.apply(&x);
        let y = t.solve_pivoted(&b);
        for i in 0..5 {
            assert!((x[i] - y[i]).abs() < 1e-12, "{i}: {} vs {}", x[i], y[i]);
        }
    }

    #[test]
    fn thomas_on_dominant_system() {
        let t = Tridiagonal { sub: vec![0.0, -1.0, -1.0], diag: vec![4.0, 4.0, 4.0], sup: vec![-1.0, -1.0, 0.0] };
        let x = vec![0.3, 1.0, -0.7];
        let y = t.solve(&t.apply(&x));
        for i in 0..3 {
            assert!((x[i] - y[i]).abs() < 1e-14);
        }
    }

    #[test]
    fn csv_dump_header() {
        let op = BandedOperator::zeros(3, OperatorKind::Custom);
        let mut buf = Vec::new();
        op.write_csv(&[0.0, 1.0, 2.0], &mut buf).unwrap();
        let s = String::from_utf8(buf).unwrap();
        assert!(s.starts_with("node,sub,diag,super\n"));
        assert_eq!(s.lines().count(), 4);
    }
}

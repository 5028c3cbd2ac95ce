//! Third-order jets: a value together with its first three derivatives
//! along one variable.
//!
//! Every pointwise formula in the crate is written over [`Jet`], so that a
//! formula and its spatial derivative come out of a single evaluation.

use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub};

#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct Jet(pub [f64; 4]);

impl Jet {
    pub const ZERO: Jet = Jet([0.0; 4]);

    pub fn constant(c: f64) -> Self {
        Jet([c, 0.0, 0.0, 0.0])
    }

    /// The independent variable itself.
    pub fn var(x: f64) -> Self {
        Jet([x, 1.0, 0.0, 0.0])
    }

    pub fn new(v: f64, d1: f64, d2: f64, d3: f64) -> Self {
        Jet([v, d1, d2, d3])
    }

    pub fn v(&self) -> f64 {
        self.0[0]
    }
    pub fn d1(&self) -> f64 {
        self.0[1]
    }
    pub fn d2(&self) -> f64 {
        self.0[2]
    }
    pub fn d3(&self) -> f64 {
        self.0[3]
    }

    /// Derivative jet; the third derivative of the result is unknown and set to 0.
    pub fn deriv(&self) -> Self {
        Jet([self.0[1], self.0[2], self.0[3], 0.0])
    }

    /// Chain rule: `g ∘ self` where `g` holds (g, g', g'', g''') at `self.v()`.
    pub fn compose(&self, g: [f64; 4]) -> Self {
        let [_, f1, f2, f3] = self.0;
        Jet([
            g[0],
            g[1] * f1,
            g[2] * f1 * f1 + g[1] * f2,
            g[3] * f1 * f1 * f1 + 3.0 * g[2] * f1 * f2 + g[1] * f3,
        ])
    }

    pub fn exp(&self) -> Self {
        let e = self.0[0].exp();
        self.compose([e, e, e, e])
    }

    pub fn ln(&self) -> Self {
        let x = self.0[0];
        self.compose([x.ln(), 1.0 / x, -1.0 / (x * x), 2.0 / (x * x * x)])
    }

    pub fn powf(&self, p: f64) -> Self {
        let x = self.0[0];
        self.compose([
            x.powf(p),
            p * x.powf(p - 1.0),
            p * (p - 1.0) * x.powf(p - 2.0),
            p * (p - 1.0) * (p - 2.0) * x.powf(p - 3.0),
        ])
    }

    pub fn powi(&self, n: i32) -> Self {
        let x = self.0[0];
        let nf = n as f64;
        let pw = |k: i32| if n - k == 0 { 1.0 } else { x.powi(n - k) };
        self.compose([
            x.powi(n),
            nf * pw(1),
            nf * (nf - 1.0) * pw(2),
            nf * (nf - 1.0) * (nf - 2.0) * pw(3),
        ])
    }

    pub fn recip(&self) -> Self {
        Jet::constant(1.0) / *self
    }

    pub fn scale(&self, c: f64) -> Self {
        Jet([self.0[0] * c, self.0[1] * c, self.0[2] * c, self.0[3] * c])
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0, |a, b| a.max(b.abs()))
    }
}

impl Add for Jet {
    type Output = Jet;
    fn add(self, o: Jet) -> Jet {
        Jet([self.0[0] + o.0[0], self.0[1] + o.0[1], self.0[2] + o.0[2], self.0[3] + o.0[3]])
    }
}

impl AddAssign for Jet {
    fn add_assign(&mut self, o: Jet) {
        *self = *self + o;
    }
}

impl Sub for Jet {
    type Output = Jet;
    fn sub(self, o: Jet) -> Jet {
        Jet([self.0[0] - o.0[0], self.0[1] - o.0[1], self.0[2] - o.0[2], self.0[3] - o.0[3]])
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

impl Mul for Jet {
    type Output = Jet;
    fn mul(self, o: Jet) -> Jet {
        let [a0, a1, a2, a3] = self.0;
        let [b0, b1, b2, b3] = o.0;
        Jet([
            a0 * b0,
            a1 * b0 + a0 * b1,
            a2 * b0 + 2.0 * a1 * b1 + a0 * b2,
            a3 * b0 + 3.0 * a2 * b1 + 3.0 * a1 * b2 + a0 * b3,
        ])
    }
}

impl Div for Jet {
    type Output = Jet;
    fn div(self, o: Jet) -> Jet {
        let [a0, a1, a2, a3] = self.0;
        let [b0, b1, b2, b3] = o.0;
        let c0 = a0 / b0;
        let c1 = (a1 - c0 * b1) / b0;
        let c2 = (a2 - 2.0 * c1 * b1 - c0 * b2) / b0;
        let c3 = (a3 - 3.0 * c2 * b1 - 3.0 * c1 * b2 - c0 * b3) / b0;
        Jet([c0, c1, c2, c3])
    }
}

impl Add<f64> for Jet {
    type Output = Jet;
    fn add(self, c: f64) -> Jet {
        Jet([self.0[0] + c, self.0[1], self.0[2], self.0[3]])
    }
}

impl Sub<f64> for Jet {
    type Output = Jet;
    fn sub(self, c: f64) -> Jet {
        Jet([self.0[0] - c, self.0[1], self.0[2], self.0[3]])
    }
}

impl Mul<f64> for Jet {
    type Output = Jet;
    fn mul(self, c: f64) -> Jet {
        self.scale(c)
    }
}

impl Div<f64> for Jet {
    type Output = Jet;
    fn div(self, c: f64) -> Jet {
        self.scale(1.0 / c)
    }
}

impl Add<Jet> for f64 {
    type Output = Jet;
    fn add(self, j: Jet) -> Jet {
        j + self
    }
}

impl Sub<Jet> for f64 {
    type Output = Jet;
    fn sub(self, j: Jet) -> Jet {
        -j + self
    }
}

impl Mul<Jet> for f64 {
    type Output = Jet;
    fn mul(self, j: Jet) -> Jet {
        j.scale(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() <= 1e-12 * (1.0 + b.abs())
    }

    #[test]
    fn product_and_quotient_match_closed_forms() {
        let x = Jet::var(0.7);
        let p = x * x * x;
        assert!(close(p.d1(), 3.0 * 0.49) && close(p.d2(), 6.0 * 0.7) && close(p.d3(), 6.0));
        let q = x.recip();
        assert!(close(q.d1(), -1.0 / 0.49));
        assert!(close(q.d3(), -6.0 / 0.7f64.powi(4)));
    }

    #[test]
    fn exp_of_affine_map() {
        let x = Jet::var(0.3);
        let e = (x * 2.0).exp();
        let v = (0.6f64).exp();
        assert!(close(e.d1(), 2.0 * v) && close(e.d2(), 4.0 * v) && close(e.d3(), 8.0 * v));
    }

    #[test]
    fn powi_matches_repeated_product() {
        let x = Jet::var(1.3) + Jet::new(0.0, 0.5, 0.2, -0.1);
        let a = x.powi(3);
        let b = x * x * x;
        for k in 0..4 {
            assert!(close(a.0[k], b.0[k]));
        }
        let z = x.powi(0);
        assert_eq!(z.0, [1.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn ln_inverts_exp() {
        let x = Jet::new(0.4, 1.1, -0.3, 0.7);
        let y = x.exp().ln();
        for k in 0..4 {
            assert!(close(y.0[k], x.0[k]));
        }
    }
}

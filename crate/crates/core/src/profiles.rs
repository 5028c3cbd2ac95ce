//! Closed-form profile data: the Burgers traveling wave `Q` and the
//! quantities derived from it, the cutoff family, zone geometry and the
//! exterior barrier functions.

use crate::error::{invalid, Result};
use crate::jet::Jet;

/// Logistic traveling wave `Q(ξ) = e^{ξ/2} / (1 + e^{ξ/2})`.
pub fn eval_q(xi: f64) -> f64 {
    if xi > 40.0 {
        let e = (-xi / 2.0).exp();
        1.0 - e / (1.0 + e)
    } else if xi < -40.0 {
        let e = (xi / 2.0).exp();
        e / (1.0 + e)
    } else if xi >= 0.0 {
        1.0 / (1.0 + (-xi / 2.0).exp())
    } else {
        let e = (xi / 2.0).exp();
        e / (1.0 + e)
    }
}

/// `W = ∂ξQ = (1/8) cosh⁻²(ξ/4)`.
pub fn eval_w(xi: f64) -> f64 {
    let c = (xi / 4.0).cosh();
    0.125 / (c * c)
}

/// Weight `ω₀ = (e^{ξ/4} + e^{−ξ/4})² = 1 / (2W)`.
pub fn eval_omega0(xi: f64) -> f64 {
    let c = 2.0 * (xi / 4.0).cosh();
    c * c
}

/// `log ω₀`, finite for all finite ξ.
pub fn log_omega0(xi: f64) -> f64 {
    let a = xi.abs() / 4.0;
    // 2 log(e^a + e^{-a}) = 2a + 2 log(1 + e^{-2a})
    2.0 * a + 2.0 * (-2.0 * a).exp().ln_1p()
}

/// `B₀(ξ) = ξ/4 − log((1 + e^{ξ/2})/2)`, the primitive of `b₀ = 1/4 − Q/2`.
pub fn eval_b0(xi: f64) -> f64 {
    let ln2 = std::f64::consts::LN_2;
    if xi > 0.0 {
        -xi / 4.0 - (-xi / 2.0).exp().ln_1p() + ln2
    } else {
        xi / 4.0 - (xi / 2.0).exp().ln_1p() + ln2
    }
}

/// `b₀ = 1/4 − Q/2`.
pub fn eval_b0_prime(xi: f64) -> f64 {
    0.25 - 0.5 * eval_q(xi)
}

/// Potential of the conjugated operator, `V = Q/(2(1 + e^{ξ/2})) − 1/16`.
pub fn eval_v(xi: f64) -> f64 {
    // Q/(1 + e^{ξ/2}) = Q(1 − Q)
    let q = eval_q(xi);
    0.5 * q * (1.0 - q) - 0.0625
}

/// Ground state `ψ₀ = e^{−B₀} W = 1/(8 cosh(ξ/4))` of `∂ξ² + V`.
pub fn eval_psi0(xi: f64) -> f64 {
    0.125 / (xi / 4.0).cosh()
}

/// `(Q, Q', Q'', Q''', Q'''')` at ξ, from `Q' = Q(1−Q)/2`.
pub fn q_derivs(xi: f64) -> [f64; 5] {
    let q = eval_q(xi);
    let h = 0.5 - q;
    let q1 = eval_w(xi);
    let q2 = q1 * h;
    let q3 = q2 * h - q1 * q1;
    let q4 = q3 * h - 3.0 * q1 * q2;
    [q, q1, q2, q3, q4]
}

/// `Q` composed with a jet argument.
pub fn q_jet(xi: Jet) -> Jet {
    let d = q_derivs(xi.v());
    xi.compose([d[0], d[1], d[2], d[3]])
}

/// `W = Q'` composed with a jet argument.
pub fn w_jet(xi: Jet) -> Jet {
    let d = q_derivs(xi.v());
    xi.compose([d[1], d[2], d[3], d[4]])
}

// ---------------------------------------------------------------------------
// Cutoffs

fn bump_tail(y: f64) -> [f64; 4] {
    // f(y) = e^{-1/y} on y > 0, 0 otherwise
    if y <= 0.0 {
        return [0.0; 4];
    }
    let f = (-1.0 / y).exp();
    let u = 1.0 / y;
    [
        f,
        f * u * u,
        f * (u.powi(4) - 2.0 * u.powi(3)),
        f * (u.powi(6) - 6.0 * u.powi(5) + 6.0 * u.powi(4)),
    ]
}

/// Smooth step: 0 for y ≤ 0, 1 for y ≥ 1, with derivatives.
pub fn smoothstep(y: f64) -> [f64; 4] {
    if y <= 0.0 {
        return [0.0; 4];
    }
    if y >= 1.0 {
        return [1.0, 0.0, 0.0, 0.0];
    }
    let a = Jet(bump_tail(y));
    let b = Jet(bump_tail(1.0 - y));
    let b = Jet([b.0[0], -b.0[1], b.0[2], -b.0[3]]);
    (a / (a + b)).0
}

fn step_of(arg: Jet) -> Jet {
    arg.compose(smoothstep(arg.v()))
}

/// Plateau cutoff: 1 on |x| ≤ 1, 0 on |x| ≥ 2.
pub fn chi0(x: Jet) -> Jet {
    if x.v() >= 0.0 {
        step_of(2.0 - x)
    } else {
        step_of(x + 2.0)
    }
}

/// One-sided cutoff: 1 for ξ ≤ 0, 0 for ξ ≥ 1.
pub fn chi1(xi: Jet) -> Jet {
    step_of(1.0 - xi)
}

/// `χ_{A,a}(ξ) = χ₀((ξ − a)/A)`; `χ_A = χ_{A,0}`.
pub fn chi_a(xi: Jet, a_scale: f64, shift: f64) -> Jet {
    chi0((xi - shift) / a_scale)
}

/// Profile truncation: 0 on [0, ζ₀], 1 on [2ζ₀, ∞).
pub fn chi_bar(zeta: Jet, zeta0: f64) -> Jet {
    step_of((zeta - zeta0) / zeta0)
}

/// Barrier localizer: 1 on |ζ−1| ≤ η, 0 on |ζ−1| ≥ 2η.
pub fn chi_hat(zeta: Jet, eta: f64) -> Jet {
    chi0((zeta - 1.0) / eta)
}

/// Inner-zone localizer `χ₁(ξ − ξ_{A,+}) χ₁(ξ_{A,−} − ξ)`.
pub fn chi_in(xi: Jet, scales: &GeometryScales) -> Jet {
    chi1(xi - scales.xi_a_plus()) * chi1(scales.xi_a_minus() - xi)
}

/// Localized profile `Q̄(ξ) = Q(ξ) χ̄(1 + νξ)`.
pub fn q_bar(xi: Jet, nu: f64, zeta0: f64) -> Jet {
    q_jet(xi) * chi_bar(1.0 + xi * nu, zeta0)
}

// ---------------------------------------------------------------------------
// Zone geometry

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GeometryScales {
    pub nu: f64,
    pub lambda: f64,
    pub a: f64,
    pub zeta0: f64,
    pub eta: f64,
}

impl GeometryScales {
    /// Scales for unit radius, so `λ = ν`.
    pub fn new(nu: f64, a: f64, zeta0: f64, eta: f64) -> Result<Self> {
        if !(nu > 0.0 && nu < 1.0) {
            return Err(invalid("nu", format!("{nu} is outside (0, 1)")));
        }
        if !(a > 0.0) {
            return Err(invalid("A", format!("{a} must be positive")));
        }
        if !(zeta0 > 0.0 && zeta0 < 0.5) {
            return Err(invalid("zeta0", format!("{zeta0} is outside (0, 1/2)")));
        }
        if !(eta > 0.0 && eta < 0.5) {
            return Err(invalid("eta", format!("{eta} is outside (0, 1/2)")));
        }
        Ok(Self { nu, lambda: nu, a, zeta0, eta })
    }

    pub fn with_radius(mut self, r: f64) -> Self {
        self.lambda = r * self.nu;
        self
    }

    /// `|log ν|`.
    pub fn log_nu(&self) -> f64 {
        -self.nu.ln()
    }
    pub fn xi_plus(&self) -> f64 {
        4.0 * self.log_nu()
    }
    pub fn xi_minus(&self) -> f64 {
        -self.xi_plus()
    }
    pub fn xi_a_plus(&self) -> f64 {
        4.0 * self.log_nu() + self.a
    }
    pub fn xi_a_minus(&self) -> f64 {
        -self.xi_a_plus()
    }
    pub fn zeta_plus(&self) -> f64 {
        1.0 + self.nu * self.xi_plus()
    }
    pub fn zeta_minus(&self) -> f64 {
        1.0 + self.nu * self.xi_minus()
    }
    pub fn zeta_a_plus(&self) -> f64 {
        1.0 + self.nu * self.xi_a_plus()
    }
    pub fn zeta_a_minus(&self) -> f64 {
        1.0 + self.nu * self.xi_a_minus()
    }
    pub fn xi_of(&self, zeta: f64) -> f64 {
        (zeta - 1.0) / self.nu
    }
    pub fn zeta_of(&self, xi: f64) -> f64 {
        1.0 + self.nu * xi
    }
}

// ---------------------------------------------------------------------------
// Barriers

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Right,
    Left,
}

/// Exterior barrier constants.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BarrierParams {
    pub d: u32,
    pub k: f64,
    pub kappa: f64,
    /// Decay exponent of φ₁, in (1/4, 1/2).
    pub exponent: f64,
}

impl BarrierParams {
    pub fn new(d: u32, k: f64, kappa: f64) -> Self {
        Self { d, k, kappa, exponent: 0.375 }
    }
}

/// `(φ₁, φ₂)` as jets in ζ.
pub fn barrier_jets(zeta: f64, tau: f64, scales: &GeometryScales, p: &BarrierParams, side: Side) -> (Jet, Jet) {
    let nu = scales.nu;
    let z = Jet::var(zeta);
    let decay = (-p.kappa * tau).exp();
    let pref = 0.5 * p.k.powf(1.25) * decay;
    let zd = z.powi(p.d as i32 - 1);
    match side {
        Side::Right => {
            let phi1 = ((z - scales.zeta_plus()) * (-p.exponent / nu)).exp() * pref;
            (phi1, zd * (0.5 * decay))
        }
        Side::Left => {
            let phi1 = ((scales.zeta_minus() - z) * (-p.exponent / nu)).exp() * pref;
            (phi1, zd * (0.5 * nu * decay))
        }
    }
}

pub fn eval_barriers(
    zeta: f64,
    tau: f64,
    scales: &GeometryScales,
    p: &BarrierParams,
    side: Side,
) -> Result<(f64, f64)> {
    if !(scales.nu > 0.0) {
        return Err(invalid("nu", "must be positive"));
    }
    if !(zeta > 0.0) {
        return Err(invalid("zeta", "must be positive"));
    }
    let (a, b) = barrier_jets(zeta, tau, scales, p, side);
    Ok((a.v(), b.v()))
}

/// One-sided limits at ζ = 1 of the inviscid flux speed `m ζ^{1−d} − ζ/2`
/// for the step `m = 𝟙_{ζ≥1}`.
pub fn rankine_hugoniot_limits(d: u32) -> (f64, f64) {
    let zeta = 1.0f64;
    let speed = |m: f64| m * zeta.powi(1 - d as i32) - zeta / 2.0;
    (speed(1.0), speed(0.0))
}

/// Mean of the one-sided speeds; zero means the shock at ζ = 1 is steady.
pub fn rankine_hugoniot_check(d: u32) -> f64 {
    let (right, left) = rankine_hugoniot_limits(d);
    0.5 * (right + left)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn q_values() {
        assert_eq!(eval_q(0.0), 0.5);
        assert!((eval_q(2.0) + eval_q(-2.0) - 1.0).abs() < 1e-15);
        let e2 = 2f64.exp();
        assert!((eval_q(4.0) - 0.880_797_077_977_882_3).abs() < 1e-15);
        assert!((eval_q(4.0) - e2 / (1.0 + e2)).abs() < 1e-15);
        assert!(eval_q(800.0) == 1.0 && eval_q(-800.0) >= 0.0);
    }

    #[test]
    fn w_omega_identities() {
        assert_eq!(eval_w(0.0), 0.125);
        let q3 = eval_q(3.0);
        assert!((eval_w(3.0) - q3 * (1.0 - q3) / 2.0).abs() < 1e-15);
        assert_eq!(eval_w(10.0), eval_w(-10.0));
        assert_eq!(eval_omega0(0.0), 4.0);
        assert!((eval_omega0(5.0) * 2.0 * eval_w(5.0) - 1.0).abs() < 1e-14);
        assert!((eval_omega0(40.0) * (-20.0f64).exp() - 1.0).abs() < 1e-8);
        assert!((log_omega0(7.0) - eval_omega0(7.0).ln()).abs() < 1e-13);
    }

    #[test]
    fn b0_v_psi0() {
        assert_eq!(eval_b0(0.0), 0.0);
        assert!((eval_v(0.0) - 0.0625).abs() < 1e-16);
        assert!((eval_v(30.0) + 0.0625).abs() < 1e-6);
        assert!((eval_v(-30.0) + 0.0625).abs() < 1e-6);
        assert_eq!(eval_psi0(0.0), 0.125);
        assert_eq!(eval_psi0(6.0), eval_psi0(-6.0));
        for xi in [-3.0, 0.5, 9.0] {
            let lhs = (-eval_b0(xi)).exp() * eval_w(xi);
            assert!((lhs - eval_psi0(xi)).abs() < 1e-15);
        }
    }

    #[test]
    fn psi0_is_in_the_kernel() {
        let h = 1e-3;
        for xi in [-2.0, 0.0, 2.0] {
            let d2 = (eval_psi0(xi + h) - 2.0 * eval_psi0(xi) + eval_psi0(xi - h)) / (h * h);
            assert!((d2 + eval_v(xi) * eval_psi0(xi)).abs() <= 1e-6);
        }
    }

    #[test]
    fn cutoff_plateaus() {
        for x in [-1.0, -0.3, 0.0, 0.9, 1.0] {
            assert_eq!(chi0(Jet::var(x)).v(), 1.0);
        }
        for x in [-2.0, 2.0, 3.5, -7.0] {
            assert_eq!(chi0(Jet::var(x)).v(), 0.0);
        }
        assert_eq!(chi1(Jet::var(-0.1)).v(), 1.0);
        assert_eq!(chi1(Jet::var(1.0)).v(), 0.0);
        assert_eq!(chi_bar(Jet::var(0.2), 0.25).v(), 0.0);
        assert_eq!(chi_bar(Jet::var(0.5), 0.25).v(), 1.0);
        assert_eq!(chi_hat(Jet::var(1.04), 0.05).v(), 1.0);
        assert_eq!(chi_hat(Jet::var(0.9), 0.05).v(), 0.0);
    }

    #[test]
    fn smoothstep_derivatives_match_differences() {
        let h = 1e-5;
        for y in [0.1, 0.35, 0.5, 0.77] {
            let s = smoothstep(y);
            for k in 0..3 {
                let fd = (smoothstep(y + h)[k] - smoothstep(y - h)[k]) / (2.0 * h);
                assert!((fd - s[k + 1]).abs() < 1e-5 * (1.0 + s[k + 1].abs()), "k={k} y={y}");
            }
        }
        assert!((smoothstep(0.5)[0] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn geometry_identities() {
        let s = GeometryScales::new(2f64.powi(-10), 10.0, 0.25, 0.05).unwrap();
        assert!(((s.zeta_a_plus() - 1.0) / s.nu - s.xi_a_plus()).abs() < 1e-11);
        assert!(((s.zeta_a_minus() - 1.0) / s.nu - s.xi_a_minus()).abs() < 1e-11);
        assert!(GeometryScales::new(1.0, 10.0, 0.25, 0.05).is_err());
        assert!(GeometryScales::new(0.0, 10.0, 0.25, 0.05).is_err());
    }

    #[test]
    fn barrier_examples() {
        let nu = 1e-3;
        let s = GeometryScales::new(nu, 10.0, 0.25, 0.05).unwrap();
        let p = BarrierParams::new(3, 1.0, 0.01);
        let (a, _) = eval_barriers(s.zeta_plus(), 0.0, &s, &p, Side::Right).unwrap();
        assert!((a - 0.5).abs() < 1e-15);
        let (_, b) = eval_barriers(1.0, 0.0, &s, &p, Side::Right).unwrap();
        assert_eq!(b, 0.5);
        let (a, _) = eval_barriers(s.zeta_plus() + nu, 0.0, &s, &p, Side::Right).unwrap();
        assert!((a - 0.5 * (-0.375f64).exp()).abs() < 1e-12);
        assert!((a - 0.3436).abs() < 1e-4);
        let (_, b) = eval_barriers(1.0, 0.0, &s, &p, Side::Left).unwrap();
        assert!((b - 0.5 * nu).abs() < 1e-18);
        assert!(eval_barriers(-1.0, 0.0, &s, &p, Side::Right).is_err());
    }

    #[test]
    fn rankine_hugoniot_is_exact() {
        for d in 3..=6 {
            assert_eq!(rankine_hugoniot_check(d), 0.0);
            assert_eq!(rankine_hugoniot_limits(d).0, 0.5);
        }
    }
}

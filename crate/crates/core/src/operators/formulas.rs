//! Pointwise right-hand sides of the inner (ξ) and outer (ζ) formulations.
//!
//! Inputs are jets in the respective variable. Outputs carry a valid value
//! and first derivative whenever the unknown is given to third order.

use crate::jet::Jet;
use crate::profiles::{q_jet, smoothstep, w_jet};

/// Frame data shared by the formulas: dimension, width ratio ν and the
/// truncation radius ζ₀ of the localized profile.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FrameParams {
    pub d: u32,
    pub nu: f64,
    pub zeta0: f64,
}

/// Inner-clock rates: `a = R_τ/R + 1/2`, `b = M_s/M`.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct Rates {
    pub a: f64,
    pub b: f64,
}

/// Outer-clock rates: `a = R_τ/R + 1/2`, `c = M_τ/M`.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct OuterRates {
    pub a: f64,
    pub c: f64,
}

impl Rates {
    /// `M_τ/M = (M_s/M)/ν`.
    pub fn outer(&self, nu: f64) -> OuterRates {
        OuterRates { a: self.a, c: if self.b == 0.0 { 0.0 } else { self.b / nu } }
    }
}

impl OuterRates {
    pub fn inner(&self, nu: f64) -> Rates {
        Rates { a: self.a, b: self.c * nu }
    }
}

impl FrameParams {
    fn dm1(&self) -> f64 {
        self.d as f64 - 1.0
    }

    /// `ν_τ/ν = −(d−2)/2 + (d−2)a − M_τ/M`.
    pub fn nu_tau_over_nu(&self, r: OuterRates) -> f64 {
        let dm2 = self.d as f64 - 2.0;
        -dm2 / 2.0 + dm2 * r.a - r.c
    }

    /// `ν_s = ν²(−(d−2)/2 + (d−2)a) − ν b`.
    pub fn nu_s(&self, r: Rates) -> f64 {
        let dm2 = self.d as f64 - 2.0;
        self.nu * self.nu * (-dm2 / 2.0 + dm2 * r.a) - self.nu * r.b
    }
}

/// χ̄ and its first two ζ-derivatives, as jets in whatever variable `zeta` is a jet of.
fn chi_bar_family(zeta: Jet, zeta0: f64) -> (Jet, Jet, Jet) {
    let y = (zeta.v() - zeta0) / zeta0;
    let s = smoothstep(y);
    let c = [s[0], s[1] / zeta0, s[2] / (zeta0 * zeta0), s[3] / zeta0.powi(3)];
    (zeta.compose(c), zeta.compose([c[1], c[2], c[3], 0.0]), zeta.compose([c[2], c[3], 0.0, 0.0]))
}

fn inv_pow(z: Jet, k: u32) -> Jet {
    z.powi(-(k as i32))
}

// ---------------------------------------------------------------------------
// Inner variable ξ

/// `Q̄(ξ) = Q(ξ) χ̄(1 + νξ)` as a jet in ξ.
pub fn q_bar_xi(xi: f64, p: &FrameParams) -> Jet {
    let x = Jet::var(xi);
    let (cb, _, _) = chi_bar_family(1.0 + x * p.nu, p.zeta0);
    q_jet(x) * cb
}

/// `𝓛₀ m = m'' − (1/2 − Q) m' + Q' m`.
pub fn l0_apply(xi: f64, m: Jet) -> Jet {
    let x = Jet::var(xi);
    let q = q_jet(x);
    let dm = m.deriv();
    dm.deriv() - (0.5 - q) * dm + w_jet(x) * m
}

/// The lower-order linear term `L(m_q)`.
pub fn l_term(xi: f64, m: Jet, p: &FrameParams, r: Rates) -> Jet {
    let x = Jet::var(xi);
    let nu = p.nu;
    let dm1 = p.dm1();
    let one_nx = 1.0 + x * nu;
    let geo = inv_pow(one_nx, p.d - 1) - 1.0;
    let q = q_jet(x);
    let qb = q_bar_xi(xi, p);
    let diff = qb - q;
    let dm = m.deriv();
    (x * 0.5 + one_nx.recip()) * dm * (-dm1 * nu)
        + (1.0 + x * (dm1 * nu)) * dm * r.a
        - (m + x * dm) * r.b
        + geo * qb * dm
        + geo * m * qb.deriv()
        + diff.deriv() * m
        + diff * dm
}

fn psi_common(xi: f64, p: &FrameParams, r: Rates, duplicate: bool) -> Jet {
    let x = Jet::var(xi);
    let nu = p.nu;
    let dm1 = p.dm1();
    let one_nx = 1.0 + x * nu;
    let (cb, cbz, cbzz) = chi_bar_family(one_nx, p.zeta0);
    let q = q_jet(x);
    let qp = w_jet(x);
    let qb = q * cb;
    let qbp = qb.deriv();
    let geo = inv_pow(one_nx, p.d - 1) - 1.0;
    let mut psi = (1.0 + x * (dm1 * nu)) * qbp * r.a - (qb + x * qbp) * r.b
        - (x * 0.5 + one_nx.recip()) * qbp * (dm1 * nu)
        + geo * qb * qbp
        + cbz * (qp * 2.0 - q * 0.5 + q * q * cb) * nu
        + cbzz * q * (nu * nu)
        + q * qp * cb * (cb - 1.0)
        - x * cbz * q * p.nu_s(r);
    if duplicate {
        psi = psi - one_nx.recip() * qbp * (dm1 * nu);
    }
    psi
}

/// Generated error Ψ of the m_q equation (consistent form).
pub fn psi(xi: f64, p: &FrameParams, r: Rates) -> Jet {
    psi_common(xi, p, r, false)
}

/// Ψ with the term `−ν(d−1)/(1+νξ) ∂ξQ̄` counted twice, as it is printed in
/// the reference derivation. Kept to quantify the mismatch.
pub fn psi_printed(xi: f64, p: &FrameParams, r: Rates) -> Jet {
    psi_common(xi, p, r, true)
}

/// `∂s Q̄` at fixed ξ, from the ν-dependence of the truncation.
pub fn q_bar_s(xi: f64, p: &FrameParams, r: Rates) -> Jet {
    let x = Jet::var(xi);
    let (_, cbz, _) = chi_bar_family(1.0 + x * p.nu, p.zeta0);
    q_jet(x) * cbz * x * p.nu_s(r)
}

/// Right side of the m_v equation.
pub fn vxis_rhs(xi: f64, m: Jet, p: &FrameParams, r: Rates) -> Jet {
    let x = Jet::var(xi);
    let nu = p.nu;
    let dm1 = p.dm1();
    let one_nx = 1.0 + x * nu;
    let dm = m.deriv();
    let geo = inv_pow(one_nx, p.d - 1) - 1.0;
    dm.deriv() + m * dm - dm * 0.5 + dm * r.a - m * r.b + geo * m * dm
        - one_nx.recip() * dm * (nu * dm1)
        + x * dm * (dm1 * nu * r.a - dm1 * nu / 2.0 - r.b)
}

/// Right side of the m_q equation: `𝓛₀m + L(m) + m m'/(1+νξ)^{d−1} + Ψ`.
pub fn mqxis_rhs(xi: f64, m: Jet, p: &FrameParams, r: Rates) -> Jet {
    let x = Jet::var(xi);
    let one_nx = 1.0 + x * p.nu;
    l0_apply(xi, m) + l_term(xi, m, p, r) + m * m.deriv() * inv_pow(one_nx, p.d - 1) + psi(xi, p, r)
}

// ---------------------------------------------------------------------------
// Outer variable ζ

fn xi_of(z: Jet, nu: f64) -> Jet {
    (z - 1.0) / nu
}

/// `Q_ν(ζ) = Q((ζ−1)/ν)` as a jet in ζ.
pub fn q_nu(zeta: f64, nu: f64) -> Jet {
    q_jet(xi_of(Jet::var(zeta), nu))
}

/// `Q̄_ν = Q_ν χ̄` as a jet in ζ.
pub fn q_bar_nu(zeta: f64, p: &FrameParams) -> Jet {
    let z = Jet::var(zeta);
    q_nu(zeta, p.nu) * chi_bar_family(z, p.zeta0).0
}

/// `∂τ Q_ν = −Q'(ξ) ξ ν_τ/ν`, as a jet in ζ.
pub fn q_nu_tau(zeta: f64, p: &FrameParams, r: OuterRates) -> Jet {
    let x = xi_of(Jet::var(zeta), p.nu);
    -(w_jet(x) * x) * p.nu_tau_over_nu(r)
}

pub fn q_bar_nu_tau(zeta: f64, p: &FrameParams, r: OuterRates) -> Jet {
    q_nu_tau(zeta, p, r) * chi_bar_family(Jet::var(zeta), p.zeta0).0
}

/// Right side of the renormalized partial-mass equation for m_w.
pub fn phisfrsft_rhs(zeta: f64, m: Jet, p: &FrameParams, r: OuterRates) -> Jet {
    let z = Jet::var(zeta);
    let dm1 = p.dm1();
    let dm = m.deriv();
    let zpow = inv_pow(z, p.d - 1);
    (m * zpow - z * 0.5 + z * r.a) * dm + (dm.deriv() - z.recip() * dm * dm1) * p.nu - m * r.c
}

/// Generated error `m_E` of the m_ε equation.
pub fn m_e(zeta: f64, p: &FrameParams, r: OuterRates) -> Jet {
    phisfrsft_rhs(zeta, q_bar_nu(zeta, p), p, r) - q_bar_nu_tau(zeta, p, r)
}

/// Right side of the m_ε equation (full, with `m_E`).
pub fn mep0_rhs(zeta: f64, m: Jet, p: &FrameParams, r: OuterRates) -> Jet {
    let z = Jet::var(zeta);
    let dm1 = p.dm1();
    let qb = q_bar_nu(zeta, p);
    let dm = m.deriv();
    let zpow = inv_pow(z, p.d - 1);
    (qb * m).deriv() * zpow - z * dm * 0.5 + (dm.deriv() - z.recip() * dm * dm1) * p.nu + m * dm * zpow
        + z * dm * r.a
        - m * r.c
        + m_e(zeta, p, r)
}

/// Error term E for a given profile jet and its τ-derivative.
pub fn e_with_profile(zeta: f64, prof: Jet, prof_tau: Jet, p: &FrameParams, r: OuterRates) -> Jet {
    let z = Jet::var(zeta);
    let dm1 = p.dm1();
    let bracket = prof * (inv_pow(z, p.d - 1) - 1.0) - (z - 1.0) * 0.5 - z.recip() * (p.nu * dm1) + z * r.a;
    -prof_tau - prof * r.c + bracket * prof.deriv()
}

/// E on the right exterior zone, built on the untruncated `Q_ν`.
pub fn e_right(zeta: f64, p: &FrameParams, r: OuterRates) -> Jet {
    e_with_profile(zeta, q_nu(zeta, p.nu), q_nu_tau(zeta, p, r), p, r)
}

/// E on the left exterior zone; equals `m_E` for every ζ.
pub fn e_left(zeta: f64, p: &FrameParams, r: OuterRates) -> Jet {
    m_e(zeta, p, r)
}

/// `(P₁, P₀)` on the right zone.
pub fn p_right(zeta: f64, m: Jet, p: &FrameParams, r: OuterRates) -> (Jet, Jet) {
    let z = Jet::var(zeta);
    let q = q_nu(zeta, p.nu);
    let zpow = inv_pow(z, p.d - 1);
    let p1 = (q - 1.0) * zpow - z.recip() * (p.nu * p.dm1()) + m * zpow + z * r.a;
    let p0 = q.deriv() * zpow - r.c;
    (p1, p0)
}

/// `(P₁⁻, P₀⁻)` on the left zone.
pub fn p_left(zeta: f64, m: Jet, p: &FrameParams, r: OuterRates) -> (Jet, Jet) {
    let z = Jet::var(zeta);
    let qb = q_bar_nu(zeta, p);
    let zpow = inv_pow(z, p.d - 1);
    let p1 = qb * zpow + m * zpow + z * r.a;
    let p0 = qb.deriv() * zpow - r.c;
    (p1, p0)
}

/// `𝒜 m = (ζ^{1−d} − ζ/2) m' + ν m''`.
pub fn a_right(zeta: f64, m: Jet, p: &FrameParams) -> Jet {
    let z = Jet::var(zeta);
    let dm = m.deriv();
    (inv_pow(z, p.d - 1) - z * 0.5) * dm + dm.deriv() * p.nu
}

/// `𝒜⁻ m = −(ζ/2) m' + ν(m'' − (d−1)/ζ m')`.
pub fn a_left(zeta: f64, m: Jet, p: &FrameParams) -> Jet {
    let z = Jet::var(zeta);
    let dm = m.deriv();
    -(z * dm * 0.5) + (dm.deriv() - z.recip() * dm * p.dm1()) * p.nu
}

/// `𝒜₁ w = −((d−1)/ζ^d + 1/2) w + (ζ^{1−d} − ζ/2) w' + ν w''`.
pub fn a1_right(zeta: f64, w: Jet, p: &FrameParams) -> Jet {
    let z = Jet::var(zeta);
    let dw = w.deriv();
    -(inv_pow(z, p.d) * p.dm1() + 0.5) * w + (inv_pow(z, p.d - 1) - z * 0.5) * dw + dw.deriv() * p.nu
}

/// `𝒜₁⁻ w = −(ζ/2) w' − w/2 + ν(w'' − (d−1)/ζ w' + (d−1)/ζ² w)`.
pub fn a1_left(zeta: f64, w: Jet, p: &FrameParams) -> Jet {
    let z = Jet::var(zeta);
    let dw = w.deriv();
    let dm1 = p.dm1();
    -(z * dw * 0.5) - w * 0.5 + (dw.deriv() - z.recip() * dw * dm1 + z.powi(-2) * w * dm1) * p.nu
}

/// Right side of the linear-form m_ε equation on the right zone.
pub fn mep_rhs(zeta: f64, m: Jet, p: &FrameParams, r: OuterRates) -> Jet {
    let (p1, p0) = p_right(zeta, m, p, r);
    a_right(zeta, m, p) + p1 * m.deriv() + p0 * m + e_right(zeta, p, r)
}

/// Right side of the linear-form m_ε equation on the left zone.
pub fn mep_left_rhs(zeta: f64, m: Jet, p: &FrameParams, r: OuterRates) -> Jet {
    let (p1, p0) = p_left(zeta, m, p, r);
    a_left(zeta, m, p) + p1 * m.deriv() + p0 * m + e_left(zeta, p, r)
}

/// Source term `F = ∂ζE + ∂ζP₀ m_ε` (right zone).
pub fn f_right(zeta: f64, m: Jet, p: &FrameParams, r: OuterRates) -> f64 {
    let (_, p0) = p_right(zeta, m, p, r);
    e_right(zeta, p, r).d1() + p0.d1() * m.v()
}

pub fn f_left(zeta: f64, m: Jet, p: &FrameParams, r: OuterRates) -> f64 {
    let (_, p0) = p_left(zeta, m, p, r);
    e_left(zeta, p, r).d1() + p0.d1() * m.v()
}

/// Right side of the derivative equation `∂τ m_{ε,1} = 𝒜₁ w + 𝒫₁ w + F`, value only.
pub fn mep1_rhs(zeta: f64, m: Jet, p: &FrameParams, r: OuterRates) -> f64 {
    let w = m.deriv();
    let (p1, p0) = p_right(zeta, m, p, r);
    let pc1 = p1.v() * w.d1() + (p1.d1() + p0.v()) * w.v();
    a1_right(zeta, w, p).v() + pc1 + f_right(zeta, m, p, r)
}

pub fn mep1_left_rhs(zeta: f64, m: Jet, p: &FrameParams, r: OuterRates) -> f64 {
    let w = m.deriv();
    let (p1, p0) = p_left(zeta, m, p, r);
    let pc1 = p1.v() * w.d1() + (p1.d1() + p0.v()) * w.v();
    a1_left(zeta, w, p).v() + pc1 + f_left(zeta, m, p, r)
}

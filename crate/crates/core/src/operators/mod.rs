//! Discretized operators of the inner and exterior analysis and grid-level
//! evaluation of the residual terms.

pub mod formulas;
pub mod kernels;

pub use formulas::{FrameParams, OuterRates, Rates};
pub use kernels::{cole_hopf_propagate, heat_kernel, heat_kernel_convolve, semigroup_l0};

use crate::banded::{BandedOperator, OperatorKind};
use crate::error::{Error, Result};
use crate::grid::{fd_jets, WeightedGrid};
use crate::profiles::{eval_b0, eval_v, eval_w, log_omega0, Side};

/// `𝓛₀ = ∂ξ² − (1/2 − Q)∂ξ + Q'` in the flux form `ω₀⁻¹∂ξ(ω₀∂ξ) + Q'`, with
/// ω₀ sampled at cell midpoints. Exactly self-adjoint for the grid's ω₀ weights.
pub fn assemble_l0(grid: &WeightedGrid) -> Result<BandedOperator> {
    let n = grid.len();
    if n < 3 {
        return Err(Error::DegenerateGrid("need at least 3 nodes".into()));
    }
    let x = &grid.nodes;
    let h = &grid.spacing;
    let mut op = BandedOperator::zeros(n, OperatorKind::L0);
    for i in 1..n - 1 {
        let lw = log_omega0(x[i]);
        let wm = (log_omega0(0.5 * (x[i - 1] + x[i])) - lw).exp();
        let wp = (log_omega0(0.5 * (x[i] + x[i + 1])) - lw).exp();
        let span = h[i - 1] + h[i];
        let cm = 2.0 * wm / (h[i - 1] * span);
        let cp = 2.0 * wp / (h[i] * span);
        op.sub[i] = cm;
        op.sup[i] = cp;
        op.diag[i] = -cm - cp + eval_w(x[i]);
    }
    Ok(op)
}

/// `𝓜₀ = ∂ξ² + V` by the symmetric three-point stencil (uniform grids only).
pub fn assemble_m0(grid: &WeightedGrid) -> Result<BandedOperator> {
    assemble_m0_with(grid, eval_v)
}

/// `∂ξ² + V` for a caller-supplied potential.
pub fn assemble_m0_with(grid: &WeightedGrid, v: impl Fn(f64) -> f64) -> Result<BandedOperator> {
    let n = grid.len();
    if n < 3 {
        return Err(Error::DegenerateGrid("need at least 3 nodes".into()));
    }
    if !grid.is_uniform() {
        return Err(Error::DegenerateGrid("M0 assembly needs a uniform grid".into()));
    }
    let h = grid.spacing[0];
    let c = 1.0 / (h * h);
    let mut op = BandedOperator::zeros(n, OperatorKind::M0);
    for i in 1..n - 1 {
        op.sub[i] = c;
        op.sup[i] = c;
        op.diag[i] = -2.0 * c + v(grid.nodes[i]);
    }
    Ok(op)
}

fn check_support(f: &[f64]) -> Result<()> {
    let scale = f.iter().fold(0.0f64, |a, b| a.max(b.abs()));
    let n = f.len();
    let edge = [f[0], f[1], f[n - 2], f[n - 1]];
    if scale > 0.0 && edge.iter().any(|v| v.abs() > 1e-13 * scale) {
        return Err(Error::SupportTouchesBoundary);
    }
    Ok(())
}

/// `‖𝓛₀f − e^{B₀}𝓜₀(e^{−B₀}f)‖ / ‖f‖` over interior nodes (discrete L²).
pub fn conjugation_check(grid: &WeightedGrid, f: &[f64]) -> Result<f64> {
    check_support(f)?;
    let l0 = assemble_l0(grid)?;
    let m0 = assemble_m0(grid)?;
    let g: Vec<f64> = grid.nodes.iter().zip(f).map(|(x, v)| (-eval_b0(*x)).exp() * v).collect();
    let lf = l0.apply(f);
    let mg = m0.apply(&g);
    let n = f.len();
    let mut num = 0.0;
    let mut den = 0.0;
    for i in 1..n - 1 {
        let r = lf[i] - eval_b0(grid.nodes[i]).exp() * mg[i];
        num += grid.trap[i] * r * r;
        den += grid.trap[i] * f[i] * f[i];
    }
    if den == 0.0 {
        return Ok(0.0);
    }
    Ok((num / den).sqrt())
}

fn check_inner_grid(nodes: &[f64], nu: f64) -> Result<()> {
    if nu > 0.0 {
        if let Some(x) = nodes.iter().find(|x| 1.0 + nu * **x <= 0.0) {
            return Err(Error::GridPastOrigin { xi: *x, nu });
        }
    }
    Ok(())
}

/// `L(m_q)` at every node, derivatives of `m_q` by finite differences.
pub fn eval_l_term(nodes: &[f64], m_q: &[f64], p: &FrameParams, r: Rates) -> Result<Vec<f64>> {
    check_inner_grid(nodes, p.nu)?;
    let jets = fd_jets(nodes, m_q);
    Ok(nodes.iter().zip(jets).map(|(x, m)| formulas::l_term(*x, m, p, r).v()).collect())
}

/// Ψ at every node.
pub fn eval_psi(nodes: &[f64], p: &FrameParams, r: Rates) -> Result<Vec<f64>> {
    check_inner_grid(nodes, p.nu)?;
    Ok(nodes.iter().map(|x| formulas::psi(*x, p, r).v()).collect())
}

fn check_zeta(zetas: &[f64]) -> Result<()> {
    if let Some(z) = zetas.iter().find(|z| !(**z > 0.0)) {
        return Err(Error::InvalidParameter { name: "zeta", reason: format!("nonpositive node {z}") });
    }
    Ok(())
}

pub fn eval_m_e(zetas: &[f64], p: &FrameParams, r: OuterRates) -> Result<Vec<f64>> {
    check_zeta(zetas)?;
    Ok(zetas.iter().map(|z| formulas::m_e(*z, p, r).v()).collect())
}

pub fn eval_e(zetas: &[f64], p: &FrameParams, r: OuterRates, side: Side) -> Result<Vec<f64>> {
    check_zeta(zetas)?;
    Ok(zetas
        .iter()
        .map(|z| match side {
            Side::Right => formulas::e_right(*z, p, r).v(),
            Side::Left => formulas::e_left(*z, p, r).v(),
        })
        .collect())
}

pub fn eval_f(zetas: &[f64], m_eps: &[f64], p: &FrameParams, r: OuterRates, side: Side) -> Result<Vec<f64>> {
    check_zeta(zetas)?;
    let jets = fd_jets(zetas, m_eps);
    Ok(zetas
        .iter()
        .zip(jets)
        .map(|(z, m)| match side {
            Side::Right => formulas::f_right(*z, m, p, r),
            Side::Left => formulas::f_left(*z, m, p, r),
        })
        .collect())
}

/// Upwinded transport plus centered diffusion discretization of 𝒜₁ (right)
/// or 𝒜₁⁻ (left) on a ζ-grid.
pub fn assemble_a1(side: Side, zetas: &[f64], nu: f64, d: u32) -> Result<BandedOperator> {
    let n = zetas.len();
    if n < 3 {
        return Err(Error::DegenerateGrid("need at least 3 nodes".into()));
    }
    check_zeta(zetas)?;
    let dm1 = d as f64 - 1.0;
    let kind = match side {
        Side::Right => OperatorKind::A1Right,
        Side::Left => OperatorKind::A1Left,
    };
    let mut op = BandedOperator::zeros(n, kind);
    for i in 1..n - 1 {
        let z = zetas[i];
        let hm = z - zetas[i - 1];
        let hp = zetas[i + 1] - z;
        let span = hm + hp;
        let (zeroth, speed) = match side {
            Side::Right => (-(dm1 / z.powi(d as i32) + 0.5), z.powi(1 - d as i32) - z / 2.0),
            Side::Left => (-0.5, -z / 2.0),
        };
        op.diag[i] += zeroth;
        if speed > 0.0 {
            op.sup[i] += speed / hp;
            op.diag[i] -= speed / hp;
        } else {
            op.diag[i] += speed / hm;
            op.sub[i] -= speed / hm;
        }
        if nu != 0.0 {
            let cm = 2.0 / (hm * span);
            let cp = 2.0 / (hp * span);
            op.sub[i] += nu * cm;
            op.sup[i] += nu * cp;
            op.diag[i] -= nu * (cm + cp);
            if side == Side::Left {
                // centered first derivative and the (d−1)/ζ² term
                let a = -hp / (hm * span);
                let b = (hp - hm) / (hm * hp);
                let c = hm / (hp * span);
                let k = -nu * dm1 / z;
                op.sub[i] += k * a;
                op.diag[i] += k * b + nu * dm1 / (z * z);
                op.sup[i] += k * c;
            }
        }
    }
    Ok(op)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profiles::eval_psi0;

    #[test]
    fn l0_annihilates_profile_derivative() {
        let g = WeightedGrid::symmetric(60.0, 0.02).unwrap();
        let f = g.sample(eval_w);
        let r = assemble_l0(&g).unwrap().apply(&f);
        let worst = r[1..g.len() - 1].iter().fold(0.0f64, |a, b| a.max(b.abs()));
        assert!(worst <= 1e-6, "{worst}");
    }

    #[test]
    fn l0_of_constant_is_q_prime() {
        let g = WeightedGrid::symmetric(30.0, 0.05).unwrap();
        let r = assemble_l0(&g).unwrap().apply(&vec![1.0; g.len()]);
        for i in 1..g.len() - 1 {
            assert!((r[i] - eval_w(g.nodes[i])).abs() <= 1e-10);
        }
    }

    #[test]
    fn m0_examples() {
        let g = WeightedGrid::symmetric(60.0, 0.02).unwrap();
        let m0 = assemble_m0(&g).unwrap();
        assert_eq!(m0.symmetry_defect(), 0.0);
        let r = m0.apply(&g.sample(eval_psi0));
        let worst = r[1..g.len() - 1].iter().fold(0.0f64, |a, b| a.max(b.abs()));
        assert!(worst <= 1e-6);
        let mid = g.len() / 2;
        assert!(g.nodes[mid].abs() < 1e-12);
        let h = g.spacing[0];
        assert!((m0.diag[mid] + 2.0 / (h * h) - 0.0625).abs() < 1e-9);
    }

    #[test]
    fn conjugation_examples() {
        let g = WeightedGrid::symmetric(30.0, 0.01).unwrap();
        let bump = g.sample(|x| (-(x / 2.0).powi(2)).exp());
        assert!(conjugation_check(&g, &bump).unwrap() <= 1e-5);
        assert_eq!(conjugation_check(&g, &vec![0.0; g.len()]).unwrap(), 0.0);
        let mut k = g.sample(eval_w);
        let n = k.len();
        for v in [0, 1, n - 2, n - 1] {
            k[v] = 0.0;
        }
        assert!(conjugation_check(&g, &k).unwrap() <= 1e-5);
        let touching = g.sample(|_| 1.0);
        assert!(conjugation_check(&g, &touching).is_err());
    }

    #[test]
    fn l_term_examples() {
        let nodes: Vec<f64> = (0..=400).map(|i| -20.0 + 0.1 * i as f64).collect();
        let p0 = FrameParams { d: 3, nu: 0.0, zeta0: 0.25 };
        let m: Vec<f64> = nodes.iter().map(|x| (x * 0.3).sin()).collect();
        let l = eval_l_term(&nodes, &m, &p0, Rates::default()).unwrap();
        assert!(l.iter().all(|v| v.abs() < 1e-14));
        let zero = eval_l_term(&nodes, &vec![0.0; nodes.len()], &p0, Rates { a: 0.3, b: 0.2 }).unwrap();
        assert!(zero.iter().all(|v| *v == 0.0));
        // only b = 1, m_q = Q' (exact jets)
        for xi in [-3.0, 0.0, 1.5, 6.0] {
            let m = crate::profiles::w_jet(crate::jet::Jet::var(xi));
            let v = formulas::l_term(xi, m, &p0, Rates { a: 0.0, b: 1.0 }).v();
            let d = crate::profiles::q_derivs(xi);
            assert!((v + d[1] + xi * d[2]).abs() < 1e-8);
        }
        let bad = FrameParams { d: 3, nu: 0.1, zeta0: 0.25 };
        assert!(eval_l_term(&nodes, &m, &bad, Rates::default()).is_err());
    }

    #[test]
    fn psi_examples() {
        let p = FrameParams { d: 3, nu: 0.0, zeta0: 0.25 };
        let psi = eval_psi(&[-4.0, 0.0, 3.0], &p, Rates::default()).unwrap();
        assert!(psi.iter().all(|v| v.abs() < 1e-15));
        let psi = eval_psi(&[0.0], &p, Rates { a: 0.7, b: 0.0 }).unwrap();
        assert!((psi[0] - 0.7 / 8.0).abs() < 1e-15);
    }

    #[test]
    fn e_vanishes_for_indicator_off_the_shock() {
        let p = FrameParams { d: 3, nu: 0.0, zeta0: 0.25 };
        for z in [0.5, 0.9, 1.1, 2.0] {
            let prof = crate::jet::Jet::constant(if z >= 1.0 { 1.0 } else { 0.0 });
            let e = formulas::e_with_profile(z, prof, crate::jet::Jet::ZERO, &p, OuterRates::default());
            assert_eq!(e.v(), 0.0);
        }
    }

    #[test]
    fn a1_examples() {
        let zetas: Vec<f64> = (0..=200).map(|i| 0.5 + 0.001 * i as f64).collect();
        let op = assemble_a1(Side::Left, &zetas, 1e-3, 3).unwrap();
        let f: Vec<f64> = zetas.iter().map(|z| z * z).collect();
        let transport = assemble_a1(Side::Left, &zetas, 0.0, 3).unwrap().apply(&f);
        let full = op.apply(&f);
        for i in 1..zetas.len() - 1 {
            assert!((full[i] - transport[i]).abs() <= 1e-8);
        }
        let zr: Vec<f64> = (0..=100).map(|i| 0.95 + 0.001 * i as f64).collect();
        let op = assemble_a1(Side::Right, &zr, 1e-3, 3).unwrap();
        let one = op.apply(&vec![1.0; zr.len()]);
        let i1 = 50;
        assert!((zr[i1] - 1.0).abs() < 1e-12);
        assert!((one[i1] - (-2.0 - 0.5)).abs() < 1e-12);
        assert_eq!(assemble_a1(Side::Right, &zr, 0.0, 3).unwrap().stencil_width(), 2);
        assert!(assemble_a1(Side::Right, &[-0.1, 0.2, 0.3], 0.0, 3).is_err());
    }
}

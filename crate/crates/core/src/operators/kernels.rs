//! Heat kernel and the Cole-Hopf representation of `e^{s𝓛₀}`.

use crate::error::{invalid, Error, Result};
use crate::grid::WeightedGrid;
use crate::profiles::{eval_b0, eval_b0_prime};
use std::f64::consts::PI;

/// `K_s(ξ) = (4πs)^{−1/2} e^{−ξ²/4s}`.
pub fn heat_kernel(xi: f64, s: f64) -> f64 {
    (-xi * xi / (4.0 * s)).exp() / (4.0 * PI * s).sqrt()
}

/// `∂ξK_s`.
pub fn heat_kernel_dx(xi: f64, s: f64) -> f64 {
    -xi / (2.0 * s) * heat_kernel(xi, s)
}

fn uniform_step(grid: &WeightedGrid) -> Result<f64> {
    if !grid.is_uniform() {
        return Err(Error::DegenerateGrid("convolution needs a uniform grid".into()));
    }
    Ok(grid.spacing[0])
}

/// Trapezoid value of `∫K_s` over `±half_width` with step `h`.
pub fn heat_kernel_l1(s: f64, half_width: f64, h: f64) -> f64 {
    let n = (half_width / h).ceil() as i64;
    let hh = half_width / n as f64;
    (-n..=n)
        .map(|k| {
            let w = if k.abs() == n { 0.5 } else { 1.0 };
            w * hh * heat_kernel(k as f64 * hh, s)
        })
        .sum()
}

/// Trapezoid value of `∫|∂ξK_s|²` over `±half_width` with step `h`.
pub fn heat_kernel_grad_l2_sq(s: f64, half_width: f64, h: f64) -> f64 {
    let n = (half_width / h).ceil() as i64;
    let hh = half_width / n as f64;
    (-n..=n)
        .map(|k| {
            let w = if k.abs() == n { 0.5 } else { 1.0 };
            w * hh * heat_kernel_dx(k as f64 * hh, s).powi(2)
        })
        .sum()
}

/// Closed form `(√(2π)/(16π)) s^{−3/2}`.
pub fn heat_kernel_grad_l2_sq_exact(s: f64) -> f64 {
    (2.0 * PI).sqrt() / (16.0 * PI) * s.powf(-1.5)
}

/// Discrete convolution with `K_s` on a uniform grid; the stencil is
/// normalized to unit mass. Values outside the grid count as zero.
pub fn heat_kernel_convolve(grid: &WeightedGrid, f: &[f64], s: f64) -> Result<Vec<f64>> {
    if !(s > 0.0) {
        return Err(invalid("s", format!("{s} must be positive")));
    }
    let h = uniform_step(grid)?;
    let reach = ((12.0 * s.sqrt()) / h).ceil() as usize;
    let stencil: Vec<f64> = (0..=reach).map(|k| h * heat_kernel(k as f64 * h, s)).collect();
    let mass = stencil[0] + 2.0 * stencil[1..].iter().sum::<f64>();
    let n = f.len();
    let mut out = vec![0.0; n];
    for (i, o) in out.iter_mut().enumerate() {
        let lo = i.saturating_sub(reach);
        let hi = (i + reach).min(n - 1);
        let mut acc = 0.0;
        for (j, fj) in f.iter().enumerate().take(hi + 1).skip(lo) {
            acc += stencil[i.abs_diff(j)] * fj;
        }
        *o = acc / mass;
    }
    Ok(out)
}

/// `e^{s𝓛₀}ψ` through the Cole-Hopf kernel: with `φ(η) = ∫₀^η ψ`,
/// returns `∫ ∂ξΓ̃(ξ, s, η) φ(η) dη` where
/// `Γ̃ = e^{−s/16} K_s(ξ−η) e^{B₀(ξ) − B₀(η)}`.
/// φ is continued as a constant beyond the grid.
pub fn cole_hopf_propagate(grid: &WeightedGrid, psi: &[f64], s: f64) -> Result<Vec<f64>> {
    if !(s > 0.0) {
        return Err(invalid("s", format!("{s} must be positive")));
    }
    let h = uniform_step(grid)?;
    let n = grid.len();
    let x = &grid.nodes;

    // cumulative trapezoid, then shift so that φ(0) = 0
    let mut phi = vec![0.0; n];
    for i in 1..n {
        phi[i] = phi[i - 1] + 0.5 * h * (psi[i - 1] + psi[i]);
    }
    let i0 = x.iter().position(|v| *v >= 0.0).unwrap_or(n - 1);
    let phi0 = if i0 == 0 {
        phi[0]
    } else {
        let t = (0.0 - x[i0 - 1]) / h;
        phi[i0 - 1] + t * (phi[i0] - phi[i0 - 1])
    };
    phi.iter_mut().for_each(|v| *v -= phi0);

    let reach = ((12.0 * s.sqrt() + s) / h).ceil() as i64;
    let damp = (-s / 16.0).exp();
    let eta_at = |k: i64| x[0] + h * k as f64;
    let phi_at = |k: i64| -> f64 {
        if k < 0 {
            phi[0]
        } else if k as usize >= n {
            phi[n - 1]
        } else {
            phi[k as usize]
        }
    };
    let b_eta: Vec<f64> = (-reach..n as i64 + reach).map(|k| eval_b0(eta_at(k))).collect();
    let mut out = vec![0.0; n];
    for (i, o) in out.iter_mut().enumerate() {
        let xi = x[i];
        let bx = eval_b0(xi);
        let bpx = eval_b0_prime(xi);
        let mut acc = 0.0;
        for k in (i as i64 - reach)..=(i as i64 + reach) {
            let eta = eta_at(k);
            let g = damp * heat_kernel(xi - eta, s) * (bx - b_eta[(k + reach) as usize]).exp();
            acc += g * (-(xi - eta) / (2.0 * s) + bpx) * phi_at(k);
        }
        *o = h * acc;
    }
    Ok(out)
}

/// `e^{s𝓛₀}f` by Crank-Nicolson on the flux-form 𝓛₀ with zero ends.
pub fn semigroup_l0(grid: &WeightedGrid, f: &[f64], s: f64, steps: usize) -> Result<Vec<f64>> {
    if !(s >= 0.0) || steps == 0 {
        return Err(invalid("s", format!("{s} with {steps} steps")));
    }
    let op = crate::operators::assemble_l0(grid)?;
    let dt = s / steps as f64;
    let mut a = op.interior();
    a.sub.iter_mut().chain(a.sup.iter_mut()).for_each(|v| *v *= -0.5 * dt);
    a.diag.iter_mut().for_each(|v| *v = 1.0 - 0.5 * dt * *v);
    let n = f.len();
    let mut u = f.to_vec();
    u[0] = 0.0;
    u[n - 1] = 0.0;
    for _ in 0..steps {
        let lu = op.apply(&u);
        let rhs: Vec<f64> = (1..n - 1).map(|i| u[i] + 0.5 * dt * lu[i]).collect();
        let inner = a.solve_pivoted(&rhs);
        u[1..n - 1].copy_from_slice(&inner);
    }
    Ok(u)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profiles::eval_w;

    #[test]
    fn kernel_mass_and_gradient_norm() {
        for s in [0.1, 0.5, 2.0] {
            let hw = 12.0 * f64::sqrt(s);
            let h = s.sqrt() / 50.0;
            assert!((heat_kernel_l1(s, hw, h) - 1.0).abs() <= 1e-10);
            let g = heat_kernel_grad_l2_sq(s, hw, h);
            let e = heat_kernel_grad_l2_sq_exact(s);
            assert!(((g - e) / e).abs() <= 1e-8);
        }
    }

    #[test]
    fn semigroup_property() {
        let g = WeightedGrid::symmetric(20.0, 0.01).unwrap();
        let mut spike = vec![0.0; g.len()];
        let mid = g.len() / 2;
        spike[mid] = 1.0 / 0.01;
        let a = heat_kernel_convolve(&g, &spike, 0.3).unwrap();
        let exact = g.sample(|x| heat_kernel(x, 0.3));
        let err: Vec<f64> = a.iter().zip(&exact).map(|(u, v)| u - v).collect();
        assert!(g.l2(&err) <= 1e-4);
        let b = heat_kernel_convolve(&g, &a, 0.5).unwrap();
        let exact = g.sample(|x| heat_kernel(x, 0.8));
        let worst = b.iter().zip(&exact).fold(0.0f64, |m, (u, v)| m.max((u - v).abs()));
        assert!(worst <= 1e-6);
        assert!(heat_kernel_convolve(&g, &a, 0.0).is_err());
    }

    #[test]
    fn cole_hopf_keeps_the_kernel_direction() {
        let g = WeightedGrid::symmetric(60.0, 0.01).unwrap();
        let psi = g.sample(eval_w);
        let out = cole_hopf_propagate(&g, &psi, 1.0).unwrap();
        let err: Vec<f64> = out.iter().zip(&psi).map(|(u, v)| u - v).collect();
        assert!(g.l2(&err) <= 1e-3, "{}", g.l2(&err));
        let out = cole_hopf_propagate(&g, &psi, 1e-3).unwrap();
        let worst = out.iter().zip(&psi).fold(0.0f64, |m, (u, v)| m.max((u - v).abs()));
        assert!(worst <= 1e-2);
    }

    #[test]
    fn cole_hopf_matches_stepping() {
        let g = WeightedGrid::symmetric(60.0, 0.02).unwrap();
        let f = g.sample(|x| (-(x - 2.0).powi(2) / 4.0).exp() - 0.5 * (-(x + 3.0).powi(2)).exp());
        let a = cole_hopf_propagate(&g, &f, 4.0).unwrap();
        let b = semigroup_l0(&g, &f, 4.0, 400).unwrap();
        let err: Vec<f64> = a.iter().zip(&b).map(|(u, v)| u - v).collect();
        assert!(g.l2(&err) <= 1e-3 * g.l2(&f), "{} {}", g.l2(&err), g.l2(&f));
    }
}

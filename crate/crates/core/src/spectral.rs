//! Spectral audits of the linearized operator: kernel, gap, coercivity and
//! the weighted Poincaré and Sobolev inequalities.

use rand::Rng;

use crate::banded::{BandedOperator, OperatorKind};
use crate::eigen::SymTridiagonal;
use crate::error::{Error, Result};
use crate::grid::{derivatives, WeightedGrid};
use crate::jet::Jet;
use crate::operators::{assemble_l0, assemble_m0, assemble_m0_with};
use crate::profiles::{chi_a, eval_psi0, eval_v, eval_w, log_omega0};
use crate::record::Record;

#[derive(Clone, Debug, PartialEq)]
pub struct SpectralReport {
    /// Descending.
    pub eigenvalues: Vec<f64>,
    /// L² distance of the top eigenvector to ψ₀/‖ψ₀‖.
    pub kernel_error: f64,
    pub gap_edge: f64,
    pub box_size: f64,
    pub resolution: f64,
    /// Top eigenvector on all grid nodes (zero at the ends), unit L² norm.
    pub ground_state: Vec<f64>,
}

impl SpectralReport {
    pub fn lambda0(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn to_record(&self) -> Record {
        let mut r = Record::new();
        r.num("lambda0", self.eigenvalues[0])
            .num("gap_edge", self.gap_edge)
            .num("kernel_error", self.kernel_error)
            .num("box_size", self.box_size)
            .num("resolution", self.resolution);
        for (i, v) in self.eigenvalues.iter().enumerate() {
            r.num(&format!("eig_{i}"), *v);
        }
        r
    }
}

/// Symmetric tridiagonal of the interior block of a symmetric operator.
pub fn symmetric_interior(op: &BandedOperator) -> Result<SymTridiagonal> {
    let scale = op.diag.iter().fold(0.0f64, |a, b| a.max(b.abs()));
    if op.symmetry_defect() > 1e-13 * scale.max(1.0) {
        return Err(Error::InvalidParameter { name: "op", reason: "operator is not symmetric".into() });
    }
    let t = op.interior();
    let n = t.len();
    Ok(SymTridiagonal { diag: t.diag, off: t.sup[..n - 1].to_vec() })
}

/// Similarity-symmetrized interior block of the flux-form 𝓛₀
/// (equivalent to the generalized problem with ω₀ weights).
pub fn symmetrized_l0(grid: &WeightedGrid) -> Result<SymTridiagonal> {
    let op = assemble_l0(grid)?;
    let t = op.interior();
    let n = t.len();
    let off = (0..n - 1).map(|i| (t.sup[i] * t.sub[i + 1]).sqrt()).collect();
    Ok(SymTridiagonal { diag: t.diag, off })
}

fn unit_l2(grid: &WeightedGrid, f: &mut [f64]) {
    let n = grid.l2(f);
    if n > 0.0 {
        f.iter_mut().for_each(|v| *v /= n);
    }
}

/// Top-k eigenpairs of a symmetric operator assembled on a uniform grid;
/// the kernel error is measured against ψ₀.
pub fn eigen_decompose(op: &BandedOperator, grid: &WeightedGrid, k: usize) -> Result<SpectralReport> {
    let t = symmetric_interior(op)?;
    if k == 0 || k > t.len() {
        return Err(Error::TooManyEigenpairs { requested: k, size: t.len() });
    }
    let eigenvalues = t.top_eigenvalues(k.max(2));
    let v = t.eigenvector(eigenvalues[0]);
    let n = grid.len();
    let mut ground = vec![0.0; n];
    ground[1..n - 1].copy_from_slice(&v);
    unit_l2(grid, &mut ground);
    let mut psi = grid.sample(eval_psi0);
    psi[0] = 0.0;
    psi[n - 1] = 0.0;
    unit_l2(grid, &mut psi);
    let dot: f64 = grid.trap.iter().zip(&ground).zip(&psi).map(|((w, a), b)| w * a * b).sum();
    if dot < 0.0 {
        ground.iter_mut().for_each(|x| *x = -*x);
    }
    let diff: Vec<f64> = ground.iter().zip(&psi).map(|(a, b)| a - b).collect();
    let kernel_error = grid.l2(&diff);
    let l = 0.5 * (grid.nodes[n - 1] - grid.nodes[0]);
    Ok(SpectralReport {
        gap_edge: eigenvalues[1],
        eigenvalues: eigenvalues.into_iter().take(k).collect(),
        kernel_error,
        box_size: l,
        resolution: grid.spacing[0],
        ground_state: ground,
    })
}

/// Spectrum of 𝓜₀ on `[−L, L]` with spacing `h`.
pub fn m0_spectrum(l: f64, h: f64, k: usize) -> Result<SpectralReport> {
    let g = WeightedGrid::symmetric(l, h)?;
    let op = assemble_m0(&g)?;
    eigen_decompose(&op, &g, k)
}

#[derive(Clone, Debug, PartialEq)]
pub struct GapScan {
    pub box_sizes: Vec<f64>,
    pub counts: Vec<usize>,
    pub delta_edge: f64,
}

impl GapScan {
    pub fn all_zero(&self) -> bool {
        self.counts.iter().all(|c| *c == 0)
    }
}

/// Eigenvalues of a symmetric operator inside the open window `(lo, hi)`.
pub fn count_in_window(op: &BandedOperator, lo: f64, hi: f64) -> Result<usize> {
    let t = symmetric_interior(op)?;
    let below_hi = t.count_below(hi);
    let below_lo = t.count_below(lo);
    // count_below is strict; an eigenvalue exactly at lo is excluded by construction
    Ok(below_hi - below_lo - (t.count_below(lo + f64::EPSILON * lo.abs()) - below_lo))
}

/// For each box size, the number of 𝓜₀ eigenvalues in `(−1/16 + δ, −δ)`.
pub fn no_gap_eigenvalue_scan(box_sizes: &[f64], h: f64, delta_edge: f64) -> Result<GapScan> {
    no_gap_scan_with(box_sizes, h, delta_edge, eval_v)
}

/// Same scan for a modified potential (used as a detection control).
pub fn no_gap_scan_with(box_sizes: &[f64], h: f64, delta_edge: f64, v: impl Fn(f64) -> f64 + Copy) -> Result<GapScan> {
    let mut counts = Vec::with_capacity(box_sizes.len());
    for &l in box_sizes {
        let g = WeightedGrid::symmetric(l, h)?;
        let op = assemble_m0_with(&g, v)?;
        counts.push(count_in_window(&op, -0.0625 + delta_edge, -delta_edge)?);
    }
    Ok(GapScan { box_sizes: box_sizes.to_vec(), counts, delta_edge })
}

// ---------------------------------------------------------------------------
// Weighted quadratic forms

/// `Σ ω_{i+1/2} (m_{i+1} − m_i)² / h_i`, the discrete `∫|∂ξm|²ω₀`.
pub fn dirichlet_form(grid: &WeightedGrid, m: &[f64]) -> f64 {
    let x = &grid.nodes;
    (0..grid.len() - 1)
        .map(|i| {
            let w = log_omega0(0.5 * (x[i] + x[i + 1])).exp();
            w * (m[i + 1] - m[i]).powi(2) / grid.spacing[i]
        })
        .sum()
}

/// `⟨𝓛₀m, m⟩_{ω₀}`.
pub fn l0_form(grid: &WeightedGrid, op: &BandedOperator, m: &[f64]) -> f64 {
    let lm = op.apply(m);
    grid.inner(&lm, m)
}

pub fn h1_norm_sq(grid: &WeightedGrid, m: &[f64]) -> f64 {
    grid.inner(m, m) + dirichlet_form(grid, m)
}

pub fn h2_norm_sq(grid: &WeightedGrid, m: &[f64]) -> f64 {
    let (_, d2) = derivatives(&grid.nodes, m);
    h1_norm_sq(grid, m) + grid.inner(&d2, &d2)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CoercivityResult {
    pub lhs: f64,
    pub rhs: f64,
    pub ok: bool,
}

/// `⟨𝓛₀m,m⟩ ≤ −δ‖m‖²_{H¹ω₀} + ⟨m,∂ξQ⟩²/‖∂ξQ‖²`.
pub fn coercivity_test(grid: &WeightedGrid, m: &[f64], delta: f64) -> Result<CoercivityResult> {
    let op = assemble_l0(grid)?;
    let qp = grid.sample(eval_w);
    let lhs = l0_form(grid, &op, m);
    let proj = grid.inner(m, &qp);
    let rhs = -delta * h1_norm_sq(grid, m) + proj * proj / grid.inner(&qp, &qp);
    Ok(CoercivityResult { lhs, rhs, ok: lhs <= rhs })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FunctionalReport {
    /// `∫m²ω₀ / ∫|∂ξm|²ω₀`.
    pub poincare_c: f64,
    /// `max |m| e^{|ξ|/4} / ‖∂ξm‖_{L²ω₀}`.
    pub sobolev_c: f64,
    pub degenerate: bool,
}

impl FunctionalReport {
    pub fn to_record(&self) -> Record {
        let mut r = Record::new();
        r.num("poincare_c", self.poincare_c).num("sobolev_c", self.sobolev_c).flag("degenerate", self.degenerate);
        r
    }
}

pub fn functional_inequality_check(grid: &WeightedGrid, m: &[f64]) -> FunctionalReport {
    let dm = dirichlet_form(grid, m);
    let l2 = grid.inner(m, m);
    if dm == 0.0 {
        return FunctionalReport { poincare_c: f64::NAN, sobolev_c: f64::NAN, degenerate: true };
    }
    let sup = grid.nodes.iter().zip(m).map(|(x, v)| v.abs() * (x.abs() / 4.0).exp()).fold(0.0, f64::max);
    FunctionalReport { poincare_c: l2 / dm, sobolev_c: sup / dm.sqrt(), degenerate: false }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RestrictedReport {
    pub projected: Vec<f64>,
    /// `−⟨𝓛₀m,m⟩ / ‖m‖²_{H¹}`.
    pub h1_ratio: f64,
    /// `‖𝓛₀m‖² / ‖m‖²_{H²}`.
    pub h2_ratio: f64,
    pub h1_ok: bool,
    pub h2_ok: bool,
}

/// Removes the ∂ξQ component so that `⟨m, ∂ξQ χ_A⟩_{ω₀} = 0`.
pub fn project_localized(grid: &WeightedGrid, m: &[f64], a: f64) -> Vec<f64> {
    let qp = grid.sample(eval_w);
    let qa: Vec<f64> = grid.nodes.iter().zip(&qp).map(|(x, q)| q * chi_a(Jet::constant(*x), a, 0.0).v()).collect();
    let c = grid.inner(m, &qa) / grid.inner(&qp, &qa);
    m.iter().zip(&qp).map(|(v, q)| v - c * q).collect()
}

/// Removes the ∂ξQ component in `L²ω₀` (equivalently, the mean of m).
pub fn project_kernel(grid: &WeightedGrid, m: &[f64]) -> Vec<f64> {
    let qp = grid.sample(eval_w);
    let c = grid.inner(m, &qp) / grid.inner(&qp, &qp);
    m.iter().zip(&qp).map(|(v, q)| v - c * q).collect()
}

pub fn restricted_coercivity_check(grid: &WeightedGrid, m: &[f64], a: f64, delta1: f64) -> Result<RestrictedReport> {
    let op = assemble_l0(grid)?;
    let mut projected = project_localized(grid, m, a);
    let n = projected.len();
    projected[0] = 0.0;
    projected[n - 1] = 0.0;
    let h1 = h1_norm_sq(grid, &projected);
    let h2 = h2_norm_sq(grid, &projected);
    let form = -l0_form(grid, &op, &projected);
    let lm = op.apply(&projected);
    let lm2 = grid.inner(&lm, &lm);
    let (h1_ratio, h2_ratio) = if h1 > 0.0 { (form / h1, lm2 / h2) } else { (f64::INFINITY, f64::INFINITY) };
    Ok(RestrictedReport { projected, h1_ratio, h2_ratio, h1_ok: h1_ratio >= delta1, h2_ok: h2_ratio >= delta1 })
}

/// Sum of 1 to 8 Gaussian bumps, centers in `[−A, A]`, widths in `[0.5, 4]`,
/// amplitudes in `[−1, 1]`.
pub fn random_bumps<R: Rng>(grid: &WeightedGrid, a: f64, rng: &mut R) -> Vec<f64> {
    let k = rng.gen_range(1..=8);
    let bumps: Vec<(f64, f64, f64)> =
        (0..k).map(|_| (rng.gen_range(-a..=a), rng.gen_range(0.5..=4.0), rng.gen_range(-1.0..=1.0))).collect();
    grid.sample(|x| bumps.iter().map(|(c, w, amp)| amp * (-((x - c) / w).powi(2)).exp()).sum())
}

/// Rayleigh quotient `⟨Tf, f⟩ / ⟨f, f⟩` in the Euclidean product.
pub fn rayleigh_quotient(t: &SymTridiagonal, f: &[f64]) -> f64 {
    let tf = t.apply(f);
    let num: f64 = tf.iter().zip(f).map(|(a, b)| a * b).sum();
    let den: f64 = f.iter().map(|v| v * v).sum();
    num / den
}

pub fn is_m0(op: &BandedOperator) -> bool {
    op.kind == OperatorKind::M0
}

//! Radial partial-mass solver:
//! `∂t m = ∂r²m − (d−1)/r ∂r m + m ∂r m / r^{d−1}` with `m(0) = 0` and the
//! total mass pinned at `r_max`.

use crate::error::{invalid, Error, Result};
use crate::grid::{derivative, graded_mesh};
use crate::interp::Pchip;
use crate::jet::Jet;
use crate::modulation::{decompose, detect_ring, ModulationState};
use crate::profiles::{q_bar, GeometryScales};
use crate::series::{log_mean, TimeSeries};

#[derive(Clone, Debug, PartialEq)]
pub struct PartialMassState {
    pub d: u32,
    pub r: Vec<f64>,
    pub m: Vec<f64>,
    pub t: f64,
}

impl PartialMassState {
    pub fn new(d: u32, r: Vec<f64>, m: Vec<f64>, t: f64) -> Result<Self> {
        if d < 3 {
            return Err(invalid("d", format!("{d} must be at least 3")));
        }
        if r.len() < 3 || r.len() != m.len() {
            return Err(Error::DegenerateGrid(format!("{} nodes for {} values", r.len(), m.len())));
        }
        if r[0] != 0.0 || r.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::DegenerateGrid("radial nodes must start at 0 and increase".into()));
        }
        Ok(Self { d, r, m, t })
    }

    pub fn total_mass(&self) -> f64 {
        *self.m.last().unwrap()
    }

    pub fn r_max(&self) -> f64 {
        *self.r.last().unwrap()
    }

    /// Most negative `∂r m` over cells.
    pub fn min_slope(&self) -> f64 {
        self.r
            .windows(2)
            .zip(self.m.windows(2))
            .map(|(r, m)| (m[1] - m[0]) / (r[1] - r[0]))
            .fold(f64::INFINITY, f64::min)
    }

    /// Same state transported by the scaling symmetry:
    /// `m ↦ Λ^{2−d} m(Λ·)`, `t ↦ Λ²t`.
    pub fn rescaled(&self, big_lambda: f64) -> Self {
        let f = big_lambda.powi(2 - self.d as i32);
        Self {
            d: self.d,
            r: self.r.iter().map(|r| r / big_lambda).collect(),
            m: self.m.iter().map(|m| m * f).collect(),
            t: self.t / (big_lambda * big_lambda),
        }
    }
}

/// Mesh layout around a ring of radius `R` and width `λ`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MeshSpec {
    /// Core spacing in units of λ.
    pub h_core: f64,
    /// Minimal core half width in units of λ.
    pub core_half_width: f64,
    pub ratio: f64,
    /// Largest spacing as a fraction of r_max.
    pub h_max_frac: f64,
}

impl Default for MeshSpec {
    fn default() -> Self {
        Self { h_core: 0.1, core_half_width: 30.0, ratio: 1.05, h_max_frac: 1.0 / 400.0 }
    }
}

/// Graded radial mesh on `[0, r_max]`; the core reaches past `ξ_{A,+} + 3`
/// so that both orthogonality windows are resolved.
pub fn ring_mesh(r_max: f64, center: f64, lambda: f64, a: f64, spec: &MeshSpec) -> Vec<f64> {
    let nu = (lambda / center).min(0.5);
    let xi_edge = 4.0 * nu.ln().abs() + a + 3.0;
    let half = spec.core_half_width.max(xi_edge) * lambda;
    graded_mesh(0.0, r_max, center - half, center + half, spec.h_core * lambda, spec.ratio, spec.h_max_frac * r_max)
}

/// `m(r) = M₀ Q̄_ν(r/R₀)` with `ν = λ₀/R₀` on a ring mesh over `[0, 4R₀]`.
pub fn init_ring(d: u32, m0: f64, r0: f64, lambda0: f64, zeta0: f64) -> Result<PartialMassState> {
    check_ring(m0, r0, lambda0, zeta0)?;
    let nodes = ring_mesh(4.0 * r0, r0, lambda0, 10.0, &MeshSpec::default());
    init_ring_on(d, m0, r0, lambda0, zeta0, nodes)
}

pub fn init_ring_on(d: u32, m0: f64, r0: f64, lambda0: f64, zeta0: f64, nodes: Vec<f64>) -> Result<PartialMassState> {
    check_ring(m0, r0, lambda0, zeta0)?;
    let nu = lambda0 / r0;
    let m = nodes.iter().map(|r| m0 * ring_profile(r / r0, nu, zeta0)).collect();
    PartialMassState::new(d, nodes, m, 0.0)
}

fn check_ring(m0: f64, r0: f64, lambda0: f64, zeta0: f64) -> Result<()> {
    if !(m0 > 0.0 && r0 > 0.0 && lambda0 > 0.0) {
        return Err(invalid("ring", "mass, radius and width must be positive"));
    }
    if lambda0 >= r0 {
        return Err(invalid("lambda0", format!("{lambda0} is not below R0 = {r0}")));
    }
    if !(zeta0 > 0.0 && zeta0 < 0.5) {
        return Err(invalid("zeta0", format!("{zeta0} is outside (0, 1/2)")));
    }
    Ok(())
}

/// `Q̄_ν(ζ)`; exactly 0 on `[0, ζ₀]`.
pub fn ring_profile(zeta: f64, nu: f64, zeta0: f64) -> f64 {
    if zeta <= zeta0 {
        return 0.0;
    }
    q_bar(Jet::constant((zeta - 1.0) / nu), nu, zeta0).v()
}

/// `u = r^{1−d} ∂r m`, taken as `dm/dy` in `y = r^d/d` so that uniform
/// densities are reproduced exactly, origin included.
pub fn density_of(state: &PartialMassState) -> Vec<f64> {
    let d = state.d as i32;
    let y: Vec<f64> = state.r.iter().map(|r| r.powi(d) / d as f64).collect();
    derivative(&y, &state.m)
}

pub(crate) struct Stencil {
    pub lo: f64,
    pub mid: f64,
    pub hi: f64,
}

// hybrid first derivative for the term c ∂r m: centered while the cell
// Péclet number allows an M-matrix, upwind otherwise
pub(crate) fn transport(c: f64, hm: f64, hp: f64) -> Stencil {
    if c > 0.0 && c * hp > 2.0 {
        Stencil { lo: 0.0, mid: -c / hp, hi: c / hp }
    } else if c < 0.0 && -c * hm > 2.0 {
        Stencil { lo: -c / hm, mid: c / hm, hi: 0.0 }
    } else {
        let s = hm + hp;
        Stencil { lo: -c * hp / (hm * s), mid: c * (hp - hm) / (hm * hp), hi: c * hm / (hp * s) }
    }
}

fn rows(state: &PartialMassState) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let n = state.r.len();
    let (r, m) = (&state.r, &state.m);
    let dm1 = state.d as f64 - 1.0;
    let mut lo = vec![0.0; n];
    let mut mid = vec![0.0; n];
    let mut hi = vec![0.0; n];
    for i in 1..n - 1 {
        let hm = r[i] - r[i - 1];
        let hp = r[i + 1] - r[i];
        let s = hm + hp;
        let c = m[i] / r[i].powi(state.d as i32 - 1) - dm1 / r[i];
        let t = transport(c, hm, hp);
        lo[i] = 2.0 / (hm * s) + t.lo;
        hi[i] = 2.0 / (hp * s) + t.hi;
        mid[i] = -2.0 / (hm * hp) + t.mid;
    }
    (lo, mid, hi)
}

/// Discrete right side at interior nodes (ends are 0).
pub fn rhs(state: &PartialMassState) -> Vec<f64> {
    let (lo, mid, hi) = rows(state);
    let m = &state.m;
    (0..m.len())
        .map(|i| if i == 0 || i + 1 == m.len() { 0.0 } else { lo[i] * m[i - 1] + mid[i] * m[i] + hi[i] * m[i + 1] })
        .collect()
}

/// One linearly implicit step: diffusion and transport implicit with the
/// transport speed `m/r^{d−1} − (d−1)/r` frozen at the old level.
pub fn step(state: &PartialMassState, dt: f64) -> Result<PartialMassState> {
    step_with_source(state, dt, None)
}

/// [`step`] with an additive source `f(r, t)` evaluated at the new time.
pub fn step_with_source(
    state: &PartialMassState,
    dt: f64,
    source: Option<&dyn Fn(f64, f64) -> f64>,
) -> Result<PartialMassState> {
    if !(dt >= 0.0) {
        return Err(invalid("dt", format!("{dt} must be nonnegative")));
    }
    if dt == 0.0 {
        return Ok(state.clone());
    }
    let n = state.r.len();
    let (lo, mid, hi) = rows(state);
    let t_new = state.t + dt;
    let mut sub = vec![0.0; n];
    let mut diag = vec![1.0; n];
    let mut sup = vec![0.0; n];
    // solved for the increment so that flat stretches stay exactly flat
    let m0 = &state.m;
    let mut b = vec![0.0; n];
    for i in 1..n - 1 {
        sub[i] = -dt * lo[i];
        diag[i] = 1.0 - dt * mid[i];
        sup[i] = -dt * hi[i];
        b[i] = dt * (lo[i] * m0[i - 1] + mid[i] * m0[i] + hi[i] * m0[i + 1]);
        if let Some(f) = source {
            b[i] += dt * f(state.r[i], t_new);
        }
    }
    let dm = crate::banded::thomas(&sub, &diag, &sup, &b);
    let m: Vec<f64> = m0.iter().zip(&dm).map(|(a, b)| a + b).collect();
    if let Some(i) = m.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite { step: i, t: t_new });
    }
    Ok(PartialMassState { d: state.d, r: state.r.clone(), m, t: t_new })
}

/// Same mass profile on new nodes (monotone cubic interpolation).
pub fn remesh(state: &PartialMassState, nodes: Vec<f64>) -> Result<PartialMassState> {
    let p = Pchip::new(&state.r, &state.m)?;
    let mut m = p.eval_many(&nodes);
    m[0] = 0.0;
    *m.last_mut().unwrap() = state.total_mass();
    PartialMassState::new(state.d, nodes, m, state.t)
}

#[derive(Clone, Debug, PartialEq)]
pub struct PhysicalConfig {
    /// Stop once `λ/R = ν` drops below this.
    pub stop_ratio: f64,
    pub density_cap: f64,
    pub max_steps: usize,
    /// Step size in the inner clock: `dt = ds λ²`.
    pub ds: f64,
    /// Record cadence in the inner clock.
    pub record_ds: f64,
    /// Snapshot cadence in τ; `None` disables snapshots.
    pub snapshot_dtau: Option<f64>,
    pub a: f64,
    pub zeta0: f64,
    pub mesh: MeshSpec,
    /// Remesh when the ring center moves by this many widths.
    pub remesh_shift: f64,
    /// Remesh when the width falls below this fraction of the mesh width.
    pub remesh_shrink: f64,
}

impl Default for PhysicalConfig {
    fn default() -> Self {
        Self {
            stop_ratio: 1e-3,
            density_cap: 1e14,
            max_steps: 2_000_000,
            ds: 1.0 / 40.0,
            record_ds: 0.5,
            snapshot_dtau: None,
            a: 10.0,
            zeta0: 0.25,
            mesh: MeshSpec::default(),
            remesh_shift: 5.0,
            remesh_shrink: 0.85,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Outcome {
    StopRatio,
    DensityCap,
    NoBlowup,
}

#[derive(Clone, Debug)]
pub struct PhysicalRun {
    pub series: TimeSeries,
    pub state: PartialMassState,
    pub modulation: Option<ModulationState>,
    pub t_est: Option<f64>,
    pub outcome: Outcome,
    pub snapshots: Vec<PartialMassState>,
    pub steps: usize,
    pub remeshes: usize,
    pub worst_mass_drift: f64,
    pub worst_min_slope: f64,
}

pub const SERIES_COLUMNS: [&str; 9] = ["t", "tau", "s", "R", "M", "lambda", "nu", "umax", "mass_total"];

/// Integrates until `ν < stop_ratio`, the density cap, or the step budget.
pub fn run_to_blowup(initial: &PartialMassState, cfg: &PhysicalConfig) -> Result<PhysicalRun> {
    let d = initial.d;
    let mut series = TimeSeries::new(&SERIES_COLUMNS);
    let mass0 = initial.total_mass();
    let ring = detect_ring(initial)?;
    let guess = ModulationState::from_radius_mass(d, ring.r, ring.mass, initial.t)?;
    let mut dec = decompose(initial, &guess, cfg.a, cfg.zeta0)?;
    let mut run = PhysicalRun {
        series: TimeSeries::new(&SERIES_COLUMNS),
        state: initial.clone(),
        modulation: Some(dec.modulation),
        t_est: None,
        outcome: Outcome::StopRatio,
        snapshots: Vec::new(),
        steps: 0,
        remeshes: 0,
        worst_mass_drift: 0.0,
        worst_min_slope: initial.min_slope(),
    };
    if dec.modulation.nu <= cfg.stop_ratio {
        return Ok(run);
    }

    let mut state = initial.clone();
    let mut mesh_center = ring.r;
    let mut mesh_lambda = ring.lambda;
    let mut last = dec.modulation;
    let push = |series: &mut TimeSeries, md: &ModulationState, st: &PartialMassState, umax: f64| {
        series.push(vec![md.t, md.tau, md.s, md.r, md.m, md.lambda, md.nu, umax, st.total_mass()]);
    };
    push(&mut series, &last, &state, ring.umax);
    if cfg.snapshot_dtau.is_some() {
        run.snapshots.push(state.clone());
    }
    let mut next_snapshot = cfg.snapshot_dtau.map(|h| last.tau + h);
    let mut s_since_record = 0.0;
    let mut outcome = Outcome::NoBlowup;

    for k in 0..cfg.max_steps {
        let ring = detect_ring(&state)?;
        if (ring.r - mesh_center).abs() > cfg.remesh_shift * ring.lambda || ring.lambda < cfg.remesh_shrink * mesh_lambda {
            let nodes = ring_mesh(state.r_max(), ring.r, ring.lambda, cfg.a, &cfg.mesh);
            state = remesh(&state, nodes)?;
            mesh_center = ring.r;
            mesh_lambda = ring.lambda;
            run.remeshes += 1;
        }
        let dt = cfg.ds * ring.lambda * ring.lambda;
        state = step(&state, dt)?;
        run.steps = k + 1;
        s_since_record += cfg.ds;
        run.worst_mass_drift = run.worst_mass_drift.max(((state.total_mass() - mass0) / mass0).abs());
        run.worst_min_slope = run.worst_min_slope.min(state.min_slope());

        if s_since_record + 1e-12 >= cfg.record_ds {
            s_since_record = 0.0;
            let ring = detect_ring(&state)?;
            dec = decompose(&state, &last, cfg.a, cfg.zeta0)?;
            let mut md = dec.modulation;
            let g0 = last.r.powi(d as i32) / last.m;
            let g1 = md.r.powi(d as i32) / md.m;
            let dtau = (md.t - last.t) / log_mean(g0, g1);
            let ds = (md.t - last.t) / log_mean(last.lambda * last.lambda, md.lambda * md.lambda);
            md.tau = last.tau + dtau;
            md.s = last.s + ds;
            push(&mut series, &md, &state, ring.umax);
            last = md;
            if let (Some(h), Some(next)) = (cfg.snapshot_dtau, next_snapshot) {
                if md.tau >= next {
                    run.snapshots.push(state.clone());
                    next_snapshot = Some(next + h);
                }
            }
            if md.nu <= cfg.stop_ratio {
                outcome = Outcome::StopRatio;
                break;
            }
            if ring.umax >= cfg.density_cap {
                outcome = Outcome::DensityCap;
                break;
            }
        }
    }
    run.t_est = if outcome == Outcome::NoBlowup { None } else { estimate_blowup_time(&series, d) };
    run.series = series;
    run.state = state;
    run.modulation = Some(last);
    run.outcome = outcome;
    Ok(run)
}

/// Steps with the run's mesh tracking until exactly `t_end`.
pub fn advance_to(initial: &PartialMassState, t_end: f64, cfg: &PhysicalConfig) -> Result<(PartialMassState, usize)> {
    let mut state = initial.clone();
    let ring = detect_ring(&state)?;
    let (mut center, mut width) = (ring.r, ring.lambda);
    let mut steps = 0;
    while state.t < t_end {
        let ring = detect_ring(&state)?;
        if (ring.r - center).abs() > cfg.remesh_shift * ring.lambda || ring.lambda < cfg.remesh_shrink * width {
            state = remesh(&state, ring_mesh(state.r_max(), ring.r, ring.lambda, cfg.a, &cfg.mesh))?;
            center = ring.r;
            width = ring.lambda;
        }
        let dt = (cfg.ds * ring.lambda * ring.lambda).min(t_end - state.t);
        let t_next = if dt == t_end - state.t { t_end } else { state.t + dt };
        state = step(&state, dt)?;
        state.t = t_next;
        steps += 1;
        if steps >= cfg.max_steps {
            break;
        }
    }
    Ok((state, steps))
}

/// Blow-up time from the linear trend of `R^d` in t over the last records.
pub fn estimate_blowup_time(series: &TimeSeries, d: u32) -> Option<f64> {
    let t = series.column("t")?;
    let r = series.column("R")?;
    let n = t.len();
    if n < 3 {
        return None;
    }
    let k = 6.min(n);
    let xs = &t[n - k..];
    let ys: Vec<f64> = r[n - k..].iter().map(|v| v.powi(d as i32)).collect();
    let (slope, icept) = linear_fit(xs, &ys);
    if !(slope < 0.0) {
        return None;
    }
    Some(-icept / slope)
}

/// Least-squares `y ≈ slope·x + intercept`, centered for conditioning.
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

/// Zone scales for a modulation state.
pub fn scales_of(md: &ModulationState, a: f64, zeta0: f64, eta: f64) -> Result<GeometryScales> {
    Ok(GeometryScales::new(md.nu, a, zeta0, eta)?.with_radius(md.r))
}

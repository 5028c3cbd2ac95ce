//! Self-similar frame: the renormalized partial mass `m_w(ζ, τ)` with
//! modulated `(R, M)`, the inner Burgers mode, and the runtime check that
//! the inner and outer formulations agree.

use rand::Rng;

use crate::banded::thomas;
use crate::error::{invalid, Error, Result};
use crate::grid::{fd_jets, graded_mesh, WeightedGrid};
use crate::interp::Pchip;
use crate::jet::Jet;
use crate::modulation::{close_rates_relaxed, decompose, xi_a_plus, Decomposition, ModulationState};
use crate::operators::formulas::{self, FrameParams, OuterRates, Rates};
use crate::physical::{linear_fit, ring_profile, transport, PartialMassState};
use crate::profiles::{eval_omega0, eval_q};
use crate::record::Record;
use crate::series::{log_mean, TimeSeries};

/// Outer edge of the renormalized domain.
pub const ZETA_MAX: f64 = 4.0;

#[derive(Clone, Debug, PartialEq)]
pub struct RenormalizedState {
    pub zeta: Vec<f64>,
    pub m_w: Vec<f64>,
    /// `nu` is carried by its own evolution law and may drift from `R^{d−2}/M`.
    pub modulation: ModulationState,
    pub zeta0: f64,
}

impl RenormalizedState {
    pub fn new(zeta: Vec<f64>, m_w: Vec<f64>, modulation: ModulationState, zeta0: f64) -> Result<Self> {
        if zeta.len() < 3 || zeta.len() != m_w.len() {
            return Err(Error::DegenerateGrid(format!("{} nodes for {} values", zeta.len(), m_w.len())));
        }
        if zeta[0] != 0.0 || zeta.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::DegenerateGrid("zeta nodes must start at 0 and increase".into()));
        }
        if !(modulation.nu >= 0.0 && modulation.nu < 1.0) {
            return Err(invalid("nu", format!("{} is outside [0, 1)", modulation.nu)));
        }
        Ok(Self { zeta, m_w, modulation, zeta0 })
    }

    pub fn d(&self) -> u32 {
        self.modulation.d
    }

    pub fn nu(&self) -> f64 {
        self.modulation.nu
    }

    pub fn frame(&self) -> FrameParams {
        FrameParams { d: self.d(), nu: self.nu(), zeta0: self.zeta0 }
    }

    /// `m_ε = m_w − Q̄_ν`.
    pub fn m_eps(&self) -> Vec<f64> {
        let p = self.frame();
        self.zeta.iter().zip(&self.m_w).map(|(z, m)| m - profile_at(*z, &p)).collect()
    }

    /// `(ξ, m_q)` with `ξ = (ζ−1)/ν` and `m_q(ξ) = m_ε(ζ)`.
    pub fn m_q(&self) -> (Vec<f64>, Vec<f64>) {
        let nu = self.nu();
        (self.zeta.iter().map(|z| (z - 1.0) / nu).collect(), self.m_eps())
    }

    /// Relative gap between the evolved ν and `R^{d−2}/M`.
    pub fn nu_drift(&self) -> f64 {
        let md = &self.modulation;
        let direct = md.r.powi(md.d as i32 - 2) / md.m;
        ((md.nu - direct) / direct).abs()
    }

    /// Pull back to physical variables: `r = Rζ`, `m = M m_w`.
    pub fn to_physical(&self) -> Result<PartialMassState> {
        let md = &self.modulation;
        PartialMassState::new(
            md.d,
            self.zeta.iter().map(|z| z * md.r).collect(),
            self.m_w.iter().map(|m| m * md.m).collect(),
            md.t,
        )
    }

    /// Renormalize a physical state in the frame `md`, onto `zeta` nodes.
    pub fn from_physical(state: &PartialMassState, md: ModulationState, zeta: Vec<f64>, zeta0: f64) -> Result<Self> {
        let p = Pchip::new(&state.r, &state.m)?;
        let mut m_w: Vec<f64> = zeta.iter().map(|z| p.eval(z * md.r) / md.m).collect();
        m_w[0] = 0.0;
        Self::new(zeta, m_w, md, zeta0)
    }
}

fn profile_at(zeta: f64, p: &FrameParams) -> f64 {
    if p.nu == 0.0 {
        // sharp-front limit
        return if zeta > 1.0 { 1.0 } else if zeta == 1.0 { 0.5 } else { 0.0 };
    }
    ring_profile(zeta, p.nu, p.zeta0)
}

/// ζ-grid on `[0, 4]`: spacing `ν h_ξ` for `|ζ−1| ≤ 1.5 ν ξ_{A,+}`, geometric
/// coarsening outside.
pub fn renormalized_grid(nu: f64, a: f64, h_xi: f64) -> Vec<f64> {
    let half = (1.5 * nu * xi_a_plus(nu, a)).min(0.9);
    let h = nu * h_xi;
    graded_mesh(0.0, ZETA_MAX, 1.0 - half, 1.0 + half, h, 1.05, (ZETA_MAX / 400.0).max(h))
}

/// Ring data `m_w = Q̄_ν` for `(M₀, R₀, λ₀)`, clocks at 0.
pub fn init_renormalized(d: u32, m0: f64, r0: f64, lambda0: f64, zeta0: f64, a: f64, h_xi: f64) -> Result<RenormalizedState> {
    if !(lambda0 > 0.0 && lambda0 < r0) {
        return Err(invalid("lambda0", format!("{lambda0} must lie in (0, R0)")));
    }
    let mut md = ModulationState::from_radius_mass(d, r0, m0, 0.0)?;
    md.nu = lambda0 / r0;
    md.lambda = lambda0;
    let zeta = renormalized_grid(md.nu, a, h_xi);
    let p = FrameParams { d, nu: md.nu, zeta0 };
    let m_w = zeta.iter().map(|z| profile_at(*z, &p)).collect();
    RenormalizedState::new(zeta, m_w, md, zeta0)
}

/// Random consistency case: `d ∈ {3, 4, 5}`, log-uniform `ν ∈ [1e−3, 5e−2]`,
/// `m_w = Q̄_ν` plus smooth bumps vanishing at ζ = 0, rates in `[−1, 1]²`.
pub fn sample_case<R: Rng>(rng: &mut R) -> Result<(RenormalizedState, Rates)> {
    let d = rng.gen_range(3..=5);
    let nu = (rng.gen_range((1e-3f64).ln()..=(5e-2f64).ln())).exp();
    let mut st = init_renormalized(d, rng.gen_range(10.0..=80.0), 1.0, nu, 0.25, 10.0, 0.1)?;
    let bumps: Vec<(f64, f64, f64)> = (0..rng.gen_range(1..=4))
        .map(|_| (rng.gen_range(0.5..=2.5), rng.gen_range(0.05..=0.5), rng.gen_range(-0.05..=0.05)))
        .collect();
    for (z, m) in st.zeta.iter().zip(st.m_w.iter_mut()) {
        *m += bumps.iter().map(|(c, w, amp)| amp * z * z * (-((z - c) / w).powi(2)).exp()).sum::<f64>();
    }
    Ok((st, Rates { a: rng.gen_range(-1.0..=1.0), b: rng.gen_range(-1.0..=1.0) }))
}

/// Pointwise `∂τ m_w` for given rates, using finite-difference jets.
pub fn tendency(state: &RenormalizedState, rates: OuterRates) -> Vec<f64> {
    let p = state.frame();
    let jets = fd_jets(&state.zeta, &state.m_w);
    let n = jets.len();
    (0..n)
        .map(|i| if i == 0 || i + 1 == n { 0.0 } else { formulas::phisfrsft_rhs(state.zeta[i], jets[i], &p, rates).v() })
        .collect()
}

/// One linearly implicit step of the renormalized equation
/// `∂τ m = (m ζ^{1−d} − ζ/2 + aζ) ∂ζ m + ν ζ^{d−1} ∂ζ(ζ^{1−d} ∂ζ m) − c m`
/// with `(a, c) = (R_τ/R + 1/2, M_τ/M)` held fixed over the step.
/// `R`, `M` and `ν` follow their exact exponential laws for those rates.
pub fn step_renormalized(state: &RenormalizedState, dtau: f64, rates: OuterRates) -> Result<RenormalizedState> {
    if !(dtau >= 0.0) {
        return Err(invalid("dtau", format!("{dtau} must be nonnegative")));
    }
    if !(rates.a.is_finite() && rates.c.is_finite()) {
        return Err(invalid("rates", format!("({}, {}) not finite", rates.a, rates.c)));
    }
    if dtau == 0.0 {
        return Ok(state.clone());
    }
    let (z, m) = (&state.zeta, &state.m_w);
    let n = z.len();
    let d = state.d();
    let dm1 = d as f64 - 1.0;
    let nu = state.nu();
    let mut sub = vec![0.0; n];
    let mut diag = vec![1.0; n];
    let mut sup = vec![0.0; n];
    let mut b = m.clone();
    for i in 1..n - 1 {
        let hm = z[i] - z[i - 1];
        let hp = z[i + 1] - z[i];
        let span = hm + hp;
        let c = m[i] * z[i].powi(1 - d as i32) - 0.5 * z[i] + rates.a * z[i] - nu * dm1 / z[i];
        let t = if nu > 0.0 {
            // Péclet check is against the diffusion ν
            let s = transport(c / nu, hm, hp);
            (s.lo * nu, s.mid * nu, s.hi * nu)
        } else if c > 0.0 {
            (0.0, -c / hp, c / hp)
        } else {
            (-c / hm, c / hm, 0.0)
        };
        let lo = nu * 2.0 / (hm * span) + t.0;
        let hi = nu * 2.0 / (hp * span) + t.2;
        let mid = -nu * 2.0 / (hm * hp) + t.1 - rates.c;
        sub[i] = -dtau * lo;
        diag[i] = 1.0 - dtau * mid;
        sup[i] = -dtau * hi;
    }
    // flat exterior at ζ_max: only the mass rescaling acts
    diag[n - 1] = 1.0 + dtau * rates.c;
    b[0] = 0.0;
    let m_new = thomas(&sub, &diag, &sup, &b);
    if let Some(i) = m_new.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite { step: i, t: state.modulation.t });
    }

    let old = state.modulation;
    let p = state.frame();
    let mut md = old;
    md.r = old.r * ((rates.a - 0.5) * dtau).exp();
    md.m = old.m * (rates.c * dtau).exp();
    md.nu = old.nu * (p.nu_tau_over_nu(rates) * dtau).exp();
    md.lambda = md.r * md.nu;
    let g0 = old.r.powi(d as i32) / old.m;
    let g1 = md.r.powi(d as i32) / md.m;
    md.t = old.t + dtau * log_mean(g0, g1);
    md.tau = old.tau + dtau;
    if old.nu > 0.0 {
        md.s = old.s + dtau * log_mean(1.0 / old.nu, 1.0 / md.nu);
    }
    Ok(RenormalizedState { zeta: state.zeta.clone(), m_w: m_new, modulation: md, zeta0: state.zeta0 })
}

/// Rates closing both orthogonality conditions for the current state, with
/// relaxation rate `gamma` in the inner clock.
pub fn closed_rates(state: &RenormalizedState, a: f64, gamma: f64) -> Result<OuterRates> {
    let (xi, m_q) = state.m_q();
    let r = close_rates_relaxed(&xi, &m_q, &state.frame(), a, gamma)?;
    Ok(r.outer(state.nu()))
}

/// Re-sample on a grid for the current ν, keeping the modulation.
pub fn regrid(state: &RenormalizedState, a: f64, h_xi: f64) -> Result<RenormalizedState> {
    let zeta = renormalized_grid(state.nu(), a, h_xi);
    let p = Pchip::new(&state.zeta, &state.m_w)?;
    let mut m_w = p.eval_many(&zeta);
    m_w[0] = 0.0;
    RenormalizedState::new(zeta, m_w, state.modulation, state.zeta0)
}

/// Re-solve the orthogonality conditions and re-sample on a grid for the
/// new ν. Clocks are kept.
pub fn regauge(state: &RenormalizedState, a: f64, h_xi: f64) -> Result<(RenormalizedState, Decomposition)> {
    let phys = state.to_physical()?;
    let dec = decompose(&phys, &state.modulation, a, state.zeta0)?;
    let mut md = dec.modulation;
    md.t = state.modulation.t;
    let zeta = renormalized_grid(md.nu, a, h_xi);
    Ok((RenormalizedState::from_physical(&phys, md, zeta, state.zeta0)?, dec))
}

#[derive(Clone, Debug, PartialEq)]
pub struct RenormalizedConfig {
    pub a: f64,
    pub h_xi: f64,
    /// Step in the inner clock; `dτ = ν ds`.
    pub ds: f64,
    pub record_dtau: f64,
    /// Regauge and regrid once ν falls below this fraction of the grid's ν.
    pub regrid_shrink: f64,
    pub eta: f64,
    /// Relaxation of the orthogonality conditions, per unit s.
    pub relax: f64,
}

impl Default for RenormalizedConfig {
    fn default() -> Self {
        Self { a: 10.0, h_xi: 0.05, ds: 1.0 / 40.0, record_dtau: 0.01, regrid_shrink: 0.85, eta: 0.05, relax: 0.5 }
    }
}

pub const RENORMALIZED_COLUMNS: [&str; 11] =
    ["t", "tau", "s", "R", "M", "lambda", "nu", "rate_R", "rate_M", "norm_in", "norm_bou"];

#[derive(Clone, Debug)]
pub struct RenormalizedRun {
    pub series: TimeSeries,
    pub state: RenormalizedState,
    pub steps: usize,
    pub regrids: usize,
    pub worst_nu_drift: f64,
}

/// Integrates over `duration` in τ with rates closed at every step.
pub fn run_renormalized(initial: &RenormalizedState, duration: f64, cfg: &RenormalizedConfig) -> Result<RenormalizedRun> {
    let mut state = initial.clone();
    let mut series = TimeSeries::new(&RENORMALIZED_COLUMNS);
    let tau_end = initial.modulation.tau + duration;
    let mut grid_nu = state.nu();
    let mut next_record = initial.modulation.tau;
    let mut run = RenormalizedRun { series: TimeSeries::default(), state: initial.clone(), steps: 0, regrids: 0, worst_nu_drift: 0.0 };
    loop {
        let rates = closed_rates(&state, cfg.a, cfg.relax)?;
        if state.modulation.tau >= next_record - 1e-12 {
            series.push(record_row(&state, rates, cfg));
            next_record += cfg.record_dtau;
        }
        let left = tau_end - state.modulation.tau;
        if left <= 1e-12 {
            break;
        }
        let dtau = (cfg.ds * state.nu()).min(left).min(next_record - state.modulation.tau);
        state = step_renormalized(&state, dtau, rates)?;
        run.steps += 1;
        run.worst_nu_drift = run.worst_nu_drift.max(state.nu_drift());
        if state.nu() < cfg.regrid_shrink * grid_nu {
            state = regrid(&state, cfg.a, cfg.h_xi)?;
            grid_nu = state.nu();
            run.regrids += 1;
        }
    }
    run.series = series;
    run.state = state;
    Ok(run)
}

fn record_row(state: &RenormalizedState, rates: OuterRates, cfg: &RenormalizedConfig) -> Vec<f64> {
    let md = &state.modulation;
    let n_in = crate::diagnostics::norm_in(state, cfg.a, 1e-3).unwrap_or(f64::NAN);
    let n_bou = crate::diagnostics::norm_bou(state, cfg.a).unwrap_or(f64::NAN);
    vec![md.t, md.tau, md.s, md.r, md.m, md.lambda, md.nu, rates.a, rates.c, n_in, n_bou]
}

// ---------------------------------------------------------------------------
// Burgers mode

/// Box for the Burgers mode, `ξ ∈ [−80, 80]`.
pub fn burgers_grid(h: f64) -> Result<WeightedGrid> {
    WeightedGrid::symmetric(80.0, h)
}

/// One step of `∂s f = ∂ξ²f + f∂ξf − ½∂ξf`: conservative centered flux
/// `f²/2 − f/2` explicit, diffusion implicit, ends pinned to 0 and 1.
pub fn step_burgers(grid: &WeightedGrid, f: &[f64], ds: f64) -> Result<Vec<f64>> {
    if !grid.is_uniform() {
        return Err(Error::DegenerateGrid("Burgers mode needs a uniform grid".into()));
    }
    let n = grid.len();
    if f.len() != n {
        return Err(Error::DegenerateGrid(format!("{} values on {} nodes", f.len(), n)));
    }
    let h = grid.spacing[0];
    let speed = f.iter().map(|v| (v - 0.5).abs()).fold(0.0, f64::max);
    let limit = h / speed.max(1e-300);
    if ds > limit {
        return Err(Error::Cfl { dt: ds, limit });
    }
    let flux: Vec<f64> = f.iter().map(|v| 0.5 * v * v - 0.5 * v).collect();
    let c = ds / (h * h);
    let mut sub = vec![0.0; n];
    let mut diag = vec![1.0; n];
    let mut sup = vec![0.0; n];
    let mut b = vec![0.0; n];
    b[n - 1] = 1.0;
    for i in 1..n - 1 {
        sub[i] = -c;
        sup[i] = -c;
        diag[i] = 1.0 + 2.0 * c;
        b[i] = f[i] + ds * (flux[i + 1] - flux[i - 1]) / (2.0 * h);
    }
    Ok(thomas(&sub, &diag, &sup, &b))
}

/// `‖f − Q‖_{L²ω₀}` on the grid.
pub fn burgers_deviation(grid: &WeightedGrid, f: &[f64]) -> f64 {
    let g: Vec<f64> = grid.nodes.iter().zip(f).map(|(x, v)| v - eval_q(*x)).collect();
    grid.norm(&g)
}

/// Shift `c` with `∫(f − Q) = c`, exact for `f = Q(· + c)`.
pub fn burgers_shift(grid: &WeightedGrid, f: &[f64]) -> f64 {
    let g: Vec<f64> = grid.nodes.iter().zip(f).map(|(x, v)| v - eval_q(*x)).collect();
    grid.integrate(&g)
}

/// Samples `(s, ‖f − Q‖_{L²ω₀}, sup|f − Q|)` every `every` steps.
pub fn run_burgers(grid: &WeightedGrid, f0: &[f64], ds: f64, s_end: f64, every: usize) -> Result<(Vec<f64>, Vec<[f64; 3]>)> {
    let mut f = f0.to_vec();
    let steps = (s_end / ds).round() as usize;
    let sup = |f: &[f64]| grid.nodes.iter().zip(f).map(|(x, v)| (v - eval_q(*x)).abs()).fold(0.0, f64::max);
    let mut out = vec![[0.0, burgers_deviation(grid, &f), sup(&f)]];
    for k in 1..=steps {
        f = step_burgers(grid, &f, ds)?;
        if k % every.max(1) == 0 || k == steps {
            out.push([k as f64 * ds, burgers_deviation(grid, &f), sup(&f)]);
        }
    }
    Ok((f, out))
}

/// Exponential decay rate from a log-linear fit of positive samples.
pub fn fit_decay_rate(s: &[f64], v: &[f64]) -> f64 {
    let (x, y): (Vec<f64>, Vec<f64>) = s.iter().zip(v).filter(|(_, v)| **v > 0.0).map(|(s, v)| (*s, v.ln())).unzip();
    if x.len() < 2 {
        return f64::NAN;
    }
    -linear_fit(&x, &y).0
}

/// Zero-mean perturbation `amp · ξ e^{−ξ²/8} / max`, orthogonal to ∂ξQ in L²ω₀.
pub fn burgers_perturbation(grid: &WeightedGrid, amp: f64) -> Vec<f64> {
    let raw = grid.sample(|x| x * (-x * x / 8.0).exp());
    let top = raw.iter().fold(0.0f64, |a, b| a.max(b.abs()));
    raw.iter().map(|v| amp * v / top).collect()
}

/// `ω₀` at the nodes.
pub fn omega_weights(grid: &WeightedGrid) -> Vec<f64> {
    grid.sample(eval_omega0)
}

// ---------------------------------------------------------------------------
// Consistency of the formulations

/// Worst relative discrepancies between equivalent right sides.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ConsistencyReport {
    /// m_v equation at `Q̄ + m_q` vs the m_q equation plus `∂s Q̄`.
    pub inner: f64,
    /// m_w equation at `Q̄_ν + m_ε` vs the m_ε equation plus `∂τ Q̄_ν`.
    pub outer: f64,
    /// Linear form on the right zone vs the m_ε equation.
    pub right: f64,
    pub left: f64,
    /// Derivative equation vs `∂ζ` of the linear form.
    pub derivative: f64,
    pub derivative_left: f64,
    /// Inner clock vs outer clock: `∂s m_v = ν ∂τ m_w + ξ ν_s ∂ζ m_w`.
    pub frames: f64,
    /// Same as `inner` with the generated error exactly as printed.
    pub psi_printed: f64,
}

impl ConsistencyReport {
    /// Largest discrepancy among the consistent formulations.
    pub fn max(&self) -> f64 {
        [self.inner, self.outer, self.right, self.left, self.derivative, self.derivative_left, self.frames]
            .into_iter()
            .fold(0.0, f64::max)
    }

    pub fn to_record(&self) -> Record {
        let mut r = Record::new();
        r.num("inner", self.inner)
            .num("outer", self.outer)
            .num("right", self.right)
            .num("left", self.left)
            .num("derivative", self.derivative)
            .num("derivative_left", self.derivative_left)
            .num("frames", self.frames)
            .num("psi_printed", self.psi_printed)
            .num("max", self.max());
        r
    }
}

#[derive(Default)]
struct Worst {
    diff: f64,
    scale: f64,
}

impl Worst {
    fn add(&mut self, lhs: f64, rhs: f64) {
        self.diff = self.diff.max((lhs - rhs).abs());
        self.scale = self.scale.max(lhs.abs()).max(rhs.abs());
    }
    fn rel(&self) -> f64 {
        if self.scale == 0.0 {
            0.0
        } else {
            self.diff / self.scale
        }
    }
}

/// Evaluates every formulation on the state's m_ε (jets by finite
/// differences) for the given inner rates. The identities are algebraic,
/// so the discrepancies are round-off whatever the jet accuracy.
pub fn equation_consistency(state: &RenormalizedState, rates: Rates, a: f64) -> ConsistencyReport {
    let p = state.frame();
    let nu = p.nu;
    let outer = rates.outer(nu);
    let eps = state.m_eps();
    let jets = fd_jets(&state.zeta, &eps);
    let wjets = fd_jets(&state.zeta, &state.m_w);
    let xa = if nu > 0.0 { xi_a_plus(nu, a) } else { f64::INFINITY };
    let mut w = [(); 8].map(|_| Worst::default());
    let n = state.zeta.len();
    for i in 1..n - 1 {
        let z = state.zeta[i];
        let m = jets[i];
        let mw = wjets[i];
        let lhs = formulas::phisfrsft_rhs(z, formulas::q_bar_nu(z, &p) + m, &p, outer).v();
        w[1].add(lhs, formulas::mep0_rhs(z, m, &p, outer).v() + formulas::q_bar_nu_tau(z, &p, outer).v());
        let mep0 = formulas::mep0_rhs(z, m, &p, outer);
        if z >= 2.0 * p.zeta0 {
            let mep = formulas::mep_rhs(z, m, &p, outer);
            w[2].add(mep.v(), mep0.v());
            w[4].add(formulas::mep1_rhs(z, m, &p, outer), mep.d1());
        }
        let mepl = formulas::mep_left_rhs(z, m, &p, outer);
        w[3].add(mepl.v(), mep0.v());
        w[5].add(formulas::mep1_left_rhs(z, m, &p, outer), mepl.d1());

        if nu > 0.0 {
            let xi = (z - 1.0) / nu;
            if xi.abs() > xa + 1.0 {
                continue;
            }
            let to_inner = |j: Jet| Jet([j.0[0], nu * j.0[1], nu * nu * j.0[2], nu.powi(3) * j.0[3]]);
            let mq = to_inner(m);
            let qb = formulas::q_bar_xi(xi, &p);
            let v = formulas::vxis_rhs(xi, qb + mq, &p, rates).v();
            let q_s = formulas::q_bar_s(xi, &p, rates).v();
            w[0].add(v, formulas::mqxis_rhs(xi, mq, &p, rates).v() + q_s);
            let printed = formulas::mqxis_rhs(xi, mq, &p, rates).v() - formulas::psi(xi, &p, rates).v()
                + formulas::psi_printed(xi, &p, rates).v();
            w[7].add(v, printed + q_s);
            let vw = formulas::vxis_rhs(xi, to_inner(mw), &p, rates).v();
            let ow = nu * formulas::phisfrsft_rhs(z, mw, &p, outer).v() + xi * p.nu_s(rates) * mw.d1();
            w[6].add(vw, ow);
        }
    }
    ConsistencyReport {
        inner: w[0].rel(),
        outer: w[1].rel(),
        right: w[2].rel(),
        left: w[3].rel(),
        derivative: w[4].rel(),
        derivative_left: w[5].rel(),
        frames: w[6].rel(),
        psi_printed: w[7].rel(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_resolves_the_inner_zone() {
        let z = renormalized_grid(0.02, 10.0, 0.05);
        assert_eq!(z[0], 0.0);
        assert_eq!(*z.last().unwrap(), ZETA_MAX);
        let i = z.partition_point(|v| *v < 1.0);
        assert!((z[i + 1] - z[i] - 0.001).abs() < 1e-6);
    }

    #[test]
    fn zero_step_is_identity() {
        let s = init_renormalized(3, 40.0, 1.0, 0.025, 0.25, 10.0, 0.1).unwrap();
        assert_eq!(step_renormalized(&s, 0.0, OuterRates::default()).unwrap(), s);
    }

    #[test]
    fn profile_views_are_consistent() {
        let s = init_renormalized(3, 40.0, 1.0, 0.025, 0.25, 10.0, 0.1).unwrap();
        assert!(s.m_eps().iter().all(|v| v.abs() < 1e-15));
        let (xi, mq) = s.m_q();
        assert_eq!(xi.len(), mq.len());
        assert!(s.nu_drift() < 1e-15);
    }
}

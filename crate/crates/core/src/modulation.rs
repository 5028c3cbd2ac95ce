//! Ring parameters: detection, orthogonality-based decomposition, rate
//! closure and the blow-up law fit.

use crate::error::{invalid, Error, Result};
use crate::grid::fd_jets;
use crate::interp::linear;
use crate::jet::Jet;
use crate::operators::formulas::mqxis_rhs;
use crate::operators::{FrameParams, Rates};
use crate::physical::{density_of, linear_fit, PartialMassState};
use crate::profiles::{chi0, chi_a, eval_w, q_bar};
use crate::record::Record;
use crate::series::{log_mean, TimeSeries};

/// Full width at half maximum of W, in ξ units: `8 arccosh(√2)`.
pub fn w_half_width() -> f64 {
    8.0 * std::f64::consts::SQRT_2.acosh()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModulationState {
    pub d: u32,
    pub r: f64,
    pub m: f64,
    pub nu: f64,
    pub lambda: f64,
    pub t: f64,
    pub tau: f64,
    pub s: f64,
}

impl ModulationState {
    pub fn from_radius_mass(d: u32, r: f64, m: f64, t: f64) -> Result<Self> {
        if !(r > 0.0 && m > 0.0) {
            return Err(invalid("R, M", format!("({r}, {m}) must be positive")));
        }
        let nu = r.powi(d as i32 - 2) / m;
        Ok(Self { d, r, m, nu, lambda: r * nu, t, tau: 0.0, s: 0.0 })
    }

    pub fn frame(&self, zeta0: f64) -> FrameParams {
        FrameParams { d: self.d, nu: self.nu, zeta0 }
    }

    pub fn xi_of(&self, r: f64) -> f64 {
        (r / self.r - 1.0) / self.nu
    }

    pub fn to_record(&self) -> Record {
        let mut rec = Record::new();
        rec.int("d", self.d as i64)
            .num("R", self.r)
            .num("M", self.m)
            .num("nu", self.nu)
            .num("lambda", self.lambda)
            .num("t", self.t)
            .num("tau", self.tau)
            .num("s", self.s);
        rec
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RingEstimate {
    pub r: f64,
    pub lambda: f64,
    pub mass: f64,
    pub umax: f64,
    pub multimodal: bool,
}

/// Ring center and width from the peak and half-max width of the radial
/// mass density `∂r m = r^{d−1}u` (exactly W-shaped on profile data), mass
/// from `m(R + 25λ) − m(R − 25λ)`.
pub fn detect_ring(state: &PartialMassState) -> Result<RingEstimate> {
    let dens = density_of(state);
    let r = &state.r;
    let u: Vec<f64> = r.iter().zip(&dens).map(|(r, v)| v * r.powi(state.d as i32 - 1)).collect();
    let n = u.len();
    let (imax, umax) = u.iter().enumerate().fold((0, f64::NEG_INFINITY), |acc, (i, v)| if *v > acc.1 { (i, *v) } else { acc });
    if imax == 0 || imax + 1 >= n || !(umax > 0.0) || u[0] >= umax {
        return Err(Error::NoRing);
    }
    // parabola through the top three samples
    let (x0, x1, x2) = (r[imax - 1], r[imax], r[imax + 1]);
    let (y0, y1, y2) = (u[imax - 1], u[imax], u[imax + 1]);
    let den = (x0 - x1) * (x0 - x2) * (x1 - x2);
    let a = (x2 * (y1 - y0) + x1 * (y0 - y2) + x0 * (y2 - y1)) / den;
    let b = (x2 * x2 * (y0 - y1) + x1 * x1 * (y2 - y0) + x0 * x0 * (y1 - y2)) / den;
    let center = if a < 0.0 { (-b / (2.0 * a)).clamp(x0, x2) } else { x1 };

    let half = 0.5 * umax;
    let mut il = imax;
    while il > 0 && u[il] > half {
        il -= 1;
    }
    let mut ir = imax;
    while ir + 1 < n && u[ir] > half {
        ir += 1;
    }
    if u[il] > half || u[ir] > half {
        return Err(Error::NoRing);
    }
    let cross = |i: usize, j: usize| r[i] + (half - u[i]) * (r[j] - r[i]) / (u[j] - u[i]);
    let left = cross(il, il + 1);
    let right = cross(ir, ir - 1);
    let lambda = (right - left) / w_half_width();
    let lo = (center - 25.0 * lambda).max(0.0);
    let hi = (center + 25.0 * lambda).min(state.r_max());
    let mass = linear(r, &state.m, hi) - linear(r, &state.m, lo);

    // another peak above a tenth of the maximum, separated by a dip below half its height
    let umax = dens.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut multimodal = false;
    for side in [(0..il).rev().collect::<Vec<_>>(), (ir..n).collect()] {
        let mut low = f64::INFINITY;
        for i in side {
            low = low.min(u[i]);
            if u[i] > 0.1 * u[imax] && low < 0.5 * u[i] {
                multimodal = true;
            }
        }
    }
    Ok(RingEstimate { r: center, lambda, mass, umax, multimodal })
}

#[derive(Clone, Debug, PartialEq)]
pub struct Decomposition {
    pub modulation: ModulationState,
    pub xi: Vec<f64>,
    pub m_q: Vec<f64>,
    pub g1: f64,
    pub g2: f64,
    pub iterations: usize,
}

/// `ξ_{A,+} = 4|log ν| + A`.
pub fn xi_a_plus(nu: f64, a: f64) -> f64 {
    4.0 * nu.ln().abs() + a
}

/// Trapezoid of `f` over the (nonuniform) `x` nodes.
fn trap(x: &[f64], f: &[f64]) -> f64 {
    x.windows(2).zip(f.windows(2)).map(|(x, f)| 0.5 * (x[1] - x[0]) * (f[0] + f[1])).sum()
}

/// Orthogonality functionals `(G₁, G₂)` for a candidate `(R, M)`.
pub fn orthogonality(state: &PartialMassState, r: f64, m: f64, a: f64, zeta0: f64) -> (f64, f64) {
    let d = state.d as i32;
    let nu = r.powi(d - 2) / m;
    let xa = xi_a_plus(nu, a);
    let lo = -2.0 * a;
    let hi = (2.0 * a).max(xa + 2.0);
    let mut xs = Vec::new();
    let mut f1 = Vec::new();
    let mut f2 = Vec::new();
    for (ri, mi) in state.r.iter().zip(&state.m) {
        let xi = (ri / r - 1.0) / nu;
        if xi < lo - 1.0 || xi > hi + 1.0 {
            continue;
        }
        let q = mi / m - q_bar(Jet::constant(xi), nu, zeta0).v();
        xs.push(xi);
        f1.push(chi_a(Jet::constant(xi), a, 0.0).v() * q);
        f2.push(chi0(Jet::constant(xi - xa)).v() * q);
    }
    if xs.len() < 2 {
        return (f64::NAN, f64::NAN);
    }
    (trap(&xs, &f1), trap(&xs, &f2))
}

/// Newton solve of `G₁ = G₂ = 0` in `(log R, log M)`. A guess whose windows
/// miss the ring is replaced by the [`detect_ring`] estimate.
pub fn decompose(state: &PartialMassState, guess: &ModulationState, a: f64, zeta0: f64) -> Result<Decomposition> {
    match newton(state, guess, a, zeta0) {
        Ok(dc) => Ok(dc),
        Err(first) => {
            let Ok(ring) = detect_ring(state) else { return Err(first) };
            let mut g = ModulationState::from_radius_mass(state.d, ring.r, ring.mass, guess.t)?;
            g.tau = guess.tau;
            g.s = guess.s;
            newton(state, &g, a, zeta0).map_err(|_| first)
        }
    }
}

fn newton(state: &PartialMassState, guess: &ModulationState, a: f64, zeta0: f64) -> Result<Decomposition> {
    let d = state.d;
    let g = |x: [f64; 2]| orthogonality(state, x[0].exp(), x[1].exp(), a, zeta0);
    let norm = |v: (f64, f64)| v.0.abs().max(v.1.abs());
    let mut x = [guess.r.ln(), guess.m.ln()];
    let mut gx = g(x);
    if !norm(gx).is_finite() {
        return Err(Error::NoRing);
    }
    let h = 1e-6;
    let mut iterations = 0;
    let mut converged = false;
    while iterations < 25 {
        iterations += 1;
        let gr = g([x[0] + h, x[1]]);
        let gm = g([x[0], x[1] + h]);
        let j = [[(gr.0 - gx.0) / h, (gm.0 - gx.0) / h], [(gr.1 - gx.1) / h, (gm.1 - gx.1) / h]];
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        let scale = j.iter().flatten().map(|v| v * v).sum::<f64>();
        let rcond = det.abs() / scale;
        if !(rcond >= 1e-10) {
            return Err(Error::IllConditioned { rcond });
        }
        let dx = [(j[1][1] * gx.0 - j[0][1] * gx.1) / det, (j[0][0] * gx.1 - j[1][0] * gx.0) / det];
        let mut t = 1.0;
        let mut trial = [x[0] - dx[0], x[1] - dx[1]];
        let mut gt = g(trial);
        let mut halvings = 0;
        while !(norm(gt) <= norm(gx)) && halvings < 30 {
            t *= 0.5;
            trial = [x[0] - t * dx[0], x[1] - t * dx[1]];
            gt = g(trial);
            halvings += 1;
        }
        let step = (t * dx[0]).abs().max((t * dx[1]).abs());
        x = trial;
        gx = gt;
        if step <= 1e-14 || norm(gx) <= 1e-15 {
            converged = true;
            break;
        }
    }
    if !converged && !(norm(gx) <= 1e-12) {
        return Err(Error::NewtonDiverged { iterations, residual: norm(gx) });
    }
    let mut md = ModulationState::from_radius_mass(d, x[0].exp(), x[1].exp(), state.t)?;
    md.tau = guess.tau;
    md.s = guess.s;
    let xi: Vec<f64> = state.r.iter().map(|r| md.xi_of(*r)).collect();
    let m_q = xi
        .iter()
        .zip(&state.m)
        .map(|(xi, m)| if *xi <= -1.0 / md.nu { m / md.m } else { m / md.m - q_bar(Jet::constant(*xi), md.nu, zeta0).v() })
        .collect();
    Ok(Decomposition { modulation: md, xi, m_q, g1: gx.0, g2: gx.1, iterations })
}

/// `(R, M)` returned by [`decompose`] for each cutoff scale A.
pub fn a_sensitivity(state: &PartialMassState, guess: &ModulationState, a_values: &[f64], zeta0: f64) -> Result<Vec<(f64, f64, f64)>> {
    a_values.iter().map(|a| decompose(state, guess, *a, zeta0).map(|dc| (*a, dc.modulation.r, dc.modulation.m))).collect()
}

/// Time derivatives `(dG₁/ds, dG₂/ds)` along the inner equation for given
/// rates, including the motion of the second window with `ξ_{A,+}`.
pub fn projected_rates(xi: &[f64], m_q: &[f64], p: &FrameParams, a: f64, r: Rates) -> (f64, f64) {
    let jets = fd_jets(xi, m_q);
    let xa = xi_a_plus(p.nu, a);
    let drift = 4.0 * p.nu_s(r) / p.nu;
    let mut f1 = Vec::with_capacity(xi.len());
    let mut f2 = Vec::with_capacity(xi.len());
    for (x, mq) in xi.iter().zip(&jets) {
        let w1 = chi_a(Jet::constant(*x), a, 0.0).v();
        let c2 = chi0(Jet::var(x - xa));
        if w1 == 0.0 && c2.v() == 0.0 && c2.d1() == 0.0 {
            f1.push(0.0);
            f2.push(0.0);
            continue;
        }
        let rhs = mqxis_rhs(*x, *mq, p, r).v();
        f1.push(w1 * rhs);
        f2.push(c2.v() * rhs + drift * c2.d1() * mq.v());
    }
    (trap(xi, &f1), trap(xi, &f2))
}

/// Rates `(a, b)` that keep both orthogonality conditions stationary.
pub fn close_rates(xi: &[f64], m_q: &[f64], p: &FrameParams, a: f64) -> Result<Rates> {
    close_rates_relaxed(xi, m_q, p, a, 0.0)
}

/// `(G₁, G₂)` of an inner remainder sampled at `xi`.
pub fn orthogonality_of(xi: &[f64], m_q: &[f64], nu: f64, a: f64) -> (f64, f64) {
    let xa = xi_a_plus(nu, a);
    let f1: Vec<f64> = xi.iter().zip(m_q).map(|(x, m)| chi_a(Jet::constant(*x), a, 0.0).v() * m).collect();
    let f2: Vec<f64> = xi.iter().zip(m_q).map(|(x, m)| chi0(Jet::constant(x - xa)).v() * m).collect();
    (trap(xi, &f1), trap(xi, &f2))
}

/// Rates with `dG/ds = −γ G`, so that drift of the orthogonality
/// conditions decays instead of accumulating. `γ = 0` is [`close_rates`].
pub fn close_rates_relaxed(xi: &[f64], m_q: &[f64], p: &FrameParams, a: f64, gamma: f64) -> Result<Rates> {
    let p0 = projected_rates(xi, m_q, p, a, Rates { a: 0.0, b: 0.0 });
    let pa = projected_rates(xi, m_q, p, a, Rates { a: 1.0, b: 0.0 });
    let pb = projected_rates(xi, m_q, p, a, Rates { a: 0.0, b: 1.0 });
    let j = [[pa.0 - p0.0, pb.0 - p0.0], [pa.1 - p0.1, pb.1 - p0.1]];
    let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
    let scale = j.iter().flatten().map(|v| v * v).sum::<f64>();
    let rcond = det.abs() / scale;
    if !(rcond >= 1e-12) {
        return Err(Error::IllConditioned { rcond });
    }
    let g = if gamma == 0.0 { (0.0, 0.0) } else { orthogonality_of(xi, m_q, p.nu, a) };
    let t0 = p0.0 + gamma * g.0;
    let t1 = p0.1 + gamma * g.1;
    let ra = (-t0 * j[1][1] + t1 * j[0][1]) / det;
    let rb = (-t1 * j[0][0] + t0 * j[1][0]) / det;
    Ok(Rates { a: ra, b: rb })
}

/// Worst `|λ∂r m/M − W(ξ)|/W(0)` over nodes with `|ξ| ≤ half_width`.
pub fn profile_defect(state: &PartialMassState, md: &ModulationState, half_width: f64) -> f64 {
    let dm = crate::grid::derivative(&state.r, &state.m);
    let w0 = eval_w(0.0);
    state
        .r
        .iter()
        .zip(&dm)
        .filter_map(|(r, g)| {
            let xi = md.xi_of(*r);
            (xi.abs() <= half_width).then(|| (g * md.lambda / md.m - eval_w(xi)).abs() / w0)
        })
        .fold(0.0, f64::max)
}

#[derive(Clone, Debug, PartialEq)]
pub struct BlowupFit {
    pub t_blowup: f64,
    pub m_inf: f64,
    pub r_tilde_inf: f64,
    pub nu_tilde_inf: f64,
    /// RMS relative residual of `R^d = α(T − t)`.
    pub resid_r: f64,
    /// Relative standard deviation of M over the window.
    pub resid_m: f64,
    /// Fitted α in `R^d = α(T − t)`.
    pub prefactor: f64,
    /// `α / ((d/2) M∞)`.
    pub law_ratio: f64,
    /// `max/min − 1` of `R^d/(T − t)` over the window.
    pub ratio_spread: f64,
    /// Worst `|R^d/(T − t) / ((d/2)M∞) − 1|` over the window.
    pub law_worst: f64,
    /// `(max M − min M)/M∞` over the window.
    pub m_drift: f64,
    /// Slope of log ν against τ.
    pub nu_slope: f64,
    /// Slope of log R against τ.
    pub r_slope: f64,
    pub decades: f64,
    pub window_start: f64,
    pub points: usize,
}

impl BlowupFit {
    /// `(d/2)^{1/d}`.
    pub fn c_d(d: u32) -> f64 {
        (d as f64 / 2.0).powf(1.0 / d as f64)
    }

    pub fn to_record(&self) -> Record {
        let mut r = Record::new();
        r.num("T", self.t_blowup)
            .num("M_inf", self.m_inf)
            .num("R_tilde_inf", self.r_tilde_inf)
            .num("nu_tilde_inf", self.nu_tilde_inf)
            .num("resid_R", self.resid_r)
            .num("resid_M", self.resid_m)
            .num("prefactor", self.prefactor)
            .num("law_ratio", self.law_ratio)
            .num("ratio_spread", self.ratio_spread)
            .num("law_worst", self.law_worst)
            .num("M_drift", self.m_drift)
            .num("nu_slope", self.nu_slope)
            .num("R_slope", self.r_slope)
            .num("decades", self.decades)
            .num("window_start", self.window_start)
            .int("points", self.points as i64);
        r
    }
}

/// Fits the blow-up law on the final decade of λ (rows with
/// `λ ≤ λ_max/10`). The series needs columns t, R, M; τ is integrated from
/// `dτ = (M/R^d) dt` when absent.
pub fn fit_blowup_law(series: &TimeSeries, d: u32) -> Result<BlowupFit> {
    let col = |n: &str| series.column(n).ok_or_else(|| Error::InsufficientData(format!("missing column {n}")));
    let t = col("t")?;
    let r = col("R")?;
    let m = col("M")?;
    let di = d as i32;
    let lambda: Vec<f64> = match series.column("lambda") {
        Some(l) => l,
        None => r.iter().zip(&m).map(|(r, m)| r.powi(di - 1) / m).collect(),
    };
    let tau: Vec<f64> = match series.column("tau") {
        Some(v) => v,
        None => {
            let g: Vec<f64> = r.iter().zip(&m).map(|(r, m)| r.powi(di) / m).collect();
            let mut tau = vec![0.0; t.len()];
            for i in 1..t.len() {
                tau[i] = tau[i - 1] + (t[i] - t[i - 1]) / log_mean(g[i - 1], g[i]);
            }
            tau
        }
    };
    let lmax = lambda.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let lmin = lambda.iter().cloned().fold(f64::INFINITY, f64::min);
    let decades = (lmax / lmin).log10();
    if t.len() < 8 || !(decades >= 1.5) {
        return Err(Error::InsufficientData(format!("{} rows spanning {decades:.2} decades of lambda", t.len())));
    }
    let idx: Vec<usize> = (0..t.len()).filter(|i| lambda[*i] <= lmax / 10.0).collect();
    if idx.len() < 5 {
        return Err(Error::InsufficientData(format!("{} rows in the final decade", idx.len())));
    }
    let tw: Vec<f64> = idx.iter().map(|i| t[*i]).collect();
    let rd: Vec<f64> = idx.iter().map(|i| r[*i].powi(di)).collect();
    let mw: Vec<f64> = idx.iter().map(|i| m[*i]).collect();

    // R^d = p0 + p1 t with relative weights 1/R^{2d}
    let (mut s00, mut s01, mut s11, mut b0, mut b1) = (0.0, 0.0, 0.0, 0.0, 0.0);
    let t0 = tw[0];
    for (ti, yi) in tw.iter().zip(&rd) {
        let w = 1.0 / (yi * yi);
        let x = ti - t0;
        s00 += w;
        s01 += w * x;
        s11 += w * x * x;
        b0 += w * yi;
        b1 += w * x * yi;
    }
    let det = s00 * s11 - s01 * s01;
    let p0 = (s11 * b0 - s01 * b1) / det;
    let p1 = (s00 * b1 - s01 * b0) / det;
    if !(p1 < 0.0) {
        return Err(Error::InsufficientData("R^d is not decreasing over the fit window".into()));
    }
    let alpha = -p1;
    let t_blowup = t0 + p0 / alpha;
    let resid_r = (tw.iter().zip(&rd).map(|(ti, yi)| ((yi - (p0 + p1 * (ti - t0))) / yi).powi(2)).sum::<f64>() / tw.len() as f64).sqrt();

    let k = mw.len() as f64;
    let m_inf = mw.iter().sum::<f64>() / k;
    let resid_m = (mw.iter().map(|v| (v - m_inf).powi(2)).sum::<f64>() / k).sqrt() / m_inf;
    let m_drift = (mw.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - mw.iter().cloned().fold(f64::INFINITY, f64::min)) / m_inf;
    let ideal = d as f64 / 2.0 * m_inf;
    let ratios: Vec<f64> = tw.iter().zip(&rd).filter(|(ti, _)| **ti < t_blowup).map(|(ti, yi)| yi / (t_blowup - ti)).collect();
    let rmax = ratios.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let rmin = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
    let law_worst = ratios.iter().map(|q| (q / ideal - 1.0).abs()).fold(0.0, f64::max);

    let tau_w: Vec<f64> = idx.iter().map(|i| tau[*i]).collect();
    let log_r: Vec<f64> = idx.iter().map(|i| r[*i].ln()).collect();
    let log_nu: Vec<f64> = idx.iter().map(|i| (r[*i].powi(di - 2) / m[*i]).ln()).collect();
    let (r_slope, _) = linear_fit(&tau_w, &log_r);
    let (nu_slope, _) = linear_fit(&tau_w, &log_nu);
    let r_tilde_inf = (log_r.iter().zip(&tau_w).map(|(l, t)| l + t / 2.0).sum::<f64>() / k).exp();
    Ok(BlowupFit {
        t_blowup,
        m_inf,
        r_tilde_inf,
        nu_tilde_inf: r_tilde_inf.powi(di - 2) / m_inf,
        resid_r,
        resid_m,
        prefactor: alpha,
        law_ratio: alpha / ideal,
        ratio_spread: if ratios.is_empty() { f64::INFINITY } else { rmax / rmin - 1.0 },
        law_worst: if ratios.is_empty() { f64::INFINITY } else { law_worst },
        m_drift,
        nu_slope,
        r_slope,
        decades,
        window_start: tw[0],
        points: idx.len(),
    })
}

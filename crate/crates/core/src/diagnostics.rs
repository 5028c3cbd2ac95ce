//! Norms of the remainder, bootstrap membership, exterior barrier audits and
//! the inner Lyapunov monitor.

use crate::error::{invalid, Error, Result};
use crate::grid::{derivative, derivatives, trapezoid, WeightedGrid};
use crate::interp::Pchip;
use crate::jet::Jet;
use crate::operators::formulas::{a1_left, a1_right, FrameParams};
use crate::operators::assemble_l0;
use crate::profiles::{barrier_jets, chi_a, chi_hat, chi_in, BarrierParams, GeometryScales, Side};
use crate::record::Record;
use crate::renormalized::RenormalizedState;
use crate::series::TimeSeries;
use crate::spectral::{dirichlet_form, l0_form};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BootstrapConstants {
    pub a: f64,
    pub k: f64,
    pub kappa: f64,
    pub eta: f64,
    pub m0: f64,
}

impl BootstrapConstants {
    /// Requires `e^{3A/10} ≤ K ≤ e^{A/2}`.
    pub fn new(a: f64, k: f64, kappa: f64, eta: f64, m0: f64) -> Result<Self> {
        for (name, v) in [("A", a), ("K", k), ("kappa", kappa), ("eta", eta), ("M0", m0)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(invalid(name, format!("{v} must be positive")));
            }
        }
        let (lo, hi) = Self::k_window(a);
        // tolerate round-off at the window edges
        if k < lo * (1.0 - 1e-12) || k > hi * (1.0 + 1e-12) {
            return Err(invalid("K", format!("{k} is outside [e^(3A/10), e^(A/2)] = [{lo}, {hi}]")));
        }
        Ok(Self { a, k, kappa, eta, m0 })
    }

    /// `K = e^{2A/5}`.
    pub fn with_default_k(a: f64, kappa: f64, eta: f64, m0: f64) -> Result<Self> {
        Self::new(a, (0.4 * a).exp(), kappa, eta, m0)
    }

    pub fn k_window(a: f64) -> (f64, f64) {
        ((0.3 * a).exp(), (0.5 * a).exp())
    }

    pub fn barrier(&self, d: u32) -> BarrierParams {
        BarrierParams::new(d, self.k, self.kappa)
    }
}

// ---------------------------------------------------------------------------
// Norms

/// `−∫ m 𝓛₀ m ω₀` on a grid, for `m` vanishing at both ends. Negative
/// values below `−1e−12` times the Dirichlet energy are an error.
pub fn inner_form(grid: &WeightedGrid, m: &[f64]) -> Result<f64> {
    let op = assemble_l0(grid)?;
    let form = -l0_form(grid, &op, m);
    let scale = dirichlet_form(grid, m);
    if form < -1e-12 * scale.max(1e-300) {
        return Err(Error::NegativeForm(form));
    }
    Ok(form.max(0.0))
}

/// `∫|∂ξm|²ω₀ − ∫m²Q'ω₀` by the same quadrature as [`inner_form`].
pub fn inner_form_split(grid: &WeightedGrid, m: &[f64]) -> f64 {
    let qp: f64 = grid
        .nodes
        .iter()
        .zip(m)
        .zip(&grid.weights)
        .map(|((x, v), w)| w * v * v * crate::profiles::eval_w(*x))
        .sum();
    dirichlet_form(grid, m) - qp
}

/// `∫χ_A m_q dξ` by the trapezoid rule on the given ξ nodes.
pub fn first_orthogonality(xi: &[f64], m_q: &[f64], a: f64) -> f64 {
    let f: Vec<f64> = xi.iter().zip(m_q).map(|(x, v)| chi_a(Jet::constant(*x), a, 0.0).v() * v).collect();
    trapezoid(xi, &f)
}

/// Uniform analysis grid over the support of `χ^in` with spacing `h`.
pub fn inner_grid(scales: &GeometryScales, h: f64) -> Result<WeightedGrid> {
    WeightedGrid::uniform(scales.xi_a_minus() - 1.0, scales.xi_a_plus() + 1.0, h)
}

/// `χ^in m` sampled on `grid` from data on arbitrary ξ nodes.
pub fn localized(grid: &WeightedGrid, xi: &[f64], m_q: &[f64], scales: &GeometryScales) -> Result<Vec<f64>> {
    let p = Pchip::new(xi, m_q)?;
    let mut out: Vec<f64> = grid.nodes.iter().map(|x| chi_in(Jet::constant(*x), scales).v() * p.eval(*x)).collect();
    let n = out.len();
    out[0] = 0.0;
    out[n - 1] = 0.0;
    Ok(out)
}

fn state_scales(state: &RenormalizedState, a: f64) -> Result<GeometryScales> {
    GeometryScales::new(state.nu(), a, state.zeta0, 0.05)
}

fn inner_spacing(state: &RenormalizedState) -> f64 {
    let nu = state.nu();
    let z = &state.zeta;
    let i = z.partition_point(|v| *v < 1.0).clamp(1, z.len() - 1);
    (z[i] - z[i - 1]) / nu
}

fn norm_in_unchecked(state: &RenormalizedState, a: f64) -> Result<f64> {
    let scales = state_scales(state, a)?;
    let grid = inner_grid(&scales, inner_spacing(state))?;
    let (xi, m_q) = state.m_q();
    let m_in = localized(&grid, &xi, &m_q, &scales)?;
    Ok(inner_form(&grid, &m_in)?.sqrt())
}

/// `‖m_q‖_in = (−∫ m_q^in 𝓛₀ m_q^in ω₀)^{1/2}` with `m_q^in = χ^in m_q`.
/// Fails when `|∫χ_A m_q| > g1_tol`.
pub fn norm_in(state: &RenormalizedState, a: f64, g1_tol: f64) -> Result<f64> {
    let (xi, m_q) = state.m_q();
    let g1 = first_orthogonality(&xi, &m_q, a);
    if !(g1.abs() <= g1_tol) {
        return Err(Error::OrthogonalityViolated { g1: g1.abs(), tol: g1_tol });
    }
    norm_in_unchecked(state, a)
}

/// `sup|m_ε| + ν sup|∂ζ m_ε|` over the collars `[ζ_{A,±} − 2ν, ζ_{A,±} + 2ν]`,
/// on the nodes inside them.
pub fn norm_bou_of(zeta: &[f64], m_eps: &[f64], scales: &GeometryScales) -> Result<f64> {
    let nu = scales.nu;
    let collars = [
        (scales.zeta_a_minus() - 2.0 * nu, scales.zeta_a_minus() + 2.0 * nu),
        (scales.zeta_a_plus() - 2.0 * nu, scales.zeta_a_plus() + 2.0 * nu),
    ];
    let (lo, hi) = (zeta[0], zeta[zeta.len() - 1]);
    for (a, b) in collars {
        if a < lo || b > hi {
            return Err(Error::CollarOutsideGrid { lo: a, hi: b });
        }
    }
    let dm = derivative(zeta, m_eps);
    let mut sup_m: f64 = 0.0;
    let mut sup_d: f64 = 0.0;
    for (i, z) in zeta.iter().enumerate() {
        if collars.iter().any(|(a, b)| z >= a && z <= b) {
            sup_m = sup_m.max(m_eps[i].abs());
            sup_d = sup_d.max(dm[i].abs());
        }
    }
    Ok(sup_m + nu * sup_d)
}

pub fn norm_bou(state: &RenormalizedState, a: f64) -> Result<f64> {
    norm_bou_of(&state.zeta, &state.m_eps(), &state_scales(state, a)?)
}

// ---------------------------------------------------------------------------
// Bootstrap

/// Smallest relative margin of one inequality family and where it occurs.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Margin {
    /// `min (bound − value)/bound`; positive means the strict inequality holds.
    pub margin: f64,
    pub at: f64,
}

impl Margin {
    pub fn pass(&self) -> bool {
        self.margin > 0.0
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BootstrapReport {
    pub radius: Margin,
    pub mass: Margin,
    pub exterior_right: Margin,
    pub exterior_left: Margin,
    pub inner: Margin,
    pub norm_in: f64,
    pub g1: f64,
}

impl BootstrapReport {
    pub fn pass(&self) -> bool {
        [self.radius, self.mass, self.exterior_right, self.exterior_left, self.inner].iter().all(Margin::pass)
    }

    /// The failing (or tightest) family.
    pub fn worst(&self) -> (&'static str, Margin) {
        [
            ("MR_radius", self.radius),
            ("MR_mass", self.mass),
            ("exterior_right", self.exterior_right),
            ("exterior_left", self.exterior_left),
            ("inner", self.inner),
        ]
        .into_iter()
        .min_by(|a, b| a.1.margin.total_cmp(&b.1.margin))
        .unwrap()
    }

    pub fn to_record(&self) -> Record {
        let mut r = Record::new();
        for (k, m) in [
            ("MR_radius", self.radius),
            ("MR_mass", self.mass),
            ("exterior_right", self.exterior_right),
            ("exterior_left", self.exterior_left),
            ("inner", self.inner),
        ] {
            r.num(&format!("{k}_margin"), m.margin).num(&format!("{k}_at"), m.at).flag(&format!("{k}_pass"), m.pass());
        }
        let (name, _) = self.worst();
        r.num("norm_in", self.norm_in).num("g1", self.g1).text("worst", name).flag("pass", self.pass());
        r
    }
}

fn bracket_margin(v: f64, lo: f64, hi: f64) -> Margin {
    Margin { margin: (v / lo).ln().min((hi / v).ln()), at: v }
}

/// Evaluates the four bootstrap families at the state's τ.
pub fn bootstrap_check(state: &RenormalizedState, consts: &BootstrapConstants) -> Result<BootstrapReport> {
    let md = &state.modulation;
    let d = md.d;
    let tau = md.tau;
    let scales = GeometryScales::new(state.nu(), consts.a, state.zeta0, consts.eta)?;
    let decay = (-consts.kappa * tau).exp();
    let radius = bracket_margin(md.r, 0.25 * (-tau / 2.0).exp(), 4.0 * (-tau / 2.0).exp());
    let mass = bracket_margin(md.m, consts.m0 / 4.0, 4.0 * consts.m0);

    let eps = state.m_eps();
    let dm = derivative(&state.zeta, &eps);
    let k54 = consts.k.powf(1.25);
    let nu = scales.nu;
    let mut right = Margin { margin: f64::INFINITY, at: f64::NAN };
    let mut left = Margin { margin: f64::INFINITY, at: f64::NAN };
    for (z, g) in state.zeta.iter().zip(&dm) {
        let z = *z;
        if z <= 0.0 {
            continue;
        }
        let hat = chi_hat(Jet::constant(z), consts.eta).v();
        let zd = z.powi(d as i32 - 1);
        if z >= scales.zeta_plus() {
            let bound = decay * (k54 * (-0.375 * (z - scales.zeta_plus()) / nu).exp() * hat + zd);
            let m = (bound - g.abs()) / bound;
            if m < right.margin {
                right = Margin { margin: m, at: z };
            }
        }
        if z <= scales.zeta_minus() {
            let bound = decay * (k54 * (-0.375 * (scales.zeta_minus() - z) / nu).exp() * hat + nu * zd);
            let m = (bound - g.abs()) / bound;
            if m < left.margin {
                left = Margin { margin: m, at: z };
            }
        }
    }
    let (xi, m_q) = state.m_q();
    let g1 = first_orthogonality(&xi, &m_q, consts.a);
    let n_in = norm_in_unchecked(state, consts.a)?;
    let bound = consts.k * decay;
    let inner = Margin { margin: (bound - n_in) / bound, at: n_in };
    Ok(BootstrapReport { radius, mass, exterior_right: right, exterior_left: left, inner, norm_in: n_in, g1 })
}

// ---------------------------------------------------------------------------
// Exterior supersolutions

#[derive(Clone, Debug, PartialEq)]
pub struct SupersolutionReport {
    pub side: Side,
    /// `min [(∂τ − 𝒜₁)Φ − φ₁χ̂/(16ν) − c φ₂]` with `Φ = φ₁χ̂ + φ₂`.
    pub min_margin: f64,
    pub at: f64,
    /// The same minimum divided by the required lower bound there.
    pub min_ratio: f64,
    /// `min (∂τ − 𝒜₁)Φ`: the bare supersolution property.
    pub positivity_min: f64,
    /// Residual of the exact φ₂ identity, relative to φ₂.
    pub phi2_identity: f64,
    /// Deviation of the φ₂ bracket as printed from the exact one, relative to φ₂.
    pub phi2_printed_gap: f64,
}

impl SupersolutionReport {
    pub fn pass(&self) -> bool {
        self.min_margin >= 0.0
    }

    pub fn to_record(&self) -> Record {
        let mut r = Record::new();
        r.text("side", if self.side == Side::Right { "right" } else { "left" })
            .num("min_margin", self.min_margin)
            .num("at", self.at)
            .num("min_ratio", self.min_ratio)
            .num("positivity_min", self.positivity_min)
            .num("phi2_identity", self.phi2_identity)
            .num("phi2_printed_gap", self.phi2_printed_gap)
            .flag("pass", self.pass());
        r
    }
}

/// Barrier inequality on a fine ζ-grid: `ζ ∈ [ζ₊, 3]` on the right and
/// `ζ ∈ [ζ₀/2, ζ₋]` on the left, with `ν_τ/ν = −(d−2)/2` and τ = 0.
pub fn supersolution_audit(consts: &BootstrapConstants, nu: f64, d: u32, side: Side) -> Result<SupersolutionReport> {
    let scales = GeometryScales::new(nu, consts.a, 0.25, consts.eta)?;
    let bp = consts.barrier(d);
    let p = FrameParams { d, nu, zeta0: 0.25 };
    let nu_rate = -(d as f64 - 2.0) / 2.0;
    let dm1 = d as f64 - 1.0;
    let dm2 = d as f64 - 2.0;
    let (lo, hi, c2) = match side {
        Side::Right => (scales.zeta_plus(), 3.0, 3.0 / 16.0),
        Side::Left => (0.125, scales.zeta_minus(), 0.25),
    };
    let h = (nu / 20.0).min(1e-3);
    let n = ((hi - lo) / h).ceil() as usize;
    let mut rep = SupersolutionReport {
        side,
        min_margin: f64::INFINITY,
        at: f64::NAN,
        min_ratio: f64::INFINITY,
        positivity_min: f64::INFINITY,
        phi2_identity: 0.0,
        phi2_printed_gap: 0.0,
    };
    for k in 0..=n {
        let z = lo + (hi - lo) * k as f64 / n as f64;
        let (phi1, phi2) = barrier_jets(z, 0.0, &scales, &bp, side);
        let hat = chi_hat(Jet::var(z), consts.eta);
        // ∂τ of the exponent −e (ζ − ζ₊)/ν (or its mirror) through ν(τ)
        let xi = (z - 1.0) / nu;
        let lever = match side {
            Side::Right => 4.0 - xi,
            Side::Left => 4.0 + xi,
        };
        let phi1_tau = phi1.v() * (-consts.kappa - bp.exponent * nu_rate * lever);
        let phi2_tau = match side {
            Side::Right => -consts.kappa * phi2.v(),
            Side::Left => (nu_rate - consts.kappa) * phi2.v(),
        };
        let a1 = |w: Jet| match side {
            Side::Right => a1_right(z, w, &p).v(),
            Side::Left => a1_left(z, w, &p).v(),
        };
        let big = phi1 * hat + phi2;
        let lhs = hat.v() * phi1_tau + phi2_tau - a1(big);
        let need = phi1.v() * hat.v() / (16.0 * nu) + c2 * phi2.v();
        let margin = lhs - need;
        if margin < rep.min_margin {
            rep.min_margin = margin;
            rep.at = z;
            rep.min_ratio = margin / need;
        }
        rep.positivity_min = rep.positivity_min.min(lhs);

        let direct = phi2_tau - a1(phi2);
        let (exact, printed) = match side {
            Side::Right => {
                let tail = -nu * dm1 * dm2 / (z * z);
                (-consts.kappa + 0.5 * d as f64 + tail, -consts.kappa + 0.5 + dm1 / (2.0 * z) + tail)
            }
            Side::Left => {
                let e = 0.5 * d as f64 - consts.kappa + nu_rate;
                (e, e)
            }
        };
        rep.phi2_identity = rep.phi2_identity.max(((direct - exact * phi2.v()) / phi2.v()).abs());
        rep.phi2_printed_gap = rep.phi2_printed_gap.max(((direct - printed * phi2.v()) / phi2.v()).abs());
    }
    Ok(rep)
}

// ---------------------------------------------------------------------------
// Lyapunov monitor

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LyapunovSample {
    pub s: f64,
    pub norm_in: f64,
    pub norm_bou: f64,
    pub nu: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LyapunovReport {
    /// Largest δ₂ for which `f' ≤ −δ₂ f + C g` holds at every sample with
    /// `C = c_cap`, where `f = ‖m_q‖²_in` and `g = e^{A/2}ν^{−2}‖m_ε‖²_bou + ν²`.
    pub delta2: f64,
    /// Log-linear decay rate of f.
    pub decay_rate: f64,
    /// Smallest C making the bound hold at `delta_ref`.
    pub c_min: f64,
    /// First s where the bound with `(delta_ref, c_cap)` fails.
    pub first_failure: Option<f64>,
    pub degenerate: bool,
}

impl LyapunovReport {
    pub fn to_record(&self) -> Record {
        let mut r = Record::new();
        r.num("delta2", self.delta2)
            .num("decay_rate", self.decay_rate)
            .num("c_min", self.c_min)
            .num("first_failure", self.first_failure.unwrap_or(f64::NAN))
            .flag("degenerate", self.degenerate);
        r
    }
}

/// Samples from a series with `s`, `norm_in`, `norm_bou`, `nu` columns.
pub fn samples_from_series(series: &TimeSeries) -> Result<Vec<LyapunovSample>> {
    let col = |k: &str| series.column(k).ok_or_else(|| Error::InsufficientData(format!("missing column {k}")));
    let (s, ni, nb, nu) = (col("s")?, col("norm_in")?, col("norm_bou")?, col("nu")?);
    Ok((0..s.len()).map(|i| LyapunovSample { s: s[i], norm_in: ni[i], norm_bou: nb[i], nu: nu[i] }).collect())
}

pub fn lyapunov_monitor(samples: &[LyapunovSample], a: f64, delta_ref: f64, c_cap: f64) -> Result<LyapunovReport> {
    if samples.len() < 10 {
        return Err(Error::InsufficientData(format!("{} samples, need at least 10", samples.len())));
    }
    let s: Vec<f64> = samples.iter().map(|x| x.s).collect();
    if s.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InsufficientData("sample clock must increase".into()));
    }
    let f: Vec<f64> = samples.iter().map(|x| x.norm_in * x.norm_in).collect();
    let g: Vec<f64> = samples
        .iter()
        .map(|x| {
            let bou = if x.norm_bou == 0.0 { 0.0 } else { (0.5 * a).exp() * (x.norm_bou / x.nu).powi(2) };
            bou + x.nu * x.nu
        })
        .collect();
    let (df, _) = derivatives(&s, &f);
    let top = f.iter().fold(0.0f64, |a, b| a.max(*b));
    if top <= 1e-30 {
        return Ok(LyapunovReport { delta2: f64::INFINITY, decay_rate: f64::NAN, c_min: 0.0, first_failure: None, degenerate: true });
    }
    let mut delta2 = f64::INFINITY;
    let mut c_min: f64 = 0.0;
    let mut first_failure = None;
    for i in 0..f.len() {
        if f[i] > 0.0 {
            delta2 = delta2.min((c_cap * g[i] - df[i]) / f[i]);
        }
        let excess = df[i] + delta_ref * f[i];
        if excess > 0.0 {
            c_min = if g[i] > 0.0 { c_min.max(excess / g[i]) } else { f64::INFINITY };
        }
        if first_failure.is_none() && excess > c_cap * g[i] + 1e-12 * top {
            first_failure = Some(s[i]);
        }
    }
    let decay_rate = crate::renormalized::fit_decay_rate(&s, &f);
    Ok(LyapunovReport { delta2, decay_rate, c_min, first_failure, degenerate: false })
}

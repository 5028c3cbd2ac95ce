//! `ksring verify`: property suites with a margin table.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use ksring::diagnostics::{bootstrap_check, lyapunov_monitor, supersolution_audit, BootstrapConstants, LyapunovSample};
use ksring::grid::WeightedGrid;
use ksring::operators::conjugation_check;
use ksring::operators::kernels::{
    cole_hopf_propagate, heat_kernel_grad_l2_sq, heat_kernel_grad_l2_sq_exact, heat_kernel_l1, semigroup_l0,
};
use ksring::profiles::{rankine_hugoniot_check, Side};
use ksring::renormalized::{equation_consistency, init_renormalized, sample_case};
use ksring::spectral::{m0_spectrum, no_gap_eigenvalue_scan, random_bumps, restricted_coercivity_check};

use crate::checks::Check;
use crate::error::{CliError, Tag};

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Suite {
    Algebra,
    Spectral,
    Bootstrap,
    Barriers,
    All,
}

/// Knobs for the barrier suite.
#[derive(Clone, Copy, Debug)]
pub struct BarrierSettings {
    pub d: u32,
    pub nu: f64,
    pub kappa: f64,
    pub eta: f64,
    pub a: f64,
    pub k: Option<f64>,
}

impl Default for BarrierSettings {
    fn default() -> Self {
        Self { d: 3, nu: 1e-3, kappa: 0.01, eta: 0.05, a: 10.0, k: None }
    }
}

impl BarrierSettings {
    pub fn constants(&self) -> Result<BootstrapConstants, CliError> {
        let k = self.k.unwrap_or((0.4 * self.a).exp());
        BootstrapConstants::new(self.a, k, self.kappa, self.eta, 40.0)
            .map_err(|e| CliError::Config { line: None, key: "k".into(), msg: e.to_string() })
    }
}

pub fn algebra(seed: u64) -> Result<Vec<Check>, CliError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let (st, rates) = sample_case(&mut rng).tag("renormalized")?;
        worst = worst.max(equation_consistency(&st, rates, 10.0).max());
    }
    let g = WeightedGrid::symmetric(40.0, 0.01).tag("grid")?;
    let mut conj: f64 = 0.0;
    for _ in 0..20 {
        let f = random_bumps(&g, 10.0, &mut rng);
        conj = conj.max(conjugation_check(&g, &f).tag("operators")?);
    }
    let g = WeightedGrid::symmetric(60.0, 0.02).tag("grid")?;
    let f = g.sample(|x| (-(x - 2.0).powi(2) / 4.0).exp() - 0.5 * (-(x + 3.0).powi(2)).exp());
    let a = cole_hopf_propagate(&g, &f, 4.0).tag("operators")?;
    let b = semigroup_l0(&g, &f, 4.0, 400).tag("operators")?;
    let diff: Vec<f64> = a.iter().zip(&b).map(|(u, v)| u - v).collect();

    let mut l1: f64 = 0.0;
    let mut grad: f64 = 0.0;
    for s in [0.1f64, 0.5, 2.0] {
        let (hw, h) = (12.0 * s.sqrt(), s.sqrt() / 50.0);
        l1 = l1.max((heat_kernel_l1(s, hw, h) - 1.0).abs());
        let e = heat_kernel_grad_l2_sq_exact(s);
        grad = grad.max(((heat_kernel_grad_l2_sq(s, hw, h) - e) / e).abs());
    }
    let rh = (3..=6).map(rankine_hugoniot_check).fold(0.0f64, |m, v| m.max(v.abs()));
    Ok(vec![
        Check::at_most("consistency_50_states", worst, 1e-8),
        Check::at_most("conjugation_20_bumps", conj, 1e-5),
        Check::at_most("cole_hopf_vs_stepping", g.l2(&diff), 1e-3),
        Check::at_most("heat_kernel_l1", l1, 1e-10),
        Check::at_most("heat_kernel_grad", grad, 1e-8),
        Check::at_most("rankine_hugoniot", rh, 0.0),
    ])
}

pub fn spectral(seed: u64) -> Result<Vec<Check>, CliError> {
    let rep = m0_spectrum(80.0, 0.01, 3).tag("spectral")?;
    let scan = no_gap_eigenvalue_scan(&[40.0, 60.0, 80.0], 0.02, 5e-3).tag("spectral")?;
    let g = WeightedGrid::symmetric(60.0, 0.02).tag("grid")?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut failures = 0;
    let mut worst = f64::INFINITY;
    for _ in 0..100 {
        let m = random_bumps(&g, 10.0, &mut rng);
        let r = restricted_coercivity_check(&g, &m, 10.0, 0.01).tag("spectral")?;
        worst = worst.min(r.h1_ratio).min(r.h2_ratio);
        if !(r.h1_ok && r.h2_ok) {
            failures += 1;
        }
    }
    Ok(vec![
        Check::within("lambda0", rep.lambda0(), -1e-6, 1e-6),
        Check::at_most("kernel_error", rep.kernel_error, 1e-4),
        Check::within("gap_edge", rep.gap_edge, -0.0625 - 1e-2, -0.0625 + 1e-3),
        Check::at_most("gap_scan_count", scan.counts.iter().sum::<usize>() as f64, 0.0),
        Check::at_most("coercivity_failures", failures as f64, 0.0),
        Check::at_least("coercivity_worst_ratio", worst, 0.01),
    ])
}

pub fn bootstrap() -> Result<Vec<Check>, CliError> {
    let consts = BootstrapConstants::with_default_k(10.0, 0.01, 0.05, 40.0).tag("diagnostics")?;
    let ring = init_renormalized(3, 40.0, 1.0, 0.025, 0.25, 10.0, 0.05).tag("renormalized")?;
    let good = bootstrap_check(&ring, &consts).tag("diagnostics")?;
    // a collar-sized step in the exterior derivative
    let mut bad = ring.clone();
    for (z, m) in bad.zeta.iter().zip(bad.m_w.iter_mut()) {
        *m += 20.0 * (-((z - 2.0) / 0.05).powi(2)).exp();
    }
    let bad = bootstrap_check(&bad, &consts).tag("diagnostics")?;
    let zero: Vec<LyapunovSample> =
        (0..20).map(|i| LyapunovSample { s: i as f64, norm_in: 0.0, norm_bou: 0.0, nu: 1e-3 }).collect();
    let lz = lyapunov_monitor(&zero, 10.0, 0.05, 1.0).tag("diagnostics")?;
    Ok(vec![
        Check::at_least("ring_state_margin", good.worst().1.margin, 0.0),
        Check::at_most("perturbed_state_margin", bad.worst().1.margin, 0.0),
        Check::at_least("zero_run_degenerate", if lz.degenerate { 1.0 } else { 0.0 }, 1.0),
    ])
}

pub fn barriers(set: &BarrierSettings) -> Result<Vec<Check>, CliError> {
    let consts = set.constants()?;
    // κ ≥ 1/4 is outside the range the barrier construction covers
    let xfail = set.kappa >= 0.25;
    let mut out = Vec::new();
    for (side, tag) in [(Side::Right, "right"), (Side::Left, "left")] {
        let r = supersolution_audit(&consts, set.nu, set.d, side).tag("diagnostics")?;
        out.push(Check::at_least(&format!("{tag}_margin"), r.min_margin, 0.0).expect_fail(xfail));
        out.push(Check::at_least(&format!("{tag}_positivity"), r.positivity_min, 0.0));
        out.push(Check::at_most(&format!("{tag}_phi2_identity"), r.phi2_identity, 1e-12));
    }
    Ok(out)
}

/// Runs the suites (concurrently for `all`) and returns `(suite, checks)` in order.
pub fn run(suite: Suite, seed: u64, set: &BarrierSettings) -> Result<Vec<(&'static str, Vec<Check>)>, CliError> {
    let one = |s: Suite| -> Result<Vec<Check>, CliError> {
        match s {
            Suite::Algebra => algebra(seed),
            Suite::Spectral => spectral(seed),
            Suite::Bootstrap => bootstrap(),
            Suite::Barriers => barriers(set),
            Suite::All => unreachable!(),
        }
    };
    let name = |s: Suite| match s {
        Suite::Algebra => "algebra",
        Suite::Spectral => "spectral",
        Suite::Bootstrap => "bootstrap",
        Suite::Barriers => "barriers",
        Suite::All => "all",
    };
    if suite != Suite::All {
        return Ok(vec![(name(suite), one(suite)?)]);
    }
    let all = [Suite::Algebra, Suite::Spectral, Suite::Bootstrap, Suite::Barriers];
    let results: Vec<Result<Vec<Check>, CliError>> = std::thread::scope(|sc| {
        let handles: Vec<_> = all.iter().map(|s| sc.spawn(move || one(*s))).collect();
        handles.into_iter().map(|h| h.join().expect("suite thread panicked")).collect()
    });
    all.iter().zip(results).map(|(s, r)| r.map(|c| (name(*s), c))).collect()
}

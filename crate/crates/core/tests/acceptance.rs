//! One PASS/FAIL line per acceptance criterion; exits nonzero if any fails.

use std::time::{Duration, Instant};

use ksring::diagnostics::{supersolution_audit, BootstrapConstants};
use ksring::grid::WeightedGrid;
use ksring::modulation::{decompose, detect_ring, fit_blowup_law, profile_defect, ModulationState};
use ksring::operators::conjugation_check;
use ksring::operators::kernels::*;
use ksring::physical::{init_ring, run_to_blowup, Outcome, PartialMassState, PhysicalConfig};
use ksring::profiles::{eval_q, rankine_hugoniot_check, Side};
use ksring::renormalized::*;
use ksring::spectral::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

struct Line {
    id: u32,
    name: &'static str,
    pass: bool,
    detail: String,
}

fn line(id: u32, name: &'static str, pass: bool, detail: String) -> Line {
    Line { id, name, pass, detail }
}

fn c1_c2() -> Vec<Line> {
    let start = Instant::now();
    let rep = m0_spectrum(80.0, 0.01, 5).unwrap();
    let el = start.elapsed();
    let scan = no_gap_eigenvalue_scan(&[40.0, 60.0, 80.0], 0.01, 5e-3).unwrap();
    let l0 = rep.lambda0();
    let edge = rep.gap_edge;
    vec![
        line(
            1,
            "spectral kernel",
            l0.abs() <= 1e-6 && rep.kernel_error <= 1e-4 && el <= Duration::from_secs(30),
            format!("lambda0 = {l0:.3e} (|.| <= 1e-6), eigenvector L2 error = {:.3e} (<= 1e-4), {:.1} s (<= 30 s)", rep.kernel_error, el.as_secs_f64()),
        ),
        line(
            2,
            "spectral gap",
            (-0.0625 - 1e-2..=-0.0625 + 1e-3).contains(&edge) && scan.all_zero(),
            format!("lambda1 = {edge:.6} (in [-1/16 - 1e-2, -1/16 + 1e-3]), scan counts {:?} for L = 40, 60, 80 (all 0)", scan.counts),
        ),
    ]
}

fn c3() -> Line {
    let g = WeightedGrid::symmetric(60.0, 0.02).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut fails = 0;
    for _ in 0..100 {
        let m = random_bumps(&g, 10.0, &mut rng);
        let c = coercivity_test(&g, &project_kernel(&g, &m), 0.05).unwrap();
        let r = restricted_coercivity_check(&g, &m, 10.0, 0.01).unwrap();
        if !(c.ok && r.h1_ok && r.h2_ok) {
            fails += 1;
        }
    }
    line(3, "coercivity", fails == 0, format!("{fails} failures in 100 draws (delta = 0.05, delta1 = 0.01, A = 10; need 0)"))
}

fn c4() -> Line {
    let g = WeightedGrid::symmetric(40.0, 0.01).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let conj = (0..20).map(|_| conjugation_check(&g, &random_bumps(&g, 10.0, &mut rng)).unwrap()).fold(0.0, f64::max);
    let g = WeightedGrid::symmetric(60.0, 0.02).unwrap();
    let f = g.sample(|x| (-(x - 2.0).powi(2) / 4.0).exp() - 0.5 * (-(x + 3.0).powi(2)).exp());
    let a = cole_hopf_propagate(&g, &f, 4.0).unwrap();
    let b = semigroup_l0(&g, &f, 4.0, 400).unwrap();
    let diff: Vec<f64> = a.iter().zip(&b).map(|(u, v)| u - v).collect();
    let ch = g.l2(&diff);
    line(4, "conjugation identity", conj <= 1e-5 && ch <= 1e-3, format!("residual {conj:.3e} (<= 1e-5), Cole-Hopf vs stepping at s = 4: {ch:.3e} (<= 1e-3)"))
}

fn c5() -> Line {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let worst = (0..50)
        .map(|_| {
            let (st, rates) = sample_case(&mut rng).unwrap();
            equation_consistency(&st, rates, 10.0).max()
        })
        .fold(0.0, f64::max);
    line(5, "master algebra", worst <= 1e-8, format!("max relative discrepancy {worst:.3e} over 50 states (<= 1e-8)"))
}

fn c6() -> Line {
    let g = burgers_grid(0.05).unwrap();
    let pert = burgers_perturbation(&g, 0.05);
    let f0: Vec<f64> = g.nodes.iter().zip(&pert).map(|(x, p)| eval_q(*x) + p).collect();
    let ds = 0.5 * 0.05 / 0.55;
    let (_, samples) = run_burgers(&g, &f0, ds, 60.0, 20).unwrap();
    let (s, v): (Vec<f64>, Vec<f64>) = samples.iter().filter(|r| r[0] >= 10.0).map(|r| (r[0], r[1])).unzip();
    let rate = fit_decay_rate(&s, &v);
    let g = burgers_grid(0.02).unwrap();
    let (_, samples) = run_burgers(&g, &g.sample(eval_q), 0.02, 10.0, 10).unwrap();
    let sup = samples.iter().map(|r| r[2]).fold(0.0, f64::max);
    line(6, "Burgers stability", rate >= 0.05 && sup <= 1e-6, format!("decay rate {rate:.4} (>= 0.05), Q drift over s in [0, 10]: {sup:.3e} (<= 1e-6)"))
}

struct LawRun {
    d: u32,
    reached: bool,
    spread: f64,
    worst: f64,
    m_drift: f64,
    profile: f64,
    slope_err: f64,
    secs: f64,
    state: PartialMassState,
}

fn law_run(d: u32) -> LawRun {
    let start = Instant::now();
    let init = init_ring(d, 40.0, 1.0, 1.0 / 40.0, 0.25).unwrap();
    let run = run_to_blowup(&init, &PhysicalConfig::default()).unwrap();
    let fit = fit_blowup_law(&run.series, d).unwrap();
    let md = run.modulation.unwrap();
    let target = -(d as f64 - 2.0) / 2.0;
    LawRun {
        d,
        reached: run.outcome == Outcome::StopRatio,
        spread: fit.ratio_spread,
        worst: fit.law_worst,
        m_drift: fit.m_drift,
        profile: profile_defect(&run.state, &md, 20.0),
        slope_err: ((fit.nu_slope - target) / target).abs(),
        secs: start.elapsed().as_secs_f64(),
        state: run.state,
    }
}

fn c7(runs: &[LawRun]) -> Line {
    let ok = |r: &LawRun| r.reached && r.spread <= 0.1 && r.worst <= 0.1 && r.m_drift <= 0.05 && r.profile <= 0.05 && r.secs <= 600.0;
    let detail = runs
        .iter()
        .map(|r| {
            format!(
                "d={}: ratio spread {:.2}% (<= 10%), vs (d/2)M {:.2}% (<= 10%), M drift {:.2}% (<= 5%), profile {:.2}% (<= 5%), {:.0} s",
                r.d,
                100.0 * r.spread,
                100.0 * r.worst,
                100.0 * r.m_drift,
                100.0 * r.profile,
                r.secs
            )
        })
        .collect::<Vec<_>>()
        .join("; ");
    line(7, "blow-up law", runs.iter().all(ok), detail)
}

fn c8(runs: &[LawRun]) -> Line {
    let detail = runs.iter().map(|r| format!("d={}: {:.2}%", r.d, 100.0 * r.slope_err)).collect::<Vec<_>>().join(", ");
    line(8, "nu scaling", runs.iter().all(|r| r.slope_err <= 0.05), format!("log nu slope vs -(d-2)/2: {detail} (<= 5%)"))
}

fn c9() -> Line {
    let c = BootstrapConstants::with_default_k(10.0, 0.01, 0.05, 40.0).unwrap();
    let (mut pass, mut parts) = (true, Vec::new());
    for (side, tag) in [(Side::Right, "right"), (Side::Left, "left")] {
        let r = supersolution_audit(&c, 1e-3, 3, side).unwrap();
        pass &= r.min_margin >= 0.0 && r.phi2_identity <= 1e-12;
        parts.push(format!("{tag} min margin {:.4e} at zeta = {:.4} (>= 0), phi2 identity {:.1e} (<= 1e-12)", r.min_margin, r.at, r.phi2_identity));
    }
    line(9, "supersolution audits", pass, parts.join("; "))
}

fn c10() -> Line {
    let (mut l1, mut grad) = (0.0f64, 0.0f64);
    for s in [0.1f64, 0.5, 2.0] {
        let (hw, h) = (12.0 * s.sqrt(), s.sqrt() / 50.0);
        l1 = l1.max((heat_kernel_l1(s, hw, h) - 1.0).abs());
        let e = heat_kernel_grad_l2_sq_exact(s);
        grad = grad.max(((heat_kernel_grad_l2_sq(s, hw, h) - e) / e).abs());
    }
    line(10, "heat kernel", l1 <= 1e-10 && grad <= 1e-8, format!("|L1 - 1| = {l1:.2e} (<= 1e-10), gradient relative error {grad:.2e} (<= 1e-8)"))
}

fn c11() -> Line {
    let v: Vec<f64> = (3..=6).map(rankine_hugoniot_check).collect();
    line(11, "Rankine-Hugoniot", v.iter().all(|x| *x == 0.0), format!("residuals {v:?} for d = 3..6 (exactly 0)"))
}

fn c12(runs: &[LawRun]) -> Line {
    let mut worst: f64 = 0.0;
    for r in runs {
        let s = &r.state;
        let guess = |s: &PartialMassState| {
            let e = detect_ring(s).unwrap();
            ModulationState::from_radius_mass(s.d, e.r, e.mass, s.t).unwrap()
        };
        let base = decompose(s, &guess(s), 10.0, 0.25).unwrap().modulation;
        for big in [0.5, 2.0] {
            let t = s.rescaled(big);
            let md = decompose(&t, &guess(&t), 10.0, 0.25).unwrap().modulation;
            worst = worst.max(((md.r - base.r / big) / (base.r / big)).abs());
            let m = big.powi(2 - s.d as i32) * base.m;
            worst = worst.max(((md.m - m) / m).abs());
        }
    }
    line(12, "gauge invariance", worst <= 1e-6, format!("worst relative (R, M) mismatch {worst:.2e} for Lambda in {{0.5, 2}} on final d = 3, 4 states (<= 1e-6)"))
}

fn main() {
    let start = Instant::now();
    let mut lines = std::thread::scope(|sc| {
        let law = [3u32, 4].map(|d| sc.spawn(move || law_run(d)));
        let spec = sc.spawn(c1_c2);
        let small = sc.spawn(|| vec![c3(), c4(), c5(), c6(), c9(), c10(), c11()]);
        let runs: Vec<LawRun> = law.into_iter().map(|h| h.join().expect("law run panicked")).collect();
        let mut out = spec.join().expect("spectral panicked");
        out.extend(small.join().expect("suite panicked"));
        out.extend([c7(&runs), c8(&runs), c12(&runs)]);
        out
    });
    lines.sort_by_key(|l| l.id);
    println!("acceptance criteria");
    for l in &lines {
        println!("{:<4} {:>2}. {:<22} {}", if l.pass { "PASS" } else { "FAIL" }, l.id, l.name, l.detail);
    }
    let failed: Vec<u32> = lines.iter().filter(|l| !l.pass).map(|l| l.id).collect();
    println!("{} of {} passed in {:.0} s", lines.len() - failed.len(), lines.len(), start.elapsed().as_secs_f64());
    if !failed.is_empty() {
        println!("failed: {failed:?}");
        std::process::exit(1);
    }
}

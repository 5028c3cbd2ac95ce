use ksring::modulation::{decompose, detect_ring, ModulationState};
use ksring::operators::{eval_m_e, formulas, OuterRates};
use ksring::physical::{advance_to, init_ring, PhysicalConfig};
use ksring::profiles::eval_q;
use ksring::renormalized::*;
use ksring::series::clock_chain_defect;
use proptest::prelude::*;

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

// renormalized and physical solvers from the same ring agree on (R, M)
#[test]
fn frame_equivalence() {
    let ds = 1.0 / 160.0;
    for d in [3u32, 4] {
        let init = init_renormalized(d, 40.0, 1.0, 0.025, 0.25, 10.0, 0.05).unwrap();
        let cfg = RenormalizedConfig { ds, ..RenormalizedConfig::default() };
        let md = run_renormalized(&init, 0.5, &cfg).unwrap().state.modulation;

        let phys = init_ring(d, 40.0, 1.0, 0.025, 0.25).unwrap();
        let (ps, _) = advance_to(&phys, md.t, &PhysicalConfig { ds, ..PhysicalConfig::default() }).unwrap();
        let e = detect_ring(&ps).unwrap();
        let g = ModulationState::from_radius_mass(d, e.r, e.mass, ps.t).unwrap();
        let pm = decompose(&ps, &g, 10.0, 0.25).unwrap().modulation;
        assert!(rel(md.r, pm.r) <= 5e-3 && rel(md.m, pm.m) <= 5e-3, "d={d}: ({}, {}) vs ({}, {})", md.r, md.m, pm.r, pm.m);
    }
}

#[test]
fn run_keeps_clocks_chained_and_orthogonality_closed() {
    let init = init_renormalized(3, 40.0, 1.0, 0.025, 0.25, 10.0, 0.05).unwrap();
    let run = run_renormalized(&init, 1.0, &RenormalizedConfig::default()).unwrap();
    assert!(run.worst_nu_drift <= 1e-8, "{:e}", run.worst_nu_drift);
    let cd = clock_chain_defect(&run.series, 3).unwrap();
    assert!(cd <= 1e-6, "{cd:e}");
    let tau = run.series.column("tau").unwrap();
    assert!(tau.windows(2).all(|w| w[1] > w[0]));
    assert!((tau.last().unwrap() - 1.0).abs() < 1e-12);
    let r = run.series.column("R").unwrap();
    assert!(r.last().unwrap() < &r[0]);
    let (xi, m_q) = run.state.m_q();
    let (g1, g2) = ksring::modulation::orthogonality_of(&xi, &m_q, run.state.nu(), 10.0);
    assert!(g1.abs() <= 1e-3 && g2.abs() <= 1e-3, "{g1:e} {g2:e}");
}

#[test]
fn profile_tendency_matches_m_e() {
    // for m_ε = 0 the discrete ∂τ m_ε converges to m_E at second order
    let mut errs = Vec::new();
    for h_xi in [0.1, 0.05] {
        let st = init_renormalized(3, 40.0, 1.0, 0.02, 0.25, 10.0, h_xi).unwrap();
        let rates = OuterRates::default();
        let t = tendency(&st, rates);
        let e = eval_m_e(&st.zeta[1..], &st.frame(), rates).unwrap();
        let scale = e.iter().fold(0.0f64, |a, b| a.max(b.abs()));
        let n = t.len();
        // ∂τ m_ε = ∂τ m_w − ∂τ Q̄_ν
        let p = st.frame();
        let de = |i: usize| t[i] - formulas::q_bar_nu_tau(st.zeta[i], &p, rates).v();
        errs.push((1..n - 1).map(|i| (de(i) - e[i - 1]).abs()).fold(0.0, f64::max) / scale);
    }
    assert!(errs[1] <= 2e-3 && errs[0] / errs[1] >= 3.0, "{errs:?}");
}

#[test]
fn sharp_front_is_stationary() {
    let zeta: Vec<f64> = (0..=400).map(|i| 0.01 * i as f64).collect();
    let m_w: Vec<f64> = zeta.iter().map(|z| if *z < 0.99 { 0.0 } else if *z > 1.01 { 1.0 } else { 0.5 }).collect();
    let mut md = ModulationState::from_radius_mass(3, 1.0, 1.0, 0.0).unwrap();
    md.nu = 0.0;
    let st = RenormalizedState::new(zeta, m_w.clone(), md, 0.25).unwrap();
    let next = step_renormalized(&st, 1e-3, OuterRates::default()).unwrap();
    for (z, (a, b)) in st.zeta.iter().zip(next.m_w.iter().zip(&m_w)) {
        if (z - 1.0).abs() > 0.05 {
            assert!((a - b).abs() <= 1e-12, "ζ = {z}: {a} vs {b}");
        }
    }
    let same = step_renormalized(&st, 0.0, OuterRates { a: 0.3, c: -0.2 }).unwrap();
    assert_eq!(same.m_w, st.m_w);
}

#[test]
fn burgers_profile_is_stationary() {
    let g = burgers_grid(0.02).unwrap();
    let q = g.sample(eval_q);
    let (_, samples) = run_burgers(&g, &q, 0.5 * 0.02 / 0.5, 10.0, 50).unwrap();
    let sup = samples.iter().map(|r| r[2]).fold(0.0, f64::max);
    assert!(sup <= 1e-6, "{sup:e}");
}

#[test]
fn burgers_perturbation_decays() {
    let g = burgers_grid(0.05).unwrap();
    let pert = burgers_perturbation(&g, 0.05);
    assert!(g.inner(&pert, &g.sample(ksring::profiles::eval_w)).abs() <= 1e-12);
    let f0: Vec<f64> = g.nodes.iter().zip(&pert).map(|(x, p)| eval_q(*x) + p).collect();
    let ds = 0.5 * 0.05 / 0.55;
    let (_, samples) = run_burgers(&g, &f0, ds, 40.0, 20).unwrap();
    let (s, v): (Vec<f64>, Vec<f64>) = samples.iter().filter(|r| r[0] >= 10.0).map(|r| (r[0], r[1])).unzip();
    let rate = fit_decay_rate(&s, &v);
    assert!(rate >= 0.05, "{rate}");
}

#[test]
fn burgers_translate_settles() {
    let g = burgers_grid(0.05).unwrap();
    let f0 = g.sample(|x| eval_q(x + 3.0));
    assert!((burgers_shift(&g, &f0) - 3.0).abs() <= 1e-6);
    let (f, _) = run_burgers(&g, &f0, 0.05, 40.0, 100).unwrap();
    let c = burgers_shift(&g, &f);
    assert!(c.is_finite() && c.abs() <= 6.0, "{c}");
    let settled = g.sample(|x| eval_q(x + c));
    let worst = f.iter().zip(&settled).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    assert!(worst <= 1e-2, "{worst}");
    assert!(step_burgers(&g, &f0, 1.0).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn physical_round_trip(log_nu in -6.5f64..-3.0, m0 in 10.0f64..80.0) {
        let st = init_renormalized(3, m0, 1.0, log_nu.exp(), 0.25, 10.0, 0.1).unwrap();
        let phys = st.to_physical().unwrap();
        let back = RenormalizedState::from_physical(&phys, st.modulation, st.zeta.clone(), 0.25).unwrap();
        for (a, b) in st.m_w.iter().zip(&back.m_w) {
            prop_assert!((a - b).abs() <= 1e-12);
        }
        prop_assert!(st.m_eps().iter().all(|v| v.abs() <= 1e-15));
    }
}

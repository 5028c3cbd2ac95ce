use ksring::modulation::detect_ring;
use ksring::physical::*;
use proptest::prelude::*;

const D: u32 = 3;

// manufactured solution with m(0) = 0 and m(1) = 1 for all t
fn exact(r: f64, t: f64) -> f64 {
    r.powi(D as i32) + (1.0 + t) * r.powi(D as i32) * (1.0 - r).powi(2)
}

fn source(r: f64, t: f64) -> f64 {
    let h = 1e-4;
    let mt = (exact(r, t + h) - exact(r, t - h)) / (2.0 * h);
    let mr = (exact(r + h, t) - exact(r - h, t)) / (2.0 * h);
    let mrr = (exact(r + h, t) - 2.0 * exact(r, t) + exact(r - h, t)) / (h * h);
    let dm1 = D as f64 - 1.0;
    mt - (mrr + (exact(r, t) / r.powi(D as i32 - 1) - dm1 / r) * mr)
}

fn mms_error(n: usize) -> f64 {
    let r: Vec<f64> = (0..=n).map(|i| i as f64 / n as f64).collect();
    let m = r.iter().map(|x| exact(*x, 0.0)).collect();
    let mut s = PartialMassState::new(D, r, m, 0.0).unwrap();
    let h = 1.0 / n as f64;
    let steps = (0.1 / (0.5 * h * h)).ceil() as usize;
    let dt = 0.1 / steps as f64;
    let f = |r: f64, t: f64| source(r, t);
    for _ in 0..steps {
        s = step_with_source(&s, dt, Some(&f)).unwrap();
    }
    s.r.iter().zip(&s.m).map(|(x, v)| (v - exact(*x, s.t)).abs()).fold(0.0, f64::max)
}

#[test]
fn manufactured_solution_converges_at_second_order() {
    let e: Vec<f64> = [20, 40, 80].iter().map(|n| mms_error(*n)).collect();
    for w in e.windows(2) {
        let order = (w[0] / w[1]).log2();
        assert!(order >= 1.7, "errors {e:?}");
    }
    assert!(e[2] <= 1e-4, "{e:?}");
}

#[test]
fn ring_data_conserves_mass_and_stays_monotone() {
    let s0 = init_ring(3, 40.0, 1.0, 0.025, 0.25).unwrap();
    let mut s = s0.clone();
    for _ in 0..200 {
        s = step(&s, 0.025 * 0.025 * 0.025).unwrap();
        assert!(s.min_slope() >= -1e-10);
        assert_eq!(s.m[0], 0.0);
    }
    let drift = (s.total_mass() - s0.total_mass()).abs() / s0.total_mass();
    assert!(drift <= 1e-10, "{drift:e}");
}

#[test]
fn density_examples() {
    let r: Vec<f64> = (0..=200).map(|i| 0.01 * i as f64).collect();
    for d in [3u32, 4] {
        let m = r.iter().map(|x| x.powi(d as i32) / d as f64).collect();
        let u = density_of(&PartialMassState::new(d, r.clone(), m, 0.0).unwrap());
        assert!(u.iter().all(|v| (v - 1.0).abs() < 1e-8), "{:?}", &u[..4]);
    }
    let u = density_of(&PartialMassState::new(3, r.clone(), vec![0.0; r.len()], 0.0).unwrap());
    assert!(u.iter().all(|v| *v == 0.0));
}

#[test]
fn thin_ring_density_peak() {
    for d in [3u32, 4] {
        let (m0, r0, l0) = (40.0, 1.0, 1e-3);
        let s = init_ring(d, m0, r0, l0, 0.25).unwrap();
        let peak = density_of(&s).into_iter().fold(0.0, f64::max);
        let target = m0 / (r0.powi(d as i32 - 1) * l0) / 8.0;
        assert!((peak / target - 1.0).abs() <= 0.02, "d={d}: {peak} vs {target}");
    }
}

#[test]
fn remesh_keeps_mass_and_profile() {
    let s = init_ring(3, 40.0, 1.0, 0.025, 0.25).unwrap();
    let nodes = ring_mesh(4.0, 0.95, 0.02, 10.0, &MeshSpec::default());
    let t = remesh(&s, nodes).unwrap();
    assert_eq!(t.total_mass(), s.total_mass());
    assert!(t.min_slope() >= 0.0);
    let a = detect_ring(&s).unwrap();
    let b = detect_ring(&t).unwrap();
    assert!((a.r - b.r).abs() < 1e-3 && (a.mass - b.mass).abs() < 1e-3 * a.mass);
}

#[test]
fn immediate_stop_returns_initial_state() {
    let s = init_ring(3, 40.0, 1.0, 0.025, 0.25).unwrap();
    let cfg = PhysicalConfig { stop_ratio: 1.0, ..PhysicalConfig::default() };
    let run = run_to_blowup(&s, &cfg).unwrap();
    assert!(run.series.is_empty());
    assert_eq!(run.state, s);
}

#[test]
fn short_run_tracks_the_ring_inward() {
    let s = init_ring(3, 40.0, 1.0, 0.025, 0.25).unwrap();
    let cfg = PhysicalConfig { stop_ratio: 0.02, ..PhysicalConfig::default() };
    let run = run_to_blowup(&s, &cfg).unwrap();
    assert_eq!(run.outcome, Outcome::StopRatio);
    assert!(run.worst_mass_drift <= 1e-8 && run.worst_min_slope >= -1e-10);
    let r = run.series.column("R").unwrap();
    assert!(r.windows(2).all(|w| w[1] < w[0]));
    assert!(ksring::series::clock_chain_defect(&run.series, 3).unwrap() <= 1e-6);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    // m_Λ(r, t) = Λ^{2−d} m(Λr, Λ²t) maps solutions to solutions
    #[test]
    fn step_commutes_with_scaling(big in 0.3f64..3.0, d in 3u32..=5) {
        let s = init_ring(d, 30.0, 1.0, 0.05, 0.25).unwrap();
        let dt = 1e-4;
        let a = step(&s, dt).unwrap().rescaled(big);
        let b = step(&s.rescaled(big), dt / (big * big)).unwrap();
        let scale = a.total_mass();
        for (x, y) in a.m.iter().zip(&b.m) {
            prop_assert!((x - y).abs() <= 1e-10 * scale);
        }
        prop_assert!((a.t - b.t).abs() <= 1e-15);
    }

    #[test]
    fn one_step_is_conservative_and_monotone(m0 in 5.0f64..80.0, l0 in 0.01f64..0.1, dt in 1e-6f64..1e-3) {
        let s = init_ring(3, m0, 1.0, l0, 0.25).unwrap();
        let t = step(&s, dt).unwrap();
        prop_assert!((t.total_mass() - s.total_mass()).abs() <= 1e-10 * s.total_mass());
        prop_assert!(t.min_slope() >= -1e-10);
    }
}

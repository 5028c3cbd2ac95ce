use std::path::Path;
use std::process::{Command, Output};

fn ksring(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ksring")).args(args).env_remove("KSRING_OUT").output().expect("binary runs")
}

fn text(o: &Output) -> (String, String) {
    (String::from_utf8_lossy(&o.stdout).into_owned(), String::from_utf8_lossy(&o.stderr).into_owned())
}

fn summary(dir: &Path) -> String {
    std::fs::read_to_string(dir.join("summary.txt")).unwrap()
}

fn value(summary: &str, key: &str) -> Option<f64> {
    summary.lines().find_map(|l| l.strip_prefix(&format!("{key} = ")).and_then(|v| v.trim().parse().ok()))
}

#[test]
fn spectral_run_reports_the_kernel() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("spec");
    let o = ksring(&["run", "--mode", "spectral", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{:?}", text(&o));
    let s = summary(&out);
    let l0 = value(&s, "lambda0").expect("lambda0 in summary");
    assert!(l0.abs() <= 1e-6);
    assert!(out.join("spectrum.csv").exists() && out.join("summary.json").exists());
    let plot = std::fs::read_to_string(out.join("plots/ground_state.gp")).unwrap();
    assert!(plot.contains("plot"));
}

#[test]
fn missing_dimension_is_a_config_error() {
    let tmp = tempfile::tempdir().unwrap();
    let o = ksring(&["run", "--mode", "physical", "--out", tmp.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(text(&o).1.contains("`d`"), "{:?}", text(&o));
}

#[test]
fn config_file_errors_carry_line_and_key() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("run.cfg");
    std::fs::write(&cfg, "# burgers run\nmode = burgers\ncfl = zero\n").unwrap();
    let o = ksring(&["run", "-c", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let err = text(&o).1;
    assert!(err.contains("line 3") && err.contains("`cfl`"), "{err}");

    std::fs::write(&cfg, "mode = burgers\nbogus = 1\n").unwrap();
    let o = ksring(&["run", "-c", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(text(&o).1.contains("`bogus`"));
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(ksring(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(ksring(&["verify", "--d", "2", "algebra"]).status.code(), Some(2));
    let o = ksring(&["keys"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(text(&o).0.lines().any(|l| l.starts_with("stop_ratio")));
}

#[test]
fn verify_suites() {
    let o = ksring(&["verify", "algebra"]);
    assert_eq!(o.status.code(), Some(0), "{:?}", text(&o));
    let o = ksring(&["verify", "barriers", "--kappa", "0.6"]);
    assert_eq!(o.status.code(), Some(0), "{:?}", text(&o));
    assert!(text(&o).0.contains("XFAIL"));
    // the default barrier audit has negative margins
    let o = ksring(&["verify", "barriers"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(text(&o).1.contains("first failure"));
}

#[test]
fn identical_runs_give_identical_csv() {
    let tmp = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let out = tmp.path().join(name);
        let o = ksring(&["run", "--mode", "renormalized", "--d", "3", "--duration", "0.1", "--out", out.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0), "{:?}", text(&o));
        out
    };
    let (a, b) = (run("a"), run("b"));
    for f in ["series.csv", "final.csv"] {
        assert_eq!(std::fs::read(a.join(f)).unwrap(), std::fs::read(b.join(f)).unwrap(), "{f}");
    }
}

#[test]
fn burgers_modes() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("decay");
    let o = ksring(&["run", "--mode=burgers", "--s-end", "40", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{:?}", text(&o));
    assert!(value(&summary(&out), "decay_rate").unwrap() >= 0.05);
    let out = tmp.path().join("still");
    let o = ksring(&["run", "--mode", "burgers", "--amp", "0", "--s-end", "10", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{:?}", text(&o));
    assert!(value(&summary(&out), "stationarity").unwrap() <= 1e-6);
}

#[test]
fn step_budget_exhaustion_is_no_blowup() {
    let tmp = tempfile::tempdir().unwrap();
    let o = ksring(&["run", "--mode", "physical", "--d", "3", "--max-steps", "100", "--out", tmp.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3), "{:?}", text(&o));
}

#[test]
fn physical_run_then_fit_and_decompose() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("phys");
    let o = ksring(&["run", "--mode", "physical", "--d", "3", "--snapshot-dtau", "1", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{:?}", text(&o));
    let s = summary(&out);
    for key in ["T", "M_inf", "check.slope_check"] {
        assert!(value(&s, key).is_some(), "{key} missing");
    }
    assert!(value(&s, "check.clock_chain").unwrap() <= 1e-6);

    let o = ksring(&["fit", out.join("series.csv").to_str().unwrap(), "--d", "3"]);
    assert_eq!(o.status.code(), Some(0), "{:?}", text(&o));
    let refit = text(&o).0;
    assert_eq!(value(&refit, "T"), value(&s, "T"));

    let o = ksring(&["decompose", out.join("final.csv").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{:?}", text(&o));
    let dec = text(&o).0;
    assert!(value(&dec, "G1").unwrap().abs() <= 1e-10);
    let r = value(&dec, "R").unwrap();
    assert!(r > 0.0 && r < 0.1);
    assert!(out.join("snapshots").read_dir().unwrap().count() >= 1);
}

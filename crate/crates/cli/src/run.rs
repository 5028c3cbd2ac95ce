//! `ksring run`: one mode, one output directory.

use std::fs;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use ksring::diagnostics::{bootstrap_check, lyapunov_monitor, samples_from_series, supersolution_audit};
use ksring::modulation::{fit_blowup_law, profile_defect, BlowupFit};
use ksring::physical::{init_ring_on, linear_fit, ring_mesh, run_to_blowup, MeshSpec, Outcome, PartialMassState, PhysicalConfig};
use ksring::profiles::{eval_q, eval_w, Side};
use ksring::record::Record;
use ksring::renormalized::{
    burgers_grid, burgers_perturbation, fit_decay_rate, init_renormalized, run_burgers, run_renormalized, RenormalizedConfig,
};
use ksring::series::{clock_chain_defect, TimeSeries};
use ksring::spectral::m0_spectrum;

use crate::checks::{self, Check};
use crate::config::{Mode, RunConfig};
use crate::error::{CliError, Tag};
use crate::plot::{Curve, Figure};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
    NoBlowup,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Pass => 0,
            Status::Fail => 1,
            Status::NoBlowup => 3,
        }
    }

    fn of(checks: &[Check]) -> Self {
        if checks.iter().any(Check::failed) {
            Status::Fail
        } else {
            Status::Pass
        }
    }
}

/// Artifacts of one run.
pub struct Report {
    pub dir: PathBuf,
    pub checks: Vec<Check>,
    pub status: Status,
}

struct Out {
    dir: PathBuf,
}

impl Out {
    fn new(dir: PathBuf) -> Result<Self, CliError> {
        fs::create_dir_all(&dir)?;
        Ok(Self { dir })
    }

    fn series(&self, name: &str, s: &TimeSeries) -> Result<(), CliError> {
        let path = self.dir.join(name);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent)?;
        }
        s.write_csv(BufWriter::new(fs::File::create(path)?))?;
        Ok(())
    }

    fn figure(&self, name: &str, fig: &Figure) -> Result<(), CliError> {
        let dir = self.dir.join("plots");
        fs::create_dir_all(&dir)?;
        fs::write(dir.join(format!("{name}.gp")), fig.script(name))?;
        Ok(())
    }

    fn summary(&self, rec: &Record) -> Result<(), CliError> {
        fs::write(self.dir.join("summary.txt"), rec.to_text())?;
        fs::write(self.dir.join("summary.json"), rec.to_json())?;
        Ok(())
    }
}

fn columns(rows: &[Vec<f64>], names: &[&str]) -> TimeSeries {
    let mut s = TimeSeries::new(names);
    rows.iter().for_each(|r| s.push(r.clone()));
    s
}

/// Snapshot columns `r, m, u, t, d`; the last two are constant.
pub fn snapshot(state: &PartialMassState) -> TimeSeries {
    let u = ksring::physical::density_of(state);
    let rows: Vec<Vec<f64>> =
        (0..state.r.len()).map(|i| vec![state.r[i], state.m[i], u[i], state.t, state.d as f64]).collect();
    columns(&rows, &["r", "m", "u", "t", "d"])
}

pub fn execute(cfg: &RunConfig) -> Result<Report, CliError> {
    cfg.validate()?;
    let out = Out::new(cfg.out_dir())?;
    let (summary, checks, status) = match cfg.mode {
        Mode::Physical => physical(cfg, &out)?,
        Mode::Renormalized => renormalized(cfg, &out)?,
        Mode::Burgers => burgers(cfg, &out)?,
        Mode::Spectral => spectral(cfg, &out)?,
        Mode::Audit => audit(cfg, &out)?,
    };
    let mut head = Record::new();
    head.text("mode", cfg.mode.name());
    if let Some(d) = cfg.d {
        head.int("d", d as i64);
    }
    head.extend("", &summary).extend("", &checks::record(&checks));
    head.text("status", match status {
        Status::Pass => "pass",
        Status::Fail => "fail",
        Status::NoBlowup => "no-blowup",
    });
    out.summary(&head)?;
    Ok(Report { dir: out.dir, checks, status })
}

type ModeResult = Result<(Record, Vec<Check>, Status), CliError>;

/// Blow-up law tolerances on a fit.
pub fn law_checks(fit: &BlowupFit, d: u32) -> Vec<Check> {
    let target = -(d as f64 - 2.0) / 2.0;
    vec![
        Check::at_most("law_ratio_spread", fit.ratio_spread, 0.10),
        Check::at_most("law_worst", fit.law_worst, 0.10),
        Check::at_most("M_drift", fit.m_drift, 0.05),
        Check::at_most("slope_check", ((fit.nu_slope - target) / target).abs(), 0.05),
    ]
}

fn physical(cfg: &RunConfig, out: &Out) -> ModeResult {
    let d = cfg.dimension();
    let mesh = MeshSpec { ratio: cfg.grading, ..MeshSpec::default() };
    let r_max = cfg.r_max.unwrap_or(4.0 * cfg.r0);
    let nodes = ring_mesh(r_max, cfg.r0, cfg.lambda0, cfg.a, &mesh);
    let init = init_ring_on(d, cfg.m0, cfg.r0, cfg.lambda0, cfg.zeta0, nodes).tag("physical")?;
    let pc = PhysicalConfig {
        stop_ratio: cfg.stop_ratio,
        max_steps: cfg.max_steps,
        ds: cfg.ds,
        record_ds: cfg.record_ds,
        snapshot_dtau: cfg.snapshot_dtau,
        a: cfg.a,
        zeta0: cfg.zeta0,
        mesh,
        ..PhysicalConfig::default()
    };
    let run = run_to_blowup(&init, &pc).tag("physical")?;
    out.series("series.csv", &run.series)?;
    for (k, s) in run.snapshots.iter().enumerate() {
        out.series(&format!("snapshots/snap_{k:03}.csv"), &snapshot(s))?;
    }
    out.series("final.csv", &snapshot(&run.state))?;

    let mut rec = Record::new();
    rec.text("outcome", &format!("{:?}", run.outcome))
        .int("steps", run.steps as i64)
        .int("remeshes", run.remeshes as i64)
        .num("mass_drift", run.worst_mass_drift)
        .num("min_slope", run.worst_min_slope)
        .num("T_est", run.t_est.unwrap_or(f64::NAN));
    let mut checks = vec![
        Check::at_most("mass_drift", run.worst_mass_drift, 1e-8),
        Check::at_least("min_slope", run.worst_min_slope, -1e-10),
    ];
    if let Some(cd) = clock_chain_defect(&run.series, d) {
        rec.num("clock_chain_defect", cd);
        checks.push(Check::at_most("clock_chain", cd, 1e-6));
    }
    let tau = run.series.column("tau").unwrap_or_default();
    let figs = [("R", true), ("M", false), ("nu", true)];
    for (col, log_y) in figs {
        let y = run.series.column(col).unwrap_or_default();
        let fig = Figure { title: col, xlabel: "tau", ylabel: col, log_y, curves: vec![Curve { label: col, x: &tau, y: &y }] };
        out.figure(&format!("{}_vs_tau", col.to_lowercase()), &fig)?;
    }
    if run.outcome == Outcome::NoBlowup {
        return Ok((rec, checks, Status::NoBlowup));
    }
    let fit = fit_blowup_law(&run.series, d).tag("modulation")?;
    rec.extend("", &fit.to_record());
    checks.extend(law_checks(&fit, d));
    if let Some(md) = run.modulation {
        rec.extend("final.", &md.to_record());
        let defect = profile_defect(&run.state, &md, 20.0);
        rec.num("profile_defect", defect);
        checks.push(Check::at_most("profile_vs_W", defect, 0.05));

        let (xi, u): (Vec<f64>, Vec<f64>) = {
            let dm = ksring::grid::derivative(&run.state.r, &run.state.m);
            run.state.r.iter().zip(&dm).map(|(r, g)| (md.xi_of(*r), g * md.lambda / md.m)).filter(|(x, _)| x.abs() <= 30.0).unzip()
        };
        let w: Vec<f64> = xi.iter().map(|x| eval_w(*x)).collect();
        let fig = Figure {
            title: "rescaled density at the ring",
            xlabel: "xi",
            ylabel: "lambda u r^(d-1) / M",
            log_y: false,
            curves: vec![Curve { label: "run", x: &xi, y: &u }, Curve { label: "W", x: &xi, y: &w }],
        };
        out.figure("profile", &fig)?;
    }
    let status = Status::of(&checks);
    Ok((rec, checks, status))
}

fn renormalized(cfg: &RunConfig, out: &Out) -> ModeResult {
    let d = cfg.dimension();
    let init = init_renormalized(d, cfg.m0, cfg.r0, cfg.lambda0, cfg.zeta0, cfg.a, cfg.h_xi).tag("renormalized")?;
    let rc = RenormalizedConfig { a: cfg.a, h_xi: cfg.h_xi, ds: cfg.ds, eta: cfg.eta, ..RenormalizedConfig::default() };
    let run = run_renormalized(&init, cfg.duration, &rc).tag("renormalized")?;
    out.series("series.csv", &run.series)?;
    let st = &run.state;
    let eps = st.m_eps();
    let rows: Vec<Vec<f64>> = (0..st.zeta.len()).map(|i| vec![st.zeta[i], st.m_w[i], eps[i]]).collect();
    out.series("final.csv", &columns(&rows, &["zeta", "m_w", "m_eps"]))?;

    let mut rec = Record::new();
    rec.int("steps", run.steps as i64).int("regrids", run.regrids as i64).num("nu_drift", run.worst_nu_drift);
    rec.extend("final.", &st.modulation.to_record());
    let mut checks = vec![Check::at_most("nu_drift", run.worst_nu_drift, 1e-8)];
    if let Some(cd) = clock_chain_defect(&run.series, d) {
        rec.num("clock_chain_defect", cd);
        checks.push(Check::at_most("clock_chain", cd, 1e-6));
    }
    let tau = run.series.column("tau").unwrap_or_default();
    let nu = run.series.column("nu").unwrap_or_default();
    let log_nu: Vec<f64> = nu.iter().map(|v| v.ln()).collect();
    if tau.len() >= 2 {
        rec.num("nu_slope", linear_fit(&tau, &log_nu).0);
    }
    let consts = cfg.constants()?;
    let boot = bootstrap_check(st, &consts).tag("diagnostics")?;
    rec.extend("bootstrap.", &boot.to_record());
    if let Ok(samples) = samples_from_series(&run.series) {
        if let Ok(l) = lyapunov_monitor(&samples, cfg.a, 0.05, 1.0) {
            rec.extend("lyapunov.", &l.to_record());
        }
    }
    let norm_in = run.series.column("norm_in").unwrap_or_default();
    let fig = Figure { title: "nu", xlabel: "tau", ylabel: "nu", log_y: true, curves: vec![Curve { label: "nu", x: &tau, y: &nu }] };
    out.figure("nu_vs_tau", &fig)?;
    let fig = Figure {
        title: "inner norm",
        xlabel: "tau",
        ylabel: "norm_in",
        log_y: false,
        curves: vec![Curve { label: "norm_in", x: &tau, y: &norm_in }],
    };
    out.figure("norm_in", &fig)?;
    let status = Status::of(&checks);
    Ok((rec, checks, status))
}

fn burgers(cfg: &RunConfig, out: &Out) -> ModeResult {
    let h = cfg.spacing();
    let grid = burgers_grid(h).tag("renormalized")?;
    let pert = burgers_perturbation(&grid, cfg.amp);
    let f0: Vec<f64> = grid.nodes.iter().zip(&pert).map(|(x, p)| eval_q(*x) + p).collect();
    let speed = f0.iter().fold(0.5f64, |a, f| a.max((f - 0.5).abs()));
    let ds = cfg.cfl * h / speed;
    let every = ((0.5 / ds).round() as usize).max(1);
    let (f, samples) = run_burgers(&grid, &f0, ds, cfg.s_end, every).tag("renormalized")?;
    let rows: Vec<Vec<f64>> = samples.iter().map(|r| r.to_vec()).collect();
    let series = columns(&rows, &["s", "deviation", "sup"]);
    out.series("series.csv", &series)?;
    let rows: Vec<Vec<f64>> = grid.nodes.iter().zip(&f).map(|(x, v)| vec![*x, *v, eval_q(*x)]).collect();
    out.series("final.csv", &columns(&rows, &["xi", "f", "Q"]))?;

    let s: Vec<f64> = samples.iter().map(|r| r[0]).collect();
    let dev: Vec<f64> = samples.iter().map(|r| r[1]).collect();
    let mut rec = Record::new();
    rec.num("h", h).num("ds", ds).num("amp", cfg.amp).num("final_deviation", *dev.last().unwrap_or(&f64::NAN));
    let mut checks = Vec::new();
    if cfg.amp > 0.0 {
        let (s_fit, d_fit): (Vec<f64>, Vec<f64>) = s.iter().zip(&dev).filter(|(s, _)| **s >= 10.0).map(|(a, b)| (*a, *b)).unzip();
        let rate = fit_decay_rate(&s_fit, &d_fit);
        rec.num("decay_rate", rate);
        checks.push(Check::at_least("decay_rate", rate, 0.05));
    } else {
        let sup = samples.iter().filter(|r| r[0] <= 10.0).map(|r| r[2]).fold(0.0, f64::max);
        rec.num("stationarity", sup);
        checks.push(Check::at_most("stationarity", sup, 1e-6));
    }
    let fig = Figure {
        title: "distance to Q",
        xlabel: "s",
        ylabel: "||f - Q||",
        log_y: true,
        curves: vec![Curve { label: "L2(omega0)", x: &s, y: &dev }],
    };
    out.figure("deviation", &fig)?;
    let status = Status::of(&checks);
    Ok((rec, checks, status))
}

fn spectral(cfg: &RunConfig, out: &Out) -> ModeResult {
    let h = cfg.spacing();
    let rep = m0_spectrum(cfg.l, h, 5).tag("spectral")?;
    let rows: Vec<Vec<f64>> = rep.eigenvalues.iter().enumerate().map(|(i, v)| vec![i as f64, *v]).collect();
    out.series("spectrum.csv", &columns(&rows, &["index", "eigenvalue"]))?;
    let n = rep.ground_state.len();
    let xi: Vec<f64> = (0..n).map(|i| -cfg.l + 2.0 * cfg.l * i as f64 / (n - 1) as f64).collect();
    let rows: Vec<Vec<f64>> = xi.iter().zip(&rep.ground_state).map(|(x, g)| vec![*x, *g]).collect();
    out.series("ground_state.csv", &columns(&rows, &["xi", "phi"]))?;
    let fig = Figure {
        title: "top eigenvector",
        xlabel: "xi",
        ylabel: "phi",
        log_y: false,
        curves: vec![Curve { label: "phi", x: &xi, y: &rep.ground_state }],
    };
    out.figure("ground_state", &fig)?;
    let checks = vec![
        Check::within("lambda0", rep.lambda0(), -1e-6, 1e-6),
        Check::at_most("kernel_error", rep.kernel_error, 1e-4),
        Check::within("gap_edge", rep.gap_edge, -0.0625 - 1e-2, -0.0625 + 1e-3),
    ];
    let status = Status::of(&checks);
    Ok((rep.to_record(), checks, status))
}

fn audit(cfg: &RunConfig, out: &Out) -> ModeResult {
    let d = cfg.dimension();
    let consts = cfg.constants()?;
    let mut rec = Record::new();
    rec.num("K", consts.k).num("kappa", consts.kappa).num("eta", consts.eta).num("nu", cfg.nu);
    let mut checks = Vec::new();
    let mut rows = Vec::new();
    // κ ≥ 1/4 is outside the range the barrier construction covers
    let xfail = cfg.kappa >= 0.25;
    for (side, tag) in [(Side::Right, "right"), (Side::Left, "left")] {
        let r = supersolution_audit(&consts, cfg.nu, d, side).tag("diagnostics")?;
        rec.extend(&format!("{tag}."), &r.to_record());
        rows.push(vec![if tag == "right" { 1.0 } else { -1.0 }, r.min_margin, r.at, r.min_ratio, r.positivity_min, r.phi2_identity]);
        checks.push(Check::at_least(&format!("{tag}_margin"), r.min_margin, 0.0).expect_fail(xfail));
        checks.push(Check::at_most(&format!("{tag}_phi2_identity"), r.phi2_identity, 1e-12));
    }
    out.series("margins.csv", &columns(&rows, &["side", "min_margin", "at", "min_ratio", "positivity_min", "phi2_identity"]))?;
    let init = init_renormalized(d, cfg.m0, cfg.r0, cfg.lambda0, cfg.zeta0, cfg.a, cfg.h_xi).tag("renormalized")?;
    let boot = bootstrap_check(&init, &consts).tag("diagnostics")?;
    rec.extend("bootstrap.", &boot.to_record());
    checks.push(Check::at_least("bootstrap_initial", boot.worst().1.margin, 0.0));
    let status = Status::of(&checks);
    Ok((rec, checks, status))
}

pub fn read_series(path: &Path) -> Result<TimeSeries, CliError> {
    let f = fs::File::open(path)?;
    TimeSeries::read_csv(std::io::BufReader::new(f)).tag("series")
}

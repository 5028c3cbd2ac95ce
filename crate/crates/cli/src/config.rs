//! Flat `key = value` run configuration.

use std::fmt;
use std::path::PathBuf;

use ksring::diagnostics::BootstrapConstants;

use crate::error::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Physical,
    Renormalized,
    Burgers,
    Spectral,
    Audit,
}

impl Mode {
    fn parse(v: &str) -> Option<Self> {
        Some(match v {
            "physical" => Mode::Physical,
            "renormalized" => Mode::Renormalized,
            "burgers" => Mode::Burgers,
            "spectral" => Mode::Spectral,
            "audit" => Mode::Audit,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Mode::Physical => "physical",
            Mode::Renormalized => "renormalized",
            Mode::Burgers => "burgers",
            Mode::Spectral => "spectral",
            Mode::Audit => "audit",
        }
    }

    fn needs_dimension(self) -> bool {
        matches!(self, Mode::Physical | Mode::Renormalized | Mode::Audit)
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Every key accepted in a config file or as `--key value`.
pub const KEYS: &[(&str, &str)] = &[
    ("mode", "physical | renormalized | burgers | spectral | audit (default physical)"),
    ("d", "dimension, at least 3 (required for physical, renormalized, audit)"),
    ("m0", "ring mass M0 (40)"),
    ("r0", "ring radius R0 (1)"),
    ("lambda0", "ring width lambda0 (0.025)"),
    ("zeta0", "inner cutoff of the profile (0.25)"),
    ("a", "zone constant A (10)"),
    ("k", "bootstrap constant K (e^(2A/5)); must lie in [e^(3A/10), e^(A/2)]"),
    ("kappa", "decay rate kappa (0.01)"),
    ("eta", "collar width eta (0.05)"),
    ("nu", "audit nu (1e-3)"),
    ("h_xi", "renormalized inner spacing in xi units (0.05)"),
    ("h", "spectral / burgers spacing (0.01 spectral; burgers 0.05, or 0.02 when amp = 0)"),
    ("l", "spectral half box (80)"),
    ("r_max", "physical outer radius (4 r0)"),
    ("grading", "mesh growth ratio (1.05)"),
    ("ds", "step in the inner clock s (1/40)"),
    ("cfl", "burgers step as a fraction of h/max|f - 1/2| (0.5)"),
    ("stop_ratio", "stop once lambda/R falls below this (1e-3)"),
    ("max_steps", "step budget (2000000)"),
    ("duration", "renormalized run length in tau (1)"),
    ("s_end", "burgers run length in s (60)"),
    ("amp", "burgers perturbation amplitude (0.05)"),
    ("record_ds", "physical record cadence in s (0.5)"),
    ("snapshot_dtau", "physical snapshot cadence in tau (off)"),
    ("out", "output directory (KSRING_OUT/<mode> or ksring-out/<mode>)"),
    ("seed", "seed for randomized suites (2024)"),
];

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub mode: Mode,
    pub d: Option<u32>,
    pub m0: f64,
    pub r0: f64,
    pub lambda0: f64,
    pub zeta0: f64,
    pub a: f64,
    pub k: Option<f64>,
    pub kappa: f64,
    pub eta: f64,
    pub nu: f64,
    pub h_xi: f64,
    pub h: Option<f64>,
    pub l: f64,
    pub r_max: Option<f64>,
    pub grading: f64,
    pub ds: f64,
    pub cfl: f64,
    pub stop_ratio: f64,
    pub max_steps: usize,
    pub duration: f64,
    pub s_end: f64,
    pub amp: f64,
    pub record_ds: f64,
    pub snapshot_dtau: Option<f64>,
    pub out: Option<PathBuf>,
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            mode: Mode::Physical,
            d: None,
            m0: 40.0,
            r0: 1.0,
            lambda0: 0.025,
            zeta0: 0.25,
            a: 10.0,
            k: None,
            kappa: 0.01,
            eta: 0.05,
            nu: 1e-3,
            h_xi: 0.05,
            h: None,
            l: 80.0,
            r_max: None,
            grading: 1.05,
            ds: 1.0 / 40.0,
            cfl: 0.5,
            stop_ratio: 1e-3,
            max_steps: 2_000_000,
            duration: 1.0,
            s_end: 60.0,
            amp: 0.05,
            record_ds: 0.5,
            snapshot_dtau: None,
            out: None,
            seed: 2024,
        }
    }
}

/// Where a setting came from, for error messages.
#[derive(Clone, Copy, Debug)]
pub enum Origin {
    Line(usize),
    Flag,
}

fn err(origin: Origin, key: &str, msg: impl Into<String>) -> CliError {
    CliError::Config { line: match origin { Origin::Line(n) => Some(n), Origin::Flag => None }, key: key.to_string(), msg: msg.into() }
}

fn num(origin: Origin, key: &str, v: &str) -> Result<f64, CliError> {
    let x: f64 = v.parse().map_err(|_| err(origin, key, format!("`{v}` is not a number")))?;
    if !x.is_finite() {
        return Err(err(origin, key, format!("`{v}` is not finite")));
    }
    Ok(x)
}

fn positive(origin: Origin, key: &str, v: &str) -> Result<f64, CliError> {
    let x = num(origin, key, v)?;
    if x <= 0.0 {
        return Err(err(origin, key, format!("{x} must be positive")));
    }
    Ok(x)
}

impl RunConfig {
    pub fn set(&mut self, key: &str, value: &str, origin: Origin) -> Result<(), CliError> {
        let p = |v: &str| positive(origin, key, v);
        match key {
            "mode" => {
                self.mode = Mode::parse(value).ok_or_else(|| err(origin, key, format!("unknown mode `{value}`")))?;
            }
            "d" => {
                let d: u32 = value.parse().map_err(|_| err(origin, key, format!("`{value}` is not an integer")))?;
                if d < 3 {
                    return Err(err(origin, key, format!("dimension {d} must be at least 3")));
                }
                self.d = Some(d);
            }
            "m0" => self.m0 = p(value)?,
            "r0" => self.r0 = p(value)?,
            "lambda0" => self.lambda0 = p(value)?,
            "zeta0" => self.zeta0 = p(value)?,
            "a" => self.a = p(value)?,
            "k" => self.k = Some(p(value)?),
            "kappa" => self.kappa = p(value)?,
            "eta" => self.eta = p(value)?,
            "nu" => self.nu = p(value)?,
            "h_xi" => self.h_xi = p(value)?,
            "h" => self.h = Some(p(value)?),
            "l" => self.l = p(value)?,
            "r_max" => self.r_max = Some(p(value)?),
            "grading" => {
                let g = p(value)?;
                if g <= 1.0 {
                    return Err(err(origin, key, format!("{g} must exceed 1")));
                }
                self.grading = g;
            }
            "ds" => self.ds = p(value)?,
            "cfl" => self.cfl = p(value)?,
            "stop_ratio" => self.stop_ratio = p(value)?,
            "max_steps" => {
                self.max_steps = value.parse().map_err(|_| err(origin, key, format!("`{value}` is not a count")))?;
            }
            "duration" => self.duration = p(value)?,
            "s_end" => self.s_end = p(value)?,
            "amp" => {
                let x = num(origin, key, value)?;
                if x < 0.0 {
                    return Err(err(origin, key, format!("{x} must be nonnegative")));
                }
                self.amp = x;
            }
            "record_ds" => self.record_ds = p(value)?,
            "snapshot_dtau" => self.snapshot_dtau = Some(p(value)?),
            "out" => self.out = Some(PathBuf::from(value)),
            "seed" => {
                self.seed = value.parse().map_err(|_| err(origin, key, format!("`{value}` is not a seed")))?;
            }
            _ => return Err(err(origin, key, "unknown key")),
        }
        Ok(())
    }

    /// Parses a config file body. Repeated keys are an error.
    pub fn parse(src: &str) -> Result<Self, CliError> {
        let mut cfg = RunConfig::default();
        let mut seen: Vec<String> = Vec::new();
        for (i, raw) in src.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let origin = Origin::Line(i + 1);
            let (k, v) = line.split_once('=').ok_or_else(|| err(origin, line, "expected `key = value`"))?;
            let (k, v) = (k.trim(), v.trim());
            if k.is_empty() {
                return Err(err(origin, k, "empty key"));
            }
            if seen.iter().any(|s| s == k) {
                return Err(err(origin, k, "key given twice"));
            }
            seen.push(k.to_string());
            cfg.set(k, v, origin)?;
        }
        Ok(cfg)
    }

    /// Applies `--key value` / `--key=value` pairs.
    pub fn apply_flags(&mut self, args: &[String]) -> Result<(), CliError> {
        let mut it = args.iter();
        while let Some(a) = it.next() {
            let body = a.strip_prefix("--").ok_or_else(|| CliError::Usage(format!("expected `--key value`, got `{a}`")))?;
            let (k, v) = match body.split_once('=') {
                Some((k, v)) => (k.to_string(), v.to_string()),
                None => {
                    let v = it.next().ok_or_else(|| err(Origin::Flag, body, "missing value"))?;
                    (body.to_string(), v.clone())
                }
            };
            self.set(&k.replace('-', "_"), &v, Origin::Flag)?;
        }
        Ok(())
    }

    /// Cross-key checks run after all sources are merged.
    pub fn validate(&self) -> Result<(), CliError> {
        if self.mode.needs_dimension() && self.d.is_none() {
            return Err(CliError::Config { line: None, key: "d".into(), msg: format!("missing required key for mode {}", self.mode) });
        }
        if self.lambda0 >= self.r0 {
            return Err(err(Origin::Flag, "lambda0", format!("{} must be below r0 = {}", self.lambda0, self.r0)));
        }
        if self.nu >= 1.0 {
            return Err(err(Origin::Flag, "nu", format!("{} must be below 1", self.nu)));
        }
        self.constants()?;
        Ok(())
    }

    pub fn dimension(&self) -> u32 {
        self.d.unwrap_or(3)
    }

    pub fn constants(&self) -> Result<BootstrapConstants, CliError> {
        let k = self.k.unwrap_or((0.4 * self.a).exp());
        BootstrapConstants::new(self.a, k, self.kappa, self.eta, self.m0)
            .map_err(|e| CliError::Config { line: None, key: "k".into(), msg: e.to_string() })
    }

    /// Mesh width: 0.05 for Burgers decay runs, 0.02 for the unperturbed
    /// (stationarity) Burgers run, 0.01 otherwise.
    pub fn spacing(&self) -> f64 {
        self.h.unwrap_or(match self.mode {
            Mode::Burgers if self.amp > 0.0 => 0.05,
            Mode::Burgers => 0.02,
            _ => 0.01,
        })
    }

    /// Output directory: the `out` key, else `$KSRING_OUT/<tag>`, else `ksring-out/<tag>`.
    pub fn out_dir(&self) -> PathBuf {
        if let Some(p) = &self.out {
            return p.clone();
        }
        let tag = match (self.mode.needs_dimension(), self.d) {
            (true, Some(d)) => format!("{}-d{d}", self.mode),
            _ => self.mode.to_string(),
        };
        let root = std::env::var_os("KSRING_OUT").map(PathBuf::from).unwrap_or_else(|| PathBuf::from("ksring-out"));
        root.join(tag)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn file_and_flags() {
        let mut c = RunConfig::parse("# ring run\nmode = physical\nd = 3  # dimension\nds=0.05\n").unwrap();
        assert_eq!(c.d, Some(3));
        assert_eq!(c.ds, 0.05);
        c.apply_flags(&["--ds".into(), "0.01".into(), "--stop-ratio=1e-2".into()]).unwrap();
        assert_eq!(c.ds, 0.01);
        assert_eq!(c.stop_ratio, 1e-2);
        c.validate().unwrap();
    }

    #[test]
    fn errors_carry_context() {
        let e = RunConfig::parse("mode = physical\n\nds = -1\n").unwrap_err();
        assert_eq!(e.to_string(), "config error at line 3, key `ds`: -1 must be positive");
        let e = RunConfig::parse("mode = physical\n").unwrap().validate().unwrap_err();
        assert!(e.to_string().contains("`d`"), "{e}");
        assert!(RunConfig::parse("d = 3\nd = 4\n").is_err());
        assert!(RunConfig::parse("speed = 3\n").unwrap_err().to_string().contains("`speed`"));
        let e = RunConfig::parse("mode = spectral\nk = 1\n").unwrap().validate().unwrap_err();
        assert!(e.to_string().contains("`k`"), "{e}");
    }
}

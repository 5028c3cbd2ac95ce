//! `ksring`: run ring-collapse experiments, re-fit series, decompose
//! snapshots and run the verification suites.
//!
//! Exit codes: 0 pass, 1 assertion or runtime failure, 2 usage or config
//! error, 3 no blow-up.

mod checks;
mod config;
mod error;
mod plot;
mod run;
mod verify;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use ksring::modulation::{decompose, detect_ring, fit_blowup_law, profile_defect, ModulationState};
use ksring::physical::PartialMassState;
use ksring::record::Record;

use checks::Check;
use config::RunConfig;
use error::{CliError, Tag};
use verify::{BarrierSettings, Suite};

#[derive(Parser)]
#[command(name = "ksring", version, about = "Radial Keller-Segel ring collapse experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one mode. Any config key can be given as `--key value`;
    /// `ksring keys` lists them.
    Run {
        /// Flat `key = value` config file.
        #[arg(short, long)]
        config: Option<PathBuf>,
        /// `--key value` overrides.
        #[arg(trailing_var_arg = true, allow_hyphen_values = true, value_name = "--KEY VALUE")]
        overrides: Vec<String>,
    },
    /// Run property suites and print a margin table.
    Verify {
        #[arg(value_enum, default_value = "all")]
        suite: Suite,
        #[arg(long, default_value_t = 2024)]
        seed: u64,
        #[arg(long, default_value_t = 3)]
        d: u32,
        #[arg(long, default_value_t = 1e-3)]
        nu: f64,
        #[arg(long, default_value_t = 0.01)]
        kappa: f64,
        #[arg(long, default_value_t = 0.05)]
        eta: f64,
        #[arg(long, default_value_t = 10.0)]
        a: f64,
        #[arg(long)]
        k: Option<f64>,
    },
    /// Re-fit the blow-up law on an existing series CSV.
    Fit {
        series: PathBuf,
        #[arg(long)]
        d: u32,
    },
    /// Decompose one snapshot CSV (columns r, m and optionally t, d).
    Decompose {
        snapshot: PathBuf,
        #[arg(long)]
        d: Option<u32>,
        #[arg(long, default_value_t = 10.0)]
        a: f64,
        #[arg(long, default_value_t = 0.25)]
        zeta0: f64,
    },
    /// List the config keys.
    Keys,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn print_checks(checks: &[Check]) -> i32 {
    print!("{}", checks::table(checks));
    if let Some(c) = checks.iter().find(|c| c.failed()) {
        eprintln!("first failure: {} = {:e} (required {})", c.name, c.value, c.limit);
        1
    } else {
        0
    }
}

fn dispatch(cmd: Command) -> Result<i32, CliError> {
    match cmd {
        Command::Run { config, overrides } => {
            let mut cfg = match config {
                Some(p) => RunConfig::parse(&std::fs::read_to_string(&p)?)?,
                None => RunConfig::default(),
            };
            cfg.apply_flags(&overrides)?;
            let start = std::time::Instant::now();
            let rep = run::execute(&cfg)?;
            println!("{} run written to {}", cfg.mode, rep.dir.display());
            print_checks(&rep.checks);
            println!("elapsed {:.1} s", start.elapsed().as_secs_f64());
            Ok(rep.status.exit_code())
        }
        Command::Verify { suite, seed, d, nu, kappa, eta, a, k } => {
            if d < 3 {
                return Err(CliError::Usage(format!("dimension {d} must be at least 3")));
            }
            let set = BarrierSettings { d, nu, kappa, eta, a, k };
            let mut code = 0;
            for (name, checks) in verify::run(suite, seed, &set)? {
                println!("[{name}]");
                code = code.max(print_checks(&checks));
            }
            Ok(code)
        }
        Command::Fit { series, d } => {
            let s = run::read_series(&series)?;
            let fit = fit_blowup_law(&s, d).tag("modulation")?;
            print!("{}", fit.to_record().to_text());
            Ok(print_checks(&run::law_checks(&fit, d)))
        }
        Command::Decompose { snapshot, d, a, zeta0 } => {
            let s = run::read_series(&snapshot)?;
            let col = |k: &str| s.column(k).ok_or_else(|| CliError::Usage(format!("snapshot has no `{k}` column")));
            let (r, m) = (col("r")?, col("m")?);
            let t = s.last("t").unwrap_or(0.0);
            let d = match (d, s.last("d")) {
                (Some(d), _) => d,
                (None, Some(v)) => v as u32,
                (None, None) => return Err(CliError::Usage("pass --d or include a `d` column".into())),
            };
            let state = PartialMassState::new(d, r, m, t).tag("physical")?;
            let ring = detect_ring(&state).tag("modulation")?;
            let guess = ModulationState::from_radius_mass(d, ring.r, ring.mass, t).tag("modulation")?;
            let dec = decompose(&state, &guess, a, zeta0).tag("modulation")?;
            let mut rec = Record::new();
            rec.extend("", &dec.modulation.to_record())
                .num("G1", dec.g1)
                .num("G2", dec.g2)
                .int("iterations", dec.iterations as i64)
                .num("profile_defect", profile_defect(&state, &dec.modulation, 20.0))
                .flag("multimodal", ring.multimodal);
            print!("{}", rec.to_text());
            Ok(0)
        }
        Command::Keys => {
            for (k, help) in config::KEYS {
                println!("{k:<14} {help}");
            }
            Ok(0)
        }
    }
}

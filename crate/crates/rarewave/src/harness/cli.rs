//! Command-line front end: `profile`, `solve`, `decay`, `verify`.

use std::fs;
use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};

use crate::analysis::FitWindow;
use crate::flux::ConvexFlux;
use crate::profiles::{envelope_report, EnvelopeCheck, EnvelopeQuantity, WaveProfile};

use super::config::ExperimentConfig;
use super::report;
use super::runner;
use super::svg::{self, PlotSeries};
use super::HarnessError;

#[derive(Parser)]
#[command(
    name = "rarewave",
    version,
    about = "Reference wave profiles, a viscous conservation-law solver, and decay-rate measurement"
)]
struct Cli {
    /// Output root (default: $RAREWAVE_OUT, falling back to ./runs)
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample a reference profile and its derivatives to CSV and SVG
    Profile(ProfileArgs),
    /// Run a configured experiment: snapshots, norm series, manifest
    Solve { config: PathBuf },
    /// Fit decay exponents for the configured checks and verdict them
    Decay {
        config: PathBuf,
        /// Reuse the norm series of an existing run directory
        #[arg(long)]
        run_dir: Option<PathBuf>,
    },
    /// Run the wave-profile invariant and envelope suite
    Verify(VerifyArgs),
}

#[derive(Args)]
struct ProfileArgs {
    /// rarefaction | smoothed | contact
    #[arg(long)]
    kind: String,
    /// burgers | exponential
    #[arg(long, default_value = "burgers")]
    flux: String,
    #[arg(long, default_value_t = -1.0, allow_hyphen_values = true)]
    um: f64,
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    up: f64,
    /// Smoothing exponent (smoothed kind)
    #[arg(long, default_value_t = 1.0)]
    q: f64,
    /// Diffusion coefficient (contact kind)
    #[arg(long, default_value_t = 1.0)]
    mu: f64,
    /// Wave speed (contact kind)
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    speed: f64,
    /// Sampling time
    #[arg(long)]
    t: f64,
    #[arg(long, allow_hyphen_values = true)]
    xmin: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    xmax: Option<f64>,
    #[arg(long, default_value_t = 401)]
    points: usize,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, default_value = "burgers")]
    flux: String,
    #[arg(long, default_value_t = 1.0)]
    q: f64,
    #[arg(long, default_value_t = -1.0, allow_hyphen_values = true)]
    um: f64,
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    up: f64,
    /// Derivative orders to check (subset of "1,2")
    #[arg(long, default_value = "1,2")]
    orders: String,
    /// Norm orders, e.g. "1,2,4,inf"
    #[arg(long, default_value = "1,2,4,inf")]
    norms: String,
    #[arg(long, default_value_t = 10.0)]
    t_lo: f64,
    #[arg(long, default_value_t = 1000.0)]
    t_hi: f64,
    #[arg(long, default_value_t = 28)]
    samples: usize,
}

/// Entry point of the binary; returns the process exit code.
pub fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 2,
            };
            let _ = e.print();
            return code;
        }
    };
    let out_root = cli
        .out
        .or_else(|| std::env::var_os("RAREWAVE_OUT").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("runs"));
    let result = match cli.command {
        Command::Profile(args) => cmd_profile(&args, &out_root),
        Command::Solve { config } => cmd_solve(&config, &out_root),
        Command::Decay { config, run_dir } => cmd_decay(&config, run_dir.as_deref(), &out_root),
        Command::Verify(args) => return cmd_verify(&args),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("rarewave: {e}");
            e.exit_code()
        }
    }
}

fn parse_flux(kind: &str) -> Result<ConvexFlux, HarnessError> {
    match kind {
        "burgers" => Ok(ConvexFlux::Burgers),
        "exponential" => Ok(ConvexFlux::Exponential),
        other => Err(HarnessError::Usage(format!("unknown flux kind {other:?}"))),
    }
}

fn cmd_profile(args: &ProfileArgs, out_root: &Path) -> Result<(), HarnessError> {
    let flux = parse_flux(&args.flux)?;
    let profile = match args.kind.as_str() {
        "rarefaction" => WaveProfile::rarefaction(flux.clone(), args.um, args.up),
        "smoothed" => WaveProfile::smoothed_rarefaction(flux.clone(), args.um, args.up, args.q),
        "contact" => WaveProfile::contact(args.um, args.up, args.mu, args.speed),
        other => return Err(HarnessError::Usage(format!("unknown profile kind {other:?}"))),
    }
    .map_err(|e| HarnessError::Usage(e.to_string()))?;

    let (lm, lp) = match args.kind.as_str() {
        "contact" => {
            let spread = 6.0 * (4.0 * args.mu * args.t.max(1.0)).sqrt();
            (args.speed * args.t - spread, args.speed * args.t + spread)
        }
        _ => (flux.df(args.um) * args.t, flux.df(args.up) * args.t),
    };
    let x_lo = args.xmin.unwrap_or(lm.min(0.0) - 10.0);
    let x_hi = args.xmax.unwrap_or(lp.max(0.0) + 10.0);
    if !(x_hi > x_lo) || args.points < 2 {
        return Err(HarnessError::Usage("empty sampling range".into()));
    }

    let dir = out_root.join("profile");
    fs::create_dir_all(&dir).map_err(|e| HarnessError::io(&dir, e))?;

    let mut csv = String::from("x,value,dx,dt,dxx\n");
    let mut curve = Vec::with_capacity(args.points);
    for i in 0..args.points {
        let x = x_lo + (x_hi - x_lo) * i as f64 / (args.points - 1) as f64;
        let err = |e: crate::profiles::ProfileError| HarnessError::Usage(e.to_string());
        let value = profile.value(args.t, x).map_err(err)?;
        let dx = profile.deriv_x(args.t, x).map_err(err)?;
        let dt = profile.deriv_t(args.t, x).map_err(err)?;
        let dxx = profile.deriv_xx(args.t, x).map_err(err)?;
        csv.push_str(&format!("{x},{value},{dx},{dt},{dxx}\n"));
        curve.push((x, value));
    }
    let csv_path = dir.join(format!("profile_{}.csv", args.kind));
    fs::write(&csv_path, csv).map_err(|e| HarnessError::io(&csv_path, e))?;

    let mut series = vec![PlotSeries { label: args.kind.clone(), points: curve }];
    if args.kind == "smoothed" && args.t > 0.0 {
        let exact = WaveProfile::rarefaction(flux.clone(), args.um, args.up)
            .map_err(|e| HarnessError::Usage(e.to_string()))?;
        let mut points = Vec::with_capacity(args.points);
        for i in 0..args.points {
            let x = x_lo + (x_hi - x_lo) * i as f64 / (args.points - 1) as f64;
            points.push((
                x,
                exact
                    .value(args.t, x)
                    .map_err(|e| HarnessError::Usage(e.to_string()))?,
            ));
        }
        series.push(PlotSeries { label: "rarefaction".into(), points });
    }
    let svg_path = dir.join(format!("profile_{}.svg", args.kind));
    let title = format!("{} profile at t = {}", args.kind, args.t);
    fs::write(&svg_path, svg::line_plot(&title, "x", "u", &series))
        .map_err(|e| HarnessError::io(&svg_path, e))?;

    println!("wrote {}", csv_path.display());
    println!("wrote {}", svg_path.display());
    Ok(())
}

fn load_config(path: &Path) -> Result<(ExperimentConfig, String), HarnessError> {
    let text = fs::read_to_string(path)
        .map_err(|e| HarnessError::Config(format!("cannot read {}: {e}", path.display())))?;
    let config = ExperimentConfig::from_toml(&text)?;
    Ok((config, text))
}

fn cmd_solve(config_path: &Path, out_root: &Path) -> Result<(), HarnessError> {
    let (exp, text) = load_config(config_path)?;
    let (dir, products) = runner::run_solve(&exp, &text, out_root)?;
    println!(
        "run {:?}: {} snapshots, {} steps -> {}",
        exp.name,
        products.output.snapshots.len(),
        products.output.diagnostics.steps,
        dir.display()
    );
    if let Some(err) = products.oracle_max_error {
        println!("exact-solution oracle max error: {err:.3e}");
    }
    Ok(())
}

fn cmd_decay(
    config_path: &Path,
    run_dir: Option<&Path>,
    out_root: &Path,
) -> Result<(), HarnessError> {
    let (exp, text) = load_config(config_path)?;
    let products = runner::run_decay(&exp, &text, run_dir, out_root)?;
    print!("{}", report::decay_summary(&products.reports));
    println!("reports -> {}", products.dir.display());
    Ok(())
}

fn cmd_verify(args: &VerifyArgs) -> i32 {
    match verify_suite(args) {
        Ok(all_pass) => {
            if all_pass {
                0
            } else {
                1
            }
        }
        Err(e) => {
            eprintln!("rarewave: {e}");
            e.exit_code()
        }
    }
}

fn verify_suite(args: &VerifyArgs) -> Result<bool, HarnessError> {
    if !(args.q > 0.5) {
        return Err(HarnessError::Usage(format!(
            "smoothing exponent must exceed 1/2, got q = {}",
            args.q
        )));
    }
    let flux = parse_flux(&args.flux)?;
    let profile = WaveProfile::smoothed_rarefaction(flux.clone(), args.um, args.up, args.q)
        .map_err(|e| HarnessError::Usage(e.to_string()))?;
    let map = profile.characteristic_map().unwrap();
    let (wm, wp) = map.far_fields();

    let mut all_pass = true;
    let mut line = |label: &str, pass: bool| {
        println!("{label:<52} {}", if pass { "PASS" } else { "FAIL" });
        all_pass &= pass;
    };

    // pointwise invariants on a deterministic sample
    let mut bounds_ok = true;
    let mut round_trip_ok = true;
    let mut transport_ok = true;
    let mut k = 0u32;
    for i in 0..40 {
        for j in 0..40 {
            k = k.wrapping_add(1);
            let t = args.t_hi * (i as f64 + 0.5) / 40.0;
            let span = wp.max(wm.abs()) * t + 30.0;
            let x = -span + 2.0 * span * (j as f64 + 0.5) / 40.0 + 0.01 * k as f64;
            let w = map.speed(t, x);
            bounds_ok &= w > wm && w < wp && map.speed_dx(t, x) > 0.0;
            let x0 = map.foot(t, x);
            round_trip_ok &= (x0 + map.initial(x0) * t - x).abs() <= 1e-10;
            let h = 1e-5;
            let wt = if t > h {
                (map.speed(t + h, x) - map.speed(t - h, x)) / (2.0 * h)
            } else {
                map.speed_dt(t, x)
            };
            transport_ok &= (wt + w * map.speed_dx(t, x)).abs() <= 1e-7;
        }
    }
    line(&format!("bounds {wm:.3} < w < {wp:.3} and dw/dx > 0"), bounds_ok);
    line("characteristic foot round-trip <= 1e-10", round_trip_ok);
    line("transport residual dw/dt + w dw/dx <= 1e-7", transport_ok);

    // envelope rates
    let times: Vec<f64> = (0..args.samples)
        .map(|i| {
            args.t_lo * (args.t_hi / args.t_lo).powf(i as f64 / (args.samples - 1).max(1) as f64)
        })
        .collect();
    let orders: Vec<u8> = args
        .orders
        .split(',')
        .filter(|s| !s.is_empty())
        .map(|s| s.trim().parse::<u8>().map_err(|_| HarnessError::Usage(format!("bad order {s:?}"))))
        .collect::<Result<_, _>>()?;
    let norms: Vec<f64> = args
        .norms
        .split(',')
        .filter(|s| !s.is_empty())
        .map(|s| {
            let s = s.trim();
            if s == "inf" {
                Ok(f64::INFINITY)
            } else {
                s.parse::<f64>().map_err(|_| HarnessError::Usage(format!("bad norm {s:?}")))
            }
        })
        .collect::<Result<_, _>>()?;

    let mut checks: Vec<EnvelopeCheck> = Vec::new();
    for &order in &orders {
        let (quantity, tolerance) = match order {
            1 => (EnvelopeQuantity::DerivX, 0.05),
            2 => (EnvelopeQuantity::DerivXx, 0.1),
            other => {
                return Err(HarnessError::Usage(format!(
                    "derivative order {other} not supported (1 or 2)"
                )))
            }
        };
        for &r in &norms {
            let check = envelope_report(
                &flux,
                args.q,
                args.um,
                args.up,
                &times,
                quantity,
                r,
                tolerance,
                FitWindow::LastLogFraction(0.6),
            )
            .map_err(|e| HarnessError::Internal(e.to_string()))?;
            checks.push(check);
        }
    }
    if let Ok(diff) = envelope_report(
        &flux,
        args.q,
        args.um,
        args.up,
        &times,
        EnvelopeQuantity::DiffFromRarefaction,
        2.0,
        0.1,
        FitWindow::LastLogFraction(0.6),
    ) {
        checks.push(diff);
    }
    print!("{}", report::envelope_summary(&checks));
    let envelopes_ok = checks.iter().all(|c| c.pass);

    Ok(all_pass && envelopes_ok)
}

//! Orchestrates solver runs, norm-series extraction and file artifacts.
//!
//! File layout of one run directory:
//!
//! ```text
//! <out>/<name>/
//!   snap_<t>.csv        one per snapshot, columns t,x,u (t at 6 decimals)
//!   norm_series.csv     columns t,<check labels...>,mass,linf,dissipation
//!   manifest.json       config hash, tool version, wall times, verdicts
//!   report_<label>.json one DecayReport per check (written by `decay`)
//!   norms.svg           log-log norm curves with the expected slope guide
//! ```

use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use crate::analysis::{
    self, weighted_dissipation, DecayReport, Deviation, FitWindow, SeriesSpec,
};
use crate::profiles::WaveProfile;
use crate::solver::{self, RunOutput};

use super::config::{ExperimentConfig, PreparedCheck, RefKind};
use super::svg::{self, PlotSeries};
use super::HarnessError;

/// Everything a completed solve produces in memory.
pub struct SolveProducts {
    pub output: RunOutput,
    pub check_series: Vec<(PreparedCheck, Vec<(f64, f64)>)>,
    pub mass_series: Vec<(f64, f64)>,
    pub linf_series: Vec<(f64, f64)>,
    pub dissipation_series: Vec<(f64, f64)>,
    pub dissipation_integral: f64,
    pub oracle_max_error: Option<f64>,
}

fn reference_for(
    exp: &ExperimentConfig,
    kind: &RefKind,
) -> Result<Option<(WaveProfile, f64)>, HarnessError> {
    let flux = exp.build_flux()?;
    let (um, up) = (exp.states.u_minus, exp.states.u_plus);
    let t0 = exp.initial.t0;
    let built = match kind {
        RefKind::None | RefKind::Constant(_) => None,
        RefKind::Rarefaction { shift } => Some((
            WaveProfile::rarefaction(flux, um, up)
                .map_err(|e| HarnessError::Config(e.to_string()))?,
            t0 + shift,
        )),
        RefKind::Smoothed { q } => Some((
            WaveProfile::smoothed_rarefaction(flux, um, up, *q)
                .map_err(|e| HarnessError::Config(e.to_string()))?,
            t0,
        )),
        RefKind::Contact => Some((
            WaveProfile::contact(um, up, exp.initial.contact_mu, exp.initial.contact_speed)
                .map_err(|e| HarnessError::Config(e.to_string()))?,
            t0,
        )),
    };
    Ok(built)
}

/// The profile the run's primary deviation is measured against (the same one
/// the boundary anchors follow), or the constant state.
fn primary_reference(exp: &ExperimentConfig) -> Result<Option<(WaveProfile, f64)>, HarnessError> {
    match exp.initial.kind.as_str() {
        "constant-plus-bump" => Ok(None),
        "mollified-riemann" => reference_for(exp, &RefKind::Smoothed { q: exp.initial.q }),
        _ => match exp.initial.profile.as_deref() {
            Some("contact-wave") => reference_for(exp, &RefKind::Contact),
            _ => reference_for(exp, &RefKind::Smoothed { q: exp.initial.q }),
        },
    }
}

/// Runs the solver and assembles every configured norm series plus the
/// standing diagnostics (mass, sup norm, weighted dissipation).
pub fn compute_products(exp: &ExperimentConfig) -> Result<SolveProducts, HarnessError> {
    let solver_config = exp.to_solver_config()?;
    let output = solver::solve(&solver_config)?;
    let flux = exp.build_flux()?;
    let law = exp.build_law()?;
    let checks = exp.prepared_checks()?;
    let views = output.views();

    let mut check_series = Vec::with_capacity(checks.len());
    for check in checks {
        let reference = reference_for(exp, &check.reference)?;
        let spec = SeriesSpec {
            quantity: check.quantity,
            reference: reference.as_ref().map(|(p, shift)| (p, *shift)),
            constant: match check.reference {
                RefKind::Constant(c) => Some(c),
                _ => None,
            },
            norm: check.norm,
        };
        let series = analysis::norm_series(&views, &spec, &flux, &law)?;
        check_series.push((check, series));
    }

    let mut mass_series = Vec::new();
    let mut linf_series = Vec::new();
    for (snap, diag) in output.snapshots.iter().zip(&output.diagnostics.per_snapshot) {
        mass_series.push((snap.t, diag.interior_mass));
        linf_series.push((snap.t, analysis::linf_norm(&snap.values)));
    }

    let primary = primary_reference(exp)?;
    let mut dissipation_series = Vec::new();
    for snap in &output.snapshots {
        let deviation = match &primary {
            Some((profile, t0)) => Deviation::new(snap.view(), profile, t0 + snap.t)?,
            None => Deviation::from_constant(snap.view(), exp.initial.u_bar)?,
        };
        let grad = analysis::gradient_field(&deviation.values, snap.dx);
        dissipation_series.push((snap.t, weighted_dissipation(&grad, snap.dx, exp.viscosity.p)));
    }
    let mut dissipation_integral = 0.0;
    for pair in dissipation_series.windows(2) {
        dissipation_integral +=
            0.5 * (pair[0].1 + pair[1].1) * (pair[1].0 - pair[0].0);
    }

    // Exact-solution oracle for the pure-diffusion contact runs.
    let oracle_max_error = if flux.is_zero()
        && matches!(exp.initial.profile.as_deref(), Some("contact-wave"))
    {
        let (profile, t0) = reference_for(exp, &RefKind::Contact)?.unwrap();
        let mut err: f64 = 0.0;
        for snap in &output.snapshots {
            for j in 0..snap.n_cells {
                let exact = profile
                    .value(t0 + snap.t, snap.cell_center(j))
                    .map_err(|e| HarnessError::Internal(e.to_string()))?;
                err = err.max((snap.values[j] - exact).abs());
            }
        }
        Some(err)
    } else {
        None
    };

    Ok(SolveProducts {
        output,
        check_series,
        mass_series,
        linf_series,
        dissipation_series,
        dissipation_integral,
        oracle_max_error,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VerdictLine {
    pub label: String,
    pub fitted: f64,
    pub theoretical: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub name: String,
    pub config_sha256: String,
    pub tool_version: String,
    pub started_unix_ms: u128,
    pub finished_unix_ms: u128,
    pub steps: u64,
    pub conservation_residual_max: f64,
    pub max_overshoot: f64,
    pub max_undershoot: f64,
    pub dissipation_integral: f64,
    #[serde(default)]
    pub oracle_max_error: Option<f64>,
    #[serde(default)]
    pub verdicts: Vec<VerdictLine>,
}

fn now_ms() -> u128 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_millis()).unwrap_or(0)
}

fn write_file(path: &Path, contents: &str) -> Result<(), HarnessError> {
    fs::write(path, contents).map_err(|e| HarnessError::io(path, e))
}

fn fmt_series_row(values: &[f64]) -> String {
    values.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",")
}

/// Runs a config and writes all solve artifacts into `out_dir/<name>`.
/// Returns the run directory and the products.
pub fn run_solve(
    exp: &ExperimentConfig,
    config_text: &str,
    out_root: &Path,
) -> Result<(PathBuf, SolveProducts), HarnessError> {
    let started = now_ms();
    let products = compute_products(exp)?;
    let finished = now_ms();

    let dir = out_root.join(&exp.name);
    fs::create_dir_all(&dir).map_err(|e| HarnessError::io(&dir, e))?;

    for snap in &products.output.snapshots {
        let mut csv = String::from("t,x,u\n");
        for j in 0..snap.n_cells {
            csv.push_str(&format!("{},{},{}\n", snap.t, snap.cell_center(j), snap.values[j]));
        }
        let name = format!("snap_{:.6}.csv", snap.t);
        write_file(&dir.join(name), &csv)?;
    }

    let mut header = vec!["t".to_string()];
    header.extend(products.check_series.iter().map(|(c, _)| c.label.clone()));
    header.extend(["mass".into(), "linf".into(), "dissipation".into()]);
    let mut csv = header.join(",");
    csv.push('\n');
    for (i, &(t, _)) in products.mass_series.iter().enumerate() {
        let mut row = vec![t];
        row.extend(products.check_series.iter().map(|(_, s)| s[i].1));
        row.push(products.mass_series[i].1);
        row.push(products.linf_series[i].1);
        row.push(products.dissipation_series[i].1);
        csv.push_str(&fmt_series_row(&row));
        csv.push('\n');
    }
    write_file(&dir.join("norm_series.csv"), &csv)?;

    let diag = &products.output.diagnostics;
    let manifest = RunManifest {
        name: exp.name.clone(),
        config_sha256: ExperimentConfig::sha256(config_text),
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        started_unix_ms: started,
        finished_unix_ms: finished,
        steps: diag.steps,
        conservation_residual_max: diag
            .per_snapshot
            .iter()
            .map(|d| d.conservation_residual)
            .fold(0.0, f64::max),
        max_overshoot: diag.max_overshoot,
        max_undershoot: diag.max_undershoot,
        dissipation_integral: products.dissipation_integral,
        oracle_max_error: products.oracle_max_error,
        verdicts: Vec::new(),
    };
    write_manifest(&dir, &manifest)?;

    let plot: Vec<PlotSeries> = products
        .check_series
        .iter()
        .map(|(c, s)| PlotSeries { label: c.label.clone(), points: s.clone() })
        .collect();
    let guide = products.check_series.first().map(|(c, _)| c.theoretical);
    write_file(&dir.join("norms.svg"), &svg::loglog_plot(&exp.name, &plot, guide))?;

    Ok((dir, products))
}

fn write_manifest(dir: &Path, manifest: &RunManifest) -> Result<(), HarnessError> {
    let path = dir.join("manifest.json");
    let json = serde_json::to_string_pretty(manifest)
        .map_err(|e| HarnessError::Internal(e.to_string()))?;
    write_file(&path, &(json + "\n"))
}

/// Reads a norm-series CSV back into labeled columns.
pub fn read_series_csv(path: &Path) -> Result<Vec<(String, Vec<(f64, f64)>)>, HarnessError> {
    let text = fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
    let mut lines = text.lines();
    let header: Vec<&str> = lines
        .next()
        .ok_or_else(|| HarnessError::Config(format!("{}: empty series file", path.display())))?
        .split(',')
        .collect();
    if header.first() != Some(&"t") {
        return Err(HarnessError::Config(format!(
            "{}: first column must be t",
            path.display()
        )));
    }
    let mut columns: Vec<(String, Vec<(f64, f64)>)> =
        header[1..].iter().map(|h| (h.to_string(), Vec::new())).collect();
    for (lineno, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != header.len() {
            return Err(HarnessError::Config(format!(
                "{}:{}: expected {} fields, found {}",
                path.display(),
                lineno + 2,
                header.len(),
                fields.len()
            )));
        }
        let parse = |s: &str| {
            s.parse::<f64>().map_err(|_| {
                HarnessError::Config(format!(
                    "{}:{}: bad number {s:?}",
                    path.display(),
                    lineno + 2
                ))
            })
        };
        let t = parse(fields[0])?;
        for (k, field) in fields[1..].iter().enumerate() {
            columns[k].1.push((t, parse(field)?));
        }
    }
    Ok(columns)
}

/// Spec's floor for a meaningful exponent fit: 1.5 decades of time span.
fn check_time_span(series: &[(f64, f64)]) -> Result<(), HarnessError> {
    let positive: Vec<f64> = series.iter().map(|s| s.0).filter(|&t| t > 0.0).collect();
    let t_min = positive.iter().cloned().fold(f64::MAX, f64::min);
    let t_max = positive.iter().cloned().fold(f64::MIN, f64::max);
    if positive.len() < 8 || !(t_max / t_min >= 10f64.powf(1.5)) {
        return Err(HarnessError::InsufficientData(format!(
            "need >= 1.5 decades of snapshots, have [{t_min}, {t_max}]"
        )));
    }
    Ok(())
}

/// Products of the decay stage: one report per configured check.
#[derive(Debug)]
pub struct DecayProducts {
    pub reports: Vec<DecayReport>,
    pub dir: PathBuf,
}

/// Fits every configured check. Series come from (in order of preference)
/// the config's `series_csv`, an existing run directory, or a fresh solve.
pub fn run_decay(
    exp: &ExperimentConfig,
    config_text: &str,
    run_dir: Option<&Path>,
    out_root: &Path,
) -> Result<DecayProducts, HarnessError> {
    let checks = exp.prepared_checks()?;
    if checks.is_empty() {
        return Err(HarnessError::Config("no checks configured".into()));
    }

    let (dir, labeled): (PathBuf, Vec<(PreparedCheck, Vec<(f64, f64)>)>) =
        if let Some(csv) = &exp.series_csv {
            let columns = read_series_csv(Path::new(csv))?;
            let dir = out_root.join(&exp.name);
            fs::create_dir_all(&dir).map_err(|e| HarnessError::io(&dir, e))?;
            (dir, match_columns(checks, columns)?)
        } else if let Some(existing) = run_dir {
            let columns = read_series_csv(&existing.join("norm_series.csv"))?;
            (existing.to_path_buf(), match_columns(checks, columns)?)
        } else {
            let (dir, products) = run_solve(exp, config_text, out_root)?;
            (dir, products.check_series)
        };

    let mut reports = Vec::with_capacity(labeled.len());
    for (check, series) in &labeled {
        check_time_span(series)?;
        let report = analysis::theorem_check(
            &check.label,
            series.clone(),
            check.theoretical,
            check.tolerance,
            check.log_correction,
            FitWindow::default(),
        )?;
        reports.push(report);
    }

    for report in &reports {
        let json = serde_json::to_string_pretty(report)
            .map_err(|e| HarnessError::Internal(e.to_string()))?;
        let name = format!("report_{}.json", sanitize(&report.norm_label));
        write_file(&dir.join(name), &(json + "\n"))?;
    }

    // refresh the manifest verdicts if the run has one
    let manifest_path = dir.join("manifest.json");
    if manifest_path.exists() {
        let text =
            fs::read_to_string(&manifest_path).map_err(|e| HarnessError::io(&manifest_path, e))?;
        if let Ok(mut manifest) = serde_json::from_str::<RunManifest>(&text) {
            manifest.verdicts = reports
                .iter()
                .map(|r| VerdictLine {
                    label: r.norm_label.clone(),
                    fitted: r.fitted_exponent,
                    theoretical: r.theoretical_exponent,
                    pass: r.pass,
                })
                .collect();
            write_manifest(&dir, &manifest)?;
        }
    }

    let plot: Vec<PlotSeries> = reports
        .iter()
        .map(|r| PlotSeries { label: r.norm_label.clone(), points: r.series.clone() })
        .collect();
    let guide = reports.first().map(|r| r.theoretical_exponent);
    write_file(&dir.join("decay.svg"), &svg::loglog_plot(&exp.name, &plot, guide))?;

    Ok(DecayProducts { reports, dir })
}

fn match_columns(
    checks: Vec<PreparedCheck>,
    columns: Vec<(String, Vec<(f64, f64)>)>,
) -> Result<Vec<(PreparedCheck, Vec<(f64, f64)>)>, HarnessError> {
    checks
        .into_iter()
        .map(|check| {
            let series = columns
                .iter()
                .find(|(label, _)| *label == check.label)
                .map(|(_, s)| s.clone())
                .ok_or_else(|| {
                    HarnessError::Config(format!(
                        "series column {:?} not found (available: {})",
                        check.label,
                        columns.iter().map(|c| c.0.as_str()).collect::<Vec<_>>().join(", ")
                    ))
                })?;
            Ok((check, series))
        })
        .collect()
}

pub fn sanitize(label: &str) -> String {
    label
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' || c == '.' { c } else { '_' })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny_config() -> (ExperimentConfig, String) {
        let text = r#"
name = "tiny"
[flux]
kind = "burgers"
[viscosity]
kind = "regularized-power"
p = 0.5
mu = 1.0
[initial]
kind = "constant-plus-bump"
u_bar = 0.0
bump_amplitude = 0.3
bump_width = 2.0
[grid]
cells = 128
margin = 20.0
[time]
t_end = 2.0
snapshots = 4
[[checks]]
quantity = "value"
reference = "constant"
norm = "l2"
theoretical = -0.25
"#;
        (ExperimentConfig::from_toml(text).unwrap(), text.to_string())
    }

    #[test]
    fn solve_products_and_artifacts() {
        let (exp, text) = tiny_config();
        let tmp = tempfile::tempdir().unwrap();
        let (dir, products) = run_solve(&exp, &text, tmp.path()).unwrap();
        assert_eq!(products.check_series.len(), 1);
        assert!(dir.join("norm_series.csv").exists());
        assert!(dir.join("manifest.json").exists());
        assert!(dir.join("norms.svg").exists());
        assert!(dir.join("snap_2.000000.csv").exists());

        let columns = read_series_csv(&dir.join("norm_series.csv")).unwrap();
        let labels: Vec<&str> = columns.iter().map(|c| c.0.as_str()).collect();
        assert!(labels.contains(&"l2:value-vs-constant"));
        assert!(labels.contains(&"mass"));
        assert!(labels.contains(&"dissipation"));
    }

    #[test]
    fn decay_needs_time_span() {
        let (exp, text) = tiny_config();
        let tmp = tempfile::tempdir().unwrap();
        // only reaches t = 2 with 4 snapshots: far below 1.5 decades
        let err = run_decay(&exp, &text, None, tmp.path()).unwrap_err();
        assert_eq!(err.exit_code(), 4);
    }

    #[test]
    fn decay_from_planted_series() {
        let tmp = tempfile::tempdir().unwrap();
        let csv_path = tmp.path().join("series.csv");
        let mut csv = String::from("t,planted\n");
        for i in 0..40 {
            let t = 10f64.powf(2.0 * i as f64 / 39.0);
            csv.push_str(&format!("{},{}\n", t, (1.0 + t).powf(-0.5)));
        }
        fs::write(&csv_path, csv).unwrap();
        let text = format!(
            r#"
name = "planted"
series_csv = "{}"
[[checks]]
quantity = "value"
norm = "l2"
theoretical = -0.5
tolerance = 0.01
label = "planted"
"#,
            csv_path.display()
        );
        let exp = ExperimentConfig::from_toml(&text).unwrap();
        let products = run_decay(&exp, &text, None, tmp.path()).unwrap();
        assert_eq!(products.reports.len(), 1);
        let report = &products.reports[0];
        assert!(report.pass);
        assert!((report.fitted_exponent + 0.5).abs() < 0.01);
        assert!(products.dir.join("report_planted.json").exists());
    }
}

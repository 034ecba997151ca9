//! Norms, deviations from reference profiles, and decay-exponent fitting.
//!
//! Everything here is a pure function over grid data. Derivative fields use
//! centered differences on interior cells; the time derivative is recovered
//! from the spatial flux divergence rather than by differencing snapshots in
//! time, so it is exact with respect to the equation being solved.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::flux::{ConvexFlux, ViscosityLaw};
use crate::profiles::{ProfileError, WaveProfile};

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error("Lebesgue order must satisfy q >= 1, got {0}")]
    BadNormOrder(f64),
    #[error("grid too small for interior stencils ({0} cells, need >= 5)")]
    GridTooSmall(usize),
    #[error("need at least {need} samples in the fit window, found {have}")]
    TooFewSamples { have: usize, need: usize },
    #[error("non-positive value {value} at t = {t}; cannot fit a power law")]
    NonPositiveValue { t: f64, value: f64 },
    #[error("deviation does not vanish at the domain ends (|{0}| > {1})")]
    FarFieldViolation(f64, f64),
    #[error(transparent)]
    Profile(#[from] Box<ProfileError>),
}

/// `( sum |u_j|^q dx )^{1/q}`
pub fn lq_norm(values: &[f64], dx: f64, q: f64) -> Result<f64, AnalysisError> {
    if !(q >= 1.0) {
        return Err(AnalysisError::BadNormOrder(q));
    }
    let sum: f64 = values.iter().map(|v| v.abs().powf(q)).sum();
    Ok((sum * dx).powf(1.0 / q))
}

/// Grid maximum of |u_j|.
pub fn linf_norm(values: &[f64]) -> f64 {
    values.iter().fold(0.0, |m, v| m.max(v.abs()))
}

/// `sum u_j dx` with compensated accumulation.
pub fn mass(values: &[f64], dx: f64) -> f64 {
    let mut acc = KahanSum::default();
    for &v in values {
        acc.add(v);
    }
    acc.value() * dx
}

/// Neumaier-compensated running sum.
#[derive(Debug, Default, Clone, Copy)]
pub struct KahanSum {
    sum: f64,
    compensation: f64,
}

impl KahanSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.compensation += (self.sum - t) + x;
        } else {
            self.compensation += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

/// Centered first derivative on interior cells (length n - 2).
pub fn gradient_field(values: &[f64], dx: f64) -> Vec<f64> {
    values
        .windows(3)
        .map(|w| (w[2] - w[0]) / (2.0 * dx))
        .collect()
}

/// Centered second derivative on interior cells (length n - 2).
pub fn second_derivative_field(values: &[f64], dx: f64) -> Vec<f64> {
    values
        .windows(3)
        .map(|w| (w[2] - 2.0 * w[1] + w[0]) / (dx * dx))
        .collect()
}

/// Time derivative recovered from the equation: `-d/dx ( f(u) - sigma(du/dx) )`
/// with interface-centered fluxes, on interior cells (length n - 2).
pub fn pde_time_derivative(
    values: &[f64],
    dx: f64,
    flux: &ConvexFlux,
    law: &ViscosityLaw,
) -> Vec<f64> {
    let n = values.len();
    let mut interface = Vec::with_capacity(n.saturating_sub(1));
    for j in 0..n.saturating_sub(1) {
        let mid = 0.5 * (values[j] + values[j + 1]);
        let grad = (values[j + 1] - values[j]) / dx;
        interface.push(flux.value(mid) - law.stress(grad));
    }
    (1..n.saturating_sub(1))
        .map(|j| -(interface[j] - interface[j - 1]) / dx)
        .collect()
}

/// L^q norm of a derivative field of the given order (1 or 2).
pub fn derivative_norm(values: &[f64], dx: f64, order: u8, q: f64) -> Result<f64, AnalysisError> {
    if values.len() < 5 {
        return Err(AnalysisError::GridTooSmall(values.len()));
    }
    let field = match order {
        1 => gradient_field(values, dx),
        _ => second_derivative_field(values, dx),
    };
    if q.is_infinite() {
        Ok(linf_norm(&field))
    } else {
        lq_norm(&field, dx, q)
    }
}

/// `int (1 + g^2)^{(p-1)/2} g^2 dx` over a gradient field, using the same
/// cell-sum quadrature as [`lq_norm`] so that with p = 1 it equals the
/// squared L2 norm of the gradient exactly (to rounding). The exponent
/// weight reproduces the dissipation density of the nonlinear viscosity, so
/// the time-integrated value must stay bounded along a run.
pub fn weighted_dissipation(gradient: &[f64], dx: f64, p: f64) -> f64 {
    let density = |g: f64| (1.0 + g * g).powf(0.5 * (p - 1.0)) * g * g;
    gradient.iter().map(|&g| density(g)).sum::<f64>() * dx
}

/// Left and right sides of the supremum interpolation bound
/// `||u||_inf^{q+2} <= ((q+2)/2)^2 ||u||_2^2 int |u|^{q-2} |du/dx|^2 dx`.
///
/// The weight exponent q - 2 is the one the Cauchy-Schwarz split of
/// `|u|^{(q+2)/2}` actually produces (both sides then scale identically in
/// amplitude and width; a q - 1 weight would break scaling). At q = 2 this
/// is the familiar `||u||_inf^2 <= 2 ||u||_2 ||du/dx||_2`.
pub fn interpolation_sides(values: &[f64], dx: f64, q: f64) -> (f64, f64) {
    let linf = linf_norm(values);
    let l2sq: f64 = values.iter().map(|v| v * v).sum::<f64>() * dx;
    let grad = gradient_field(values, dx);
    let mut weighted = 0.0;
    for (j, g) in grad.iter().enumerate() {
        let u = values[j + 1].abs();
        let w = if q == 2.0 { 1.0 } else { u.powf(q - 2.0) };
        weighted += w * g * g;
    }
    weighted *= dx;
    let factor = (0.5 * (q + 2.0)).powi(2);
    (linf.powf(q + 2.0), factor * l2sq * weighted)
}

/// Snapshot view handed to the series builders: cell-centered values on a
/// uniform grid, with `x_left` the center of the first cell.
#[derive(Debug, Clone, Copy)]
pub struct SnapshotView<'a> {
    pub t: f64,
    pub x_left: f64,
    pub dx: f64,
    pub values: &'a [f64],
}

impl<'a> SnapshotView<'a> {
    pub fn x(&self, j: usize) -> f64 {
        self.x_left + j as f64 * self.dx
    }
}

/// Deviation of a snapshot from a reference profile, cell by cell.
#[derive(Debug, Clone)]
pub struct Deviation {
    pub t: f64,
    pub dx: f64,
    pub values: Vec<f64>,
}

impl Deviation {
    /// `u_j - reference(t_ref, x_j)`; fails if the deviation does not vanish
    /// at the domain ends.
    pub fn new(
        snapshot: SnapshotView,
        reference: &WaveProfile,
        t_ref: f64,
    ) -> Result<Self, AnalysisError> {
        let mut values = Vec::with_capacity(snapshot.values.len());
        for (j, &u) in snapshot.values.iter().enumerate() {
            let r = reference.value(t_ref, snapshot.x(j)).map_err(Box::new)?;
            values.push(u - r);
        }
        const FAR_TOL: f64 = 1e-6;
        for &end in &[values[0], values[values.len() - 1]] {
            if end.abs() > FAR_TOL {
                return Err(AnalysisError::FarFieldViolation(end, FAR_TOL));
            }
        }
        Ok(Self { t: snapshot.t, dx: snapshot.dx, values })
    }

    /// Deviation from a constant state.
    pub fn from_constant(snapshot: SnapshotView, state: f64) -> Result<Self, AnalysisError> {
        let values: Vec<f64> = snapshot.values.iter().map(|u| u - state).collect();
        const FAR_TOL: f64 = 1e-6;
        for &end in &[values[0], values[values.len() - 1]] {
            if end.abs() > FAR_TOL {
                return Err(AnalysisError::FarFieldViolation(end, FAR_TOL));
            }
        }
        Ok(Self { t: snapshot.t, dx: snapshot.dx, values })
    }
}

/// Which field of the solution a norm series measures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Quantity {
    Value,
    DerivX,
    DerivXx,
    DerivT,
}

impl Quantity {
    pub fn name(&self) -> &'static str {
        match self {
            Quantity::Value => "value",
            Quantity::DerivX => "dx",
            Quantity::DerivXx => "dxx",
            Quantity::DerivT => "dt",
        }
    }
}

/// One norm series to extract from a run.
#[derive(Debug, Clone)]
pub struct SeriesSpec<'a> {
    pub quantity: Quantity,
    /// Reference profile and the offset added to the snapshot time when the
    /// reference is evaluated (0: same time; 1: the `1 + t` comparisons).
    pub reference: Option<(&'a WaveProfile, f64)>,
    /// Constant reference state, mutually exclusive with `reference`.
    pub constant: Option<f64>,
    /// Lebesgue order; infinite for the sup norm.
    pub norm: f64,
}

impl<'a> SeriesSpec<'a> {
    pub fn label(&self) -> String {
        let norm = if self.norm.is_infinite() {
            "linf".to_string()
        } else if (self.norm - self.norm.round()).abs() < 1e-12 {
            format!("l{}", self.norm.round() as i64)
        } else {
            format!("l{}", self.norm)
        };
        let target = if let Some((profile, shift)) = &self.reference {
            let kind = match profile.kind() {
                crate::profiles::ProfileKind::Rarefaction => "rarefaction",
                crate::profiles::ProfileKind::SmoothedRarefaction { .. } => "smoothed",
                crate::profiles::ProfileKind::ContactWave { .. } => "contact",
            };
            if *shift == 0.0 {
                format!("-vs-{kind}")
            } else {
                format!("-vs-{kind}+{shift}")
            }
        } else if self.constant.is_some() {
            "-vs-constant".to_string()
        } else {
            String::new()
        };
        format!("{}:{}{}", norm, self.quantity.name(), target)
    }
}

/// Builds the deviation field of one snapshot for a series spec.
pub fn deviation_field(
    snapshot: SnapshotView,
    spec: &SeriesSpec,
    flux: &ConvexFlux,
    law: &ViscosityLaw,
) -> Result<Vec<f64>, AnalysisError> {
    if snapshot.values.len() < 5 {
        return Err(AnalysisError::GridTooSmall(snapshot.values.len()));
    }
    let n = snapshot.values.len();
    let field = match spec.quantity {
        Quantity::Value => snapshot.values.to_vec(),
        Quantity::DerivX => gradient_field(snapshot.values, snapshot.dx),
        Quantity::DerivXx => second_derivative_field(snapshot.values, snapshot.dx),
        Quantity::DerivT => pde_time_derivative(snapshot.values, snapshot.dx, flux, law),
    };
    let offset = if matches!(spec.quantity, Quantity::Value) { 0 } else { 1 };
    let mut out = Vec::with_capacity(field.len());
    for (i, &v) in field.iter().enumerate() {
        let j = i + offset;
        debug_assert!(j < n);
        let r = match (&spec.reference, spec.constant) {
            (Some((profile, shift)), _) => {
                let tr = snapshot.t + shift;
                let x = snapshot.x(j);
                match spec.quantity {
                    Quantity::Value => profile.value(tr, x).map_err(Box::new)?,
                    Quantity::DerivX => profile.deriv_x(tr, x).map_err(Box::new)?,
                    Quantity::DerivXx => profile.deriv_xx(tr, x).map_err(Box::new)?,
                    Quantity::DerivT => profile.deriv_t(tr, x).map_err(Box::new)?,
                }
            }
            (None, Some(c)) if matches!(spec.quantity, Quantity::Value) => c,
            _ => 0.0,
        };
        out.push(v - r);
    }
    Ok(out)
}

/// Norm series of a spec across snapshots.
pub fn norm_series(
    snapshots: &[SnapshotView],
    spec: &SeriesSpec,
    flux: &ConvexFlux,
    law: &ViscosityLaw,
) -> Result<Vec<(f64, f64)>, AnalysisError> {
    let mut series = Vec::with_capacity(snapshots.len());
    for snap in snapshots {
        let field = deviation_field(*snap, spec, flux, law)?;
        let norm = if spec.norm.is_infinite() {
            linf_norm(&field)
        } else {
            lq_norm(&field, snap.dx, spec.norm)?
        };
        series.push((snap.t, norm));
    }
    Ok(series)
}

/// How the fit window is chosen from a series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum FitWindow {
    All,
    /// Keep the trailing fraction of the series in log(1+t).
    LastLogFraction(f64),
    Explicit(f64, f64),
}

impl Default for FitWindow {
    fn default() -> Self {
        // transients dominate early times
        FitWindow::LastLogFraction(0.7)
    }
}

/// Result of a power-law fit.
#[derive(Debug, Clone)]
pub struct DecayFit {
    /// Least-squares slope of log(value) against log(1+t).
    pub exponent: f64,
    pub intercept: f64,
    /// Slope after dividing values by max(1, ln(1+t)).
    pub corrected_exponent: Option<f64>,
    pub window: (f64, f64),
    pub n: usize,
    pub residual_rms: f64,
}

/// Fits `value ~ C (1+t)^alpha` on the window; with `allow_log` also reports
/// the slope of the series divided by the logarithmic correction factor.
pub fn fit_decay(
    series: &[(f64, f64)],
    window: FitWindow,
    allow_log: bool,
) -> Result<DecayFit, AnalysisError> {
    let (lo, hi) = match window {
        FitWindow::All => (f64::NEG_INFINITY, f64::INFINITY),
        FitWindow::Explicit(lo, hi) => (lo, hi),
        FitWindow::LastLogFraction(fr) => {
            let t_max = series.iter().map(|s| s.0).fold(f64::MIN, f64::max);
            let t_min = series.iter().map(|s| s.0).fold(f64::MAX, f64::min);
            let span = (1.0 + t_max).ln() - (1.0 + t_min).ln();
            let lo = ((1.0 + t_max).ln() - fr.clamp(0.0, 1.0) * span).exp() - 1.0;
            (lo, f64::INFINITY)
        }
    };
    let mut pts = Vec::new();
    for &(t, v) in series {
        if t < lo || t > hi {
            continue;
        }
        if !(v > 0.0) {
            return Err(AnalysisError::NonPositiveValue { t, value: v });
        }
        pts.push((t, v));
    }
    if pts.len() < 8 {
        return Err(AnalysisError::TooFewSamples { have: pts.len(), need: 8 });
    }

    let slope_of = |data: &[(f64, f64)]| -> (f64, f64, f64) {
        let n = data.len() as f64;
        let (mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0);
        for &(x, y) in data {
            sx += x;
            sy += y;
            sxx += x * x;
            sxy += x * y;
        }
        let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
        let intercept = (sy - slope * sx) / n;
        let mut rss = 0.0;
        for &(x, y) in data {
            let r = y - (slope * x + intercept);
            rss += r * r;
        }
        (slope, intercept, (rss / n).sqrt())
    };

    let logpts: Vec<(f64, f64)> =
        pts.iter().map(|&(t, v)| ((1.0 + t).ln(), v.ln())).collect();
    let (exponent, intercept, residual_rms) = slope_of(&logpts);

    let corrected_exponent = if allow_log {
        let corrected: Vec<(f64, f64)> = pts
            .iter()
            .map(|&(t, v)| {
                let factor = (1.0 + t).ln().max(1.0);
                ((1.0 + t).ln(), (v / factor).ln())
            })
            .collect();
        Some(slope_of(&corrected).0)
    } else {
        None
    };

    let t_lo = pts.first().unwrap().0;
    let t_hi = pts.last().unwrap().0;
    Ok(DecayFit {
        exponent,
        intercept,
        corrected_exponent,
        window: (t_lo, t_hi),
        n: pts.len(),
        residual_rms,
    })
}

/// Verdict record for one measured norm series against its expected rate.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DecayReport {
    pub norm_label: String,
    pub series: Vec<(f64, f64)>,
    pub fitted_exponent: f64,
    pub fit_window: (f64, f64),
    pub theoretical_exponent: f64,
    pub log_factor_allowed: bool,
    pub pass: bool,
}

/// Fits a series and verdicts it against an upper decay rate. The fitted
/// exponent (log-corrected when allowed) must not exceed
/// `theoretical + tolerance`.
pub fn theorem_check(
    label: &str,
    series: Vec<(f64, f64)>,
    theoretical: f64,
    tolerance: f64,
    log_correction: bool,
    window: FitWindow,
) -> Result<DecayReport, AnalysisError> {
    let fit = fit_decay(&series, window, log_correction)?;
    let effective = if log_correction {
        fit.corrected_exponent.unwrap_or(fit.exponent)
    } else {
        fit.exponent
    };
    Ok(DecayReport {
        norm_label: label.to_string(),
        series,
        fitted_exponent: effective,
        fit_window: fit.window,
        theoretical_exponent: theoretical,
        log_factor_allowed: log_correction,
        pass: effective <= theoretical + tolerance,
    })
}

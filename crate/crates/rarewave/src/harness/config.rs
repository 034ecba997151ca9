//! Experiment configuration: flat TOML, hashed for the run manifest.

use serde::Deserialize;
use sha2::{Digest, Sha256};

use crate::analysis::Quantity;
use crate::flux::{ConvexFlux, ViscosityLaw};
use crate::profiles::WaveProfile;
use crate::solver::{Bump, InitialData, SolverConfig};

use super::HarnessError;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: String,
    #[serde(default)]
    pub seed: Option<u64>,
    /// Read an existing norm-series CSV instead of running the solver
    /// (used by `decay` on planted or previously computed series).
    #[serde(default)]
    pub series_csv: Option<String>,
    #[serde(default)]
    pub flux: FluxSpec,
    #[serde(default)]
    pub viscosity: ViscositySpec,
    #[serde(default)]
    pub states: StatesSpec,
    #[serde(default)]
    pub initial: InitialSpec,
    #[serde(default)]
    pub grid: GridSpec,
    #[serde(default)]
    pub time: TimeSpec,
    #[serde(default)]
    pub checks: Vec<CheckSpec>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FluxSpec {
    pub kind: String,
}

impl Default for FluxSpec {
    fn default() -> Self {
        Self { kind: "burgers".into() }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ViscositySpec {
    pub kind: String,
    #[serde(default = "one")]
    pub p: f64,
    #[serde(default = "one")]
    pub mu: f64,
}

impl Default for ViscositySpec {
    fn default() -> Self {
        Self { kind: "regularized-power".into(), p: 1.0, mu: 1.0 }
    }
}

#[derive(Debug, Clone, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct StatesSpec {
    #[serde(default)]
    pub u_minus: f64,
    #[serde(default)]
    pub u_plus: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialSpec {
    /// "profile-plus-bump" | "mollified-riemann" | "constant-plus-bump"
    pub kind: String,
    /// "smoothed-rarefaction" | "contact-wave" (for profile-plus-bump)
    #[serde(default)]
    pub profile: Option<String>,
    #[serde(default = "one")]
    pub q: f64,
    #[serde(default)]
    pub t0: f64,
    #[serde(default = "one")]
    pub contact_mu: f64,
    #[serde(default)]
    pub contact_speed: f64,
    #[serde(default)]
    pub u_bar: f64,
    #[serde(default)]
    pub bump_amplitude: f64,
    #[serde(default)]
    pub bump_center: f64,
    #[serde(default = "one")]
    pub bump_width: f64,
    /// Optional seeded roughness: `noise_modes` extra Gaussians with
    /// amplitudes up to `noise_amplitude`, drawn from the config seed.
    #[serde(default)]
    pub noise_amplitude: f64,
    #[serde(default)]
    pub noise_modes: usize,
}

impl Default for InitialSpec {
    fn default() -> Self {
        Self {
            kind: "constant-plus-bump".into(),
            profile: None,
            q: 1.0,
            t0: 0.0,
            contact_mu: 1.0,
            contact_speed: 0.0,
            u_bar: 0.0,
            bump_amplitude: 0.0,
            bump_center: 0.0,
            bump_width: 1.0,
            noise_amplitude: 0.0,
            noise_modes: 0,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    #[serde(default = "default_cells")]
    pub cells: usize,
    #[serde(default = "default_margin")]
    pub margin: f64,
    #[serde(default)]
    pub x_left: Option<f64>,
    #[serde(default)]
    pub x_right: Option<f64>,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self { cells: default_cells(), margin: default_margin(), x_left: None, x_right: None }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeSpec {
    #[serde(default)]
    pub t_end: f64,
    /// Count of log-spaced snapshot times in [1, t_end].
    #[serde(default = "default_snapshots")]
    pub snapshots: usize,
    #[serde(default = "default_cfl_a")]
    pub cfl_advection: f64,
    #[serde(default = "default_cfl_d")]
    pub cfl_diffusion: f64,
    #[serde(default)]
    pub dt_override: Option<f64>,
}

impl Default for TimeSpec {
    fn default() -> Self {
        Self {
            t_end: 0.0,
            snapshots: default_snapshots(),
            cfl_advection: default_cfl_a(),
            cfl_diffusion: default_cfl_d(),
            dt_override: None,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckSpec {
    /// "value" | "dx" | "dxx" | "dt"
    pub quantity: String,
    /// "none" | "constant" | "rarefaction" | "rarefaction-shifted" |
    /// "smoothed" | "contact"
    #[serde(default = "default_reference")]
    pub reference: String,
    /// "l1" | "l2" | "linf" | any "l<order>"
    #[serde(default = "default_norm")]
    pub norm: String,
    pub theoretical: f64,
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    #[serde(default)]
    pub log_correction: bool,
    #[serde(default)]
    pub label: Option<String>,
}

fn one() -> f64 {
    1.0
}
fn default_cells() -> usize {
    8192
}
fn default_margin() -> f64 {
    20.0
}
fn default_snapshots() -> usize {
    40
}
fn default_cfl_a() -> f64 {
    0.9
}
fn default_cfl_d() -> f64 {
    0.4
}
fn default_reference() -> String {
    "none".into()
}
fn default_norm() -> String {
    "l2".into()
}
fn default_tolerance() -> f64 {
    0.1
}

/// Reference a prepared check compares against.
#[derive(Debug, Clone)]
pub enum RefKind {
    None,
    Constant(f64),
    /// Exact rarefaction evaluated at snapshot time + shift.
    Rarefaction { shift: f64 },
    Smoothed { q: f64 },
    Contact,
}

#[derive(Debug, Clone)]
pub struct PreparedCheck {
    pub label: String,
    pub quantity: Quantity,
    pub reference: RefKind,
    pub norm: f64,
    pub theoretical: f64,
    pub tolerance: f64,
    pub log_correction: bool,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, HarnessError> {
        let config: ExperimentConfig =
            toml::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    fn validate(&self) -> Result<(), HarnessError> {
        if self.name.is_empty()
            || !self
                .name
                .chars()
                .all(|c| c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.'))
        {
            return Err(HarnessError::Config(format!(
                "experiment name {:?} is not filesystem-safe",
                self.name
            )));
        }
        if self.states.u_minus > self.states.u_plus {
            return Err(HarnessError::Config(format!(
                "far-field states out of order: {} > {}",
                self.states.u_minus, self.states.u_plus
            )));
        }
        if !(self.viscosity.p > 0.0) {
            return Err(HarnessError::Config(format!(
                "viscosity exponent must be positive, got {}",
                self.viscosity.p
            )));
        }
        Ok(())
    }

    pub fn sha256(text: &str) -> String {
        let mut hasher = Sha256::new();
        hasher.update(text.as_bytes());
        let digest = hasher.finalize();
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn build_flux(&self) -> Result<ConvexFlux, HarnessError> {
        match self.flux.kind.as_str() {
            "burgers" => Ok(ConvexFlux::Burgers),
            "exponential" => Ok(ConvexFlux::Exponential),
            "zero" => Ok(ConvexFlux::Zero),
            other => Err(HarnessError::Config(format!("unknown flux kind {other:?}"))),
        }
    }

    pub fn build_law(&self) -> Result<ViscosityLaw, HarnessError> {
        let v = &self.viscosity;
        let law = match v.kind.as_str() {
            "regularized-power" => ViscosityLaw::regularized_power(v.p, v.mu),
            "ostwald-de-waele" => ViscosityLaw::ostwald_de_waele(v.p, v.mu),
            "linear" => ViscosityLaw::linear(v.mu),
            other => {
                return Err(HarnessError::Config(format!("unknown viscosity kind {other:?}")))
            }
        };
        law.map_err(|e| HarnessError::Config(e.to_string()))
    }

    fn build_initial(&self, flux: &ConvexFlux) -> Result<InitialData, HarnessError> {
        let spec = &self.initial;
        let bump = Bump {
            amplitude: spec.bump_amplitude,
            center: spec.bump_center,
            width: spec.bump_width,
        };
        let base = match spec.kind.as_str() {
            "constant-plus-bump" => InitialData::ConstantPlusBump { state: spec.u_bar, bump },
            "mollified-riemann" => InitialData::MollifiedRiemann { q: spec.q },
            "profile-plus-bump" => {
                let profile = match spec.profile.as_deref() {
                    Some("smoothed-rarefaction") | None => WaveProfile::smoothed_rarefaction(
                        flux.clone(),
                        self.states.u_minus,
                        self.states.u_plus,
                        spec.q,
                    ),
                    Some("contact-wave") => WaveProfile::contact(
                        self.states.u_minus,
                        self.states.u_plus,
                        spec.contact_mu,
                        spec.contact_speed,
                    ),
                    Some(other) => {
                        return Err(HarnessError::Config(format!(
                            "unknown initial profile {other:?}"
                        )))
                    }
                }
                .map_err(|e| HarnessError::Config(e.to_string()))?;
                InitialData::ProfilePlusBump { profile, t0: spec.t0, bump }
            }
            other => {
                return Err(HarnessError::Config(format!("unknown initial kind {other:?}")))
            }
        };
        if spec.noise_amplitude > 0.0 && spec.noise_modes > 0 {
            let mut state = self.seed.unwrap_or(0).wrapping_add(0x9e37_79b9_7f4a_7c15);
            let mut uniform = move || {
                // splitmix64
                state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
                let mut z = state;
                z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
                z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
                z ^= z >> 31;
                (z >> 11) as f64 / (1u64 << 53) as f64
            };
            let extra = (0..spec.noise_modes)
                .map(|_| Bump {
                    amplitude: spec.noise_amplitude * (2.0 * uniform() - 1.0),
                    center: 20.0 * (2.0 * uniform() - 1.0),
                    width: 1.0 + 2.0 * uniform(),
                })
                .collect();
            return Ok(InitialData::Perturbed { base: Box::new(base), extra });
        }
        Ok(base)
    }

    /// Log-spaced snapshot schedule in [1, t_end] (or just t_end when small).
    pub fn snapshot_schedule(&self) -> Vec<f64> {
        let t_end = self.time.t_end;
        let n = self.time.snapshots;
        if t_end <= 0.0 {
            return vec![];
        }
        if t_end <= 1.0 || n < 2 {
            return vec![t_end];
        }
        let mut times = Vec::with_capacity(n);
        for i in 0..n {
            let t = t_end.powf(i as f64 / (n - 1) as f64);
            times.push(t);
        }
        *times.last_mut().unwrap() = t_end;
        times.dedup_by(|a, b| (*a - *b).abs() < 1e-9);
        times
    }

    pub fn to_solver_config(&self) -> Result<SolverConfig, HarnessError> {
        let flux = self.build_flux()?;
        let law = self.build_law()?;
        let initial = self.build_initial(&flux)?;
        let domain = match (self.grid.x_left, self.grid.x_right) {
            (Some(l), Some(r)) => Some((l, r)),
            (None, None) => None,
            _ => {
                return Err(HarnessError::Config(
                    "grid.x_left and grid.x_right must be given together".into(),
                ))
            }
        };
        Ok(SolverConfig {
            flux,
            law,
            u_minus: self.states.u_minus,
            u_plus: self.states.u_plus,
            initial,
            n_cells: self.grid.cells,
            margin: self.grid.margin,
            domain,
            t_end: self.time.t_end,
            cfl_advection: self.time.cfl_advection,
            cfl_diffusion: self.time.cfl_diffusion,
            snapshot_times: self.snapshot_schedule(),
            dt_override: self.time.dt_override,
        })
    }

    pub fn prepared_checks(&self) -> Result<Vec<PreparedCheck>, HarnessError> {
        self.checks.iter().map(|c| self.prepare_check(c)).collect()
    }

    fn prepare_check(&self, check: &CheckSpec) -> Result<PreparedCheck, HarnessError> {
        let quantity = match check.quantity.as_str() {
            "value" => Quantity::Value,
            "dx" => Quantity::DerivX,
            "dxx" => Quantity::DerivXx,
            "dt" => Quantity::DerivT,
            other => return Err(HarnessError::Config(format!("unknown quantity {other:?}"))),
        };
        let reference = match check.reference.as_str() {
            "none" => RefKind::None,
            "constant" => RefKind::Constant(self.initial.u_bar),
            "rarefaction" => RefKind::Rarefaction { shift: 0.0 },
            "rarefaction-shifted" => RefKind::Rarefaction { shift: 1.0 },
            "smoothed" => RefKind::Smoothed { q: self.initial.q },
            "contact" => RefKind::Contact,
            other => return Err(HarnessError::Config(format!("unknown reference {other:?}"))),
        };
        let norm = match check.norm.as_str() {
            "linf" => f64::INFINITY,
            l if l.starts_with('l') => l[1..]
                .parse::<f64>()
                .map_err(|_| HarnessError::Config(format!("bad norm {:?}", check.norm)))?,
            other => return Err(HarnessError::Config(format!("bad norm {other:?}"))),
        };
        let label = check.label.clone().unwrap_or_else(|| {
            format!("{}:{}-vs-{}", check.norm, check.quantity, check.reference)
        });
        Ok(PreparedCheck {
            label,
            quantity,
            reference,
            norm,
            theoretical: check.theoretical,
            tolerance: check.tolerance,
            log_correction: check.log_correction,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = r#"
name = "demo"
[flux]
kind = "burgers"
[viscosity]
kind = "regularized-power"
p = 0.5
mu = 1.0
[states]
u_minus = -1.0
u_plus = 1.0
[initial]
kind = "profile-plus-bump"
profile = "smoothed-rarefaction"
q = 1.0
bump_amplitude = 0.5
bump_width = 2.0
[grid]
cells = 512
margin = 20.0
[time]
t_end = 10.0
snapshots = 12
[[checks]]
quantity = "value"
reference = "rarefaction"
norm = "l2"
theoretical = -0.25
log_correction = true
"#;

    #[test]
    fn parses_and_prepares() {
        let config = ExperimentConfig::from_toml(SAMPLE).unwrap();
        assert_eq!(config.name, "demo");
        let solver = config.to_solver_config().unwrap();
        assert_eq!(solver.n_cells, 512);
        let checks = config.prepared_checks().unwrap();
        assert_eq!(checks.len(), 1);
        assert!(checks[0].log_correction);
        assert_eq!(checks[0].norm, 2.0);
    }

    #[test]
    fn schedule_is_log_spaced_and_exact_at_the_end() {
        let mut config = ExperimentConfig::from_toml(SAMPLE).unwrap();
        config.time.t_end = 500.0;
        config.time.snapshots = 40;
        let sched = config.snapshot_schedule();
        assert_eq!(sched.len(), 40);
        assert_eq!(sched[0], 1.0);
        assert_eq!(*sched.last().unwrap(), 500.0);
        for w in sched.windows(2) {
            assert!(w[1] > w[0]);
        }
    }

    #[test]
    fn bad_configs_are_rejected() {
        assert!(ExperimentConfig::from_toml("name = \"x/y\"").is_err());
        let swapped = SAMPLE.replace("u_minus = -1.0", "u_minus = 2.0");
        assert!(ExperimentConfig::from_toml(&swapped).is_err());
        let unknown = SAMPLE.replace("kind = \"burgers\"", "kind = \"cubic\"");
        let config = ExperimentConfig::from_toml(&unknown).unwrap();
        assert!(config.build_flux().is_err());
    }

    #[test]
    fn config_hash_is_stable() {
        let h1 = ExperimentConfig::sha256(SAMPLE);
        let h2 = ExperimentConfig::sha256(SAMPLE);
        assert_eq!(h1, h2);
        assert_eq!(h1.len(), 64);
        assert_ne!(h1, ExperimentConfig::sha256("name = \"other\""));
    }
}

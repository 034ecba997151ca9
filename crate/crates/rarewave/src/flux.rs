//! Convective and viscous flux families.
//!
//! The viscous stress laws cover the regularized power law
//! `sigma(v) = mu (1 + v^2)^{(p-1)/2} v`, the Ostwald–de Waele power law
//! `sigma(v) = mu |v|^{p-1} v`, and plain linear viscosity. The convective
//! side bundles a convex flux with its first three derivatives and the
//! inverse of the characteristic speed, plus the exact Riemann (Godunov)
//! interface flux used by the solver.

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum FluxError {
    #[error("viscosity exponent must be positive, got p = {0}")]
    BadExponent(f64),
    #[error("viscosity coefficient must be positive, got mu = {0}")]
    BadCoefficient(f64),
    #[error("Ostwald-de Waele law needs p >= 1 (stress slope blows up at zero gradient), got p = {0}")]
    OstwaldSubLinear(f64),
    #[error("argument {arg} outside the invertible range of the characteristic speed")]
    SpeedNotInvertible { arg: f64 },
    #[error("Godunov flux is undefined for the zero flux")]
    GodunovOnZeroFlux,
}

/// Which stress family a [`ViscosityLaw`] evaluates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ViscosityKind {
    /// `mu (1 + v^2)^{(p-1)/2} v`; smooth for every p > 0.
    RegularizedPower,
    /// `mu |v|^{p-1} v`. Admitted for p >= 1 only. For 1 <= p < 2 the slope
    /// is merely continuous at v = 0 (not C^2), which is good enough for the
    /// solver but worth knowing when differentiating through zero gradients.
    OstwaldDeWaele,
    /// `mu v`.
    Linear,
}

/// Monotone viscous stress as a function of the gradient.
#[derive(Debug, Clone, Copy)]
pub struct ViscosityLaw {
    pub kind: ViscosityKind,
    pub p: f64,
    pub mu: f64,
}

impl ViscosityLaw {
    pub fn regularized_power(p: f64, mu: f64) -> Result<Self, FluxError> {
        if !(p > 0.0) {
            return Err(FluxError::BadExponent(p));
        }
        if !(mu > 0.0) {
            return Err(FluxError::BadCoefficient(mu));
        }
        Ok(Self { kind: ViscosityKind::RegularizedPower, p, mu })
    }

    pub fn ostwald_de_waele(p: f64, mu: f64) -> Result<Self, FluxError> {
        if !(mu > 0.0) {
            return Err(FluxError::BadCoefficient(mu));
        }
        if !(p >= 1.0) {
            return Err(FluxError::OstwaldSubLinear(p));
        }
        Ok(Self { kind: ViscosityKind::OstwaldDeWaele, p, mu })
    }

    pub fn linear(mu: f64) -> Result<Self, FluxError> {
        if !(mu > 0.0) {
            return Err(FluxError::BadCoefficient(mu));
        }
        Ok(Self { kind: ViscosityKind::Linear, p: 1.0, mu })
    }

    /// Stress at gradient `v`.
    pub fn stress(&self, v: f64) -> f64 {
        match self.kind {
            ViscosityKind::RegularizedPower => {
                self.mu * half_power(1.0 + v * v, self.p - 1.0) * v
            }
            ViscosityKind::OstwaldDeWaele => {
                if v == 0.0 {
                    0.0
                } else {
                    self.mu * v.abs().powf(self.p - 1.0) * v
                }
            }
            ViscosityKind::Linear => self.mu * v,
        }
    }

    /// Exact derivative of [`ViscosityLaw::stress`] with respect to `v`.
    pub fn dstress(&self, v: f64) -> f64 {
        match self.kind {
            ViscosityKind::RegularizedPower => {
                let s = 1.0 + v * v;
                self.mu * half_power(s, self.p - 3.0) * (1.0 + self.p * v * v)
            }
            ViscosityKind::OstwaldDeWaele => {
                if v == 0.0 {
                    if self.p == 1.0 { self.mu } else { 0.0 }
                } else {
                    self.mu * self.p * v.abs().powf(self.p - 1.0)
                }
            }
            ViscosityKind::Linear => self.mu,
        }
    }

    /// Largest stress slope over gradients with `|v| <= vmax`.
    ///
    /// For the regularized law the slope is monotone in |v|: decreasing when
    /// p < 1 (maximum mu at v = 0) and increasing when p > 1. Used for the
    /// diffusive time-step bound.
    pub fn max_dstress(&self, vmax: f64) -> f64 {
        match self.kind {
            ViscosityKind::RegularizedPower | ViscosityKind::Linear => {
                if self.p <= 1.0 {
                    self.mu
                } else {
                    self.dstress(vmax.abs())
                }
            }
            ViscosityKind::OstwaldDeWaele => {
                if self.p == 1.0 {
                    self.mu
                } else {
                    self.dstress(vmax.abs())
                }
            }
        }
    }
}

/// `base^{e/2}` routed through sqrt for the half-integer exponents the
/// default laws hit (p = 0.5, 1, 1.5, 2, 3); falls back to powf.
#[inline]
fn half_power(base: f64, e: f64) -> f64 {
    if e == 0.0 {
        1.0
    } else if e == -0.5 {
        1.0 / base.sqrt().sqrt()
    } else if e == 0.5 {
        base.sqrt().sqrt()
    } else if e == -1.0 {
        1.0 / base.sqrt()
    } else if e == 1.0 {
        base.sqrt()
    } else if e == -2.0 {
        1.0 / base
    } else if e == 2.0 {
        base
    } else {
        base.powf(0.5 * e)
    }
}

type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Convex convective flux together with the derivatives and inverse the wave
/// constructions need.
#[derive(Clone)]
pub enum ConvexFlux {
    /// No convective transport (pure diffusion problem).
    Zero,
    /// `u^2 / 2`.
    Burgers,
    /// `e^u`.
    Exponential,
    /// Caller supplies f, f', f'', f''' and the inverse of f' explicitly.
    Custom {
        f: ScalarFn,
        df: ScalarFn,
        ddf: ScalarFn,
        dddf: ScalarFn,
        df_inv: ScalarFn,
    },
}

impl fmt::Debug for ConvexFlux {
    fn fmt(&self, fm: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            ConvexFlux::Zero => "Zero",
            ConvexFlux::Burgers => "Burgers",
            ConvexFlux::Exponential => "Exponential",
            ConvexFlux::Custom { .. } => "Custom",
        };
        fm.write_str(name)
    }
}

impl ConvexFlux {
    /// f(u)
    pub fn value(&self, u: f64) -> f64 {
        match self {
            ConvexFlux::Zero => 0.0,
            ConvexFlux::Burgers => 0.5 * u * u,
            ConvexFlux::Exponential => u.exp(),
            ConvexFlux::Custom { f, .. } => f(u),
        }
    }

    /// Characteristic speed f'(u).
    pub fn df(&self, u: f64) -> f64 {
        match self {
            ConvexFlux::Zero => 0.0,
            ConvexFlux::Burgers => u,
            ConvexFlux::Exponential => u.exp(),
            ConvexFlux::Custom { df, .. } => df(u),
        }
    }

    /// f''(u)
    pub fn ddf(&self, u: f64) -> f64 {
        match self {
            ConvexFlux::Zero => 0.0,
            ConvexFlux::Burgers => 1.0,
            ConvexFlux::Exponential => u.exp(),
            ConvexFlux::Custom { ddf, .. } => ddf(u),
        }
    }

    /// f'''(u)
    pub fn dddf(&self, u: f64) -> f64 {
        match self {
            ConvexFlux::Zero => 0.0,
            ConvexFlux::Burgers => 0.0,
            ConvexFlux::Exponential => u.exp(),
            ConvexFlux::Custom { dddf, .. } => dddf(u),
        }
    }

    /// Inverse of the characteristic speed: u with f'(u) = s.
    pub fn df_inv(&self, s: f64) -> Result<f64, FluxError> {
        match self {
            ConvexFlux::Zero => Err(FluxError::SpeedNotInvertible { arg: s }),
            ConvexFlux::Burgers => Ok(s),
            ConvexFlux::Exponential => {
                if s > 0.0 {
                    Ok(s.ln())
                } else {
                    Err(FluxError::SpeedNotInvertible { arg: s })
                }
            }
            ConvexFlux::Custom { df_inv, .. } => {
                let u = df_inv(s);
                if u.is_finite() {
                    Ok(u)
                } else {
                    Err(FluxError::SpeedNotInvertible { arg: s })
                }
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, ConvexFlux::Zero)
    }

    /// Exact Riemann interface flux for a convex flux.
    ///
    /// For `u_left <= u_right` this is the minimum of f over the interval
    /// (transonic rarefactions pick up the sonic value f((f')^{-1}(0)));
    /// otherwise the maximum of the two endpoint values.
    pub fn godunov(&self, u_left: f64, u_right: f64) -> Result<f64, FluxError> {
        if self.is_zero() {
            return Err(FluxError::GodunovOnZeroFlux);
        }
        if u_left <= u_right {
            if self.df(u_left) >= 0.0 {
                Ok(self.value(u_left))
            } else if self.df(u_right) <= 0.0 {
                Ok(self.value(u_right))
            } else {
                // sonic point inside the fan
                let us = self.df_inv(0.0)?;
                Ok(self.value(us))
            }
        } else {
            Ok(self.value(u_left).max(self.value(u_right)))
        }
    }

    /// Checks convexity and speed-inverse consistency on `[lo, hi]`.
    pub fn validate_on(&self, lo: f64, hi: f64) -> Result<(), FluxError> {
        if self.is_zero() {
            return Ok(());
        }
        let n = 256;
        for i in 0..=n {
            let u = lo + (hi - lo) * i as f64 / n as f64;
            if !(self.ddf(u) > 0.0) {
                return Err(FluxError::SpeedNotInvertible { arg: u });
            }
            let round = self.df_inv(self.df(u))?;
            if (round - u).abs() > 1e-12 * (1.0 + u.abs()) {
                return Err(FluxError::SpeedNotInvertible { arg: u });
            }
        }
        Ok(())
    }
}

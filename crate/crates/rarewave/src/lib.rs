//! Numerical laboratory for the Cauchy problem of a 1-D scalar conservation
//! law with nonlinear (non-Newtonian) viscosity:
//!
//! ```text
//! du/dt + d/dx ( f(u) - sigma(du/dx) ) = 0,    u(0, x) -> u_± as x -> ±inf
//! ```
//!
//! The crate constructs the asymptotic reference waves exactly (rarefaction
//! fan, its smoothed approximations, heat-kernel contact wave), advances the
//! viscous problem with a conservative finite-volume scheme, and measures
//! how fast deviations from the references decay in Lebesgue norms.
//!
//! Start with the runnable examples (`cargo run --release --example ...`);
//! each one exercises a major capability end to end. The same machinery is
//! reachable from the `rarewave` binary through the `profile`, `solve`,
//! `decay` and `verify` subcommands.

pub mod analysis;
pub mod flux;
pub mod harness;
pub mod profiles;
pub mod quad;
pub mod solver;

pub use analysis::{DecayReport, Deviation, FitWindow, Quantity, SeriesSpec};
pub use flux::{ConvexFlux, ViscosityLaw};
pub use profiles::{CharacteristicMap, WaveProfile};
pub use solver::{Bump, GridSolution, InitialData, SolverConfig};

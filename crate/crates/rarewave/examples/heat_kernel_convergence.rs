//! Convergence study against an exact solution: with zero convective flux
//! and Newtonian viscosity the contact wave solves the problem exactly, so
//! the solver's error is pure discretization. Halving dx should cut the
//! max-norm error by about four.
//!
//! ```text
//! cargo run --release --example heat_kernel_convergence
//! ```

use rarewave::flux::{ConvexFlux, ViscosityLaw};
use rarewave::profiles::WaveProfile;
use rarewave::solver::{solve, Bump, InitialData, SolverConfig};

fn main() {
    let profile = WaveProfile::contact(-1.0, 1.0, 1.0, 0.0).unwrap();
    println!("{:>8} {:>10} {:>14} {:>8}", "cells", "dx", "max error", "ratio");
    let mut previous: Option<f64> = None;
    for cells in [100usize, 200, 400, 800, 1600] {
        let config = SolverConfig {
            flux: ConvexFlux::Zero,
            law: ViscosityLaw::linear(1.0).unwrap(),
            u_minus: -1.0,
            u_plus: 1.0,
            initial: InitialData::ProfilePlusBump {
                profile: profile.clone(),
                t0: 1.0,
                bump: Bump::none(),
            },
            n_cells: cells,
            margin: 20.0,
            domain: None,
            t_end: 1.0,
            cfl_advection: 0.9,
            cfl_diffusion: 0.4,
            snapshot_times: vec![],
            dt_override: None,
        };
        let out = solve(&config).unwrap();
        let snap = out.snapshots.last().unwrap();
        let mut err: f64 = 0.0;
        for j in 0..snap.n_cells {
            let exact = profile.value(1.0 + snap.t, snap.cell_center(j)).unwrap();
            err = err.max((snap.values[j] - exact).abs());
        }
        let ratio = previous.map(|p| format!("{:.2}", p / err)).unwrap_or_default();
        println!("{cells:>8} {:>10.4} {err:>14.4e} {ratio:>8}", snap.dx);
        previous = Some(err);
    }
}

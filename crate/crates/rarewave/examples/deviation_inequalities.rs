//! Tracks the pointwise-interpolation and Holder inequalities on the
//! deviation of a solver run, snapshot by snapshot.
//!
//! The supremum bound `||phi||_inf^4 <= 4 ||phi||_2^2 int |phi| |phi_x|^2`
//! is a continuum identity; its discrete margin tells how well the grid
//! resolves the steepest front of the deviation. Margins near (or below)
//! one mean the run is under-resolved.
//!
//! ```text
//! cargo run --release --example deviation_inequalities [config.toml]
//! ```

use rarewave::analysis::{interpolation_sides, linf_norm, lq_norm, Deviation};
use rarewave::harness::config::ExperimentConfig;
use rarewave::harness::runner::compute_products;
use rarewave::profiles::WaveProfile;

fn main() {
    let path = std::env::args().nth(1);
    let text = match &path {
        Some(p) => std::fs::read_to_string(p).expect("readable config"),
        None => include_str!("../configs/constant_state.toml").to_string(),
    };
    let exp = ExperimentConfig::from_toml(&text).expect("valid config");
    eprintln!("running {:?} ...", exp.name);
    let products = compute_products(&exp).expect("run completes");

    let reference = match exp.initial.kind.as_str() {
        "constant-plus-bump" => None,
        _ => Some(
            WaveProfile::smoothed_rarefaction(
                exp.build_flux().unwrap(),
                exp.states.u_minus,
                exp.states.u_plus,
                exp.initial.q,
            )
            .expect("reference profile"),
        ),
    };

    println!("{:>10} {:>12} {:>12} {:>10} {:>10}", "t", "sup^4", "bound", "margin", "holder");
    let mut worst = f64::INFINITY;
    for snap in &products.output.snapshots {
        let deviation = match &reference {
            Some(profile) => Deviation::new(snap.view(), profile, snap.t).unwrap(),
            None => Deviation::from_constant(snap.view(), exp.initial.u_bar).unwrap(),
        };
        let (lhs, rhs) = interpolation_sides(&deviation.values, deviation.dx, 2.0);
        let margin = rhs / lhs;
        worst = worst.min(margin);
        let l1 = lq_norm(&deviation.values, deviation.dx, 1.0).unwrap();
        let l2 = lq_norm(&deviation.values, deviation.dx, 2.0).unwrap();
        let sup = linf_norm(&deviation.values);
        let holder = l1 * sup / (l2 * l2);
        println!("{:>10.4} {:>12.4e} {:>12.4e} {:>10.4} {:>10.4}", snap.t, lhs, rhs, margin, holder);
    }
    println!("worst interpolation margin: {worst:.4}");
}

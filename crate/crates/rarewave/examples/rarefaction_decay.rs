//! The flagship experiment: a pseudo-plastic viscous conservation law
//! (Burgers convection, p = 1/2 stress law) started from a perturbed
//! smoothed rarefaction, with the deviation from the exact fan measured in
//! several norms and fitted against the expected decay rates.
//!
//! A trimmed grid keeps this example at a few seconds; the full-size run
//! lives in configs/rarefaction.toml (`rarewave decay configs/rarefaction.toml`).
//!
//! ```text
//! cargo run --release --example rarefaction_decay
//! ```

use rarewave::analysis::{theorem_check, FitWindow};
use rarewave::harness::config::ExperimentConfig;
use rarewave::harness::report::decay_summary;
use rarewave::harness::runner::compute_products;

fn main() {
    let text = include_str!("../configs/rarefaction.toml")
        .replace("cells = 8192", "cells = 3072")
        .replace("t_end = 500.0", "t_end = 160.0");
    let exp = ExperimentConfig::from_toml(&text).unwrap();
    eprintln!("running {} (this takes a few seconds) ...", exp.name);
    let products = compute_products(&exp).unwrap();

    let reports: Vec<_> = products
        .check_series
        .iter()
        .map(|(check, series)| {
            theorem_check(
                &check.label,
                series.clone(),
                check.theoretical,
                check.tolerance,
                check.log_correction,
                FitWindow::default(),
            )
            .unwrap()
        })
        .collect();
    print!("{}", decay_summary(&reports));

    let diag = &products.output.diagnostics;
    println!(
        "\nsteps {}, mass ledger residual {:.2e}, overshoot {:.2e}, dissipation integral {:.4}",
        diag.steps,
        diag.per_snapshot.iter().map(|d| d.conservation_residual).fold(0.0, f64::max),
        diag.max_overshoot.max(diag.max_undershoot),
        products.dissipation_integral
    );
}

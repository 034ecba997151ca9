//! Decay toward a constant state: an integrable bump on a flat background
//! spreads into a diffusion wave whose norms decay at the heat-kernel-like
//! rates, with the L1 norm locked to the conserved mass.
//!
//! ```text
//! cargo run --release --example constant_state_decay
//! ```

use rarewave::analysis::{theorem_check, FitWindow};
use rarewave::harness::config::ExperimentConfig;
use rarewave::harness::report::decay_summary;
use rarewave::harness::runner::compute_products;

fn main() {
    let text = include_str!("../configs/constant_state.toml")
        .replace("cells = 4096", "cells = 2048")
        .replace("t_end = 500.0", "t_end = 200.0")
        .replace("margin = 200.0", "margin = 130.0");
    let exp = ExperimentConfig::from_toml(&text).unwrap();
    eprintln!("running {} ...", exp.name);
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

    let mass_first = products.mass_series.first().unwrap().1;
    let mass_last = products.mass_series.last().unwrap().1;
    println!("\nmass {mass_first:.6} -> {mass_last:.6} (conserved up to boundary outflow)");
}

//! Pure nonlinear diffusion (no convective flux): gradients and the
//! equation-recovered time derivative decay at their expected rates even
//! for the shear-thinning p = 1/2 stress law, since the regularized
//! viscosity approaches the Newtonian one as gradients flatten.
//!
//! ```text
//! cargo run --release --example nonconvective_decay
//! ```

use rarewave::analysis::{theorem_check, FitWindow};
use rarewave::harness::config::ExperimentConfig;
use rarewave::harness::report::decay_summary;
use rarewave::harness::runner::compute_products;

fn main() {
    let exp = ExperimentConfig::from_toml(include_str!("../configs/nonconvective.toml")).unwrap();
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
    println!(
        "\ndissipation integrand at t=1: {:.3e}, at t=500: {:.3e} (time integral {:.4})",
        products.dissipation_series.first().unwrap().1,
        products.dissipation_series.last().unwrap().1,
        products.dissipation_integral
    );
}

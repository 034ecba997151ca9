//! Measures the decay envelopes of the smoothed rarefaction profile across
//! a sweep of Lebesgue orders and both smoothing exponents, and compares
//! the fitted power laws with the expected rates:
//!
//! ```text
//! ||dU/dx||_{L^r}   ~ (1+t)^{-1+1/r}
//! ||d2U/dx2||_{L^r} ~ (1+t)^{-1-(1/2q)(1-1/r)}
//! ```
//!
//! ```text
//! cargo run --release --example envelope_rates
//! ```

use rarewave::analysis::FitWindow;
use rarewave::flux::ConvexFlux;
use rarewave::harness::report::envelope_summary;
use rarewave::profiles::{envelope_report, EnvelopeQuantity};

fn main() {
    let times: Vec<f64> = (0..32).map(|i| 10.0 * 100f64.powf(i as f64 / 31.0)).collect();
    for q in [1.0, 10.0] {
        let mut checks = Vec::new();
        for quantity in [EnvelopeQuantity::DerivX, EnvelopeQuantity::DerivXx] {
            for r in [1.0, 2.0, 4.0, f64::INFINITY] {
                let tolerance = match quantity {
                    EnvelopeQuantity::DerivX => 0.05,
                    _ => 0.1,
                };
                checks.push(
                    envelope_report(
                        &ConvexFlux::Burgers,
                        q,
                        -1.0,
                        1.0,
                        &times,
                        quantity,
                        r,
                        tolerance,
                        FitWindow::LastLogFraction(0.6),
                    )
                    .unwrap(),
                );
            }
        }
        checks.push(
            envelope_report(
                &ConvexFlux::Burgers,
                q,
                -1.0,
                1.0,
                &times,
                EnvelopeQuantity::DiffFromRarefaction,
                2.0,
                0.1,
                FitWindow::LastLogFraction(0.6),
            )
            .unwrap(),
        );
        println!("smoothing exponent q = {q}");
        print!("{}", envelope_summary(&checks));
        println!();
    }
}

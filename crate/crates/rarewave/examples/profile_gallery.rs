//! Builds the three reference waves and writes sampled curves (value and
//! derivatives) plus an overlay picture of the exact rarefaction fan
//! against its smoothed approximations.
//!
//! ```text
//! cargo run --release --example profile_gallery
//! ```
//!
//! Files land in ./gallery/.

use rarewave::flux::ConvexFlux;
use rarewave::harness::svg::{line_plot, PlotSeries};
use rarewave::profiles::WaveProfile;

fn sample(profile: &WaveProfile, t: f64, xs: &[f64]) -> Vec<(f64, f64)> {
    xs.iter().map(|&x| (x, profile.value(t, x).unwrap())).collect()
}

fn main() {
    let dir = std::path::Path::new("gallery");
    std::fs::create_dir_all(dir).unwrap();

    let t = 8.0;
    let xs: Vec<f64> = (0..=800).map(|i| -20.0 + 40.0 * i as f64 / 800.0).collect();

    let exact = WaveProfile::rarefaction(ConvexFlux::Burgers, -1.0, 1.0).unwrap();
    let smooth1 =
        WaveProfile::smoothed_rarefaction(ConvexFlux::Burgers, -1.0, 1.0, 1.0).unwrap();
    let smooth10 =
        WaveProfile::smoothed_rarefaction(ConvexFlux::Burgers, -1.0, 1.0, 10.0).unwrap();
    let contact = WaveProfile::contact(-1.0, 1.0, 1.0, 0.0).unwrap();

    let overlay = vec![
        PlotSeries { label: "rarefaction".into(), points: sample(&exact, t, &xs) },
        PlotSeries { label: "smoothed q=1".into(), points: sample(&smooth1, t, &xs) },
        PlotSeries { label: "smoothed q=10".into(), points: sample(&smooth10, t, &xs) },
        PlotSeries { label: "contact wave".into(), points: sample(&contact, t, &xs) },
    ];
    let svg = line_plot(&format!("reference waves at t = {t}"), "x", "u", &overlay);
    std::fs::write(dir.join("waves.svg"), svg).unwrap();

    let mut csv = String::from("x,rarefaction,smooth_q1,smooth_q1_dx,smooth_q1_dt,smooth_q1_dxx\n");
    for &x in &xs {
        csv.push_str(&format!(
            "{},{},{},{},{},{}\n",
            x,
            exact.value(t, x).unwrap(),
            smooth1.value(t, x).unwrap(),
            smooth1.deriv_x(t, x).unwrap(),
            smooth1.deriv_t(t, x).unwrap(),
            smooth1.deriv_xx(t, x).unwrap(),
        ));
    }
    std::fs::write(dir.join("waves.csv"), csv).unwrap();

    // how far the smoothed fans sit from the exact one at a few times
    println!("{:>8} {:>14} {:>14}", "t", "sup|U1 - ur|", "sup|U10 - ur|");
    for &tt in &[1.0, 10.0, 100.0, 1000.0] {
        let sup = |p: &WaveProfile| {
            xs.iter()
                .map(|&x| {
                    let scaled = x / 20.0 * (tt + 20.0);
                    (p.value(tt, scaled).unwrap() - exact.value(tt, scaled).unwrap()).abs()
                })
                .fold(0.0f64, f64::max)
        };
        println!("{tt:>8} {:>14.6} {:>14.6}", sup(&smooth1), sup(&smooth10));
    }
    println!("wrote gallery/waves.csv and gallery/waves.svg");
}

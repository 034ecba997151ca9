//! Human-readable summary tables for decay and envelope results.

use crate::analysis::DecayReport;
use crate::profiles::EnvelopeCheck;

/// Fixed-width table with one row per checked norm.
pub fn decay_summary(reports: &[DecayReport]) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "{:<40} {:>10} {:>12} {:>8}\n",
        "norm", "fitted", "theoretical", "verdict"
    ));
    for r in reports {
        out.push_str(&format!(
            "{:<40} {:>10.4} {:>12.4} {:>8}\n",
            r.norm_label,
            r.fitted_exponent,
            r.theoretical_exponent,
            if r.pass { "pass" } else { "FAIL" }
        ));
    }
    out
}

pub fn envelope_summary(checks: &[EnvelopeCheck]) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "{:<40} {:>10} {:>10} {:>8}\n",
        "envelope", "fitted", "expected", "verdict"
    ));
    for c in checks {
        out.push_str(&format!(
            "{:<40} {:>10.4} {:>10.4} {:>8}\n",
            c.label,
            c.fitted,
            c.expected,
            if c.pass { "pass" } else { "FAIL" }
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_shape() {
        let reports = vec![DecayReport {
            norm_label: "l2:value".into(),
            series: vec![(1.0, 1.0), (10.0, 0.5)],
            fitted_exponent: -0.31,
            fit_window: (1.0, 10.0),
            theoretical_exponent: -0.25,
            log_factor_allowed: false,
            pass: true,
        }];
        let table = decay_summary(&reports);
        assert!(table.contains("l2:value"));
        assert!(table.contains("pass"));
        assert_eq!(table.lines().count(), 2);
    }
}

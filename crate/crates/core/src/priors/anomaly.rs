use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};

/// Gamma(shape `α`, scale `ν`) log-density of an anomaly value.
pub fn anomaly_value_log_prior(x: f64, alpha: f64, nu: f64) -> Result<f64> {
    if !(alpha > 0.0 && nu > 0.0) {
        return Err(Error::invalid(format!("anomaly prior needs alpha > 0 and nu > 0, got ({alpha}, {nu})")));
    }
    if !(x > 0.0) {
        return Err(Error::invalid(format!("anomaly value must be positive, got {x}")));
    }
    Ok((alpha - 1.0) * x.ln() - x / nu - alpha * nu.ln() - ln_gamma(alpha))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_special_case() {
        for x in [0.01, 0.05, 0.3] {
            let v = anomaly_value_log_prior(x, 1.0, 0.05).unwrap();
            assert!((v - ((1.0f64 / 0.05).ln() - x / 0.05)).abs() < 1e-12);
        }
    }

    #[test]
    fn mode_and_mass() {
        let f = |x: f64| anomaly_value_log_prior(x, 2.0, 1.0).unwrap();
        assert!(f(1.0) > f(0.99) && f(1.0) > f(1.01));
        // Midpoint rule on (0, 60].
        let h = 1e-3;
        let mass: f64 = (0..60_000).map(|k| f((k as f64 + 0.5) * h).exp() * h).sum();
        assert!((mass - 1.0).abs() < 1e-6, "{mass}");
        assert!(anomaly_value_log_prior(0.0, 1.0, 1.0).is_err());
    }
}

//! Standard normal distribution helpers.

use statrs::distribution::{ContinuousCDF, Normal};
use std::sync::OnceLock;

fn standard() -> &'static Normal {
    static STD: OnceLock<Normal> = OnceLock::new();
    STD.get_or_init(|| Normal::new(0.0, 1.0).expect("unit normal"))
}

/// Standard normal CDF, Φ(x) = erfc(-x/√2)/2.
pub fn cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x * std::f64::consts::FRAC_1_SQRT_2)
}

/// Standard normal density.
pub fn pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// Standard normal quantile, Φ⁻¹(p), for p in (0, 1). The statrs inverse is
/// polished with one Newton step against [`cdf`].
pub fn quantile(p: f64) -> f64 {
    let x = standard().inverse_cdf(p);
    if !x.is_finite() {
        return x;
    }
    let density = pdf(x);
    if density > 0.0 {
        x - (cdf(x) - p) / density
    } else {
        x
    }
}

/// Two-sided critical value z_{1-α/2}.
pub fn two_sided_critical(alpha: f64) -> f64 {
    quantile(1.0 - alpha / 2.0)
}

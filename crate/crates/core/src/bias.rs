//! Ascertainment-bias parameters from an interim snapshot of category-level
//! event counts, with delta-method standard errors and Wald intervals.
//!
//! Category 1 events are immune to the bias, Category 2 events can be
//! mimicked (or masked) by it, and Category 3 events are non-outcome events
//! that can be relabelled as Category 2 in the intervention arm. `B` compares
//! the Category-2 share of Category 2+3 events between arms, `P` is the
//! Category-2 share of control outcome events, and `k = 1 + P(B - 1)` is the
//! resulting inflation of observed intervention outcome events.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::event_model::{expected_events, HazardPair, StudyDesign};
use crate::normal;

/// Interim event counts by arm and category.
///
/// `B` is estimated from total (repeat-inclusive) Category 2/3 counts, `P`
/// from first events, so both kinds are carried.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CategoryCounts {
    /// Control Category-1 first events.
    pub c1: u64,
    /// Control Category-2 first events.
    pub c2: u64,
    /// Control Category-2 total events.
    pub c2_all: u64,
    /// Control Category-3 total events.
    pub c3_all: u64,
    /// Intervention observed Category-2 total events.
    pub i2_all: u64,
    /// Intervention observed Category-3 total events.
    pub i3_all: u64,
}

impl CategoryCounts {
    pub fn scaled(&self, factor: u64) -> Self {
        CategoryCounts {
            c1: self.c1 * factor,
            c2: self.c2 * factor,
            c2_all: self.c2_all * factor,
            c3_all: self.c3_all * factor,
            i2_all: self.i2_all * factor,
            i3_all: self.i3_all * factor,
        }
    }
}

/// A point estimate with its delta-method variance and Wald interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub variance: f64,
    pub lower: f64,
    pub upper: f64,
}

impl Estimate {
    fn wald(value: f64, variance: f64, z: f64) -> Self {
        let half = z * variance.sqrt();
        Estimate {
            value,
            variance,
            lower: value - half,
            upper: value + half,
        }
    }

    pub fn std_error(&self) -> f64 {
        self.variance.sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BiasEstimate {
    pub rho_i: Estimate,
    pub rho_c: Estimate,
    pub b: Estimate,
    pub p: Estimate,
    pub k: Estimate,
    pub ci_level: f64,
}

/// Binomial proportion with variance p(1-p)/D.
fn proportion(num: u64, den: u64) -> (f64, f64) {
    let d = den as f64;
    let p = num as f64 / d;
    (p, p * (1.0 - p) / d)
}

/// Variance of `k = 1 + P(B - 1)` with `B` and `P` independent.
pub fn k_variance(b: f64, var_b: f64, p: f64, var_p: f64) -> f64 {
    (b - 1.0).powi(2) * var_p + p * p * var_b
}

/// Estimate `ρ_I`, `ρ_C`, `B`, `P` and `k` with two-sided intervals at `ci_level`.
pub fn estimate_bias(counts: &CategoryCounts, ci_level: f64) -> Result<BiasEstimate> {
    if !(ci_level > 0.0 && ci_level < 1.0) {
        return Err(Error::domain(format!("confidence level must lie in (0, 1), got {ci_level}")));
    }
    let intervention_total = counts.i2_all + counts.i3_all;
    if intervention_total == 0 {
        return Err(Error::DegenerateCounts(
            "intervention Category 2 + Category 3 total (i2_all + i3_all) is zero".into(),
        ));
    }
    let control_total = counts.c2_all + counts.c3_all;
    if control_total == 0 {
        return Err(Error::DegenerateCounts(
            "control Category 2 + Category 3 total (c2_all + c3_all) is zero".into(),
        ));
    }
    let first_total = counts.c1 + counts.c2;
    if first_total == 0 {
        return Err(Error::DegenerateCounts(
            "control first-event total (c1 + c2) is zero".into(),
        ));
    }
    if counts.c2_all == 0 {
        return Err(Error::domain("control Category-2 proportion is zero; B is undefined"));
    }

    let z = normal::quantile(1.0 - (1.0 - ci_level) / 2.0);
    let (rho_i, var_rho_i) = proportion(counts.i2_all, intervention_total);
    let (rho_c, var_rho_c) = proportion(counts.c2_all, control_total);
    let (p, var_p) = proportion(counts.c2, first_total);

    let b = rho_i / rho_c;
    // Same as B²(σ²_ρI/ρ_I² + σ²_ρC/ρ_C²), but defined at ρ_I = 0.
    let var_b = var_rho_i / (rho_c * rho_c) + b * b * var_rho_c / (rho_c * rho_c);
    let k = 1.0 + p * (b - 1.0);
    assert!(k >= 0.0, "k = 1 + P(B - 1) must be non-negative, got {k}");
    let var_k = k_variance(b, var_b, p, var_p);

    Ok(BiasEstimate {
        rho_i: Estimate::wald(rho_i, var_rho_i, z),
        rho_c: Estimate::wald(rho_c, var_rho_c, z),
        b: Estimate::wald(b, var_b, z),
        p: Estimate::wald(p, var_p, z),
        k: Estimate::wald(k, var_k, z),
        ci_level,
    })
}

/// Extra intervention events attributable to the bias: `(1 - 1/k)·E_obs`.
/// Negative when `k < 1` (the bias masks events).
pub fn excess_intervention_events(e_i_obs: f64, k: f64) -> Result<f64> {
    if !(k > 0.0) {
        return Err(Error::domain(format!("inflation factor must be positive, got {k}")));
    }
    if !(e_i_obs >= 0.0) {
        return Err(Error::domain(format!("event count must be >= 0, got {e_i_obs}")));
    }
    Ok((1.0 - 1.0 / k) * e_i_obs)
}

/// Expected observed intervention events, `k·E_I^true` at the hypothesized hazard ratio.
pub fn observed_intervention_events(
    n_star: f64,
    h_hyp: f64,
    hazards: &HazardPair,
    design: &StudyDesign,
    k: f64,
) -> Result<f64> {
    if !(k > 0.0) {
        return Err(Error::domain(format!("inflation factor must be positive, got {k}")));
    }
    Ok(k * expected_events(n_star, h_hyp, hazards, design)?)
}

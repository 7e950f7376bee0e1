//! Expected event counts under uniform staggered enrollment with a
//! competing risk, and conversion of 12-month cause-specific cumulative
//! incidences to constant monthly hazards.
//!
//! All times are in months.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Length of the window over which cause-specific rates are observed.
pub const RATE_WINDOW_MONTHS: f64 = 12.0;

/// Below this total hazard (per month) the Q factor falls back to its
/// leading-order series term.
const SINGULAR_HAZARD: f64 = 1e-12;

/// Trial design constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StudyDesign {
    /// Total study duration T, in months.
    pub total_months: f64,
    /// Fraction μ of the study period over which enrollment is spread.
    pub recruitment_fraction: f64,
    /// Two-sided type-I error rate.
    pub alpha: f64,
    /// Hypothesized (bias-free) intervention/control hazard ratio.
    pub h_hyp: f64,
}

impl StudyDesign {
    pub fn new(total_months: f64, recruitment_fraction: f64, alpha: f64, h_hyp: f64) -> Result<Self> {
        let design = StudyDesign {
            total_months,
            recruitment_fraction,
            alpha,
            h_hyp,
        };
        design.validate()?;
        Ok(design)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.total_months > 0.0 && self.total_months.is_finite()) {
            return Err(Error::domain(format!(
                "total duration must be positive, got {}",
                self.total_months
            )));
        }
        if !(self.recruitment_fraction > 0.0 && self.recruitment_fraction <= 1.0) {
            return Err(Error::domain(format!(
                "recruitment fraction must lie in (0, 1], got {}",
                self.recruitment_fraction
            )));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::domain(format!("alpha must lie in (0, 1), got {}", self.alpha)));
        }
        if !(self.h_hyp > 0.0 && self.h_hyp.is_finite()) {
            return Err(Error::domain(format!(
                "hypothesized hazard ratio must be positive, got {}",
                self.h_hyp
            )));
        }
        Ok(())
    }

    /// Length of the enrollment window, μT.
    pub fn enrollment_months(&self) -> f64 {
        self.recruitment_fraction * self.total_months
    }
}

/// Constant monthly hazards for the outcome and the competing risk (death).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HazardPair {
    pub lambda: f64,
    pub gamma: f64,
}

impl HazardPair {
    pub fn new(lambda: f64, gamma: f64) -> Result<Self> {
        let pair = HazardPair { lambda, gamma };
        pair.validate()?;
        if lambda + gamma <= 0.0 {
            return Err(Error::domain("outcome and competing hazards are both zero"));
        }
        Ok(pair)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return Err(Error::domain(format!("outcome hazard must be >= 0, got {}", self.lambda)));
        }
        if !(self.gamma >= 0.0 && self.gamma.is_finite()) {
            return Err(Error::domain(format!("competing hazard must be >= 0, got {}", self.gamma)));
        }
        Ok(())
    }
}

/// Observed 12-month cumulative incidences of the outcome (`r`) and of
/// death (`d`) in the control arm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CauseSpecificRates {
    pub r: f64,
    pub d: f64,
}

impl CauseSpecificRates {
    pub fn new(r: f64, d: f64) -> Result<Self> {
        let rates = CauseSpecificRates { r, d };
        rates.validate()?;
        Ok(rates)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.r >= 0.0 && self.d >= 0.0) {
            return Err(Error::domain(format!(
                "cumulative incidences must be non-negative, got r={}, d={}",
                self.r, self.d
            )));
        }
        if self.r + self.d >= 1.0 {
            return Err(Error::domain(format!(
                "r + d must be below 1 for the hazards to exist, got {}",
                self.r + self.d
            )));
        }
        Ok(())
    }
}

/// `e^{-y} - 1 + y`, accurate for small `y`.
fn exp_remainder(y: f64) -> f64 {
    if y < 0.5 {
        // Alternating series y²/2! - y³/3! + ...; 25 terms reach machine precision at y = 0.5.
        let mut term = y * y / 2.0;
        let mut sum = term;
        let mut n = 2.0;
        for _ in 0..25 {
            n += 1.0;
            term *= -y / n;
            sum += term;
            if term.abs() < sum.abs() * 1e-17 {
                break;
            }
        }
        sum
    } else {
        (-y).exp_m1() + y
    }
}

/// `1 - e^{-y}`.
fn exp_complement(y: f64) -> f64 {
    -(-y).exp_m1()
}

/// The uniform-enrollment event fraction as a function of the expansion
/// variable x = T·(z + γ):
///
/// `Q̄(x) = 1 - [e^{-(1-μ)x} - e^{-x}] / (μx)`.
///
/// Evaluated as `[g(x) - g((1-μ)x)] / (μx)` with `g(y) = e^{-y} - 1 + y`,
/// which is algebraically identical and free of cancellation near x = 0.
pub fn qbar(x: f64, mu: f64) -> f64 {
    if x < SINGULAR_HAZARD {
        return (1.0 - mu / 2.0) * x;
    }
    (exp_remainder(x) - exp_remainder((1.0 - mu) * x)) / (mu * x)
}

/// Pieces of `Q̄` needed by the Newton derivative: returns
/// `(N(x), x·N'(x) - N(x))` where `Q̄(x) = N(x) / (μx)`.
pub(crate) fn qbar_numerator_parts(x: f64, mu: f64) -> (f64, f64) {
    let a = (1.0 - mu) * x;
    let numerator = exp_remainder(x) - exp_remainder(a);
    let derivative = exp_complement(x) - (1.0 - mu) * exp_complement(a);
    (numerator, x * derivative - numerator)
}

/// The Q factor: probability that a participant enrolled uniformly over
/// `[0, μT]` experiences any event (outcome or competing) before the end of
/// the study, for outcome hazard `z` and competing hazard `gamma`.
pub fn q_factor(z: f64, gamma: f64, design: &StudyDesign) -> Result<f64> {
    design.validate()?;
    if !(z >= 0.0 && gamma >= 0.0) {
        return Err(Error::domain(format!("hazards must be non-negative, got z={z}, gamma={gamma}")));
    }
    let total = z + gamma;
    if total == 0.0 {
        return Err(Error::domain("q_factor undefined for zero total hazard"));
    }
    let x = design.total_months * total;
    if total < SINGULAR_HAZARD {
        return Ok((1.0 - design.recruitment_fraction / 2.0) * x);
    }
    Ok(qbar(x, design.recruitment_fraction))
}

/// Expected number of outcome events in an arm of `n_star` effective
/// participants whose outcome hazard is `h·λ`.
///
/// `E = N*·(hλ)/(hλ + γ)·Q(hλ)`; the control arm uses `h = 1`.
pub fn expected_events(n_star: f64, h: f64, hazards: &HazardPair, design: &StudyDesign) -> Result<f64> {
    if !(n_star >= 0.0) {
        return Err(Error::domain(format!("effective sample size must be >= 0, got {n_star}")));
    }
    if !(h > 0.0) {
        return Err(Error::domain(format!("hazard ratio must be positive, got {h}")));
    }
    hazards.validate()?;
    let z = h * hazards.lambda;
    if z == 0.0 {
        // No outcome hazard: no outcome events, whatever the competing risk.
        q_factor(z, hazards.gamma, design)?;
        return Ok(0.0);
    }
    let q = q_factor(z, hazards.gamma, design)?;
    Ok(n_star * z / (z + hazards.gamma) * q)
}

/// Expected number of first events falling in one category when several
/// event categories share an arm. `category_hazard` is that category's
/// hazard and `total_hazard` the sum over all categories.
///
/// `E_e = N·λ_e/(ξ + γ)·Q(ξ)`.
pub fn expected_category_events(
    n: f64,
    category_hazard: f64,
    total_hazard: f64,
    gamma: f64,
    design: &StudyDesign,
) -> Result<f64> {
    if !(category_hazard >= 0.0 && category_hazard <= total_hazard) {
        return Err(Error::domain("category hazard must lie in [0, total hazard]"));
    }
    let q = q_factor(total_hazard, gamma, design)?;
    Ok(n * category_hazard / (total_hazard + gamma) * q)
}

/// Constant monthly hazards reproducing the observed 12-month cumulative
/// incidences of the outcome and of death.
pub fn hazards_from_rates(rates: &CauseSpecificRates) -> Result<HazardPair> {
    rates.validate()?;
    let total = rates.r + rates.d;
    if total == 0.0 {
        return Ok(HazardPair { lambda: 0.0, gamma: 0.0 });
    }
    let scale = -(-total).ln_1p() / RATE_WINDOW_MONTHS;
    Ok(HazardPair {
        lambda: rates.r / total * scale,
        gamma: rates.d / total * scale,
    })
}

/// Inverse of [`hazards_from_rates`]: the 12-month cumulative incidences
/// implied by constant hazards.
pub fn rates_from_hazards(hazards: &HazardPair) -> Result<CauseSpecificRates> {
    hazards.validate()?;
    let total = hazards.lambda + hazards.gamma;
    if total == 0.0 {
        return Ok(CauseSpecificRates { r: 0.0, d: 0.0 });
    }
    let any = exp_complement(RATE_WINDOW_MONTHS * total);
    Ok(CauseSpecificRates {
        r: hazards.lambda / total * any,
        d: hazards.gamma / total * any,
    })
}

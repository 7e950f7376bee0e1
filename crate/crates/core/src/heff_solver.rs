//! Effective hazard ratio under ascertainment bias.
//!
//! The bias inflates observed intervention events by `k`. The effective
//! hazard ratio is the one that would generate that many events without
//! bias, i.e. the root `Λ*` of
//!
//! ```text
//! f(Λ) = Λ/(Λ+γ)·Q̄(T(Λ+γ)) - kZ,     Z = Hλ/(Hλ+γ)·Q(Hλ)
//! ```
//!
//! divided by the control hazard `λ`. The root is found by Newton's method on
//! `Λ`, seeded from closed-form first- and second-order Taylor solutions, with
//! a bracketed bisection fallback.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::event_model::{q_factor, qbar, qbar_numerator_parts, HazardPair, StudyDesign};

/// Highest order accepted by [`qbar_taylor`].
pub const MAX_TAYLOR_ORDER: usize = 20;

/// Numerical controls for [`solve_h_eff`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverSettings {
    pub rel_tolerance: f64,
    pub max_iterations: usize,
    /// Growth factor applied to the upper bisection bracket until it
    /// straddles the root.
    pub bracket_expansion: f64,
}

impl Default for SolverSettings {
    fn default() -> Self {
        SolverSettings {
            rel_tolerance: 1e-12,
            max_iterations: 100,
            bracket_expansion: 2.0,
        }
    }
}

impl SolverSettings {
    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tolerance > 0.0) {
            return Err(Error::domain("solver tolerance must be positive"));
        }
        if self.max_iterations < 1 {
            return Err(Error::domain("solver needs at least one iteration"));
        }
        if !(self.bracket_expansion > 1.0) {
            return Err(Error::domain("bracket expansion factor must exceed 1"));
        }
        Ok(())
    }
}

/// Which starting point initialised Newton's method.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Seed {
    SecondOrder,
    Theta,
    FirstOrder,
    /// `λ·H·k`, used when no approximation is usable.
    Naive,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HeffResult {
    pub h_eff: f64,
    /// `f(Λ*)`, the left side minus `kZ` at the returned root.
    pub residual: f64,
    /// The right side `kZ`.
    pub target: f64,
    pub iterations: usize,
    pub seed_used: Seed,
    /// True when Newton's method was abandoned for bisection.
    pub bisection: bool,
    pub h_eff_first_order: f64,
    /// `None` when the second-order solution violates its validity constraints.
    pub h_eff_second_order: Option<f64>,
}

/// The equation being solved, with its constants precomputed.
struct HeffEquation {
    gamma: f64,
    months: f64,
    mu: f64,
    target: f64,
}

impl HeffEquation {
    fn lhs(&self, big_lambda: f64) -> f64 {
        let x = self.months * (big_lambda + self.gamma);
        big_lambda / (big_lambda + self.gamma) * qbar(x, self.mu)
    }

    fn value(&self, big_lambda: f64) -> f64 {
        self.lhs(big_lambda) - self.target
    }

    /// Total derivative `df/dΛ = ∂f/∂Λ + ∂f/∂x·dx/dΛ`, rearranged as
    /// `[γN + Λ(xN' - N)] / (μx(Λ+γ)²)` with `Q̄ = N/(μx)`.
    fn derivative(&self, big_lambda: f64) -> f64 {
        let s = big_lambda + self.gamma;
        let x = self.months * s;
        let (n, slope_term) = qbar_numerator_parts(x, self.mu);
        (self.gamma * n + big_lambda * slope_term) / (self.mu * x * s * s)
    }
}

fn check_inputs(k: f64, h_hyp: f64, hazards: &HazardPair, design: &StudyDesign) -> Result<()> {
    design.validate()?;
    hazards.validate()?;
    if !(k > 0.0 && k.is_finite()) {
        return Err(Error::domain(format!("inflation factor must be positive, got {k}")));
    }
    if !(h_hyp > 0.0 && h_hyp.is_finite()) {
        return Err(Error::domain(format!("hypothesized hazard ratio must be positive, got {h_hyp}")));
    }
    if !(hazards.lambda > 0.0) {
        return Err(Error::domain("control outcome hazard must be positive"));
    }
    Ok(())
}

/// `Z = Hλ/(Hλ+γ)·Q(Hλ)`, the per-participant expected event fraction in the
/// intervention arm without bias.
pub fn event_fraction(h: f64, hazards: &HazardPair, design: &StudyDesign) -> Result<f64> {
    let z = h * hazards.lambda;
    Ok(z / (z + hazards.gamma) * q_factor(z, hazards.gamma, design)?)
}

/// Truncated Taylor series of `Q̄(x)` about `x = 0`:
/// `Σ_{n=1}^{order} c_n xⁿ` with
/// `c_n = Σ_{j=0}^{n} (-1)^{n+j+1} μ^j / ((j+1)!(n-j)!)`.
pub fn qbar_taylor(x: f64, mu: f64, order: usize) -> Result<f64> {
    if order < 1 {
        return Err(Error::domain("series order must be at least 1"));
    }
    if order > MAX_TAYLOR_ORDER {
        return Err(Error::domain(format!(
            "series order {order} exceeds {MAX_TAYLOR_ORDER} (factorial overflow guard)"
        )));
    }
    let mut factorial = [1.0f64; MAX_TAYLOR_ORDER + 2];
    for i in 1..factorial.len() {
        factorial[i] = factorial[i - 1] * i as f64;
    }
    let mut sum = 0.0;
    let mut x_pow = 1.0;
    for n in 1..=order {
        x_pow *= x;
        let mut coeff = 0.0;
        let mut mu_pow = 1.0;
        for j in 0..=n {
            let sign = if (n + j + 1) % 2 == 0 { 1.0 } else { -1.0 };
            coeff += sign * mu_pow / (factorial[j + 1] * factorial[n - j]);
            mu_pow *= mu;
        }
        sum += coeff * x_pow;
    }
    Ok(sum)
}

/// First-order solution: `kH/[(1-μ/2)T(Hλ+γ)]·Q(Hλ)`.
pub fn h_eff_first_order(k: f64, h_hyp: f64, hazards: &HazardPair, design: &StudyDesign) -> Result<f64> {
    design.validate()?;
    hazards.validate()?;
    if !(hazards.lambda > 0.0) {
        return Err(Error::domain("control outcome hazard must be positive"));
    }
    let mu = design.recruitment_fraction;
    let z = h_hyp * hazards.lambda;
    let q = q_factor(z, hazards.gamma, design)?;
    Ok(k * h_hyp / ((1.0 - mu / 2.0) * design.total_months * (z + hazards.gamma)) * q)
}

/// `θ` and `φ` of the second-order quadratic `Λ² - 2θΛ + φ² = 0`.
fn theta_phi(k: f64, h_hyp: f64, hazards: &HazardPair, design: &StudyDesign) -> Result<(f64, f64)> {
    let mu = design.recruitment_fraction;
    let t = design.total_months;
    let poly = mu * mu - 3.0 * mu + 3.0;
    let theta = 0.5 * (3.0 / t * (2.0 - mu) / poly - hazards.gamma);
    let kz = k * event_fraction(h_hyp, hazards, design)?;
    let phi = (6.0 * kz / poly).sqrt() / t;
    Ok((theta, phi))
}

/// Second-order solution `(θ/λ)(1 - √(1 - φ²/θ²))`, or `None` when `θ < 0`
/// or `θ < φ` (no admissible real root).
pub fn h_eff_second_order(
    k: f64,
    h_hyp: f64,
    hazards: &HazardPair,
    design: &StudyDesign,
) -> Result<Option<f64>> {
    design.validate()?;
    hazards.validate()?;
    if !(hazards.lambda > 0.0) {
        return Err(Error::domain("control outcome hazard must be positive"));
    }
    let (theta, phi) = theta_phi(k, h_hyp, hazards, design)?;
    Ok(second_order_root(theta, phi).map(|root| root / hazards.lambda))
}

fn second_order_root(theta: f64, phi: f64) -> Option<f64> {
    if theta < 0.0 || theta < phi {
        return None;
    }
    if phi == 0.0 {
        return Some(0.0);
    }
    // θ(1 - √(1 - φ²/θ²)) written without the cancellation at small φ.
    Some(phi * phi / (theta + (theta * theta - phi * phi).sqrt()))
}

/// Solve for the effective hazard ratio with Newton's method, falling back to
/// bisection when an iterate leaves `Λ > 0` or fails to converge.
pub fn solve_h_eff(
    k: f64,
    h_hyp: f64,
    hazards: &HazardPair,
    design: &StudyDesign,
    settings: &SolverSettings,
) -> Result<HeffResult> {
    solve(k, h_hyp, hazards, design, settings, false)
}

/// Same as [`solve_h_eff`] but skips Newton's method entirely.
pub fn solve_h_eff_bisection(
    k: f64,
    h_hyp: f64,
    hazards: &HazardPair,
    design: &StudyDesign,
    settings: &SolverSettings,
) -> Result<HeffResult> {
    solve(k, h_hyp, hazards, design, settings, true)
}

fn solve(
    k: f64,
    h_hyp: f64,
    hazards: &HazardPair,
    design: &StudyDesign,
    settings: &SolverSettings,
    force_bisection: bool,
) -> Result<HeffResult> {
    check_inputs(k, h_hyp, hazards, design)?;
    settings.validate()?;
    let lambda = hazards.lambda;
    let eq = HeffEquation {
        gamma: hazards.gamma,
        months: design.total_months,
        mu: design.recruitment_fraction,
        target: k * event_fraction(h_hyp, hazards, design)?,
    };

    // The left side increases towards 1 as Λ → ∞.
    let supremum = eq.lhs(1e6 * (lambda + hazards.gamma));
    if eq.target >= supremum {
        return Err(Error::NoSolution {
            target: eq.target,
            supremum,
        });
    }

    let first = h_eff_first_order(k, h_hyp, hazards, design)?;
    let (theta, phi) = theta_phi(k, h_hyp, hazards, design)?;
    let second = second_order_root(theta, phi).map(|root| root / lambda);

    let (seed, seed_used) = match second {
        Some(h) if h > 0.0 => (h * lambda, Seed::SecondOrder),
        _ if theta > 0.0 => (theta, Seed::Theta),
        _ if first > 0.0 => (first * lambda, Seed::FirstOrder),
        _ => (lambda * h_hyp * k, Seed::Naive),
    };

    let tol = settings.rel_tolerance;
    let finish = |root: f64, iterations: usize, bisection: bool| HeffResult {
        h_eff: root / lambda,
        residual: eq.value(root),
        target: eq.target,
        iterations,
        seed_used,
        bisection,
        h_eff_first_order: first,
        h_eff_second_order: second,
    };

    let mut iterations = 0;
    if !force_bisection {
        let mut current = seed;
        while iterations < settings.max_iterations {
            iterations += 1;
            let slope = eq.derivative(current);
            if !(slope > 0.0 && slope.is_finite()) {
                break;
            }
            let next = current - eq.value(current) / slope;
            if !(next > 0.0 && next.is_finite()) {
                break;
            }
            let step = (next - current).abs();
            current = next;
            if step <= tol * current && eq.value(current).abs() <= tol * eq.target {
                return Ok(finish(current, iterations, false));
            }
        }
    }

    let root = bisect(&eq, seed.max(lambda * h_hyp * k), settings, &mut iterations)?;
    Ok(finish(root, iterations, true))
}

fn bisect(eq: &HeffEquation, start: f64, settings: &SolverSettings, iterations: &mut usize) -> Result<f64> {
    let tol = settings.rel_tolerance;
    let mut lo = 0.0;
    let mut hi = start.max(f64::MIN_POSITIVE);
    let mut expansions = 0;
    while eq.value(hi) <= 0.0 {
        lo = hi;
        hi *= settings.bracket_expansion;
        expansions += 1;
        if expansions > 4000 || !hi.is_finite() {
            return Err(Error::NonConvergence {
                iterations: *iterations,
                residual: eq.value(lo),
            });
        }
    }
    // Halving a finite double interval reaches adjacent floats well within this.
    for _ in 0..2200 {
        *iterations += 1;
        let mid = 0.5 * (lo + hi);
        let f_mid = eq.value(mid);
        if (hi - lo) <= tol * mid && f_mid.abs() <= tol * eq.target {
            return Ok(mid);
        }
        if mid <= lo || mid >= hi {
            break;
        }
        if f_mid > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let mid = 0.5 * (lo + hi);
    if eq.value(mid).abs() <= tol * eq.target {
        return Ok(mid);
    }
    Err(Error::NonConvergence {
        iterations: *iterations,
        residual: eq.value(mid),
    })
}

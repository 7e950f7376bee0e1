//! Log-rank power and the end-to-end projection pipeline comparing the
//! bias-prone protocol outcome definition with a restricted, bias-free one.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::bias::BiasEstimate;
use crate::error::{Error, Result};
use crate::event_model::{
    expected_events, hazards_from_rates, CauseSpecificRates, HazardPair, StudyDesign, RATE_WINDOW_MONTHS,
};
use crate::heff_solver::{solve_h_eff, HeffResult, SolverSettings};
use crate::normal;

/// Schoenfeld log-rank power, `Φ(½√E·|ln h| - z_{1-α/2})`.
pub fn schoenfeld_power(total_events: f64, h: f64, alpha: f64) -> Result<f64> {
    if !(total_events >= 0.0) {
        return Err(Error::domain(format!("event total must be >= 0, got {total_events}")));
    }
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::domain(format!("hazard ratio must be positive, got {h}")));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::domain(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    let drift = 0.5 * total_events.sqrt() * h.ln().abs();
    Ok(normal::cdf(drift - normal::two_sided_critical(alpha)))
}

/// Enrollment, loss to follow-up and design effects for both definitions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SampleSizeInputs {
    pub n_c: f64,
    pub n_i: f64,
    /// Withdrawals per person-year.
    pub withdrawal_rate: f64,
    /// Variance inflation (design effect) under the protocol definition.
    pub v_protocol: f64,
    /// Variance inflation under the revised definition.
    pub v_revised: f64,
    /// User-supplied multiplicative adjustment to N* (e.g. for interim looks).
    #[serde(default = "unit")]
    pub adjustment: f64,
}

fn unit() -> f64 {
    1.0
}

impl SampleSizeInputs {
    pub fn validate(&self) -> Result<()> {
        if !(self.n_c >= 0.0 && self.n_i >= 0.0) {
            return Err(Error::domain("enrollment counts must be non-negative"));
        }
        if !(self.withdrawal_rate >= 0.0 && self.withdrawal_rate < 1.0) {
            return Err(Error::domain(format!(
                "withdrawal rate must lie in [0, 1), got {}",
                self.withdrawal_rate
            )));
        }
        for v in [self.v_protocol, self.v_revised] {
            if !(v >= 1.0 && v.is_finite()) {
                return Err(Error::domain(format!("variance inflation must be >= 1, got {v}")));
            }
        }
        if !(self.adjustment > 0.0 && self.adjustment.is_finite()) {
            return Err(Error::domain("sample-size adjustment must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArmSizes {
    pub control: f64,
    pub intervention: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EffectiveSampleSizes {
    /// Projected overall fraction lost to follow-up, `W`.
    pub loss_fraction: f64,
    pub protocol: ArmSizes,
    pub revised: ArmSizes,
}

/// `W = 1 - (1-w)^{T/12}` and `N* = N(1-W)/V` for each arm and definition.
pub fn effective_sample_size(inputs: &SampleSizeInputs, design: &StudyDesign) -> Result<EffectiveSampleSizes> {
    inputs.validate()?;
    design.validate()?;
    let retained = (1.0 - inputs.withdrawal_rate).powf(design.total_months / RATE_WINDOW_MONTHS);
    let sizes = |v: f64| ArmSizes {
        control: inputs.n_c * retained * inputs.adjustment / v,
        intervention: inputs.n_i * retained * inputs.adjustment / v,
    };
    Ok(EffectiveSampleSizes {
        loss_fraction: 1.0 - retained,
        protocol: sizes(inputs.v_protocol),
        revised: sizes(inputs.v_revised),
    })
}

/// Event-type mix and per-type adjudication confirmation fractions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdjudicationProfile {
    pub proportions: BTreeMap<String, f64>,
    pub confirm_fractions: BTreeMap<String, f64>,
}

impl AdjudicationProfile {
    pub fn new(proportions: BTreeMap<String, f64>, confirm_fractions: BTreeMap<String, f64>) -> Result<Self> {
        let profile = AdjudicationProfile {
            proportions,
            confirm_fractions,
        };
        profile.validate()?;
        Ok(profile)
    }

    /// Build from non-negative weights (counts, or rounded proportions),
    /// normalised to sum to one.
    pub fn from_weights(weights: BTreeMap<String, f64>, confirm_fractions: BTreeMap<String, f64>) -> Result<Self> {
        let total: f64 = weights.values().sum();
        if !(total > 0.0) || weights.values().any(|w| !(*w >= 0.0)) {
            return Err(Error::domain("adjudication weights must be non-negative with a positive sum"));
        }
        let proportions = weights.into_iter().map(|(label, w)| (label, w / total)).collect();
        Self::new(proportions, confirm_fractions)
    }

    pub fn validate(&self) -> Result<()> {
        if self.proportions.is_empty() {
            return Err(Error::domain("adjudication profile lists no event types"));
        }
        if self.proportions.keys().ne(self.confirm_fractions.keys()) {
            let mine: Vec<_> = self.proportions.keys().collect();
            let theirs: Vec<_> = self.confirm_fractions.keys().collect();
            return Err(Error::domain(format!(
                "adjudication labels differ: proportions {mine:?}, confirm fractions {theirs:?}"
            )));
        }
        for (label, &v) in self.proportions.iter().chain(&self.confirm_fractions) {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::domain(format!("adjudication value for {label} outside [0, 1]: {v}")));
            }
        }
        let total: f64 = self.proportions.values().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::domain(format!("event-type proportions sum to {total}, not 1")));
        }
        Ok(())
    }
}

/// Overall confirmation probability `A = Σ_t P_t A_t`.
pub fn overall_confirmation(profile: &AdjudicationProfile) -> Result<f64> {
    profile.validate()?;
    Ok(profile
        .proportions
        .iter()
        .map(|(label, p)| p * profile.confirm_fractions[label])
        .sum())
}

/// How the revised (Category 1 only) definition's events are obtained.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case", deny_unknown_fields)]
pub enum RevisedDefinition {
    /// Separately observed cause-specific rates under the revised definition.
    Direct { r: f64, d: f64 },
    /// Revised events are `(1-P)` times the protocol definition's true events.
    ScaledByP,
}

/// Bias parameters driving the projection.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BiasParams {
    pub b: f64,
    pub p: f64,
}

impl BiasParams {
    pub fn k(&self) -> f64 {
        1.0 + self.p * (self.b - 1.0)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.b >= 0.0 && self.b.is_finite()) {
            return Err(Error::domain(format!("bias ratio B must be >= 0, got {}", self.b)));
        }
        if !(0.0..=1.0).contains(&self.p) {
            return Err(Error::domain(format!("P must lie in [0, 1], got {}", self.p)));
        }
        Ok(())
    }
}

impl From<&BiasEstimate> for BiasParams {
    fn from(est: &BiasEstimate) -> Self {
        BiasParams {
            b: est.b.value,
            p: est.p.value,
        }
    }
}

/// Adjudication confirmation probabilities `A` for each definition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Confirmation {
    pub protocol: f64,
    pub revised: f64,
}

impl Confirmation {
    /// No adjudication step: every self-reported event counts.
    pub const NONE: Confirmation = Confirmation {
        protocol: 1.0,
        revised: 1.0,
    };

    pub fn from_profiles(protocol: Option<&AdjudicationProfile>, revised: Option<&AdjudicationProfile>) -> Result<Self> {
        Ok(Confirmation {
            protocol: protocol.map(overall_confirmation).transpose()?.unwrap_or(1.0),
            revised: revised.map(overall_confirmation).transpose()?.unwrap_or(1.0),
        })
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.protocol > 0.0 && self.protocol <= 1.0 && self.revised > 0.0 && self.revised <= 1.0) {
            return Err(Error::domain("confirmation fractions must lie in (0, 1]"));
        }
        Ok(())
    }
}

/// Everything the projection pipeline consumes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProjectionInputs {
    pub design: StudyDesign,
    pub sample: SampleSizeInputs,
    pub rates_protocol: CauseSpecificRates,
    pub revised: RevisedDefinition,
    pub bias: BiasParams,
    pub confirmation: Confirmation,
    pub settings: SolverSettings,
}

/// Expected events in both arms under both definitions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProjectedEvents {
    pub control: f64,
    pub intervention_true: f64,
    pub intervention_observed: f64,
    pub control_revised: f64,
    pub intervention_revised: f64,
}

impl ProjectedEvents {
    fn scaled(&self, protocol: f64, revised: f64) -> Self {
        ProjectedEvents {
            control: protocol * self.control,
            intervention_true: protocol * self.intervention_true,
            intervention_observed: protocol * self.intervention_observed,
            control_revised: revised * self.control_revised,
            intervention_revised: revised * self.intervention_revised,
        }
    }

    pub fn protocol_total(&self) -> f64 {
        self.control + self.intervention_observed
    }

    pub fn revised_total(&self) -> f64 {
        self.control_revised + self.intervention_revised
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Definition {
    Protocol,
    Revised,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerProjection {
    pub sample_sizes: EffectiveSampleSizes,
    pub hazards_protocol: HazardPair,
    /// `None` when revised events are derived by `(1-P)` scaling.
    pub hazards_revised: Option<HazardPair>,
    pub k: f64,
    pub confirmation: Confirmation,
    pub self_reported: ProjectedEvents,
    /// Self-reported events multiplied by the confirmation fractions; these
    /// drive the power calculations.
    pub adjudicated: ProjectedEvents,
    /// `(1 - 1/k)` of the adjudicated observed intervention events.
    pub excess_intervention_events: f64,
    pub heff: HeffResult,
    pub power_protocol: f64,
    pub power_revised: f64,
    /// Effective hazard ratio lies on the opposite side of 1 from the hypothesis.
    pub direction_reversed: bool,
}

impl PowerProjection {
    pub fn h_eff(&self) -> f64 {
        self.heff.h_eff
    }

    pub fn e_c(&self) -> f64 {
        self.adjudicated.control
    }

    pub fn e_i_true(&self) -> f64 {
        self.adjudicated.intervention_true
    }

    pub fn e_i_obs(&self) -> f64 {
        self.adjudicated.intervention_observed
    }

    pub fn e_c_redef(&self) -> f64 {
        self.adjudicated.control_revised
    }

    pub fn e_i_redef(&self) -> f64 {
        self.adjudicated.intervention_revised
    }

    /// Definition with the higher projected power; ties go to the protocol.
    pub fn preferred(&self) -> Definition {
        if self.power_revised > self.power_protocol {
            Definition::Revised
        } else {
            Definition::Protocol
        }
    }
}

/// Revised-definition power and events, which do not depend on the bias.
struct RevisedPart {
    hazards: Option<HazardPair>,
    control: f64,
    intervention: f64,
}

fn revised_events(
    inputs: &ProjectionInputs,
    sizes: &EffectiveSampleSizes,
    protocol_hazards: &HazardPair,
) -> Result<RevisedPart> {
    let design = &inputs.design;
    let h = design.h_hyp;
    let n = &sizes.revised;
    match inputs.revised {
        RevisedDefinition::Direct { r, d } => {
            let hz = hazards_from_rates(&CauseSpecificRates { r, d }).map_err(|e| e.in_stage("revised hazards"))?;
            let control = expected_events(n.control, 1.0, &hz, design);
            let intervention = expected_events(n.intervention, h, &hz, design);
            Ok(RevisedPart {
                hazards: Some(hz),
                control: control.map_err(|e| e.in_stage("revised expected events"))?,
                intervention: intervention.map_err(|e| e.in_stage("revised expected events"))?,
            })
        }
        RevisedDefinition::ScaledByP => {
            let keep = 1.0 - inputs.bias.p;
            let control = expected_events(n.control, 1.0, protocol_hazards, design);
            let intervention = expected_events(n.intervention, h, protocol_hazards, design);
            Ok(RevisedPart {
                hazards: None,
                control: keep * control.map_err(|e| e.in_stage("revised expected events"))?,
                intervention: keep * intervention.map_err(|e| e.in_stage("revised expected events"))?,
            })
        }
    }
}

/// Run the full projection: effective sample sizes, hazards, expected events
/// (true, bias-inflated and adjudicated), the effective hazard ratio, and
/// power under both definitions.
pub fn project(inputs: &ProjectionInputs) -> Result<PowerProjection> {
    let design = &inputs.design;
    design.validate().map_err(|e| e.in_stage("design"))?;
    inputs.bias.validate().map_err(|e| e.in_stage("bias parameters"))?;
    inputs.confirmation.validate().map_err(|e| e.in_stage("adjudication"))?;
    let sizes = effective_sample_size(&inputs.sample, design).map_err(|e| e.in_stage("effective sample size"))?;
    let hazards = hazards_from_rates(&inputs.rates_protocol).map_err(|e| e.in_stage("protocol hazards"))?;

    let k = inputs.bias.k();
    let h_hyp = design.h_hyp;
    let stage = |e: Error| e.in_stage("protocol expected events");
    let control = expected_events(sizes.protocol.control, 1.0, &hazards, design).map_err(stage)?;
    let intervention_true = expected_events(sizes.protocol.intervention, h_hyp, &hazards, design).map_err(stage)?;
    let revised = revised_events(inputs, &sizes, &hazards)?;

    let self_reported = ProjectedEvents {
        control,
        intervention_true,
        intervention_observed: k * intervention_true,
        control_revised: revised.control,
        intervention_revised: revised.intervention,
    };
    let a = inputs.confirmation;
    let adjudicated = self_reported.scaled(a.protocol, a.revised);

    let heff = solve_h_eff(k, h_hyp, &hazards, design, &inputs.settings)
        .map_err(|e| e.in_stage("effective hazard ratio"))?;
    let power_protocol = schoenfeld_power(adjudicated.protocol_total(), heff.h_eff, design.alpha)
        .map_err(|e| e.in_stage("protocol power"))?;
    let power_revised = schoenfeld_power(adjudicated.revised_total(), h_hyp, design.alpha)
        .map_err(|e| e.in_stage("revised power"))?;

    Ok(PowerProjection {
        sample_sizes: sizes,
        hazards_protocol: hazards,
        hazards_revised: revised.hazards,
        k,
        confirmation: a,
        self_reported,
        adjudicated,
        excess_intervention_events: (1.0 - 1.0 / k) * adjudicated.intervention_observed,
        heff,
        power_protocol,
        power_revised,
        direction_reversed: heff.h_eff.ln() * h_hyp.ln() < 0.0,
    })
}

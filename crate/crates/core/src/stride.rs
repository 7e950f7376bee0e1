//! Interim-analysis inputs of the STRIDE falls-injury trial, used as the
//! worked example, the default sweep baseline and in tests.

use std::collections::BTreeMap;

use crate::bias::CategoryCounts;
use crate::event_model::{CauseSpecificRates, StudyDesign};
use crate::heff_solver::SolverSettings;
use crate::power::{
    overall_confirmation, AdjudicationProfile, BiasParams, Confirmation, ProjectionInputs, RevisedDefinition,
    SampleSizeInputs,
};

/// Snapshot counts: totals of Type 2b/2c events for `B`, first events for `P`.
pub const COUNTS: CategoryCounts = CategoryCounts {
    c1: 270,
    c2: 206,
    c2_all: 253,
    c3_all: 613,
    i2_all: 263,
    i3_all: 526,
};

pub fn design() -> StudyDesign {
    StudyDesign {
        total_months: 40.0,
        recruitment_fraction: 0.5,
        alpha: 0.05,
        h_hyp: 0.8,
    }
}

pub fn sample_sizes() -> SampleSizeInputs {
    SampleSizeInputs {
        n_c: 2649.0,
        n_i: 2802.0,
        withdrawal_rate: 0.022,
        v_protocol: 1.0,
        v_revised: 1.0475,
        adjustment: 1.0,
    }
}

pub fn rates_protocol() -> CauseSpecificRates {
    CauseSpecificRates { r: 0.148, d: 0.025 }
}

pub fn rates_revised() -> CauseSpecificRates {
    CauseSpecificRates { r: 0.089, d: 0.025 }
}

fn map<T: Copy>(entries: &[(&str, T)]) -> BTreeMap<String, T> {
    entries.iter().map(|(k, v)| (k.to_string(), *v)).collect()
}

/// Type 1, 2a and 2b first-event mix among 476 control participants.
pub fn adjudication_protocol() -> AdjudicationProfile {
    AdjudicationProfile::from_weights(
        map(&[("type1", 215.0), ("type2a", 55.0), ("type2b", 206.0)]),
        map(&[("type1", 0.966), ("type2a", 0.667), ("type2b", 0.771)]),
    )
    .expect("valid profile")
}

/// Type 1 and 2a first-event mix after re-indexing (299 participants).
pub fn adjudication_revised() -> AdjudicationProfile {
    AdjudicationProfile::from_weights(
        map(&[("type1", 236.0), ("type2a", 63.0)]),
        map(&[("type1", 0.966), ("type2a", 0.667)]),
    )
    .expect("valid profile")
}

/// Full pipeline inputs with `B` and `P` at their snapshot estimates.
pub fn projection_inputs() -> ProjectionInputs {
    let b = (263.0 / 789.0) / (253.0 / 866.0);
    let p = 206.0 / 476.0;
    let revised = rates_revised();
    ProjectionInputs {
        design: design(),
        sample: sample_sizes(),
        rates_protocol: rates_protocol(),
        revised: RevisedDefinition::Direct {
            r: revised.r,
            d: revised.d,
        },
        bias: BiasParams { b, p },
        confirmation: Confirmation {
            protocol: overall_confirmation(&adjudication_protocol()).expect("valid"),
            revised: overall_confirmation(&adjudication_revised()).expect("valid"),
        },
        settings: SolverSettings::default(),
    }
}

/// STRIDE-like baseline without clustering, loss to follow-up or
/// adjudication: 1611 per arm, `P = 0.432`, revised events by `(1-P)` scaling.
pub fn simplified_baseline(b: f64) -> ProjectionInputs {
    ProjectionInputs {
        design: design(),
        sample: SampleSizeInputs {
            n_c: 1611.0,
            n_i: 1611.0,
            withdrawal_rate: 0.0,
            v_protocol: 1.0,
            v_revised: 1.0,
            adjustment: 1.0,
        },
        rates_protocol: rates_protocol(),
        revised: RevisedDefinition::ScaledByP,
        bias: BiasParams { b, p: 0.432 },
        confirmation: Confirmation::NONE,
        settings: SolverSettings::default(),
    }
}

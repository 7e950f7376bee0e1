//! The JSON configuration file. Every section is parsed strictly; unknown
//! keys are errors.

use std::collections::BTreeMap;
use std::path::Path;

use ascertain_core::mc_oracle::SimulationConfig;
use ascertain_core::power::{overall_confirmation, BiasParams};
use ascertain_core::sensitivity::{Axis, SweepMode, SweepSpec};
use ascertain_core::{
    estimate_bias, AdjudicationProfile, BiasEstimate, CategoryCounts, CauseSpecificRates, Confirmation,
    ProjectionInputs, RevisedDefinition, SampleSizeInputs, SolverSettings, StudyDesign,
};
use serde::Deserialize;

use crate::CliError;

const SECTIONS: [&str; 8] = ["design", "sample", "rates", "counts", "adjudication", "solver", "simulation", "sweeps"];

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    #[serde(default)]
    pub description: Option<String>,
    /// Free-text notes keyed by section name.
    #[serde(default)]
    pub descriptions: BTreeMap<String, String>,
    pub design: StudyDesign,
    pub sample: Option<SampleSizeInputs>,
    pub rates: Option<Rates>,
    pub counts: Option<CategoryCounts>,
    #[serde(default)]
    pub adjudication: Adjudication,
    #[serde(default)]
    pub solver: SolverSettings,
    pub ci_level: Option<f64>,
    pub simulation: Option<Simulation>,
    #[serde(default)]
    pub sweeps: Vec<CustomSweep>,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Rates {
    pub protocol: CauseSpecificRates,
    pub revised: RevisedDefinition,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Adjudication {
    pub protocol: Option<Profile>,
    pub revised: Option<Profile>,
}

/// Event-type mix given either as proportions summing to one or as weights
/// (counts) to be normalised.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Profile {
    pub proportions: Option<BTreeMap<String, f64>>,
    pub weights: Option<BTreeMap<String, f64>>,
    pub confirm_fractions: BTreeMap<String, f64>,
}

impl Profile {
    fn build(&self, which: &str) -> Result<AdjudicationProfile, CliError> {
        let built = match (&self.proportions, &self.weights) {
            (Some(p), None) => AdjudicationProfile::new(p.clone(), self.confirm_fractions.clone()),
            (None, Some(w)) => AdjudicationProfile::from_weights(w.clone(), self.confirm_fractions.clone()),
            _ => {
                return Err(CliError::Config(format!(
                    "adjudication.{which}: give exactly one of `proportions` or `weights`"
                )))
            }
        };
        built.map_err(|e| CliError::Config(format!("adjudication.{which}: {e}")))
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Simulation {
    pub n_per_arm: usize,
    pub replications: usize,
    #[serde(default)]
    pub seed: u64,
    /// Derive hazards and the shuffle probability from `counts` and
    /// `rates.protocol`; explicit fields below then override.
    #[serde(default)]
    pub calibrate_from_counts: bool,
    pub category_hazards: Option<[f64; 3]>,
    pub death_hazard: Option<f64>,
    /// Defaults to `design.h_hyp`.
    pub h_true: Option<f64>,
    pub shuffle_probability: Option<f64>,
    #[serde(default)]
    pub masking_probability: f64,
    #[serde(default)]
    pub withdrawal_rate: f64,
    #[serde(default)]
    pub first_event_only: bool,
    /// Number of leading replications written to the event-level dump.
    #[serde(default)]
    pub dump_replications: usize,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CustomSweep {
    pub name: String,
    pub axes: Vec<Axis>,
    #[serde(default = "pipeline_mode")]
    pub mode: SweepMode,
}

fn pipeline_mode() -> SweepMode {
    SweepMode::StridePipeline
}

pub fn load(path: &Path) -> Result<Config, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    parse(&text).map_err(|e| match e {
        CliError::Config(msg) => CliError::Config(format!("{}: {msg}", path.display())),
        other => other,
    })
}

pub fn parse(text: &str) -> Result<Config, CliError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let config: Config = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        if path == "." {
            CliError::Config(inner.to_string())
        } else {
            CliError::Config(format!("at `{path}`: {inner}"))
        }
    })?;
    for key in config.descriptions.keys() {
        if !SECTIONS.contains(&key.as_str()) {
            return Err(CliError::Config(format!(
                "descriptions: `{key}` is not a section (expected one of {SECTIONS:?})"
            )));
        }
    }
    config.design.validate().map_err(|e| CliError::Config(format!("design: {e}")))?;
    Ok(config)
}

impl Config {
    pub fn ci_level(&self, flag: Option<f64>) -> f64 {
        flag.or(self.ci_level).unwrap_or(0.95)
    }

    pub fn counts(&self) -> Result<&CategoryCounts, CliError> {
        self.counts
            .as_ref()
            .ok_or_else(|| CliError::Config("missing `counts` section".into()))
    }

    fn require<'a, T>(value: &'a Option<T>, name: &str) -> Result<&'a T, CliError> {
        value
            .as_ref()
            .ok_or_else(|| CliError::Config(format!("missing `{name}` section")))
    }

    pub fn bias(&self, ci_level: f64) -> Result<BiasEstimate, CliError> {
        Ok(estimate_bias(self.counts()?, ci_level)?)
    }

    pub fn confirmation(&self) -> Result<Confirmation, CliError> {
        let protocol = self.adjudication.protocol.as_ref().map(|p| p.build("protocol")).transpose()?;
        let revised = self.adjudication.revised.as_ref().map(|p| p.build("revised")).transpose()?;
        let a = |p: Option<AdjudicationProfile>| p.map(|p| overall_confirmation(&p)).transpose();
        Ok(Confirmation {
            protocol: a(protocol)?.unwrap_or(1.0),
            revised: a(revised)?.unwrap_or(1.0),
        })
    }

    /// Pipeline inputs with `B` and `P` estimated from the counts.
    pub fn projection_inputs(&self, ci_level: f64) -> Result<(ProjectionInputs, BiasEstimate), CliError> {
        let bias = self.bias(ci_level)?;
        let rates = Self::require(&self.rates, "rates")?;
        let sample = Self::require(&self.sample, "sample")?;
        let inputs = ProjectionInputs {
            design: self.design,
            sample: *sample,
            rates_protocol: rates.protocol,
            revised: rates.revised,
            bias: BiasParams::from(&bias),
            confirmation: self.confirmation()?,
            settings: self.solver,
        };
        Ok((inputs, bias))
    }

    pub fn sweep(&self, name: &str, baseline: &ProjectionInputs) -> Result<SweepSpec, CliError> {
        if let Some(custom) = self.sweeps.iter().find(|s| s.name == name) {
            return Ok(SweepSpec {
                name: custom.name.clone(),
                axes: custom.axes.clone(),
                mode: custom.mode,
                baseline: *baseline,
            });
        }
        SweepSpec::named(name, baseline).ok_or_else(|| {
            let mut valid: Vec<&str> = ascertain_core::sensitivity::NAMED_SWEEPS.to_vec();
            valid.extend(self.sweeps.iter().map(|s| s.name.as_str()));
            CliError::Config(format!("unknown sweep `{name}`; valid names: {}", valid.join(", ")))
        })
    }

    pub fn simulation(&self, seed: Option<u64>) -> Result<(SimulationConfig, usize), CliError> {
        let sim = Self::require(&self.simulation, "simulation")?;
        let seed = seed.unwrap_or(sim.seed);
        let h_true = sim.h_true.unwrap_or(self.design.h_hyp);
        let mut config = if sim.calibrate_from_counts {
            let rates = Self::require(&self.rates, "rates")?;
            SimulationConfig::calibrated(
                self.counts()?,
                &rates.protocol,
                &self.design,
                h_true,
                sim.n_per_arm,
                sim.replications,
                seed,
            )?
        } else {
            let missing = |field: &str| CliError::Config(format!("simulation.{field} is required without calibrate_from_counts"));
            SimulationConfig {
                n_per_arm: sim.n_per_arm,
                category_hazards: sim.category_hazards.ok_or_else(|| missing("category_hazards"))?,
                death_hazard: sim.death_hazard.ok_or_else(|| missing("death_hazard"))?,
                h_true,
                shuffle_probability: sim.shuffle_probability.ok_or_else(|| missing("shuffle_probability"))?,
                masking_probability: 0.0,
                design: self.design,
                withdrawal_rate: 0.0,
                replications: sim.replications,
                seed,
                first_event_only: false,
            }
        };
        if let Some(h) = sim.category_hazards {
            config.category_hazards = h;
        }
        if let Some(g) = sim.death_hazard {
            config.death_hazard = g;
        }
        if let Some(s) = sim.shuffle_probability {
            config.shuffle_probability = s;
        }
        config.masking_probability = sim.masking_probability;
        config.withdrawal_rate = sim.withdrawal_rate;
        config.first_event_only = sim.first_event_only;
        config
            .validate()
            .map_err(|e| CliError::Config(format!("simulation: {e}")))?;
        Ok((config, sim.dump_replications.min(config.replications)))
    }
}

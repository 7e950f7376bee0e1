//! Individual-level trial simulator used as an independent check on the
//! closed-form event counts, the bias mechanism and projected power.
//!
//! Each participant enrolls uniformly over `[0, μT]` and is followed until
//! administrative censoring at `T - τ`, death or withdrawal. Events arrive as
//! a Poisson process at the summed category hazard (times `h_true` in the
//! intervention arm) and each event's category is drawn with probability
//! `λ_e/ξ`. In the intervention arm a true Category-3 event is recorded as
//! Category 2 with `shuffle_probability`, and a true Category-2 event as
//! Category 3 with `masking_probability`. Event times are never altered.
//!
//! The protocol outcome is the first event recorded as Category 1 or 2; the
//! revised outcome is the first Category-1 event. With `first_event_only`
//! follow-up stops at the first event of any category.
//!
//! Randomness: participant `j` of replication `r` draws from a ChaCha8
//! stream keyed by `(seed, r)` with stream id `j` (control participants
//! `0..n`, intervention `n..2n`). Replications run in parallel and are
//! aggregated in replication order, so results depend only on the seed.

mod logrank;

pub use logrank::{logrank_z, SurvivalRecord};

use std::io;
use std::ops::Range;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bias::{estimate_bias, CategoryCounts};
use crate::error::{Error, Result};
use crate::event_model::{
    expected_category_events, expected_events, hazards_from_rates, CauseSpecificRates, HazardPair, StudyDesign,
};
use crate::normal;
use crate::power::{schoenfeld_power, Definition};
use crate::stride;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationConfig {
    pub n_per_arm: usize,
    /// Control-arm hazards per month for Categories 1, 2 and 3.
    pub category_hazards: [f64; 3],
    /// Death hazard per month.
    pub death_hazard: f64,
    /// True intervention/control hazard ratio, common to all categories.
    pub h_true: f64,
    /// Probability an intervention Category-3 event is recorded as Category 2.
    pub shuffle_probability: f64,
    /// Probability an intervention Category-2 event is recorded as Category 3.
    #[serde(default)]
    pub masking_probability: f64,
    pub design: StudyDesign,
    /// Annual withdrawal proportion; the hazard is `-ln(1-w)/12` per month.
    #[serde(default)]
    pub withdrawal_rate: f64,
    pub replications: usize,
    pub seed: u64,
    #[serde(default)]
    pub first_event_only: bool,
}

impl SimulationConfig {
    /// Calibrate to a set of snapshot counts: the protocol hazard from
    /// `rates` is split `(1-P) : P` across Categories 1 and 2, Category 3 gets
    /// the hazard that reproduces the control share `ρ_C`, and the shuffle
    /// probability `s = (B-1)ρ_C/(1-ρ_C)` reproduces `B`.
    pub fn calibrated(
        counts: &CategoryCounts,
        rates: &CauseSpecificRates,
        design: &StudyDesign,
        h_true: f64,
        n_per_arm: usize,
        replications: usize,
        seed: u64,
    ) -> Result<Self> {
        let est = estimate_bias(counts, 0.95)?;
        let (rho_c, b, p) = (est.rho_c.value, est.b.value, est.p.value);
        if !(rho_c < 1.0) {
            return Err(Error::DegenerateCounts("control Category-3 total is zero; no Category-3 hazard to calibrate".into()));
        }
        let shuffle = (b - 1.0) * rho_c / (1.0 - rho_c);
        if !(0.0..=1.0).contains(&shuffle) {
            return Err(Error::domain(format!(
                "B = {b} cannot be produced by relabeling Category 3 as Category 2 (needs probability {shuffle})"
            )));
        }
        let hz = hazards_from_rates(rates)?;
        let lambda2 = p * hz.lambda;
        let config = SimulationConfig {
            n_per_arm,
            category_hazards: [(1.0 - p) * hz.lambda, lambda2, lambda2 * (1.0 - rho_c) / rho_c],
            death_hazard: hz.gamma,
            h_true,
            shuffle_probability: shuffle,
            masking_probability: 0.0,
            design: *design,
            withdrawal_rate: 0.0,
            replications,
            seed,
            first_event_only: false,
        };
        config.validate()?;
        Ok(config)
    }

    /// [`calibrated`](Self::calibrated) to the interim snapshot counts and
    /// protocol rates, with `h_true = 0.8`.
    pub fn stride_like(n_per_arm: usize, replications: usize, seed: u64) -> Self {
        let design = stride::design();
        Self::calibrated(&stride::COUNTS, &stride::rates_protocol(), &design, design.h_hyp, n_per_arm, replications, seed)
            .expect("snapshot calibration is valid")
    }

    pub fn validate(&self) -> Result<()> {
        self.design.validate()?;
        if self.n_per_arm == 0 {
            return Err(Error::domain("n_per_arm must be at least 1"));
        }
        if self.replications == 0 {
            return Err(Error::domain("replications must be at least 1"));
        }
        if !self.category_hazards.iter().chain([&self.death_hazard]).all(|h| h.is_finite() && *h >= 0.0) {
            return Err(Error::domain("hazards must be finite and non-negative"));
        }
        if !(self.protocol_hazard() > 0.0) {
            return Err(Error::domain("Category 1 + 2 hazard must be positive"));
        }
        if !(self.h_true > 0.0 && self.h_true.is_finite()) {
            return Err(Error::domain(format!("h_true must be positive, got {}", self.h_true)));
        }
        for (name, p) in [("shuffle_probability", self.shuffle_probability), ("masking_probability", self.masking_probability)] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::domain(format!("{name} must lie in [0, 1], got {p}")));
            }
        }
        if !(0.0..1.0).contains(&self.withdrawal_rate) {
            return Err(Error::domain(format!("withdrawal_rate must lie in [0, 1), got {}", self.withdrawal_rate)));
        }
        Ok(())
    }

    fn protocol_hazard(&self) -> f64 {
        self.category_hazards[0] + self.category_hazards[1]
    }

    fn total_hazard(&self) -> f64 {
        self.category_hazards.iter().sum()
    }

    pub fn withdrawal_hazard(&self) -> f64 {
        -(-self.withdrawal_rate).ln_1p() / 12.0
    }

    /// Hazard-level inflation of the recorded protocol outcome in the
    /// intervention arm: `(λ1 + (1-m)λ2 + sλ3) / (λ1 + λ2)`.
    pub fn hazard_inflation(&self) -> f64 {
        let [l1, l2, l3] = self.category_hazards;
        (l1 + (1.0 - self.masking_probability) * l2 + self.shuffle_probability * l3) / (l1 + l2)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CensorReason {
    Administrative,
    Death,
    Withdrawal,
}

impl CensorReason {
    fn name(self) -> &'static str {
        match self {
            CensorReason::Administrative => "administrative",
            CensorReason::Death => "death",
            CensorReason::Withdrawal => "withdrawal",
        }
    }
}

/// Per-arm counts from one replication. Category indices are 0-based.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArmTally {
    /// First event of any category, by true category.
    pub first_events: [u64; 3],
    pub totals_true: [u64; 3],
    pub totals_observed: [u64; 3],
    /// Participants whose first true Category 1/2 event occurred.
    pub protocol_true: u64,
    /// Participants with a protocol outcome as recorded.
    pub protocol_observed: u64,
    /// Protocol outcomes by recorded category (1, 2) of the outcome event.
    pub protocol_by_category: [u64; 2],
    pub revised: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReplicationOutcome {
    pub control: ArmTally,
    pub intervention: ArmTally,
    /// Log-rank Z (intervention vs control) on each outcome.
    pub z_protocol: Option<f64>,
    pub z_revised: Option<f64>,
    pub reject_protocol: bool,
    pub reject_revised: bool,
}

impl ReplicationOutcome {
    /// The snapshot counts an interim analysis would tabulate.
    pub fn category_counts(&self) -> CategoryCounts {
        CategoryCounts {
            c1: self.control.protocol_by_category[0],
            c2: self.control.protocol_by_category[1],
            c2_all: self.control.totals_observed[1],
            c3_all: self.control.totals_observed[2],
            i2_all: self.intervention.totals_observed[1],
            i3_all: self.intervention.totals_observed[2],
        }
    }

    /// Recorded intervention Category 2+3 totals equal the true totals.
    pub fn shuffle_conserved(&self) -> bool {
        let i = &self.intervention;
        i.totals_observed[1] + i.totals_observed[2] == i.totals_true[1] + i.totals_true[2]
    }

    /// Recorded Category-1 counts equal the true counts in both arms.
    pub fn category1_immune(&self) -> bool {
        self.intervention.totals_observed[0] == self.intervention.totals_true[0]
            && self.control.totals_observed[0] == self.control.totals_true[0]
    }
}

/// One row of the per-replication dump. Event rows leave `censor_reason`
/// empty; each participant ends with a row giving the end of follow-up.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DumpRow {
    pub replication: usize,
    pub arm: &'static str,
    pub participant: usize,
    pub enrollment: f64,
    pub event_time: f64,
    pub event_category_true: Option<u8>,
    pub event_category_observed: Option<u8>,
    pub censor_reason: Option<&'static str>,
}

#[derive(Debug, Clone, Copy, Default)]
struct FirstTime {
    time: Option<f64>,
}

impl FirstTime {
    fn mark(&mut self, t: f64) -> bool {
        let first = self.time.is_none();
        if first {
            self.time = Some(t);
        }
        first
    }
}

fn participant_rng(config: &SimulationConfig, replication: usize, stream: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&config.seed.to_le_bytes());
    key[8..16].copy_from_slice(&(replication as u64).to_le_bytes());
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(stream);
    rng
}

fn exponential(rng: &mut ChaCha8Rng, rate: f64) -> f64 {
    if rate > 0.0 {
        rng.sample::<f64, _>(Exp1) / rate
    } else {
        f64::INFINITY
    }
}

struct ArmRecords {
    protocol: Vec<SurvivalRecord>,
    revised: Vec<SurvivalRecord>,
}

fn simulate_arm(
    config: &SimulationConfig,
    replication: usize,
    treated: bool,
    tally: &mut ArmTally,
    records: &mut ArmRecords,
    mut dump: Option<&mut Vec<DumpRow>>,
) {
    let design = &config.design;
    let enrollment_span = design.recruitment_fraction * design.total_months;
    let scale = if treated { config.h_true } else { 1.0 };
    let total = config.total_hazard();
    let rate = scale * total;
    let withdrawal = config.withdrawal_hazard();
    let offset = if treated { config.n_per_arm } else { 0 };
    let arm = if treated { "intervention" } else { "control" };

    for j in 0..config.n_per_arm {
        let mut rng = participant_rng(config, replication, (offset + j) as u64);
        let tau = rng.random::<f64>() * enrollment_span;
        let admin = design.total_months - tau;
        let death = exponential(&mut rng, config.death_hazard);
        let leave = exponential(&mut rng, withdrawal);
        let (end, reason) = [
            (admin, CensorReason::Administrative),
            (death, CensorReason::Death),
            (leave, CensorReason::Withdrawal),
        ]
        .into_iter()
        .min_by(|a, b| a.0.total_cmp(&b.0))
        .expect("three candidates");

        let (mut any, mut proto_true, mut proto_obs, mut revised) =
            (FirstTime::default(), FirstTime::default(), FirstTime::default(), FirstTime::default());
        let mut t = 0.0;
        loop {
            t += exponential(&mut rng, rate);
            if t >= end {
                break;
            }
            let u = rng.random::<f64>() * total;
            let category = if u < config.category_hazards[0] {
                0
            } else if u < config.category_hazards[0] + config.category_hazards[1] {
                1
            } else {
                2
            };
            let flip = rng.random::<f64>();
            let observed = match category {
                2 if treated && flip < config.shuffle_probability => 1,
                1 if treated && flip < config.masking_probability => 2,
                c => c,
            };
            tally.totals_true[category] += 1;
            tally.totals_observed[observed] += 1;
            if any.mark(t) {
                tally.first_events[category] += 1;
            }
            if category < 2 && proto_true.mark(t) {
                tally.protocol_true += 1;
            }
            if observed < 2 && proto_obs.mark(t) {
                tally.protocol_observed += 1;
                tally.protocol_by_category[observed] += 1;
            }
            if category == 0 && revised.mark(t) {
                tally.revised += 1;
            }
            if let Some(rows) = dump.as_deref_mut() {
                rows.push(DumpRow {
                    replication,
                    arm,
                    participant: j,
                    enrollment: tau,
                    event_time: t,
                    event_category_true: Some(category as u8 + 1),
                    event_category_observed: Some(observed as u8 + 1),
                    censor_reason: None,
                });
            }
            if config.first_event_only {
                break;
            }
        }
        // Under first-event-only follow-up, a first event that is not a
        // protocol (or revised) outcome censors that outcome.
        let stop = if config.first_event_only { any.time.unwrap_or(end) } else { end };
        let record = |first: FirstTime| SurvivalRecord {
            time: first.time.unwrap_or(stop),
            event: first.time.is_some(),
            treated,
        };
        records.protocol.push(record(proto_obs));
        records.revised.push(record(revised));
        if let Some(rows) = dump.as_deref_mut() {
            rows.push(DumpRow {
                replication,
                arm,
                participant: j,
                enrollment: tau,
                event_time: stop,
                event_category_true: None,
                event_category_observed: None,
                censor_reason: Some(if config.first_event_only && any.time.is_some() {
                    "first-event"
                } else {
                    reason.name()
                }),
            });
        }
    }
}

fn run_replication(config: &SimulationConfig, replication: usize, mut dump: Option<&mut Vec<DumpRow>>) -> ReplicationOutcome {
    let mut records = ArmRecords {
        protocol: Vec::with_capacity(2 * config.n_per_arm),
        revised: Vec::with_capacity(2 * config.n_per_arm),
    };
    let mut control = ArmTally::default();
    let mut intervention = ArmTally::default();
    simulate_arm(config, replication, false, &mut control, &mut records, dump.as_deref_mut());
    simulate_arm(config, replication, true, &mut intervention, &mut records, dump);
    let critical = normal::two_sided_critical(config.design.alpha);
    let z_protocol = logrank_z(&mut records.protocol);
    let z_revised = logrank_z(&mut records.revised);
    let rejects = |z: Option<f64>| z.is_some_and(|z| z.abs() > critical);
    ReplicationOutcome {
        control,
        intervention,
        z_protocol,
        z_revised,
        reject_protocol: rejects(z_protocol),
        reject_revised: rejects(z_revised),
    }
}

/// Simulate a single replication.
pub fn simulate_replication(config: &SimulationConfig, replication: usize) -> Result<ReplicationOutcome> {
    config.validate()?;
    Ok(run_replication(config, replication, None))
}

/// Simulate every replication, in replication order.
pub fn simulate_replications(config: &SimulationConfig) -> Result<Vec<ReplicationOutcome>> {
    config.validate()?;
    Ok((0..config.replications)
        .into_par_iter()
        .map(|r| run_replication(config, r, None))
        .collect())
}

/// Write the event-level dump for the given replications as CSV.
pub fn write_dump<W: io::Write>(config: &SimulationConfig, replications: Range<usize>, writer: W) -> Result<()> {
    config.validate()?;
    let io_err = |e: csv::Error| Error::domain(format!("writing dump: {e}"));
    let mut out = csv::Writer::from_writer(writer);
    for r in replications {
        let mut rows = Vec::new();
        run_replication(config, r, Some(&mut rows));
        for row in rows {
            out.serialize(row).map_err(io_err)?;
        }
    }
    out.flush().map_err(|e| Error::domain(format!("writing dump: {e}")))?;
    Ok(())
}

/// Mean and standard error of the mean.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanSe {
    pub mean: f64,
    /// NaN with fewer than two observations.
    pub se: f64,
}

impl MeanSe {
    /// Sample mean with standard error `s/√n`. Sums are compensated.
    pub fn from_samples(xs: &[f64]) -> Self {
        let n = xs.len() as f64;
        let mean = neumaier_sum(xs.iter().copied()) / n;
        if xs.len() < 2 {
            return MeanSe { mean, se: f64::NAN };
        }
        let ss = neumaier_sum(xs.iter().map(|x| (x - mean) * (x - mean)));
        MeanSe {
            mean,
            se: (ss / (n - 1.0) / n).sqrt(),
        }
    }

    /// Fraction of successes with binomial standard error.
    pub fn proportion(successes: usize, trials: usize) -> Self {
        let n = trials as f64;
        let p = successes as f64 / n;
        MeanSe {
            mean: p,
            se: (p * (1.0 - p) / n).sqrt(),
        }
    }

    /// |mean - target| in standard errors.
    pub fn z_from(&self, target: f64) -> f64 {
        (self.mean - target).abs() / self.se
    }
}

fn neumaier_sum(xs: impl Iterator<Item = f64>) -> f64 {
    let (mut sum, mut comp) = (0.0f64, 0.0f64);
    for x in xs {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            comp += (sum - t) + x;
        } else {
            comp += (x - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArmSummary {
    pub first_events: [MeanSe; 3],
    pub totals_true: [MeanSe; 3],
    pub totals_observed: [MeanSe; 3],
    pub protocol_true: MeanSe,
    pub protocol_observed: MeanSe,
    pub revised: MeanSe,
}

impl ArmSummary {
    fn from_tallies(tallies: &[ArmTally]) -> Self {
        let stat = |f: &dyn Fn(&ArmTally) -> u64| {
            MeanSe::from_samples(&tallies.iter().map(|t| f(t) as f64).collect::<Vec<_>>())
        };
        let by_cat = |f: &dyn Fn(&ArmTally) -> [u64; 3]| std::array::from_fn(|c| stat(&|t| f(t)[c]));
        ArmSummary {
            first_events: by_cat(&|t| t.first_events),
            totals_true: by_cat(&|t| t.totals_true),
            totals_observed: by_cat(&|t| t.totals_observed),
            protocol_true: stat(&|t| t.protocol_true),
            protocol_observed: stat(&|t| t.protocol_observed),
            revised: stat(&|t| t.revised),
        }
    }
}

/// Closed-form counterparts of the simulated quantities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnalyticExpectations {
    pub control_first_events: [f64; 3],
    pub intervention_first_events: [f64; 3],
    pub control_protocol: f64,
    pub intervention_protocol_true: f64,
    pub intervention_protocol_observed: f64,
    pub control_revised: f64,
    pub intervention_revised: f64,
    pub rho_c: Option<f64>,
    pub b: Option<f64>,
    pub p: f64,
    pub k: f64,
    /// Recorded protocol hazard ratio, `k·h_true`.
    pub observed_hazard_ratio: f64,
    pub power_protocol: f64,
    pub power_revised: f64,
}

/// Expected counts per replication, treating death and withdrawal as one
/// exponential competing risk.
pub fn analytic_expectations(config: &SimulationConfig) -> Result<AnalyticExpectations> {
    config.validate()?;
    let design = &config.design;
    let [l1, l2, l3] = config.category_hazards;
    let h = config.h_true;
    let n = config.n_per_arm as f64;
    let gamma = config.death_hazard + config.withdrawal_hazard();
    let total = config.total_hazard();
    let k = config.hazard_inflation();
    let s = config.shuffle_probability;
    let m = config.masking_probability;

    let first = |scale: f64| -> Result<[f64; 3]> {
        let mut out = [0.0; 3];
        for (c, lam) in config.category_hazards.iter().enumerate() {
            out[c] = expected_category_events(n, scale * lam, scale * total, gamma, design)?;
        }
        Ok(out)
    };
    let control_first_events = first(1.0)?;
    let intervention_first_events = first(h)?;

    let (control_protocol, intervention_protocol_true, intervention_protocol_observed, control_revised, intervention_revised) =
        if config.first_event_only {
            let (c, i) = (control_first_events, intervention_first_events);
            (c[0] + c[1], i[0] + i[1], i[0] + (1.0 - m) * i[1] + s * i[2], c[0], i[0])
        } else {
            let protocol = HazardPair { lambda: l1 + l2, gamma };
            let revised = HazardPair { lambda: l1, gamma };
            (
                expected_events(n, 1.0, &protocol, design)?,
                expected_events(n, h, &protocol, design)?,
                expected_events(n, h * k, &protocol, design)?,
                if l1 > 0.0 { expected_events(n, 1.0, &revised, design)? } else { 0.0 },
                if l1 > 0.0 { expected_events(n, h, &revised, design)? } else { 0.0 },
            )
        };

    let rho_c = (l2 + l3 > 0.0).then(|| l2 / (l2 + l3));
    let b = (l2 > 0.0).then(|| ((1.0 - m) * l2 + s * l3) / l2);
    let alpha = design.alpha;
    Ok(AnalyticExpectations {
        control_first_events,
        intervention_first_events,
        control_protocol,
        intervention_protocol_true,
        intervention_protocol_observed,
        control_revised,
        intervention_revised,
        rho_c,
        b,
        p: l2 / (l1 + l2),
        k,
        observed_hazard_ratio: h * k,
        power_protocol: schoenfeld_power(control_protocol + intervention_protocol_observed, h * k, alpha)?,
        power_revised: if l1 > 0.0 {
            schoenfeld_power(control_revised + intervention_revised, h, alpha)?
        } else {
            0.0
        },
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimulationSummary {
    pub replications: usize,
    pub control: ArmSummary,
    pub intervention: ArmSummary,
    /// Across replications where the snapshot counts allow estimation.
    pub b: Option<MeanSe>,
    pub k: Option<MeanSe>,
    pub bias_estimable: usize,
    pub rejection_protocol: MeanSe,
    pub rejection_revised: MeanSe,
    /// Replications breaking Category 2+3 conservation (always zero).
    pub conservation_violations: usize,
    /// Replications where recorded Category-1 counts differ from true (always zero).
    pub category1_violations: usize,
    pub analytic: AnalyticExpectations,
}

pub fn summarize(config: &SimulationConfig, outcomes: &[ReplicationOutcome]) -> Result<SimulationSummary> {
    if outcomes.is_empty() {
        return Err(Error::domain("no replications to summarize"));
    }
    let control: Vec<ArmTally> = outcomes.iter().map(|o| o.control).collect();
    let intervention: Vec<ArmTally> = outcomes.iter().map(|o| o.intervention).collect();
    let (bs, ks): (Vec<f64>, Vec<f64>) = outcomes
        .iter()
        .filter_map(|o| estimate_bias(&o.category_counts(), 0.95).ok())
        .map(|e| (e.b.value, e.k.value))
        .unzip();
    let estimated = |xs: &[f64]| (!xs.is_empty()).then(|| MeanSe::from_samples(xs));
    let r = outcomes.len();
    Ok(SimulationSummary {
        replications: r,
        control: ArmSummary::from_tallies(&control),
        intervention: ArmSummary::from_tallies(&intervention),
        b: estimated(&bs),
        k: estimated(&ks),
        bias_estimable: bs.len(),
        rejection_protocol: MeanSe::proportion(outcomes.iter().filter(|o| o.reject_protocol).count(), r),
        rejection_revised: MeanSe::proportion(outcomes.iter().filter(|o| o.reject_revised).count(), r),
        conservation_violations: outcomes.iter().filter(|o| !o.shuffle_conserved()).count(),
        category1_violations: outcomes.iter().filter(|o| !o.category1_immune()).count(),
        analytic: analytic_expectations(config)?,
    })
}

pub fn simulate(config: &SimulationConfig) -> Result<SimulationSummary> {
    let outcomes = simulate_replications(config)?;
    summarize(config, &outcomes)
}

/// Fraction of replications in which the two-sided log-rank test rejects.
pub fn empirical_power(config: &SimulationConfig, definition: Definition) -> Result<MeanSe> {
    let summary = simulate(config)?;
    Ok(match definition {
        Definition::Protocol => summary.rejection_protocol,
        Definition::Revised => summary.rejection_revised,
    })
}

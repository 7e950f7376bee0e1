//! Human-readable reports. Numbers are formatted from unrounded values.

use std::fmt::Write as _;

use ascertain_core::mc_oracle::{MeanSe, SimulationSummary};
use ascertain_core::sensitivity::SweepRow;
use ascertain_core::{BiasEstimate, Definition, Estimate, PowerProjection, Seed};

pub const BLINDING_NOTE: &str = "Blinding note: B and P compare event-category mixes within each arm and \
carry no information about the treatment effect, so they can be shown to a blinded decision-making panel.";

pub fn heading(cfg: &crate::config::Config) -> String {
    match &cfg.description {
        Some(d) => format!("{d}\n\n"),
        None => String::new(),
    }
}

fn estimate_line(out: &mut String, symbol: &str, label: &str, e: &Estimate) {
    let _ = writeln!(
        out,
        "  {symbol:<6}{label:<48}{:>8.4}  ({:.4}, {:.4})  SE {:.4}",
        e.value,
        e.lower,
        e.upper,
        e.std_error()
    );
}

pub fn bias(est: &BiasEstimate) -> String {
    let mut out = String::new();
    let level = est.ci_level * 100.0;
    let _ = writeln!(out, "Ascertainment bias from interim category counts ({level}% Wald intervals)");
    estimate_line(&mut out, "rho_C", "control Category-2 share of Categories 2+3", &est.rho_c);
    estimate_line(&mut out, "rho_I", "intervention Category-2 share of Categories 2+3", &est.rho_i);
    estimate_line(&mut out, "B", "bias ratio rho_I / rho_C", &est.b);
    estimate_line(&mut out, "P", "Category-2 share of control first events", &est.p);
    estimate_line(&mut out, "k", "intervention event inflation 1 + P(B-1)", &est.k);
    let _ = writeln!(out);
    let _ = writeln!(out, "{BLINDING_NOTE}");
    out
}

fn seed_name(seed: Seed) -> &'static str {
    match seed {
        Seed::SecondOrder => "second-order approximation",
        Seed::Theta => "theta",
        Seed::FirstOrder => "first-order approximation",
        Seed::Naive => "k*h_hyp",
    }
}

pub fn projection(p: &PowerProjection, h_hyp: f64) -> String {
    let mut out = String::new();
    let w = |out: &mut String, line: String| {
        let _ = writeln!(out, "{line}");
    };
    w(&mut out, "Power projection".into());
    w(&mut out, format!("  withdrawal over follow-up W        {:.4}", p.sample_sizes.loss_fraction));
    w(&mut out, "  effective sample size N*           control   intervention".into());
    w(
        &mut out,
        format!(
            "    protocol definition           {:>10.1} {:>14.1}",
            p.sample_sizes.protocol.control, p.sample_sizes.protocol.intervention
        ),
    );
    w(
        &mut out,
        format!(
            "    revised definition            {:>10.1} {:>14.1}",
            p.sample_sizes.revised.control, p.sample_sizes.revised.intervention
        ),
    );
    w(
        &mut out,
        format!(
            "  hazards per month (event, death)   protocol ({:.5}, {:.5})",
            p.hazards_protocol.lambda, p.hazards_protocol.gamma
        ),
    );
    match p.hazards_revised {
        Some(hz) => w(&mut out, format!("                                     revised  ({:.5}, {:.5})", hz.lambda, hz.gamma)),
        None => w(&mut out, "                                     revised  events scaled by (1 - P)".into()),
    }
    w(&mut out, format!("  inflation factor k                 {:.4}", p.k));
    w(
        &mut out,
        format!(
            "  confirmation fraction A            protocol {:.4}, revised {:.4}",
            p.confirmation.protocol, p.confirmation.revised
        ),
    );
    w(&mut out, "  expected events                    self-reported   adjudicated".into());
    let rows = [
        ("control, protocol", p.self_reported.control, p.adjudicated.control),
        ("intervention true, protocol", p.self_reported.intervention_true, p.adjudicated.intervention_true),
        (
            "intervention observed, protocol",
            p.self_reported.intervention_observed,
            p.adjudicated.intervention_observed,
        ),
        ("control, revised", p.self_reported.control_revised, p.adjudicated.control_revised),
        ("intervention, revised", p.self_reported.intervention_revised, p.adjudicated.intervention_revised),
    ];
    for (label, s, a) in rows {
        w(&mut out, format!("    {label:<32}{s:>13.1}{a:>14.1}"));
    }
    w(&mut out, format!("  excess intervention events         {:.1}", p.excess_intervention_events));
    let h = &p.heff;
    w(
        &mut out,
        format!(
            "  hazard ratio used                  protocol {:.4} (effective), revised {:.4}",
            h.h_eff, h_hyp
        ),
    );
    let second = h
        .h_eff_second_order
        .map(|v| format!("{v:.4}"))
        .unwrap_or_else(|| "invalid".into());
    w(
        &mut out,
        format!(
            "    solver: {} iterations from the {}{}, residual {:.1e}; approximations first-order {:.4}, second-order {second}",
            h.iterations,
            seed_name(h.seed_used),
            if h.bisection { " with bisection" } else { "" },
            h.residual,
            h.h_eff_first_order
        ),
    );
    w(
        &mut out,
        format!(
            "  projected power                    protocol {:.1}%, revised {:.1}%",
            100.0 * p.power_protocol,
            100.0 * p.power_revised
        ),
    );
    if p.direction_reversed {
        w(
            &mut out,
            "  warning: the effective hazard ratio lies on the other side of 1 from the hypothesis".into(),
        );
    }
    let (better, worse, hi, lo) = match p.preferred() {
        Definition::Revised => ("revised", "protocol", p.power_revised, p.power_protocol),
        Definition::Protocol => ("protocol", "revised", p.power_protocol, p.power_revised),
    };
    w(&mut out, String::new());
    w(
        &mut out,
        format!(
            "Recommendation: the {better} outcome definition yields higher projected power ({:.1}% vs {:.1}% for the {worse} definition).",
            100.0 * hi,
            100.0 * lo
        ),
    );
    out
}

pub fn sweep(name: &str, rows: &[SweepRow]) -> String {
    let mut out = String::new();
    let failures: Vec<&SweepRow> = rows.iter().filter(|r| r.error.is_some()).collect();
    let _ = writeln!(out, "Sweep {name}: {} rows, {} failed points", rows.len(), failures.len());
    for row in failures {
        let at: Vec<String> = row.values.iter().map(|(p, v)| format!("{}={v}", p.name())).collect();
        let _ = writeln!(out, "  {}: {}", at.join(", "), row.error.as_deref().unwrap_or(""));
    }
    out
}

fn compare(out: &mut String, label: &str, analytic: f64, sim: MeanSe) {
    let z = (sim.mean - analytic) / sim.se;
    let _ = writeln!(
        out,
        "  {label:<34}{analytic:>12.4}{:>12.4}{:>10.4}{z:>8.2}",
        sim.mean, sim.se
    );
}

pub fn simulation(s: &SimulationSummary) -> String {
    let mut out = String::new();
    let a = &s.analytic;
    let _ = writeln!(out, "Simulation: {} replications", s.replications);
    let _ = writeln!(out, "  {:<34}{:>12}{:>12}{:>10}{:>8}", "quantity", "analytic", "simulated", "SE", "z");
    compare(&mut out, "control protocol events", a.control_protocol, s.control.protocol_true);
    compare(&mut out, "intervention true protocol events", a.intervention_protocol_true, s.intervention.protocol_true);
    compare(
        &mut out,
        "intervention observed events",
        a.intervention_protocol_observed,
        s.intervention.protocol_observed,
    );
    compare(&mut out, "control revised events", a.control_revised, s.control.revised);
    compare(&mut out, "intervention revised events", a.intervention_revised, s.intervention.revised);
    for c in 0..3 {
        compare(
            &mut out,
            &format!("control first events, Category {}", c + 1),
            a.control_first_events[c],
            s.control.first_events[c],
        );
    }
    for c in 0..3 {
        compare(
            &mut out,
            &format!("intervention first events, Cat. {}", c + 1),
            a.intervention_first_events[c],
            s.intervention.first_events[c],
        );
    }
    if let (Some(b), Some(sim)) = (a.b, s.b) {
        compare(&mut out, "B", b, sim);
    }
    if let Some(sim) = s.k {
        compare(&mut out, "k", a.k, sim);
    }
    compare(&mut out, "log-rank rejection, protocol", a.power_protocol, s.rejection_protocol);
    compare(&mut out, "log-rank rejection, revised", a.power_revised, s.rejection_revised);
    let _ = writeln!(
        out,
        "  B and k estimable in {}/{} replications; analytic power uses hazard ratio {:.4}",
        s.bias_estimable, s.replications, a.observed_hazard_ratio
    );
    let _ = writeln!(
        out,
        "  Category 2+3 conservation violations: {}; Category-1 relabelings: {}",
        s.conservation_violations, s.category1_violations
    );
    out
}

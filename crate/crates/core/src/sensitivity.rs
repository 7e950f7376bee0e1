//! Parameter sweeps over the projection pipeline, with CSV and SVG output.
//!
//! A sweep has one or two axes. With two, the first is the outer axis (one
//! curve per value) and the second is swept along each curve. Rows come back
//! in grid order: outer index major, inner index minor.

use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::power::{project, Confirmation, ProjectionInputs};
use crate::stride;

/// Relative slack when deciding whether the last grid point reaches `stop`.
const GRID_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParameter {
    /// Hypothesized hazard ratio.
    HHyp,
    /// Ascertainment bias ratio.
    B,
    /// Variance inflation, applied to both definitions.
    V,
    /// Adjudication confirmation fraction, applied to both definitions.
    A,
    /// Category-2 fraction of control outcome events.
    P,
    /// Protocol-definition control event incidence.
    R,
    /// Total trial duration, with the enrollment period held fixed.
    T,
}

impl SweepParameter {
    pub fn name(self) -> &'static str {
        match self {
            SweepParameter::HHyp => "h_hyp",
            SweepParameter::B => "b",
            SweepParameter::V => "v",
            SweepParameter::A => "a",
            SweepParameter::P => "p",
            SweepParameter::R => "r",
            SweepParameter::T => "t",
        }
    }

    /// Set this parameter on a copy of the baseline.
    pub fn apply(self, value: f64, baseline: &ProjectionInputs) -> Result<ProjectionInputs> {
        let mut inputs = *baseline;
        match self {
            SweepParameter::HHyp => inputs.design.h_hyp = value,
            SweepParameter::B => inputs.bias.b = value,
            SweepParameter::V => {
                inputs.sample.v_protocol = value;
                inputs.sample.v_revised = value;
            }
            SweepParameter::A => {
                inputs.confirmation = Confirmation {
                    protocol: value,
                    revised: value,
                }
            }
            SweepParameter::P => inputs.bias.p = value,
            SweepParameter::R => inputs.rates_protocol.r = value,
            SweepParameter::T => {
                let enrollment = baseline.design.enrollment_months();
                if value < enrollment {
                    return Err(Error::domain(format!(
                        "duration {value} is shorter than the {enrollment}-month enrollment period"
                    )));
                }
                inputs.design.total_months = value;
                inputs.design.recruitment_fraction = enrollment / value;
            }
        }
        Ok(inputs)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Axis {
    pub parameter: SweepParameter,
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl Axis {
    pub fn new(parameter: SweepParameter, start: f64, stop: f64, step: f64) -> Self {
        Axis {
            parameter,
            start,
            stop,
            step,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.step > 0.0 && self.step.is_finite()) {
            return Err(Error::domain(format!("{}: step must be positive", self.parameter.name())));
        }
        if !(self.start <= self.stop) {
            return Err(Error::domain(format!("{}: start exceeds stop", self.parameter.name())));
        }
        let (lo, hi) = match self.parameter {
            SweepParameter::B => (0.0, f64::INFINITY),
            SweepParameter::P => (0.0, 1.0),
            SweepParameter::A => (f64::MIN_POSITIVE, 1.0),
            SweepParameter::V => (1.0, f64::INFINITY),
            SweepParameter::R => (0.0, 1.0),
            SweepParameter::HHyp | SweepParameter::T => (f64::MIN_POSITIVE, f64::INFINITY),
        };
        if self.start < lo || self.stop > hi {
            return Err(Error::domain(format!(
                "{}: range [{}, {}] leaves the domain [{lo}, {hi}]",
                self.parameter.name(),
                self.start,
                self.stop
            )));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        ((self.stop - self.start) / self.step + GRID_SLACK).floor() as usize + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Grid values `start + i·step`, built from the integer index.
    pub fn points(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.start + i as f64 * self.step).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepMode {
    /// Full pipeline including adjudication and variance inflation.
    StridePipeline,
    /// No adjudication, variance inflation or loss to follow-up.
    Simplified,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub name: String,
    /// One axis, or outer then inner.
    pub axes: Vec<Axis>,
    pub mode: SweepMode,
    pub baseline: ProjectionInputs,
}

/// Names accepted by [`SweepSpec::named`].
pub const NAMED_SWEEPS: [&str; 7] = ["fig2-hhyp", "fig3-b", "fig4-v", "fig5-a", "s12-pb", "s34-rb", "s56-tb"];

impl SweepSpec {
    /// The standard sensitivity sweeps. The first four vary one parameter of
    /// the full pipeline around `stride_baseline`; the `s*` sweeps vary `B`
    /// against a second parameter on the simplified baseline.
    pub fn named(name: &str, stride_baseline: &ProjectionInputs) -> Option<SweepSpec> {
        use SweepParameter::*;
        let full = |axis: Axis| SweepSpec {
            name: name.to_string(),
            axes: vec![axis],
            mode: SweepMode::StridePipeline,
            baseline: *stride_baseline,
        };
        let outer_b = Axis::new(B, 0.85, 1.25, 0.05);
        let simple = |inner: Axis| SweepSpec {
            name: name.to_string(),
            axes: vec![outer_b, inner],
            mode: SweepMode::Simplified,
            baseline: stride::simplified_baseline(1.0),
        };
        Some(match name {
            "fig2-hhyp" => full(Axis::new(HHyp, 0.70, 0.90, 0.002)),
            "fig3-b" => full(Axis::new(B, 1.00, 1.25, 0.01)),
            "fig4-v" => full(Axis::new(V, 1.0, 1.5, 0.01)),
            "fig5-a" => full(Axis::new(A, 0.50, 1.00, 0.01)),
            "s12-pb" => simple(Axis::new(P, 0.0, 1.0, 0.05)),
            "s34-rb" => simple(Axis::new(R, 0.025, 0.7, 0.025)),
            "s56-tb" => simple(Axis::new(T, 20.0, 160.0, 5.0)),
            _ => return None,
        })
    }

    pub fn validate(&self) -> Result<()> {
        if self.axes.is_empty() || self.axes.len() > 2 {
            return Err(Error::domain("a sweep needs one or two axes"));
        }
        if self.axes.len() == 2 && self.axes[0].parameter == self.axes[1].parameter {
            return Err(Error::domain("the two sweep axes must vary different parameters"));
        }
        self.axes.iter().try_for_each(Axis::validate)
    }

    /// Number of grid points.
    pub fn len(&self) -> usize {
        self.axes.iter().map(Axis::len).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn effective_baseline(&self) -> ProjectionInputs {
        let mut base = self.baseline;
        if self.mode == SweepMode::Simplified {
            base.confirmation = Confirmation::NONE;
            base.sample.v_protocol = 1.0;
            base.sample.v_revised = 1.0;
            base.sample.withdrawal_rate = 0.0;
            base.sample.adjustment = 1.0;
        }
        base
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    /// Axis values at this grid point, outer first.
    pub values: Vec<(SweepParameter, f64)>,
    pub k: f64,
    pub h_eff: Option<f64>,
    pub power_protocol: Option<f64>,
    pub power_revised: Option<f64>,
    pub direction_reversed: bool,
    /// Set when the pipeline failed at this point.
    pub error: Option<String>,
}

fn evaluate(values: Vec<(SweepParameter, f64)>, baseline: &ProjectionInputs) -> SweepRow {
    let inputs = values
        .iter()
        .try_fold(*baseline, |acc, (param, value)| param.apply(*value, &acc));
    let k = inputs.as_ref().map(|i| i.bias.k()).unwrap_or(f64::NAN);
    match inputs.and_then(|i| project(&i)) {
        Ok(proj) => SweepRow {
            values,
            k,
            h_eff: Some(proj.h_eff()),
            power_protocol: Some(proj.power_protocol),
            power_revised: Some(proj.power_revised),
            direction_reversed: proj.direction_reversed,
            error: None,
        },
        Err(err) => SweepRow {
            values,
            k,
            h_eff: None,
            power_protocol: None,
            power_revised: None,
            direction_reversed: false,
            error: Some(err.to_string()),
        },
    }
}

/// Evaluate the pipeline at every grid point. Points are evaluated in
/// parallel; per-point failures are recorded in the row.
pub fn run_sweep(spec: &SweepSpec) -> Result<Vec<SweepRow>> {
    spec.validate()?;
    let baseline = spec.effective_baseline();
    let grids: Vec<(SweepParameter, Vec<f64>)> = spec.axes.iter().map(|a| (a.parameter, a.points())).collect();
    let mut points: Vec<Vec<(SweepParameter, f64)>> = vec![Vec::new()];
    for (param, values) in &grids {
        points = points
            .into_iter()
            .flat_map(|prefix| {
                values.iter().map(move |v| {
                    let mut next = prefix.clone();
                    next.push((*param, *v));
                    next
                })
            })
            .collect();
    }
    Ok(points.into_par_iter().map(|values| evaluate(values, &baseline)).collect())
}

/// Format with six significant digits, trimming trailing zeros.
pub fn format_sig(x: f64) -> String {
    const DIGITS: i32 = 6;
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let exponent = x.abs().log10().floor() as i32;
    if !(-5..DIGITS).contains(&exponent) {
        return format!("{:.*e}", (DIGITS - 1) as usize, x);
    }
    let decimals = (DIGITS - 1 - exponent).max(0) as usize;
    let mut s = format!("{x:.decimals$}");
    // Rounding can carry into a new leading digit (9.999995 -> 10.00000).
    if s.contains('.') {
        let digits = s.chars().filter(|c| c.is_ascii_digit()).count();
        let leading_zeros = s.trim_start_matches(['-', '0', '.']).len();
        if digits > DIGITS as usize && leading_zeros > DIGITS as usize {
            s.pop();
        }
        s = s.trim_end_matches('0').trim_end_matches('.').to_string();
    }
    s
}

fn opt(x: Option<f64>) -> String {
    x.map(format_sig).unwrap_or_default()
}

/// Render rows as CSV with a header row.
pub fn sweep_to_table(rows: &[SweepRow]) -> Result<String> {
    let first = rows.first().ok_or_else(|| Error::domain("cannot tabulate an empty sweep"))?;
    let mut writer = csv::Writer::from_writer(Vec::new());
    let mut header: Vec<&str> = first.values.iter().map(|(p, _)| p.name()).collect();
    header.extend(["k", "h_eff", "power_protocol", "power_revised", "direction_reversed", "error"]);
    let io = |e: csv::Error| Error::domain(format!("csv: {e}"));
    writer.write_record(&header).map_err(io)?;
    for row in rows {
        let mut record: Vec<String> = row.values.iter().map(|(_, v)| format_sig(*v)).collect();
        record.push(format_sig(row.k));
        record.push(opt(row.h_eff));
        record.push(opt(row.power_protocol));
        record.push(opt(row.power_revised));
        record.push(row.direction_reversed.to_string());
        record.push(row.error.clone().unwrap_or_default());
        writer.write_record(&record).map_err(io)?;
    }
    let bytes = writer.into_inner().map_err(|e| Error::domain(format!("csv: {e}")))?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}

/// Line plot of both power curves against the innermost parameter; one pair
/// of curves per outer value. Revised curves are dashed.
pub fn sweep_to_svg(spec: &SweepSpec, rows: &[SweepRow]) -> String {
    const W: f64 = 640.0;
    const H: f64 = 420.0;
    const PAD: f64 = 50.0;
    let inner = spec.axes.last().expect("validated sweep");
    let (x0, x1) = (inner.start, inner.stop.max(inner.start + f64::EPSILON));
    let sx = |x: f64| PAD + (x - x0) / (x1 - x0) * (W - 2.0 * PAD);
    let sy = |y: f64| H - PAD - y * (H - 2.0 * PAD);
    let palette = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#7f7f7f", "#17becf"];

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#
    );
    let _ = writeln!(svg, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<polyline fill="none" stroke="black" points="{},{} {},{} {},{}"/>"#,
        PAD,
        PAD,
        PAD,
        H - PAD,
        W - PAD,
        H - PAD
    );
    for tick in 0..=4 {
        let y = tick as f64 / 4.0;
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{}" font-size="10" text-anchor="end">{y}</text>"#,
            PAD - 4.0,
            sy(y) + 3.0
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="{}" font-size="12" text-anchor="middle">{}</text>"#,
        W / 2.0,
        H - 15.0,
        inner.parameter.name()
    );
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="{}" font-size="10">{}</text><text x="{}" y="{}" font-size="10" text-anchor="end">{}</text>"#,
        PAD,
        H - PAD + 14.0,
        format_sig(x0),
        W - PAD,
        H - PAD + 14.0,
        format_sig(x1)
    );
    let _ = writeln!(svg, r#"<text x="{}" y="20" font-size="13">{}</text>"#, PAD, spec.name);

    let per_curve = inner.len();
    for (c, curve) in rows.chunks(per_curve).enumerate() {
        let color = palette[c % palette.len()];
        for (dash, pick) in [("", 0usize), (r#" stroke-dasharray="5,3""#, 1)] {
            let pts: Vec<String> = curve
                .iter()
                .filter_map(|row| {
                    let y = if pick == 0 { row.power_protocol } else { row.power_revised }?;
                    let x = row.values.last()?.1;
                    Some(format!("{:.2},{:.2}", sx(x), sy(y)))
                })
                .collect();
            if pts.len() > 1 {
                let _ = writeln!(
                    svg,
                    r#"<polyline fill="none" stroke="{color}" stroke-width="1.5"{dash} points="{}"/>"#,
                    pts.join(" ")
                );
            }
        }
        if spec.axes.len() == 2 {
            if let Some((param, value)) = curve.first().map(|r| r.values[0]) {
                let _ = writeln!(
                    svg,
                    r#"<text x="{}" y="{}" font-size="10" fill="{color}">{}={}</text>"#,
                    W - PAD + 4.0,
                    PAD + 12.0 * c as f64,
                    param.name(),
                    format_sig(value)
                );
            }
        }
    }
    svg.push_str("</svg>\n");
    svg
}

/// Write `<name>.csv`, and `<name>.svg` when `plot` is set, into `dir`.
pub fn write_sweep(dir: &Path, spec: &SweepSpec, rows: &[SweepRow], plot: bool) -> std::io::Result<()> {
    let table = sweep_to_table(rows).map_err(|e| std::io::Error::new(std::io::ErrorKind::InvalidInput, e))?;
    std::fs::write(dir.join(format!("{}.csv", spec.name)), table)?;
    if plot {
        std::fs::write(dir.join(format!("{}.svg", spec.name)), sweep_to_svg(spec, rows))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_sizes() {
        assert_eq!(Axis::new(SweepParameter::HHyp, 0.70, 0.90, 0.002).len(), 101);
        assert_eq!(Axis::new(SweepParameter::B, 1.0, 1.25, 0.01).len(), 26);
        assert_eq!(Axis::new(SweepParameter::P, 0.0, 1.0, 0.05).len(), 21);
        assert_eq!(Axis::new(SweepParameter::R, 0.025, 0.7, 0.025).len(), 28);
        assert_eq!(Axis::new(SweepParameter::T, 20.0, 160.0, 5.0).len(), 29);
        assert_eq!(Axis::new(SweepParameter::P, 0.0, 1.0, 0.3).len(), 4);
        let pts = Axis::new(SweepParameter::HHyp, 0.70, 0.90, 0.002).points();
        assert!((pts[100] - 0.90).abs() < 1e-12);
    }

    #[test]
    fn format_significant_digits() {
        assert_eq!(format_sig(0.0), "0");
        assert_eq!(format_sig(1.0), "1");
        assert_eq!(format_sig(0.8585110843924426), "0.858511");
        assert_eq!(format_sig(668.5057793), "668.506");
        assert_eq!(format_sig(-0.0123456789), "-0.0123457");
        assert_eq!(format_sig(123456789.0), "1.23457e8");
        assert_eq!(format_sig(9.9999996), "10");
        assert_eq!(format_sig(1.5e-7), "1.50000e-7");
    }

    #[test]
    fn invalid_specs() {
        let base = stride::projection_inputs();
        let mut spec = SweepSpec::named("fig3-b", &base).unwrap();
        spec.axes[0].step = 0.0;
        assert!(run_sweep(&spec).is_err());
        spec.axes[0] = Axis::new(SweepParameter::P, -0.1, 0.5, 0.1);
        assert!(run_sweep(&spec).is_err());
        assert!(SweepSpec::named("fig9", &base).is_none());
        assert!(sweep_to_table(&[]).is_err());
    }

    #[test]
    fn single_row_table() {
        let base = stride::projection_inputs();
        let spec = SweepSpec {
            name: "one".into(),
            axes: vec![Axis::new(SweepParameter::B, 1.1, 1.1, 0.1)],
            mode: SweepMode::StridePipeline,
            baseline: base,
        };
        let rows = run_sweep(&spec).unwrap();
        let table = sweep_to_table(&rows).unwrap();
        assert_eq!(table.lines().count(), 2);
        assert!(table.starts_with("b,k,h_eff,power_protocol,power_revised,direction_reversed,error\n"));
    }

    #[test]
    fn failures_are_recorded_per_point() {
        let base = stride::projection_inputs();
        let spec = SweepSpec {
            name: "wide".into(),
            axes: vec![Axis::new(SweepParameter::B, 1.0, 41.0, 20.0)],
            mode: SweepMode::StridePipeline,
            baseline: base,
        };
        let rows = run_sweep(&spec).unwrap();
        assert_eq!(rows.len(), 3);
        assert!(rows[0].error.is_none());
        assert!(rows[2].error.as_deref().unwrap().contains("no effective hazard ratio"));
        assert!(sweep_to_svg(&spec, &rows).starts_with("<svg"));
    }

    #[test]
    fn no_bias_keeps_hypothesis() {
        let spec = SweepSpec {
            name: "nobias".into(),
            axes: vec![Axis::new(SweepParameter::B, 1.0, 1.0, 0.05), Axis::new(SweepParameter::P, 0.0, 1.0, 0.05)],
            mode: SweepMode::Simplified,
            baseline: stride::simplified_baseline(1.0),
        };
        for row in run_sweep(&spec).unwrap() {
            assert!((row.h_eff.unwrap() - 0.8).abs() < 1e-10);
        }
    }

    #[test]
    fn duration_sweep_holds_enrollment_fixed() {
        let base = stride::simplified_baseline(1.1);
        let at_80 = SweepParameter::T.apply(80.0, &base).unwrap();
        assert_eq!(at_80.design.recruitment_fraction, 20.0 / 80.0);
        assert!(SweepParameter::T.apply(10.0, &base).is_err());
    }
}

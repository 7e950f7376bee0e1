//! Unstratified two-sample log-rank test.

/// One participant's follow-up for a single outcome definition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurvivalRecord {
    pub time: f64,
    pub event: bool,
    pub treated: bool,
}

/// Log-rank statistic `Z = U/√V` comparing the treated group against
/// the rest. Positive when the treated group has more events than expected.
/// Tied event times use the hypergeometric variance. Returns `None` when the
/// variance is zero (no events, or events only when a single group is at risk).
pub fn logrank_z(records: &mut [SurvivalRecord]) -> Option<f64> {
    // Events sort before censorings at the same time.
    records.sort_by(|a, b| a.time.total_cmp(&b.time).then(b.event.cmp(&a.event)));
    let mut at_risk = records.len() as f64;
    let mut at_risk_treated = records.iter().filter(|r| r.treated).count() as f64;
    let (mut u, mut v) = (0.0, 0.0);
    let mut i = 0;
    while i < records.len() {
        let t = records[i].time;
        let (mut d, mut d_treated, mut leaving, mut leaving_treated) = (0.0, 0.0, 0.0, 0.0);
        while i < records.len() && records[i].time == t {
            let r = records[i];
            if r.event {
                d += 1.0;
                if r.treated {
                    d_treated += 1.0;
                }
            }
            leaving += 1.0;
            if r.treated {
                leaving_treated += 1.0;
            }
            i += 1;
        }
        if d > 0.0 {
            let frac = at_risk_treated / at_risk;
            u += d_treated - d * frac;
            if at_risk > 1.0 {
                v += d * frac * (1.0 - frac) * (at_risk - d) / (at_risk - 1.0);
            }
        }
        at_risk -= leaving;
        at_risk_treated -= leaving_treated;
    }
    (v > 0.0).then(|| u / v.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(time: f64, event: bool, treated: bool) -> SurvivalRecord {
        SurvivalRecord { time, event, treated }
    }

    #[test]
    fn hand_computed_example() {
        // Control events at 1, 3; treated event at 2, censored at 4.
        let mut data = vec![rec(1.0, true, false), rec(3.0, true, false), rec(2.0, true, true), rec(4.0, false, true)];
        // t=1: n=4, n1=2, d=1 -> e=0.5, v=0.25
        // t=2: n=3, n1=2, d=1, d1=1 -> e=2/3, v=2/9
        // t=3: n=2, n1=1, d=1 -> e=0.5, v=0.25
        let u = 1.0 - (0.5 + 2.0 / 3.0 + 0.5);
        let v: f64 = 0.25 + 2.0 / 9.0 + 0.25;
        let z = logrank_z(&mut data).unwrap();
        assert!((z - u / v.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn ties_use_hypergeometric_variance() {
        let mut data = vec![rec(1.0, true, false), rec(1.0, true, true), rec(2.0, false, false), rec(2.0, false, true)];
        // n=4, n1=2, d=2: e=1, v=2·½·½·(2/3) = 1/3
        let z = logrank_z(&mut data).unwrap();
        assert!(z.abs() < 1e-15);
        let mut data = vec![rec(1.0, true, true), rec(1.0, true, true), rec(2.0, false, false), rec(2.0, false, false)];
        let z = logrank_z(&mut data).unwrap();
        assert!((z - 1.0 / (1.0f64 / 3.0).sqrt()).abs() < 1e-14);
    }

    #[test]
    fn no_events_has_no_statistic() {
        let mut data = vec![rec(1.0, false, false), rec(2.0, false, true)];
        assert!(logrank_z(&mut data).is_none());
    }

    #[test]
    fn symmetric_in_group_labels() {
        let mut a: Vec<_> = (0..20).map(|i| rec(i as f64 * 0.7 % 5.0, i % 3 != 0, i % 2 == 0)).collect();
        let mut b: Vec<_> = a.iter().map(|r| rec(r.time, r.event, !r.treated)).collect();
        let za = logrank_z(&mut a).unwrap();
        let zb = logrank_z(&mut b).unwrap();
        assert!((za + zb).abs() < 1e-12);
    }
}

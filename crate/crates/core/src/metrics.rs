//! Deviation measures between two trajectories and the cross-check of an
//! algebraic verdict against simulated evidence.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::conditions::ConditionReport;
use crate::math;
use crate::sim::Trajectory;
use crate::{Error, Result};

/// Consecutive samples above threshold needed to report an onset.
pub const ONSET_DEBOUNCE: usize = 10;

/// Deviations at most this fraction of the threshold count as rounding noise
/// when tracing an excursion back to its start.
pub const NOISE_FRACTION: f64 = 1e-6;

/// Multiple of the threshold a deviation must exceed to count as a clear
/// difference in acceptance checks.
pub const CLEAR_FACTOR: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeviationSummary {
    pub max_abs: f64,
    /// `sqrt(sum d_i^2 (t_i - t_{i-1}))`.
    pub l2: f64,
    /// First sample time where `|d|` exceeds the threshold and stays above it
    /// for [`ONSET_DEBOUNCE`] samples.
    pub onset: Option<f64>,
    /// Start of the excursion that produced `onset`: the last sample before
    /// it whose deviation is at rounding level (`NOISE_FRACTION * threshold`).
    /// A deviation that grows smoothly from a switching instant crosses the
    /// threshold only some steps later; this locates the switch itself.
    pub departure: Option<f64>,
    pub threshold: f64,
}

impl DeviationSummary {
    pub fn is_equal(&self) -> bool {
        self.max_abs <= self.threshold
    }
}

fn same_grid(a: &Trajectory, b: &Trajectory) -> Result<()> {
    if a.samples.len() != b.samples.len() || a.times().zip(b.times()).any(|(x, y)| x != y) {
        return Err(Error::GridMismatch);
    }
    Ok(())
}

/// Compares the outputs of `a` and `b` sample by sample.
pub fn deviation(a: &Trajectory, b: &Trajectory, threshold: f64) -> Result<DeviationSummary> {
    same_grid(a, b)?;
    let mut max_abs: f64 = 0.0;
    let mut sq = 0.0;
    let mut run = 0usize;
    let mut run_start = None;
    let mut onset = None;
    let mut onset_index = None;
    let mut prev_t = None;
    for (i, (sa, sb)) in a.samples.iter().zip(&b.samples).enumerate() {
        let d = (sa.y_out - sb.y_out).abs();
        max_abs = max_abs.max(d);
        if let Some(p) = prev_t {
            sq += d * d * (sa.t - p);
        }
        prev_t = Some(sa.t);
        if d > threshold {
            if run == 0 {
                run_start = Some((i, sa.t));
            }
            run += 1;
            if run >= ONSET_DEBOUNCE && onset.is_none() {
                onset_index = run_start.map(|(i, _)| i);
                onset = run_start.map(|(_, t)| t);
            }
        } else {
            run = 0;
        }
    }
    let floor = NOISE_FRACTION * threshold;
    let departure = onset_index.map(|i| {
        let quiet = (0..i).rev().find(|&j| (a.samples[j].y_out - b.samples[j].y_out).abs() <= floor);
        a.samples[quiet.unwrap_or(i)].t
    });
    Ok(DeviationSummary { max_abs, l2: math::sqrt(sq), onset, departure, threshold })
}

/// Largest `|a - b|` over samples with `lo <= t < hi`.
pub fn max_deviation_between(a: &Trajectory, b: &Trajectory, lo: f64, hi: f64) -> Result<f64> {
    same_grid(a, b)?;
    Ok(a.samples
        .iter()
        .zip(&b.samples)
        .filter(|(s, _)| s.t >= lo && s.t < hi)
        .fold(0.0, |m, (sa, sb)| m.max((sa.y_out - sb.y_out).abs())))
}

/// What a pair of simulated responses says about commutativity.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Evidence {
    /// The responses coincide within threshold.
    Equal,
    /// They differ beyond threshold.
    Different,
    /// Nothing excites the pair (zero input and zero initial conditions).
    Trivial,
}

impl Evidence {
    pub fn from_summary(dev: &DeviationSummary, excited: bool) -> Self {
        if !excited {
            Evidence::Trivial
        } else if dev.is_equal() {
            Evidence::Equal
        } else {
            Evidence::Different
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Evidence::Equal => "equal",
            Evidence::Different => "different",
            Evidence::Trivial => "trivial",
        }
    }
}

/// Whether the expectation from algebra matches the evidence.
pub fn agrees(expect_equal: bool, evidence: Evidence) -> bool {
    match evidence {
        Evidence::Trivial => true,
        Evidence::Equal => expect_equal,
        Evidence::Different => !expect_equal,
    }
}

/// Simulated evidence for one response type.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResponseCheck {
    pub deviation: DeviationSummary,
    pub evidence: Evidence,
    /// What the algebra predicts for this response.
    pub expect_equal: bool,
}

impl ResponseCheck {
    pub fn agrees(&self) -> bool {
        agrees(self.expect_equal, self.evidence)
    }
}

/// Algebraic verdict cross-referenced with simulation.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioReport {
    pub verdict: bool,
    /// Zero-state responses to the scenario input; expected equal iff the
    /// relaxed conditions hold.
    pub forced: Option<ResponseCheck>,
    /// Zero-input responses from the equal initial conditions; expected equal
    /// iff the non-relaxed conditions hold for them.
    pub ic: Option<ResponseCheck>,
}

impl ScenarioReport {
    pub fn agreement(&self) -> bool {
        self.forced.iter().chain(self.ic.iter()).all(ResponseCheck::agrees)
    }

    /// `key=value` pairs of the report, in a fixed order.
    pub fn dump(&self) -> Vec<(&'static str, String)> {
        let opt = |v: Option<f64>| v.map_or_else(|| String::from("none"), |x| format!("{x:?}"));
        let max = |r: &Option<ResponseCheck>| opt(r.map(|c| c.deviation.max_abs));
        let onset = |r: &Option<ResponseCheck>| opt(r.and_then(|c| c.deviation.onset));
        let departure = |r: &Option<ResponseCheck>| opt(r.and_then(|c| c.deviation.departure));
        let evidence = |r: &Option<ResponseCheck>| String::from(r.map_or("none", |c| c.evidence.name()));
        alloc::vec![
            ("verdict", String::from(if self.verdict { "commutative" } else { "non-commutative" })),
            ("max_abs_forced", max(&self.forced)),
            ("max_abs_ic", max(&self.ic)),
            ("onset_forced", onset(&self.forced)),
            ("onset_ic", onset(&self.ic)),
            ("departure_forced", departure(&self.forced)),
            ("departure_ic", departure(&self.ic)),
            ("evidence_forced", evidence(&self.forced)),
            ("evidence_ic", evidence(&self.ic)),
            ("agreement", String::from(if self.agreement() { "AGREEMENT" } else { "CONTRADICTION" })),
        ]
    }
}

/// Cross-references `cond` with the forced and initial-condition deviations.
/// Each deviation comes with a flag telling whether its excitation (input or
/// initial conditions) is nonzero.
pub fn scenario_report(
    cond: &ConditionReport,
    forced: Option<(DeviationSummary, bool)>,
    ic: Option<(DeviationSummary, bool)>,
) -> ScenarioReport {
    let check = |(dev, excited): (DeviationSummary, bool), expect_equal| ResponseCheck {
        deviation: dev,
        evidence: Evidence::from_summary(&dev, excited),
        expect_equal,
    };
    ScenarioReport {
        verdict: cond.commutative(),
        forced: forced.map(|f| check(f, cond.relaxed_ok)),
        ic: ic.map(|f| check(f, cond.nonrelaxed_ok)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::{CascadeOrder, Sample};

    fn traj(values: &[f64]) -> Trajectory {
        Trajectory {
            samples: values
                .iter()
                .enumerate()
                .map(|(i, &y)| Sample { t: i as f64 * 0.1, y_out: y, y_mid: 0.0 })
                .collect(),
            h: 0.1,
            ordering: CascadeOrder::Ab,
            scenario: String::new(),
            truncated_at: None,
        }
    }

    #[test]
    fn identical_trajectories() {
        let a = traj(&[1.0, 2.0, 3.0]);
        let d = deviation(&a, &a, 1e-6).unwrap();
        assert_eq!(d, DeviationSummary { max_abs: 0.0, l2: 0.0, onset: None, departure: None, threshold: 1e-6 });
    }

    #[test]
    fn onset_is_debounced() {
        let zeros = traj(&[0.0; 30]);
        let mut v = [0.0; 30];
        v[3] = 1.0; // isolated spike
        for x in v.iter_mut().skip(12) {
            *x = 1.0;
        }
        let d = deviation(&zeros, &traj(&v), 0.5).unwrap();
        assert_eq!(d.onset, Some(12.0 * 0.1));
        assert_eq!(d.departure, Some(11.0 * 0.1));
        assert_eq!(d.max_abs, 1.0);
        // a run of nine never counts
        let mut w = [0.0; 30];
        for x in w.iter_mut().skip(5).take(9) {
            *x = 1.0;
        }
        assert_eq!(deviation(&zeros, &traj(&w), 0.5).unwrap().onset, None);
    }

    #[test]
    fn departure_traces_back_smooth_growth() {
        let zeros = traj(&[0.0; 40]);
        let v: Vec<f64> = (0..40).map(|i| if i <= 10 { 0.0 } else { 1e-3 * ((i - 10) as f64).powi(2) }).collect();
        let d = deviation(&zeros, &traj(&v), 0.02).unwrap();
        assert_eq!(d.onset, Some(15.0 * 0.1));
        assert_eq!(d.departure, Some(10.0 * 0.1));
    }

    #[test]
    fn l2_is_step_weighted() {
        let d = deviation(&traj(&[0.0, 0.0, 0.0]), &traj(&[2.0, 2.0, 2.0]), 1.0).unwrap();
        assert!((d.l2 - libm::sqrt(4.0 * 0.2)).abs() < 1e-15);
    }

    #[test]
    fn grid_mismatch() {
        let a = traj(&[0.0, 1.0]);
        assert!(matches!(deviation(&a, &traj(&[0.0]), 1.0), Err(Error::GridMismatch)));
        let mut b = a.clone();
        b.samples[1].t = 0.2;
        assert!(matches!(deviation(&a, &b, 1.0), Err(Error::GridMismatch)));
    }

    #[test]
    fn windowed_maximum() {
        let a = traj(&[0.0, 0.0, 0.0, 0.0]);
        let b = traj(&[0.1, 0.0, 5.0, 7.0]);
        assert_eq!(max_deviation_between(&a, &b, 0.05, 0.25).unwrap(), 5.0);
        assert_eq!(max_deviation_between(&a, &b, 0.0, 0.2).unwrap(), 0.1);
    }

    #[test]
    fn agreement_table() {
        assert!(agrees(true, Evidence::Equal));
        assert!(agrees(false, Evidence::Different));
        assert!(agrees(true, Evidence::Trivial) && agrees(false, Evidence::Trivial));
        assert!(!agrees(true, Evidence::Different));
        assert!(!agrees(false, Evidence::Equal));
        let dev = DeviationSummary { max_abs: 0.0, l2: 0.0, onset: None, departure: None, threshold: 1e-5 };
        assert_eq!(Evidence::from_summary(&dev, false), Evidence::Trivial);
        assert_eq!(Evidence::from_summary(&dev, true), Evidence::Equal);
    }

    #[test]
    fn dump_keys() {
        let dev = DeviationSummary { max_abs: 0.0, l2: 0.0, onset: None, departure: None, threshold: 1e-5 };
        let rep = ScenarioReport {
            verdict: true,
            forced: Some(ResponseCheck { deviation: dev, evidence: Evidence::Trivial, expect_equal: true }),
            ic: None,
        };
        let keys: Vec<_> = rep.dump().into_iter().map(|(k, _)| k).collect();
        assert_eq!(keys[..5], ["verdict", "max_abs_forced", "max_abs_ic", "onset_forced", "onset_ic"]);
        assert_eq!(rep.dump().last().unwrap().1, "AGREEMENT");
    }
}

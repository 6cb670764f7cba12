mod common;

use common::{bounded_expr, example1, example2, switching};
use ltv_commute::conditions::{classify_pair, IcMode, Tolerances};
use ltv_commute::metrics::deviation;
use ltv_commute::model::apply_switching;
use ltv_commute::sim::{
    sim_tolerance, simulate_cascade, simulate_single, superposition_check, CascadeOrder, InputSignal, Sample,
    Trajectory,
};
use ltv_commute::synthesis::synth_partner;
use ltv_commute::{CommutativityConstants, Expression, InitialState, LtvSystem, PiecewiseCoefficient};
use proptest::prelude::*;

fn example1_partner() -> LtvSystem {
    synth_partner(&example1(), CommutativityConstants::new(2.0, 2f64.sqrt(), 0.5)).unwrap()
}

fn max_diff_on_coarse(coarse: &Trajectory, fine: &Trajectory) -> f64 {
    coarse.samples.iter().zip(fine.samples.iter().step_by(2)).fold(0.0, |m, (c, f)| {
        assert!((c.t - f.t).abs() < 1e-12);
        m.max((c.y_out - f.y_out).abs())
    })
}

#[test]
fn rk4_converges_with_fourth_order() {
    let (a, b) = (example1(), example1_partner());
    let ic = InitialState::relaxed(1.0);
    let run = |h| simulate_cascade(&a, &b, InputSignal::sine(40.0, 2.0), ic, ic, 1.0, 3.0, h).unwrap();
    let (t1, t2, t3) = (run(1e-2), run(5e-3), run(2.5e-3));
    let ratio = max_diff_on_coarse(&t1, &t2) / max_diff_on_coarse(&t2, &t3);
    assert!(ratio >= 12.0, "ratio {ratio}");
}

#[test]
fn superposition_holds_for_examples() {
    let ic = InitialState::new(1.0, 1.0, -3.0);
    let r = superposition_check(&example1(), &example1_partner(), InputSignal::sine(40.0, 2.0), ic, ic, 1.0, 3.0, 1e-3)
        .unwrap();
    assert!(r.within(1e-6), "{r:?}");
    let a = example2();
    let b = synth_partner(&a, CommutativityConstants::new(1.0, -2.0, 4.0)).unwrap();
    let ic = InitialState::new(0.0, 0.6, 1.5);
    let r = superposition_check(&a, &b, InputSignal::sine(-10.0, 0.5), ic, ic, 0.0, 6.0, 1e-3).unwrap();
    assert!(r.within(1e-6), "{r:?}");
}

#[test]
fn stabilized_switching_stays_finite() {
    let tr = simulate_single(&example2(), InputSignal::Zero, InitialState::new(0.0, 0.6, 1.5), 0.0, 6.0, 1e-3).unwrap();
    assert!(tr.truncated_at.is_none());
    assert!(tr.samples.iter().all(|s| s.y_out.is_finite()));
    assert_eq!(tr.samples.last().unwrap().t, 6.0);
}

#[test]
fn domain_start_is_enforced() {
    let ic = InitialState::relaxed(-0.5);
    assert!(simulate_single(&example1(), InputSignal::Zero, ic, -0.5, 1.0, 1e-2).is_err());
}

fn breakpoint_list() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::btree_set(1u32..400, 1..5).prop_map(|s| s.into_iter().map(|v| v as f64 * 0.0137).collect())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn grid_contains_every_breakpoint(
        first in breakpoint_list(),
        second in breakpoint_list(),
        h in 0.003..0.2f64,
    ) {
        let levels = |bps: &[f64]| {
            let mut v = Vec::new();
            let mut start = 0.0;
            for (i, &b) in bps.iter().enumerate() {
                v.push((start, b, i as f64));
                start = b;
            }
            v.push((start, f64::INFINITY, bps.len() as f64));
            switching(&v)
        };
        let a = LtvSystem::second_order(
            PiecewiseCoefficient::constant(1.0),
            PiecewiseCoefficient::constant(1.0),
            apply_switching(1.0, 0.5, &levels(&first)),
        );
        let b = LtvSystem::first_order(PiecewiseCoefficient::constant(1.0), apply_switching(1.0, 0.25, &levels(&second)));
        let ic = InitialState::relaxed(0.0);
        let tr = simulate_cascade(&a, &b, InputSignal::sine(1.0, 1.0), ic, ic, 0.0, 6.0, h).unwrap();
        let times: Vec<f64> = tr.times().collect();
        prop_assert!(times.windows(2).all(|w| w[1] > w[0]));
        for bp in first.iter().chain(&second).filter(|b| **b < 6.0) {
            prop_assert!(times.iter().any(|t| t.to_bits() == bp.to_bits()), "missing {bp}");
        }
    }

    #[test]
    fn deviation_is_symmetric(
        ys in prop::collection::vec((-5.0..5.0f64, -5.0..5.0f64), 1..60),
        threshold in 0.0..2.0f64,
    ) {
        let mk = |pick: fn(&(f64, f64)) -> f64| Trajectory {
            samples: ys.iter().enumerate().map(|(i, p)| Sample { t: i as f64 * 0.01, y_out: pick(p), y_mid: 0.0 }).collect(),
            h: 0.01,
            ordering: CascadeOrder::Ab,
            scenario: String::new(),
            truncated_at: None,
        };
        let (a, b) = (mk(|p| p.0), mk(|p| p.1));
        let d1 = deviation(&a, &b, threshold).unwrap();
        let d2 = deviation(&b, &a, threshold).unwrap();
        prop_assert_eq!(d1, d2);
        prop_assert!(d1.max_abs >= 0.0);
        if d1.max_abs == 0.0 {
            prop_assert!(d1.l2 == 0.0 && d1.onset.is_none());
        }
        if d1.onset.is_some() {
            prop_assert!(d1.max_abs > threshold);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    // a2 = 1 and a0 = A0 + a1^2/4 + a1'/2 make gamma identically A0
    #[test]
    fn constant_gamma_pairs_commute_in_simulation(
        a1 in bounded_expr(),
        a0_const in -2.0..2.0f64,
        k2 in 0.5..2.0f64,
        k1 in prop_oneof![-2.0..-0.3f64, 0.3..2.0f64],
        k0 in -1.0..1.0f64,
    ) {
        let a0 = Expression::add(
            Expression::constant(a0_const),
            Expression::add(
                Expression::mul(Expression::constant(0.25), Expression::powi(a1.clone(), 2)),
                Expression::mul(Expression::constant(0.5), a1.derivative()),
            ),
        );
        let a = LtvSystem::second_order(
            PiecewiseCoefficient::constant(1.0),
            PiecewiseCoefficient::smooth(a1),
            PiecewiseCoefficient::smooth(a0),
        );
        let k = CommutativityConstants::new(k2, k1, k0);
        let rep = classify_pair(&a, k, IcMode::Relaxed, None, 0.5, (0.5, 2.0), &Tolerances::default()).unwrap();
        prop_assert!(rep.relaxed_ok);
        let b = synth_partner(&a, k).unwrap();
        let ic = InitialState::relaxed(0.5);
        let u = InputSignal::sine(1.0, 0.5);
        let ab = simulate_cascade(&a, &b, u, ic, ic, 0.5, 2.0, 1e-3).unwrap();
        let ba = simulate_cascade(&b, &a, u, ic, ic, 0.5, 2.0, 1e-3).unwrap();
        let d = deviation(&ab, &ba, sim_tolerance(&ab, &ba)).unwrap();
        prop_assert!(d.is_equal(), "{d:?}");
    }
}

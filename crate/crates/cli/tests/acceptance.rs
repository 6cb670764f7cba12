//! Acceptance checks, one line per criterion. Exits non-zero if any fails.

#[path = "../../core/tests/common/mod.rs"]
mod common;

use std::panic::{self, AssertUnwindSafe};
use std::time::Instant;

use ltv_commute::conditions::{condition_matrix, delta_determinant, ic_slope, required_ic_ray};
use ltv_commute::metrics::{deviation, max_deviation_between, CLEAR_FACTOR};
use ltv_commute::sim::{simulate_cascade, superposition_check, InputSignal, Trajectory};
use ltv_commute::synthesis::{aux_quantities, compute_gamma, synth_partner, synth_second_order};
use ltv_commute::{CommutativityConstants, Expression, InitialState, Side};
use ltv_commute_cli::builtins;
use ltv_commute_cli::pipeline::{self, Outcome, ResponsePair};
use ltv_commute_cli::scenario::Scenario;
use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestRng, TestRunner};

type Verdict = Result<String, String>;
type Criterion = (&'static str, fn() -> Verdict);

fn ensure(ok: bool, msg: String) -> Verdict {
    if ok {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn scenario(name: &str) -> Scenario {
    builtins::get(name).expect("built-in exists").expect("built-in parses")
}

fn run(name: &str) -> Outcome {
    let jobs = std::thread::available_parallelism().map_or(1, |n| n.get());
    pipeline::run(&scenario(name), jobs).expect("scenario runs")
}

fn ex1_constants() -> CommutativityConstants {
    CommutativityConstants::new(2.0, 2f64.sqrt(), 0.5)
}

fn rel_err(x: f64, oracle: f64) -> f64 {
    (x - oracle).abs() / oracle.abs().max(f64::MIN_POSITIVE)
}

/// Largest deviation of the pair on `[lo, hi)`.
fn window_dev(p: &ResponsePair, lo: f64, hi: f64) -> f64 {
    max_deviation_between(&p.ab, &p.ba, lo, hi).unwrap()
}

fn ic(o: &Outcome) -> &ResponsePair {
    o.simulation.ic.as_ref().expect("nonrelaxed scenario")
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "none".into(), |x| format!("{x:.4}"))
}

fn synthesis_fidelity() -> Verdict {
    let start = Instant::now();
    let b = synth_second_order(&common::example1(), ex1_constants()).map_err(|e| e.to_string())?;
    let mut worst: f64 = 0.0;
    let n = 1000;
    for i in 0..=n {
        let t = 0.5 + 4.5 * i as f64 / n as f64;
        let oracle = [(t * t + t + 1.0) / (t * t), 3.0 * t + 2.0, t * t];
        for (j, o) in oracle.iter().enumerate() {
            worst = worst.max(rel_err(b.coefficient_at(j, t, 0, Side::Right).unwrap(), *o));
        }
    }
    let secs = start.elapsed().as_secs_f64();
    ensure(worst <= 1e-12 && secs < 1.0, format!("max rel error {worst:.2e} on [0.5, 5], {secs:.3} s"))
}

fn gamma_constancy() -> Verdict {
    let a = common::example1();
    let worst = (0..512)
        .map(|i| 0.5 + 4.5 * i as f64 / 511.0)
        .map(|t| (compute_gamma(&a, t).unwrap() + 0.125).abs())
        .fold(0.0, f64::max);
    ensure(worst <= 1e-9, format!("max |gamma + 1/8| = {worst:.2e} over 512 samples"))
}

fn delta_values() -> Verdict {
    let d1 = delta_determinant(&common::example1(), ex1_constants(), 1.0).unwrap();
    let s2 = scenario("example2");
    let a2 = s2.system_a().unwrap();
    let k2 = CommutativityConstants::new(1.0, -2.0, 4.0);
    let d2 = delta_determinant(&a2, k2, 0.0).unwrap();
    // direct arithmetic at t0 = 0: a2 = 1, a1 = -1, a0 = -2, constant pieces
    let f_a: f64 = -2.0 / 4.0;
    let gamma = -2.0 - f_a * f_a;
    let c = k2.offset();
    let oracle2 = c * c - k2.k1 * k2.k1 + k2.k1 * k2.k1 * gamma;
    let s3 = scenario("example3");
    let d3 = delta_determinant(&s3.system_a().unwrap(), CommutativityConstants::new(1.0, 2.0, 3.0), 0.0).unwrap();
    ensure(
        d1.abs() <= 1e-12 && (d2 - 3.0).abs() <= 1e-9 && (oracle2 - 3.0).abs() <= 1e-15 && d3.abs() <= 1e-12,
        format!("example1 {d1:.2e}, example2 {d2:.12} (oracle {oracle2}), example3 {d3:.2e}"),
    )
}

fn ic_ray() -> Verdict {
    let s1 = required_ic_ray(&common::example1(), ex1_constants(), 1.0, 1e-9).map_err(|e| e.to_string())?;
    let a2 = scenario("example2").system_a().unwrap();
    let k2 = CommutativityConstants::new(1.0, -2.0, 4.0);
    // delta = 3 here, so the ray is reported without the delta gate
    let s2 = required_ic_ray(&a2, k2, 0.0, f64::INFINITY).map_err(|e| e.to_string())?;
    let gated = required_ic_ray(&a2, k2, 0.0, 1e-9).is_err();
    let s2_direct = ic_slope(&a2, k2, 0.0).unwrap();
    let a3 = scenario("example3").system_a().unwrap();
    let s3 = required_ic_ray(&a3, CommutativityConstants::new(1.0, 2.0, 3.0), 0.0, 1e-9).map_err(|e| e.to_string())?;
    ensure(
        (s1 + 3.0).abs() <= 1e-9 && (s2 - 2.5).abs() <= 1e-9 && s2 == s2_direct && gated && (s3 + 1.0).abs() <= 1e-9,
        format!("example1 {s1:.12}, example2 {s2:.12} (zero-only under delta gate: {gated}), example3 {s3:.12}"),
    )
}

fn relaxed_example1() -> Verdict {
    let a = common::example1();
    let b = synth_partner(&a, ex1_constants()).unwrap();
    let zero = InitialState::relaxed(1.0);
    let start = Instant::now();
    let u = InputSignal::sine(40.0, 2.0);
    let ab = simulate_cascade(&a, &b, u, zero, zero, 1.0, 5.0, 1e-4).unwrap();
    let ba = simulate_cascade(&b, &a, u, zero, zero, 1.0, 5.0, 1e-4).unwrap();
    let secs = start.elapsed().as_secs_f64();
    let thr = 1e-5 * (1.0 + ab.max_abs_output().max(ba.max_abs_output()));
    let dev = deviation(&ab, &ba, thr).unwrap().max_abs;
    ensure(dev <= thr && secs < 30.0, format!("max deviation {dev:.2e} <= {thr:.2e}, {secs:.2} s"))
}

fn nonrelaxed_example1() -> Verdict {
    let tuned = run("example1");
    let mistuned = run("example1-mistuned");
    let retuned = run("example1-retuned");
    let (t, m, r) = (&ic(&tuned).deviation, &ic(&mistuned).deviation, &ic(&retuned).deviation);
    let y = retuned.check.y;
    ensure(
        t.is_equal() && m.max_abs > CLEAR_FACTOR * m.threshold && r.is_equal(),
        format!(
            "t0=1: {:.2e}/{:.2e}; t0=1.5 Y=(1,-3): {:.2e} = {:.0}x threshold; t0=1.5 Y=({}, {:.6}): {:.2e}/{:.2e}",
            t.max_abs,
            t.threshold,
            m.max_abs,
            m.max_abs / m.threshold,
            y[0],
            y[1],
            r.max_abs,
            r.threshold
        ),
    )
}

/// Pair agrees before the switch at 1 and departs from it within 2h.
fn switch_departure(p: &ResponsePair, h: f64) -> (bool, String) {
    let d = &p.deviation;
    let before = window_dev(p, 0.0, 1.0);
    let dep_ok = d.departure.is_some_and(|t| (t - 1.0).abs() <= 2.0 * h);
    let ok = before <= d.threshold && dep_ok && d.max_abs > d.threshold;
    let text = format!(
        "[0,1) {before:.2e} <= {:.2e}, departure {}, onset {}, max {:.2e}",
        d.threshold,
        fmt_opt(d.departure),
        fmt_opt(d.onset),
        d.max_abs
    );
    (ok, text)
}

fn switching_example2() -> Verdict {
    let o = run("example2");
    let h = scenario("example2").h;
    let (forced_ok, forced) = switch_departure(&o.simulation.forced, h);
    let d = &ic(&o).deviation;
    let early = d.onset.is_some_and(|t| t < 1.0);
    let ic_ok = d.max_abs > CLEAR_FACTOR * d.threshold && early;
    ensure(
        forced_ok && ic_ok,
        format!(
            "forced: {forced}; ic: max {:.2e} = {:.0}x threshold, onset {}",
            d.max_abs,
            d.max_abs / d.threshold,
            fmt_opt(d.onset)
        ),
    )
}

fn feedback_case() -> Verdict {
    let o = run("example2-feedback");
    let unity = run("example2-feedback-unity");
    let (f, i, u) = (&o.simulation.forced.deviation, &ic(&o).deviation, &ic(&unity).deviation);
    ensure(
        f.is_equal() && i.max_abs > CLEAR_FACTOR * i.threshold && u.is_equal(),
        format!(
            "forced {:.2e}/{:.2e}; ic {:.2e} = {:.0}x threshold; unity Y=(1,1) ic {:.2e}/{:.2e}",
            f.max_abs,
            f.threshold,
            i.max_abs,
            i.max_abs / i.threshold,
            u.max_abs,
            u.threshold
        ),
    )
}

fn example3() -> Verdict {
    let o = run("example3");
    let h = scenario("example3").h;
    let (forced_ok, forced) = switch_departure(&o.simulation.forced, h);
    let (ic_ok, ic_text) = switch_departure(ic(&o), h);
    // sigma = 3 after the switch: 1 + 9 sigma = 28, the reference gives 25
    let b0 = o.check.b.coefficient_at(0, 2.0, 0, Side::Right).unwrap();
    let reference = o.check.reference.as_ref().map(|r| r.deviation);
    ensure(
        forced_ok && ic_ok && (b0 - 28.0).abs() <= 1e-12 && reference.is_some_and(|d| d > 0.0),
        format!(
            "forced: {forced}; ic: {ic_text}; b0(2) = {b0}; 1+8 sigma reference deviates by {}",
            reference.map_or_else(|| "none".into(), |d| format!("{d:.4e}"))
        ),
    )
}

fn scalar_partner() -> Verdict {
    let one = run("scalar-identity");
    let two = run("scalar-gain2");
    let (i1, f2, i2) = (&ic(&one).deviation, &two.simulation.forced.deviation, &ic(&two).deviation);
    ensure(
        i1.is_equal() && f2.is_equal() && i2.max_abs > CLEAR_FACTOR * i2.threshold,
        format!(
            "b0=1 ic {:.2e}/{:.2e}; b0=2 forced {:.2e}/{:.2e}, ic {:.2e} = {:.0}x threshold",
            i1.max_abs,
            i1.threshold,
            f2.max_abs,
            f2.threshold,
            i2.max_abs,
            i2.max_abs / i2.threshold
        ),
    )
}

fn constants() -> impl Strategy<Value = CommutativityConstants> {
    let nonzero = prop_oneof![-3.0..-0.2f64, 0.2..3.0f64];
    (prop_oneof![Just(0.0), nonzero.clone()], nonzero, -3.0..3.0f64)
        .prop_map(|(k2, k1, k0)| CommutativityConstants::new(k2, k1, k0))
}

fn runner() -> TestRunner {
    let config = Config { failure_persistence: None, ..Config::with_cases(100) };
    TestRunner::new_with_rng(config, TestRng::deterministic_rng(RngAlgorithm::default()))
}

fn determinant_identity() -> Result<(), String> {
    let strategy = (common::second_order_system(), constants(), 0.5..2.0f64);
    runner()
        .run(&strategy, |(a, k, t0)| {
            let m = condition_matrix(&a, k, t0).unwrap();
            let gamma = aux_quantities(&a).unwrap().gamma.at(t0, 0, Side::Right).unwrap();
            let c = k.offset();
            let oracle = c * c - k.k1 * k.k1 + k.k1 * k.k1 * gamma;
            let scale = 1.0 + m.max_abs() * m.max_abs();
            prop_assert!((m.det() - oracle).abs() <= 1e-10 * scale, "det {} vs {}", m.det(), oracle);
            Ok(())
        })
        .map_err(|e| format!("determinant identity: {e}"))
}

fn derivative_agreement() -> Result<(), String> {
    let strategy = (common::bounded_expr(), 0.5..2.0f64);
    runner()
        .run(&strategy, |(f, t): (Expression, f64)| {
            let exact = f.derivative().eval(t).unwrap();
            let step = 1e-5;
            let fd = (f.eval(t + step).unwrap() - f.eval(t - step).unwrap()) / (2.0 * step);
            prop_assert!((exact - fd).abs() <= 1e-5 * (1.0 + exact.abs()), "{f}: {exact} vs {fd}");
            Ok(())
        })
        .map_err(|e| format!("derivative: {e}"))
}

fn coarse_diff(coarse: &Trajectory, fine: &Trajectory) -> f64 {
    coarse.samples.iter().zip(fine.samples.iter().step_by(2)).fold(0.0, |m, (c, f)| m.max((c.y_out - f.y_out).abs()))
}

fn rk4_ratio() -> f64 {
    let a = common::example1();
    let b = synth_partner(&a, ex1_constants()).unwrap();
    let zero = InitialState::relaxed(1.0);
    let run = |h| simulate_cascade(&a, &b, InputSignal::sine(40.0, 2.0), zero, zero, 1.0, 3.0, h).unwrap();
    let (t1, t2, t3) = (run(1e-2), run(5e-3), run(2.5e-3));
    coarse_diff(&t1, &t2) / coarse_diff(&t2, &t3)
}

fn superposition() -> (bool, f64) {
    let a = common::example1();
    let b = synth_partner(&a, ex1_constants()).unwrap();
    let y = InitialState::new(1.0, 1.0, -3.0);
    let r1 = superposition_check(&a, &b, InputSignal::sine(40.0, 2.0), y, y, 1.0, 3.0, 1e-3).unwrap();
    let a = common::example2();
    let b = synth_partner(&a, CommutativityConstants::new(1.0, -2.0, 4.0)).unwrap();
    let y = InitialState::new(0.0, 0.6, 1.5);
    let r2 = superposition_check(&a, &b, InputSignal::sine(-10.0, 0.5), y, y, 0.0, 6.0, 1e-3).unwrap();
    let scaled = (r1.max_deviation / (1.0 + r1.max_abs)).max(r2.max_deviation / (1.0 + r2.max_abs));
    (r1.within(1e-6) && r2.within(1e-6), scaled)
}

fn property_suites() -> Verdict {
    let det = determinant_identity();
    let fd = derivative_agreement();
    let ratio = rk4_ratio();
    let (sup_ok, sup) = superposition();
    let mut text = format!("rk4 ratio {ratio:.2}, superposition {sup:.2e} scaled");
    for r in [&det, &fd] {
        match r {
            Ok(()) => {}
            Err(e) => text.push_str(&format!(", {e}")),
        }
    }
    if det.is_ok() && fd.is_ok() {
        text.push_str(", determinant and derivative suites 100/100");
    }
    ensure(det.is_ok() && fd.is_ok() && ratio >= 12.0 && sup_ok, text)
}

fn main() {
    let criteria: [Criterion; 11] = [
        ("synthesis fidelity", synthesis_fidelity),
        ("gamma constancy", gamma_constancy),
        ("delta values", delta_values),
        ("initial-condition ray", ic_ray),
        ("relaxed commutativity", relaxed_example1),
        ("non-relaxed commutativity", nonrelaxed_example1),
        ("switching spoilage", switching_example2),
        ("feedback case", feedback_case),
        ("gamma jump at a switch", example3),
        ("scalar partner", scalar_partner),
        ("property suites", property_suites),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let verdict = panic::catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            let msg = p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panicked: {}", msg.unwrap_or_default()))
        });
        match verdict {
            Ok(msg) => println!("[PASS] criterion {}: {name}: {msg}", i + 1),
            Err(msg) => {
                failed += 1;
                println!("[FAIL] criterion {}: {name}: {msg}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}

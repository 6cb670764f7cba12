//! Human-readable reports and `key=value` dumps.

use std::fmt::Write as _;

use ltv_commute::conditions::{ic_slope, Failure, IcAdmissibility, IcMode};
use ltv_commute::metrics::ResponseCheck;
use ltv_commute::Side;

use crate::pipeline::{Check, Outcome, ResponsePair};

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "none".into(), |x| format!("{x:?}"))
}

fn list(v: &[f64]) -> String {
    if v.is_empty() {
        "none".into()
    } else {
        v.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>().join(",")
    }
}

fn failure_text(f: &Failure) -> String {
    match f {
        Failure::GammaNotConstant { max_dev } => format!("gamma not constant (max deviation {max_dev:.3e})"),
        Failure::SwitchingViolation { t } => format!("coefficient jump at switching instant t = {t}"),
        Failure::DeltaNonZero { delta } => format!("delta(t0) = {delta:.6} != 0 with nonzero initial conditions"),
        Failure::IcOffRay { residual } => format!("initial conditions off the admissible ray (|M Y| = {residual:.3e})"),
        Failure::OffsetNonZero { offset } => format!("k2 + k0 - 1 = {offset} != 0 with nonzero initial conditions"),
    }
}

pub fn check_text(c: &Check) -> String {
    let r = &c.report;
    let k = c.constants;
    let mut s = String::new();
    writeln!(s, "scenario {}", c.name).unwrap();
    writeln!(s, "  constants      k2 = {}, k1 = {}, k0 = {}", k.k2, k.k1, k.k0).unwrap();
    writeln!(s, "  case           {} (partner order {})", r.theorem.name(), c.b.order()).unwrap();
    let b_at: Vec<String> = (0..=c.b.order())
        .rev()
        .map(|i| match c.b.coefficient_at(i, r.t0, 0, Side::Right) {
            Ok(v) => format!("b{i} = {v:.12}"),
            Err(e) => format!("b{i}: {e}"),
        })
        .collect();
    writeln!(s, "  B at t0        {}", b_at.join(", ")).unwrap();
    if let Some(fit) = &c.partner_fit {
        let verdict = if fit.is_partner() { "matches" } else { "is NOT" };
        writeln!(s, "  explicit B     {verdict} the partner family (max rel. deviation {:.3e})", fit.deviation).unwrap();
    }
    if let Some(rc) = &c.reference {
        writeln!(s, "  reference B    max rel. deviation from synthesized B = {:.6e}", rc.deviation).unwrap();
        if let Some(note) = &rc.note {
            writeln!(s, "                 {note}").unwrap();
        }
    }
    writeln!(s, "  window         [{}, {}], t0 = {}", r.window.0, r.window.1, r.t0).unwrap();
    match r.relaxed.a0 {
        Some(a0) => writeln!(
            s,
            "  gamma          {} (gamma(t0) = {a0:.12}, max deviation {:.3e})",
            if r.relaxed.gamma_constant { "constant" } else { "NOT constant" },
            r.relaxed.max_dev
        )
        .unwrap(),
        None => writeln!(s, "  gamma          not required (k1 = 0)").unwrap(),
    }
    writeln!(s, "  switch issues  {}", list(&r.relaxed.violated_breakpoints)).unwrap();
    writeln!(s, "  delta(t0)      {:.12e}", r.delta).unwrap();
    let m = r.matrix_m.0;
    writeln!(s, "  M(t0)          [[{:.9}, {:.9}], [{:.9}, {:.9}]]", m[0][0], m[0][1], m[1][0], m[1][1]).unwrap();
    let adm = match r.admissible {
        IcAdmissibility::ZeroOnly => "zero only".to_string(),
        IcAdmissibility::Ray { slope } => format!("ray y'(t0) = {slope:.12} y(t0)"),
        IcAdmissibility::Any => "any equal initial conditions".to_string(),
    };
    writeln!(s, "  admissible ICs {adm}").unwrap();
    if r.ic_mode == IcMode::NonRelaxed {
        writeln!(s, "  Y              ({}, {}), |M Y| = {}", c.y[0], c.y[1], opt(r.ic_residual)).unwrap();
    }
    writeln!(s, "  relaxed        {}", if r.relaxed_ok { "conditions hold" } else { "conditions fail" }).unwrap();
    writeln!(s, "  nonrelaxed     {}", if r.nonrelaxed_ok { "conditions hold" } else { "conditions fail" }).unwrap();
    for f in &r.failures {
        writeln!(s, "    - {}", failure_text(f)).unwrap();
    }
    let mode = if r.ic_mode == IcMode::Relaxed { "relaxed" } else { "nonrelaxed" };
    let verdict = if r.commutative() { "commutative" } else { "non-commutative" };
    writeln!(s, "  verdict        {verdict} ({mode})").unwrap();
    s
}

pub fn check_dump(c: &Check) -> Vec<(String, String)> {
    let r = &c.report;
    let m = r.matrix_m.0;
    let mut d: Vec<(&str, String)> = vec![
        ("scenario", c.name.clone()),
        ("theorem", r.theorem.number().to_string()),
        ("case", r.theorem.name().into()),
        ("k2", format!("{:?}", c.constants.k2)),
        ("k1", format!("{:?}", c.constants.k1)),
        ("k0", format!("{:?}", c.constants.k0)),
        ("t0", format!("{:?}", r.t0)),
        ("gamma_constant", r.relaxed.gamma_constant.to_string()),
        ("gamma_t0", opt(r.relaxed.a0)),
        ("gamma_max_dev", format!("{:?}", r.relaxed.max_dev)),
        ("violated_breakpoints", list(&r.relaxed.violated_breakpoints)),
        ("delta", format!("{:?}", r.delta)),
        ("m", format!("{:?},{:?},{:?},{:?}", m[0][0], m[0][1], m[1][0], m[1][1])),
        ("ic_slope", opt(ic_slope(&c.a, c.constants, r.t0).ok())),
        (
            "admissible",
            match r.admissible {
                IcAdmissibility::ZeroOnly => "zero".into(),
                IcAdmissibility::Ray { .. } => "ray".into(),
                IcAdmissibility::Any => "any".into(),
            },
        ),
        ("y0", format!("{:?}", c.y[0])),
        ("dy0", format!("{:?}", c.y[1])),
        ("ic_residual", opt(r.ic_residual)),
        ("relaxed_ok", r.relaxed_ok.to_string()),
        ("nonrelaxed_ok", r.nonrelaxed_ok.to_string()),
        ("commutative", r.commutative().to_string()),
    ];
    if let Some(fit) = &c.partner_fit {
        d.push(("partner_deviation", format!("{:?}", fit.deviation)));
    }
    if let Some(rc) = &c.reference {
        d.push(("reference_deviation", format!("{:?}", rc.deviation)));
    }
    d.into_iter().map(|(k, v)| (k.to_string(), v)).collect()
}

fn response_line(kind: &str, p: &ResponsePair, check: Option<&ResponseCheck>) -> String {
    let d = &p.deviation;
    let mut s = format!(
        "  {kind:<14} max |y_AB - y_BA| = {:.6e}, threshold {:.3e}, onset {}, departure {}",
        d.max_abs,
        d.threshold,
        opt(d.onset),
        opt(d.departure)
    );
    if let Some(c) = check {
        let expect = if c.expect_equal { "equal" } else { "different" };
        write!(s, ", evidence {} (expected {expect})", c.evidence.name()).unwrap();
    }
    if let Some(t) = p.ab.truncated_at.or(p.ba.truncated_at) {
        write!(s, ", TRUNCATED at t = {t}").unwrap();
    }
    s
}

pub fn outcome_text(o: &Outcome) -> String {
    let mut s = check_text(&o.check);
    writeln!(s, "{}", response_line("forced", &o.simulation.forced, o.report.forced.as_ref())).unwrap();
    if let Some(ic) = &o.simulation.ic {
        writeln!(s, "{}", response_line("ic response", ic, o.report.ic.as_ref())).unwrap();
    }
    writeln!(s, "  {}", if o.agreement() { "AGREEMENT" } else { "CONTRADICTION" }).unwrap();
    s
}

pub fn outcome_dump(o: &Outcome) -> Vec<(String, String)> {
    let mut d = check_dump(&o.check);
    d.extend(o.report.dump().into_iter().map(|(k, v)| (k.to_string(), v)));
    d
}

pub fn render_dump(d: &[(String, String)]) -> String {
    d.iter().map(|(k, v)| format!("{k}={v}\n")).collect()
}

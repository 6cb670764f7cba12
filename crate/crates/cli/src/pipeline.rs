//! Check, simulate and cross-reference one scenario.

use std::thread;

use ltv_commute::conditions::{classify_pair, ic_slope, ConditionReport, IcMode};
use ltv_commute::metrics::{deviation, scenario_report, DeviationSummary, ScenarioReport};
use ltv_commute::sim::{sim_tolerance, simulate_cascade, CascadeOrder, InputSignal, Trajectory};
use ltv_commute::synthesis::{infer_constants, partner_deviation};
use ltv_commute::{CommutativityConstants, InitialState, LtvSystem};

use crate::scenario::{InitialDerivative, PartnerSpec, Scenario, ScenarioError};

/// Samples used when comparing partner coefficients.
const PARTNER_SAMPLES: usize = 1000;
/// Largest relative coefficient deviation for an explicit B to count as the
/// partner given by its inferred constants.
const PARTNER_TOL: f64 = 1e-9;

/// Command-line overrides applied on top of a scenario.
#[derive(Debug, Clone, Copy, Default)]
pub struct Overrides {
    pub h: Option<f64>,
    pub t0: Option<f64>,
    pub t_end: Option<f64>,
    pub tol_sim: Option<f64>,
    pub k2: Option<f64>,
    pub k1: Option<f64>,
    pub k0: Option<f64>,
}

impl Overrides {
    pub fn apply(&self, s: &mut Scenario) -> Result<(), ScenarioError> {
        if let Some(h) = self.h {
            s.h = h;
        }
        if let Some(t0) = self.t0 {
            s.initial.t0 = t0;
        }
        if let Some(t) = self.t_end {
            s.t_end = t;
        }
        if let Some(t) = self.tol_sim {
            s.tol_sim = Some(t);
        }
        if self.k2.is_some() || self.k1.is_some() || self.k0.is_some() {
            let PartnerSpec::Constants(k) = &mut s.partner else {
                return Err(ScenarioError::Invalid("constant overrides need a [constants] section".into()));
            };
            k.k2 = self.k2.unwrap_or(k.k2);
            k.k1 = self.k1.unwrap_or(k.k1);
            k.k0 = self.k0.unwrap_or(k.k0);
        }
        Ok(())
    }
}

/// How an explicitly given B relates to the partner family of A.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PartnerFit {
    pub inferred: CommutativityConstants,
    /// Largest relative coefficient deviation from the synthesized partner.
    pub deviation: f64,
}

impl PartnerFit {
    pub fn is_partner(&self) -> bool {
        self.deviation <= PARTNER_TOL
    }
}

/// Comparison of the synthesized B with a reference partner.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceComparison {
    pub note: Option<String>,
    pub deviation: f64,
}

/// Algebraic part of a scenario run.
#[derive(Debug, Clone)]
pub struct Check {
    pub name: String,
    pub a: LtvSystem,
    pub b: LtvSystem,
    pub constants: CommutativityConstants,
    /// Equal initial conditions `(y, y')` used for both systems.
    pub y: [f64; 2],
    pub report: ConditionReport,
    pub partner_fit: Option<PartnerFit>,
    pub reference: Option<ReferenceComparison>,
}

pub fn check(s: &Scenario) -> Result<Check, ScenarioError> {
    s.validate()?;
    let a = s.system_a()?;
    let b = s.system_b()?;
    let window = s.window();
    let t0 = s.initial.t0;
    let (constants, partner_fit) = match &s.partner {
        PartnerSpec::Constants(k) => (*k, None),
        PartnerSpec::Explicit(_) => {
            let k = infer_constants(&a, &b, t0)?;
            let dev = partner_deviation(&a, &b, k, window, PARTNER_SAMPLES)?;
            (k, Some(PartnerFit { inferred: k, deviation: dev }))
        }
    };
    let y = match s.initial.mode {
        IcMode::Relaxed => [0.0, 0.0],
        IcMode::NonRelaxed => {
            let dy0 = match s.initial.dy0 {
                InitialDerivative::Value(v) => v,
                InitialDerivative::Auto => ic_slope(&a, constants, t0)? * s.initial.y0,
            };
            [s.initial.y0, dy0]
        }
    };
    let y_opt = (s.initial.mode == IcMode::NonRelaxed).then_some(y);
    let mut report = classify_pair(&a, constants, s.initial.mode, y_opt, t0, window, &s.tolerances)?;
    if partner_fit.is_some_and(|f| !f.is_partner()) {
        // outside the partner family nothing commutes
        report.relaxed_ok = false;
        report.nonrelaxed_ok = false;
    }
    let reference = match s.reference_system()? {
        Some(r) => Some(ReferenceComparison {
            note: s.reference_note.clone(),
            deviation: partner_deviation(&a, &r, constants, window, PARTNER_SAMPLES)?,
        }),
        None => None,
    };
    Ok(Check { name: s.name.clone(), a, b, constants, y, report, partner_fit, reference })
}

/// Both orderings of one response type.
#[derive(Debug, Clone)]
pub struct ResponsePair {
    pub ab: Trajectory,
    pub ba: Trajectory,
    pub deviation: DeviationSummary,
    /// Whether the input or the initial conditions are nonzero.
    pub excited: bool,
}

#[derive(Debug, Clone)]
pub struct Simulation {
    /// Scenario input, zero initial conditions.
    pub forced: ResponsePair,
    /// Zero input, initial conditions `Y`; only in non-relaxed mode.
    pub ic: Option<ResponsePair>,
}

type Job<'a> = Box<dyn FnOnce() -> ltv_commute::Result<Trajectory> + Send + 'a>;

/// Runs the jobs on up to `jobs` threads, keeping their order.
fn run_jobs(jobs: usize, tasks: Vec<Job<'_>>) -> Vec<ltv_commute::Result<Trajectory>> {
    if jobs <= 1 {
        return tasks.into_iter().map(|f| f()).collect();
    }
    let mut results = Vec::with_capacity(tasks.len());
    let mut tasks = tasks.into_iter().peekable();
    while tasks.peek().is_some() {
        let batch: Vec<Job<'_>> = tasks.by_ref().take(jobs).collect();
        thread::scope(|scope| {
            let handles: Vec<_> = batch.into_iter().map(|f| scope.spawn(f)).collect();
            results.extend(handles.into_iter().map(|h| h.join().expect("simulation thread panicked")));
        });
    }
    results
}

pub fn simulate(s: &Scenario, c: &Check, jobs: usize) -> Result<Simulation, ScenarioError> {
    let (t0, t_end, h) = (s.initial.t0, s.t_end, s.h);
    let zero = InitialState::relaxed(t0);
    let ic = InitialState::new(t0, c.y[0], c.y[1]);
    let with_ic = s.initial.mode == IcMode::NonRelaxed;
    let (a, b) = (&c.a, &c.b);
    let cascade = move |first: &'_ LtvSystem, second: &'_ LtvSystem, u: InputSignal, y: InitialState| {
        simulate_cascade(first, second, u, y, y, t0, t_end, h)
    };
    let mut tasks: Vec<Job<'_>> = vec![
        Box::new(move || cascade(a, b, s.input, zero)),
        Box::new(move || cascade(b, a, s.input, zero)),
    ];
    if with_ic {
        tasks.push(Box::new(move || cascade(a, b, InputSignal::Zero, ic)));
        tasks.push(Box::new(move || cascade(b, a, InputSignal::Zero, ic)));
    }
    let mut out = run_jobs(jobs, tasks).into_iter();
    let mut pair = |excited: bool, kind: &str| -> Result<ResponsePair, ScenarioError> {
        let label = format!("{}/{kind}", s.name);
        let ab = out.next().expect("job result")?.labelled(CascadeOrder::Ab, &label);
        let ba = out.next().expect("job result")?.labelled(CascadeOrder::Ba, &label);
        let threshold = s.tol_sim.unwrap_or_else(|| sim_tolerance(&ab, &ba));
        let deviation = deviation(&ab, &ba, threshold)?;
        Ok(ResponsePair { ab, ba, deviation, excited })
    };
    let forced = pair(!s.input.is_zero(), "forced")?;
    let ic = if with_ic { Some(pair(c.y != [0.0, 0.0], "ic")?) } else { None };
    Ok(Simulation { forced, ic })
}

/// Full run: algebra, simulation and their cross-check.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub check: Check,
    pub simulation: Simulation,
    pub report: ScenarioReport,
}

impl Outcome {
    pub fn agreement(&self) -> bool {
        self.report.agreement()
    }
}

pub fn run(s: &Scenario, jobs: usize) -> Result<Outcome, ScenarioError> {
    let check = check(s)?;
    let simulation = simulate(s, &check, jobs)?;
    let report = scenario_report(
        &check.report,
        Some((simulation.forced.deviation, simulation.forced.excited)),
        simulation.ic.as_ref().map(|p| (p.deviation, p.excited)),
    );
    Ok(Outcome { check, simulation, report })
}

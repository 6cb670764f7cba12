//! Fixed-step RK4 simulation of single systems and two-stage cascades.
//!
//! The step grid is split at every coefficient breakpoint so that switching
//! instants are sample times. Inside a step, the first stage evaluation uses
//! the right-hand limit at the step start and the last one the left-hand
//! limit at the step end; the state is carried unchanged across a switch.

use alloc::string::String;
use alloc::vec::Vec;

use crate::linalg::Mat2;
use crate::math;
use crate::model::{InitialState, LtvSystem, Side, LEADING_EPS};
use crate::{Error, Result};

/// Input applied to the first stage.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InputSignal {
    Zero,
    /// `amplitude * sin(2 pi frequency t + phase)`, frequency in Hz.
    Sine { amplitude: f64, frequency: f64, phase: f64 },
}

impl InputSignal {
    pub fn sine(amplitude: f64, frequency: f64) -> Self {
        InputSignal::Sine { amplitude, frequency, phase: 0.0 }
    }

    pub fn eval(&self, t: f64) -> f64 {
        match *self {
            InputSignal::Zero => 0.0,
            InputSignal::Sine { amplitude, frequency, phase } => {
                amplitude * math::sin(2.0 * core::f64::consts::PI * frequency * t + phase)
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        match *self {
            InputSignal::Zero => true,
            InputSignal::Sine { amplitude, .. } => amplitude == 0.0,
        }
    }
}

/// Companion-form realization of a system at one instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StateSpace {
    /// `x' = a x + b u` with `x = (y, y')`.
    Second { a: Mat2, b: [f64; 2] },
    /// `y' = a y + b u`.
    First { a: f64, b: f64 },
    /// `y = gain * u`.
    Algebraic { gain: f64 },
}

/// Companion form of `s` at `t`, using the coefficient piece on `side`.
pub fn to_state_space(s: &LtvSystem, t: f64, side: Side) -> Result<StateSpace> {
    let c = |i| s.coefficient_at(i, t, 0, side);
    let lead = c(s.order())?;
    if lead.abs() <= LEADING_EPS {
        return Err(Error::LeadingCoefficientVanishes { t });
    }
    Ok(match s.order() {
        2 => StateSpace::Second {
            a: Mat2::new(0.0, 1.0, -c(0)? / lead, -c(1)? / lead),
            b: [0.0, 1.0 / lead],
        },
        1 => StateSpace::First { a: -c(0)? / lead, b: 1.0 / lead },
        _ => StateSpace::Algebraic { gain: 1.0 / lead },
    })
}

/// Which arrangement produced a trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CascadeOrder {
    Ab,
    Ba,
    Single,
}

impl CascadeOrder {
    pub fn label(self) -> &'static str {
        match self {
            CascadeOrder::Ab => "AB",
            CascadeOrder::Ba => "BA",
            CascadeOrder::Single => "single",
        }
    }
}

/// One output record.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    pub t: f64,
    /// Output of the last stage.
    pub y_out: f64,
    /// Output of the first stage of a cascade, or the input of a single system.
    pub y_mid: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub samples: Vec<Sample>,
    pub h: f64,
    pub ordering: CascadeOrder,
    pub scenario: String,
    /// Time at which the state stopped being finite, if it did.
    pub truncated_at: Option<f64>,
}

impl Trajectory {
    pub fn labelled(mut self, ordering: CascadeOrder, scenario: &str) -> Self {
        self.ordering = ordering;
        self.scenario = String::from(scenario);
        self
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        self.samples.iter().map(|s| s.t)
    }

    pub fn max_abs_output(&self) -> f64 {
        self.samples.iter().fold(0.0, |m, s| m.max(s.y_out.abs()))
    }
}

/// Commutativity threshold `1e-5 (1 + max |y|)` over both trajectories.
pub fn sim_tolerance(a: &Trajectory, b: &Trajectory) -> f64 {
    1e-5 * (1.0 + a.max_abs_output().max(b.max_abs_output()))
}

/// Sample times from `t0` to `t_end`: steps of `h` restarted at every
/// breakpoint, with each breakpoint and `t_end` stored exactly.
pub fn time_grid(t0: f64, t_end: f64, h: f64, breakpoints: &[f64]) -> Vec<f64> {
    let mut grid = Vec::new();
    grid.push(t0);
    let mut start = t0;
    for &end in breakpoints.iter().filter(|b| **b > t0 && **b < t_end).chain(core::iter::once(&t_end)) {
        let ratio = (end - start) / h;
        let rounded = math::round(ratio);
        let n = if (ratio - rounded).abs() <= 1e-9 * ratio.max(1.0) {
            rounded as usize
        } else {
            math::floor(ratio) as usize + 1
        };
        let n = n.max(1);
        for j in 1..n {
            grid.push(start + (j as f64) * h);
        }
        grid.push(end);
        start = end;
    }
    grid
}

struct Cascade<'a> {
    stages: Vec<&'a LtvSystem>,
    u: InputSignal,
}

const MAX_DIM: usize = 4;
type State = [f64; MAX_DIM];

impl Cascade<'_> {
    fn dim(&self) -> usize {
        self.stages.iter().map(|s| s.order()).sum()
    }

    /// State derivative and per-stage outputs at `(t, x)`.
    fn eval(&self, t: f64, side: Side, x: &State) -> Result<(State, [f64; 2])> {
        let mut dx = [0.0; MAX_DIM];
        let mut outs = [0.0; 2];
        let mut input = self.u.eval(t);
        let mut off = 0;
        for (i, stage) in self.stages.iter().enumerate() {
            let out = match to_state_space(stage, t, side)? {
                StateSpace::Second { a, b } => {
                    let y = [x[off], x[off + 1]];
                    let d = a.apply(y);
                    dx[off] = d[0] + b[0] * input;
                    dx[off + 1] = d[1] + b[1] * input;
                    off += 2;
                    y[0]
                }
                StateSpace::First { a, b } => {
                    let y = x[off];
                    dx[off] = a * y + b * input;
                    off += 1;
                    y
                }
                StateSpace::Algebraic { gain } => gain * input,
            };
            outs[i] = out;
            input = out;
        }
        Ok((dx, outs))
    }

    fn sample(&self, t: f64, side: Side, x: &State) -> Result<Sample> {
        let (_, outs) = self.eval(t, side, x)?;
        let last = self.stages.len() - 1;
        let y_mid = if last == 0 { self.u.eval(t) } else { outs[0] };
        Ok(Sample { t, y_out: outs[last], y_mid })
    }

    fn step(&self, t: f64, t_next: f64, x: &State) -> Result<State> {
        let n = self.dim();
        let h = t_next - t;
        let shift = |base: &State, k: &State, c: f64| {
            let mut out = *base;
            for i in 0..n {
                out[i] += c * k[i];
            }
            out
        };
        let mid = t + 0.5 * h;
        let (k1, _) = self.eval(t, Side::Right, x)?;
        let (k2, _) = self.eval(mid, Side::Right, &shift(x, &k1, 0.5 * h))?;
        let (k3, _) = self.eval(mid, Side::Right, &shift(x, &k2, 0.5 * h))?;
        let (k4, _) = self.eval(t_next, Side::Left, &shift(x, &k3, h))?;
        let mut out = *x;
        for i in 0..n {
            out[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        Ok(out)
    }

    fn run(&self, t0: f64, t_end: f64, h: f64, x0: State) -> Result<Trajectory> {
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::InvalidStep(h));
        }
        let window = (t0, t_end);
        for s in &self.stages {
            s.validate_window(window)?;
        }
        let mut breaks: Vec<f64> = self.stages.iter().flat_map(|s| s.breakpoints(window)).collect();
        breaks.sort_by(f64::total_cmp);
        breaks.dedup();
        let grid = time_grid(t0, t_end, h, &breaks);

        let mut samples = Vec::with_capacity(grid.len());
        samples.push(self.sample(t0, Side::Right, &x0)?);
        let mut x = x0;
        let mut truncated_at = None;
        for w in grid.windows(2) {
            let next = self.step(w[0], w[1], &x)?;
            if next[..self.dim()].iter().any(|v| !v.is_finite()) {
                truncated_at = Some(w[1]);
                break;
            }
            x = next;
            let s = self.sample(w[1], Side::Left, &x)?;
            if !(s.y_out.is_finite() && s.y_mid.is_finite()) {
                truncated_at = Some(w[1]);
                break;
            }
            samples.push(s);
        }
        Ok(Trajectory { samples, h, ordering: CascadeOrder::Single, scenario: String::new(), truncated_at })
    }
}

fn check_ic(ic: &InitialState, t0: f64) -> Result<()> {
    if ic.t0 != t0 {
        return Err(Error::IcTimeMismatch { expected: t0, found: ic.t0 });
    }
    Ok(())
}

fn load_state(x: &mut State, off: usize, s: &LtvSystem, ic: &InitialState) -> usize {
    match s.order() {
        2 => {
            x[off] = ic.y0;
            x[off + 1] = ic.dy0;
            2
        }
        1 => {
            x[off] = ic.y0;
            1
        }
        _ => 0,
    }
}

/// Simulates `u -> first -> second`. The second stage receives the output
/// of the first. A first-order stage takes only `y0` of its initial state;
/// an algebraic stage takes none.
#[allow(clippy::too_many_arguments)]
pub fn simulate_cascade(
    first: &LtvSystem,
    second: &LtvSystem,
    u: InputSignal,
    ic_first: InitialState,
    ic_second: InitialState,
    t0: f64,
    t_end: f64,
    h: f64,
) -> Result<Trajectory> {
    check_ic(&ic_first, t0)?;
    check_ic(&ic_second, t0)?;
    let mut x = [0.0; MAX_DIM];
    let off = load_state(&mut x, 0, first, &ic_first);
    load_state(&mut x, off, second, &ic_second);
    Cascade { stages: alloc::vec![first, second], u }.run(t0, t_end, h, x)
}

/// Simulates one system driven by `u`; `y_mid` holds the input.
pub fn simulate_single(s: &LtvSystem, u: InputSignal, ic: InitialState, t0: f64, t_end: f64, h: f64) -> Result<Trajectory> {
    check_ic(&ic, t0)?;
    let mut x = [0.0; MAX_DIM];
    load_state(&mut x, 0, s, &ic);
    Cascade { stages: alloc::vec![s], u }.run(t0, t_end, h, x)
}

/// Outcome of a superposition check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Superposition {
    /// `max |y(u, Y) - y(u, 0) - y(0, Y)|` over the outputs.
    pub max_deviation: f64,
    /// `max |y(u, Y)|`.
    pub max_abs: f64,
}

impl Superposition {
    /// `max_deviation <= rel (1 + max_abs)`.
    pub fn within(&self, rel: f64) -> bool {
        self.max_deviation <= rel * (1.0 + self.max_abs)
    }
}

/// Compares the complete response with the sum of the zero-state and
/// zero-input responses of a cascade.
#[allow(clippy::too_many_arguments)]
pub fn superposition_check(
    first: &LtvSystem,
    second: &LtvSystem,
    u: InputSignal,
    ic_first: InitialState,
    ic_second: InitialState,
    t0: f64,
    t_end: f64,
    h: f64,
) -> Result<Superposition> {
    let full = simulate_cascade(first, second, u, ic_first, ic_second, t0, t_end, h)?;
    let forced =
        simulate_cascade(first, second, u, InitialState::relaxed(t0), InitialState::relaxed(t0), t0, t_end, h)?;
    let free = simulate_cascade(first, second, InputSignal::Zero, ic_first, ic_second, t0, t_end, h)?;
    let n = full.samples.len().min(forced.samples.len()).min(free.samples.len());
    let mut max_deviation: f64 = 0.0;
    for i in 0..n {
        let d = full.samples[i].y_out - forced.samples[i].y_out - free.samples[i].y_out;
        max_deviation = max_deviation.max(d.abs());
    }
    Ok(Superposition { max_deviation, max_abs: full.max_abs_output() })
}

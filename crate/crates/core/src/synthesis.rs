//! Commutative partners of a second-order system.
//!
//! Every partner `B` of `A: a2 y'' + a1 y' + a0 y = x` is fixed by three
//! constants `(k2, k1, k0)`:
//!
//! ```text
//! b2 = k2 a2
//! b1 = k2 a1 + k1 sqrt(a2)
//! b0 = k2 a0 + k1 f_A + k0,      f_A = (2 a1 - a2') / (4 sqrt(a2))
//! ```
//!
//! `k2 = 0` gives a first-order partner and `k2 = k1 = 0` a constant gain.
//! When `k1 != 0` the pair only commutes if
//! `gamma(t) = a0 - f_A^2 - sqrt(a2) f_A'` is constant.
//!
//! Partners are built as expressions piece by piece, so their derivatives
//! are exact as well.

use alloc::vec::Vec;

use crate::expr::Expression;
use crate::math;
use crate::model::{CommutativityConstants, LtvSystem, PiecewiseCoefficient, Side, SmoothFn};
use crate::{Error, Result};

/// `f_A` and `gamma` of a second-order system as piecewise expressions.
#[derive(Debug, Clone)]
pub struct AuxQuantities {
    /// `f_A`; its cached first derivative is `f_A'`.
    pub f_a: PiecewiseCoefficient,
    pub gamma: PiecewiseCoefficient,
}

impl AuxQuantities {
    pub fn f_a_dot_at(&self, t: f64, side: Side) -> Result<f64> {
        self.f_a.at(t, 1, side)
    }
}

fn first_derivative(f: &SmoothFn) -> Expression {
    f.derivative_expr(1).cloned().expect("first derivative is cached")
}

/// `(2 a1 - a2') / (4 sqrt(a2))` for one smooth piece.
fn f_a_expr(a2: &SmoothFn, a1: &SmoothFn) -> Expression {
    use Expression as E;
    let num = E::sub(E::mul(E::constant(2.0), a1.expr().clone()), first_derivative(a2));
    E::div(num, E::mul(E::constant(4.0), E::sqrt(a2.expr().clone())))
}

/// Builds `f_A` and `gamma` symbolically.
pub fn aux_quantities(a: &LtvSystem) -> Result<AuxQuantities> {
    a.require_order(2)?;
    let (a2, a1, a0) = (a.coefficient(2), a.coefficient(1), a.coefficient(0));
    let f_a = PiecewiseCoefficient::combine(&[a2, a1], |p| f_a_expr(p[0], p[1]))?;
    let gamma = PiecewiseCoefficient::combine(&[a2, a0, &f_a], |p| {
        use Expression as E;
        let f = p[2].expr().clone();
        let f_dot = first_derivative(p[2]);
        E::sub(
            E::sub(p[1].expr().clone(), E::powi(f, 2)),
            E::mul(E::sqrt(p[0].expr().clone()), f_dot),
        )
    })?;
    Ok(AuxQuantities { f_a, gamma })
}

/// Pointwise values of the auxiliary quantities, computed from the symbolic
/// derivatives of the coefficients by the chain rule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AuxValues {
    pub a2: f64,
    pub a1: f64,
    pub a0: f64,
    pub a2_dot: f64,
    pub f_a: f64,
    pub f_a_dot: f64,
    pub gamma: f64,
}

/// Evaluates `f_A`, `f_A'` and `gamma` at `t`. Requires `a2(t) > 0`.
pub fn aux_at(a: &LtvSystem, t: f64, side: Side) -> Result<AuxValues> {
    a.require_order(2)?;
    let a2c = a.coefficient(2);
    let a2 = a2c.at(t, 0, side)?;
    if !(a2 > 0.0) {
        return Err(Error::NonPositiveLeading { t, value: a2 });
    }
    let a2_dot = a2c.at(t, 1, side)?;
    let a2_ddot = a2c.at(t, 2, side)?;
    let a1 = a.coefficient_at(1, t, 0, side)?;
    let a1_dot = a.coefficient_at(1, t, 1, side)?;
    let a0 = a.coefficient_at(0, t, 0, side)?;

    let root = math::sqrt(a2);
    let g = 2.0 * a1 - a2_dot;
    let f_a = g / (4.0 * root);
    let f_a_dot = (2.0 * a1_dot - a2_ddot) / (4.0 * root) - g * a2_dot / (8.0 * a2 * root);
    let gamma = a0 - f_a * f_a - root * f_a_dot;
    Ok(AuxValues { a2, a1, a0, a2_dot, f_a, f_a_dot, gamma })
}

/// `f_A(t)`, right-hand limit at breakpoints.
pub fn compute_f_a(a: &LtvSystem, t: f64) -> Result<f64> {
    Ok(aux_at(a, t, Side::Right)?.f_a)
}

/// `gamma(t) = a0 - f_A^2 - sqrt(a2) f_A'`, right-hand limit at breakpoints.
pub fn compute_gamma(a: &LtvSystem, t: f64) -> Result<f64> {
    Ok(aux_at(a, t, Side::Right)?.gamma)
}

/// Second-order partner. Rejects `k2 = 0`.
pub fn synth_second_order(a: &LtvSystem, k: CommutativityConstants) -> Result<LtvSystem> {
    a.require_order(2)?;
    if k.k2 == 0.0 {
        return Err(Error::InvalidConstants("k2 = 0 gives a first-order partner"));
    }
    use Expression as E;
    let (a2, a1, a0) = (a.coefficient(2), a.coefficient(1), a.coefficient(0));
    let b2 = a2.map(|e| E::mul(E::constant(k.k2), e.clone()));
    let b1 = PiecewiseCoefficient::combine(&[a2, a1], |p| {
        E::add(
            E::mul(E::constant(k.k2), p[1].expr().clone()),
            E::mul(E::constant(k.k1), E::sqrt(p[0].expr().clone())),
        )
    })?;
    let b0 = PiecewiseCoefficient::combine(&[a2, a1, a0], |p| {
        E::add(
            E::add(E::mul(E::constant(k.k2), p[2].expr().clone()), E::mul(E::constant(k.k1), f_a_expr(p[0], p[1]))),
            E::constant(k.k0),
        )
    })?;
    Ok(LtvSystem::second_order(b2, b1, b0).with_domain_start(a.domain_start()))
}

/// First-order partner `b1 = k1 sqrt(a2)`, `b0 = k1 f_A + k0`. Rejects `k1 = 0`.
pub fn synth_first_order(a: &LtvSystem, k1: f64, k0: f64) -> Result<LtvSystem> {
    a.require_order(2)?;
    if k1 == 0.0 {
        return Err(Error::InvalidConstants("k1 = 0 gives a scalar partner"));
    }
    use Expression as E;
    let (a2, a1) = (a.coefficient(2), a.coefficient(1));
    let b1 = a2.map(|e| E::mul(E::constant(k1), E::sqrt(e.clone())));
    let b0 = PiecewiseCoefficient::combine(&[a2, a1], |p| {
        E::add(E::mul(E::constant(k1), f_a_expr(p[0], p[1])), E::constant(k0))
    })?;
    Ok(LtvSystem::first_order(b1, b0).with_domain_start(a.domain_start()))
}

/// Constant gain `b0 = k0`. Rejects `k0 = 0`, which has no output map.
pub fn synth_scalar(k0: f64) -> Result<LtvSystem> {
    if k0 == 0.0 || !k0.is_finite() {
        return Err(Error::InvalidConstants("scalar partner needs a finite nonzero gain"));
    }
    Ok(LtvSystem::gain(PiecewiseCoefficient::constant(k0)))
}

/// Dispatches on the partner order selected by `k`.
pub fn synth_partner(a: &LtvSystem, k: CommutativityConstants) -> Result<LtvSystem> {
    match k.partner_order() {
        2 => synth_second_order(a, k),
        1 => synth_first_order(a, k.k1, k.k0),
        _ => synth_scalar(k.k0),
    }
}

/// Feedforward and feedback gains of a feedback conjugate (`k1 = 0`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeedbackGains {
    pub alpha: f64,
    pub sigma: f64,
}

impl FeedbackGains {
    /// `1/alpha + sigma - 1`, i.e. `k2 + k0 - 1`.
    pub fn discriminant(&self) -> f64 {
        1.0 / self.alpha + self.sigma - 1.0
    }

    /// Whether `1/alpha + sigma = 1` within `tol`, the case where arbitrary
    /// equal initial conditions are admissible.
    pub fn is_unity(&self, tol: f64) -> bool {
        self.discriminant().abs() <= tol
    }
}

pub fn feedback_gains(k: CommutativityConstants) -> Result<FeedbackGains> {
    if k.k2 == 0.0 {
        return Err(Error::InvalidConstants("feedback conjugate needs k2 != 0"));
    }
    if k.k1 != 0.0 {
        return Err(Error::InvalidConstants("feedback conjugate needs k1 = 0"));
    }
    Ok(FeedbackGains { alpha: 1.0 / k.k2, sigma: k.k0 })
}

/// Recovers `(k2, k1, k0)` from an explicitly given partner at time `t`.
pub fn infer_constants(a: &LtvSystem, b: &LtvSystem, t: f64) -> Result<CommutativityConstants> {
    let v = aux_at(a, t, Side::Right)?;
    let root = math::sqrt(v.a2);
    let bc = |i: usize| b.coefficient_at(i, t, 0, Side::Right);
    Ok(match b.order() {
        2 => {
            let k2 = bc(2)? / v.a2;
            let k1 = (bc(1)? - k2 * v.a1) / root;
            let k0 = bc(0)? - k2 * v.a0 - k1 * v.f_a;
            CommutativityConstants::new(k2, k1, k0)
        }
        1 => {
            let k1 = bc(1)? / root;
            CommutativityConstants::new(0.0, k1, bc(0)? - k1 * v.f_a)
        }
        _ => CommutativityConstants::new(0.0, 0.0, bc(0)?),
    })
}

/// Largest relative difference `|b_i - b*_i| / (1 + |b*_i|)` between the
/// coefficients of `b` and the partner synthesized from `k`, sampled on
/// `samples` uniform points of `window` plus both sides of every breakpoint.
pub fn partner_deviation(
    a: &LtvSystem,
    b: &LtvSystem,
    k: CommutativityConstants,
    window: (f64, f64),
    samples: usize,
) -> Result<f64> {
    let reference = synth_partner(a, k)?;
    if reference.order() != b.order() {
        return Ok(f64::INFINITY);
    }
    let (lo, hi) = window;
    let n = samples.max(2);
    let mut points: Vec<(f64, Side)> = (0..n)
        .map(|i| (lo + (hi - lo) * (i as f64) / ((n - 1) as f64), Side::Right))
        .collect();
    points.last_mut().expect("n >= 2").1 = Side::Left;
    let mut cuts = b.breakpoints(window);
    cuts.extend(reference.breakpoints(window));
    for c in cuts {
        points.push((c, Side::Left));
        points.push((c, Side::Right));
    }
    let mut worst: f64 = 0.0;
    for (t, side) in points {
        for i in 0..=b.order() {
            let want = reference.coefficient_at(i, t, 0, side)?;
            let got = b.coefficient_at(i, t, 0, side)?;
            worst = worst.max((got - want).abs() / (1.0 + want.abs()));
        }
    }
    Ok(worst)
}

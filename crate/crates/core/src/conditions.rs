//! Relaxed and non-relaxed commutativity conditions.
//!
//! For a second-order `A` and a partner built from `(k2, k1, k0)`:
//!
//! - relaxed (zero initial conditions): `gamma(t)` must be constant when
//!   `k1 != 0`; jumps of `a2`, `a2'` or `a1` at a switching instant make
//!   `f_A'` unbounded there and count as violations.
//! - non-relaxed: equal initial conditions `Y = (y, y')` for both systems,
//!   and `M(t0) Y = 0` with
//!
//! ```text
//!     | c + k1 f_A                          sqrt(a2) k1 |
//! M = |                                                 |,   c = k2 + k0 - 1
//!     | k1 (1 - a0 + sqrt(a2) f_A') / sqrt(a2)  c - k1 f_A  |
//! ```
//!
//!   whose determinant is `delta = c^2 - k1^2 + k1^2 gamma(t0)`.

use alloc::vec::Vec;

use crate::linalg::{norm_inf, Mat2};
use crate::math;
use crate::model::{CommutativityConstants, LtvSystem, Side};
use crate::synthesis::{aux_at, synth_partner};
use crate::{Error, Result};

/// Checker tolerances. The defaults only absorb floating-point error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Absolute tolerance on `|gamma(t) - gamma(t_ref)|`.
    pub gamma: f64,
    /// Tolerance for `delta = 0` (and `k2 + k0 - 1 = 0` when `k1 = 0`).
    pub delta: f64,
    /// Tolerance on `|M Y|_inf`, scaled by `max(1, |Y|_inf)`.
    pub residual: f64,
    /// Samples of `gamma` per smooth piece.
    pub grid: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { gamma: 1e-8, delta: 1e-9, residual: 1e-9, grid: 512 }
    }
}

/// Which of the four cases of the theory applies to a pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TheoremCase {
    /// `k2 != 0`, `k1 != 0`.
    SecondOrderGeneral,
    /// `k2 != 0`, `k1 = 0`: feedback conjugate.
    Feedback,
    /// `k2 = 0`, `k1 != 0`.
    FirstOrderPartner,
    /// `k2 = k1 = 0`: constant gain.
    ScalarPartner,
}

impl TheoremCase {
    pub fn from_constants(k: CommutativityConstants) -> Self {
        match (k.k2 != 0.0, k.k1 != 0.0) {
            (true, true) => TheoremCase::SecondOrderGeneral,
            (true, false) => TheoremCase::Feedback,
            (false, true) => TheoremCase::FirstOrderPartner,
            (false, false) => TheoremCase::ScalarPartner,
        }
    }

    pub fn number(self) -> u8 {
        match self {
            TheoremCase::SecondOrderGeneral => 1,
            TheoremCase::Feedback => 2,
            TheoremCase::FirstOrderPartner => 3,
            TheoremCase::ScalarPartner => 4,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            TheoremCase::SecondOrderGeneral => "second_order_general",
            TheoremCase::Feedback => "feedback",
            TheoremCase::FirstOrderPartner => "first_order_partner",
            TheoremCase::ScalarPartner => "scalar_partner",
        }
    }
}

/// Outcome of the relaxed (first set) check.
#[derive(Debug, Clone, PartialEq)]
pub struct RelaxedCheck {
    /// `gamma` constant within tolerance on every piece and across pieces.
    /// Vacuously true when `k1 = 0`.
    pub gamma_constant: bool,
    /// `gamma` at the start of the window; `None` when `k1 = 0`.
    pub a0: Option<f64>,
    pub max_dev: f64,
    /// Switching instants where the condition breaks down.
    pub violated_breakpoints: Vec<f64>,
}

impl RelaxedCheck {
    pub fn ok(&self) -> bool {
        self.gamma_constant && self.violated_breakpoints.is_empty()
    }
}

fn jumps(l: f64, r: f64) -> bool {
    (l - r).abs() > 1e-12 * (1.0 + l.abs() + r.abs())
}

/// Relaxed commutativity check on `window`, with `tol.grid` samples of
/// `gamma` per smooth piece (both one-sided endpoint limits included).
pub fn check_relaxed(
    a: &LtvSystem,
    k: CommutativityConstants,
    window: (f64, f64),
    tol: &Tolerances,
) -> Result<RelaxedCheck> {
    a.require_order(2)?;
    let (lo, hi) = window;
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(Error::InvalidWindow { start: lo, end: hi });
    }
    if k.k1 == 0.0 {
        return Ok(RelaxedCheck { gamma_constant: true, a0: None, max_dev: 0.0, violated_breakpoints: Vec::new() });
    }

    let breaks = a.breakpoints(window);
    let reference = aux_at(a, lo, Side::Right)?.gamma;
    let n = tol.grid.max(2);
    let mut max_dev: f64 = 0.0;
    let mut edges = Vec::with_capacity(breaks.len() + 2);
    edges.push(lo);
    edges.extend_from_slice(&breaks);
    edges.push(hi);
    for w in edges.windows(2) {
        let (s, e) = (w[0], w[1]);
        for i in 0..n {
            let (t, side) = match i {
                0 => (s, Side::Right),
                _ if i == n - 1 => (e, Side::Left),
                _ => (s + (e - s) * (i as f64) / ((n - 1) as f64), Side::Right),
            };
            let g = aux_at(a, t, side)?.gamma;
            max_dev = max_dev.max((g - reference).abs());
        }
    }

    let mut violated = Vec::new();
    for &b in &breaks {
        let l = aux_at(a, b, Side::Left)?;
        let r = aux_at(a, b, Side::Right)?;
        let a1_jump = jumps(l.a1, r.a1);
        let a2_jump = jumps(l.a2, r.a2) || jumps(l.a2_dot, r.a2_dot);
        if a1_jump || a2_jump || (l.gamma - r.gamma).abs() > tol.gamma {
            violated.push(b);
        }
    }

    Ok(RelaxedCheck {
        gamma_constant: max_dev <= tol.gamma,
        a0: Some(reference),
        max_dev,
        violated_breakpoints: violated,
    })
}

/// `delta = (k2 + k0 - 1)^2 - k1^2 + k1^2 gamma(t0)`.
pub fn delta_determinant(a: &LtvSystem, k: CommutativityConstants, t0: f64) -> Result<f64> {
    a.require_order(2)?;
    let c = k.offset();
    if k.k1 == 0.0 {
        return Ok(c * c);
    }
    let g = aux_at(a, t0, Side::Right)?.gamma;
    Ok(c * c - k.k1 * k.k1 + k.k1 * k.k1 * g)
}

/// The 2x2 matrix whose null space holds the admissible `(y(t0), y'(t0))`.
pub fn condition_matrix(a: &LtvSystem, k: CommutativityConstants, t0: f64) -> Result<Mat2> {
    a.require_order(2)?;
    let c = k.offset();
    if k.k1 == 0.0 {
        return Ok(Mat2::scaled_identity(c));
    }
    let v = aux_at(a, t0, Side::Right)?;
    let root = math::sqrt(v.a2);
    Ok(Mat2::new(
        c + k.k1 * v.f_a,
        root * k.k1,
        k.k1 * (1.0 - v.a0 + root * v.f_a_dot) / root,
        c - k.k1 * v.f_a,
    ))
}

/// Slope `s` of the line `y'(t0) = s y(t0)` solving the first row of `M Y = 0`.
pub fn ic_slope(a: &LtvSystem, k: CommutativityConstants, t0: f64) -> Result<f64> {
    if k.k1 == 0.0 {
        return Err(Error::FeedbackCase);
    }
    let v = aux_at(a, t0, Side::Right)?;
    Ok(-(k.offset() / k.k1 / math::sqrt(v.a2) + (2.0 * v.a1 - v.a2_dot) / (4.0 * v.a2)))
}

/// Admissible initial-condition slope, or [`Error::ZeroIcOnly`] when
/// `|delta(t0)| > delta_tol`.
pub fn required_ic_ray(a: &LtvSystem, k: CommutativityConstants, t0: f64, delta_tol: f64) -> Result<f64> {
    if k.k1 == 0.0 {
        return Err(Error::FeedbackCase);
    }
    let delta = delta_determinant(a, k, t0)?;
    if delta.abs() > delta_tol {
        return Err(Error::ZeroIcOnly { delta });
    }
    ic_slope(a, k, t0)
}

/// Block matrices `(S1, S2)` of a second-order system at `t`:
/// `S1 = [[s0, s1], [s0', s1' + s0]]`, `S2 = [[s2, 0], [s2' + s1, s2]]`.
pub fn block_matrices(s: &LtvSystem, t: f64) -> Result<(Mat2, Mat2)> {
    s.require_order(2)?;
    let c = |i, order| s.coefficient_at(i, t, order, Side::Right);
    let (s0, s1, s2) = (c(0, 0)?, c(1, 0)?, c(2, 0)?);
    let m1 = Mat2::new(s0, s1, c(0, 1)?, c(1, 1)? + s0);
    let m2 = Mat2::new(s2, 0.0, c(2, 1)? + s1, s2);
    Ok((m1, m2))
}

/// Block matrices for a second-order `A` and a first-order `B`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FirstOrderBlocks {
    pub a1: [f64; 2],
    pub a2: f64,
    pub b1: [f64; 2],
    pub b2: Mat2,
}

pub fn first_order_block_matrices(a: &LtvSystem, b: &LtvSystem, t: f64) -> Result<FirstOrderBlocks> {
    a.require_order(2)?;
    b.require_order(1)?;
    let ac = |i, order| a.coefficient_at(i, t, order, Side::Right);
    let bc = |i, order| b.coefficient_at(i, t, order, Side::Right);
    let (b0, b1) = (bc(0, 0)?, bc(1, 0)?);
    Ok(FirstOrderBlocks {
        a1: [ac(0, 0)?, ac(1, 0)?],
        a2: ac(2, 0)?,
        b1: [b0, bc(0, 1)?],
        b2: Mat2::new(b1, 0.0, bc(1, 1)? + b0, b1),
    })
}

/// Residual of the non-relaxed conditions computed from block matrices.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Residual {
    /// Infinity norm of the raw block residual.
    pub raw: f64,
    /// The residual premultiplied by `B2(t0)`; equals `|M Y|_inf`.
    pub normalized: f64,
}

/// Evaluates the non-relaxed conditions for equal initial conditions
/// `y = (y(t0), y'(t0))` from the block matrices of `a` and `b`.
///
/// - order-2 `b`: `[A2^-1 (I - A1) - B2^-1 (I - B1)] Y`,
/// - order-1 `b`: the three-row system with `(y, y', y_B = y)`,
/// - order-0 `b`: `(1 - b0) Y`.
pub fn nonrelaxed_residual(a: &LtvSystem, b: &LtvSystem, y: [f64; 2], t0: f64) -> Result<Residual> {
    a.require_order(2)?;
    match b.order() {
        2 => {
            let (a1, a2) = block_matrices(a, t0)?;
            let (b1, b2) = block_matrices(b, t0)?;
            let a2_inv = a2.inverse().ok_or(Error::SingularBlock { t: t0 })?;
            let b2_inv = b2.inverse().ok_or(Error::SingularBlock { t: t0 })?;
            let n = a2_inv * (Mat2::IDENTITY - a1) - b2_inv * (Mat2::IDENTITY - b1);
            let r = n.apply(y);
            Ok(Residual { raw: norm_inf(&r), normalized: norm_inf(&b2.apply(r)) })
        }
        1 => {
            let blk = first_order_block_matrices(a, b, t0)?;
            let a2 = blk.a2;
            let (b0, b0_dot) = (blk.b1[0], blk.b1[1]);
            let b1 = blk.b2.0[0][0];
            let b1_dot_plus_b0 = blk.b2.0[1][0];
            if a2 == 0.0 || b1 == 0.0 {
                return Err(Error::SingularBlock { t: t0 });
            }
            let (a0, a1) = (blk.a1[0], blk.a1[1]);
            let rows = [
                [1.0, 0.0, -1.0],
                [-1.0 / b1, 1.0, b0 / b1],
                [
                    -a0 / a2 + b1_dot_plus_b0 / (b1 * b1),
                    -a1 / a2 - 1.0 / b1,
                    1.0 / a2 - b1_dot_plus_b0 * b0 / (b1 * b1) + b0_dot / b1,
                ],
            ];
            let v = [y[0], y[1], y[0]];
            let r: Vec<f64> = rows.iter().map(|row| row.iter().zip(v).map(|(m, x)| m * x).sum()).collect();
            let scaled = blk.b2.apply([r[1], r[2]]);
            Ok(Residual { raw: norm_inf(&r), normalized: r[0].abs().max(norm_inf(&scaled)) })
        }
        _ => {
            let b0 = b.coefficient_at(0, t0, 0, Side::Right)?;
            let r = norm_inf(&[(1.0 - b0) * y[0], (1.0 - b0) * y[1]]);
            Ok(Residual { raw: r, normalized: r })
        }
    }
}

/// Initial-condition mode of a check.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IcMode {
    Relaxed,
    NonRelaxed,
}

/// Set of equal initial conditions `(y, y')` under which the pair commutes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum IcAdmissibility {
    /// Only `(0, 0)`.
    ZeroOnly,
    /// The line `{(y, slope * y)}`.
    Ray { slope: f64 },
    /// Any equal initial conditions.
    Any,
}

/// A single reason why a pair fails to commute.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Failure {
    /// `gamma` is not constant over the window.
    GammaNotConstant { max_dev: f64 },
    /// Coefficient jump at a switching instant.
    SwitchingViolation { t: f64 },
    /// `delta(t0) != 0` with nonzero initial conditions.
    DeltaNonZero { delta: f64 },
    /// Initial conditions off the admissible ray.
    IcOffRay { residual: f64 },
    /// `k2 + k0 != 1` with nonzero initial conditions (feedback and scalar
    /// cases).
    OffsetNonZero { offset: f64 },
}

/// Full verdict for one pair, with every intermediate quantity.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionReport {
    pub theorem: TheoremCase,
    pub constants: CommutativityConstants,
    pub t0: f64,
    pub window: (f64, f64),
    pub ic_mode: IcMode,
    pub y: Option<[f64; 2]>,
    pub relaxed: RelaxedCheck,
    pub delta: f64,
    pub matrix_m: Mat2,
    pub admissible: IcAdmissibility,
    /// `|M Y|_inf` when `y` is given.
    pub ic_residual: Option<f64>,
    pub relaxed_ok: bool,
    /// With `y` given: the non-relaxed conditions hold for that `Y`.
    /// Without: some nonzero initial condition is admissible.
    pub nonrelaxed_ok: bool,
    pub failures: Vec<Failure>,
}

impl ConditionReport {
    /// Verdict for the requested initial-condition mode.
    pub fn commutative(&self) -> bool {
        match self.ic_mode {
            IcMode::Relaxed => self.relaxed_ok,
            IcMode::NonRelaxed => self.nonrelaxed_ok,
        }
    }

    pub fn ic_slope(&self) -> Option<f64> {
        match self.admissible {
            IcAdmissibility::Ray { slope } => Some(slope),
            _ => None,
        }
    }
}

/// Classifies the pair `(A, B(k))` under the four theorem cases.
pub fn classify_pair(
    a: &LtvSystem,
    k: CommutativityConstants,
    ic_mode: IcMode,
    y: Option<[f64; 2]>,
    t0: f64,
    window: (f64, f64),
    tol: &Tolerances,
) -> Result<ConditionReport> {
    a.require_order(2)?;
    a.validate_window(window)?;
    let theorem = TheoremCase::from_constants(k);
    let relaxed = check_relaxed(a, k, window, tol)?;
    let delta = delta_determinant(a, k, t0)?;
    let matrix_m = condition_matrix(a, k, t0)?;

    let mut failures = Vec::new();
    if !relaxed.gamma_constant {
        failures.push(Failure::GammaNotConstant { max_dev: relaxed.max_dev });
    }
    failures.extend(relaxed.violated_breakpoints.iter().map(|&t| Failure::SwitchingViolation { t }));
    let relaxed_ok = relaxed.ok();

    let general = k.k1 != 0.0;
    let admissible = if general {
        if delta.abs() <= tol.delta {
            IcAdmissibility::Ray { slope: ic_slope(a, k, t0)? }
        } else {
            IcAdmissibility::ZeroOnly
        }
    } else if k.offset().abs() <= tol.delta {
        IcAdmissibility::Any
    } else {
        IcAdmissibility::ZeroOnly
    };

    let ic_residual = y.map(|y| norm_inf(&matrix_m.apply(y)));
    let ic_ok = match (y, ic_residual) {
        (Some(y), Some(res)) => {
            let zero = y == [0.0, 0.0];
            if zero {
                true
            } else if general {
                let delta_ok = delta.abs() <= tol.delta;
                let on_ray = res <= tol.residual * norm_inf(&y).max(1.0);
                if !delta_ok {
                    failures.push(Failure::DeltaNonZero { delta });
                }
                if !on_ray {
                    failures.push(Failure::IcOffRay { residual: res });
                }
                delta_ok && on_ray
            } else {
                let ok = k.offset().abs() <= tol.delta;
                if !ok {
                    failures.push(Failure::OffsetNonZero { offset: k.offset() });
                }
                ok
            }
        }
        _ => admissible != IcAdmissibility::ZeroOnly,
    };

    Ok(ConditionReport {
        theorem,
        constants: k,
        t0,
        window,
        ic_mode,
        y,
        relaxed,
        delta,
        matrix_m,
        admissible,
        ic_residual,
        relaxed_ok,
        nonrelaxed_ok: relaxed_ok && ic_ok,
        failures,
    })
}

/// Builds the partner from `k` and evaluates the block-matrix residual at
/// `t0`; an independent route to `|M Y|_inf`.
pub fn partner_residual(a: &LtvSystem, k: CommutativityConstants, y: [f64; 2], t0: f64) -> Result<Residual> {
    let b = synth_partner(a, k)?;
    nonrelaxed_residual(a, &b, y, t0)
}

//! Piecewise-smooth coefficients, switching signals and LTV systems of order
//! 0, 1 and 2.
//!
//! A system of order `n` is `sum_{i=0..n} c_i(t) * y^(i)(t) = x(t)`, with each
//! `c_i` a [`PiecewiseCoefficient`]. Pieces own their left endpoint: at a
//! switching instant `t_j` the piece on `[t_j, t_{j+1})` is used unless the
//! caller asks for the left-hand limit with [`Side::Left`].

use alloc::vec::Vec;

use crate::expr::Expression;
use crate::{Error, Result};

/// Which one-sided limit to take at a breakpoint.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

/// An expression together with its first and second symbolic derivatives.
#[derive(Debug, Clone, PartialEq)]
pub struct SmoothFn {
    derivs: [Expression; 3],
}

impl SmoothFn {
    pub fn new(expr: Expression) -> Self {
        let d1 = expr.derivative();
        let d2 = d1.derivative();
        SmoothFn { derivs: [expr, d1, d2] }
    }

    pub fn expr(&self) -> &Expression {
        &self.derivs[0]
    }

    pub fn derivative_expr(&self, order: usize) -> Result<&Expression> {
        self.derivs.get(order).ok_or(Error::UnsupportedOrder(order))
    }

    pub fn eval(&self, order: usize, t: f64) -> Result<f64> {
        Ok(self.derivative_expr(order)?.eval(t)?)
    }
}

/// One smooth piece on `[start, end)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Piece {
    start: f64,
    end: f64,
    f: SmoothFn,
}

impl Piece {
    pub fn start(&self) -> f64 {
        self.start
    }

    pub fn end(&self) -> f64 {
        self.end
    }

    pub fn expr(&self) -> &Expression {
        self.f.expr()
    }

    pub fn smooth(&self) -> &SmoothFn {
        &self.f
    }

    pub fn eval(&self, order: usize, t: f64) -> Result<f64> {
        self.f.eval(order, t)
    }
}

/// Ordered, contiguous list of smooth pieces.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseCoefficient {
    pieces: Vec<Piece>,
}

impl PiecewiseCoefficient {
    /// A single piece covering the whole real line.
    pub fn smooth(expr: Expression) -> Self {
        PiecewiseCoefficient {
            pieces: alloc::vec![Piece {
                start: f64::NEG_INFINITY,
                end: f64::INFINITY,
                f: SmoothFn::new(expr),
            }],
        }
    }

    pub fn constant(c: f64) -> Self {
        Self::smooth(Expression::constant(c))
    }

    /// Builds a coefficient from `(start, end, expr)` triples. Consecutive
    /// pieces must share their boundary exactly.
    pub fn from_pieces(pieces: Vec<(f64, f64, Expression)>) -> Result<Self> {
        validate_intervals(pieces.iter().map(|(s, e, _)| (*s, *e)))?;
        Ok(PiecewiseCoefficient {
            pieces: pieces
                .into_iter()
                .map(|(start, end, expr)| Piece { start, end, f: SmoothFn::new(expr) })
                .collect(),
        })
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    /// `[start, end]` covered by the pieces.
    pub fn horizon(&self) -> (f64, f64) {
        (self.pieces[0].start, self.pieces[self.pieces.len() - 1].end)
    }

    /// Interior boundaries between pieces, in increasing order.
    pub fn breakpoints(&self) -> Vec<f64> {
        self.pieces.iter().skip(1).map(|p| p.start).collect()
    }

    pub fn piece_index(&self, t: f64, side: Side) -> Result<usize> {
        let (start, end) = self.horizon();
        if !(t >= start && t <= end) {
            return Err(Error::OutsideHorizon { t, start, end });
        }
        let last = self.pieces.len() - 1;
        let idx = self.pieces.iter().position(|p| match side {
            Side::Right => t < p.end,
            Side::Left => t <= p.end,
        });
        Ok(idx.unwrap_or(last))
    }

    pub fn piece_at(&self, t: f64, side: Side) -> Result<&Piece> {
        Ok(&self.pieces[self.piece_index(t, side)?])
    }

    /// Value (`order = 0`) or one-sided derivative of the owning piece at `t`.
    /// Jumps at breakpoints contribute nothing to the derivative.
    pub fn at(&self, t: f64, order: usize, side: Side) -> Result<f64> {
        self.piece_at(t, side)?.eval(order, t)
    }

    /// Applies `f` piece by piece.
    pub fn map(&self, f: impl Fn(&Expression) -> Expression) -> Self {
        PiecewiseCoefficient {
            pieces: self
                .pieces
                .iter()
                .map(|p| Piece { start: p.start, end: p.end, f: SmoothFn::new(f(p.expr())) })
                .collect(),
        }
    }

    /// Combines several coefficients on the common refinement of their
    /// pieces. `f` receives one piece (as a [`SmoothFn`]) per input, in order.
    pub fn combine(parts: &[&PiecewiseCoefficient], f: impl Fn(&[&SmoothFn]) -> Expression) -> Result<Self> {
        let start = parts.iter().map(|c| c.horizon().0).fold(f64::NEG_INFINITY, f64::max);
        let end = parts.iter().map(|c| c.horizon().1).fold(f64::INFINITY, f64::min);
        if !(start < end) {
            return Err(Error::InvalidPieces("coefficient horizons do not overlap"));
        }
        let mut cuts: Vec<f64> = parts
            .iter()
            .flat_map(|c| c.breakpoints())
            .filter(|b| *b > start && *b < end)
            .collect();
        cuts.push(start);
        cuts.push(end);
        cuts.sort_by(f64::total_cmp);
        cuts.dedup();

        let mut pieces = Vec::with_capacity(cuts.len() - 1);
        let mut selected = Vec::with_capacity(parts.len());
        for w in cuts.windows(2) {
            let probe = interior_point(w[0], w[1]);
            selected.clear();
            for c in parts {
                selected.push(c.piece_at(probe, Side::Right)?.smooth());
            }
            pieces.push(Piece { start: w[0], end: w[1], f: SmoothFn::new(f(&selected)) });
        }
        Ok(PiecewiseCoefficient { pieces })
    }
}

fn interior_point(lo: f64, hi: f64) -> f64 {
    match (lo.is_finite(), hi.is_finite()) {
        (true, true) => lo + 0.5 * (hi - lo),
        (true, false) => lo + 1.0,
        (false, true) => hi - 1.0,
        (false, false) => 0.0,
    }
}

fn validate_intervals(iter: impl Iterator<Item = (f64, f64)>) -> Result<()> {
    let mut prev_end: Option<f64> = None;
    let mut count = 0;
    for (start, end) in iter {
        count += 1;
        if start.is_nan() || end.is_nan() || !(start < end) {
            return Err(Error::InvalidPieces("each interval needs start < end"));
        }
        if let Some(pe) = prev_end {
            if !pe.is_finite() || pe != start {
                return Err(Error::InvalidPieces("intervals must be contiguous"));
            }
        }
        prev_end = Some(end);
    }
    if count == 0 {
        return Err(Error::InvalidPieces("at least one interval is required"));
    }
    Ok(())
}

/// One constant level of a switching signal on `[start, end)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Level {
    pub start: f64,
    pub end: f64,
    pub value: f64,
}

/// Piecewise-constant switching signal `sigma(t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SwitchingSignal {
    levels: Vec<Level>,
}

impl SwitchingSignal {
    pub fn new(levels: Vec<Level>) -> Result<Self> {
        validate_intervals(levels.iter().map(|l| (l.start, l.end)))?;
        if levels.iter().any(|l| !l.value.is_finite()) {
            return Err(Error::InvalidPieces("switching levels must be finite"));
        }
        Ok(SwitchingSignal { levels })
    }

    pub fn levels(&self) -> &[Level] {
        &self.levels
    }

    pub fn breakpoints(&self) -> Vec<f64> {
        self.levels.iter().skip(1).map(|l| l.start).collect()
    }
}

/// Builds the piecewise-constant coefficient `base + gain * sigma(t)`.
pub fn apply_switching(base: f64, gain: f64, signal: &SwitchingSignal) -> PiecewiseCoefficient {
    PiecewiseCoefficient {
        pieces: signal
            .levels
            .iter()
            .map(|l| Piece {
                start: l.start,
                end: l.end,
                f: SmoothFn::new(Expression::constant(base + gain * l.value)),
            })
            .collect(),
    }
}

/// Threshold below which a leading coefficient counts as vanishing.
pub const LEADING_EPS: f64 = 1e-12;

/// Samples per piece used when validating the leading coefficient.
pub const LEADING_SAMPLES: usize = 1000;

/// Linear time-varying system of order 0, 1 or 2.
#[derive(Debug, Clone, PartialEq)]
pub struct LtvSystem {
    // coeffs[i] multiplies the i-th derivative of the output.
    coeffs: Vec<PiecewiseCoefficient>,
    domain_start: f64,
}

impl LtvSystem {
    /// `a2 y'' + a1 y' + a0 y = x`.
    pub fn second_order(a2: PiecewiseCoefficient, a1: PiecewiseCoefficient, a0: PiecewiseCoefficient) -> Self {
        LtvSystem { coeffs: alloc::vec![a0, a1, a2], domain_start: f64::NEG_INFINITY }
    }

    /// `b1 y' + b0 y = x`.
    pub fn first_order(b1: PiecewiseCoefficient, b0: PiecewiseCoefficient) -> Self {
        LtvSystem { coeffs: alloc::vec![b0, b1], domain_start: f64::NEG_INFINITY }
    }

    /// `b0 y = x`, so the output is `x / b0`.
    pub fn gain(b0: PiecewiseCoefficient) -> Self {
        LtvSystem { coeffs: alloc::vec![b0], domain_start: f64::NEG_INFINITY }
    }

    pub fn with_domain_start(mut self, t: f64) -> Self {
        self.domain_start = t;
        self
    }

    pub fn domain_start(&self) -> f64 {
        self.domain_start
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Coefficient of the `i`-th derivative of the output.
    pub fn coefficient(&self, i: usize) -> &PiecewiseCoefficient {
        &self.coeffs[i]
    }

    pub fn coefficients(&self) -> &[PiecewiseCoefficient] {
        &self.coeffs
    }

    pub fn leading(&self) -> &PiecewiseCoefficient {
        &self.coeffs[self.order()]
    }

    pub fn require_order(&self, expected: usize) -> Result<()> {
        if self.order() == expected {
            Ok(())
        } else {
            Err(Error::WrongOrder { expected, found: self.order() })
        }
    }

    /// Evaluates coefficient `i` (or its derivative) at `t`.
    pub fn coefficient_at(&self, i: usize, t: f64, order: usize, side: Side) -> Result<f64> {
        self.coeffs[i].at(t, order, side)
    }

    /// Intersection of the coefficient horizons, clipped by the domain start.
    pub fn horizon(&self) -> (f64, f64) {
        let start = self.coeffs.iter().map(|c| c.horizon().0).fold(self.domain_start, f64::max);
        let end = self.coeffs.iter().map(|c| c.horizon().1).fold(f64::INFINITY, f64::min);
        (start, end)
    }

    /// Sorted union of coefficient breakpoints strictly inside `window`.
    pub fn breakpoints(&self, window: (f64, f64)) -> Vec<f64> {
        let mut out: Vec<f64> = self
            .coeffs
            .iter()
            .flat_map(|c| c.breakpoints())
            .filter(|b| *b > window.0 && *b < window.1)
            .collect();
        out.sort_by(f64::total_cmp);
        out.dedup();
        out
    }

    /// Checks that `window` is finite, lies in the horizon, and that the
    /// leading coefficient stays away from zero on it. The leading coefficient
    /// is sampled at [`LEADING_SAMPLES`] interior points of every piece plus
    /// both endpoints; a sign change between samples also counts as vanishing.
    pub fn validate_window(&self, window: (f64, f64)) -> Result<()> {
        let (lo, hi) = window;
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::InvalidWindow { start: lo, end: hi });
        }
        let (start, end) = self.horizon();
        if lo < start || hi > end {
            let t = if lo < start { lo } else { hi };
            return Err(Error::OutsideHorizon { t, start, end });
        }
        for piece in self.leading().pieces() {
            let a = piece.start.max(lo);
            let b = piece.end.min(hi);
            if !(a < b) {
                continue;
            }
            let n = LEADING_SAMPLES + 1;
            let mut prev: Option<f64> = None;
            for i in 0..=n {
                let t = if i == n { b } else { a + (b - a) * (i as f64) / (n as f64) };
                let v = piece.eval(0, t)?;
                if v.abs() <= LEADING_EPS {
                    return Err(Error::LeadingCoefficientVanishes { t });
                }
                if let Some(p) = prev {
                    if (p > 0.0) != (v > 0.0) {
                        return Err(Error::LeadingCoefficientVanishes { t });
                    }
                }
                prev = Some(v);
            }
        }
        Ok(())
    }
}

/// Output value and derivative at the initial time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InitialState {
    pub t0: f64,
    pub y0: f64,
    pub dy0: f64,
}

impl InitialState {
    pub fn new(t0: f64, y0: f64, dy0: f64) -> Self {
        InitialState { t0, y0, dy0 }
    }

    pub fn relaxed(t0: f64) -> Self {
        InitialState { t0, y0: 0.0, dy0: 0.0 }
    }

    pub fn is_zero(&self) -> bool {
        self.y0 == 0.0 && self.dy0 == 0.0
    }
}

/// The constants `(k2, k1, k0)` that parametrize every commutative partner.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CommutativityConstants {
    pub k2: f64,
    pub k1: f64,
    pub k0: f64,
}

impl CommutativityConstants {
    pub fn new(k2: f64, k1: f64, k0: f64) -> Self {
        CommutativityConstants { k2, k1, k0 }
    }

    /// Order of the partner these constants produce.
    pub fn partner_order(&self) -> usize {
        if self.k2 != 0.0 {
            2
        } else if self.k1 != 0.0 {
            1
        } else {
            0
        }
    }

    /// `k2 + k0 - 1`, the diagonal term shared by all condition matrices.
    pub fn offset(&self) -> f64 {
        self.k2 + self.k0 - 1.0
    }
}

#![allow(dead_code)]

use ltv_commute::model::{apply_switching, Level};
use ltv_commute::{Expression, LtvSystem, PiecewiseCoefficient, SwitchingSignal};
use proptest::prelude::*;

pub fn e(s: &str) -> Expression {
    Expression::parse(s).unwrap()
}

pub fn smooth(s: &str) -> PiecewiseCoefficient {
    PiecewiseCoefficient::smooth(e(s))
}

pub fn example1() -> LtvSystem {
    LtvSystem::second_order(smooth("0.5*t^2"), smooth("t+1"), smooth("1/(2*t^2)")).with_domain_start(0.0)
}

pub fn switching(levels: &[(f64, f64, f64)]) -> SwitchingSignal {
    SwitchingSignal::new(levels.iter().map(|&(start, end, value)| Level { start, end, value }).collect()).unwrap()
}

pub fn example2() -> LtvSystem {
    let s = switching(&[(0.0, 1.0, 0.0), (1.0, 3.0, 10.0), (3.0, 4.5, 0.0), (4.5, f64::INFINITY, 10.0)]);
    LtvSystem::second_order(
        PiecewiseCoefficient::constant(1.0),
        apply_switching(-1.0, 1.0, &s),
        apply_switching(-2.0, 2.0, &s),
    )
}

/// Smooth expressions that stay finite and moderate on `t` in [0.5, 2].
pub fn bounded_expr() -> impl Strategy<Value = Expression> {
    let leaf = prop_oneof![(-2.0..2.0f64).prop_map(Expression::constant), Just(Expression::time())];
    leaf.prop_recursive(3, 16, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expression::add(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expression::sub(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expression::mul(a, b)),
            inner.clone().prop_map(Expression::sin),
            inner.clone().prop_map(Expression::cos),
            // exp(sin(.)) and 1/(1 + x^2) keep values bounded
            inner.clone().prop_map(|a| Expression::exp(Expression::sin(a))),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expression::div(
                a,
                Expression::add(Expression::constant(1.0), Expression::powi(b, 2))
            )),
            inner.clone().prop_map(|a| Expression::sqrt(Expression::add(Expression::constant(1.0), Expression::powi(a, 2)))),
            (inner, 0..4i32).prop_map(|(a, n)| Expression::powi(a, n)),
        ]
    })
}

/// Strictly positive expressions bounded away from zero.
pub fn positive_expr() -> impl Strategy<Value = Expression> {
    (0.5..3.0f64, bounded_expr()).prop_map(|(c, x)| {
        Expression::add(Expression::constant(c), Expression::div(Expression::powi(x.clone(), 2), Expression::add(Expression::constant(1.0), Expression::powi(x, 2))))
    })
}

pub fn second_order_system() -> impl Strategy<Value = LtvSystem> {
    (positive_expr(), bounded_expr(), bounded_expr()).prop_map(|(a2, a1, a0)| {
        LtvSystem::second_order(
            PiecewiseCoefficient::smooth(a2),
            PiecewiseCoefficient::smooth(a1),
            PiecewiseCoefficient::smooth(a0),
        )
    })
}

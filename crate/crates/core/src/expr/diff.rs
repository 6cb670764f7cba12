use super::{Expression, Node};

impl Expression {
    /// Symbolic derivative with respect to `t`.
    pub fn derivative(&self) -> Expression {
        use Expression as E;
        match self.node() {
            Node::Const(_) => E::constant(0.0),
            Node::Time => E::constant(1.0),
            Node::Neg(a) => E::neg(a.derivative()),
            Node::Add(a, b) => E::add(a.derivative(), b.derivative()),
            Node::Mul(a, b) => E::add(
                E::mul(a.derivative(), b.clone()),
                E::mul(a.clone(), b.derivative()),
            ),
            Node::Div(a, b) => {
                // (a'b - ab') / b^2
                let num = E::sub(
                    E::mul(a.derivative(), b.clone()),
                    E::mul(a.clone(), b.derivative()),
                );
                E::div(num, E::powi(b.clone(), 2))
            }
            Node::Pow(a, n) => {
                if *n == 0 {
                    return E::constant(0.0);
                }
                let outer = E::mul(E::constant(f64::from(*n)), E::powi(a.clone(), n - 1));
                E::mul(outer, a.derivative())
            }
            Node::Sqrt(a) => E::div(a.derivative(), E::mul(E::constant(2.0), self.clone())),
            Node::Sin(a) => E::mul(E::cos(a.clone()), a.derivative()),
            Node::Cos(a) => E::neg(E::mul(E::sin(a.clone()), a.derivative())),
            Node::Exp(a) => E::mul(self.clone(), a.derivative()),
        }
    }
}

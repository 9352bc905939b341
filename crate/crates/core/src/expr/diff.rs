use super::Expr;

/// Structural derivative; the caller simplifies.
pub(super) fn derivative(e: &Expr, var: &str) -> Expr {
    match e {
        Expr::Const(_) => Expr::zero(),
        Expr::Var(v) => {
            if v == var {
                Expr::one()
            } else {
                Expr::zero()
            }
        }
        Expr::Sum(xs) => Expr::sum(xs.iter().map(|x| derivative(x, var)).collect()),
        Expr::Product(xs) => {
            let mut terms = Vec::with_capacity(xs.len());
            for (i, x) in xs.iter().enumerate() {
                let dx = derivative(x, var);
                if dx.is_literal_zero() {
                    continue;
                }
                let mut factors: Vec<Expr> = xs
                    .iter()
                    .enumerate()
                    .filter(|(j, _)| *j != i)
                    .map(|(_, y)| y.clone())
                    .collect();
                factors.push(dx);
                terms.push(Expr::product(factors));
            }
            Expr::sum(terms)
        }
        Expr::Pow(b, k) => {
            if *k == 0 {
                return Expr::zero();
            }
            let db = derivative(b, var);
            if db.is_literal_zero() {
                return Expr::zero();
            }
            Expr::product(vec![Expr::int(*k), (**b).clone().pow(k - 1), db])
        }
        Expr::Neg(b) => -derivative(b, var),
        Expr::Sqrt(b) => {
            // d sqrt(u) = u' / (2 sqrt(u))
            let db = derivative(b, var);
            if db.is_literal_zero() {
                return Expr::zero();
            }
            Expr::product(vec![Expr::rational(1, 2), e.clone().pow(-1), db])
        }
    }
}

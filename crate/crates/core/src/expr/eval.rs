use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, One, Signed, ToPrimitive, Zero};
use thiserror::Error;

use super::{rational_pow, Expr};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("missing value for variable `{0}`")]
    MissingVariable(String),
    #[error("square root of a negative number")]
    NegativeSqrt,
    #[error("division by zero")]
    DivisionByZero,
    #[error("value is not a finite number")]
    NonFinite,
}

/// An evaluation result: exact while every input and operation is rational.
#[derive(Debug, Clone, PartialEq)]
pub enum Number {
    Exact(BigRational),
    Float(f64),
}

impl Number {
    pub fn from_f64(v: f64) -> Number {
        Number::Float(v)
    }

    pub fn from_i64(v: i64) -> Number {
        Number::Exact(BigRational::from_integer(BigInt::from(v)))
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Number::Exact(r) => r.to_f64().unwrap_or(f64::NAN),
            Number::Float(f) => *f,
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Number::Exact(_))
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Number::Exact(r) => r.is_zero(),
            Number::Float(f) => *f == 0.0,
        }
    }

    fn add(self, other: Number) -> Number {
        match (self, other) {
            (Number::Exact(a), Number::Exact(b)) => Number::Exact(a + b),
            (a, b) => Number::Float(a.to_f64() + b.to_f64()),
        }
    }

    fn mul(self, other: Number) -> Number {
        match (self, other) {
            (Number::Exact(a), Number::Exact(b)) => Number::Exact(a * b),
            (a, b) => Number::Float(a.to_f64() * b.to_f64()),
        }
    }

    fn neg(self) -> Number {
        match self {
            Number::Exact(a) => Number::Exact(-a),
            Number::Float(f) => Number::Float(-f),
        }
    }
}

impl fmt::Display for Number {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Number::Exact(r) if r.is_integer() => write!(f, "{}", r.numer()),
            Number::Exact(r) => write!(f, "{}/{}", r.numer(), r.denom()),
            Number::Float(v) => write!(f, "{v}"),
        }
    }
}

impl From<f64> for Number {
    fn from(v: f64) -> Self {
        Number::Float(v)
    }
}

impl From<BigRational> for Number {
    fn from(v: BigRational) -> Self {
        Number::Exact(v)
    }
}

/// Evaluates `e` at a point. The result is exact when the point is rational
/// and no irrational square root is taken.
pub fn evaluate(e: &Expr, at: &BTreeMap<String, Number>) -> Result<Number, EvalError> {
    match e {
        Expr::Const(c) => Ok(Number::Exact(c.clone())),
        Expr::Var(v) => at.get(v).cloned().ok_or_else(|| EvalError::MissingVariable(v.clone())),
        Expr::Sum(xs) => {
            let mut acc = Number::Exact(BigRational::zero());
            for x in xs {
                acc = acc.add(evaluate(x, at)?);
            }
            Ok(acc)
        }
        Expr::Product(xs) => {
            let mut acc = Number::Exact(BigRational::one());
            for x in xs {
                acc = acc.mul(evaluate(x, at)?);
            }
            Ok(acc)
        }
        Expr::Pow(b, k) => {
            let base = evaluate(b, at)?;
            if *k == 0 {
                return Ok(Number::Exact(BigRational::one()));
            }
            if *k < 0 && base.is_zero() {
                return Err(EvalError::DivisionByZero);
            }
            Ok(match base {
                Number::Exact(r) => Number::Exact(rational_pow(&r, *k)),
                Number::Float(f) => Number::Float(f.powi(*k as i32)),
            })
        }
        Expr::Neg(b) => Ok(evaluate(b, at)?.neg()),
        Expr::Sqrt(b) => match evaluate(b, at)? {
            Number::Exact(r) => {
                if r.is_negative() {
                    return Err(EvalError::NegativeSqrt);
                }
                let n = num_integer::Roots::sqrt(r.numer());
                let d = num_integer::Roots::sqrt(r.denom());
                if &(&n * &n) == r.numer() && &(&d * &d) == r.denom() {
                    Ok(Number::Exact(BigRational::new(n, d)))
                } else {
                    Ok(Number::Float(r.to_f64().unwrap_or(f64::NAN).sqrt()))
                }
            }
            Number::Float(f) => {
                if f < 0.0 {
                    Err(EvalError::NegativeSqrt)
                } else {
                    Ok(Number::Float(f.sqrt()))
                }
            }
        },
    }
}

/// Exact rational conversion of a finite float.
pub(crate) fn rational_from_f64(v: f64) -> Option<BigRational> {
    BigRational::from_f64(v)
}

#[derive(Debug, Clone)]
enum Node {
    Const(f64),
    Var(usize),
    Sum(Vec<Node>),
    Product(Vec<Node>),
    Pow(Box<Node>, i32),
    Neg(Box<Node>),
    Sqrt(Box<Node>),
}

/// An expression lowered to float arithmetic over indexed variables, used
/// wherever the same expression is evaluated many times.
#[derive(Debug, Clone)]
pub struct Compiled {
    root: Node,
}

impl Compiled {
    pub fn new(e: &Expr, vars: &[String]) -> Result<Compiled, EvalError> {
        Ok(Compiled { root: lower(e, vars)? })
    }

    /// Evaluates at `x`, indexed like the `vars` passed to [`Compiled::new`].
    /// Invalid operations produce NaN or infinities rather than errors.
    pub fn eval(&self, x: &[f64]) -> f64 {
        run(&self.root, x)
    }

    pub fn is_constant_zero(&self) -> bool {
        matches!(self.root, Node::Const(c) if c == 0.0)
    }
}

fn lower(e: &Expr, vars: &[String]) -> Result<Node, EvalError> {
    Ok(match e {
        Expr::Const(c) => Node::Const(c.to_f64().unwrap_or(f64::NAN)),
        Expr::Var(v) => Node::Var(
            vars.iter()
                .position(|x| x == v)
                .ok_or_else(|| EvalError::MissingVariable(v.clone()))?,
        ),
        Expr::Sum(xs) => Node::Sum(xs.iter().map(|x| lower(x, vars)).collect::<Result<_, _>>()?),
        Expr::Product(xs) => Node::Product(xs.iter().map(|x| lower(x, vars)).collect::<Result<_, _>>()?),
        Expr::Pow(b, k) => Node::Pow(Box::new(lower(b, vars)?), *k as i32),
        Expr::Neg(b) => Node::Neg(Box::new(lower(b, vars)?)),
        Expr::Sqrt(b) => Node::Sqrt(Box::new(lower(b, vars)?)),
    })
}

fn run(n: &Node, x: &[f64]) -> f64 {
    match n {
        Node::Const(c) => *c,
        Node::Var(i) => x[*i],
        Node::Sum(xs) => xs.iter().map(|c| run(c, x)).sum(),
        Node::Product(xs) => xs.iter().map(|c| run(c, x)).product(),
        Node::Pow(b, k) => {
            if *k == 0 {
                1.0
            } else {
                run(b, x).powi(*k)
            }
        }
        Node::Neg(b) => -run(b, x),
        Node::Sqrt(b) => run(b, x).sqrt(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_expr;

    fn at(pairs: &[(&str, i64)]) -> BTreeMap<String, Number> {
        pairs
            .iter()
            .map(|(k, v)| (k.to_string(), Number::from_i64(*v)))
            .collect()
    }

    #[test]
    fn difference_is_exact() {
        let v = evaluate(&parse_expr("x2-x1").unwrap(), &at(&[("x1", 1), ("x2", 3)])).unwrap();
        assert_eq!(v, Number::from_i64(2));
    }

    #[test]
    fn zero_to_the_zero_is_one() {
        let v = evaluate(&parse_expr("x^0").unwrap(), &at(&[("x", 0)])).unwrap();
        assert_eq!(v, Number::from_i64(1));
    }

    #[test]
    fn pythagorean_root_stays_exact() {
        let v = evaluate(&parse_expr("sqrt(x^2+y^2)").unwrap(), &at(&[("x", 3), ("y", 4)])).unwrap();
        assert_eq!(v, Number::from_i64(5));
        let v = evaluate(&parse_expr("sqrt(x)").unwrap(), &at(&[("x", 2)])).unwrap();
        assert!(!v.is_exact());
        assert!((v.to_f64() - std::f64::consts::SQRT_2).abs() < 1e-15);
    }

    #[test]
    fn errors() {
        let e = parse_expr("x + y").unwrap();
        assert_eq!(
            evaluate(&e, &at(&[("x", 1)])),
            Err(EvalError::MissingVariable("y".into()))
        );
        let e = parse_expr("sqrt(x - 2)").unwrap();
        assert_eq!(evaluate(&e, &at(&[("x", 1)])), Err(EvalError::NegativeSqrt));
        let e = parse_expr("1/x").unwrap();
        assert_eq!(evaluate(&e, &at(&[("x", 0)])), Err(EvalError::DivisionByZero));
    }

    #[test]
    fn compiled_matches_tree_evaluation() {
        let e = parse_expr("(x2-x1)^2 + 3/2*y - sqrt(y^2+1) + x1^(-1)").unwrap();
        let vars: Vec<String> = ["x1", "x2", "y"].iter().map(|s| s.to_string()).collect();
        let c = Compiled::new(&e, &vars).unwrap();
        let point = [0.5, -1.25, 2.0];
        let m: BTreeMap<String, Number> = vars
            .iter()
            .zip(point)
            .map(|(k, v)| (k.clone(), Number::from_f64(v)))
            .collect();
        let tree = evaluate(&e, &m).unwrap().to_f64();
        assert!((c.eval(&point) - tree).abs() < 1e-12);
        assert!(Compiled::new(&e, &vars[..2]).is_err());
    }
}

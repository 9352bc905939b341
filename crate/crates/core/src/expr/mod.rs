//! Symbolic scalar expressions over named real variables.
//!
//! Constants are exact rationals. The only non-rational operation is `sqrt`.
//! Every other module builds on this one: observation functions, vector
//! field components, objective restrictions and objectives are all [`Expr`]
//! values.

mod diff;
mod eval;
mod parse;
mod poly;
mod zero;

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

pub use eval::{evaluate, Compiled, EvalError, Number};
pub use parse::{parse_expr, parse_rational, parse_tuple, ParseError};
pub use zero::{is_zero, DomainBox, Interval, ZeroTester, ZeroVerdict, ZERO_SAMPLES, ZERO_SEED, ZERO_TOLERANCE};

/// A symbolic expression tree.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Expr {
    Const(BigRational),
    Var(String),
    Sum(Vec<Expr>),
    Product(Vec<Expr>),
    /// Integer power; negative exponents encode division.
    Pow(Box<Expr>, i64),
    Neg(Box<Expr>),
    Sqrt(Box<Expr>),
}

impl Expr {
    pub fn zero() -> Expr {
        Expr::Const(BigRational::zero())
    }

    pub fn one() -> Expr {
        Expr::Const(BigRational::one())
    }

    pub fn int(v: i64) -> Expr {
        Expr::Const(BigRational::from_integer(BigInt::from(v)))
    }

    pub fn var(name: impl Into<String>) -> Expr {
        Expr::Var(name.into())
    }

    pub fn rational(num: i64, den: i64) -> Expr {
        Expr::Const(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    pub fn pow(self, k: i64) -> Expr {
        Expr::Pow(Box::new(self), k)
    }

    pub fn sqrt(self) -> Expr {
        Expr::Sqrt(Box::new(self))
    }

    pub fn sum(terms: Vec<Expr>) -> Expr {
        match terms.len() {
            0 => Expr::zero(),
            1 => terms.into_iter().next().unwrap(),
            _ => Expr::Sum(terms),
        }
    }

    pub fn product(factors: Vec<Expr>) -> Expr {
        match factors.len() {
            0 => Expr::one(),
            1 => factors.into_iter().next().unwrap(),
            _ => Expr::Product(factors),
        }
    }

    /// `self - other`, unsimplified.
    pub fn minus(self, other: Expr) -> Expr {
        Expr::Sum(vec![self, -other])
    }

    pub fn is_literal_zero(&self) -> bool {
        matches!(self, Expr::Const(c) if c.is_zero())
    }

    pub fn as_const(&self) -> Option<&BigRational> {
        match self {
            Expr::Const(c) => Some(c),
            _ => None,
        }
    }

    pub fn contains_sqrt(&self) -> bool {
        match self {
            Expr::Const(_) | Expr::Var(_) => false,
            Expr::Sum(xs) | Expr::Product(xs) => xs.iter().any(Expr::contains_sqrt),
            Expr::Pow(b, _) | Expr::Neg(b) => b.contains_sqrt(),
            Expr::Sqrt(_) => true,
        }
    }

    /// Variables appearing anywhere in the tree, without simplifying first.
    pub fn syntactic_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<String>) {
        match self {
            Expr::Const(_) => {}
            Expr::Var(v) => {
                out.insert(v.clone());
            }
            Expr::Sum(xs) | Expr::Product(xs) => xs.iter().for_each(|x| x.collect_vars(out)),
            Expr::Pow(b, _) | Expr::Neg(b) | Expr::Sqrt(b) => b.collect_vars(out),
        }
    }

    /// Variables of the simplified expression, so `x1 - x1` has none.
    pub fn free_vars(&self) -> BTreeSet<String> {
        self.simplify().syntactic_vars()
    }

    /// Replaces variables by expressions. Unmapped variables are left alone.
    pub fn substitute(&self, map: &HashMap<String, Expr>) -> Expr {
        match self {
            Expr::Const(_) => self.clone(),
            Expr::Var(v) => map.get(v).cloned().unwrap_or_else(|| self.clone()),
            Expr::Sum(xs) => Expr::Sum(xs.iter().map(|x| x.substitute(map)).collect()),
            Expr::Product(xs) => Expr::Product(xs.iter().map(|x| x.substitute(map)).collect()),
            Expr::Pow(b, k) => Expr::Pow(Box::new(b.substitute(map)), *k),
            Expr::Neg(b) => Expr::Neg(Box::new(b.substitute(map))),
            Expr::Sqrt(b) => Expr::Sqrt(Box::new(b.substitute(map))),
        }
    }

    pub fn node_count(&self) -> usize {
        1 + match self {
            Expr::Const(_) | Expr::Var(_) => 0,
            Expr::Sum(xs) | Expr::Product(xs) => xs.iter().map(Expr::node_count).sum(),
            Expr::Pow(b, _) | Expr::Neg(b) | Expr::Sqrt(b) => b.node_count(),
        }
    }

    /// Returns an equivalent, canonical expression.
    ///
    /// Expressions whose expansion stays within the normal-form budget
    /// (total degree 16, 10^4 terms) are rewritten as a sorted sum of
    /// monomials, which collapses every polynomial identity. Larger
    /// expressions get local rewriting only: constant folding, flattening,
    /// and removal of neutral and absorbing elements.
    pub fn simplify(&self) -> Expr {
        match poly::Poly::from_expr(self) {
            Ok(p) => p.to_expr(),
            Err(_) => self.simplify_locally(),
        }
    }

    fn simplify_locally(&self) -> Expr {
        match self {
            Expr::Const(_) | Expr::Var(_) => self.clone(),
            Expr::Neg(b) => match b.simplify() {
                Expr::Const(c) => Expr::Const(-c),
                Expr::Neg(inner) => *inner,
                s => -s,
            },
            Expr::Sqrt(b) => match b.simplify() {
                Expr::Const(c) if c.is_zero() || c.is_one() => Expr::Const(c),
                s => s.sqrt(),
            },
            Expr::Pow(b, k) => {
                if *k == 0 {
                    return Expr::one();
                }
                match b.simplify() {
                    Expr::Const(c) if !c.is_zero() || *k > 0 => Expr::Const(rational_pow(&c, *k)),
                    s if *k == 1 => s,
                    s => s.pow(*k),
                }
            }
            Expr::Sum(xs) => {
                let mut constant = BigRational::zero();
                let mut terms = Vec::new();
                for x in xs {
                    match x.simplify() {
                        Expr::Const(c) => constant += c,
                        Expr::Sum(inner) => terms.extend(inner),
                        s => terms.push(s),
                    }
                }
                if !constant.is_zero() {
                    terms.push(Expr::Const(constant));
                }
                Expr::sum(terms)
            }
            Expr::Product(xs) => {
                let mut constant = BigRational::one();
                let mut factors = Vec::new();
                for x in xs {
                    match x.simplify() {
                        Expr::Const(c) => constant *= c,
                        Expr::Product(inner) => factors.extend(inner),
                        s => factors.push(s),
                    }
                }
                if constant.is_zero() {
                    return Expr::zero();
                }
                if !constant.is_one() {
                    factors.insert(0, Expr::Const(constant));
                }
                Expr::product(factors)
            }
        }
    }

    /// Partial derivative with respect to `var`, simplified.
    pub fn differentiate(&self, var: &str) -> Expr {
        diff::derivative(self, var).simplify()
    }
}

pub(crate) fn rational_pow(c: &BigRational, k: i64) -> BigRational {
    if k >= 0 {
        num_traits::pow(c.clone(), k as usize)
    } else {
        num_traits::pow(c.recip(), k.unsigned_abs() as usize)
    }
}

/// Convenience wrapper matching the free-function style used elsewhere.
pub fn differentiate(e: &Expr, var: &str) -> Expr {
    e.differentiate(var)
}

pub fn simplify(e: &Expr) -> Expr {
    e.simplify()
}

pub fn free_vars(e: &Expr) -> BTreeSet<String> {
    e.free_vars()
}

// Printing precedence: sum < product < unary minus < power < atom.
const PREC_SUM: u8 = 1;
const PREC_PRODUCT: u8 = 2;
const PREC_NEG: u8 = 3;
const PREC_POW: u8 = 4;
const PREC_ATOM: u8 = 5;

fn precedence(e: &Expr) -> u8 {
    match e {
        Expr::Const(c) => {
            if c.is_negative() {
                PREC_NEG
            } else if c.is_integer() {
                PREC_ATOM
            } else {
                PREC_PRODUCT
            }
        }
        Expr::Var(_) | Expr::Sqrt(_) => PREC_ATOM,
        Expr::Sum(xs) if xs.len() > 1 => PREC_SUM,
        Expr::Product(xs) if xs.len() > 1 => PREC_PRODUCT,
        Expr::Sum(xs) | Expr::Product(xs) => xs.first().map(precedence).unwrap_or(PREC_ATOM),
        Expr::Neg(_) => PREC_NEG,
        Expr::Pow(..) => PREC_POW,
    }
}

fn write_with(f: &mut fmt::Formatter<'_>, e: &Expr, min_prec: u8) -> fmt::Result {
    if precedence(e) < min_prec {
        write!(f, "(")?;
        write!(f, "{e}")?;
        write!(f, ")")
    } else {
        write!(f, "{e}")
    }
}

impl std::ops::Neg for Expr {
    type Output = Expr;

    fn neg(self) -> Expr {
        Expr::Neg(Box::new(self))
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(c) => {
                if c.is_integer() {
                    write!(f, "{}", c.numer())
                } else {
                    write!(f, "{}/{}", c.numer(), c.denom())
                }
            }
            Expr::Var(v) => write!(f, "{v}"),
            Expr::Sum(xs) => {
                if xs.is_empty() {
                    return write!(f, "0");
                }
                for (i, x) in xs.iter().enumerate() {
                    if i == 0 {
                        write_with(f, x, PREC_SUM)?;
                        continue;
                    }
                    match x {
                        Expr::Neg(inner) => {
                            write!(f, " - ")?;
                            write_with(f, inner, PREC_PRODUCT)?;
                        }
                        Expr::Const(c) if c.is_negative() => {
                            write!(f, " - ")?;
                            write_with(f, &Expr::Const(-c.clone()), PREC_PRODUCT)?;
                        }
                        _ => {
                            write!(f, " + ")?;
                            write_with(f, x, PREC_PRODUCT)?;
                        }
                    }
                }
                Ok(())
            }
            Expr::Product(xs) => {
                if xs.is_empty() {
                    return write!(f, "1");
                }
                for (i, x) in xs.iter().enumerate() {
                    if i > 0 {
                        write!(f, "*")?;
                    }
                    // A rational constant prints as `p/q`, so it needs
                    // parentheses anywhere but the leading position.
                    let min = if i == 0 { PREC_PRODUCT } else { PREC_NEG };
                    match x {
                        Expr::Const(c) if i > 0 && !c.is_integer() => {
                            write!(f, "({x})")?;
                        }
                        _ => write_with(f, x, min)?,
                    }
                }
                Ok(())
            }
            Expr::Pow(b, k) => {
                write_with(f, b, PREC_ATOM)?;
                if *k < 0 {
                    write!(f, "^({k})")
                } else {
                    write!(f, "^{k}")
                }
            }
            Expr::Neg(b) => {
                write!(f, "-")?;
                write_with(f, b, PREC_NEG)
            }
            Expr::Sqrt(b) => write!(f, "sqrt({b})"),
        }
    }
}

impl serde::Serialize for Expr {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> serde::Deserialize<'de> for Expr {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Expr, D::Error> {
        let text = String::deserialize(d)?;
        parse_expr(&text).map_err(serde::de::Error::custom)
    }
}

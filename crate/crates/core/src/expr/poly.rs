//! Sparse multivariate normal form.
//!
//! An expression is expanded into a sum of monomials over *atoms*. An atom
//! is a variable, the reciprocal of a non-monomial polynomial, or the square
//! root of a polynomial. Exponents on atoms may be negative. Two expressions
//! with equal normal forms are equal as functions on their common domain.
//! The converse holds for polynomials (and Laurent polynomials) in variables
//! only, which is what makes the zero test exact for them.

use std::collections::btree_map::Entry;
use std::collections::BTreeMap;

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::{rational_pow, Expr};

pub(crate) const MAX_DEGREE: u32 = 16;
pub(crate) const MAX_TERMS: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct TooLarge;

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub(crate) enum Atom {
    Var(String),
    Recip(Poly),
    Sqrt(Poly),
}

/// Sorted atom/exponent pairs with nonzero exponents.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord)]
pub(crate) struct Monomial(Vec<(Atom, i64)>);

impl Monomial {
    fn degree(&self) -> u32 {
        self.0.iter().map(|(_, e)| e.unsigned_abs() as u32).sum()
    }

    fn mul(&self, other: &Monomial) -> Monomial {
        let mut out: Vec<(Atom, i64)> = Vec::with_capacity(self.0.len() + other.0.len());
        let (mut i, mut j) = (0, 0);
        while i < self.0.len() || j < other.0.len() {
            let take_left = match (self.0.get(i), other.0.get(j)) {
                (Some(a), Some(b)) => match a.0.cmp(&b.0) {
                    std::cmp::Ordering::Less => Some(true),
                    std::cmp::Ordering::Greater => Some(false),
                    std::cmp::Ordering::Equal => None,
                },
                (Some(_), None) => Some(true),
                (None, _) => Some(false),
            };
            match take_left {
                Some(true) => {
                    out.push(self.0[i].clone());
                    i += 1;
                }
                Some(false) => {
                    out.push(other.0[j].clone());
                    j += 1;
                }
                None => {
                    let e = self.0[i].1 + other.0[j].1;
                    if e != 0 {
                        out.push((self.0[i].0.clone(), e));
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        Monomial(out)
    }

    fn pow(&self, k: i64) -> Monomial {
        if k == 0 {
            return Monomial::default();
        }
        Monomial(self.0.iter().map(|(a, e)| (a.clone(), e * k)).collect())
    }

    fn has_high_sqrt_power(&self) -> bool {
        self.0.iter().any(|(a, e)| matches!(a, Atom::Sqrt(_)) && e.abs() >= 2)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord)]
pub(crate) struct Poly {
    terms: BTreeMap<Monomial, BigRational>,
}

impl Poly {
    pub(crate) fn zero() -> Poly {
        Poly::default()
    }

    pub(crate) fn constant(c: BigRational) -> Poly {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(Monomial::default(), c);
        }
        Poly { terms }
    }

    fn atom(a: Atom) -> Poly {
        let mut terms = BTreeMap::new();
        terms.insert(Monomial(vec![(a, 1)]), BigRational::one());
        Poly { terms }
    }

    pub(crate) fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub(crate) fn as_constant(&self) -> Option<BigRational> {
        match self.terms.len() {
            0 => Some(BigRational::zero()),
            1 => {
                let (m, c) = self.terms.iter().next().unwrap();
                m.0.is_empty().then(|| c.clone())
            }
            _ => None,
        }
    }

    fn single_term(&self) -> Option<(&Monomial, &BigRational)> {
        if self.terms.len() == 1 {
            self.terms.iter().next()
        } else {
            None
        }
    }

    pub(crate) fn degree(&self) -> u32 {
        self.terms.keys().map(Monomial::degree).max().unwrap_or(0)
    }

    /// True when every atom is a variable: a (Laurent) polynomial, for which
    /// a zero normal form is equivalent to being the zero function.
    pub(crate) fn is_plain(&self) -> bool {
        self.terms
            .keys()
            .all(|m| m.0.iter().all(|(a, _)| matches!(a, Atom::Var(_))))
    }

    fn check(self) -> Result<Poly, TooLarge> {
        if self.terms.len() > MAX_TERMS || self.degree() > MAX_DEGREE {
            Err(TooLarge)
        } else {
            Ok(self)
        }
    }

    fn add_term(&mut self, m: Monomial, c: BigRational) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
            Entry::Vacant(v) => {
                v.insert(c);
            }
        }
    }

    pub(crate) fn add(mut self, other: Poly) -> Poly {
        for (m, c) in other.terms {
            self.add_term(m, c);
        }
        self
    }

    pub(crate) fn neg(mut self) -> Poly {
        for c in self.terms.values_mut() {
            *c = -c.clone();
        }
        self
    }

    fn scale(mut self, k: &BigRational) -> Poly {
        if k.is_zero() {
            return Poly::zero();
        }
        for c in self.terms.values_mut() {
            *c *= k;
        }
        self
    }

    pub(crate) fn mul(&self, other: &Poly) -> Result<Poly, TooLarge> {
        if self.terms.len().saturating_mul(other.terms.len()) > MAX_TERMS * 16 {
            return Err(TooLarge);
        }
        let mut out = Poly::zero();
        let mut needs_reduction = false;
        for (m1, c1) in &self.terms {
            for (m2, c2) in &other.terms {
                let m = m1.mul(m2);
                needs_reduction |= m.has_high_sqrt_power();
                out.add_term(m, c1 * c2);
            }
        }
        let out = out.check()?;
        if needs_reduction {
            out.reduce_sqrt_powers()
        } else {
            Ok(out)
        }
    }

    /// Rewrites `sqrt(P)^(2q + r)` as `P^q * sqrt(P)^r`, valid wherever the
    /// square root is defined.
    fn reduce_sqrt_powers(self) -> Result<Poly, TooLarge> {
        let mut out = Poly::zero();
        for (m, c) in self.terms {
            if !m.has_high_sqrt_power() {
                out.add_term(m, c);
                continue;
            }
            let mut rest = Vec::new();
            let mut factor = Poly::constant(c);
            for (a, e) in m.0 {
                match a {
                    Atom::Sqrt(inner) if e.abs() >= 2 => {
                        let q = e / 2;
                        let r = e % 2;
                        factor = factor.mul(&inner.pow(q)?)?;
                        if r != 0 {
                            rest.push((Atom::Sqrt(inner), r));
                        }
                    }
                    other => rest.push((other, e)),
                }
            }
            let rest_poly = Poly {
                terms: std::iter::once((Monomial(rest), BigRational::one())).collect(),
            };
            out = out.add(factor.mul(&rest_poly)?);
        }
        out.check()
    }

    pub(crate) fn pow(&self, k: i64) -> Result<Poly, TooLarge> {
        if k == 0 {
            return Ok(Poly::constant(BigRational::one()));
        }
        if let Some((m, c)) = self.single_term() {
            let mut terms = BTreeMap::new();
            terms.insert(m.pow(k), rational_pow(c, k));
            let p = Poly { terms }.check()?;
            return if p.terms.keys().any(Monomial::has_high_sqrt_power) {
                p.reduce_sqrt_powers()
            } else {
                Ok(p)
            };
        }
        if self.is_zero() {
            // 0^k for k < 0 is undefined; keep it symbolic via Recip(0) is
            // not meaningful, so report it as not normalizable.
            return if k > 0 { Ok(Poly::zero()) } else { Err(TooLarge) };
        }
        if k < 0 {
            let (lead_c, monic) = self.monic();
            let recip = Poly::atom(Atom::Recip(monic)).scale(&lead_c.recip());
            return recip.pow(-k);
        }
        if (k as u64).saturating_mul(self.degree() as u64) > MAX_DEGREE as u64 {
            return Err(TooLarge);
        }
        let mut result = Poly::constant(BigRational::one());
        let mut base = self.clone();
        let mut e = k as u64;
        while e > 0 {
            if e & 1 == 1 {
                result = result.mul(&base)?;
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base)?;
            }
        }
        Ok(result)
    }

    /// Splits off the coefficient of the largest monomial so that the
    /// remaining polynomial has leading coefficient one.
    fn monic(&self) -> (BigRational, Poly) {
        let lead = self
            .terms
            .values()
            .next_back()
            .cloned()
            .unwrap_or_else(BigRational::one);
        let inv = lead.recip();
        (lead, self.clone().scale(&inv))
    }

    fn sqrt(self) -> Result<Poly, TooLarge> {
        if let Some(c) = self.as_constant() {
            if let Some(r) = rational_sqrt(&c) {
                return Ok(Poly::constant(r));
            }
        }
        // Pull a perfect-square positive leading coefficient out of the root.
        let lead = self
            .terms
            .values()
            .next_back()
            .cloned()
            .unwrap_or_else(BigRational::one);
        if lead.is_positive() && !lead.is_one() {
            if let Some(r) = rational_sqrt(&lead) {
                let inner = self.scale(&lead.recip());
                return Ok(Poly::atom(Atom::Sqrt(inner)).scale(&r));
            }
        }
        Ok(Poly::atom(Atom::Sqrt(self)))
    }

    pub(crate) fn from_expr(e: &Expr) -> Result<Poly, TooLarge> {
        match e {
            Expr::Const(c) => Ok(Poly::constant(c.clone())),
            Expr::Var(v) => Ok(Poly::atom(Atom::Var(v.clone()))),
            Expr::Sum(xs) => {
                let mut acc = Poly::zero();
                for x in xs {
                    acc = acc.add(Poly::from_expr(x)?);
                }
                acc.check()
            }
            Expr::Product(xs) => {
                let mut acc = Poly::constant(BigRational::one());
                for x in xs {
                    let p = Poly::from_expr(x)?;
                    if p.is_zero() {
                        return Ok(Poly::zero());
                    }
                    acc = acc.mul(&p)?;
                }
                Ok(acc)
            }
            Expr::Pow(b, k) => Poly::from_expr(b)?.pow(*k),
            Expr::Neg(b) => Ok(Poly::from_expr(b)?.neg()),
            Expr::Sqrt(b) => Poly::from_expr(b)?.sqrt(),
        }
    }

    pub(crate) fn to_expr(&self) -> Expr {
        let mut terms = Vec::with_capacity(self.terms.len());
        let mut constant = None;
        for (m, c) in &self.terms {
            if m.0.is_empty() {
                constant = Some(Expr::Const(c.clone()));
                continue;
            }
            let mut factors: Vec<Expr> = m.0.iter().map(|(a, e)| atom_power_expr(a, *e)).collect();
            let magnitude = c.abs();
            if !magnitude.is_one() {
                factors.insert(0, Expr::Const(magnitude));
            }
            let term = Expr::product(factors);
            terms.push(if c.is_negative() { -term } else { term });
        }
        if let Some(c) = constant {
            terms.push(c);
        }
        Expr::sum(terms)
    }
}

fn atom_power_expr(a: &Atom, e: i64) -> Expr {
    let (base, e) = match a {
        Atom::Var(v) => (Expr::Var(v.clone()), e),
        Atom::Recip(p) => (p.to_expr(), -e),
        Atom::Sqrt(p) => (p.to_expr().sqrt(), e),
    };
    if e == 1 {
        base
    } else {
        base.pow(e)
    }
}

fn rational_sqrt(c: &BigRational) -> Option<BigRational> {
    if c.is_negative() {
        return None;
    }
    let n = c.numer();
    let d = c.denom();
    let rn = n.sqrt();
    let rd = d.sqrt();
    if &(&rn * &rn) == n && &(&rd * &rd) == d {
        Some(BigRational::new(rn, rd))
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_expr;

    fn nf(s: &str) -> Poly {
        Poly::from_expr(&parse_expr(s).unwrap()).unwrap()
    }

    #[test]
    fn polynomial_identities_vanish() {
        assert!(nf("(x+1)^2 - x^2 - 2*x - 1").is_zero());
        assert!(nf("(a-b)*(a+b) - a^2 + b^2").is_zero());
        assert!(nf("x*x^(-1) - 1").is_zero());
    }

    #[test]
    fn reciprocals_are_normalized_to_monic() {
        assert_eq!(nf("1/(2*x+2)"), nf("(1/2)/(x+1)"));
        assert!(!nf("1/(x+1)").is_plain());
    }

    #[test]
    fn sqrt_powers_reduce() {
        assert!(nf("sqrt(x^2+y^2)^2 - x^2 - y^2").is_zero());
        assert!(nf("sqrt(4*x+4) - 2*sqrt(x+1)").is_zero());
        assert!(nf("sqrt(9/4)").as_constant() == Some(BigRational::new(3.into(), 2.into())));
    }

    #[test]
    fn budget_is_enforced() {
        assert!(Poly::from_expr(&parse_expr("(x+y)^17").unwrap()).is_err());
        assert!(Poly::from_expr(&parse_expr("(x+y)^16").unwrap()).is_ok());
        assert!(Poly::from_expr(&parse_expr("x^40").unwrap()).is_err());
    }
}

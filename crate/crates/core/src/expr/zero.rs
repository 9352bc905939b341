//! Identically-zero testing over a box domain.
//!
//! Polynomials are decided exactly from their normal form. Other sqrt-free
//! expressions are evaluated in exact rational arithmetic at deterministic
//! pseudorandom rational points; a nonzero rational function vanishes at
//! such a point with negligible probability. Expressions that keep a square
//! root after normalization are sampled in floating point and can only be
//! refuted, never certified.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::eval::rational_from_f64;
use super::poly::Poly;
use super::{evaluate, Expr, Number};

pub const ZERO_TOLERANCE: f64 = 1e-9;
pub const ZERO_SAMPLES: usize = 64;
pub const ZERO_SEED: u64 = 0xDECE;

const GRID: u32 = 1 << 16;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub const DEFAULT: Interval = Interval { lo: -1.0, hi: 1.0 };

    pub fn new(lo: f64, hi: f64) -> Interval {
        Interval { lo, hi }
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, v: f64) -> bool {
        v >= self.lo && v <= self.hi
    }
}

/// Per-variable intervals; undeclared variables range over `[-1, 1]`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DomainBox {
    pub intervals: BTreeMap<String, Interval>,
}

impl DomainBox {
    pub fn new() -> DomainBox {
        DomainBox::default()
    }

    pub fn with(mut self, var: &str, lo: f64, hi: f64) -> DomainBox {
        self.intervals.insert(var.to_string(), Interval::new(lo, hi));
        self
    }

    pub fn get(&self, var: &str) -> Interval {
        self.intervals.get(var).copied().unwrap_or(Interval::DEFAULT)
    }

    pub fn set(&mut self, var: &str, interval: Interval) {
        self.intervals.insert(var.to_string(), interval);
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum ZeroVerdict {
    IdenticallyZero,
    NotIdenticallyZero {
        /// A point where `|value|` exceeds the scaled tolerance.
        witness: BTreeMap<String, f64>,
        value: f64,
    },
    Unknown,
}

impl ZeroVerdict {
    pub fn is_identically_zero(&self) -> bool {
        matches!(self, ZeroVerdict::IdenticallyZero)
    }

    pub fn is_nonzero(&self) -> bool {
        matches!(self, ZeroVerdict::NotIdenticallyZero { .. })
    }
}

/// Decides whether `e` vanishes identically on `domain`, with the default
/// tolerance, sample count and seed.
pub fn is_zero(e: &Expr, domain: &DomainBox) -> ZeroVerdict {
    ZeroTester::default().test(e, domain)
}

#[derive(Debug, Clone, Copy)]
pub struct ZeroTester {
    pub tolerance: f64,
    pub samples: usize,
    pub seed: u64,
}

impl Default for ZeroTester {
    fn default() -> Self {
        ZeroTester {
            tolerance: ZERO_TOLERANCE,
            samples: ZERO_SAMPLES,
            seed: ZERO_SEED,
        }
    }
}

enum Mode {
    /// Any sample is a valid witness search; the verdict is already known
    /// to be nonzero.
    Refute,
    /// Exact rational sampling: all-zero samples certify zero.
    Exact,
    /// Float sampling: all-small samples are inconclusive.
    Float,
}

impl ZeroTester {
    pub fn test(&self, e: &Expr, domain: &DomainBox) -> ZeroVerdict {
        let mode = match Poly::from_expr(e) {
            Ok(p) if p.is_zero() => return ZeroVerdict::IdenticallyZero,
            Ok(p) if p.is_plain() => Mode::Refute,
            _ if !e.contains_sqrt() => Mode::Exact,
            _ => Mode::Float,
        };
        self.sample(e, domain, mode)
    }

    fn sample(&self, e: &Expr, domain: &DomainBox, mode: Mode) -> ZeroVerdict {
        let vars: Vec<String> = e.syntactic_vars().into_iter().collect();
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let mut valid = 0usize;
        let mut any_exact_nonzero = false;
        let max_draws = self.samples * 8;
        let budget = match mode {
            Mode::Refute => max_draws,
            _ => self.samples,
        };
        for _ in 0..max_draws {
            if valid >= budget {
                break;
            }
            let point = self.draw(&vars, domain, &mut rng, !matches!(mode, Mode::Float));
            let Ok(value) = evaluate(e, &point) else {
                continue;
            };
            valid += 1;
            let v = value.to_f64();
            if !value.is_zero() {
                any_exact_nonzero |= value.is_exact();
            }
            if v.is_finite() && v.abs() > self.tolerance * term_scale(e, &point) {
                let witness = point.iter().map(|(k, n)| (k.clone(), n.to_f64())).collect();
                return ZeroVerdict::NotIdenticallyZero { witness, value: v };
            }
        }
        match mode {
            Mode::Exact if valid > 0 && !any_exact_nonzero => ZeroVerdict::IdenticallyZero,
            _ => ZeroVerdict::Unknown,
        }
    }

    fn draw(&self, vars: &[String], domain: &DomainBox, rng: &mut ChaCha8Rng, exact: bool) -> BTreeMap<String, Number> {
        vars.iter()
            .map(|v| {
                let iv = domain.get(v);
                let k: u32 = rng.random_range(0..=GRID);
                let value = if exact {
                    let lo = rational_from_f64(iv.lo).expect("finite box bound");
                    let hi = rational_from_f64(iv.hi).expect("finite box bound");
                    let frac = num_rational::BigRational::new(k.into(), GRID.into());
                    Number::Exact(&lo + (hi - &lo) * frac)
                } else {
                    Number::Float(iv.lo + iv.width() * (k as f64 / GRID as f64))
                };
                (v.clone(), value)
            })
            .collect()
    }
}

/// `max(1, sum of |top-level terms|)` at a point.
fn term_scale(e: &Expr, at: &BTreeMap<String, Number>) -> f64 {
    let terms: &[Expr] = match e {
        Expr::Sum(xs) => xs,
        other => std::slice::from_ref(other),
    };
    let total: f64 = terms
        .iter()
        .filter_map(|t| evaluate(t, at).ok())
        .map(|n| n.to_f64().abs())
        .filter(|v| v.is_finite())
        .sum();
    total.max(1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_expr;

    fn verdict(s: &str) -> ZeroVerdict {
        is_zero(&parse_expr(s).unwrap(), &DomainBox::new())
    }

    #[test]
    fn cancellation_is_identically_zero() {
        assert_eq!(verdict("x1 - x1"), ZeroVerdict::IdenticallyZero);
    }

    #[test]
    fn partial_of_unrelated_difference_is_zero() {
        let e = parse_expr("z2 - z3").unwrap().differentiate("z1");
        assert!(is_zero(&e, &DomainBox::new()).is_identically_zero());
    }

    #[test]
    fn positive_polynomial_has_witness() {
        match verdict("x1^2 + 1") {
            ZeroVerdict::NotIdenticallyZero { witness, value } => {
                assert!(value >= 1.0);
                assert!(witness["x1"].abs() <= 1.0);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn rational_identity_is_certified_by_exact_sampling() {
        // Not recognised by the normal form, decided by rational sampling.
        assert_eq!(verdict("x/(x+3) + 3/(x+3) - 1"), ZeroVerdict::IdenticallyZero);
        assert!(verdict("x/(x+3) - 1").is_nonzero());
    }

    #[test]
    fn sqrt_identities_without_normal_form_are_unknown() {
        // |x| - sqrt(x^2) style identity the normal form cannot see.
        assert_eq!(verdict("sqrt(x^2*y^2) - sqrt(x^2)*sqrt(y^2)"), ZeroVerdict::Unknown);
        assert!(verdict("sqrt(x^2 + 1) - 1").is_nonzero());
        assert_eq!(verdict("0*sqrt(x)"), ZeroVerdict::IdenticallyZero);
    }

    #[test]
    fn witness_respects_box() {
        let domain = DomainBox::new().with("x", 2.0, 3.0);
        match is_zero(&parse_expr("x - 1").unwrap(), &domain) {
            ZeroVerdict::NotIdenticallyZero { witness, .. } => assert!((2.0..=3.0).contains(&witness["x"])),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn deterministic() {
        let a = verdict("x*y - 3*z + w^3");
        let b = verdict("x*y - 3*z + w^3");
        assert_eq!(a, b);
    }
}

//! Finite formal sums `sum a_i p^{c_i}` with rational coefficients.
//!
//! Exponents are arbitrary-size integers, so a power sum can name numbers
//! whose binary expansion would be far too large to write down. Valuations
//! are computed symbolically and the value is only materialized on request.

use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::arith::{format_rational, unit_part, ExtInt, Prime, Rational};
use crate::error::{Error, Result};

/// Default bound on `|exponent|` for [`PowerSum::materialize`].
pub const DEFAULT_GUARD: u64 = 1 << 20;

/// Materialization guard, overridable through `PADIC_GUARD`.
pub fn guard_from_env() -> u64 {
    std::env::var("PADIC_GUARD")
        .ok()
        .and_then(|s| s.trim().parse().ok())
        .unwrap_or(DEFAULT_GUARD)
}

/// Terms are kept sorted by exponent, with distinct exponents and nonzero
/// coefficients. Coefficients may have any valuation, so two different
/// term lists can denote the same number.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PowerSum {
    prime: Prime,
    terms: Vec<(Rational, BigInt)>,
}

impl PowerSum {
    pub fn zero(prime: Prime) -> Self {
        PowerSum {
            prime,
            terms: Vec::new(),
        }
    }

    pub fn constant(prime: Prime, value: Rational) -> Self {
        Self::monomial(prime, value, BigInt::zero())
    }

    /// `coefficient * p^exponent`.
    pub fn monomial(prime: Prime, coefficient: Rational, exponent: BigInt) -> Self {
        let mut terms = Vec::new();
        if !coefficient.is_zero() {
            terms.push((coefficient, exponent));
        }
        PowerSum { prime, terms }
    }

    /// Builds the normal form of an arbitrary term list.
    pub fn from_terms(prime: Prime, terms: impl IntoIterator<Item = (Rational, BigInt)>) -> Self {
        let mut raw: Vec<(Rational, BigInt)> = terms.into_iter().collect();
        raw.sort_by(|a, b| a.1.cmp(&b.1));
        let mut out: Vec<(Rational, BigInt)> = Vec::with_capacity(raw.len());
        for (a, c) in raw {
            match out.last_mut() {
                Some(last) if last.1 == c => last.0 += a,
                _ => out.push((a, c)),
            }
        }
        out.retain(|(a, _)| !a.is_zero());
        PowerSum { prime, terms: out }
    }

    pub fn prime(&self) -> Prime {
        self.prime
    }

    pub fn terms(&self) -> &[(Rational, BigInt)] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    /// True when there are no terms. A nonempty sum can still be zero.
    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// True when the value is exactly zero.
    pub fn is_zero(&self) -> bool {
        self.valuation() == ExtInt::PosInf
    }

    fn check_prime(&self, other: &PowerSum) -> Result<()> {
        if self.prime != other.prime {
            return Err(Error::PrimeMismatch(self.prime.get(), other.prime.get()));
        }
        Ok(())
    }

    pub fn add(&self, other: &PowerSum) -> Result<PowerSum> {
        self.check_prime(other)?;
        Ok(self.add_unchecked(other))
    }

    pub fn sub(&self, other: &PowerSum) -> Result<PowerSum> {
        self.check_prime(other)?;
        Ok(self.add_unchecked(&other.neg()))
    }

    /// Merge of two sorted term lists. Both sides must share the prime.
    pub(crate) fn add_unchecked(&self, other: &PowerSum) -> PowerSum {
        debug_assert_eq!(self.prime, other.prime);
        let mut out = Vec::with_capacity(self.terms.len() + other.terms.len());
        let (mut i, mut j) = (0, 0);
        let (a, b) = (&self.terms, &other.terms);
        while i < a.len() && j < b.len() {
            match a[i].1.cmp(&b[j].1) {
                std::cmp::Ordering::Less => {
                    out.push(a[i].clone());
                    i += 1;
                }
                std::cmp::Ordering::Greater => {
                    out.push(b[j].clone());
                    j += 1;
                }
                std::cmp::Ordering::Equal => {
                    let s = &a[i].0 + &b[j].0;
                    if !s.is_zero() {
                        out.push((s, a[i].1.clone()));
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&a[i..]);
        out.extend_from_slice(&b[j..]);
        PowerSum {
            prime: self.prime,
            terms: out,
        }
    }

    /// `self + factor * other`.
    pub(crate) fn add_scaled(&self, factor: &Rational, other: &PowerSum) -> PowerSum {
        if factor.is_zero() {
            return self.clone();
        }
        self.add_unchecked(&other.scale(factor))
    }

    pub fn scale(&self, r: &Rational) -> PowerSum {
        if r.is_zero() {
            return PowerSum::zero(self.prime);
        }
        PowerSum {
            prime: self.prime,
            terms: self.terms.iter().map(|(a, c)| (a * r, c.clone())).collect(),
        }
    }

    pub fn neg(&self) -> PowerSum {
        PowerSum {
            prime: self.prime,
            terms: self.terms.iter().map(|(a, c)| (-a, c.clone())).collect(),
        }
    }

    /// Multiplication by `p^k`.
    pub fn shift(&self, k: &BigInt) -> PowerSum {
        PowerSum {
            prime: self.prime,
            terms: self.terms.iter().map(|(a, c)| (a.clone(), c + k)).collect(),
        }
    }

    /// `v_p` of the value, computed without materializing it.
    ///
    /// Every pair is rewritten with a unit coefficient, then the two pairs of
    /// smallest exponent are merged until the minimum is attained once.
    pub fn valuation(&self) -> ExtInt {
        let p = self.prime;
        let mut pairs: Vec<(Rational, BigInt)> = Vec::with_capacity(self.terms.len());
        let push_unit = |pairs: &mut Vec<(Rational, BigInt)>, a: Rational, c: BigInt| {
            if a.is_zero() {
                return;
            }
            let (u, v) = unit_part(&a, p);
            pairs.push((u, c + BigInt::from(v)));
        };
        for (a, c) in &self.terms {
            push_unit(&mut pairs, a.clone(), c.clone());
        }
        loop {
            if pairs.is_empty() {
                return ExtInt::PosInf;
            }
            let min = pairs.iter().map(|t| &t.1).min().unwrap().clone();
            let at_min: Vec<usize> = pairs
                .iter()
                .enumerate()
                .filter(|(_, t)| t.1 == min)
                .map(|(i, _)| i)
                .take(2)
                .collect();
            if at_min.len() == 1 {
                return ExtInt::Fin(min);
            }
            let second = pairs.swap_remove(at_min[1]);
            let first = pairs.swap_remove(at_min[0]);
            push_unit(&mut pairs, first.0 + second.0, min);
        }
    }

    /// The exact rational value, provided every `|exponent| <= guard`.
    pub fn materialize(&self, guard: u64) -> Result<Rational> {
        let guard_big = BigInt::from(guard);
        for (_, c) in &self.terms {
            if c.abs() > guard_big {
                return Err(Error::GuardExceeded {
                    exponent: c.clone(),
                    guard,
                });
            }
        }
        let base = self.prime.to_bigint();
        let mut sum = Rational::zero();
        for (a, c) in &self.terms {
            let e = c.to_i64().expect("exponent within guard");
            let mag = num_traits::pow(base.clone(), e.unsigned_abs() as usize);
            if e >= 0 {
                sum += a * Rational::from_integer(mag);
            } else {
                sum += a / Rational::from_integer(mag);
            }
        }
        Ok(sum)
    }

    /// The value when it is a plain rational (all exponents zero).
    pub fn as_constant(&self) -> Option<Rational> {
        match self.terms.as_slice() {
            [] => Some(Rational::zero()),
            [(a, c)] if c.is_zero() => Some(a.clone()),
            _ => None,
        }
    }
}

impl fmt::Display for PowerSum {
    /// `coefficient@exponent` pairs separated by spaces; `0` when empty.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0@0");
        }
        for (i, (a, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "{}@{}", format_rational(a), c)?;
        }
        Ok(())
    }
}

/// `sum a_i x_i` for power-sum valued `x_i` sharing one prime.
pub fn linear_combination(prime: Prime, coeffs: &[Rational], xs: &[PowerSum]) -> PowerSum {
    let mut acc = PowerSum::zero(prime);
    for (a, x) in coeffs.iter().zip(xs) {
        acc = acc.add_scaled(a, x);
    }
    acc
}

impl PowerSum {
    /// `p^k` with a unit coefficient.
    pub fn power(prime: Prime, k: BigInt) -> PowerSum {
        PowerSum::monomial(prime, Rational::one(), k)
    }
}

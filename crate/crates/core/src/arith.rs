//! Rationals, primes, extended integers and p-adic valuations.

use std::cmp::Ordering;
use std::fmt;
use std::ops::Neg;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Exact rational number in lowest terms with a positive denominator.
pub type Rational = num_rational::BigRational;

pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn rat_int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Renders `n` or `n/d`.
pub fn format_rational(q: &Rational) -> String {
    if q.denom().is_one() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

/// Parses `n` or `n/d` (optional sign on the numerator).
pub fn parse_rational(s: &str) -> Option<Rational> {
    let (n, d) = match s.split_once('/') {
        Some((n, d)) => (n, d),
        None => (s, "1"),
    };
    let n: BigInt = n.trim().parse().ok()?;
    let d: BigInt = d.trim().parse().ok()?;
    if d.is_zero() || d.is_negative() {
        return None;
    }
    Some(Rational::new(n, d))
}

/// A prime number.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Prime(u64);

impl Prime {
    pub fn new(p: u64) -> Result<Self> {
        if is_prime(p) {
            Ok(Prime(p))
        } else {
            Err(Error::NotPrime(p.to_string()))
        }
    }

    pub fn get(self) -> u64 {
        self.0
    }

    pub fn to_bigint(self) -> BigInt {
        BigInt::from(self.0)
    }

    /// `p^e` as a rational, for any integer `e`. Callers keep `|e|` small.
    pub fn pow(self, e: i64) -> Rational {
        let base = self.to_bigint();
        let mag = num_traits::pow(base, e.unsigned_abs() as usize);
        if e >= 0 {
            Rational::from_integer(mag)
        } else {
            Rational::new(BigInt::one(), mag)
        }
    }
}

impl fmt::Display for Prime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Deterministic Miller-Rabin for the full `u64` range.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    const BASES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    for &b in &BASES {
        if n % b == 0 {
            return n == b;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    'outer: for &a in &BASES {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'outer;
            }
        }
        return false;
    }
    true
}

/// An integer extended by `-inf` and `+inf`.
///
/// The derived order is the intended one: `NegInf < Fin(_) < PosInf`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ExtInt {
    NegInf,
    Fin(BigInt),
    PosInf,
}

impl ExtInt {
    pub fn fin(n: impl Into<BigInt>) -> Self {
        ExtInt::Fin(n.into())
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, ExtInt::Fin(_))
    }

    pub fn as_finite(&self) -> Option<&BigInt> {
        match self {
            ExtInt::Fin(n) => Some(n),
            _ => None,
        }
    }

    /// Sum, or `None` for the undefined `inf + (-inf)`.
    pub fn checked_add(&self, other: &ExtInt) -> Option<ExtInt> {
        use ExtInt::*;
        match (self, other) {
            (Fin(a), Fin(b)) => Some(Fin(a + b)),
            (PosInf, NegInf) | (NegInf, PosInf) => None,
            (PosInf, _) | (_, PosInf) => Some(PosInf),
            (NegInf, _) | (_, NegInf) => Some(NegInf),
        }
    }

    /// Sum under the pivot-function convention `inf + (-inf) = inf`.
    pub fn pivot_add(&self, other: &ExtInt) -> ExtInt {
        self.checked_add(other).unwrap_or(ExtInt::PosInf)
    }

    pub fn add_int(&self, k: &BigInt) -> ExtInt {
        match self {
            ExtInt::Fin(a) => ExtInt::Fin(a + k),
            other => other.clone(),
        }
    }

    pub fn cmp_int(&self, k: &BigInt) -> Ordering {
        match self {
            ExtInt::NegInf => Ordering::Less,
            ExtInt::Fin(a) => a.cmp(k),
            ExtInt::PosInf => Ordering::Greater,
        }
    }
}

impl Neg for ExtInt {
    type Output = ExtInt;
    fn neg(self) -> ExtInt {
        match self {
            ExtInt::NegInf => ExtInt::PosInf,
            ExtInt::Fin(a) => ExtInt::Fin(-a),
            ExtInt::PosInf => ExtInt::NegInf,
        }
    }
}

impl From<i64> for ExtInt {
    fn from(n: i64) -> Self {
        ExtInt::Fin(BigInt::from(n))
    }
}

impl From<BigInt> for ExtInt {
    fn from(n: BigInt) -> Self {
        ExtInt::Fin(n)
    }
}

impl fmt::Display for ExtInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtInt::NegInf => write!(f, "-inf"),
            ExtInt::Fin(n) => write!(f, "{n}"),
            ExtInt::PosInf => write!(f, "inf"),
        }
    }
}

/// Multiplicity of `p` in a nonzero integer, and the cofactor.
///
/// Squares the divisor while it still divides, so the cost is logarithmic in
/// the multiplicity.
pub fn split_power(n: &BigInt, p: Prime) -> (u64, BigInt) {
    debug_assert!(!n.is_zero());
    if p.get() == 2 {
        let tz = n.trailing_zeros().unwrap_or(0);
        return (tz, n >> tz);
    }
    let mut rest = n.clone();
    let mut powers: Vec<BigInt> = vec![p.to_bigint()];
    // Climb: powers[k] = p^(2^k) as long as it divides what is left.
    let mut count = 0u64;
    loop {
        let top = powers.last().unwrap().clone();
        let (q, r) = rest.div_rem(&top);
        if !r.is_zero() {
            break;
        }
        rest = q;
        count += 1 << (powers.len() - 1);
        powers.push(&top * &top);
    }
    // Descend through the remaining smaller powers.
    powers.pop();
    while let Some(pw) = powers.pop() {
        let (q, r) = rest.div_rem(&pw);
        if r.is_zero() {
            rest = q;
            count += 1 << powers.len();
        }
    }
    (count, rest)
}

/// p-adic valuation of a rational; `+inf` for zero.
pub fn vp(q: &Rational, p: Prime) -> ExtInt {
    if q.is_zero() {
        return ExtInt::PosInf;
    }
    let (a, _) = split_power(q.numer(), p);
    let (b, _) = split_power(q.denom(), p);
    ExtInt::Fin(BigInt::from(a) - BigInt::from(b))
}

/// Finite valuation of a nonzero rational as a plain integer.
pub fn vp_finite(q: &Rational, p: Prime) -> i64 {
    debug_assert!(!q.is_zero());
    let (a, _) = split_power(q.numer(), p);
    let (b, _) = split_power(q.denom(), p);
    a as i64 - b as i64
}

/// Writes a nonzero `q` as `u * p^v` with `v_p(u) = 0`.
pub fn unit_part(q: &Rational, p: Prime) -> (Rational, i64) {
    let (a, na) = split_power(q.numer(), p);
    let (b, nb) = split_power(q.denom(), p);
    (Rational::new(na, nb), a as i64 - b as i64)
}

fn residue(n: &BigInt, p: Prime) -> u64 {
    let r = n.mod_floor(&p.to_bigint());
    r.to_u64().expect("residue below p")
}

fn inverse_mod(a: u64, p: u64) -> u64 {
    // p is prime and a is a unit.
    pow_mod(a, p - 2, p)
}

/// The unique digit `i` in `1..p` with `v_p(q - i p^{v_p(q)}) > v_p(q)`.
pub fn leading_digit(q: &Rational, p: Prime) -> Result<u64> {
    if q.is_zero() {
        return Err(Error::InvalidInput("leading digit of zero".into()));
    }
    let (u, _) = unit_part(q, p);
    if p.get() == 2 {
        return Ok(1);
    }
    let num = residue(u.numer(), p);
    let den = residue(u.denom(), p);
    Ok(mul_mod(num, inverse_mod(den, p.get()), p.get()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(n: u64) -> Prime {
        Prime::new(n).unwrap()
    }

    #[test]
    fn primality() {
        let small: Vec<u64> = (0..60).filter(|&n| is_prime(n)).collect();
        assert_eq!(
            small,
            vec![2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59]
        );
        assert!(is_prime(1_000_000_007));
        assert!(!is_prime(1_000_000_007 * 3));
        assert!(Prime::new(4).is_err());
    }

    #[test]
    fn valuation_examples() {
        assert_eq!(vp(&rat_int(18), p(3)), ExtInt::from(2));
        assert_eq!(vp(&rat(3, 8), p(2)), ExtInt::from(-3));
        assert_eq!(vp(&rat_int(0), p(5)), ExtInt::PosInf);
        assert_eq!(vp(&rat(-50, 3), p(5)), ExtInt::from(2));
    }

    #[test]
    fn valuation_of_large_power() {
        let big = num_traits::pow(BigInt::from(3), 5000) * BigInt::from(7);
        let q = Rational::from_integer(big);
        assert_eq!(vp(&q, p(3)), ExtInt::from(5000));
        let inv = Rational::new(BigInt::one(), num_traits::pow(BigInt::from(5), 1023));
        assert_eq!(vp(&inv, p(5)), ExtInt::from(-1023));
    }

    #[test]
    fn leading_digit_examples() {
        assert_eq!(leading_digit(&rat_int(7), p(2)).unwrap(), 1);
        assert_eq!(leading_digit(&rat_int(10), p(5)).unwrap(), 2);
        assert_eq!(leading_digit(&rat(2, 3), p(3)).unwrap(), 2);
        assert!(leading_digit(&rat_int(0), p(3)).is_err());
    }

    #[test]
    fn leading_digit_is_unique() {
        for &pp in &[3u64, 5, 7] {
            let pr = p(pp);
            for n in [-40i64, -7, 1, 2, 6, 13, 45] {
                for d in [1i64, 2, 9, 25] {
                    let q = rat(n, d);
                    let v = vp_finite(&q, pr);
                    let digit = leading_digit(&q, pr).unwrap();
                    for i in 1..pp {
                        let diff = &q - rat_int(i as i64) * pr.pow(v);
                        let dv = vp(&diff, pr);
                        if i == digit {
                            assert!(dv > ExtInt::from(v));
                        } else {
                            assert_eq!(dv, ExtInt::from(v));
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn ext_int_order_and_addition() {
        assert!(ExtInt::NegInf < ExtInt::from(-1_000_000));
        assert!(ExtInt::from(1_000_000) < ExtInt::PosInf);
        assert_eq!(ExtInt::PosInf.checked_add(&ExtInt::NegInf), None);
        assert_eq!(ExtInt::PosInf.pivot_add(&ExtInt::NegInf), ExtInt::PosInf);
        assert_eq!(
            ExtInt::NegInf.checked_add(&ExtInt::from(4)),
            Some(ExtInt::NegInf)
        );
        assert_eq!(
            ExtInt::from(2).checked_add(&ExtInt::from(3)),
            Some(ExtInt::from(5))
        );
    }

    #[test]
    fn rational_text() {
        assert_eq!(parse_rational("-3/6"), Some(rat(-1, 2)));
        assert_eq!(parse_rational("4"), Some(rat_int(4)));
        assert_eq!(parse_rational("1/0"), None);
        assert_eq!(format_rational(&rat(6, -4)), "-3/2");
    }
}

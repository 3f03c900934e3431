//! Polynomial-time solver for `A x = b` with `v_p(x_j) <= c_j` and
//! `v_p(x_j) not in D_j`.
//!
//! The solution space is written as `y_0 + sum_k lambda_k y_k`. A coordinate
//! that no kernel vector touches is constant and must already satisfy its
//! constraint; every other coordinate can be pushed to a valuation as
//! negative as needed by taking `lambda_k = p^{-2ke}` for a large enough `e`.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_traits::{Signed, Zero};

use crate::arith::{vp_finite, ExtInt, Prime, Rational};
use crate::error::{Error, Result};
use crate::linalg::{row_reduce, QMatrix};
use crate::model::{ReasonCode, Refutation};
use crate::powersum::PowerSum;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LeqProblem {
    pub a: QMatrix,
    pub b: Vec<Rational>,
    pub prime: Prime,
    /// `c_j`, finite or `+inf`.
    pub upper: Vec<ExtInt>,
    /// `D_j`.
    pub excluded: Vec<BTreeSet<BigInt>>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LeqSolution {
    pub witness: Vec<PowerSum>,
    /// The spacing exponent `e`.
    pub spread: BigInt,
    /// `c'_j = inf(Z \ C_j)`; the witness has `v_p(x_j) < c'_j` wherever `j` is not fixed.
    pub thresholds: Vec<ExtInt>,
    /// Coordinates that are constant on the solution space.
    pub fixed: Vec<bool>,
}

impl LeqProblem {
    pub fn validate(&self) -> Result<()> {
        let (m, n) = (self.a.rows(), self.a.cols());
        if self.b.len() != m || self.upper.len() != n || self.excluded.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "A is {m}x{n}, b has {}, c has {}, D has {}",
                self.b.len(),
                self.upper.len(),
                self.excluded.len()
            )));
        }
        if self.upper.contains(&ExtInt::NegInf) {
            return Err(Error::InvalidInput("upper bound -inf".into()));
        }
        Ok(())
    }
}

/// `v` lies in `C_j = (-inf, c_j] \ D_j` (with `inf` allowed iff `c_j = inf`).
pub fn admissible(v: &ExtInt, upper: &ExtInt, excluded: &BTreeSet<BigInt>) -> bool {
    if v > upper {
        return false;
    }
    match v {
        ExtInt::Fin(x) => !excluded.contains(x),
        _ => true,
    }
}

/// `inf(Z \ C_j)`: the smallest integer outside the allowed set.
pub fn threshold(upper: &ExtInt, excluded: &BTreeSet<BigInt>) -> ExtInt {
    let first_excluded = excluded.iter().next().cloned().map(ExtInt::Fin);
    let above = match upper {
        ExtInt::Fin(c) => ExtInt::Fin(c + 1),
        _ => ExtInt::PosInf,
    };
    match first_excluded {
        Some(d) => d.min(above),
        None => above,
    }
}

pub fn solve_leq(prob: &LeqProblem) -> Result<std::result::Result<LeqSolution, Refutation>> {
    prob.validate()?;
    let rhs: Vec<PowerSum> = prob
        .b
        .iter()
        .map(|q| PowerSum::constant(prob.prime, q.clone()))
        .collect();
    Ok(solve_leq_powersum(&prob.a, &rhs, prob.prime, &prob.upper, &prob.excluded))
}

/// Same algorithm with a power-sum right-hand side.
pub(crate) fn solve_leq_powersum(
    a: &QMatrix,
    rhs: &[PowerSum],
    prime: Prime,
    upper: &[ExtInt],
    excluded: &[BTreeSet<BigInt>],
) -> std::result::Result<LeqSolution, Refutation> {
    let n = a.cols();
    let rr = row_reduce(a);
    let Some(y0) = rr.particular_powersum(rhs, prime) else {
        return Err(Refutation::new(
            ReasonCode::NoRationalSolution,
            "the linear system has no rational solution",
        ));
    };
    let basis = rr.kernel_basis();

    let mut fixed = vec![false; n];
    let mut y0_vals = Vec::with_capacity(n);
    for j in 0..n {
        let v0 = y0[j].valuation();
        fixed[j] = basis.iter().all(|y| y[j].is_zero());
        if fixed[j] && !admissible(&v0, &upper[j], &excluded[j]) {
            return Err(Refutation::new(
                ReasonCode::FixedCoordinate { var: j },
                format!(
                    "coordinate {j} is constant on the solution space with valuation {v0}, \
                     outside (-inf, {}] minus the excluded set",
                    upper[j]
                ),
            ));
        }
        y0_vals.push(v0);
    }

    let thresholds: Vec<ExtInt> = (0..n).map(|j| threshold(&upper[j], &excluded[j])).collect();

    let mut max_abs_val = BigInt::zero();
    for v in &y0_vals {
        if let ExtInt::Fin(x) = v {
            max_abs_val = max_abs_val.max(x.abs());
        }
    }
    for y in &basis {
        for q in y.iter().filter(|q| !q.is_zero()) {
            max_abs_val = max_abs_val.max(BigInt::from(vp_finite(q, prime).abs()));
        }
    }
    let mut shift = BigInt::zero();
    for t in &thresholds {
        if let ExtInt::Fin(c) = t {
            shift = shift.max(-c);
        }
    }
    let spread = max_abs_val + shift + 1;

    // Coordinate j of y_k enters with exponent -2 (k + 1) spread; all exponents differ.
    let mut terms: Vec<Vec<(Rational, BigInt)>> = y0.iter().map(|s| s.terms().to_vec()).collect();
    for (k, y) in basis.iter().enumerate() {
        let exponent: BigInt = -BigInt::from(2 * (k + 1)) * &spread;
        for j in 0..n {
            if !y[j].is_zero() {
                terms[j].push((y[j].clone(), exponent.clone()));
            }
        }
    }
    let witness: Vec<PowerSum> = terms.into_iter().map(|t| PowerSum::from_terms(prime, t)).collect();
    Ok(LeqSolution {
        witness,
        spread,
        thresholds,
        fixed,
    })
}

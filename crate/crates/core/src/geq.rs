//! Polynomial-time solver for `A x = b` with `v_p(x_j) >= c_j`, plus
//! `v_2(x_j) = c_j` on flagged coordinates when `p = 2`.
//!
//! The bounds are never folded into the matrix (that would need `p^{c_j}`,
//! which is doubly exponential in the binary size of `c_j`). Instead the
//! pivots are chosen by the pivot function `v_p(a) + c_j + delta_j / 2` and
//! the check per pivot row is a single valuation of a power sum.

use num_bigint::BigInt;
use num_traits::Zero;

use crate::arith::{vp_finite, ExtInt, Prime, Rational};
use crate::error::{Error, Result};
use crate::linalg::{f_minimal_echelon, EchelonResult, PivotSpec, QMatrix};
use crate::model::{ReasonCode, Refutation};
use crate::powersum::PowerSum;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GeqProblem {
    pub a: QMatrix,
    pub b: Vec<Rational>,
    pub prime: Prime,
    /// `c_j`, finite or `-inf`.
    pub lower: Vec<ExtInt>,
    /// `delta_j`: valuation must equal `c_j` exactly (only for `p = 2`).
    pub exact: Vec<bool>,
}

impl GeqProblem {
    /// Problem without exactness flags.
    pub fn new(a: QMatrix, b: Vec<Rational>, prime: Prime, lower: Vec<ExtInt>) -> Self {
        let n = lower.len();
        GeqProblem {
            a,
            b,
            prime,
            lower,
            exact: vec![false; n],
        }
    }

    pub fn validate(&self) -> Result<()> {
        validate_parts(&self.a, self.b.len(), self.prime, &self.lower, &self.exact)
    }
}

fn validate_parts(a: &QMatrix, rhs_len: usize, prime: Prime, lower: &[ExtInt], exact: &[bool]) -> Result<()> {
    let (m, n) = (a.rows(), a.cols());
    if rhs_len != m || lower.len() != n || exact.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "A is {m}x{n}, b has {rhs_len}, c has {}, delta has {}",
            lower.len(),
            exact.len()
        )));
    }
    if lower.contains(&ExtInt::PosInf) {
        return Err(Error::InvalidInput("lower bound +inf".into()));
    }
    for (j, (&d, c)) in exact.iter().zip(lower).enumerate() {
        if d && (prime.get() != 2 || !c.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "exactness flag on coordinate {j} needs p = 2 and a finite bound"
            )));
        }
    }
    Ok(())
}

#[derive(Clone, Debug)]
pub struct GeqSolution {
    pub witness: Vec<PowerSum>,
    pub echelon: EchelonResult,
}

pub fn solve_geq(prob: &GeqProblem) -> Result<std::result::Result<GeqSolution, Refutation>> {
    prob.validate()?;
    let rhs: Vec<PowerSum> = prob
        .b
        .iter()
        .map(|q| PowerSum::constant(prob.prime, q.clone()))
        .collect();
    solve_geq_powersum(&prob.a, &rhs, prob.prime, &prob.lower, &prob.exact)
}

/// Same algorithm with a power-sum right-hand side.
pub(crate) fn solve_geq_powersum(
    a: &QMatrix,
    rhs: &[PowerSum],
    prime: Prime,
    lower: &[ExtInt],
    exact: &[bool],
) -> Result<std::result::Result<GeqSolution, Refutation>> {
    validate_parts(a, rhs.len(), prime, lower, exact)?;
    let (m, n) = (a.rows(), a.cols());
    let spec = PivotSpec::new(prime, lower.to_vec(), exact.to_vec())?;
    let ech = f_minimal_echelon(a, &spec)?;
    let ub = ech.u.mul_powersums(rhs, prime);
    // Bounds and flags in the permuted column order of B.
    let cs: Vec<&ExtInt> = ech.sigma.iter().map(|&s| &lower[s]).collect();
    let ds: Vec<bool> = ech.sigma.iter().map(|&s| exact[s]).collect();
    let k = ech.rank();
    let b = &ech.b;

    for (i, r) in ub.iter().enumerate().take(m).skip(k) {
        if !r.is_zero() {
            return Ok(Err(Refutation::new(
                ReasonCode::ZeroRowNonzeroRhs { row: i },
                format!("row {i} of the echelon form is zero but its right-hand side is not"),
            )));
        }
    }

    for (i, &ji) in ech.pivots.iter().enumerate() {
        let ExtInt::Fin(c) = cs[ji] else {
            // c = -inf at the pivot: the left side is -inf.
            continue;
        };
        let lhs = BigInt::from(vp_finite(&b[(i, ji)], prime)) + c + i64::from(ds[ji]);
        let mut adjusted = ub[i].clone();
        for j in ji..n {
            if ds[j] && !b[(i, j)].is_zero() {
                let cj = cs[j].as_finite().expect("flagged bounds are finite");
                let term = PowerSum::monomial(prime, -b[(i, j)].clone(), cj.clone());
                adjusted = adjusted.add_unchecked(&term);
            }
        }
        let rhs_val = adjusted.valuation();
        if ExtInt::Fin(lhs.clone()) > rhs_val {
            return Ok(Err(Refutation::new(
                ReasonCode::PivotCondition { row: i },
                format!("pivot row {i}: need {lhs} <= {rhs_val}"),
            )));
        }
    }

    // Witness in B's column order: free columns at p^{c_j}, pivots from the reduced rows.
    let mut y: Vec<PowerSum> = cs
        .iter()
        .map(|c| match c {
            ExtInt::Fin(c) => PowerSum::power(prime, c.clone()),
            _ => PowerSum::zero(prime),
        })
        .collect();
    let r = &ech.reduced;
    let vr = ech.reduced_u.mul_powersums(rhs, prime);
    for (i, &ji) in ech.pivots.iter().enumerate() {
        let free = (k..n).filter_map(|j| match cs[j] {
            ExtInt::Fin(c) if !r[(i, j)].is_zero() => Some((-r[(i, j)].clone(), c.clone())),
            _ => None,
        });
        let acc = vr[i].add_unchecked(&PowerSum::from_terms(prime, free));
        y[ji] = acc.scale(&r[(i, ji)].recip());
    }
    let mut witness = vec![PowerSum::zero(prime); n];
    for (j, value) in y.into_iter().enumerate() {
        witness[ech.sigma[j]] = value;
    }
    Ok(Ok(GeqSolution { witness, echelon: ech }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::rat_int;

    fn p(n: u64) -> Prime {
        Prime::new(n).unwrap()
    }

    fn values(sol: &GeqSolution) -> Vec<Rational> {
        sol.witness.iter().map(|s| s.materialize(64).unwrap()).collect()
    }

    fn sum_one(rhs: i64, lower: Vec<ExtInt>, exact: Vec<bool>) -> GeqProblem {
        GeqProblem {
            a: QMatrix::from_i64(1, 2, &[1, 1]),
            b: vec![rat_int(rhs)],
            prime: p(2),
            lower,
            exact,
        }
    }

    #[test]
    fn both_even_cannot_sum_to_one() {
        let prob = sum_one(1, vec![ExtInt::from(1); 2], vec![false; 2]);
        let r = solve_geq(&prob).unwrap().unwrap_err();
        assert_eq!(r.code, ReasonCode::PivotCondition { row: 0 });
    }

    #[test]
    fn unbounded_column_takes_the_pivot() {
        let prob = sum_one(1, vec![ExtInt::from(1), ExtInt::NegInf], vec![false; 2]);
        let sol = solve_geq(&prob).unwrap().unwrap();
        assert_eq!(values(&sol), vec![rat_int(2), rat_int(-1)]);
    }

    #[test]
    fn exact_two_adic_valuations() {
        let prob = sum_one(2, vec![ExtInt::from(1); 2], vec![true; 2]);
        assert!(solve_geq(&prob).unwrap().is_err());
        let prob = sum_one(4, vec![ExtInt::from(1); 2], vec![true; 2]);
        let sol = solve_geq(&prob).unwrap().unwrap();
        assert_eq!(values(&sol), vec![rat_int(2), rat_int(2)]);
    }

    #[test]
    fn exact_flag_needs_two() {
        let mut prob = sum_one(4, vec![ExtInt::from(1); 2], vec![true; 2]);
        prob.prime = p(3);
        assert!(matches!(solve_geq(&prob), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn zero_row_with_nonzero_rhs() {
        let prob = GeqProblem::new(
            QMatrix::from_i64(2, 1, &[1, 2]),
            vec![rat_int(1), rat_int(3)],
            p(3),
            vec![ExtInt::NegInf],
        );
        let r = solve_geq(&prob).unwrap().unwrap_err();
        assert_eq!(r.code, ReasonCode::ZeroRowNonzeroRhs { row: 1 });
    }

    #[test]
    fn huge_bounds_stay_symbolic() {
        let big = ExtInt::fin(BigInt::from(1) << 20);
        let prob = GeqProblem::new(
            QMatrix::from_i64(1, 3, &[1, 1, 1]),
            vec![rat_int(0)],
            p(5),
            vec![big.clone(), big.clone(), big],
        );
        let sol = solve_geq(&prob).unwrap().unwrap();
        for s in &sol.witness {
            assert!(s.valuation() >= ExtInt::fin(BigInt::from(1) << 20));
            assert!(s.len() <= 4);
        }
    }
}

//! Independent decision of `A x = b, v_p(x_j) >= c_j` by scaling columns with
//! `p^{c_j}` and asking for a solution over the `p`-local integers, decided
//! through the Smith normal form. The scaling is exponential in `|c_j|`, so
//! this is only meant for small bounds.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};

use crate::arith::{vp, ExtInt, Rational};
use crate::error::{Error, Result};
use crate::geq::GeqProblem;
use crate::linalg::{row_reduce, QMatrix};
use crate::snf::{smith_normal_form, IntMatrix};

/// `Ok(true)` when satisfiable. Refuses exactness flags and bounds above `guard`.
pub fn smith_oracle_geq(prob: &GeqProblem, guard: u64) -> Result<bool> {
    prob.validate()?;
    if prob.exact.iter().any(|&d| d) {
        return Err(Error::OracleRefused("exactness flags are not supported".into()));
    }
    let guard_big = BigInt::from(guard);
    for c in &prob.lower {
        if let ExtInt::Fin(c) = c {
            if c.magnitude() > guard_big.magnitude() {
                return Err(Error::OracleRefused(format!("bound {c} exceeds guard {guard}")));
            }
        }
    }
    let (m, n) = (prob.a.rows(), prob.a.cols());
    let free: Vec<usize> = (0..n).filter(|&j| !prob.lower[j].is_finite()).collect();
    let bound: Vec<usize> = (0..n).filter(|&j| prob.lower[j].is_finite()).collect();

    // Rows of `left` span the left kernel of the unconstrained columns, so
    // `left * A_bound * x = left * b` is exactly the condition for them to exist.
    let mut a_free_t = QMatrix::zeros(free.len(), m);
    for (r, &j) in free.iter().enumerate() {
        for i in 0..m {
            a_free_t[(r, i)] = prob.a[(i, j)].clone();
        }
    }
    let left = row_reduce(&a_free_t).kernel_basis();
    let left = if free.is_empty() {
        (0..m)
            .map(|i| (0..m).map(|k| if i == k { Rational::one() } else { Rational::zero() }).collect())
            .collect()
    } else {
        left
    };

    let p = prob.prime;
    let mut rows: Vec<Vec<Rational>> = Vec::with_capacity(left.len());
    let mut rhs: Vec<Rational> = Vec::with_capacity(left.len());
    for l in &left {
        let mut row = Vec::with_capacity(bound.len());
        for &j in &bound {
            let entry: Rational = (0..m).map(|i| &l[i] * &prob.a[(i, j)]).sum();
            let c = prob.lower[j].as_finite().expect("finite").clone();
            let c: i64 = c.try_into().expect("within guard");
            row.push(entry * p.pow(c));
        }
        rows.push(row);
        rhs.push((0..m).map(|i| &l[i] * &prob.b[i]).sum());
    }

    if bound.is_empty() {
        return Ok(rhs.iter().all(Zero::is_zero));
    }

    // Clear denominators row by row.
    let mut int_rows: IntMatrix = Vec::with_capacity(rows.len());
    let mut int_rhs: Vec<BigInt> = Vec::with_capacity(rows.len());
    for (row, r) in rows.iter().zip(&rhs) {
        let lcm = row
            .iter()
            .chain(std::iter::once(r))
            .fold(BigInt::one(), |acc, q| acc.lcm(q.denom()));
        let scale = Rational::from_integer(lcm);
        int_rows.push(row.iter().map(|q| (q * &scale).to_integer()).collect());
        int_rhs.push((r * &scale).to_integer());
    }

    let s = smith_normal_form(&int_rows);
    let ub: Vec<BigInt> = s
        .u
        .iter()
        .map(|urow| urow.iter().zip(&int_rhs).map(|(x, y)| x * y).sum())
        .collect();
    let d = s.invariants();
    for (i, value) in ub.iter().enumerate() {
        match d.get(i) {
            Some(di) => {
                let need = vp(&Rational::from_integer(di.clone()), p);
                if vp(&Rational::from_integer(value.clone()), p) < need {
                    return Ok(false);
                }
            }
            None => {
                if !value.is_zero() {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

//! Checks the defining properties of an f-minimal row echelon form.

use num_traits::Zero;

use crate::arith::{vp, ExtInt, Rational};
use crate::linalg::{EchelonResult, PivotSpec, QMatrix};

/// Verifies `B = U A P`, echelon shape, pivot minimality of the pivot
/// function, its two integral consequences, and `det U != 0`.
pub fn audit_echelon(a: &QMatrix, spec: &PivotSpec, ech: &EchelonResult) -> Result<(), String> {
    let product = ech
        .u
        .mul(a)
        .and_then(|ua| ua.mul(&ech.permutation_matrix()))
        .map_err(|e| e.to_string())?;
    if product != ech.b {
        return Err("B differs from U * A * P".into());
    }
    let det = ech.u.determinant().map_err(|e| e.to_string())?;
    if det.is_zero() {
        return Err("U is singular".into());
    }

    let (m, n) = (ech.b.rows(), ech.b.cols());
    let leading: Vec<Option<usize>> = (0..m).map(|i| (0..n).find(|&j| !ech.b[(i, j)].is_zero())).collect();
    let k = leading.iter().take_while(|l| l.is_some()).count();
    if leading[k..].iter().any(Option::is_some) {
        return Err("a zero row precedes a nonzero row".into());
    }
    for w in leading[..k].windows(2) {
        if w[0] >= w[1] {
            return Err("pivot columns are not strictly increasing".into());
        }
    }
    let found: Vec<usize> = leading[..k].iter().map(|l| l.expect("nonzero row")).collect();
    if found != ech.pivots {
        return Err(format!("reported pivots {:?}, actual {:?}", ech.pivots, found));
    }

    let p = spec.prime;
    let bound = |j: usize| &spec.bounds[ech.sigma[j]];
    let delta = |j: usize| i64::from(spec.exact[ech.sigma[j]]);
    let shifted = |q: &Rational, j: usize, with_delta: bool| -> ExtInt {
        let mut t = vp(q, p).pivot_add(bound(j));
        if with_delta {
            t = t.add_int(&delta(j).into());
        }
        t
    };
    for (i, &ji) in ech.pivots.iter().enumerate() {
        let row_min = |f: &dyn Fn(&Rational, usize) -> ExtInt| {
            (ji..n)
                .filter(|&j| !ech.b[(i, j)].is_zero())
                .map(|j| f(&ech.b[(i, j)], j))
                .min()
                .expect("pivot is nonzero")
        };
        let twice = |q: &Rational, j: usize| spec.twice_f(q, ech.sigma[j]);
        if twice(&ech.b[(i, ji)], ji) != row_min(&twice) {
            return Err(format!("row {i}: pivot does not minimize f"));
        }
        let plain = |q: &Rational, j: usize| shifted(q, j, false);
        if plain(&ech.b[(i, ji)], ji) != row_min(&plain) {
            return Err(format!("row {i}: v_p + c is not minimal at the pivot"));
        }
        let with_delta = |q: &Rational, j: usize| shifted(q, j, true);
        if with_delta(&ech.b[(i, ji)], ji) != row_min(&with_delta) {
            return Err(format!("row {i}: v_p + c + delta is not minimal at the pivot"));
        }
    }
    Ok(())
}

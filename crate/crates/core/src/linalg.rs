//! Dense exact rational matrices, affine solution spaces and the
//! f-minimal row echelon form used by the `>=` solver.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Index, IndexMut};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::arith::{vp, ExtInt, Prime, Rational};
use crate::error::{Error, Result};
use crate::powersum::PowerSum;

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct QMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Rational>,
}

impl QMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        QMatrix {
            rows,
            cols,
            data: vec![Rational::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Rational::one();
        }
        m
    }

    /// Builds a matrix from rows; `cols` fixes the width when there are no rows.
    pub fn from_rows(rows: Vec<Vec<Rational>>, cols: usize) -> Result<Self> {
        let mut data = Vec::with_capacity(rows.len() * cols);
        let nrows = rows.len();
        for (i, r) in rows.into_iter().enumerate() {
            if r.len() != cols {
                return Err(Error::DimensionMismatch(format!(
                    "row {i} has {} entries, expected {cols}",
                    r.len()
                )));
            }
            data.extend(r);
        }
        Ok(QMatrix {
            rows: nrows,
            cols,
            data,
        })
    }

    pub fn from_i64(rows: usize, cols: usize, entries: &[i64]) -> Self {
        assert_eq!(entries.len(), rows * cols);
        QMatrix {
            rows,
            cols,
            data: entries
                .iter()
                .map(|&x| Rational::from_integer(BigInt::from(x)))
                .collect(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[Rational] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [Rational] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<Rational> {
        (0..self.rows).map(|i| self[(i, j)].clone()).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Zero::is_zero)
    }

    pub fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    pub fn swap_cols(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for i in 0..self.rows {
            self.data.swap(i * self.cols + a, i * self.cols + b);
        }
    }

    /// `row[target] -= factor * row[source]`, restricted to columns `from..`.
    fn sub_row_multiple(&mut self, target: usize, source: usize, factor: &Rational, from: usize) {
        debug_assert_ne!(target, source);
        let cols = self.cols;
        let (lo, hi) = (target.min(source), target.max(source));
        let (head, tail) = self.data.split_at_mut(hi * cols);
        let (t_row, s_row) = if target < source {
            (&mut head[lo * cols..(lo + 1) * cols], &tail[..cols])
        } else {
            (&mut tail[..cols], &head[lo * cols..(lo + 1) * cols])
        };
        for j in from..cols {
            if !s_row[j].is_zero() {
                t_row[j] -= factor * &s_row[j];
            }
        }
    }

    pub fn mul(&self, other: &QMatrix) -> Result<QMatrix> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} times {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = QMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = &other[(k, j)];
                    if !b.is_zero() {
                        out[(i, j)] += a * b;
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, x: &[Rational]) -> Result<Vec<Rational>> {
        if x.len() != self.cols {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} times vector of length {}",
                self.rows,
                self.cols,
                x.len()
            )));
        }
        Ok((0..self.rows)
            .map(|i| dot(self.row(i), x))
            .collect())
    }

    /// `sum_j self[i][j] * x_j` for power-sum valued `x`, computed as one
    /// rational product per distinct exponent.
    pub fn mul_powersums(&self, x: &[PowerSum], prime: Prime) -> Vec<PowerSum> {
        assert_eq!(x.len(), self.cols);
        let mut by_exponent: BTreeMap<&BigInt, Vec<Rational>> = BTreeMap::new();
        for (j, s) in x.iter().enumerate() {
            for (a, c) in s.terms() {
                by_exponent.entry(c).or_insert_with(|| vec![Rational::zero(); self.cols])[j] = a.clone();
            }
        }
        let mut terms: Vec<Vec<(Rational, BigInt)>> = vec![Vec::new(); self.rows];
        for (c, column) in by_exponent {
            for (i, v) in self.mul_vec_fast(&column).into_iter().enumerate() {
                if !v.is_zero() {
                    terms[i].push((v, c.clone()));
                }
            }
        }
        terms.into_iter().map(|t| PowerSum::from_terms(prime, t)).collect()
    }

    /// `self * x` over a common denominator of `x`, exact.
    fn mul_vec_fast(&self, x: &[Rational]) -> Vec<Rational> {
        let den = x.iter().fold(BigInt::one(), |acc, q| acc.lcm(q.denom()));
        let nums: Vec<BigInt> = x.iter().map(|q| q.numer() * (&den / q.denom())).collect();
        (0..self.rows)
            .map(|i| {
                let row = self.row(i);
                if row.iter().all(|a| a.is_integer()) {
                    let mut acc = BigInt::zero();
                    for (a, v) in row.iter().zip(&nums) {
                        if !a.is_zero() && !v.is_zero() {
                            acc += a.numer() * v;
                        }
                    }
                    Rational::new(acc, den.clone())
                } else {
                    dot(row, x)
                }
            })
            .collect()
    }

    /// Column `j` of the result is column `sigma[j]` of `self`.
    pub fn permute_columns(&self, sigma: &[usize]) -> QMatrix {
        assert_eq!(sigma.len(), self.cols);
        let mut out = QMatrix::zeros(self.rows, self.cols);
        for i in 0..self.rows {
            for (j, &s) in sigma.iter().enumerate() {
                out[(i, j)] = self[(i, s)].clone();
            }
        }
        out
    }

    /// Determinant by elimination; square matrices only.
    pub fn determinant(&self) -> Result<Rational> {
        if self.rows != self.cols {
            return Err(Error::DimensionMismatch("determinant of a non-square matrix".into()));
        }
        let mut m = self.clone();
        let n = self.rows;
        let mut det = Rational::one();
        for c in 0..n {
            let Some(r) = (c..n).find(|&r| !m[(r, c)].is_zero()) else {
                return Ok(Rational::zero());
            };
            if r != c {
                m.swap_rows(r, c);
                det = -det;
            }
            let piv = m[(c, c)].clone();
            det *= &piv;
            for i in c + 1..n {
                if !m[(i, c)].is_zero() {
                    let f = &m[(i, c)] / &piv;
                    m.sub_row_multiple(i, c, &f, c);
                }
            }
        }
        Ok(det)
    }

    pub fn rank(&self) -> usize {
        row_reduce(self).pivots.len()
    }
}

impl Index<(usize, usize)> for QMatrix {
    type Output = Rational;
    fn index(&self, (i, j): (usize, usize)) -> &Rational {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for QMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Rational {
        &mut self.data[i * self.cols + j]
    }
}

impl fmt::Debug for QMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "QMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            let row: Vec<String> = self.row(i).iter().map(|q| q.to_string()).collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        write!(f, "]")
    }
}

pub fn dot(a: &[Rational], b: &[Rational]) -> Rational {
    let mut s = Rational::zero();
    for (x, y) in a.iter().zip(b) {
        if !x.is_zero() && !y.is_zero() {
            s += x * y;
        }
    }
    s
}

/// Matrix with `P[sigma[j]][j] = 1`, so that `A * P` is `A` with its columns
/// rearranged as in [`QMatrix::permute_columns`].
pub fn permutation_matrix(sigma: &[usize]) -> QMatrix {
    let n = sigma.len();
    let mut p = QMatrix::zeros(n, n);
    for (j, &s) in sigma.iter().enumerate() {
        p[(s, j)] = Rational::one();
    }
    p
}

/// Reduced row echelon form together with the row operations that produced it.
#[derive(Clone, Debug)]
pub struct RowReduction {
    /// Integral and invertible with `transform * A = reduced`.
    pub transform: QMatrix,
    /// Integral reduced echelon form; pivot entries of the nonzero rows all
    /// equal `denom` and pivot columns are zero elsewhere.
    pub reduced: QMatrix,
    pub denom: BigInt,
    /// Pivot column of each nonzero row of `reduced`.
    pub pivots: Vec<usize>,
}

/// Rows `[L_i a_i | L_i e_i]` with `L_i` the lcm of row `i`'s denominators.
fn integer_rows(a: &QMatrix) -> Vec<Vec<BigInt>> {
    let m = a.rows;
    (0..m)
        .map(|i| {
            let l = a.row(i).iter().fold(BigInt::one(), |acc, q| acc.lcm(q.denom()));
            let mut r: Vec<BigInt> = a.row(i).iter().map(|q| q.numer() * (&l / q.denom())).collect();
            r.extend((0..m).map(|k| if k == i { l.clone() } else { BigInt::zero() }));
            r
        })
        .collect()
}

/// One fraction-free Gauss-Jordan step on pivot `(r, col)`: every other row
/// becomes `(piv * row - row[col] * pivot_row) / prev`, which is exact.
fn eliminate(rows: &mut [Vec<BigInt>], r: usize, col: usize, prev: &BigInt) -> Result<()> {
    let (head, tail) = rows.split_at_mut(r);
    let (pivot_row, below) = tail.split_first_mut().expect("pivot row exists");
    let piv = &pivot_row[col];
    for row in head.iter_mut().chain(below.iter_mut()) {
        let f = std::mem::take(&mut row[col]);
        for (j, (x, y)) in row.iter_mut().zip(pivot_row.iter()).enumerate() {
            if j == col || (x.is_zero() && (y.is_zero() || f.is_zero())) {
                continue;
            }
            let v = piv * &*x - &f * y;
            let (q, rem) = v.div_rem(prev);
            if !rem.is_zero() {
                return Err(Error::Invariant("fraction-free elimination lost exactness".into()));
            }
            *x = q;
        }
    }
    Ok(())
}

fn to_qmatrix(src: &[Vec<BigInt>], range: std::ops::Range<usize>) -> QMatrix {
    QMatrix {
        rows: src.len(),
        cols: range.len(),
        data: src
            .iter()
            .flat_map(|row| row[range.clone()].iter().cloned().map(Rational::from_integer))
            .collect(),
    }
}

pub fn row_reduce(a: &QMatrix) -> RowReduction {
    let (m, n) = (a.rows, a.cols);
    let mut rows = integer_rows(a);
    let mut pivots = Vec::new();
    let mut prev = BigInt::one();
    for col in 0..n {
        let r = pivots.len();
        if r == m {
            break;
        }
        let Some(src) = (r..m).find(|&i| !rows[i][col].is_zero()) else {
            continue;
        };
        rows.swap(src, r);
        eliminate(&mut rows, r, col, &prev).expect("exact division in fraction-free elimination");
        prev = rows[r][col].clone();
        pivots.push(col);
    }
    RowReduction {
        transform: to_qmatrix(&rows, n..n + m),
        reduced: to_qmatrix(&rows, 0..n),
        denom: prev,
        pivots,
    }
}

impl RowReduction {
    pub fn rank(&self) -> usize {
        self.pivots.len()
    }

    /// Kernel basis: one vector per free column, sign-normalized so that the
    /// first nonzero entry is positive.
    pub fn kernel_basis(&self) -> Vec<Vec<Rational>> {
        let n = self.reduced.cols;
        let mut is_pivot = vec![false; n];
        for &c in &self.pivots {
            is_pivot[c] = true;
        }
        let mut basis = Vec::new();
        for free in (0..n).filter(|&j| !is_pivot[j]) {
            let mut y = vec![Rational::zero(); n];
            y[free] = Rational::one();
            for (i, &pc) in self.pivots.iter().enumerate() {
                y[pc] = -Rational::new(self.reduced[(i, free)].numer().clone(), self.denom.clone());
            }
            if y.iter().find(|q| !q.is_zero()).is_some_and(|q| q.is_negative()) {
                for q in &mut y {
                    *q = -q.clone();
                }
            }
            basis.push(y);
        }
        basis
    }

    /// A particular solution of `A y = b`, or `None` when inconsistent.
    pub fn particular(&self, b: &[Rational]) -> Option<Vec<Rational>> {
        let c = self.transform.mul_vec(b).ok()?;
        if c[self.rank()..].iter().any(|q| !q.is_zero()) {
            return None;
        }
        let d = Rational::from_integer(self.denom.clone());
        let mut y = vec![Rational::zero(); self.reduced.cols];
        for (i, &pc) in self.pivots.iter().enumerate() {
            y[pc] = &c[i] / &d;
        }
        Some(y)
    }

    /// Same as [`Self::particular`] for a power-sum right-hand side.
    pub fn particular_powersum(&self, b: &[PowerSum], prime: Prime) -> Option<Vec<PowerSum>> {
        let c = self.transform.mul_powersums(b, prime);
        if c[self.rank()..].iter().any(|s| !s.is_zero()) {
            return None;
        }
        let d = Rational::from_integer(self.denom.clone()).recip();
        let mut y = vec![PowerSum::zero(prime); self.reduced.cols];
        for (i, &pc) in self.pivots.iter().enumerate() {
            y[pc] = c[i].scale(&d);
        }
        Some(y)
    }
}

/// `{ y0 + sum_k lambda_k y_k }`: all rational solutions of `A x = b`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SolutionSpace {
    pub particular: Vec<Rational>,
    pub basis: Vec<Vec<Rational>>,
}

impl SolutionSpace {
    pub fn dimension(&self) -> usize {
        self.basis.len()
    }
}

/// Solves `A x = b` over the rationals; `Ok(None)` when there is no solution.
pub fn solve_affine(a: &QMatrix, b: &[Rational]) -> Result<Option<SolutionSpace>> {
    if b.len() != a.rows {
        return Err(Error::DimensionMismatch(format!(
            "matrix has {} rows but right-hand side has {} entries",
            a.rows,
            b.len()
        )));
    }
    let rr = row_reduce(a);
    Ok(rr.particular(b).map(|particular| SolutionSpace {
        particular,
        basis: rr.kernel_basis(),
    }))
}

/// The pivot function `f(a, j) = v_p(a) + c_j + delta_j / 2`.
///
/// Comparisons go through `2 f` so that everything stays integral.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PivotSpec {
    pub prime: Prime,
    pub bounds: Vec<ExtInt>,
    pub exact: Vec<bool>,
}

impl PivotSpec {
    pub fn new(prime: Prime, bounds: Vec<ExtInt>, exact: Vec<bool>) -> Result<Self> {
        if bounds.len() != exact.len() {
            return Err(Error::DimensionMismatch("bounds and flags differ in length".into()));
        }
        Ok(PivotSpec {
            prime,
            bounds,
            exact,
        })
    }

    /// Bounds only, no exactness flags.
    pub fn plain(prime: Prime, bounds: Vec<ExtInt>) -> Self {
        let n = bounds.len();
        PivotSpec {
            prime,
            bounds,
            exact: vec![false; n],
        }
    }

    /// `2 f(a, j)`; `+inf` for `a = 0`, with `inf + (-inf) = inf`.
    pub fn twice_f(&self, a: &Rational, j: usize) -> ExtInt {
        let v = vp(a, self.prime);
        let two = BigInt::from(2);
        let twice_v = match v {
            ExtInt::Fin(x) => ExtInt::Fin(x * &two),
            other => other,
        };
        let twice_c = match &self.bounds[j] {
            ExtInt::Fin(x) => ExtInt::Fin(x * &two),
            other => other.clone(),
        };
        let delta = ExtInt::fin(i64::from(self.exact[j]));
        twice_v.pivot_add(&twice_c).pivot_add(&delta)
    }
}

/// `B = U * A * P_sigma` in f-minimal row echelon form.
///
/// Rows of `B` are integral multiples of the rows rational elimination
/// would give; row scaling does not change any valuation difference within a
/// row, so pivot choices and all pivot conditions are the same.
#[derive(Clone, Debug)]
pub struct EchelonResult {
    pub u: QMatrix,
    /// Column `j` of `B` is column `sigma[j]` of `A`.
    pub sigma: Vec<usize>,
    pub b: QMatrix,
    /// Pivot column of each nonzero row of `b`, strictly increasing.
    pub pivots: Vec<usize>,
    /// `R = V * A * P_sigma` with every pivot column cleared outside its own
    /// row, for back-substitution.
    pub reduced: QMatrix,
    pub reduced_u: QMatrix,
}

impl EchelonResult {
    pub fn rank(&self) -> usize {
        self.pivots.len()
    }

    pub fn permutation_matrix(&self) -> QMatrix {
        permutation_matrix(&self.sigma)
    }
}

/// Row echelon form in which every pivot minimizes the pivot function within
/// its row, over the columns from the pivot onwards.
///
/// Rows are swapped only to bring a nonzero row up; among columns attaining
/// the minimum the lowest index wins.
pub fn f_minimal_echelon(a: &QMatrix, spec: &PivotSpec) -> Result<EchelonResult> {
    if spec.bounds.len() != a.cols {
        return Err(Error::DimensionMismatch(format!(
            "pivot spec covers {} columns, matrix has {}",
            spec.bounds.len(),
            a.cols
        )));
    }
    let (m, n) = (a.rows, a.cols);
    let mut rows = integer_rows(a);
    let mut sigma: Vec<usize> = (0..n).collect();
    let mut pivots = Vec::new();
    // Each pivot row as it was when chosen, before later pivots reduce it.
    let mut echelon: Vec<Vec<BigInt>> = Vec::new();
    let mut prev = BigInt::one();
    // Fraction-free Gauss-Jordan: every update divides exactly by the previous pivot.
    for r in 0..m.min(n) {
        let Some(src) = (r..m).find(|&i| rows[i][r..n].iter().any(|x| !x.is_zero())) else {
            break;
        };
        rows.swap(src, r);
        let mut best = r;
        let mut best_val = ExtInt::PosInf;
        for k in r..n {
            if rows[r][k].is_zero() {
                continue;
            }
            let val = spec.twice_f(&Rational::from_integer(rows[r][k].clone()), sigma[k]);
            if val < best_val {
                best = k;
                best_val = val;
            }
        }
        for row in rows.iter_mut().chain(echelon.iter_mut()) {
            row.swap(r, best);
        }
        sigma.swap(r, best);
        echelon.push(rows[r].clone());

        eliminate(&mut rows, r, r, &prev)?;
        let piv = rows[r][r].clone();
        prev = piv;
        pivots.push(r);
    }
    let k = pivots.len();
    let block = |src: &[Vec<BigInt>], range: std::ops::Range<usize>| to_qmatrix(src, range);
    let mut ech_rows = echelon;
    ech_rows.extend(rows[k..].iter().cloned());
    Ok(EchelonResult {
        u: block(&ech_rows, n..n + m),
        b: block(&ech_rows, 0..n),
        sigma,
        pivots,
        reduced: block(&rows, 0..n),
        reduced_u: block(&rows, n..n + m),
    })
}

/// Number of bits needed for the largest numerator or denominator.
pub fn max_entry_bits(a: &QMatrix) -> u64 {
    a.data
        .iter()
        .map(|q| q.numer().bits().max(q.denom().bits()))
        .max()
        .unwrap_or(0)
}

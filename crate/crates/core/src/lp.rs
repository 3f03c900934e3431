//! Exact rational linear programming: a dense two-phase simplex with Bland's
//! rule, feasibility of mixed equation / weak / strict systems, and Farkas
//! certificates for infeasibility.

use num_traits::{One, Signed, Zero};

use crate::arith::Rational;
use crate::error::{Error, Result};

/// `coeffs . x (rel) rhs`
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinRow {
    pub coeffs: Vec<Rational>,
    pub rhs: Rational,
}

impl LinRow {
    pub fn new(coeffs: Vec<Rational>, rhs: Rational) -> Self {
        LinRow { coeffs, rhs }
    }

    pub fn eval(&self, x: &[Rational]) -> Rational {
        self.coeffs.iter().zip(x).map(|(a, b)| a * b).sum()
    }
}

/// `A x = b`, `C x <= d`, `E x < f` over `n` rational variables.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LpSystem {
    pub n: usize,
    pub eq: Vec<LinRow>,
    pub weak: Vec<LinRow>,
    pub strict: Vec<LinRow>,
}

impl LpSystem {
    pub fn new(n: usize) -> Self {
        LpSystem {
            n,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (block, rows) in [("equation", &self.eq), ("weak", &self.weak), ("strict", &self.strict)] {
            for (i, r) in rows.iter().enumerate() {
                if r.coeffs.len() != self.n {
                    return Err(Error::DimensionMismatch(format!(
                        "{block} row {i} has {} coefficients for {} variables",
                        r.coeffs.len(),
                        self.n
                    )));
                }
            }
        }
        Ok(())
    }

    /// Exact check of all three blocks.
    pub fn satisfied_by(&self, x: &[Rational]) -> bool {
        x.len() == self.n
            && self.eq.iter().all(|r| r.eval(x) == r.rhs)
            && self.weak.iter().all(|r| r.eval(x) <= r.rhs)
            && self.strict.iter().all(|r| r.eval(x) < r.rhs)
    }
}

/// Multipliers `y` (free), `u >= 0`, `w >= 0` with `yA + uC + wE = 0` and
/// either `yb + ud + wf < 0`, or `yb + ud + wf <= 0` with `w != 0`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FarkasCertificate {
    pub eq: Vec<Rational>,
    pub weak: Vec<Rational>,
    pub strict: Vec<Rational>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LpResult {
    Feasible(Vec<Rational>),
    Infeasible(FarkasCertificate),
}

impl LpResult {
    pub fn is_feasible(&self) -> bool {
        matches!(self, LpResult::Feasible(_))
    }
}

pub fn verify_certificate(sys: &LpSystem, cert: &FarkasCertificate) -> bool {
    if cert.eq.len() != sys.eq.len() || cert.weak.len() != sys.weak.len() || cert.strict.len() != sys.strict.len() {
        return false;
    }
    if cert.weak.iter().chain(&cert.strict).any(Signed::is_negative) {
        return false;
    }
    let rows = sys
        .eq
        .iter()
        .zip(&cert.eq)
        .chain(sys.weak.iter().zip(&cert.weak))
        .chain(sys.strict.iter().zip(&cert.strict));
    let mut combo = vec![Rational::zero(); sys.n];
    let mut rhs = Rational::zero();
    for (row, m) in rows {
        for (c, a) in combo.iter_mut().zip(&row.coeffs) {
            *c += m * a;
        }
        rhs += m * &row.rhs;
    }
    if combo.iter().any(|c| !c.is_zero()) {
        return false;
    }
    let strict_used = cert.strict.iter().any(|w| w.is_positive());
    rhs.is_negative() || (rhs.is_zero() && strict_used)
}

/// Outcome of `max c.x` subject to `A x = b`, `x >= 0`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SimplexOutcome {
    Infeasible,
    Unbounded,
    Optimal { x: Vec<Rational>, value: Rational },
}

struct Tableau {
    /// `rows` constraint rows followed by the objective row; last column is the rhs.
    t: Vec<Vec<Rational>>,
    basis: Vec<usize>,
    cols: usize,
}

impl Tableau {
    fn rhs(&self, i: usize) -> &Rational {
        &self.t[i][self.cols]
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let inv = self.t[r][c].recip();
        for x in self.t[r].iter_mut() {
            *x *= &inv;
        }
        let prow = self.t[r].clone();
        for (i, row) in self.t.iter_mut().enumerate() {
            if i == r || row[c].is_zero() {
                continue;
            }
            let f = row[c].clone();
            for (x, p) in row.iter_mut().zip(&prow) {
                if !p.is_zero() {
                    *x -= &f * p;
                }
            }
        }
        self.basis[r] = c;
    }

    /// Maximizes the objective row (stored as reduced costs `-c`) over the
    /// first `allowed` columns. Bland's rule: lowest entering index, then
    /// lowest basic index among ratio ties.
    fn optimize(&mut self, allowed: usize) -> bool {
        let m = self.basis.len();
        loop {
            let obj = &self.t[m];
            let Some(enter) = (0..allowed).find(|&j| obj[j].is_negative()) else {
                return true;
            };
            let mut leave: Option<(usize, Rational)> = None;
            for i in 0..m {
                let a = &self.t[i][enter];
                if !a.is_positive() {
                    continue;
                }
                let ratio = self.rhs(i) / a;
                let better = match &leave {
                    None => true,
                    Some((l, best)) => ratio < *best || (ratio == *best && self.basis[i] < self.basis[*l]),
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
            let Some((r, _)) = leave else {
                return false;
            };
            self.pivot(r, enter);
        }
    }
}

/// Two-phase simplex for `max c.x`, `A x = b`, `x >= 0`.
pub fn simplex(a: &[Vec<Rational>], b: &[Rational], c: &[Rational]) -> SimplexOutcome {
    let m = a.len();
    let n = c.len();
    let width = n + m;
    let mut t = Vec::with_capacity(m + 1);
    for i in 0..m {
        let flip = b[i].is_negative();
        let mut row = Vec::with_capacity(width + 1);
        for j in 0..n {
            row.push(if flip { -a[i][j].clone() } else { a[i][j].clone() });
        }
        for k in 0..m {
            row.push(if k == i { Rational::one() } else { Rational::zero() });
        }
        row.push(if flip { -b[i].clone() } else { b[i].clone() });
        t.push(row);
    }
    // Phase 1 objective: maximize -sum(artificials), expressed in nonbasic terms.
    let mut obj = vec![Rational::zero(); width + 1];
    for row in &t {
        for j in 0..n {
            obj[j] -= &row[j];
        }
        obj[width] -= &row[width];
    }
    t.push(obj);
    let mut tab = Tableau {
        t,
        basis: (n..n + m).collect(),
        cols: width,
    };
    tab.optimize(n);
    if !tab.t[m][width].is_zero() {
        return SimplexOutcome::Infeasible;
    }
    // Drive artificials out of the basis where possible; rows left with one are redundant.
    let mut redundant = Vec::new();
    for i in 0..m {
        if tab.basis[i] < n {
            continue;
        }
        match (0..n).find(|&j| !tab.t[i][j].is_zero()) {
            Some(j) => tab.pivot(i, j),
            None => redundant.push(i),
        }
    }
    for &i in redundant.iter().rev() {
        tab.t.remove(i);
        tab.basis.remove(i);
    }
    let m2 = tab.basis.len();
    // Phase 2 objective row: -c, reduced against the basis.
    let mut obj = vec![Rational::zero(); width + 1];
    for j in 0..n {
        obj[j] = -c[j].clone();
    }
    for i in 0..m2 {
        let bj = tab.basis[i];
        if bj < n && !obj[bj].is_zero() {
            let f = obj[bj].clone();
            for (o, x) in obj.iter_mut().zip(&tab.t[i]) {
                *o -= &f * x;
            }
        }
    }
    tab.t[m2] = obj;
    if !tab.optimize(n) {
        return SimplexOutcome::Unbounded;
    }
    let mut x = vec![Rational::zero(); n];
    for i in 0..m2 {
        if tab.basis[i] < n {
            x[tab.basis[i]] = tab.rhs(i).clone();
        }
    }
    let value = tab.t[m2][width].clone();
    SimplexOutcome::Optimal { x, value }
}

/// Column layout for a system with free variables split as `x+ - x-`.
struct Builder {
    rows: Vec<Vec<Rational>>,
    rhs: Vec<Rational>,
    cols: usize,
}

impl Builder {
    fn new(cols: usize) -> Self {
        Builder {
            rows: Vec::new(),
            rhs: Vec::new(),
            cols,
        }
    }

    fn push(&mut self, entries: &[(usize, Rational)], rhs: Rational) {
        let mut row = vec![Rational::zero(); self.cols];
        for (j, v) in entries {
            row[*j] += v;
        }
        self.rows.push(row);
        self.rhs.push(rhs);
    }
}

/// Exact feasibility of `A x = b, C x <= d, E x < f`.
///
/// Solves `max t` subject to `A x = b`, `C x <= d`, `E x + t <= f`, `t <= 1`;
/// the strict block is satisfiable iff the optimum is positive.
pub fn lp_feasible(sys: &LpSystem) -> Result<LpResult> {
    sys.validate()?;
    let n = sys.n;
    let (ne, nw, ns) = (sys.eq.len(), sys.weak.len(), sys.strict.len());
    // Columns: x+ (n), x- (n), t+, t-, weak slacks, strict slacks, t slack.
    let tp = 2 * n;
    let tm = tp + 1;
    let ws = tm + 1;
    let ss = ws + nw;
    let ts = ss + ns;
    let cols = ts + 1;
    let mut bld = Builder::new(cols);
    let x_terms = |row: &LinRow| -> Vec<(usize, Rational)> {
        row.coeffs
            .iter()
            .enumerate()
            .filter(|(_, a)| !a.is_zero())
            .flat_map(|(j, a)| [(j, a.clone()), (n + j, -a.clone())])
            .collect()
    };
    for r in &sys.eq {
        bld.push(&x_terms(r), r.rhs.clone());
    }
    for (k, r) in sys.weak.iter().enumerate() {
        let mut e = x_terms(r);
        e.push((ws + k, Rational::one()));
        bld.push(&e, r.rhs.clone());
    }
    for (k, r) in sys.strict.iter().enumerate() {
        let mut e = x_terms(r);
        e.extend([(tp, Rational::one()), (tm, -Rational::one()), (ss + k, Rational::one())]);
        bld.push(&e, r.rhs.clone());
    }
    bld.push(
        &[(tp, Rational::one()), (tm, -Rational::one()), (ts, Rational::one())],
        Rational::one(),
    );
    let mut c = vec![Rational::zero(); cols];
    c[tp] = Rational::one();
    c[tm] = -Rational::one();

    match simplex(&bld.rows, &bld.rhs, &c) {
        SimplexOutcome::Optimal { x, value } if ns == 0 || value.is_positive() => {
            let point: Vec<Rational> = (0..n).map(|j| &x[j] - &x[n + j]).collect();
            if !sys.satisfied_by(&point) {
                return Err(Error::Invariant("simplex point violates the system".into()));
            }
            Ok(LpResult::Feasible(point))
        }
        SimplexOutcome::Unbounded => Err(Error::Invariant("bounded program reported unbounded".into())),
        _ => {
            let cert = farkas(sys, ne, nw, ns)?;
            Ok(LpResult::Infeasible(cert))
        }
    }
}

/// Searches both alternatives of the transposition theorem.
fn farkas(sys: &LpSystem, ne: usize, nw: usize, ns: usize) -> Result<FarkasCertificate> {
    let n = sys.n;
    // Columns: y+ (ne), y- (ne), u (nw), w (ns), s.
    let ym = ne;
    let u0 = 2 * ne;
    let w0 = u0 + nw;
    let s = w0 + ns;
    let cols = s + 1;
    let combo_terms = |col: Option<usize>| -> Vec<(usize, Rational)> {
        let mut e = Vec::new();
        let coeff = |row: &LinRow| match col {
            Some(j) => row.coeffs[j].clone(),
            None => row.rhs.clone(),
        };
        for (i, r) in sys.eq.iter().enumerate() {
            let a = coeff(r);
            if !a.is_zero() {
                e.push((i, a.clone()));
                e.push((ym + i, -a));
            }
        }
        for (k, r) in sys.weak.iter().enumerate() {
            e.push((u0 + k, coeff(r)));
        }
        for (k, r) in sys.strict.iter().enumerate() {
            e.push((w0 + k, coeff(r)));
        }
        e
    };
    let extract = |x: &[Rational]| FarkasCertificate {
        eq: (0..ne).map(|i| &x[i] - &x[ym + i]).collect(),
        weak: x[u0..w0].to_vec(),
        strict: x[w0..s].to_vec(),
    };
    let zero_obj = vec![Rational::zero(); cols];

    // First alternative: combination = 0 with right-hand side -1.
    let mut bld = Builder::new(cols);
    for j in 0..n {
        bld.push(&combo_terms(Some(j)), Rational::zero());
    }
    bld.push(&combo_terms(None), -Rational::one());
    if let SimplexOutcome::Optimal { x, .. } = simplex(&bld.rows, &bld.rhs, &zero_obj) {
        let cert = extract(&x);
        if verify_certificate(sys, &cert) {
            return Ok(cert);
        }
    }

    // Second alternative: right-hand side <= 0 with the strict multipliers summing to 1.
    if ns > 0 {
        let mut bld = Builder::new(cols);
        for j in 0..n {
            bld.push(&combo_terms(Some(j)), Rational::zero());
        }
        let mut last = combo_terms(None);
        last.push((s, Rational::one()));
        bld.push(&last, Rational::zero());
        let ones: Vec<(usize, Rational)> = (0..ns).map(|k| (w0 + k, Rational::one())).collect();
        bld.push(&ones, Rational::one());
        if let SimplexOutcome::Optimal { x, .. } = simplex(&bld.rows, &bld.rhs, &zero_obj) {
            let cert = extract(&x);
            if verify_certificate(sys, &cert) {
                return Ok(cert);
            }
        }
    }
    Err(Error::Invariant("infeasible system without a Farkas certificate".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::{rat, rat_int};

    fn row(c: &[i64], r: i64) -> LinRow {
        LinRow::new(c.iter().map(|&x| rat_int(x)).collect(), rat_int(r))
    }

    fn infeasible(sys: &LpSystem) -> FarkasCertificate {
        match lp_feasible(sys).unwrap() {
            LpResult::Infeasible(cert) => {
                assert!(verify_certificate(sys, &cert));
                cert
            }
            LpResult::Feasible(x) => panic!("expected infeasible, got {x:?}"),
        }
    }

    #[test]
    fn open_interval() {
        let mut sys = LpSystem::new(1);
        sys.strict.push(row(&[1], 1));
        sys.weak.push(row(&[-1], 0));
        let LpResult::Feasible(x) = lp_feasible(&sys).unwrap() else {
            panic!()
        };
        assert!(x[0] >= rat_int(0) && x[0] < rat_int(1));
    }

    #[test]
    fn x_less_than_x() {
        let mut sys = LpSystem::new(1);
        sys.strict.push(row(&[0], 0));
        let cert = infeasible(&sys);
        assert!(cert.strict[0].is_positive());
    }

    #[test]
    fn pinned_then_strict() {
        let mut sys = LpSystem::new(1);
        sys.weak.push(row(&[1], 1));
        sys.weak.push(row(&[-1], -1));
        sys.strict.push(row(&[1], 1));
        infeasible(&sys);
    }

    #[test]
    fn inconsistent_equations() {
        let mut sys = LpSystem::new(2);
        sys.eq.push(row(&[1, 1], 1));
        sys.eq.push(row(&[2, 2], 3));
        let cert = infeasible(&sys);
        assert!(cert.strict.is_empty());
    }

    #[test]
    fn simplex_optimum() {
        // max x + y, x + 2y + s1 = 4, 3x + y + s2 = 6
        let a = vec![
            vec![rat_int(1), rat_int(2), rat_int(1), rat_int(0)],
            vec![rat_int(3), rat_int(1), rat_int(0), rat_int(1)],
        ];
        let b = vec![rat_int(4), rat_int(6)];
        let c = vec![rat_int(1), rat_int(1), rat_int(0), rat_int(0)];
        let SimplexOutcome::Optimal { x, value } = simplex(&a, &b, &c) else {
            panic!()
        };
        assert_eq!(value, rat(14, 5));
        assert_eq!((x[0].clone(), x[1].clone()), (rat(8, 5), rat(6, 5)));
    }

    #[test]
    fn redundant_rows() {
        let mut sys = LpSystem::new(2);
        sys.eq.push(row(&[1, -1], 0));
        sys.eq.push(row(&[2, -2], 0));
        sys.strict.push(row(&[-1, 0], 0));
        let LpResult::Feasible(x) = lp_feasible(&sys).unwrap() else {
            panic!()
        };
        assert!(sys.satisfied_by(&x));
    }
}

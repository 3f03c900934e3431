//! Complete branch-and-decide search for single-prime instances that mix
//! lower and upper valuation constraints.
//!
//! Each node propagates implied lower bounds, splits into connected
//! components, and hands components of a single polynomial type to the
//! `>=` or `<=` solver. Mixed components branch on a variable:
//!
//! * a finite window `l <= v(x) <= u` enumerates `v` and the leading digit
//!   `i`, substituting `x = i p^v + x'` with `v(x') >= v + 1`;
//! * `v(x) >= l` with exclusions splits at the largest excluded value.
//!
//! Digit substitution is a bijection between the solution sets of parent and
//! child, so the parent's witness is rebuilt by adding `i p^v` back.

use std::sync::atomic::{AtomicUsize, Ordering};

use num_bigint::BigInt;
use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;

use crate::arith::{vp_finite, ExtInt, Prime, Rational};
use crate::error::{Error, Result};
use crate::geq::solve_geq_powersum;
use crate::leq::solve_leq_powersum;
use crate::linalg::QMatrix;
use crate::model::{witness_from_powersums, NormalizedInstance, ReasonCode, Refutation, VarProfile, Verdict};
use crate::powersum::PowerSum;
use crate::testkit::verify::verify_witness;

/// Upper limit on the number of children of a single branching step.
pub const MAX_CHILDREN: usize = 1 << 12;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SolveOptions {
    /// Assumed lower valuation bound for otherwise unbounded `<=` variables.
    pub window: Option<BigInt>,
    /// Worker threads for branch exploration; 1 keeps the witness deterministic.
    pub threads: usize,
    /// Node budget; exhausting it yields `Unknown`.
    pub max_nodes: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            window: None,
            threads: 1,
            max_nodes: 200_000,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Kind {
    Free,
    Geq,
    Leq,
    Window,
    GeqExcluded,
}

fn kind(pr: &VarProfile) -> Kind {
    match (pr.lower.is_finite(), pr.upper.is_finite(), !pr.excluded.is_empty()) {
        (false, false, false) => Kind::Free,
        (true, false, false) => Kind::Geq,
        (false, _, _) => Kind::Leq,
        (true, true, _) => Kind::Window,
        (true, false, true) => Kind::GeqExcluded,
    }
}

#[derive(Clone, Debug)]
struct Node {
    a: QMatrix,
    rhs: Vec<PowerSum>,
    prof: Vec<VarProfile>,
    /// Lower bounds derived by propagation, kept apart from the constraints.
    implied: Vec<ExtInt>,
    /// Index of each local column in the original instance.
    ids: Vec<usize>,
    windowed: bool,
    depth: usize,
}

impl Node {
    fn effective(&self, j: usize) -> VarProfile {
        let mut pr = self.prof[j].clone();
        if self.implied[j] > pr.lower {
            pr.lower = self.implied[j].clone();
            pr.tidy();
        }
        pr
    }

    fn restrict(&self, cols: &[usize], rows: &[usize]) -> Node {
        let mut a = QMatrix::zeros(rows.len(), cols.len());
        for (r, &i) in rows.iter().enumerate() {
            for (c, &j) in cols.iter().enumerate() {
                a[(r, c)] = self.a[(i, j)].clone();
            }
        }
        Node {
            a,
            rhs: rows.iter().map(|&i| self.rhs[i].clone()).collect(),
            prof: cols.iter().map(|&j| self.prof[j].clone()).collect(),
            implied: cols.iter().map(|&j| self.implied[j].clone()).collect(),
            ids: cols.iter().map(|&j| self.ids[j]).collect(),
            windowed: self.windowed,
            depth: self.depth,
        }
    }
}

#[derive(Clone, Debug)]
enum Outcome {
    Sat(Vec<PowerSum>),
    Unsat { windowed: bool, why: Refutation },
    Unknown(Refutation),
}

struct Child {
    node: Node,
    var: usize,
    offset: Option<PowerSum>,
}

struct Search<'a> {
    prime: Prime,
    names: &'a [String],
    opts: &'a SolveOptions,
    nodes: AtomicUsize,
    leaves: AtomicUsize,
    depth: AtomicUsize,
}

pub fn solve_complete(inst: &NormalizedInstance, opts: &SolveOptions) -> Result<Verdict> {
    if !inst.instance.orders.is_empty() {
        return Err(Error::InvalidInput(
            "order constraints are handled by the combiner".into(),
        ));
    }
    let primes = inst.primes();
    let prime = match primes.as_slice() {
        [] => return crate::combine::solve_linear(&inst.instance),
        [p] => *p,
        _ => {
            return Err(Error::InvalidInput(
                "several primes are handled by the combiner".into(),
            ))
        }
    };
    let n = inst.instance.num_vars();
    let rows: Vec<Vec<Rational>> = inst.instance.equations.iter().map(|e| e.coeffs.clone()).collect();
    let root = Node {
        a: QMatrix::from_rows(rows, n)?,
        rhs: inst
            .instance
            .equations
            .iter()
            .map(|e| PowerSum::constant(prime, e.rhs.clone()))
            .collect(),
        prof: inst.profiles[&prime].clone(),
        implied: vec![ExtInt::NegInf; n],
        ids: (0..n).collect(),
        windowed: false,
        depth: 0,
    };
    let search = Search {
        prime,
        names: &inst.instance.vars,
        opts,
        nodes: AtomicUsize::new(0),
        leaves: AtomicUsize::new(0),
        depth: AtomicUsize::new(0),
    };
    let outcome = if opts.threads > 1 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(opts.threads)
            .build()
            .map_err(|e| Error::InvalidInput(format!("thread pool: {e}")))?;
        pool.install(|| search.solve_node(root))?
    } else {
        search.solve_node(root)?
    };
    let stats = format!(
        "search: {} nodes, {} leaves, depth {}",
        search.nodes.load(Ordering::Relaxed),
        search.leaves.load(Ordering::Relaxed),
        search.depth.load(Ordering::Relaxed)
    );
    let verdict = match outcome {
        Outcome::Sat(values) => {
            let witness = witness_from_powersums(&inst.instance, values);
            verify_witness(&inst.instance, &witness)
                .map_err(|v| Error::Invariant(format!("complete solver produced a bad witness: {v}")))?;
            Verdict::sat(witness)
        }
        Outcome::Unsat { windowed: true, why } => Verdict::unknown(
            ReasonCode::UnsatWithinWindow,
            format!("unsatisfiable within the assumed window ({})", why.message),
        ),
        Outcome::Unsat { why, .. } => why.into_verdict(),
        Outcome::Unknown(why) => Verdict::unknown(why.code, why.message),
    };
    Ok(verdict.with_diagnostic(stats))
}

impl Search<'_> {
    fn parallel(&self) -> bool {
        self.opts.threads > 1
    }

    fn unsat(&self, node: &Node, code: ReasonCode, message: String) -> Outcome {
        Outcome::Unsat {
            windowed: node.windowed,
            why: Refutation::new(code, message),
        }
    }

    fn solve_node(&self, mut node: Node) -> Result<Outcome> {
        let count = self.nodes.fetch_add(1, Ordering::Relaxed) + 1;
        if count > self.opts.max_nodes {
            return Ok(Outcome::Unknown(Refutation::new(
                ReasonCode::SearchLimit,
                format!("node budget of {} exhausted", self.opts.max_nodes),
            )));
        }
        self.depth.fetch_max(node.depth, Ordering::Relaxed);

        self.propagate(&mut node);
        let n = node.a.cols();
        for j in 0..n {
            let eff = node.effective(j);
            if eff.is_empty() {
                let id = node.ids[j];
                return Ok(self.unsat(
                    &node,
                    ReasonCode::ImmediateUnsat { var: id },
                    format!("no admissible valuation remains for {}", self.names[id]),
                ));
            }
            if node.prof[j].lower.is_finite() && eff.lower.is_finite() {
                node.prof[j] = eff;
            }
        }

        // Columns forced to zero by propagation drop out.
        let active: Vec<usize> = (0..n).filter(|&j| node.implied[j] != ExtInt::PosInf).collect();
        let groups = components(&node.a, &active);
        for i in 0..node.a.rows() {
            let touched = active.iter().any(|&j| !node.a[(i, j)].is_zero());
            if !touched && !node.rhs[i].is_zero() {
                return Ok(self.unsat(
                    &node,
                    ReasonCode::ZeroRowNonzeroRhs { row: i },
                    format!("equation {i} has no free variable left and a nonzero right-hand side"),
                ));
            }
        }
        if groups.len() == 1 && groups[0].0.len() == n {
            return self.solve_component(node);
        }

        let subs: Vec<(Vec<usize>, Node)> = groups
            .into_iter()
            .map(|(cols, rows)| {
                let sub = node.restrict(&cols, &rows);
                (cols, sub)
            })
            .collect();
        let outcomes: Vec<Result<Outcome>> = if self.parallel() {
            subs.par_iter().map(|(_, s)| self.solve_component(s.clone())).collect()
        } else {
            let mut out = Vec::new();
            for (_, s) in &subs {
                let o = self.solve_component(s.clone());
                let stop = matches!(o, Ok(Outcome::Unsat { windowed: false, .. }) | Err(_));
                out.push(o);
                if stop {
                    break;
                }
            }
            out
        };

        let mut values = vec![PowerSum::zero(self.prime); n];
        let mut unknown = None;
        let mut windowed_unsat = None;
        for ((cols, _), o) in subs.iter().zip(outcomes) {
            match o? {
                Outcome::Sat(vals) => {
                    for (&j, v) in cols.iter().zip(vals) {
                        values[j] = v;
                    }
                }
                Outcome::Unsat { windowed: false, why } => {
                    return Ok(Outcome::Unsat { windowed: false, why });
                }
                u @ Outcome::Unsat { .. } => windowed_unsat = windowed_unsat.or(Some(u)),
                Outcome::Unknown(why) => unknown = unknown.or(Some(why)),
            }
        }
        if let Some(u) = windowed_unsat {
            return Ok(u);
        }
        if let Some(why) = unknown {
            return Ok(Outcome::Unknown(why));
        }
        Ok(Outcome::Sat(values))
    }

    /// Raises implied lower bounds using `v(sum) >= min v(terms)`.
    fn propagate(&self, node: &mut Node) {
        let (m, n) = (node.a.rows(), node.a.cols());
        let rhs_val: Vec<ExtInt> = node.rhs.iter().map(PowerSum::valuation).collect();
        let coeff_val: Vec<Vec<Option<BigInt>>> = (0..m)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        let a = &node.a[(i, j)];
                        (!a.is_zero()).then(|| BigInt::from(vp_finite(a, self.prime)))
                    })
                    .collect()
            })
            .collect();
        for _ in 0..4 * n.max(1) {
            let mut changed = false;
            for i in 0..m {
                let terms: Vec<(usize, ExtInt)> = (0..n)
                    .filter_map(|j| {
                        let v = coeff_val[i][j].as_ref()?;
                        let l = node.prof[j].lower.clone().max(node.implied[j].clone());
                        Some((j, l.add_int(v)))
                    })
                    .collect();
                let mut first: Option<(usize, &ExtInt)> = None;
                let mut second = &ExtInt::PosInf;
                for (j, t) in &terms {
                    match first {
                        Some((_, f)) if t >= f => second = second.min(t),
                        Some((_, f)) => {
                            second = f;
                            first = Some((*j, t));
                        }
                        None => first = Some((*j, t)),
                    }
                }
                let Some((argmin, min)) = first else { continue };
                let mut updates = Vec::new();
                for (j, _) in &terms {
                    let others = if *j == argmin { second } else { min };
                    let bound = others.clone().min(rhs_val[i].clone());
                    if bound == ExtInt::NegInf {
                        continue;
                    }
                    let v = coeff_val[i][*j].as_ref().expect("nonzero coefficient");
                    let candidate = bound.add_int(&-v);
                    let current = node.prof[*j].lower.clone().max(node.implied[*j].clone());
                    if candidate > current {
                        updates.push((*j, candidate));
                    }
                }
                for (j, c) in updates {
                    node.implied[j] = c;
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
    }

    fn solve_component(&self, node: Node) -> Result<Outcome> {
        let kinds: Vec<Kind> = node.prof.iter().map(kind).collect();
        let has_geq = kinds.contains(&Kind::Geq);
        let has_leq = kinds.contains(&Kind::Leq);
        let branching = kinds.iter().any(|k| matches!(k, Kind::Window | Kind::GeqExcluded));
        if !branching && !(has_geq && has_leq) {
            return self.leaf(&node, has_geq);
        }
        if let Some(out) = self.relaxations(&node)? {
            return Ok(out);
        }

        // Smallest finite window first.
        let mut best: Option<(BigInt, usize)> = None;
        for (j, k) in kinds.iter().enumerate() {
            if *k != Kind::Window {
                continue;
            }
            let width = window_width(&node.prof[j]);
            if best.as_ref().is_none_or(|(w, _)| width < *w) {
                best = Some((width, j));
            }
        }
        if let Some((width, j)) = best {
            return self.branch_window(&node, j, &width);
        }
        if let Some(j) = kinds.iter().position(|k| *k == Kind::GeqExcluded) {
            let max_d = node.prof[j].excluded.iter().next_back().cloned().expect("nonempty");
            let mut below = node.clone();
            below.prof[j].upper = ExtInt::Fin(max_d.clone());
            below.depth += 1;
            let mut above = node.clone();
            above.prof[j].lower = ExtInt::Fin(max_d + 1);
            above.prof[j].excluded.clear();
            above.depth += 1;
            let children = vec![
                Child { node: below, var: j, offset: None },
                Child { node: above, var: j, offset: None },
            ];
            return self.explore(children);
        }
        self.resolve_mix(&node, &kinds)
    }

    fn leaf(&self, node: &Node, geq: bool) -> Result<Outcome> {
        self.leaves.fetch_add(1, Ordering::Relaxed);
        let result = if geq {
            let lower: Vec<ExtInt> = node.prof.iter().map(|p| p.lower.clone()).collect();
            solve_geq_powersum(&node.a, &node.rhs, self.prime, &lower, &vec![false; lower.len()])?
                .map(|s| s.witness)
        } else {
            let upper: Vec<ExtInt> = node.prof.iter().map(|p| p.upper.clone()).collect();
            let excluded: Vec<_> = node.prof.iter().map(|p| p.excluded.clone()).collect();
            solve_leq_powersum(&node.a, &node.rhs, self.prime, &upper, &excluded).map(|s| s.witness)
        };
        Ok(match result {
            Ok(values) => Outcome::Sat(values),
            Err(why) => Outcome::Unsat {
                windowed: node.windowed,
                why: remap(why, &node.ids),
            },
        })
    }

    /// Decides the node outright when a relaxation is infeasible, or when a
    /// relaxation's witness happens to satisfy every constraint.
    fn relaxations(&self, node: &Node) -> Result<Option<Outcome>> {
        let admits_all = |values: &[PowerSum]| {
            values
                .iter()
                .zip(&node.prof)
                .all(|(x, pr)| pr.admits(&x.valuation()))
        };
        let lower: Vec<ExtInt> = node.prof.iter().map(|p| p.lower.clone()).collect();
        match solve_geq_powersum(&node.a, &node.rhs, self.prime, &lower, &vec![false; lower.len()])? {
            Err(why) => {
                return Ok(Some(Outcome::Unsat {
                    windowed: node.windowed,
                    why: remap(why, &node.ids),
                }))
            }
            Ok(sol) if admits_all(&sol.witness) => return Ok(Some(Outcome::Sat(sol.witness))),
            Ok(_) => {}
        }
        let upper: Vec<ExtInt> = node.prof.iter().map(|p| p.upper.clone()).collect();
        let excluded: Vec<_> = node.prof.iter().map(|p| p.excluded.clone()).collect();
        match solve_leq_powersum(&node.a, &node.rhs, self.prime, &upper, &excluded) {
            Err(why) => Ok(Some(Outcome::Unsat {
                windowed: node.windowed,
                why: remap(why, &node.ids),
            })),
            Ok(sol) if admits_all(&sol.witness) => Ok(Some(Outcome::Sat(sol.witness))),
            Ok(_) => Ok(None),
        }
    }

    fn branch_window(&self, node: &Node, j: usize, width: &BigInt) -> Result<Outcome> {
        let p = self.prime.get();
        let digits = (p - 1) as u128;
        let total = width.to_u128().map(|w| w * digits);
        if total.is_none_or(|t| t > MAX_CHILDREN as u128) {
            return Ok(Outcome::Unknown(Refutation::new(
                ReasonCode::SearchLimit,
                format!(
                    "window of {} valuations times {} digits on {} exceeds the branching limit",
                    width,
                    digits,
                    self.names[node.ids[j]]
                ),
            )));
        }
        let pr = &node.prof[j];
        let (lo, hi) = match (&pr.lower, &pr.upper) {
            (ExtInt::Fin(l), ExtInt::Fin(u)) => (l.clone(), u.clone()),
            _ => unreachable!("window bounds are finite"),
        };
        let mut children = Vec::new();
        let mut v = lo;
        while v <= hi {
            if !pr.excluded.contains(&v) {
                for i in 1..p {
                    children.push(self.digit_child(node, j, i, &v));
                }
            }
            v += 1;
        }
        self.explore(children)
    }

    /// `x_j = i p^v + x'` with `v(x') >= v + 1`.
    fn digit_child(&self, node: &Node, j: usize, digit: u64, v: &BigInt) -> Child {
        let offset = PowerSum::monomial(self.prime, Rational::from_integer(BigInt::from(digit)), v.clone());
        let mut child = node.clone();
        for i in 0..child.a.rows() {
            let a = &node.a[(i, j)];
            if !a.is_zero() {
                child.rhs[i] = child.rhs[i].add_scaled(&-a.clone(), &offset);
            }
        }
        child.prof[j] = VarProfile {
            lower: ExtInt::Fin(v + BigInt::one()),
            ..VarProfile::default()
        };
        child.implied[j] = ExtInt::NegInf;
        child.depth += 1;
        Child {
            node: child,
            var: j,
            offset: Some(offset),
        }
    }

    /// A component with unbounded `>=` and `<=` variables and nothing to
    /// branch on: bound the `<=` side from below, by propagation if possible,
    /// otherwise by the user's window.
    fn resolve_mix(&self, node: &Node, kinds: &[Kind]) -> Result<Outcome> {
        let leq: Vec<usize> = (0..kinds.len()).filter(|&j| kinds[j] == Kind::Leq).collect();
        let mut child = node.clone();
        child.depth += 1;
        let mut changed = false;
        for &j in &leq {
            if node.implied[j].is_finite() {
                child.prof[j].lower = node.implied[j].clone();
                child.prof[j].tidy();
                changed = true;
            }
        }
        if !changed {
            let Some(w) = &self.opts.window else {
                let mut vars: Vec<usize> = (0..kinds.len())
                    .filter(|&j| matches!(kinds[j], Kind::Leq | Kind::Geq))
                    .map(|j| node.ids[j])
                    .collect();
                vars.sort_unstable();
                let names: Vec<&str> = vars.iter().map(|&v| self.names[v].as_str()).collect();
                return Ok(Outcome::Unknown(Refutation::new(
                    ReasonCode::UnboundedMix { vars },
                    format!(
                        "equations link unbounded >= and <= variables ({}); rerun with a window",
                        names.join(", ")
                    ),
                )));
            };
            for &j in &leq {
                child.prof[j].lower = ExtInt::Fin(w.clone());
                child.prof[j].tidy();
            }
            child.windowed = true;
        }
        self.solve_node(child)
    }

    fn explore(&self, children: Vec<Child>) -> Result<Outcome> {
        let finish = |c: &Child, o: Outcome| match (o, &c.offset) {
            (Outcome::Sat(mut vals), Some(off)) => {
                vals[c.var] = vals[c.var].add_unchecked(off);
                Outcome::Sat(vals)
            }
            (o, _) => o,
        };
        let outcomes: Vec<Outcome> = if self.parallel() {
            let results: Vec<Result<Outcome>> = children
                .par_iter()
                .map(|c| self.solve_node(c.node.clone()).map(|o| finish(c, o)))
                .collect();
            results.into_iter().collect::<Result<_>>()?
        } else {
            let mut out = Vec::new();
            for c in &children {
                let o = finish(c, self.solve_node(c.node.clone())?);
                let sat = matches!(o, Outcome::Sat(_));
                out.push(o);
                if sat {
                    break;
                }
            }
            out
        };

        let mut unknown = None;
        let mut windowed = false;
        let mut last_unsat = None;
        for o in outcomes {
            match o {
                sat @ Outcome::Sat(_) => return Ok(sat),
                Outcome::Unknown(why) => unknown = unknown.or(Some(why)),
                Outcome::Unsat { windowed: w, why } => {
                    windowed |= w;
                    last_unsat = Some(why);
                }
            }
        }
        if let Some(why) = unknown {
            return Ok(Outcome::Unknown(why));
        }
        let why = match (children.len(), last_unsat) {
            (1, Some(why)) => why,
            _ => Refutation::new(
                ReasonCode::AllBranchesClosed,
                format!("all {} branches closed", children.len()),
            ),
        };
        Ok(Outcome::Unsat { windowed, why })
    }
}

/// Number of admissible valuations in a finite window.
fn window_width(pr: &VarProfile) -> BigInt {
    match (&pr.lower, &pr.upper) {
        (ExtInt::Fin(l), ExtInt::Fin(u)) => {
            let blocked = pr.excluded.iter().filter(|d| *d >= l && *d <= u).count();
            (u - l + 1u32) - BigInt::from(blocked)
        }
        _ => unreachable!("window bounds are finite"),
    }
}

/// Connected components of the active columns, with the rows touching them.
fn components(a: &QMatrix, active: &[usize]) -> Vec<(Vec<usize>, Vec<usize>)> {
    let n = a.cols();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while parent[r] != r {
            r = parent[r];
        }
        let mut y = x;
        while parent[y] != r {
            let next = parent[y];
            parent[y] = r;
            y = next;
        }
        r
    }
    let is_active: Vec<bool> = (0..n).map(|j| active.contains(&j)).collect();
    for i in 0..a.rows() {
        let mut first = None;
        for j in 0..n {
            if !is_active[j] || a[(i, j)].is_zero() {
                continue;
            }
            match first {
                None => first = Some(j),
                Some(f) => {
                    let (rf, rj) = (find(&mut parent, f), find(&mut parent, j));
                    parent[rj.max(rf)] = rj.min(rf);
                }
            }
        }
    }
    let mut groups: Vec<(usize, Vec<usize>, Vec<usize>)> = Vec::new();
    for &j in active {
        let r = find(&mut parent, j);
        match groups.iter_mut().find(|g| g.0 == r) {
            Some(g) => g.1.push(j),
            None => groups.push((r, vec![j], Vec::new())),
        }
    }
    for i in 0..a.rows() {
        if let Some(j) = (0..n).find(|&j| is_active[j] && !a[(i, j)].is_zero()) {
            let r = find(&mut parent, j);
            if let Some(g) = groups.iter_mut().find(|g| g.0 == r) {
                g.2.push(i);
            }
        }
    }
    groups.into_iter().map(|(_, c, r)| (c, r)).collect()
}

fn remap(mut why: Refutation, ids: &[usize]) -> Refutation {
    if let ReasonCode::FixedCoordinate { var } = &mut why.code {
        *var = ids[*var];
    }
    why
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::rat_int;
    use crate::model::{normalize, Instance, Status, ValRel};

    fn p(n: u64) -> Prime {
        Prime::new(n).unwrap()
    }

    fn run(inst: &Instance, opts: &SolveOptions) -> Verdict {
        let norm = normalize(inst).unwrap().unwrap();
        solve_complete(&norm, opts).unwrap()
    }

    #[test]
    fn window_and_digit_branch() {
        let mut inst = Instance::new(["x", "y"]);
        inst.add_equation(vec![rat_int(1), rat_int(1)], rat_int(1));
        inst.add_valuation(p(3), 0, ValRel::Ge, 0)
            .add_valuation(p(3), 0, ValRel::Le, 0)
            .add_valuation(p(3), 1, ValRel::Ge, 1);
        let v = run(&inst, &SolveOptions::default());
        assert_eq!(v.status, Status::Sat);
    }

    #[test]
    fn equality_at_three() {
        for rhs in [3, 2, 1] {
            let mut inst = Instance::new(["x", "y"]);
            inst.add_equation(vec![rat_int(1), rat_int(1)], rat_int(rhs));
            inst.add_valuation(p(3), 0, ValRel::Eq, 0)
                .add_valuation(p(3), 1, ValRel::Eq, 0);
            assert_eq!(run(&inst, &SolveOptions::default()).status, Status::Sat, "rhs {rhs}");
        }
        let mut inst = Instance::new(["x", "y"]);
        inst.add_equation(vec![rat_int(3), rat_int(3)], rat_int(1));
        inst.add_valuation(p(3), 0, ValRel::Eq, 0)
            .add_valuation(p(3), 1, ValRel::Eq, 0);
        assert_eq!(run(&inst, &SolveOptions::default()).status, Status::Unsat);
    }

    #[test]
    fn excluded_value_closes_every_branch() {
        let mut inst = Instance::new(["x", "y"]);
        inst.add_equation(vec![rat_int(1), rat_int(1)], rat_int(0));
        inst.add_valuation(p(2), 0, ValRel::Eq, 0)
            .add_valuation(p(2), 1, ValRel::Ne, 0)
            .add_valuation(p(2), 1, ValRel::Ge, -3);
        assert_eq!(run(&inst, &SolveOptions::default()).status, Status::Unsat);
    }

    #[test]
    fn unbounded_mix_needs_a_window() {
        let mut inst = Instance::new(["x", "y", "z"]);
        inst.add_equation(vec![rat_int(1), rat_int(1), rat_int(1)], rat_int(0));
        inst.add_valuation(p(2), 0, ValRel::Ge, 0)
            .add_valuation(p(2), 1, ValRel::Le, -1)
            .add_valuation(p(2), 2, ValRel::Le, 5);
        let v = run(&inst, &SolveOptions::default());
        assert_ne!(v.status, Status::Unsat);
        let v = run(&inst, &SolveOptions { window: Some(BigInt::from(-3)), ..SolveOptions::default() });
        assert_eq!(v.status, Status::Sat);
    }

    #[test]
    fn parallel_agrees() {
        let mut inst = Instance::new(["x", "y", "w"]);
        inst.add_equation(vec![rat_int(1), rat_int(1), rat_int(-1)], rat_int(0));
        inst.add_valuation(p(5), 0, ValRel::Eq, 0)
            .add_valuation(p(5), 1, ValRel::Eq, 0)
            .add_valuation(p(5), 2, ValRel::Ge, 1);
        let seq = run(&inst, &SolveOptions::default());
        let par = run(&inst, &SolveOptions { threads: 4, ..SolveOptions::default() });
        assert_eq!(seq.status, Status::Sat);
        assert_eq!(par.status, Status::Sat);
    }
}

//! Instances, per-variable valuation profiles, fragment classification and
//! the uniform verdict type.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::arith::{ExtInt, Prime, Rational};
use crate::error::{Error, Result};
use crate::powersum::PowerSum;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ValRel {
    Le,
    Ge,
    Eq,
    Ne,
    /// Sugar for `Le` with bound `c - 1`.
    Lt,
    /// Sugar for `Ge` with bound `c + 1`.
    Gt,
}

impl ValRel {
    pub fn symbol(self) -> &'static str {
        match self {
            ValRel::Le => "<=",
            ValRel::Ge => ">=",
            ValRel::Eq => "==",
            ValRel::Ne => "!=",
            ValRel::Lt => "<",
            ValRel::Gt => ">",
        }
    }

    /// Rewrites strict forms into weak ones.
    pub fn desugar(self, bound: &BigInt) -> (ValRel, BigInt) {
        match self {
            ValRel::Lt => (ValRel::Le, bound - 1),
            ValRel::Gt => (ValRel::Ge, bound + 1),
            other => (other, bound.clone()),
        }
    }

    pub fn holds(self, value: &ExtInt, bound: &BigInt) -> bool {
        let c = ExtInt::Fin(bound.clone());
        match self {
            ValRel::Le => *value <= c,
            ValRel::Ge => *value >= c,
            ValRel::Eq => *value == c,
            ValRel::Ne => *value != c,
            ValRel::Lt => *value < c,
            ValRel::Gt => *value > c,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum OrdRel {
    Lt,
    Le,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Equation {
    pub coeffs: Vec<Rational>,
    pub rhs: Rational,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ValConstraint {
    pub prime: Prime,
    pub var: usize,
    pub rel: ValRel,
    pub bound: BigInt,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OrderConstraint {
    pub coeffs: Vec<Rational>,
    pub rel: OrdRel,
    pub rhs: Rational,
}

/// Linear equations, valuation constraints for any number of primes, and
/// linear order constraints over named rational variables.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Instance {
    pub vars: Vec<String>,
    pub equations: Vec<Equation>,
    pub valuations: Vec<ValConstraint>,
    pub orders: Vec<OrderConstraint>,
}

impl Instance {
    pub fn new(vars: impl IntoIterator<Item = impl Into<String>>) -> Self {
        Instance {
            vars: vars.into_iter().map(Into::into).collect(),
            ..Default::default()
        }
    }

    pub fn num_vars(&self) -> usize {
        self.vars.len()
    }

    pub fn var_index(&self, name: &str) -> Option<usize> {
        self.vars.iter().position(|v| v == name)
    }

    pub fn add_equation(&mut self, coeffs: Vec<Rational>, rhs: Rational) -> &mut Self {
        self.equations.push(Equation { coeffs, rhs });
        self
    }

    pub fn add_valuation(&mut self, prime: Prime, var: usize, rel: ValRel, bound: impl Into<BigInt>) -> &mut Self {
        self.valuations.push(ValConstraint {
            prime,
            var,
            rel,
            bound: bound.into(),
        });
        self
    }

    pub fn add_order(&mut self, coeffs: Vec<Rational>, rel: OrdRel, rhs: Rational) -> &mut Self {
        self.orders.push(OrderConstraint { coeffs, rel, rhs });
        self
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.vars.len();
        let names: BTreeSet<&String> = self.vars.iter().collect();
        if names.len() != n {
            return Err(Error::InvalidInput("duplicate variable name".into()));
        }
        for (i, e) in self.equations.iter().enumerate() {
            if e.coeffs.len() != n {
                return Err(Error::DimensionMismatch(format!(
                    "equation {i} has {} coefficients for {n} variables",
                    e.coeffs.len()
                )));
            }
        }
        for (i, o) in self.orders.iter().enumerate() {
            if o.coeffs.len() != n {
                return Err(Error::DimensionMismatch(format!(
                    "order constraint {i} has {} coefficients for {n} variables",
                    o.coeffs.len()
                )));
            }
        }
        for v in &self.valuations {
            if v.var >= n {
                return Err(Error::InvalidInput(format!("valuation on unknown variable #{}", v.var)));
            }
        }
        Ok(())
    }

    /// Distinct primes, ascending.
    pub fn primes(&self) -> Vec<Prime> {
        let set: BTreeSet<Prime> = self.valuations.iter().map(|v| v.prime).collect();
        set.into_iter().collect()
    }

    /// Same variables and equations, no valuation or order constraints.
    pub fn equations_only(&self) -> Instance {
        Instance {
            vars: self.vars.clone(),
            equations: self.equations.clone(),
            valuations: Vec::new(),
            orders: Vec::new(),
        }
    }
}

/// Merged valuation constraints on one variable for one prime.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VarProfile {
    pub lower: ExtInt,
    pub upper: ExtInt,
    /// Excluded valuations, restricted to `[lower, upper]`.
    pub excluded: BTreeSet<BigInt>,
    /// Set at `p = 2` when the window is a single value, i.e. `v_2(x) == c`.
    pub exact: bool,
}

impl Default for VarProfile {
    fn default() -> Self {
        VarProfile {
            lower: ExtInt::NegInf,
            upper: ExtInt::PosInf,
            excluded: BTreeSet::new(),
            exact: false,
        }
    }
}

impl VarProfile {
    /// Whether `v_p(0) = inf` is admissible, i.e. the variable may be zero.
    pub fn allows_infinity(&self) -> bool {
        self.upper == ExtInt::PosInf
    }

    pub fn admits(&self, v: &ExtInt) -> bool {
        if *v < self.lower || *v > self.upper {
            return false;
        }
        match v {
            ExtInt::Fin(x) => !self.excluded.contains(x),
            _ => true,
        }
    }

    /// No constraint at all.
    pub fn is_free(&self) -> bool {
        self.lower == ExtInt::NegInf && self.upper == ExtInt::PosInf && self.excluded.is_empty()
    }

    /// Drops exclusions outside the window.
    pub fn tidy(&mut self) {
        let (lo, hi) = (self.lower.clone(), self.upper.clone());
        self.excluded
            .retain(|d| lo.cmp_int(d).is_le() && hi.cmp_int(d).is_ge());
    }

    /// True when no value of `Z u {inf}` satisfies the profile.
    pub fn is_empty(&self) -> bool {
        if self.lower > self.upper {
            return true;
        }
        match (&self.lower, &self.upper) {
            (ExtInt::Fin(l), ExtInt::Fin(u)) => {
                let width = u - l + BigInt::one();
                let blocked = self
                    .excluded
                    .iter()
                    .filter(|d| *d >= l && *d <= u)
                    .count();
                width <= BigInt::from(blocked)
            }
            _ => false,
        }
    }

    /// Smallest admissible finite valuation at or above `lower`, or near `upper`.
    pub fn some_finite_value(&self) -> Option<BigInt> {
        let mut v = match (&self.lower, &self.upper) {
            (ExtInt::Fin(l), _) => l.clone(),
            (_, ExtInt::Fin(u)) => u.clone(),
            _ => BigInt::zero(),
        };
        let step = if self.lower.is_finite() || !self.upper.is_finite() {
            BigInt::one()
        } else {
            -BigInt::one()
        };
        loop {
            let ev = ExtInt::Fin(v.clone());
            if ev > self.upper || ev < self.lower {
                return None;
            }
            if !self.excluded.contains(&v) {
                return Some(v);
            }
            v += &step;
        }
    }
}

/// Which relation kinds occur for one prime.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct KindSet {
    pub le: bool,
    pub ge: bool,
    pub eq: bool,
    pub ne: bool,
}

impl KindSet {
    fn record(&mut self, rel: ValRel) {
        match rel {
            ValRel::Le | ValRel::Lt => self.le = true,
            ValRel::Ge | ValRel::Gt => self.ge = true,
            ValRel::Eq => self.eq = true,
            ValRel::Ne => self.ne = true,
        }
    }

    pub fn is_empty(&self) -> bool {
        !(self.le || self.ge || self.eq || self.ne)
    }
}

/// Profiles of every variable for every prime occurring in the instance.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NormalizedInstance {
    pub instance: Instance,
    pub profiles: BTreeMap<Prime, Vec<VarProfile>>,
    pub kinds: BTreeMap<Prime, KindSet>,
}

impl NormalizedInstance {
    pub fn primes(&self) -> Vec<Prime> {
        self.profiles.keys().copied().collect()
    }

    /// Restriction to a single prime, keeping equations and orders.
    pub fn for_prime(&self, p: Prime) -> NormalizedInstance {
        let mut profiles = BTreeMap::new();
        let mut kinds = BTreeMap::new();
        if let Some(pr) = self.profiles.get(&p) {
            profiles.insert(p, pr.clone());
            kinds.insert(p, self.kinds[&p]);
        }
        let mut instance = self.instance.clone();
        instance.valuations.retain(|v| v.prime == p);
        NormalizedInstance {
            instance,
            profiles,
            kinds,
        }
    }
}

/// A variable whose valuation constraints cannot all hold.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ImmediateUnsat {
    pub prime: Prime,
    pub var: usize,
    pub detail: String,
}

/// Merges each variable's constraints into its most restrictive form.
pub fn normalize(inst: &Instance) -> Result<std::result::Result<NormalizedInstance, ImmediateUnsat>> {
    inst.validate()?;
    let n = inst.num_vars();
    let mut profiles: BTreeMap<Prime, Vec<VarProfile>> = BTreeMap::new();
    let mut kinds: BTreeMap<Prime, KindSet> = BTreeMap::new();
    let mut equalities: BTreeMap<(Prime, usize), BTreeSet<BigInt>> = BTreeMap::new();
    for vc in &inst.valuations {
        let prof = &mut profiles
            .entry(vc.prime)
            .or_insert_with(|| vec![VarProfile::default(); n])[vc.var];
        kinds.entry(vc.prime).or_default().record(vc.rel);
        let (rel, c) = vc.rel.desugar(&vc.bound);
        let ec = ExtInt::Fin(c.clone());
        match rel {
            ValRel::Ge => prof.lower = prof.lower.clone().max(ec),
            ValRel::Le => prof.upper = prof.upper.clone().min(ec),
            ValRel::Eq => {
                prof.lower = prof.lower.clone().max(ec.clone());
                prof.upper = prof.upper.clone().min(ec);
                equalities.entry((vc.prime, vc.var)).or_default().insert(c);
            }
            ValRel::Ne => {
                prof.excluded.insert(c);
            }
            ValRel::Lt | ValRel::Gt => unreachable!("desugared"),
        }
    }
    for (&p, profs) in profiles.iter_mut() {
        for (var, prof) in profs.iter_mut().enumerate() {
            if let Some(eqs) = equalities.get(&(p, var)) {
                if let Some(c) = eqs.iter().find(|c| prof.excluded.contains(*c)) {
                    return Ok(Err(ImmediateUnsat {
                        prime: p,
                        var,
                        detail: format!("v_{p}(x) == {c} contradicts v_{p}(x) != {c}"),
                    }));
                }
            }
            if prof.is_empty() {
                return Ok(Err(ImmediateUnsat {
                    prime: p,
                    var,
                    detail: format!(
                        "no valuation in [{}, {}] outside the excluded set",
                        prof.lower, prof.upper
                    ),
                }));
            }
            prof.tidy();
            prof.exact = p.get() == 2 && prof.lower.is_finite() && prof.lower == prof.upper;
        }
    }
    Ok(Ok(NormalizedInstance {
        instance: inst.clone(),
        profiles,
        kinds,
    }))
}

/// Per-prime fragment of the complexity dichotomy.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum PrimeFragment {
    /// Only `>=` (and `==` when `p = 2`): polynomial time.
    GeqP,
    /// Only `<=` and `!=`: polynomial time.
    LeqP,
    /// Anything else: NP-complete.
    Hard,
    /// No valuation constraints.
    None,
}

impl PrimeFragment {
    pub fn name(self) -> &'static str {
        match self {
            PrimeFragment::GeqP => "GEQ_P",
            PrimeFragment::LeqP => "LEQ_P",
            PrimeFragment::Hard => "HARD",
            PrimeFragment::None => "NONE",
        }
    }

    pub fn complexity(self) -> &'static str {
        match self {
            PrimeFragment::GeqP | PrimeFragment::LeqP | PrimeFragment::None => "in P",
            PrimeFragment::Hard => "NP-complete",
        }
    }

    /// Label printed by the CLI, e.g. `HARD (NP-complete fragment)`.
    pub fn label(self) -> String {
        match self {
            PrimeFragment::Hard => "HARD (NP-complete fragment)".to_string(),
            other => format!("{} (polynomial-time fragment)", other.name()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FragmentClass {
    pub per_prime: BTreeMap<Prime, PrimeFragment>,
    pub has_order: bool,
    pub multi_prime: bool,
}

impl FragmentClass {
    pub fn is_tractable(&self) -> bool {
        self.per_prime.values().all(|f| *f != PrimeFragment::Hard)
    }
}

/// Classification from the set of relation kinds used for one prime.
pub fn classify_kinds(p: Prime, k: KindSet) -> PrimeFragment {
    if k.is_empty() {
        return PrimeFragment::None;
    }
    let geq_side = k.ge || k.eq;
    let leq_side = k.le || k.ne;
    if k.eq && p.get() != 2 {
        PrimeFragment::Hard
    } else if geq_side && leq_side {
        PrimeFragment::Hard
    } else if geq_side {
        PrimeFragment::GeqP
    } else {
        PrimeFragment::LeqP
    }
}

pub fn classify(inst: &NormalizedInstance) -> FragmentClass {
    let per_prime: BTreeMap<Prime, PrimeFragment> = inst
        .kinds
        .iter()
        .map(|(&p, &k)| (p, classify_kinds(p, k)))
        .collect();
    FragmentClass {
        multi_prime: per_prime.len() > 1,
        per_prime,
        has_order: !inst.instance.orders.is_empty(),
    }
}

/// Classification straight from the kinds present, without the emptiness
/// checks of [`normalize`].
pub fn classify_instance(inst: &Instance) -> FragmentClass {
    let mut kinds: BTreeMap<Prime, KindSet> = BTreeMap::new();
    for v in &inst.valuations {
        kinds.entry(v.prime).or_default().record(v.rel);
    }
    let per_prime: BTreeMap<Prime, PrimeFragment> =
        kinds.into_iter().map(|(p, k)| (p, classify_kinds(p, k))).collect();
    FragmentClass {
        multi_prime: per_prime.len() > 1,
        per_prime,
        has_order: !inst.orders.is_empty(),
    }
}

/// `ceil(log2 |a|)`, zero for `|a| <= 1`.
fn log_bits(a: &BigInt) -> u64 {
    let a = a.abs();
    if a <= BigInt::one() {
        return 0;
    }
    // bits(a - 1) is ceil(log2 a) for a >= 2.
    (a - BigInt::one()).bits()
}

/// `h(a/b) = 1 + log|a| + log|b|`, with `h(0) = 1`.
pub fn height(q: &Rational) -> u64 {
    if q.is_zero() {
        return 1;
    }
    1 + log_bits(q.numer()) + log_bits(q.denom())
}

fn height_int(c: &BigInt) -> u64 {
    height(&Rational::from_integer(c.clone()))
}

/// Input size `C = s + sum h(entry)` over the equation matrix and right-hand
/// side, the order matrix and right-hand side, and each valuation constraint's
/// prime and bound as 1x1 matrices.
pub fn instance_size(inst: &Instance) -> u64 {
    let n = inst.num_vars();
    let m = inst.equations.len();
    let k = inst.orders.len();
    let mut s = 0usize;
    let mut total = 0u64;
    if m > 0 {
        s = s.max(m).max(n);
        for e in &inst.equations {
            total += e.coeffs.iter().map(height).sum::<u64>();
            total += height(&e.rhs);
        }
    }
    if k > 0 {
        s = s.max(k).max(n);
        for o in &inst.orders {
            total += o.coeffs.iter().map(height).sum::<u64>();
            total += height(&o.rhs);
        }
    }
    for v in &inst.valuations {
        s = s.max(1);
        total += height_int(&BigInt::from(v.prime.get())) + height_int(&v.bound);
    }
    s as u64 + total
}

/// Value of one variable in a witness.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum WitnessValue {
    Rational(Rational),
    PowerSum(PowerSum),
}

impl fmt::Display for WitnessValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WitnessValue::Rational(q) => write!(f, "{}", crate::arith::format_rational(q)),
            WitnessValue::PowerSum(s) => write!(f, "p={} {}", s.prime(), s),
        }
    }
}

/// Variable name to value.
pub type Witness = BTreeMap<String, WitnessValue>;

pub fn witness_from_powersums(inst: &Instance, values: Vec<PowerSum>) -> Witness {
    inst.vars
        .iter()
        .cloned()
        .zip(values.into_iter().map(WitnessValue::PowerSum))
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Status {
    Sat,
    Unsat,
    Unknown,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Sat => "sat",
            Status::Unsat => "unsat",
            Status::Unknown => "unknown",
        }
    }

    pub fn exit_code(self) -> i32 {
        match self {
            Status::Sat => 0,
            Status::Unsat => 1,
            Status::Unknown => 2,
        }
    }
}

/// Machine-readable reason attached to a verdict.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ReasonCode {
    /// A witness was found and verified.
    Witness,
    /// Satisfiable; the witness is omitted (several primes, or orders plus primes).
    DecisionOnly,
    /// `A x = b` has no rational solution.
    NoRationalSolution,
    /// A coordinate is constant on the solution space with a forbidden valuation.
    FixedCoordinate { var: usize },
    /// A zero row of the echelon form has a nonzero right-hand side.
    ZeroRowNonzeroRhs { row: usize },
    /// The valuation condition fails for a pivot row.
    PivotCondition { row: usize },
    /// Conflicting constraints on a single variable.
    ImmediateUnsat { var: usize },
    /// Every branch of the complete search closed.
    AllBranchesClosed,
    /// The order part is infeasible; certified by a Farkas combination.
    LpInfeasible,
    /// Unsatisfiable for one prime of several.
    PrimeUnsat { prime: u64 },
    /// An equation mixes unbounded `>=` and `<=` variables.
    UnboundedMix { vars: Vec<usize> },
    /// Every branch closed, but only after assuming the lower window.
    UnsatWithinWindow,
    /// The search hit its node or branching limit.
    SearchLimit,
}

impl ReasonCode {
    pub fn name(&self) -> &'static str {
        match self {
            ReasonCode::Witness => "witness",
            ReasonCode::DecisionOnly => "decision_only",
            ReasonCode::NoRationalSolution => "no_rational_solution",
            ReasonCode::FixedCoordinate { .. } => "fixed_coordinate",
            ReasonCode::ZeroRowNonzeroRhs { .. } => "zero_row_nonzero_rhs",
            ReasonCode::PivotCondition { .. } => "pivot_condition",
            ReasonCode::ImmediateUnsat { .. } => "immediate_unsat",
            ReasonCode::AllBranchesClosed => "all_branches_closed",
            ReasonCode::LpInfeasible => "lp_infeasible",
            ReasonCode::PrimeUnsat { .. } => "prime_unsat",
            ReasonCode::UnboundedMix { .. } => "unbounded_mix",
            ReasonCode::UnsatWithinWindow => "unsat_within_window",
            ReasonCode::SearchLimit => "search_limit",
        }
    }
}

/// Why a problem has no solution.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Refutation {
    pub code: ReasonCode,
    pub message: String,
}

impl Refutation {
    pub fn new(code: ReasonCode, message: impl Into<String>) -> Self {
        Refutation {
            code,
            message: message.into(),
        }
    }

    pub fn into_verdict(self) -> Verdict {
        Verdict::unsat(self.code, self.message)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Verdict {
    pub status: Status,
    pub witness: Option<Witness>,
    pub code: ReasonCode,
    pub message: String,
    pub diagnostics: Vec<String>,
}

impl Verdict {
    pub fn sat(witness: Witness) -> Self {
        Verdict {
            status: Status::Sat,
            witness: Some(witness),
            code: ReasonCode::Witness,
            message: String::new(),
            diagnostics: Vec::new(),
        }
    }

    pub fn sat_without_witness(message: impl Into<String>) -> Self {
        Verdict {
            status: Status::Sat,
            witness: None,
            code: ReasonCode::DecisionOnly,
            message: message.into(),
            diagnostics: Vec::new(),
        }
    }

    pub fn unsat(code: ReasonCode, message: impl Into<String>) -> Self {
        Verdict {
            status: Status::Unsat,
            witness: None,
            code,
            message: message.into(),
            diagnostics: Vec::new(),
        }
    }

    pub fn unknown(code: ReasonCode, message: impl Into<String>) -> Self {
        Verdict {
            status: Status::Unknown,
            witness: None,
            code,
            message: message.into(),
            diagnostics: Vec::new(),
        }
    }

    pub fn is_sat(&self) -> bool {
        self.status == Status::Sat
    }

    pub fn is_unsat(&self) -> bool {
        self.status == Status::Unsat
    }

    pub fn with_diagnostic(mut self, d: impl Into<String>) -> Self {
        self.diagnostics.push(d.into());
        self
    }
}

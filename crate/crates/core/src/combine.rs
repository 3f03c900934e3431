//! Combining order constraints with valuation constraints for several primes.
//!
//! The order part is reduced to a strictly feasible system by turning every
//! weak inequality that cannot hold strictly into an equation. The
//! equations, old and new, are then checked against each prime separately.

use rayon::prelude::*;

use crate::arith::{format_rational, Prime, Rational};
use crate::complete::{solve_complete, SolveOptions};
use crate::error::{Error, Result};
use crate::geq::{solve_geq, GeqProblem};
use crate::leq::{solve_leq, LeqProblem};
use crate::linalg::{solve_affine, QMatrix};
use crate::lp::{lp_feasible, FarkasCertificate, LinRow, LpResult, LpSystem};
use crate::model::{
    classify, normalize, witness_from_powersums, Equation, Instance, NormalizedInstance, OrdRel, PrimeFragment,
    ReasonCode, Verdict, Witness, WitnessValue,
};
use crate::testkit::verify::verify_witness;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum StrictifyOutcome {
    Infeasible {
        /// The system that was found infeasible (equalities already added).
        system: LpSystem,
        certificate: FarkasCertificate,
        converted: Vec<usize>,
        restarts: usize,
    },
    Strict {
        /// Weak rows turned into equations, in conversion order.
        equalities: Vec<LinRow>,
        /// Indices of those rows in the input's weak block.
        converted: Vec<usize>,
        restarts: usize,
        /// One point per remaining weak row, satisfying that row strictly.
        samples: Vec<Vec<Rational>>,
        /// Their mean: satisfies every remaining weak row strictly.
        point: Vec<Rational>,
    },
}

/// Turns weak rows into equations until the remaining ones can all hold
/// strictly at once, restarting from scratch after each conversion.
pub fn strictify(sys: &LpSystem) -> Result<StrictifyOutcome> {
    sys.validate()?;
    let mut converted: Vec<usize> = Vec::new();
    let mut restarts = 0;
    'restart: loop {
        if restarts > sys.weak.len() {
            return Err(Error::Invariant(format!(
                "strictification restarted {restarts} times for {} weak rows",
                sys.weak.len()
            )));
        }
        let remaining: Vec<usize> = (0..sys.weak.len()).filter(|k| !converted.contains(k)).collect();
        let mut phi0 = LpSystem::new(sys.n);
        phi0.eq = sys.eq.clone();
        phi0.eq.extend(converted.iter().map(|&k| sys.weak[k].clone()));
        phi0.weak = remaining.iter().map(|&k| sys.weak[k].clone()).collect();
        phi0.strict = sys.strict.clone();

        let base = match lp_feasible(&phi0)? {
            LpResult::Infeasible(certificate) => {
                return Ok(StrictifyOutcome::Infeasible {
                    system: phi0,
                    certificate,
                    converted,
                    restarts,
                })
            }
            LpResult::Feasible(x) => x,
        };

        let mut samples = Vec::with_capacity(remaining.len());
        for (pos, &k) in remaining.iter().enumerate() {
            let mut test = phi0.clone();
            let psi = test.weak.remove(pos);
            test.strict.push(psi);
            match lp_feasible(&test)? {
                LpResult::Feasible(x) => samples.push(x),
                LpResult::Infeasible(_) => {
                    converted.push(k);
                    restarts += 1;
                    continue 'restart;
                }
            }
        }

        let point = if samples.is_empty() {
            base
        } else {
            let k = Rational::from_integer(samples.len().into());
            (0..sys.n)
                .map(|j| samples.iter().map(|s| s[j].clone()).sum::<Rational>() / &k)
                .collect()
        };
        let mut strict_all = phi0.clone();
        strict_all.strict.append(&mut strict_all.weak);
        if !strict_all.satisfied_by(&point) {
            return Err(Error::Invariant("averaged point is not strictly feasible".into()));
        }
        return Ok(StrictifyOutcome::Strict {
            equalities: converted.iter().map(|&k| sys.weak[k].clone()).collect(),
            converted,
            restarts,
            samples,
            point,
        });
    }
}

/// The equations and order constraints of an instance as an LP system.
pub fn order_system(inst: &Instance) -> LpSystem {
    let mut sys = LpSystem::new(inst.num_vars());
    sys.eq = inst
        .equations
        .iter()
        .map(|e| LinRow::new(e.coeffs.clone(), e.rhs.clone()))
        .collect();
    for o in &inst.orders {
        let row = LinRow::new(o.coeffs.clone(), o.rhs.clone());
        match o.rel {
            OrdRel::Le => sys.weak.push(row),
            OrdRel::Lt => sys.strict.push(row),
        }
    }
    sys
}

/// Equations only: any rational solution.
pub fn solve_linear(inst: &Instance) -> Result<Verdict> {
    let n = inst.num_vars();
    let a = QMatrix::from_rows(inst.equations.iter().map(|e| e.coeffs.clone()).collect(), n)?;
    let b: Vec<Rational> = inst.equations.iter().map(|e| e.rhs.clone()).collect();
    Ok(match solve_affine(&a, &b)? {
        None => Verdict::unsat(ReasonCode::NoRationalSolution, "the linear system has no rational solution"),
        Some(space) => Verdict::sat(
            inst.vars
                .iter()
                .cloned()
                .zip(space.particular.into_iter().map(WitnessValue::Rational))
                .collect(),
        ),
    })
}

/// Decides an order-free instance with at most one prime, choosing the
/// solver from the fragment of the constraints.
pub fn dispatch(norm: &NormalizedInstance, opts: &SolveOptions) -> Result<Verdict> {
    if !norm.instance.orders.is_empty() {
        return Err(Error::InvalidInput("the dispatcher takes order-free instances".into()));
    }
    let class = classify(norm);
    let (prime, fragment) = match class.per_prime.iter().next() {
        None => return solve_linear(&norm.instance).map(|v| v.with_diagnostic("fragment: NONE")),
        Some(_) if class.multi_prime => {
            return Err(Error::InvalidInput("the dispatcher takes a single prime".into()))
        }
        Some((&p, &f)) => (p, f),
    };
    let inst = &norm.instance;
    let profiles = &norm.profiles[&prime];
    let n = inst.num_vars();
    let a = QMatrix::from_rows(inst.equations.iter().map(|e| e.coeffs.clone()).collect(), n)?;
    let b: Vec<Rational> = inst.equations.iter().map(|e| e.rhs.clone()).collect();
    let tag = format!("fragment: {} at p = {prime}", fragment.name());
    let values = match fragment {
        PrimeFragment::GeqP => {
            let prob = GeqProblem {
                a,
                b,
                prime,
                lower: profiles.iter().map(|p| p.lower.clone()).collect(),
                exact: profiles.iter().map(|p| p.exact).collect(),
            };
            solve_geq(&prob)?.map(|s| s.witness)
        }
        PrimeFragment::LeqP => {
            let prob = LeqProblem {
                a,
                b,
                prime,
                upper: profiles.iter().map(|p| p.upper.clone()).collect(),
                excluded: profiles.iter().map(|p| p.excluded.clone()).collect(),
            };
            solve_leq(&prob)?.map(|s| s.witness)
        }
        PrimeFragment::Hard => return solve_complete(norm, opts).map(|v| v.with_diagnostic(tag)),
        PrimeFragment::None => return solve_linear(inst).map(|v| v.with_diagnostic(tag)),
    };
    match values {
        Err(why) => Ok(why.into_verdict().with_diagnostic(tag)),
        Ok(values) => {
            let witness = witness_from_powersums(inst, values);
            verify_witness(inst, &witness)
                .map_err(|v| Error::Invariant(format!("solver witness rejected: {v}")))?;
            Ok(Verdict::sat(witness).with_diagnostic(tag))
        }
    }
}

/// Decides an arbitrary instance.
pub fn solve_combined(inst: &Instance, opts: &SolveOptions) -> Result<Verdict> {
    let norm = match normalize(inst)? {
        Ok(norm) => norm,
        Err(imm) => {
            return Ok(Verdict::unsat(
                ReasonCode::ImmediateUnsat { var: imm.var },
                format!("{}: {}", inst.vars[imm.var], imm.detail),
            ))
        }
    };
    if inst.orders.is_empty() && norm.primes().len() <= 1 {
        return dispatch(&norm, opts);
    }

    let sys = order_system(inst);
    let (equalities, converted, restarts, point) = match strictify(&sys)? {
        StrictifyOutcome::Infeasible {
            certificate,
            converted,
            restarts,
            system,
        } => {
            return Ok(Verdict::unsat(
                ReasonCode::LpInfeasible,
                "the equations and order constraints have no common solution",
            )
            .with_diagnostic(trace_line(&converted, restarts))
            .with_diagnostic(certificate_line(&system, &certificate)))
        }
        StrictifyOutcome::Strict {
            equalities,
            converted,
            restarts,
            point,
            ..
        } => (equalities, converted, restarts, point),
    };
    let trace = trace_line(&converted, restarts);

    let mut augmented = inst.clone();
    augmented.orders.clear();
    augmented
        .equations
        .extend(equalities.into_iter().map(|r| Equation { coeffs: r.coeffs, rhs: r.rhs }));
    let aug_norm = match normalize(&augmented)? {
        Ok(n) => n,
        Err(imm) => return Err(Error::Invariant(format!("normalization changed: {}", imm.detail))),
    };
    let primes = aug_norm.primes();
    if primes.is_empty() {
        let witness: Witness = inst
            .vars
            .iter()
            .cloned()
            .zip(point.into_iter().map(WitnessValue::Rational))
            .collect();
        verify_witness(inst, &witness).map_err(|v| Error::Invariant(format!("averaged point rejected: {v}")))?;
        return Ok(Verdict::sat(witness).with_diagnostic(trace));
    }

    let run = |p: &Prime| dispatch(&aug_norm.for_prime(*p), opts).map(|v| (*p, v));
    let verdicts: Vec<(Prime, Verdict)> = if opts.threads > 1 {
        primes.par_iter().map(run).collect::<Result<_>>()?
    } else {
        primes.iter().map(run).collect::<Result<_>>()?
    };

    if let Some((p, v)) = verdicts.iter().find(|(_, v)| v.is_unsat()) {
        return Ok(Verdict::unsat(
            ReasonCode::PrimeUnsat { prime: p.get() },
            format!("unsatisfiable at p = {p}: {}", v.message),
        )
        .with_diagnostic(trace));
    }
    if let Some((p, v)) = verdicts.iter().find(|(_, v)| !v.is_sat()) {
        return Ok(Verdict::unknown(v.code.clone(), format!("undecided at p = {p}: {}", v.message)).with_diagnostic(trace));
    }
    let mut verdict = Verdict::sat_without_witness(
        "satisfiable; no combined witness is constructed for several primes or orders with primes",
    )
    .with_diagnostic(trace);
    for (p, v) in verdicts {
        if let Some(w) = &v.witness {
            let parts: Vec<String> = w.iter().map(|(k, x)| format!("{k} = {x}")).collect();
            verdict = verdict.with_diagnostic(format!("p = {p} witness: {}", parts.join("; ")));
        }
    }
    Ok(verdict)
}

fn trace_line(converted: &[usize], restarts: usize) -> String {
    format!("strictify: converted weak rows {converted:?} after {restarts} restarts")
}

fn certificate_line(sys: &LpSystem, cert: &FarkasCertificate) -> String {
    let fmt = |xs: &[Rational]| xs.iter().map(format_rational).collect::<Vec<_>>().join(" ");
    let ok = crate::lp::verify_certificate(sys, cert);
    format!(
        "farkas: eq [{}] weak [{}] strict [{}] verified {ok}",
        fmt(&cert.eq),
        fmt(&cert.weak),
        fmt(&cert.strict)
    )
}

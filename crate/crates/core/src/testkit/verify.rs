//! Exact witness checking. Uses only the arithmetic layer, never a solver.

use num_traits::Zero;
use thiserror::Error;

use crate::arith::{format_rational, vp, ExtInt, Prime, Rational};
use crate::model::{Instance, OrdRel, Witness, WitnessValue};
use crate::powersum::{guard_from_env, PowerSum};

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum Violation {
    #[error("no value for variable {0}")]
    Missing(String),
    #[error("value for unknown variable {0}")]
    Unknown(String),
    #[error("equation {index} has nonzero residual {residual}")]
    Equation { index: usize, residual: String },
    #[error("constraint v_{prime}({var}) {rel} {bound} fails: valuation is {value}")]
    Valuation {
        var: String,
        prime: Prime,
        rel: &'static str,
        bound: String,
        value: ExtInt,
    },
    #[error("order constraint {index} fails")]
    Order { index: usize },
    #[error("cannot materialize {var}: {reason}")]
    Materialize { var: String, reason: String },
}

pub fn verify_witness(inst: &Instance, w: &Witness) -> Result<(), Violation> {
    verify_witness_with_guard(inst, w, guard_from_env())
}

pub fn verify_witness_with_guard(inst: &Instance, w: &Witness, guard: u64) -> Result<(), Violation> {
    for name in w.keys() {
        if inst.var_index(name).is_none() {
            return Err(Violation::Unknown(name.clone()));
        }
    }
    let mut values = Vec::with_capacity(inst.num_vars());
    for name in &inst.vars {
        values.push(w.get(name).ok_or_else(|| Violation::Missing(name.clone()))?);
    }

    let primes: Vec<Prime> = values
        .iter()
        .filter_map(|v| match v {
            WitnessValue::PowerSum(s) => Some(s.prime()),
            WitnessValue::Rational(_) => None,
        })
        .collect();
    let common = primes.first().copied().filter(|p| primes.iter().all(|q| q == p));

    // Equations: exact residual, symbolically when all power sums share a prime.
    for (index, eq) in inst.equations.iter().enumerate() {
        let zero = match common {
            Some(p) => {
                let mut acc = PowerSum::constant(p, -eq.rhs.clone());
                for (a, v) in eq.coeffs.iter().zip(&values) {
                    if a.is_zero() {
                        continue;
                    }
                    acc = acc.add_scaled(a, &as_powersum(v, p));
                }
                acc.is_zero().then_some(()).ok_or_else(|| acc.to_string())
            }
            None => {
                let mut acc = -eq.rhs.clone();
                for (j, (a, v)) in eq.coeffs.iter().zip(&values).enumerate() {
                    if a.is_zero() {
                        continue;
                    }
                    acc += a * materialize(inst, j, v, guard)?;
                }
                acc.is_zero().then_some(()).ok_or_else(|| format_rational(&acc))
            }
        };
        if let Err(residual) = zero {
            return Err(Violation::Equation { index, residual });
        }
    }

    for c in &inst.valuations {
        let v = values[c.var];
        let value = match v {
            WitnessValue::PowerSum(s) if s.prime() == c.prime => s.valuation(),
            _ => vp(&materialize(inst, c.var, v, guard)?, c.prime),
        };
        if !c.rel.holds(&value, &c.bound) {
            return Err(Violation::Valuation {
                var: inst.vars[c.var].clone(),
                prime: c.prime,
                rel: c.rel.symbol(),
                bound: c.bound.to_string(),
                value,
            });
        }
    }

    if !inst.orders.is_empty() {
        let mut xs = Vec::with_capacity(values.len());
        for (j, v) in values.iter().enumerate() {
            xs.push(materialize(inst, j, v, guard)?);
        }
        for (index, o) in inst.orders.iter().enumerate() {
            let lhs: Rational = o.coeffs.iter().zip(&xs).map(|(a, x)| a * x).sum();
            let ok = match o.rel {
                OrdRel::Lt => lhs < o.rhs,
                OrdRel::Le => lhs <= o.rhs,
            };
            if !ok {
                return Err(Violation::Order { index });
            }
        }
    }
    Ok(())
}

fn as_powersum(v: &WitnessValue, p: Prime) -> PowerSum {
    match v {
        WitnessValue::PowerSum(s) => s.clone(),
        WitnessValue::Rational(q) => PowerSum::constant(p, q.clone()),
    }
}

fn materialize(inst: &Instance, j: usize, v: &WitnessValue, guard: u64) -> Result<Rational, Violation> {
    match v {
        WitnessValue::Rational(q) => Ok(q.clone()),
        WitnessValue::PowerSum(s) => s.materialize(guard).map_err(|e| Violation::Materialize {
            var: inst.vars[j].clone(),
            reason: e.to_string(),
        }),
    }
}

//! Seeded instance generators.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_traits::Zero;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::arith::{vp, ExtInt, Prime, Rational};
use crate::error::{Error, Result};
use crate::geq::GeqProblem;
use crate::leq::LeqProblem;
use crate::linalg::QMatrix;
use crate::model::{Instance, ValRel};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FragmentKind {
    /// `>=` only (and `==` at `p = 2`).
    Geq,
    /// `<=` and `!=` only.
    Leq,
    /// Any mix of the four relations.
    Hard,
}

impl FragmentKind {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "geq" => Some(FragmentKind::Geq),
            "leq" => Some(FragmentKind::Leq),
            "hard" => Some(FragmentKind::Hard),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RandomParams {
    pub fragment: FragmentKind,
    pub vars: usize,
    pub equations: usize,
    /// Coefficients are drawn from `[-coeff, coeff]`.
    pub coeff: i64,
    /// Valuation bounds are drawn from `[-bound, bound]`.
    pub bound: i64,
    pub prime: Prime,
    /// Build the instance around a known solution, so it is satisfiable.
    pub planted: bool,
    /// Probability that a variable carries a constraint.
    pub density: f64,
}

impl Default for RandomParams {
    fn default() -> Self {
        RandomParams {
            fragment: FragmentKind::Geq,
            vars: 4,
            equations: 2,
            coeff: 10,
            bound: 4,
            prime: Prime::new(3).expect("prime"),
            planted: false,
            density: 0.8,
        }
    }
}

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Deterministic in `seed` and `params`.
pub fn random_instance(seed: u64, params: &RandomParams) -> Result<Instance> {
    if params.vars == 0 || params.coeff <= 0 || params.bound < 0 {
        return Err(Error::InvalidInput("need vars > 0, coeff > 0 and bound >= 0".into()));
    }
    if !(0.0..=1.0).contains(&params.density) {
        return Err(Error::InvalidInput("density must lie in [0, 1]".into()));
    }
    let mut rng = rng_from_seed(seed);
    let p = params.prime;
    let n = params.vars;
    let a = random_matrix(&mut rng, params.equations, n, params.coeff);
    let planted: Vec<Rational> = (0..n).map(|_| random_padic(&mut rng, p, params.bound)).collect();
    let b: Vec<Rational> = if params.planted {
        a.mul_vec(&planted)?
    } else {
        (0..params.equations)
            .map(|_| Rational::from_integer(rng.gen_range(-params.coeff..=params.coeff).into()))
            .collect()
    };

    let mut inst = Instance::new((0..n).map(|j| format!("x{j}")));
    for (i, rhs) in b.into_iter().enumerate() {
        inst.add_equation(a.row(i).to_vec(), rhs);
    }
    for (j, xj) in planted.iter().enumerate() {
        if !rng.gen_bool(params.density) {
            continue;
        }
        let v = vp(xj, p);
        let anchor = v.as_finite().cloned().unwrap_or_else(|| BigInt::from(params.bound));
        let pick = |rng: &mut ChaCha8Rng| BigInt::from(rng.gen_range(-params.bound..=params.bound));
        let rels: &[ValRel] = match params.fragment {
            FragmentKind::Geq if p.get() == 2 => &[ValRel::Ge, ValRel::Ge, ValRel::Eq],
            FragmentKind::Geq => &[ValRel::Ge],
            FragmentKind::Leq => &[ValRel::Le, ValRel::Ne],
            FragmentKind::Hard => &[ValRel::Ge, ValRel::Le, ValRel::Eq, ValRel::Ne],
        };
        let rel = *rels.choose(&mut rng).expect("nonempty");
        let bound = if params.planted {
            // A bound that the planted value satisfies.
            let slack = BigInt::from(rng.gen_range(0..=2));
            match rel {
                ValRel::Ge => &anchor - slack,
                ValRel::Le if v.is_finite() => &anchor + slack,
                ValRel::Le => continue,
                ValRel::Eq if v.is_finite() => anchor.clone(),
                ValRel::Eq => continue,
                ValRel::Ne => {
                    let c = pick(&mut rng);
                    if v.as_finite() == Some(&c) {
                        c + 1
                    } else {
                        c
                    }
                }
                ValRel::Lt | ValRel::Gt => unreachable!(),
            }
        } else {
            pick(&mut rng)
        };
        inst.add_valuation(p, j, rel, bound);
        if params.fragment == FragmentKind::Hard && rng.gen_bool(0.3) {
            // A second relation on the same variable keeps windows finite.
            let extra = if params.planted {
                anchor.clone() + 1
            } else {
                pick(&mut rng)
            };
            let extra_rel = if params.planted { ValRel::Le } else { *rels.choose(&mut rng).expect("nonempty") };
            if !params.planted || v.is_finite() {
                inst.add_valuation(p, j, extra_rel, extra);
            }
        }
    }
    Ok(inst)
}

pub fn random_matrix(rng: &mut impl Rng, m: usize, n: usize, coeff: i64) -> QMatrix {
    let mut a = QMatrix::zeros(m, n);
    for i in 0..m {
        for j in 0..n {
            if rng.gen_bool(0.75) {
                a[(i, j)] = Rational::from_integer(rng.gen_range(-coeff..=coeff).into());
            }
        }
    }
    a
}

/// `u * p^k` with a small unit `u` and `|k| <= bound`; zero now and then.
pub fn random_padic(rng: &mut impl Rng, p: Prime, bound: i64) -> Rational {
    if rng.gen_bool(0.1) {
        return Rational::zero();
    }
    let k = rng.gen_range(-bound..=bound);
    let mut u: i64 = rng.gen_range(1..=20);
    while (u as u64) % p.get() == 0 {
        u += 1;
    }
    if rng.gen_bool(0.5) {
        u = -u;
    }
    Rational::from_integer(u.into()) * p.pow(k)
}

/// `>=` problem; a third of the bounds are `-inf` when `with_free` is set.
pub fn random_geq_problem(
    rng: &mut impl Rng,
    n: usize,
    m: usize,
    coeff: i64,
    bound: i64,
    p: Prime,
    with_free: bool,
) -> GeqProblem {
    let a = random_matrix(rng, m, n, coeff);
    let lower: Vec<ExtInt> = (0..n)
        .map(|_| {
            if with_free && rng.gen_bool(0.2) {
                ExtInt::NegInf
            } else {
                ExtInt::from(rng.gen_range(-bound..=bound))
            }
        })
        .collect();
    let b = if rng.gen_bool(0.5) {
        // Right-hand side from a point that meets the bounds.
        let x: Vec<Rational> = lower
            .iter()
            .map(|c| match c {
                ExtInt::Fin(c) => {
                    let c: i64 = c.try_into().expect("small");
                    let extra = rng.gen_range(0..=1);
                    Rational::from_integer(rng.gen_range(-9..=9).into()) * p.pow(c + extra)
                }
                _ => random_padic(rng, p, bound),
            })
            .collect();
        a.mul_vec(&x).expect("dimensions")
    } else {
        (0..m)
            .map(|_| Rational::from_integer(rng.gen_range(-coeff..=coeff).into()) * p.pow(rng.gen_range(-2..=2)))
            .collect()
    };
    GeqProblem::new(a, b, p, lower)
}

/// `<=` / `!=` problem.
pub fn random_leq_problem(rng: &mut impl Rng, n: usize, m: usize, coeff: i64, bound: i64, p: Prime) -> LeqProblem {
    let a = random_matrix(rng, m, n, coeff);
    let b = (0..m)
        .map(|_| Rational::from_integer(rng.gen_range(-coeff..=coeff).into()))
        .collect();
    let upper = (0..n)
        .map(|_| {
            if rng.gen_bool(0.3) {
                ExtInt::PosInf
            } else {
                ExtInt::from(rng.gen_range(-bound..=bound))
            }
        })
        .collect();
    let excluded = (0..n)
        .map(|_| {
            let k = rng.gen_range(0..=2);
            (0..k).map(|_| BigInt::from(rng.gen_range(-bound..=bound))).collect::<BTreeSet<_>>()
        })
        .collect();
    LeqProblem {
        a,
        b,
        prime: p,
        upper,
        excluded,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reproducible() {
        let params = RandomParams {
            fragment: FragmentKind::Hard,
            planted: true,
            ..RandomParams::default()
        };
        let a = random_instance(1, &params).unwrap();
        let b = random_instance(1, &params).unwrap();
        assert_eq!(a, b);
        let c = random_instance(2, &params).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn rejects_bad_params() {
        let params = RandomParams {
            vars: 0,
            ..RandomParams::default()
        };
        assert!(random_instance(0, &params).is_err());
    }
}

//! Satisfiability of linear equations over the rationals combined with
//! p-adic valuation constraints and linear order constraints.
//!
//! The entry point is [`solve`]. The polynomial fragments are also available
//! directly through [`geq::solve_geq`] and [`leq::solve_leq`].

pub mod arith;
pub mod cli;
pub mod combine;
pub mod complete;
pub mod error;
pub mod geq;
pub mod leq;
pub mod linalg;
pub mod lp;
pub mod model;
pub mod powersum;
pub mod snf;
pub mod testkit;

pub use arith::{ExtInt, Prime, Rational};
pub use combine::solve_combined as solve;
pub use complete::SolveOptions;
pub use error::{Error, Result};
pub use model::{Instance, Status, Verdict};
pub use powersum::PowerSum;

//! Oracles, generators and checkers for testing the solvers.

pub mod audit;
pub mod coloring;
pub mod oracle;
pub mod random;
pub mod verify;

pub use audit::audit_echelon;
pub use coloring::{brute_color, encode_coloring, Graph};
pub use oracle::smith_oracle_geq;
pub use random::{random_instance, FragmentKind, RandomParams};
pub use verify::{verify_witness, verify_witness_with_guard, Violation};

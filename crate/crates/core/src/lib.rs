//! Multiple query optimization (MQO) compiled to quadratic unconstrained
//! binary optimization (QUBO), minor-embedded onto a Chimera qubit grid and
//! solved with a simulated-annealing sampler plus classical baselines.
//!
//! The pipeline mirrors the usual annealer workflow:
//!
//! 1. [`mqo`] holds the problem model (queries, plans, costs, savings).
//! 2. [`qubo::logical_map`] turns an instance into a logical energy formula.
//! 3. [`chimera`] builds TRIAD and clustered embeddings on the qubit grid.
//! 4. [`physical::embed_qubo`] spreads the logical formula over qubit chains.
//! 5. [`solvers`] samples the physical (or logical) formula and decodes it.
//!
//! [`bench`] reproduces the cost-versus-time protocol and [`verify`] runs the
//! oracle-equivalence suites used by the `verify` subcommand.

pub mod bench;
pub mod chimera;
pub mod error;
pub mod exec;
pub mod mqo;
pub mod physical;
pub mod qubo;
pub mod solvers;
pub mod verify;

pub use error::{Error, Result};
pub use exec::Execution;

/// Absolute tolerance used when comparing costs and energies.
pub const TOLERANCE: f64 = 1e-9;

/// Default margin added on top of every strict weight bound.
pub const DEFAULT_EPSILON: f64 = 0.25;

//! Measurement-based stabilization of an open quantum battery.
//!
//! A qubit battery under pure dephasing is charged by a fast rotation plus
//! free evolution, checked by a projective energy measurement, and then held
//! in its maximum-energy state by Zeno measurements. The crate simulates the
//! protocol and accounts for its energy and entropy costs.
//!
//! - [`qstate`]: density matrices, Hamiltonians and state metrics.
//! - [`liouville`]: the Lindblad generator, propagators and steady states.
//! - [`protocol`]: single realizations and seeded parallel ensembles.
//! - [`thermo`]: work/loss ledgers, entropy production, cost estimates.
//! - [`cli`]: configuration files, CSV/SVG output and the figure commands.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod liouville;
pub mod protocol;
pub mod qstate;
pub mod thermo;

pub use error::{Error, Result};
pub use liouville::{DephasingGenerator, Liouvillian, SteadyState};
pub use protocol::{EnsembleResult, Protocol, ProtocolConfig, TrajectoryRecord};
pub use qstate::{Hamiltonian, OutcomeDistribution, QubitState};
pub use thermo::EnergyLedger;

//! Linear processes with truncated power-law filters and tapered heavy-tailed
//! innovations.
//!
//! The crate is organised bottom-up:
//!
//! * [`filters`] and [`innovations`] describe the two ingredients of the
//!   process `X_k = Σ_{i=0}^{λ(n)} a_i ξ_{k-i}`;
//! * [`coefficients`] computes the exact representation `S_n(t) = Σ_j d_j ξ_j`
//!   of partial sums, their variances and Lyapunov fractions;
//! * [`limit_theory`] holds the limiting variance functions, normalizers and
//!   the constants they are built from;
//! * [`path_engine`] simulates paths, [`gaussian_limits`] simulates the limit
//!   processes and [`montecarlo`] ties everything into seeded experiments.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod coefficients;
pub mod error;
pub mod filters;
pub mod gaussian_limits;
pub mod innovations;
pub mod limit_theory;
pub mod montecarlo;
pub mod numerics;
pub mod path_engine;
pub mod stats;

pub use error::{Error, Result};
pub use filters::{CaseId, Dependence, Filter, FilterSpec, FilterTaper, InnovationTaper};
pub use innovations::{InnovationModel, ParetoSpec, TaperedParetoSpec};
pub use limit_theory::LimitLaw;

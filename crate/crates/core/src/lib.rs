//! Size of the Hilbert-space region spanned by a time-evolving spin-lattice state.
//!
//! The crate has four numerical layers:
//!
//! * [`special`]: error function, its inverse, the branch of `Li_{1/2}` and the
//!   Gaussian integral behind the leading finite-size correction.
//! * [`asymptotics`]: closed-form large-volume moments, Rényi and von Neumann
//!   entropies, the universal eigenvalue distribution and the effective-rank
//!   system, for uniform and weighted time averages.
//! * [`overlap`]: exact finite-size moments `tr[ρ̄ᵗ^α]` as multidimensional
//!   integrals over the dynamical free energy, including the transverse-field
//!   Ising quench.
//! * [`ed`]: exact diagonalization of small spin-½ chains, time-averaged states,
//!   effective ranks, projection errors and energy cumulants.
//!
//! The crate is `no_std` (with `alloc`) when the default `std` feature is off.

#![cfg_attr(not(feature = "std"), no_std)]
#![allow(clippy::excessive_precision, clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod asymptotics;
pub mod ed;
mod error;
pub mod overlap;
pub mod quad;
pub mod special;

pub use error::{Error, Result};
pub use num_complex::Complex64;

//! Numerical core for NOMA uplink resource allocation in quantum federated
//! learning.
//!
//! The crate is `no_std` (with `alloc`) and contains no IO. It covers:
//!
//! * [`scenario`]: correlated Rayleigh block fading, SINR and sum-rate.
//! * [`qubo`]: QUBO construction for channel selection and binarized power,
//!   plus the spin (Ising) mapping.
//! * [`qaoa`]: an exact statevector QAOA solver.
//! * [`baselines`]: greedy, SCA and exhaustive reference solvers.
//! * [`orchestrator`]: block coordinate descent over the two sub-problems,
//!   latency metrics and run comparison.
//! * [`qfl`]: parameterized quantum circuits with shot noise, local SGD,
//!   federated averaging and the associated bound calculators.
//!
//! All randomness flows from a `u64` seed through [`rng::derive_seed`], so
//! every result is reproducible bit for bit.
#![no_std]

extern crate alloc;

pub mod baselines;
mod error;
pub mod math;
pub mod orchestrator;
pub mod qaoa;
pub mod qfl;
pub mod qubo;
pub mod rng;
pub mod scenario;

pub use error::{Error, Result};

//! Numerics for G-Brownian motion under volatility uncertainty.
//!
//! * [`hermite`]: exact Hermite coefficients and the homogeneous form
//!   `H_n(x, v)`.
//! * [`scenario`]: grids, admissible volatility scenarios, reproducible paths.
//! * [`ito`]: pathwise integrals against `dB` and `d<B>`, iterated and
//!   multiple integrals, and their Hermite closed forms.
//! * [`expectation`]: sublinear expectations over a scenario sweep and the
//!   second-moment bounds.
//! * [`gheat`]: explicit solver for `du/dt = G(u_xx)`.
//!
//! The crate is `no_std` and needs only `alloc`.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

mod error;

pub mod expectation;
pub mod gheat;
pub mod hermite;
pub mod ito;
pub mod payoff;
pub mod rng;
pub mod scenario;

pub use error::{Error, Result};
pub use expectation::{EstimateReport, FunctionalSpec, PathSampler, Sequential};
pub use gheat::{GHeatSolution, PdeConfig};
pub use hermite::ChaosPolynomial;
pub use ito::{GridFunction, QvKind, SimplexFunction};
pub use payoff::Payoff;
pub use scenario::{BrownianPath, ScenarioPath, ScenarioSpec, TimeGrid, VolatilityBounds};

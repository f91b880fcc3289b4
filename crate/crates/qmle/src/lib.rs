//! Simulation and likelihood inference for single-server queues.
//!
//! `qmle` simulates a GI/G/1 queue whose interarrival and service laws come
//! from continuous exponential families, estimates the arrival and service
//! rates by maximum likelihood from one observed window, and runs seeded
//! Monte Carlo experiments that probe how the standardized estimation error
//! behaves as the observation horizon grows: normal approximation quality,
//! counting-process concentration, error decay, and boundary-crossing
//! behavior against `√(2·loglog T)`-type envelopes, together with a
//! numerical integral-test classifier for those boundaries.
//!
//! # Modules
//!
//! - [`expfam`] — exponential-family laws: density, cumulant calculus,
//!   mean-map inversion, sampling, censoring tails.
//! - [`qsim`] — event-driven GI/G/1 simulation with four stopping rules and
//!   nested checkpoint observation.
//! - [`mle`] — approximate and full log-likelihoods, rate estimators, score,
//!   and observed information.
//! - [`classfn`] — boundary functions, the integral-test classifier, decay
//!   integrability checks, and series diagnostics.
//! - [`montecarlo`] — replicated experiments with per-replication RNG
//!   streams and deterministic aggregation.
//! - [`cli`] — configuration schema and the command-line entry point.
//!
//! # Quick start
//!
//! ```
//! use qmle::{expfam, mle, qsim, rng};
//!
//! let arrival = expfam::Exponential;
//! let service = expfam::Exponential;
//! let mut stream = rng::stream(42, 0);
//! let window = qsim::simulate(
//!     &arrival,
//!     1.0,
//!     &service,
//!     1.5,
//!     qsim::StoppingRule::FixedTime(500.0),
//!     &mut stream,
//! )
//! .unwrap();
//! let fit = mle::estimate(&window, &arrival, &service, Some((1.0, 1.5))).unwrap();
//! println!("theta_hat = {}, z = {:?}", fit.theta_hat, fit.z_theta);
//! ```
//!
//! Runnable demonstrations of every capability live in `examples/`; the
//! `qmle` binary exposes the same operations as subcommands (see the README).

// Comparisons written as `!(x > 0.0)` are deliberate: they reject NaN
// together with the out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod classfn;
pub mod cli;
pub mod error;
pub mod expfam;
pub mod mle;
pub mod montecarlo;
pub mod qsim;
pub mod quad;
pub mod report;
pub mod rng;
pub mod stats;

pub use error::{Error, Result};

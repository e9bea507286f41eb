//! Statistical performance of a single-user fluid antenna system (FAS)
//! whose spatially correlated port gains are modeled by a Gaussian copula
//! fitted to Jakes' correlation.
//!
//! The crate is organized bottom-up:
//!
//! * [`specfun`] — scalar kernels (erf/erfinv, normal CDF/quantile, Bessel
//!   J0, regularized incomplete gamma and its inverse);
//! * [`linalg`] — dense symmetric matrix support: correlation matrices,
//!   Cholesky factorization, eigenvalue-clipping PSD repair;
//! * [`mvn`] — the multivariate standard normal CDF evaluated by a
//!   Genz-style transformation integrated with randomized quasi-Monte
//!   Carlo;
//! * [`copula`] — Gaussian copula CDF/density, rank-correlation
//!   transforms, and the Cholesky-based copula sampler;
//! * [`fas`] — Jakes port correlation, equivalent-channel CDF/PDF, outage
//!   probability and delay outage rate for arbitrary marginals, with
//!   Nakagami-m shipped;
//! * [`montecarlo`] — seedable simulation oracles (copula sampling and a
//!   direct Jakes-model construction) used to validate every analytic
//!   result;
//! * [`validation`] — the dual-oracle consistency suite behind the CLI's
//!   `validate` subcommand.
//!
//! All analytic operations are pure and thread-safe. Sampling and the QMC
//! integrator are chunked so that results depend on the seed only, never
//! on the number of worker threads.

pub mod copula;
pub mod fas;
pub mod linalg;
pub mod montecarlo;
pub mod mvn;
pub mod specfun;
pub mod validation;

mod stream;

pub use copula::SampleBatch;
pub use fas::{DorParams, FasConfig, Marginal, NakagamiMarginal, SnrParams};
pub use linalg::{CholeskyFactor, CorrelationMatrix};
pub use mvn::{MvnOpts, MvnResult};

//! Bayesian model-evaluation criteria and their large-sample limits.
//!
//! The crate evaluates three posterior-expectation information criteria —
//! the deviance information criterion (DIC), the Bayesian predictive
//! information criterion (BPIC), and the widely applicable Bayesian
//! information criterion (WBIC) — for three likelihood families:
//!
//! - geometric observations with a Beta prior (conjugate),
//! - p-dimensional unit-variance normal observations with a normal prior
//!   (conjugate, including tempered "power" posteriors),
//! - Laplace observations on a compact location/scale box (handled by grid
//!   quadrature).
//!
//! All criteria are reported on the per-observation scale, i.e. as averages
//! rather than sums; see [`criteria`] for the exact conventions.
//!
//! Alongside the criteria the crate provides the population limits each
//! criterion converges to ([`limits`]), consistency diagnostics for power and
//! Gibbs posteriors ([`posterior`]), and a deterministic, seedable experiment
//! runner that reproduces the convergence figures as CSV ([`simulate`],
//! [`cli`]).

pub mod cli;
pub mod criteria;
pub mod limits;
pub mod models;
pub mod posterior;
pub mod simulate;
pub mod specfun;

pub use criteria::{CriterionKind, CriterionValue, Method};
pub use limits::LimitValue;
pub use models::{DataGeneratingProcess, ModelSpec, ObservedSample, Theta};
pub use posterior::{BetaSchedule, PowerPosterior};
pub use simulate::{ExperimentConfig, RunRecord};

use thiserror::Error;

/// Error type shared across the crate.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Arguments are structurally invalid (wrong family, empty input, ...).
    #[error("argument error: {0}")]
    Argument(String),

    /// A configuration is self-inconsistent or violates a model assumption.
    #[error("configuration error: {0}")]
    Config(String),

    /// A caller violated an API contract (e.g. DIC on a tempered posterior).
    #[error("contract error: {0}")]
    Contract(String),

    /// A closed-form posterior has no analytic formula for the functional.
    #[error("unsupported functional: {0}")]
    UnsupportedFunctional(String),

    /// Every grid kernel value was -inf, so no posterior can be normalized.
    #[error("degenerate kernel: all grid weights vanish")]
    DegenerateKernel,

    /// A dataset failed to parse or validate.
    #[error("data error: {0}")]
    Data(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

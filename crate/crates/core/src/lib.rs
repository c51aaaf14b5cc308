//! Trade-off between CH-inequality violation and threshold detection
//! efficiency for pure two-qubit entangled states.
//!
//! The crate provides:
//! - [`states`]: Schmidt-form states and the measurement-basis families,
//! - [`chmetrics`]: joint/marginal probabilities, the CH operator, the
//!   violation `Q`, and the threshold efficiency `η_crit`,
//! - [`optimizer`]: multistart conjugate-gradient optimization over the
//!   eight setting parameters and staged integer search over basis exponents,
//! - [`analytic`]: closed-form eigenvalue analysis of the efficiency-weighted
//!   CH operator.
//!
//! ```
//! use chbell::{MeasurementConfig, SchmidtState};
//!
//! let state = SchmidtState::from_ratio(0.46)?;
//! let config = MeasurementConfig::hardy(&state)?;
//! let report = chbell::chmetrics::ch_q(&state, &config);
//! assert!(report.q > 0.09);
//! assert!(report.eta_crit.unwrap() < 0.84);
//! # Ok::<(), chbell::StateError>(())
//! ```

pub mod analytic;
pub mod chmetrics;
pub mod optimizer;
mod rng;
pub mod states;

pub use analytic::{AnalyticError, AnalyticPoint, EigenSet, EtaOptimum};
pub use chmetrics::{MetricsError, ReducedState, ViolationReport};
pub use optimizer::{
    Objective, OptimizeError, OptimizerSettings, OptimumRecord, SearchSettings, Strategy,
    SweepSettings,
};
pub use states::{
    ExponentQuad, MeasurementConfig, MeasurementSetting, SchmidtState, StateError, DEFAULT_K_MAX,
};

use thiserror::Error;

/// Crate-level error wrapper used by the sweep entry points.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error(transparent)]
    State(#[from] StateError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error(transparent)]
    Optimize(#[from] OptimizeError),
    #[error(transparent)]
    Analytic(#[from] AnalyticError),
    #[error("ratio {0} outside (0, 1]")]
    RatioOutOfRange(f64),
}

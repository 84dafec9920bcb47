//! Wide-sense stationarity testing from the geometry of the covariance
//! surface.
//!
//! A zero-mean process is WSS exactly when its covariance satisfies
//! `r_s + r_t = 0`, i.e. when the covariance surface is a cylinder ruled
//! along `(1, 1, 0)`. This crate estimates that directional derivative
//! from an ensemble of sample paths with a local linear fit and tests it
//! against zero, one diagonal time point at a time.
//!
//! * [`models`]: SDOF, Duffing, Wiener and OU simulators.
//! * [`covariance`]: empirical and analytic covariance surfaces, Gaussian
//!   curvature and local cylindrification diagnostics.
//! * [`lpr`]: Epanechnikov-weighted local linear regression.
//! * [`wss_test`]: the `J` statistic and the grouped t-test.
//! * [`cli`]: configuration, named reproduction scenarios, CSV/SVG output.

pub mod cli;
pub mod covariance;
pub mod error;
pub mod io;
pub mod lpr;
pub mod models;
pub mod rng;
pub mod wss_test;

pub use covariance::{
    analytic_sdof_covariance, cylindrify, empirical_covariance, gaussian_curvature,
    AnalyticCovariance, CovarianceSource, CovarianceSurface, CylindrificationResult,
    LazyCovariance,
};
pub use error::{Error, Result};
pub use lpr::{
    bandwidth_from, epanechnikov2d, local_linear_fit, Bandwidth, LocalLinearFit, SurfaceWindow,
};
pub use models::{
    duffing_case, reference_sdof_spec, simulate, EnsemblePaths, ModelKind, ModelParams, ModelSpec,
    OuInit,
};
pub use wss_test::{
    default_eval_times, group_t_test, j_series, j_statistic, sdof_onset, student_t_quantile,
    OnsetPrediction, StationarityReport,
};

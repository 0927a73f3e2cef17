//! g-and-h transformed autoregressive models: the transform and its
//! inverse, Gaussian AR building blocks, likelihoods for the latent- and
//! error-transformed models, maximum approximated-likelihood estimation,
//! one-step forecasting and a Monte Carlo study harness.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod ar;
pub mod error;
pub mod estimate;
pub mod forecast;
pub mod model;
pub mod normal;
pub mod optim;
pub mod quad;
pub mod simstudy;
pub mod stats;
pub mod tgh;

pub use ar::{ArCoeffs, ConditionalMoments, PacfVector};
pub use error::{Error, Result};
pub use estimate::{
    fit, fit_sequential_baseline, initial_values, select_order, FitConfig, FitResult,
    InitialValues, OrderSelection,
};
pub use forecast::{
    crps, interval, pit, point_mean, point_median, predictive, rolling_forecast,
    ForecastDistribution, IntervalKind, PredictionInterval, RollingConfig,
};
pub use model::{
    e_model_moment_descriptors, lag_plot_data, loglik_e_model, loglik_t_model, simulate,
    t_model_autocovariance, Covariates, InverseMode, LogLik, ModelSpec, RegressionSpec, TimeSeries,
    Variant,
};
pub use simstudy::{
    export_realization_matrix, run_study, write_report, RealizationMatrix, ScenarioGrid, StudyKind,
    StudyReport,
};
pub use tgh::{InverseTable, TghParams, TghShape, TghSummary};

//! Food-price indicator modeling toolkit.
//!
//! The crate covers the full tabular pipeline for modeling a yearly price
//! index against a panel of socioeconomic indicators:
//!
//! * [`ingest`] — CSV loading, imputation, deterministic train/test
//!   splitting, and column standardization.
//! * [`stats`] — descriptive statistics, Anderson–Darling normality
//!   screening, Yeo–Johnson transforms, kernel density estimation, and
//!   univariate F-scores.
//! * [`select`] — correlation matrices, agglomerative feature clustering,
//!   cluster representatives, and top-K extraction.
//! * [`models`] — six regression engines behind one predict contract:
//!   OLS, ridge, CART tree, random forest, gradient boosting, and an
//!   epsilon-SVR trained by a from-scratch SMO dual solver.
//! * [`eval`] — k-fold cross-validation, grid search, and the
//!   MAE/MSE/RMSE/R² metric suite.
//! * [`pipeline`] — end-to-end orchestration with byte-deterministic
//!   CSV/JSON artifacts and a run manifest.
//!
//! Every random choice in the crate flows through the deterministic
//! generator in [`rng`], so equal seeds give byte-identical results across
//! runs and platforms.

// Index loops over parallel arrays read better than zipped iterators in
// the numeric kernels.
#![allow(clippy::needless_range_loop)]

pub mod error;
pub mod eval;
pub mod ingest;
pub mod linalg;
pub mod models;
pub mod pipeline;
pub mod rng;
pub mod select;
pub mod special;
pub mod stats;

pub use error::{Error, Result};
pub use linalg::Matrix;

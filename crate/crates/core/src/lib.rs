// SPDX-License-Identifier: MIT OR Apache-2.0

//! Piecewise quantile autoregression.
//!
//! A nonstationary series is segmented into stationary quantile
//! autoregressive (QAR) pieces by minimizing a two-part minimum description
//! length (MDL) codelength. The residual part of the codelength is the
//! check loss of each piece's autoregression-quantile fit, so the criterion
//! is an asymmetric-Laplace likelihood plus a structure penalty. The search
//! over break positions and per-piece orders is an island-model genetic
//! algorithm.
//!
//! The crate is `no_std` and only needs `alloc`. Parallel execution, caching
//! across threads and file formats live in the `pqar` companion crate; they
//! plug in through [`ga::IslandExecutor`] and [`mdl::LossCache`].

#![cfg_attr(not(test), no_std)]
#![forbid(unsafe_code)]

extern crate alloc;

pub mod error;
pub mod ga;
mod linalg;
pub mod mdl;
pub mod qr;
pub mod segmentation;
pub mod series;
pub mod sim;

pub use error::{Error, Result};
pub use ga::{Chromosome, GaConfig, GaOutcome, MinLengthTable};
pub use mdl::{MdlScore, QuantileSpec};
pub use qr::{check_loss, fit_qar, SegmentFit};
pub use segmentation::{relative_locations, Segmentation};
pub use series::TimeSeries;

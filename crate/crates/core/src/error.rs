// SPDX-License-Identifier: MIT OR Apache-2.0

use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid series: {0}")]
    InvalidSeries(String),
    #[error("quantile {0} is outside (0, 1)")]
    QuantileDomain(f64),
    #[error("invalid quantile specification: {0}")]
    InvalidQuantileSpec(String),
    #[error("invalid segmentation: {0}")]
    InvalidSegmentation(String),
    #[error("invalid chromosome: {0}")]
    InvalidChromosome(String),
    #[error("loss window of {len} observations is too short for order {order}")]
    WindowTooShort { len: usize, order: usize },
    #[error("window {start}..{end} is out of range for a series of length {n}")]
    WindowOutOfRange { start: usize, end: usize, n: usize },
    #[error("segment fits do not match the segmentation: {0}")]
    FitMismatch(String),
    #[error("singular system")]
    Singular,
    #[error("solver stopped after {0} iterations without reaching optimality")]
    NoConvergence(usize),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("simulated value {value} overflowed at step {step}")]
    Overflow { step: usize, value: f64 },
    #[error("unknown preset `{0}`")]
    UnknownPreset(String),
}

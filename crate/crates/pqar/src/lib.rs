// SPDX-License-Identifier: MIT OR Apache-2.0

//! File formats, parallel execution and the experiment harness around
//! [`pqar_core`].

pub mod error;
pub mod experiment;
pub mod io;
pub mod parallel;
pub mod report;

pub use error::{PqarError, Result};
pub use parallel::{RayonExecutor, SharedCache};
pub use report::SegmentationReport;

use pqar_core::ga::{self, GaOutcome};
use pqar_core::{GaConfig, QuantileSpec, TimeSeries};

/// Segments `series` with islands evolving in parallel on the current rayon
/// pool and a loss cache shared between them.
pub fn segment(series: &TimeSeries, spec: &QuantileSpec, config: &GaConfig) -> Result<GaOutcome> {
    let cache = SharedCache::new();
    Ok(ga::run(series, spec, config, &cache, &RayonExecutor)?)
}

// SPDX-License-Identifier: MIT OR Apache-2.0

//! Segmentation reports.
//!
//! A report is a JSON document tagged with `schema_version`. Readers accept
//! any minor version of the major version they were built for. Indices in a
//! report are 1-based: `breaks[j]` is the last observation of segment `j+1`,
//! and segment `start`/`end` bounds are inclusive.

use std::io::Write;

use pqar_core::ga::GaOutcome;
use pqar_core::mdl::MdlScore;
use pqar_core::{relative_locations, GaConfig, QuantileSpec, TimeSeries};
use serde::{Deserialize, Serialize};

use crate::error::{PqarError, Result};

pub const SCHEMA_VERSION: &str = "1.0";
const SCHEMA_MAJOR: u64 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub tau: f64,
    /// Intercept first, then the lag coefficients.
    pub theta: Vec<f64>,
    pub loss: f64,
    pub degenerate: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentReport {
    pub start: usize,
    pub end: usize,
    pub len: usize,
    pub order: usize,
    pub fits: Vec<FitReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchReport {
    pub generations: usize,
    pub migrations: usize,
    pub evaluations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentationReport {
    pub schema_version: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub input: Option<String>,
    pub n: usize,
    pub num_breaks: usize,
    pub breaks: Vec<usize>,
    pub relative_locations: Vec<f64>,
    pub taus: Vec<f64>,
    pub weights: Vec<f64>,
    pub segments: Vec<SegmentReport>,
    pub mdl: MdlScore,
    pub seed: u64,
    pub config: GaConfig,
    pub search: SearchReport,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_time_secs: Option<f64>,
}

impl SegmentationReport {
    pub fn new(outcome: &GaOutcome, spec: &QuantileSpec, config: &GaConfig) -> Self {
        let seg = &outcome.segmentation;
        let segments = seg
            .segments()
            .map(|s| SegmentReport {
                start: s.start + 1,
                end: s.end,
                len: s.len(),
                order: s.order,
                fits: outcome
                    .fits
                    .iter()
                    .map(|per_tau| {
                        let f = &per_tau[s.index];
                        FitReport {
                            tau: f.tau,
                            theta: f.theta.clone(),
                            loss: f.loss,
                            degenerate: f.degenerate,
                        }
                    })
                    .collect(),
            })
            .collect();
        Self {
            schema_version: SCHEMA_VERSION.to_string(),
            input: None,
            n: seg.n(),
            num_breaks: seg.num_breaks(),
            breaks: seg.breaks().to_vec(),
            relative_locations: relative_locations(seg),
            taus: spec.taus().to_vec(),
            weights: spec.weights().to_vec(),
            segments,
            mdl: outcome.score.clone(),
            seed: config.seed,
            config: config.clone(),
            search: SearchReport {
                generations: outcome.generations,
                migrations: outcome.migrations,
                evaluations: outcome.evaluations,
            },
            wall_time_secs: None,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    /// Parses a report, rejecting unknown major schema versions.
    pub fn from_json(text: &str) -> Result<Self> {
        let raw: serde_json::Value = serde_json::from_str(text)?;
        let version = raw
            .get("schema_version")
            .and_then(|v| v.as_str())
            .ok_or_else(|| PqarError::Input("report has no schema_version".into()))?;
        let major = version.split('.').next().and_then(|m| m.parse::<u64>().ok());
        if major != Some(SCHEMA_MAJOR) {
            return Err(PqarError::SchemaVersion {
                found: version.to_string(),
                supported: SCHEMA_MAJOR,
            });
        }
        Ok(serde_json::from_value(raw)?)
    }
}

/// Writes `t,y,q_<tau>...,break` rows: the fitted conditional quantile of
/// every observation in a loss window, and a 1 on the first observation of
/// each new segment.
pub fn write_plot_data<W: Write>(
    writer: W,
    series: &TimeSeries,
    outcome: &GaOutcome,
) -> csv::Result<()> {
    let y = series.values();
    let mut w = csv::Writer::from_writer(writer);
    let mut header = vec!["t".to_string(), "y".to_string()];
    header.extend(outcome.fits.iter().map(|f| format!("q_{}", f[0].tau)));
    header.push("break".into());
    w.write_record(&header)?;
    let seg = &outcome.segmentation;
    for (t, &yt) in y.iter().enumerate() {
        let s = seg.segment(seg.breaks().partition_point(|&b| b <= t));
        let mut row = vec![(t + 1).to_string(), yt.to_string()];
        for per_tau in &outcome.fits {
            let fit = &per_tau[s.index];
            if fit.window.contains(&t) {
                let q = fit.theta[0]
                    + (1..=fit.order).map(|l| fit.theta[l] * y[t - l]).sum::<f64>();
                row.push(q.to_string());
            } else {
                row.push(String::new());
            }
        }
        row.push(if t == s.start && t > 0 { "1" } else { "0" }.into());
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

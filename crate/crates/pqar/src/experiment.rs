// SPDX-License-Identifier: MIT OR Apache-2.0

//! Monte Carlo replication of the simulation studies.
//!
//! Replication `r` simulates its series from ChaCha stream `2r` of the
//! master seed and takes its GA seed from stream `2r + 1`, so every
//! replication is reproducible on its own. Each series is segmented once
//! per requested quantile setting.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;

use pqar_core::ga::{self, GaConfig, Sequential};
use pqar_core::sim::{simulate_preset, GroundTruth, Preset};
use pqar_core::{relative_locations, QuantileSpec};
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{PqarError, Result};
use crate::parallel::SharedCache;

/// A quantile setting: one `tau`, or several jointly with equal weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Setting {
    pub label: String,
    pub taus: Vec<f64>,
}

impl Setting {
    pub fn single(tau: f64) -> Self {
        Self {
            label: format!("{tau}"),
            taus: vec![tau],
        }
    }

    pub fn mult(taus: Vec<f64>) -> Self {
        Self {
            label: "mult".into(),
            taus,
        }
    }

    pub fn spec(&self) -> Result<QuantileSpec> {
        Ok(QuantileSpec::equal(self.taus.clone())?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub preset: Preset,
    pub n: usize,
    pub reps: usize,
    pub settings: Vec<Setting>,
    pub seed: u64,
    pub ga: GaConfig,
}

/// Result of one segmentation inside an experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub rep: usize,
    pub setting: String,
    pub num_breaks: usize,
    pub breaks: Vec<usize>,
    pub locations: Vec<f64>,
    pub orders: Vec<usize>,
    pub mdl: f64,
    /// True when the best codelength never rose between generations.
    pub monotone: bool,
}

/// Per-setting aggregate: one row of the summary table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub setting: String,
    pub taus: Vec<f64>,
    pub runs: usize,
    /// Percentage of runs by number of estimated breaks.
    pub num_breaks_pct: BTreeMap<usize, f64>,
    /// Percentage of runs with the true number of breaks.
    pub correct_pct: f64,
    /// Mean and standard deviation of each relative break location over the
    /// runs with the true number of breaks. The deviation is absent with
    /// fewer than two such runs.
    pub location_mean: Vec<Option<f64>>,
    pub location_std: Vec<Option<f64>>,
    /// Per segment, percentage of the correct-count runs choosing each order.
    pub order_pct: Vec<BTreeMap<usize, f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSummary {
    pub preset: Preset,
    pub n: usize,
    pub replications: usize,
    pub seed: u64,
    pub truth: GroundTruth,
    pub rows: Vec<SummaryRow>,
    pub runs: Vec<RunRecord>,
}

fn rep_streams(seed: u64, rep: usize) -> (ChaCha8Rng, u64) {
    let mut data = ChaCha8Rng::seed_from_u64(seed);
    data.set_stream(2 * rep as u64);
    let mut ga = ChaCha8Rng::seed_from_u64(seed);
    ga.set_stream(2 * rep as u64 + 1);
    (data, ga.next_u64())
}

fn run_one(cfg: &ExperimentConfig, rep: usize, setting: &Setting) -> Result<RunRecord> {
    let (mut data_rng, ga_seed) = rep_streams(cfg.seed, rep);
    let sim = simulate_preset(cfg.preset, cfg.n, &mut data_rng)?;
    let spec = setting.spec()?;
    let config = GaConfig {
        seed: ga_seed,
        ..cfg.ga.clone()
    };
    let cache = SharedCache::new();
    let out = ga::run(&sim.series, &spec, &config, &cache, &Sequential)?;
    let monotone = out
        .log
        .windows(2)
        .all(|w| w[0].island_best.iter().zip(&w[1].island_best).all(|(a, b)| b <= a));
    Ok(RunRecord {
        rep,
        setting: setting.label.clone(),
        num_breaks: out.segmentation.num_breaks(),
        breaks: out.segmentation.breaks().to_vec(),
        locations: relative_locations(&out.segmentation),
        orders: out.segmentation.orders().to_vec(),
        mdl: out.score.total,
        monotone,
    })
}

fn mean_std(values: &[f64]) -> (Option<f64>, Option<f64>) {
    if values.is_empty() {
        return (None, None);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (Some(mean), None);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (Some(mean), Some(var.sqrt()))
}

fn summarize(setting: &Setting, runs: &[&RunRecord], truth: &GroundTruth) -> SummaryRow {
    let total = runs.len() as f64;
    let mut num_breaks_pct = BTreeMap::new();
    for r in runs {
        *num_breaks_pct.entry(r.num_breaks).or_insert(0.0) += 100.0 / total;
    }
    let correct: Vec<&&RunRecord> = runs.iter().filter(|r| r.num_breaks == truth.num_breaks).collect();
    let mut location_mean = Vec::new();
    let mut location_std = Vec::new();
    for j in 0..truth.num_breaks {
        let v: Vec<f64> = correct.iter().map(|r| r.locations[j]).collect();
        let (m, s) = mean_std(&v);
        location_mean.push(m);
        location_std.push(s);
    }
    let mut order_pct = vec![BTreeMap::new(); truth.num_breaks + 1];
    for r in &correct {
        for (j, &p) in r.orders.iter().enumerate() {
            *order_pct[j].entry(p).or_insert(0.0) += 100.0 / correct.len() as f64;
        }
    }
    SummaryRow {
        setting: setting.label.clone(),
        taus: setting.taus.clone(),
        runs: runs.len(),
        num_breaks_pct,
        correct_pct: 100.0 * correct.len() as f64 / total,
        location_mean,
        location_std,
        order_pct,
    }
}

/// Runs every replication under every setting. Jobs run on the current
/// rayon pool; results do not depend on its size.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentSummary> {
    if cfg.reps == 0 {
        return Err(PqarError::Input("reps must be at least 1".into()));
    }
    if cfg.settings.is_empty() {
        return Err(PqarError::Input("no quantile settings given".into()));
    }
    cfg.ga.validate()?;
    for s in &cfg.settings {
        s.spec()?;
    }
    let truth = simulate_preset(cfg.preset, cfg.n, &mut rep_streams(cfg.seed, 0).0)?.truth;

    let jobs: Vec<(usize, &Setting)> = (0..cfg.reps)
        .flat_map(|r| cfg.settings.iter().map(move |s| (r, s)))
        .collect();
    let runs = jobs
        .par_iter()
        .map(|&(rep, s)| run_one(cfg, rep, s))
        .collect::<Result<Vec<_>>>()?;

    let rows = cfg
        .settings
        .iter()
        .map(|s| {
            let mine: Vec<&RunRecord> = runs.iter().filter(|r| r.setting == s.label).collect();
            summarize(s, &mine, &truth)
        })
        .collect();
    Ok(ExperimentSummary {
        preset: cfg.preset,
        n: cfg.n,
        replications: cfg.reps,
        seed: cfg.seed,
        truth,
        rows,
        runs,
    })
}

fn cell(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.6}")).unwrap_or_default()
}

impl ExperimentSummary {
    /// One line per setting: break-count percentages, then the location
    /// mean and standard deviation for each true break.
    pub fn write_csv<W: Write>(&self, writer: W) -> csv::Result<()> {
        let max_m = self
            .rows
            .iter()
            .flat_map(|r| r.num_breaks_pct.keys().copied())
            .chain([self.truth.num_breaks + 1])
            .max()
            .unwrap_or(0);
        let mut w = csv::Writer::from_writer(writer);
        let mut header = vec!["setting".to_string(), "runs".into()];
        header.extend((0..=max_m).map(|m| format!("pct_m{m}")));
        for j in 1..=self.truth.num_breaks {
            header.push(format!("lambda{j}_mean"));
            header.push(format!("lambda{j}_std"));
        }
        w.write_record(&header)?;
        for row in &self.rows {
            let mut rec = vec![row.setting.clone(), row.runs.to_string()];
            rec.extend((0..=max_m).map(|m| {
                format!("{:.1}", row.num_breaks_pct.get(&m).copied().unwrap_or(0.0))
            }));
            for j in 0..self.truth.num_breaks {
                rec.push(cell(row.location_mean[j]));
                rec.push(cell(row.location_std[j]));
            }
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn row(&self, setting: &str) -> Option<&SummaryRow> {
        self.rows.iter().find(|r| r.setting == setting)
    }
}

impl fmt::Display for ExperimentSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "{} n={} reps={} true breaks at {:?}",
            self.preset, self.n, self.replications, self.truth.fractions
        )?;
        for row in &self.rows {
            let pct: Vec<String> = row
                .num_breaks_pct
                .iter()
                .map(|(m, p)| format!("m={m}: {p:.1}%"))
                .collect();
            write!(f, "  {:>6}  {}", row.setting, pct.join("  "))?;
            for (m, s) in row.location_mean.iter().zip(&row.location_std) {
                match (m, s) {
                    (Some(m), Some(s)) => write!(f, "  {m:.3} ({s:.3})")?,
                    (Some(m), None) => write!(f, "  {m:.3} ()")?,
                    _ => write!(f, "  -")?,
                }
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

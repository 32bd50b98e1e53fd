// SPDX-License-Identifier: MIT OR Apache-2.0

//! Named data-generating processes of the simulation studies.

use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use rand::Rng;

use super::{simulate_piecewise, simulate_svm, CoefFn, QarSpec, Regime, SvmPiece};
use crate::error::{Error, Result};
use crate::series::TimeSeries;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum Preset {
    /// Piecewise AR(2), breaks at n/2 and 3n/4, Gaussian noise.
    Sim1,
    /// QAR(1) with coefficient `0.85 + 0.25 u` and explosive upper tail.
    Sim2,
    /// Piecewise AR(1) whose first-piece coefficient changes at the 0.2
    /// quantile; asymmetric-Laplace noise.
    Sim3,
    /// QAR(2) followed by QAR(1), break at n/2.
    Sim4,
    /// Stochastic volatility, change in volatility dynamics.
    #[cfg_attr(feature = "serde", serde(rename = "svmA"))]
    SvmA,
    /// Stochastic volatility, change in scale.
    #[cfg_attr(feature = "serde", serde(rename = "svmB"))]
    SvmB,
    /// QAR(2) with cubic coefficient functions fitted to three-month
    /// Treasury bill rates.
    Tbill,
}

impl Preset {
    pub const ALL: [Preset; 7] = [
        Preset::Sim1,
        Preset::Sim2,
        Preset::Sim3,
        Preset::Sim4,
        Preset::SvmA,
        Preset::SvmB,
        Preset::Tbill,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Preset::Sim1 => "sim1",
            Preset::Sim2 => "sim2",
            Preset::Sim3 => "sim3",
            Preset::Sim4 => "sim4",
            Preset::SvmA => "svmA",
            Preset::SvmB => "svmB",
            Preset::Tbill => "tbill",
        }
    }

    /// Default series length.
    pub fn default_len(self) -> usize {
        match self {
            Preset::Sim4 => 4000,
            Preset::Tbill => 2392,
            _ => 1024,
        }
    }

    /// Break positions (first index of each new regime, 0-based) for a
    /// series of length `n`.
    pub fn breaks(self, n: usize) -> Vec<usize> {
        match self {
            Preset::Sim1 => vec![n / 2, 3 * n / 4],
            Preset::Sim3 | Preset::Sim4 | Preset::SvmA | Preset::SvmB => vec![n / 2],
            Preset::Sim2 | Preset::Tbill => vec![],
        }
    }

    /// Regime specifications of the QAR presets, `None` for the volatility
    /// models.
    pub fn regimes(self, n: usize) -> Option<Vec<Regime>> {
        let normal = || CoefFn::Normal { mean: 0.0, sd: 1.0 };
        let specs: Vec<QarSpec> = match self {
            Preset::Sim1 => vec![
                QarSpec::new(vec![normal(), CoefFn::Constant(0.5), CoefFn::Constant(0.3)]),
                QarSpec::new(vec![normal(), CoefFn::Constant(-0.5), CoefFn::Constant(-0.7)]),
                QarSpec::new(vec![normal(), CoefFn::Constant(1.3), CoefFn::Constant(-0.5)]),
            ],
            Preset::Sim2 => vec![QarSpec::new(vec![
                normal(),
                CoefFn::Polynomial(vec![0.85, 0.25]),
            ])],
            Preset::Sim3 => vec![
                QarSpec::new(vec![
                    CoefFn::Constant(0.0),
                    CoefFn::Step {
                        threshold: 0.2,
                        below: 0.5,
                        above: 0.8,
                    },
                ])
                .with_innovation(CoefFn::AsymmetricLaplace { tau: 0.4 }),
                QarSpec::new(vec![CoefFn::Constant(0.0), CoefFn::Constant(0.5)])
                    .with_innovation(CoefFn::AsymmetricLaplace { tau: 0.6 }),
            ],
            Preset::Sim4 => vec![
                QarSpec::new(vec![
                    CoefFn::Constant(0.0),
                    CoefFn::Polynomial(vec![0.2, 0.1]),
                    CoefFn::Polynomial(vec![0.5, 0.1]),
                ])
                .with_innovation(normal()),
                QarSpec::new(vec![CoefFn::Constant(0.0), CoefFn::Polynomial(vec![0.0, 0.7])])
                    .with_innovation(CoefFn::Laplace { scale: 1.0 }),
            ],
            Preset::Tbill => vec![QarSpec::new(vec![
                CoefFn::Polynomial(vec![-0.0144, 0.2264, -0.5448, 0.3848]),
                CoefFn::Polynomial(vec![1.3721, -0.9635, 1.5312, -0.6939]),
                CoefFn::Polynomial(vec![-0.4394, 1.3154, -2.1945, 1.1353]),
            ])],
            Preset::SvmA | Preset::SvmB => return None,
        };
        Some(zip_lengths(specs, &self.breaks(n), n))
    }

    /// Pieces of the volatility presets, `None` for the QAR ones.
    pub fn svm_pieces(self) -> Option<[SvmPiece; 2]> {
        match self {
            Preset::SvmA => Some([
                SvmPiece {
                    gamma: -0.810_670_3,
                    phi: 0.90,
                    eta_var: 0.455_600_10,
                    xi_var: 1.0,
                },
                SvmPiece {
                    gamma: -0.373_873_6,
                    phi: 0.95,
                    eta_var: 0.067_581_85,
                    xi_var: 1.0,
                },
            ]),
            Preset::SvmB => Some([
                SvmPiece {
                    gamma: -0.810_670_3,
                    phi: 0.0,
                    eta_var: 0.5,
                    xi_var: 1.0,
                },
                SvmPiece {
                    gamma: -0.373_873_6,
                    phi: 0.0,
                    eta_var: 0.5,
                    xi_var: 4.0,
                },
            ]),
            _ => None,
        }
    }

    fn describe(self) -> Vec<String> {
        let s: &[&str] = match self {
            Preset::Sim1 => &[
                "AR(2): 0.5 y[t-1] + 0.3 y[t-2] + N(0,1)",
                "AR(2): -0.5 y[t-1] - 0.7 y[t-2] + N(0,1)",
                "AR(2): 1.3 y[t-1] - 0.5 y[t-2] + N(0,1)",
            ],
            Preset::Sim2 => &["QAR(1): (0.85 + 0.25 u) y[t-1] + Phi^-1(u)"],
            Preset::Sim3 => &[
                "AR(1): (0.5 if u <= 0.2 else 0.8) y[t-1] + AL(0.4)",
                "AR(1): 0.5 y[t-1] + AL(0.6)",
            ],
            Preset::Sim4 => &[
                "QAR(2): (0.2 + 0.1 u) y[t-1] + (0.5 + 0.1 u) y[t-2] + N(0,1)",
                "QAR(1): 0.7 u y[t-1] + Laplace(1)",
            ],
            Preset::SvmA => &[
                "SV: gamma=-0.8106703 phi=0.90 var(eta)=0.45560010 var(xi)=1",
                "SV: gamma=-0.3738736 phi=0.95 var(eta)=0.06758185 var(xi)=1",
            ],
            Preset::SvmB => &[
                "SV: gamma=-0.8106703 phi=0 var(eta)=0.5 var(xi)=1",
                "SV: gamma=-0.3738736 phi=0 var(eta)=0.5 var(xi)=4",
            ],
            Preset::Tbill => &["QAR(2) with cubic coefficient functions"],
        };
        s.iter().map(|d| d.to_string()).collect()
    }
}

fn zip_lengths(specs: Vec<QarSpec>, breaks: &[usize], n: usize) -> Vec<Regime> {
    let mut bounds = Vec::with_capacity(breaks.len() + 2);
    bounds.push(0);
    bounds.extend_from_slice(breaks);
    bounds.push(n);
    specs
        .into_iter()
        .zip(bounds.windows(2))
        .map(|(spec, w)| Regime {
            spec,
            len: w[1] - w[0],
        })
        .collect()
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Preset::ALL
            .into_iter()
            .find(|p| p.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::UnknownPreset(s.to_string()))
    }
}

/// True structure of a simulated series.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GroundTruth {
    pub preset: String,
    pub n: usize,
    pub num_breaks: usize,
    /// 0-based first index of each new regime, equal to the 1-based last
    /// index of the previous one.
    pub breaks: Vec<usize>,
    pub fractions: Vec<f64>,
    pub segments: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Simulated {
    pub series: TimeSeries,
    pub truth: GroundTruth,
}

/// Simulates `n` observations of a preset.
pub fn simulate_preset<R: Rng + ?Sized>(preset: Preset, n: usize, rng: &mut R) -> Result<Simulated> {
    let breaks = preset.breaks(n);
    let mut bounds = vec![0];
    bounds.extend_from_slice(&breaks);
    bounds.push(n);
    if n == 0 || bounds.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidConfig(alloc::format!(
            "n = {n} is too short for preset {preset}"
        )));
    }
    let series = match preset.regimes(n) {
        Some(regimes) => simulate_piecewise(&regimes, rng)?,
        None => {
            let [a, b] = preset.svm_pieces().expect("volatility preset");
            simulate_svm(&[(a, breaks[0]), (b, n - breaks[0])], rng)?
        }
    };
    let fractions = breaks.iter().map(|&k| k as f64 / n as f64).collect();
    Ok(Simulated {
        series,
        truth: GroundTruth {
            preset: preset.name().to_string(),
            n,
            num_breaks: breaks.len(),
            breaks,
            fractions,
            segments: preset.describe(),
        },
    })
}

// SPDX-License-Identifier: MIT OR Apache-2.0

//! Simulation of (piecewise) quantile autoregressions and of the stochastic
//! volatility test bed.
//!
//! A QAR(p) process is `y_t = theta_0(u_t) + sum_j theta_j(u_t) y_{t-j}` with
//! `u_t` i.i.d. uniform. Specs may add an innovation driven by a second,
//! independent uniform, which is how plain AR models with noise independent
//! of the coefficient draw are expressed.

mod dist;
mod presets;

use alloc::vec::Vec;
use rand::Rng;

pub use dist::{
    asymmetric_laplace_cdf, asymmetric_laplace_mean, asymmetric_laplace_quantile,
    laplace_quantile, normal_cdf, normal_pdf, normal_quantile, open_uniform,
    sample_asymmetric_laplace,
};
pub use presets::{simulate_preset, GroundTruth, Preset, Simulated};

use crate::error::{Error, Result};
use crate::series::TimeSeries;

/// Absolute value beyond which a simulated path counts as diverged.
pub const OVERFLOW_LIMIT: f64 = 1e12;

/// Default number of discarded initial values.
pub const DEFAULT_BURN_IN: usize = 200;

/// A coefficient function of the uniform driver `u` in `(0, 1)`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum CoefFn {
    Constant(f64),
    /// `c_0 + c_1 u + c_2 u^2 + ...`
    Polynomial(Vec<f64>),
    /// `mean + sd * Phi^{-1}(u)`
    Normal { mean: f64, sd: f64 },
    /// Asymmetric-Laplace quantile with parameter `tau`.
    AsymmetricLaplace { tau: f64 },
    /// Symmetric Laplace quantile with the given scale.
    Laplace { scale: f64 },
    /// `below` for `u <= threshold`, `above` otherwise.
    Step { threshold: f64, below: f64, above: f64 },
    Sum(Vec<CoefFn>),
}

impl CoefFn {
    pub fn eval(&self, u: f64) -> f64 {
        match self {
            CoefFn::Constant(c) => *c,
            CoefFn::Polynomial(c) => c.iter().rev().fold(0.0, |acc, &ci| acc * u + ci),
            CoefFn::Normal { mean, sd } => mean + sd * normal_quantile(u),
            CoefFn::AsymmetricLaplace { tau } => asymmetric_laplace_quantile(u, *tau),
            CoefFn::Laplace { scale } => laplace_quantile(u, *scale),
            CoefFn::Step {
                threshold,
                below,
                above,
            } => {
                if u <= *threshold {
                    *below
                } else {
                    *above
                }
            }
            CoefFn::Sum(parts) => parts.iter().map(|p| p.eval(u)).sum(),
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = match self {
            CoefFn::Constant(c) => c.is_finite(),
            CoefFn::Polynomial(c) => c.iter().all(|v| v.is_finite()),
            CoefFn::Normal { mean, sd } => mean.is_finite() && sd.is_finite() && *sd >= 0.0,
            CoefFn::AsymmetricLaplace { tau } => *tau > 0.0 && *tau < 1.0,
            CoefFn::Laplace { scale } => scale.is_finite() && *scale > 0.0,
            CoefFn::Step {
                threshold,
                below,
                above,
            } => threshold.is_finite() && below.is_finite() && above.is_finite(),
            CoefFn::Sum(parts) => return parts.iter().try_for_each(CoefFn::validate),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidConfig(alloc::format!(
                "coefficient function {self:?} is not finite on (0, 1)"
            )))
        }
    }
}

/// A QAR(p) specification: `coefficients[0]` is the intercept function
/// and `coefficients[j]` multiplies `y_{t-j}`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct QarSpec {
    pub coefficients: Vec<CoefFn>,
    /// Additive term driven by a uniform independent of `u_t`.
    #[cfg_attr(feature = "serde", serde(default))]
    pub innovation: Option<CoefFn>,
    #[cfg_attr(feature = "serde", serde(default = "default_burn_in"))]
    pub burn_in: usize,
}

#[cfg(feature = "serde")]
fn default_burn_in() -> usize {
    DEFAULT_BURN_IN
}

impl QarSpec {
    pub fn new(coefficients: Vec<CoefFn>) -> Self {
        Self {
            coefficients,
            innovation: None,
            burn_in: DEFAULT_BURN_IN,
        }
    }

    pub fn with_innovation(mut self, innovation: CoefFn) -> Self {
        self.innovation = Some(innovation);
        self
    }

    pub fn with_burn_in(mut self, burn_in: usize) -> Self {
        self.burn_in = burn_in;
        self
    }

    pub fn order(&self) -> usize {
        self.coefficients.len().saturating_sub(1)
    }

    pub fn validate(&self) -> Result<()> {
        if self.coefficients.is_empty() {
            return Err(Error::InvalidConfig(
                "a QAR spec needs at least the intercept function".into(),
            ));
        }
        self.coefficients.iter().try_for_each(CoefFn::validate)?;
        if let Some(innov) = &self.innovation {
            innov.validate()?;
        }
        Ok(())
    }

    fn step<R: Rng + ?Sized>(&self, history: &[f64], rng: &mut R) -> f64 {
        let u = open_uniform(rng);
        let t = history.len();
        let mut y = self.coefficients[0].eval(u);
        for (lag, f) in self.coefficients.iter().enumerate().skip(1) {
            let prev = if t >= lag { history[t - lag] } else { 0.0 };
            y += f.eval(u) * prev;
        }
        if let Some(innov) = &self.innovation {
            y += innov.eval(open_uniform(rng));
        }
        y
    }
}

/// One regime of a piecewise process.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Regime {
    pub spec: QarSpec,
    pub len: usize,
}

/// Simulates `n` values of a stationary QAR after discarding
/// `spec.burn_in` values started from zeros.
pub fn simulate_qar<R: Rng + ?Sized>(spec: &QarSpec, n: usize, rng: &mut R) -> Result<TimeSeries> {
    simulate_piecewise(
        &[Regime {
            spec: spec.clone(),
            len: n,
        }],
        rng,
    )
}

/// Splices regimes back to back. The first regime is burnt in; later ones
/// take their first lags from the end of the previous regime.
pub fn simulate_piecewise<R: Rng + ?Sized>(regimes: &[Regime], rng: &mut R) -> Result<TimeSeries> {
    let n: usize = regimes.iter().map(|r| r.len).sum();
    if regimes.is_empty() || n == 0 {
        return Err(Error::InvalidConfig("nothing to simulate: length is zero".into()));
    }
    for r in regimes {
        r.spec.validate()?;
    }
    let burn_in = regimes[0].spec.burn_in;
    let mut path: Vec<f64> = Vec::with_capacity(burn_in + n);
    let schedule = core::iter::once((&regimes[0].spec, burn_in))
        .chain(regimes.iter().map(|r| (&r.spec, r.len)));
    for (spec, len) in schedule {
        for _ in 0..len {
            let y = spec.step(&path, rng);
            if !y.is_finite() || y.abs() > OVERFLOW_LIMIT {
                return Err(Error::Overflow {
                    step: path.len() + 1,
                    value: y,
                });
            }
            path.push(y);
        }
    }
    TimeSeries::new(path.split_off(burn_in))
}

/// Parameters of one piece of `y_t = exp(alpha_t / 2) xi_t`,
/// `alpha_t = gamma + phi alpha_{t-1} + eta_t`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SvmPiece {
    pub gamma: f64,
    pub phi: f64,
    /// Variance of `eta_t`.
    pub eta_var: f64,
    /// Variance of `xi_t`.
    pub xi_var: f64,
}

/// Simulates consecutive stochastic-volatility pieces of the given lengths.
/// The log-volatility starts at the first piece's stationary mean
/// `gamma / (1 - phi)` and carries over across pieces.
pub fn simulate_svm<R: Rng + ?Sized>(pieces: &[(SvmPiece, usize)], rng: &mut R) -> Result<TimeSeries> {
    let Some((first, _)) = pieces.first() else {
        return Err(Error::InvalidConfig("no pieces to simulate".into()));
    };
    if pieces
        .iter()
        .any(|(p, _)| !(p.phi.abs() < 1.0) || !(p.eta_var >= 0.0) || !(p.xi_var >= 0.0))
    {
        return Err(Error::InvalidConfig(
            "volatility pieces need |phi| < 1 and nonnegative variances".into(),
        ));
    }
    let mut alpha = first.gamma / (1.0 - first.phi);
    let mut out = Vec::with_capacity(pieces.iter().map(|p| p.1).sum());
    for (piece, len) in pieces {
        let eta_sd = libm::sqrt(piece.eta_var);
        let xi_sd = libm::sqrt(piece.xi_var);
        for _ in 0..*len {
            alpha = piece.gamma + piece.phi * alpha + eta_sd * normal_quantile(open_uniform(rng));
            let y = libm::exp(alpha / 2.0) * xi_sd * normal_quantile(open_uniform(rng));
            if !y.is_finite() || y.abs() > OVERFLOW_LIMIT {
                return Err(Error::Overflow {
                    step: out.len() + 1,
                    value: y,
                });
            }
            out.push(y);
        }
    }
    TimeSeries::new(out)
}

// SPDX-License-Identifier: MIT OR Apache-2.0

//! Minimum description length of a piecewise QAR model.
//!
//! The codelength of a candidate is
//!
//! ```text
//! log2 m + (m + 1) log2 n + sum_j log2 p_j + sum_j (p_j + 1)/2 log2 n_j
//!        + sum_j sum_{t in segment j} rho_tau(residual_t)
//! ```
//!
//! with `log2 m := 0` when there are no breaks. The constant
//! `-n log(tau (1 - tau))` of the asymmetric-Laplace likelihood is not part
//! of the score. Several quantiles are combined by a weighted sum of the
//! single-quantile codelengths.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::Lu;
use crate::qr::{fit_qar, loss_window, segment_loss, validate_tau, SegmentFit};
use crate::segmentation::Segmentation;
use crate::series::TimeSeries;

/// Quantiles scored jointly and their weights.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct QuantileSpec {
    taus: Vec<f64>,
    weights: Vec<f64>,
}

impl QuantileSpec {
    pub fn new(taus: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        validate_taus(&taus)?;
        if weights.len() != taus.len() {
            return Err(Error::InvalidQuantileSpec(format!(
                "{} quantiles but {} weights",
                taus.len(),
                weights.len()
            )));
        }
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::InvalidQuantileSpec(
                "weights must be finite and nonnegative".into(),
            ));
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidQuantileSpec(format!(
                "weights sum to {sum}, expected 1"
            )));
        }
        Ok(Self { taus, weights })
    }

    pub fn single(tau: f64) -> Result<Self> {
        Self::new(vec![tau], vec![1.0])
    }

    /// Equal weights `1 / L`.
    pub fn equal(taus: Vec<f64>) -> Result<Self> {
        let l = taus.len().max(1) as f64;
        let weights = vec![1.0 / l; taus.len()];
        Self::new(taus, weights)
    }

    /// Weights proportional to `W^{-1} v`; see [`optimal_weights`].
    pub fn optimal(taus: Vec<f64>, densities: &[f64]) -> Result<Self> {
        let weights = optimal_weights(&taus, densities)?;
        Self::new(taus, weights)
    }

    /// Rescales nonnegative weights to sum to one.
    pub fn normalized(taus: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        let sum: f64 = weights.iter().sum();
        if !(sum > 0.0) || !sum.is_finite() {
            return Err(Error::InvalidQuantileSpec(
                "weights must have a positive finite sum".into(),
            ));
        }
        Self::new(taus, weights.iter().map(|w| w / sum).collect())
    }

    pub fn taus(&self) -> &[f64] {
        &self.taus
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.taus.len()
    }

    pub fn is_empty(&self) -> bool {
        self.taus.is_empty()
    }
}

fn validate_taus(taus: &[f64]) -> Result<()> {
    if taus.is_empty() {
        return Err(Error::InvalidQuantileSpec("no quantiles given".into()));
    }
    for &t in taus {
        validate_tau(t)?;
    }
    if taus.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidQuantileSpec(
            "quantiles must be strictly increasing".into(),
        ));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct QuantileScore {
    pub tau: f64,
    pub weight: f64,
    pub total: f64,
    pub residual: f64,
}

/// Codelength of a fitted model, split into its structure and residual
/// parts. For several quantiles `residual` is the weighted residual sum and
/// `per_quantile` holds the single-quantile scores.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MdlScore {
    pub total: f64,
    pub structure: f64,
    pub residual: f64,
    pub per_quantile: Vec<QuantileScore>,
}

/// Structure codelength in bits; depends only on `n`, the breaks and the
/// orders.
pub fn structure_codelength(seg: &Segmentation) -> f64 {
    let m = seg.num_breaks();
    let n = seg.n() as f64;
    let mut bits = if m == 0 { 0.0 } else { libm::log2(m as f64) };
    bits += (m as f64 + 1.0) * libm::log2(n);
    for s in seg.segments() {
        // order 0 contributes no bits to the order code
        if s.order > 0 {
            bits += libm::log2(s.order as f64);
        }
        bits += (s.order as f64 + 1.0) / 2.0 * libm::log2(s.len() as f64);
    }
    bits
}

/// Combines per-quantile residual totals. Shared by the scoring functions and
/// the GA fitness so both produce bit-identical totals.
pub(crate) fn combine(structure: f64, residuals: &[f64], spec: &QuantileSpec) -> MdlScore {
    let mut per_quantile = Vec::with_capacity(residuals.len());
    let mut total = 0.0;
    let mut residual = 0.0;
    for ((&tau, &weight), &res) in spec.taus.iter().zip(&spec.weights).zip(residuals) {
        let single = structure + res;
        total += weight * single;
        residual += weight * res;
        per_quantile.push(QuantileScore {
            tau,
            weight,
            total: single,
            residual: res,
        });
    }
    if residuals.len() == 1 {
        // exact decomposition for the single-quantile case
        total = structure + residuals[0];
        residual = residuals[0];
    }
    MdlScore {
        total,
        structure,
        residual,
        per_quantile,
    }
}

fn check_fits(series: &TimeSeries, seg: &Segmentation, tau: f64, fits: &[SegmentFit]) -> Result<()> {
    if series.len() != seg.n() {
        return Err(Error::FitMismatch(format!(
            "series has {} observations, segmentation expects {}",
            series.len(),
            seg.n()
        )));
    }
    if fits.len() != seg.num_segments() {
        return Err(Error::FitMismatch(format!(
            "{} fits for {} segments",
            fits.len(),
            seg.num_segments()
        )));
    }
    for (s, fit) in seg.segments().zip(fits) {
        if fit.tau != tau {
            return Err(Error::FitMismatch(format!(
                "segment {} was fitted at tau = {}, expected {}",
                s.index + 1,
                fit.tau,
                tau
            )));
        }
        if fit.order != s.order || fit.window != loss_window(s.range(), s.order) {
            return Err(Error::FitMismatch(format!(
                "segment {} fit does not cover its window with order {}",
                s.index + 1,
                s.order
            )));
        }
    }
    Ok(())
}

/// MDL at a single quantile from already computed segment fits.
pub fn mdl_single(
    series: &TimeSeries,
    seg: &Segmentation,
    tau: f64,
    fits: &[SegmentFit],
) -> Result<MdlScore> {
    validate_tau(tau)?;
    check_fits(series, seg, tau, fits)?;
    let residual: f64 = fits.iter().map(|f| f.loss).sum();
    let spec = QuantileSpec::single(tau)?;
    Ok(combine(structure_codelength(seg), &[residual], &spec))
}

/// Weighted MDL over several quantiles; `fits[l]` are the segment fits at
/// `spec.taus()[l]`.
pub fn mdl_multi(
    series: &TimeSeries,
    seg: &Segmentation,
    spec: &QuantileSpec,
    fits: &[Vec<SegmentFit>],
) -> Result<MdlScore> {
    if fits.len() != spec.len() {
        return Err(Error::FitMismatch(format!(
            "{} quantiles but fits for {}",
            spec.len(),
            fits.len()
        )));
    }
    let mut residuals = Vec::with_capacity(spec.len());
    for (&tau, f) in spec.taus.iter().zip(fits) {
        check_fits(series, seg, tau, f)?;
        residuals.push(f.iter().map(|f| f.loss).sum());
    }
    Ok(combine(structure_codelength(seg), &residuals, spec))
}

/// Fits every segment of `seg` at `tau`.
pub fn fit_segments(series: &TimeSeries, seg: &Segmentation, tau: f64) -> Result<Vec<SegmentFit>> {
    seg.segments()
        .map(|s| fit_qar(series, s.range(), s.order, tau))
        .collect()
}

/// Fits all segments at all quantiles and scores the result.
pub fn score(
    series: &TimeSeries,
    seg: &Segmentation,
    spec: &QuantileSpec,
) -> Result<(MdlScore, Vec<Vec<SegmentFit>>)> {
    let fits = spec
        .taus()
        .iter()
        .map(|&tau| fit_segments(series, seg, tau))
        .collect::<Result<Vec<_>>>()?;
    let score = mdl_multi(series, seg, spec, &fits)?;
    Ok((score, fits))
}

/// Weights `W^{-1} v` with `W_{l,l'} = min(tau_l, tau_l') - tau_l tau_l'`
/// and `v_l = f(F^{-1}(tau_l))`, rescaled to sum to one.
pub fn optimal_weights(taus: &[f64], densities: &[f64]) -> Result<Vec<f64>> {
    validate_taus(taus)?;
    if densities.len() != taus.len() {
        return Err(Error::InvalidQuantileSpec(format!(
            "{} quantiles but {} density values",
            taus.len(),
            densities.len()
        )));
    }
    if densities.iter().any(|v| !v.is_finite() || *v <= 0.0) {
        return Err(Error::InvalidQuantileSpec(
            "density values must be finite and positive".into(),
        ));
    }
    let l = taus.len();
    let mut w = vec![0.0; l * l];
    for a in 0..l {
        for b in 0..l {
            w[a * l + b] = taus[a].min(taus[b]) - taus[a] * taus[b];
        }
    }
    let lu = Lu::factor(w, l).ok_or(Error::Singular)?;
    let mut raw = densities.to_vec();
    lu.solve(&mut raw);
    let sum: f64 = raw.iter().sum();
    if !(sum.abs() > 0.0) || !sum.is_finite() {
        return Err(Error::Singular);
    }
    Ok(raw.iter().map(|r| r / sum).collect())
}

/// Key of one cached segment loss.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SegmentKey {
    pub start: u32,
    pub end: u32,
    pub order: u8,
    /// Index into the quantile list.
    pub quantile: u8,
}

/// Storage for segment losses shared by concurrent fitness evaluations.
/// Losses are deterministic, so a cache never changes results.
pub trait LossCache: Sync {
    fn get(&self, key: &SegmentKey) -> Option<f64>;
    fn insert(&self, key: SegmentKey, loss: f64);
}

/// Cache that stores nothing.
#[derive(Debug, Default, Clone, Copy)]
pub struct NoCache;

impl LossCache for NoCache {
    fn get(&self, _: &SegmentKey) -> Option<f64> {
        None
    }

    fn insert(&self, _: SegmentKey, _: f64) {}
}

/// MDL fitness of segmentations of one series.
pub struct MdlObjective<'a, C: ?Sized> {
    series: &'a TimeSeries,
    spec: &'a QuantileSpec,
    cache: &'a C,
}

impl<'a, C: LossCache + ?Sized> MdlObjective<'a, C> {
    pub fn new(series: &'a TimeSeries, spec: &'a QuantileSpec, cache: &'a C) -> Self {
        Self {
            series,
            spec,
            cache,
        }
    }

    pub fn series(&self) -> &TimeSeries {
        self.series
    }

    pub fn spec(&self) -> &QuantileSpec {
        self.spec
    }

    fn loss(&self, start: usize, end: usize, order: usize, q: usize) -> Result<f64> {
        let key = SegmentKey {
            start: start as u32,
            end: end as u32,
            order: order as u8,
            quantile: q as u8,
        };
        if let Some(v) = self.cache.get(&key) {
            return Ok(v);
        }
        let v = segment_loss(self.series.values(), start..end, order, self.spec.taus[q])?;
        self.cache.insert(key, v);
        Ok(v)
    }

    /// Full score of a segmentation.
    pub fn score(&self, seg: &Segmentation) -> Result<MdlScore> {
        let mut residuals = Vec::with_capacity(self.spec.len());
        for q in 0..self.spec.len() {
            let mut sum = 0.0;
            for s in seg.segments() {
                sum += self.loss(s.start, s.end, s.order, q)?;
            }
            residuals.push(sum);
        }
        Ok(combine(structure_codelength(seg), &residuals, self.spec))
    }

    /// Total codelength; solver failures score as `+inf`.
    pub fn evaluate(&self, seg: &Segmentation) -> f64 {
        self.score(seg).map(|s| s.total).unwrap_or(f64::INFINITY)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seg(n: usize, breaks: Vec<usize>, orders: Vec<usize>) -> Segmentation {
        Segmentation::from_parts(n, breaks, orders).unwrap()
    }

    #[test]
    fn structure_examples() {
        // 2 log2 100 + log2 50 + log2 50
        let s = structure_codelength(&seg(100, vec![50], vec![1, 1]));
        let expected = 2.0 * libm::log2(100.0) + 2.0 * libm::log2(50.0);
        assert!((s - expected).abs() < 1e-12);
        assert!((s - 24.575_424_759_098_9).abs() < 1e-9);
        let s = structure_codelength(&seg(100, vec![], vec![1]));
        assert!((s - 13.287_712_379_549_4).abs() < 1e-9);
    }

    #[test]
    fn quantile_spec_validation() {
        assert!(QuantileSpec::new(vec![0.5, 0.25], vec![0.5, 0.5]).is_err());
        assert!(QuantileSpec::new(vec![0.25, 0.5], vec![0.5, 0.6]).is_err());
        assert!(QuantileSpec::new(vec![0.25, 0.5], vec![1.0]).is_err());
        assert!(QuantileSpec::new(vec![0.0], vec![1.0]).is_err());
        assert!(QuantileSpec::new(vec![], vec![]).is_err());
        let s = QuantileSpec::equal(vec![0.25, 0.5, 0.75]).unwrap();
        assert!((s.weights().iter().sum::<f64>() - 1.0).abs() < 1e-12);
        let s = QuantileSpec::normalized(vec![0.25, 0.75], vec![2.0, 6.0]).unwrap();
        assert_eq!(s.weights(), &[0.25, 0.75]);
    }

    #[test]
    fn optimal_weight_examples() {
        assert_eq!(optimal_weights(&[0.5], &[1.0]).unwrap(), vec![1.0]);
        let w = optimal_weights(&[0.25, 0.75], &[1.0, 1.0]).unwrap();
        assert!((w[0] - 0.5).abs() < 1e-14 && (w[1] - 0.5).abs() < 1e-14);
        assert!(optimal_weights(&[0.25, 0.75], &[1.0]).is_err());
        assert!(optimal_weights(&[0.25, 0.75], &[1.0, 0.0]).is_err());
        assert!(optimal_weights(&[0.75, 0.25], &[1.0, 1.0]).is_err());
    }

    #[test]
    fn mismatched_fits_rejected() {
        let series = TimeSeries::new((0..100).map(|i| ((i * 7) % 11) as f64).collect()).unwrap();
        let s = seg(100, vec![50], vec![1, 1]);
        let fits = fit_segments(&series, &s, 0.5).unwrap();
        assert!(mdl_single(&series, &s, 0.5, &fits).is_ok());
        assert!(mdl_single(&series, &s, 0.25, &fits).is_err());
        assert!(mdl_single(&series, &s, 0.5, &fits[..1]).is_err());
        let other = seg(100, vec![60], vec![1, 1]);
        assert!(mdl_single(&series, &other, 0.5, &fits).is_err());
        let spec = QuantileSpec::equal(vec![0.25, 0.5]).unwrap();
        assert!(mdl_multi(&series, &s, &spec, &[fits]).is_err());
    }
}

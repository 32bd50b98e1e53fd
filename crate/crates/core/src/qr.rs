// SPDX-License-Identifier: MIT OR Apache-2.0

//! Linear quantile regression by exact vertex descent.
//!
//! The check-loss objective is convex and piecewise linear, and some optimum
//! interpolates `k` observations (a "basic" solution). The solver walks from
//! basic solution to basic solution: at each vertex it evaluates the
//! one-sided directional derivatives along the `2k` edges obtained by
//! releasing one interpolated observation, follows the steepest descending
//! edge, and performs an exact line search over the kinks of the piecewise
//! linear objective along that edge. The observation at the minimizing kink
//! enters the basis. Every pivot strictly lowers the objective, so the walk
//! terminates at a vertex with no descending edge, which is a global
//! optimum.

use alloc::collections::BinaryHeap;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::ops::Range;

use crate::error::{Error, Result};
use crate::linalg::{solve_dense, Lu, PivotedQr};
use crate::series::TimeSeries;

const RANK_TOL: f64 = 1e-10;
const ZERO_RESIDUAL_TOL: f64 = 1e-11;
const DERIVATIVE_TOL: f64 = 1e-11;
const ABS_IMPROVEMENT_TOL: f64 = 1e-10;
const REL_IMPROVEMENT_TOL: f64 = 1e-9;

/// Check function `rho_tau(u) = u (tau - 1[u < 0])`.
pub fn check_loss(u: f64, tau: f64) -> Result<f64> {
    validate_tau(tau)?;
    Ok(rho(u, tau))
}

#[inline]
pub(crate) fn rho(u: f64, tau: f64) -> f64 {
    if u < 0.0 {
        (tau - 1.0) * u
    } else {
        tau * u
    }
}

pub(crate) fn validate_tau(tau: f64) -> Result<()> {
    if tau > 0.0 && tau < 1.0 {
        Ok(())
    } else {
        Err(Error::QuantileDomain(tau))
    }
}

/// Regressor vector `(1, y_{t-1}, ..., y_{t-p})` and response `y_t`.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignRow {
    pub regressors: Vec<f64>,
    pub response: f64,
}

impl DesignRow {
    /// `t` is a 0-based index with `t >= order`.
    pub fn at(series: &TimeSeries, t: usize, order: usize) -> Result<Self> {
        let y = series.values();
        if t < order || t >= y.len() {
            return Err(Error::WindowOutOfRange {
                start: t,
                end: t + 1,
                n: y.len(),
            });
        }
        let mut regressors = Vec::with_capacity(order + 1);
        regressors.push(1.0);
        regressors.extend((1..=order).map(|lag| y[t - lag]));
        Ok(Self {
            regressors,
            response: y[t],
        })
    }
}

/// Solution of one quantile regression problem.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantileRegression {
    pub coef: Vec<f64>,
    pub residuals: Vec<f64>,
    pub loss: f64,
    /// The design was rank deficient; `coef` is the minimum-norm member of
    /// the optimal set reached by the solver.
    pub degenerate: bool,
    pub iterations: usize,
}

/// Autoregression-quantile fit of one segment at one quantile.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SegmentFit {
    pub tau: f64,
    pub order: usize,
    /// 0-based observations whose check loss is summed.
    pub window: Range<usize>,
    /// Intercept first, then lag coefficients.
    pub theta: Vec<f64>,
    pub residuals: Vec<f64>,
    pub loss: f64,
    pub degenerate: bool,
}

/// Loss window of a segment: lags may reach into earlier segments, but not
/// before the start of the series.
pub fn loss_window(range: Range<usize>, order: usize) -> Range<usize> {
    range.start.max(order)..range.end
}

/// Fits a QAR(`order`) model at quantile `tau` to the 0-based observations
/// in `range`.
pub fn fit_qar(
    series: &TimeSeries,
    range: Range<usize>,
    order: usize,
    tau: f64,
) -> Result<SegmentFit> {
    validate_tau(tau)?;
    let n = series.len();
    if range.start >= range.end || range.end > n {
        return Err(Error::WindowOutOfRange {
            start: range.start,
            end: range.end,
            n,
        });
    }
    let window = loss_window(range, order);
    let len = window.end.saturating_sub(window.start);
    if len < order + 2 {
        return Err(Error::WindowTooShort { len, order });
    }
    let (x, y) = build_design(series.values(), window.clone(), order);
    let sol = quantile_regression(&x, &y, order + 1, tau)?;
    Ok(SegmentFit {
        tau,
        order,
        window,
        theta: sol.coef,
        residuals: sol.residuals,
        loss: sol.loss,
        degenerate: sol.degenerate,
    })
}

/// Check loss of the optimal QAR fit only; the GA's hot path.
pub fn segment_loss(series: &[f64], range: Range<usize>, order: usize, tau: f64) -> Result<f64> {
    let window = loss_window(range, order);
    let len = window.end.saturating_sub(window.start);
    if len < order + 2 {
        return Err(Error::WindowTooShort { len, order });
    }
    let (x, y) = build_design(series, window, order);
    Ok(quantile_regression(&x, &y, order + 1, tau)?.loss)
}

fn build_design(y: &[f64], window: Range<usize>, order: usize) -> (Vec<f64>, Vec<f64>) {
    let k = order + 1;
    let mut x = Vec::with_capacity(window.len() * k);
    for t in window.clone() {
        x.push(1.0);
        for lag in 1..=order {
            x.push(y[t - lag]);
        }
    }
    (x, y[window].to_vec())
}

/// Minimizes `sum_i rho_tau(y_i - x_i' b)` over `b`. `x` is row-major
/// `n x k`.
pub fn quantile_regression(x: &[f64], y: &[f64], k: usize, tau: f64) -> Result<QuantileRegression> {
    validate_tau(tau)?;
    let n = y.len();
    if k == 0 || x.len() != n * k {
        return Err(Error::InvalidConfig("design shape does not match response".into()));
    }
    if n < k {
        return Err(Error::WindowTooShort { len: n, order: k - 1 });
    }
    let qr = PivotedQr::factor(x, n, k, RANK_TOL);
    let rank = qr.rank();
    if rank == 0 {
        return Err(Error::Singular);
    }
    let ls = qr.least_squares(y);

    if rank == k {
        // `ls` is in pivoted order; undo it for the full-rank design.
        let mut start = vec![0.0; k];
        for (slot, &col) in qr.perm().iter().enumerate() {
            start[col] = ls[slot];
        }
        let basis = initial_basis(x, y, k, tau, &start)?;
        let (coef, residuals, iterations) = descend(x, y, k, tau, basis)?;
        let loss = residuals.iter().map(|&r| rho(r, tau)).sum();
        return Ok(QuantileRegression {
            coef,
            residuals,
            loss,
            degenerate: false,
            iterations,
        });
    }

    // Rank deficient: solve on the independent columns, then move to the
    // minimum-norm coefficient vector with the same fitted values.
    let cols: Vec<usize> = qr.perm()[..rank].to_vec();
    let dependent: Vec<usize> = qr.perm()[rank..].to_vec();
    let mut xr = Vec::with_capacity(n * rank);
    for i in 0..n {
        xr.extend(cols.iter().map(|&c| x[i * k + c]));
    }
    let basis = initial_basis(&xr, y, rank, tau, &ls)?;
    let (reduced, residuals, iterations) = descend(&xr, y, rank, tau, basis)?;
    let dep = qr.dependency_matrix();
    let d = k - rank;
    // minimize |b_S - C v|^2 + |v|^2  =>  (C'C + I) v = C' b_S
    let mut gram = vec![0.0; d * d];
    let mut rhs = vec![0.0; d];
    for a in 0..d {
        for b in 0..d {
            let s: f64 = (0..rank).map(|i| dep[i * d + a] * dep[i * d + b]).sum();
            gram[a * d + b] = s + if a == b { 1.0 } else { 0.0 };
        }
        rhs[a] = (0..rank).map(|i| dep[i * d + a] * reduced[i]).sum();
    }
    if !solve_dense(gram, d, &mut rhs) {
        return Err(Error::Singular);
    }
    let mut coef = vec![0.0; k];
    for (i, &c) in cols.iter().enumerate() {
        let shift: f64 = (0..d).map(|a| dep[i * d + a] * rhs[a]).sum();
        coef[c] = reduced[i] - shift;
    }
    for (a, &c) in dependent.iter().enumerate() {
        coef[c] = rhs[a];
    }
    let loss = residuals.iter().map(|&r| rho(r, tau)).sum();
    Ok(QuantileRegression {
        coef,
        residuals,
        loss,
        degenerate: true,
        iterations,
    })
}

/// Picks `k` linearly independent observations, preferring those whose
/// least-squares residual is closest to the `tau`-quantile of all of them.
fn initial_basis(x: &[f64], y: &[f64], k: usize, tau: f64, start: &[f64]) -> Result<Vec<usize>> {
    let n = y.len();
    let resid: Vec<f64> = (0..n)
        .map(|i| {
            let fit: f64 = x[i * k..(i + 1) * k].iter().zip(start).map(|(a, b)| a * b).sum();
            y[i] - fit
        })
        .collect();
    let mut sorted = resid.clone();
    let at = ((tau * n as f64) as usize).min(n - 1);
    let (_, &mut shift, _) = sorted.select_nth_unstable_by(at, f64::total_cmp);
    let mut order: Vec<(f64, usize)> = resid
        .iter()
        .enumerate()
        .map(|(i, r)| ((r - shift).abs(), i))
        .collect();
    order.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));

    for tol in [1e-6, 1e-10] {
        let mut ortho: Vec<Vec<f64>> = Vec::with_capacity(k);
        let mut basis = Vec::with_capacity(k);
        for &(_, i) in &order {
            let row = &x[i * k..(i + 1) * k];
            let norm = libm::sqrt(row.iter().map(|v| v * v).sum::<f64>());
            if norm == 0.0 {
                continue;
            }
            let mut v: Vec<f64> = row.iter().map(|a| a / norm).collect();
            for q in &ortho {
                let dot: f64 = v.iter().zip(q).map(|(a, b)| a * b).sum();
                for (vi, qi) in v.iter_mut().zip(q) {
                    *vi -= dot * qi;
                }
            }
            let rem = libm::sqrt(v.iter().map(|a| a * a).sum::<f64>());
            if rem > tol {
                v.iter_mut().for_each(|a| *a /= rem);
                ortho.push(v);
                basis.push(i);
                if basis.len() == k {
                    return Ok(basis);
                }
            }
        }
    }
    Err(Error::Singular)
}

/// Breakpoint of the objective along an edge; ordered so that a max-heap
/// pops the shortest step first, ties broken by row.
#[derive(Debug, Clone, Copy)]
struct Kink {
    step: f64,
    weight: f64,
    row: usize,
}

impl PartialEq for Kink {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Kink {}

impl PartialOrd for Kink {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Kink {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .step
            .total_cmp(&self.step)
            .then(other.row.cmp(&self.row))
    }
}

fn descend(
    x: &[f64],
    y: &[f64],
    k: usize,
    tau: f64,
    mut basis: Vec<usize>,
) -> Result<(Vec<f64>, Vec<f64>, usize)> {
    let n = y.len();
    let row = |i: usize| &x[i * k..(i + 1) * k];
    let yscale = 1.0 + y.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let ztol = ZERO_RESIDUAL_TOL * yscale;
    let max_iter = 1000 + 50 * n;

    let mut in_basis = vec![false; n];
    for &i in &basis {
        in_basis[i] = true;
    }
    let mut resid = vec![0.0; n];
    let mut zero_set: Vec<usize> = Vec::new();
    let mut kinks: Vec<Kink> = Vec::with_capacity(n);
    let mut prev_obj = f64::INFINITY;

    for iter in 0..max_iter {
        let mut xh = Vec::with_capacity(k * k);
        for &i in &basis {
            xh.extend_from_slice(row(i));
        }
        let lu = Lu::factor(xh, k).ok_or(Error::Singular)?;
        let mut beta: Vec<f64> = basis.iter().map(|&i| y[i]).collect();
        lu.solve(&mut beta);

        // residuals, sign-weighted gradient sum, zero set
        let mut w = vec![0.0; k];
        zero_set.clear();
        let mut obj = 0.0;
        for i in 0..n {
            if in_basis[i] {
                resid[i] = 0.0;
                continue;
            }
            let xi = row(i);
            let fit: f64 = xi.iter().zip(&beta).map(|(a, b)| a * b).sum();
            let r = y[i] - fit;
            resid[i] = r;
            obj += rho(r, tau);
            if r.abs() <= ztol {
                zero_set.push(i);
            } else {
                let psi = if r > 0.0 { tau } else { tau - 1.0 };
                for (wj, xj) in w.iter_mut().zip(xi) {
                    *wj += psi * xj;
                }
            }
        }

        if prev_obj.is_finite() {
            let gain = prev_obj - obj;
            if gain < ABS_IMPROVEMENT_TOL || gain < REL_IMPROVEMENT_TOL * prev_obj.abs() {
                return Ok((beta, resid, iter));
            }
        }
        prev_obj = obj;

        // c_j = w' X_h^{-1} e_j
        let mut c = w;
        lu.solve_transpose(&mut c);
        let mut g_plus: Vec<f64> = c.iter().map(|cj| (1.0 - tau) - cj).collect();
        let mut g_minus: Vec<f64> = c.iter().map(|cj| tau + cj).collect();
        let mut scale: Vec<f64> = c.iter().map(|cj| 1.0 + cj.abs()).collect();
        for &i in &zero_set {
            let mut z = row(i).to_vec();
            lu.solve_transpose(&mut z);
            for j in 0..k {
                g_plus[j] += rho(-z[j], tau);
                g_minus[j] += rho(z[j], tau);
                scale[j] += z[j].abs();
            }
        }

        let mut best: Option<(usize, f64, f64)> = None;
        for j in 0..k {
            for (sign, g) in [(1.0, g_plus[j]), (-1.0, g_minus[j])] {
                if g < -DERIVATIVE_TOL * scale[j] && best.is_none_or(|b| g < b.2) {
                    best = Some((j, sign, g));
                }
            }
        }
        let Some((leave, sign, slope0)) = best else {
            return Ok((beta, resid, iter));
        };

        // edge direction d = sign * X_h^{-1} e_leave
        let mut d = vec![0.0; k];
        d[leave] = sign;
        lu.solve(&mut d);
        let dnorm = libm::sqrt(d.iter().map(|v| v * v).sum::<f64>());

        kinks.clear();
        for i in 0..n {
            if in_basis[i] {
                continue;
            }
            let r = resid[i];
            if r.abs() <= ztol {
                continue;
            }
            let xi = row(i);
            let z: f64 = xi.iter().zip(&d).map(|(a, b)| a * b).sum();
            let xnorm = libm::sqrt(xi.iter().map(|v| v * v).sum::<f64>());
            if z.abs() <= 1e-14 * xnorm * dnorm {
                continue;
            }
            let s = r / z;
            if s > 0.0 {
                kinks.push(Kink {
                    step: s,
                    weight: z.abs(),
                    row: i,
                });
            }
        }
        // walk the kinks in order of step length; a heap avoids sorting the
        // tail that is never reached
        let mut heap = BinaryHeap::from(core::mem::take(&mut kinks));
        let mut slope = slope0;
        let mut entering = None;
        while let Some(Kink { weight, row, .. }) = heap.pop() {
            slope += weight;
            if slope >= 0.0 {
                entering = Some(row);
                break;
            }
        }
        kinks = heap.into_vec();
        let Some(enter) = entering else {
            return Err(Error::NoConvergence(iter));
        };
        in_basis[basis[leave]] = false;
        in_basis[enter] = true;
        basis[leave] = enter;
    }
    Err(Error::NoConvergence(max_iter))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn check_loss_examples() {
        assert_eq!(check_loss(2.0, 0.5).unwrap(), 1.0);
        assert_eq!(check_loss(-1.0, 0.25).unwrap(), 0.75);
        assert_eq!(check_loss(0.0, 0.9).unwrap(), 0.0);
        assert!(check_loss(1.0, 0.0).is_err());
        assert!(check_loss(1.0, 1.0).is_err());
        assert!(check_loss(1.0, f64::NAN).is_err());
    }

    #[test]
    fn median_of_five() {
        let s = TimeSeries::new(vec![1.0, 2.0, 3.0, 4.0, 5.0]).unwrap();
        let fit = fit_qar(&s, 0..5, 0, 0.5).unwrap();
        assert!((fit.theta[0] - 3.0).abs() < 1e-12);
        assert!((fit.loss - 3.0).abs() < 1e-12);
        assert_eq!(fit.window, 0..5);
    }

    #[test]
    fn exact_recursion_interpolates() {
        let mut y = vec![0.3];
        for _ in 0..30 {
            let prev = *y.last().unwrap();
            y.push(0.5 * prev + 1.0);
        }
        let s = TimeSeries::new(y).unwrap();
        for tau in [0.1, 0.5, 0.9] {
            let fit = fit_qar(&s, 0..31, 1, tau).unwrap();
            assert!(fit.loss < 1e-9, "loss {}", fit.loss);
            assert!((fit.theta[0] - 1.0).abs() < 1e-8);
            assert!((fit.theta[1] - 0.5).abs() < 1e-8);
        }
    }

    #[test]
    fn constant_series_is_degenerate_with_min_norm() {
        let s = TimeSeries::new(vec![2.0; 40]).unwrap();
        let fit = fit_qar(&s, 0..40, 1, 0.5).unwrap();
        assert!(fit.degenerate);
        assert!(fit.loss.abs() < 1e-12);
        // min-norm (a, b) with a + 2b = 2 is (0.4, 0.8)
        assert!((fit.theta[0] - 0.4).abs() < 1e-10, "{:?}", fit.theta);
        assert!((fit.theta[1] - 0.8).abs() < 1e-10, "{:?}", fit.theta);
    }

    #[test]
    fn short_window_rejected() {
        let s = TimeSeries::new(vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        assert!(matches!(
            fit_qar(&s, 0..4, 3, 0.5),
            Err(Error::WindowTooShort { .. })
        ));
        assert!(fit_qar(&s, 0..5, 0, 0.5).is_err());
        assert!(fit_qar(&s, 0..4, 0, 1.5).is_err());
    }

    #[test]
    fn window_uses_earlier_lags() {
        let s = TimeSeries::new((0..30).map(|v| v as f64).collect()).unwrap();
        let fit = fit_qar(&s, 10..30, 2, 0.5).unwrap();
        assert_eq!(fit.window, 10..30);
        assert_eq!(fit.residuals.len(), 20);
        let fit = fit_qar(&s, 0..30, 2, 0.5).unwrap();
        assert_eq!(fit.window, 2..30);
    }

    #[test]
    fn design_row_layout() {
        let s = TimeSeries::new(vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        let r = DesignRow::at(&s, 3, 2).unwrap();
        assert_eq!(r.regressors, vec![1.0, 3.0, 2.0]);
        assert_eq!(r.response, 4.0);
        assert!(DesignRow::at(&s, 1, 2).is_err());
    }
}

// SPDX-License-Identifier: MIT OR Apache-2.0

//! Dense kernels sized for regression designs with at most a few dozen
//! columns. Row-major unless stated otherwise.

use alloc::vec;
use alloc::vec::Vec;

/// LU factorization with partial pivoting of a square matrix, `PA = LU`.
#[derive(Debug, Clone)]
pub(crate) struct Lu {
    k: usize,
    lu: Vec<f64>,
    piv: Vec<usize>,
}

impl Lu {
    /// Returns `None` when a pivot falls below `1e-13` times the largest
    /// entry of `a`.
    pub(crate) fn factor(mut a: Vec<f64>, k: usize) -> Option<Self> {
        debug_assert_eq!(a.len(), k * k);
        let amax = a.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if amax == 0.0 {
            return None;
        }
        let tol = 1e-13 * amax;
        let mut piv: Vec<usize> = (0..k).collect();
        for col in 0..k {
            let (prow, pval) = (col..k)
                .map(|r| (r, a[r * k + col].abs()))
                .fold((col, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
            if pval <= tol {
                return None;
            }
            if prow != col {
                for j in 0..k {
                    a.swap(prow * k + j, col * k + j);
                }
                piv.swap(prow, col);
            }
            let d = a[col * k + col];
            for r in col + 1..k {
                let f = a[r * k + col] / d;
                a[r * k + col] = f;
                if f != 0.0 {
                    for j in col + 1..k {
                        a[r * k + j] -= f * a[col * k + j];
                    }
                }
            }
        }
        Some(Self { k, lu: a, piv })
    }

    /// Solves `A x = b` in place.
    pub(crate) fn solve(&self, b: &mut [f64]) {
        let k = self.k;
        let mut x: Vec<f64> = self.piv.iter().map(|&p| b[p]).collect();
        for i in 0..k {
            let mut s = x[i];
            for j in 0..i {
                s -= self.lu[i * k + j] * x[j];
            }
            x[i] = s;
        }
        for i in (0..k).rev() {
            let mut s = x[i];
            for j in i + 1..k {
                s -= self.lu[i * k + j] * x[j];
            }
            x[i] = s / self.lu[i * k + i];
        }
        b.copy_from_slice(&x);
    }

    /// Solves `A' x = b` in place.
    pub(crate) fn solve_transpose(&self, b: &mut [f64]) {
        let k = self.k;
        // U' w = b
        let mut w = b.to_vec();
        for i in 0..k {
            let mut s = w[i];
            for j in 0..i {
                s -= self.lu[j * k + i] * w[j];
            }
            w[i] = s / self.lu[i * k + i];
        }
        // L' v = w
        for i in (0..k).rev() {
            let mut s = w[i];
            for j in i + 1..k {
                s -= self.lu[j * k + i] * w[j];
            }
            w[i] = s;
        }
        for (i, &p) in self.piv.iter().enumerate() {
            b[p] = w[i];
        }
    }
}

/// Householder QR with column pivoting of an `n x k` matrix, used to detect
/// rank deficiency and to produce a least-squares starting point.
#[derive(Debug, Clone)]
pub(crate) struct PivotedQr {
    n: usize,
    k: usize,
    /// Column-major working storage holding R in its upper triangle.
    a: Vec<f64>,
    reflectors: Vec<(Vec<f64>, f64)>,
    perm: Vec<usize>,
    rank: usize,
}

impl PivotedQr {
    /// `rows` is the row-major design. Columns whose remaining norm drops
    /// below `rel_tol` times the largest initial column norm are treated as
    /// dependent.
    pub(crate) fn factor(rows: &[f64], n: usize, k: usize, rel_tol: f64) -> Self {
        let mut a = vec![0.0; n * k];
        for i in 0..n {
            for j in 0..k {
                a[j * n + i] = rows[i * k + j];
            }
        }
        let mut perm: Vec<usize> = (0..k).collect();
        let mut reflectors = Vec::with_capacity(k.min(n));
        let col_norm = |a: &[f64], j: usize, from: usize| -> f64 {
            libm::sqrt(a[j * n + from..(j + 1) * n].iter().map(|v| v * v).sum())
        };
        let ref_norm = (0..k).map(|j| col_norm(&a, j, 0)).fold(0.0f64, f64::max);
        let mut rank = 0;
        for s in 0..k.min(n) {
            let (best, bnorm) = (s..k)
                .map(|j| (j, col_norm(&a, j, s)))
                .fold((s, -1.0), |b, c| if c.1 > b.1 { c } else { b });
            if bnorm <= rel_tol * ref_norm || bnorm == 0.0 {
                break;
            }
            if best != s {
                for i in 0..n {
                    a.swap(best * n + i, s * n + i);
                }
                perm.swap(best, s);
            }
            let x0 = a[s * n + s];
            let alpha = if x0 >= 0.0 { -bnorm } else { bnorm };
            let mut v: Vec<f64> = a[s * n + s..(s + 1) * n].to_vec();
            v[0] -= alpha;
            let vv: f64 = v.iter().map(|t| t * t).sum();
            let beta = if vv > 0.0 { 2.0 / vv } else { 0.0 };
            for j in s..k {
                let col = &mut a[j * n + s..(j + 1) * n];
                let dot: f64 = col.iter().zip(&v).map(|(c, vi)| c * vi).sum();
                let f = beta * dot;
                for (c, vi) in col.iter_mut().zip(&v) {
                    *c -= f * vi;
                }
            }
            reflectors.push((v, beta));
            rank = s + 1;
        }
        Self {
            n,
            k,
            a,
            reflectors,
            perm,
            rank,
        }
    }

    pub(crate) fn rank(&self) -> usize {
        self.rank
    }

    /// Column order chosen by pivoting; the first `rank` entries are the
    /// independent columns.
    pub(crate) fn perm(&self) -> &[usize] {
        &self.perm
    }

    fn r(&self, i: usize, j: usize) -> f64 {
        self.a[j * self.n + i]
    }

    /// Least-squares coefficients on the independent columns, in `perm`
    /// order.
    pub(crate) fn least_squares(&self, y: &[f64]) -> Vec<f64> {
        let mut qty = y.to_vec();
        for (s, (v, beta)) in self.reflectors.iter().enumerate() {
            let seg = &mut qty[s..];
            let dot: f64 = seg.iter().zip(v).map(|(a, b)| a * b).sum();
            let f = beta * dot;
            for (q, vi) in seg.iter_mut().zip(v) {
                *q -= f * vi;
            }
        }
        let r = self.rank;
        let mut b = vec![0.0; r];
        for i in (0..r).rev() {
            let mut s = qty[i];
            for j in i + 1..r {
                s -= self.r(i, j) * b[j];
            }
            b[i] = s / self.r(i, i);
        }
        b
    }

    /// Coefficients expressing each dependent column (perm order
    /// `rank..k`) in terms of the independent ones: `R11^{-1} R12`, stored
    /// row-major as `rank x (k - rank)`.
    pub(crate) fn dependency_matrix(&self) -> Vec<f64> {
        let r = self.rank;
        let d = self.k - r;
        let mut c = vec![0.0; r * d];
        for col in 0..d {
            for i in (0..r).rev() {
                let mut s = self.r(i, r + col);
                for j in i + 1..r {
                    s -= self.r(i, j) * c[j * d + col];
                }
                c[i * d + col] = s / self.r(i, i);
            }
        }
        c
    }
}

/// Solves a small symmetric positive-definite system by Gaussian
/// elimination; used for the minimum-norm correction.
pub(crate) fn solve_dense(a: Vec<f64>, k: usize, b: &mut [f64]) -> bool {
    match Lu::factor(a, k) {
        Some(lu) => {
            lu.solve(b);
            true
        }
        None => false,
    }
}

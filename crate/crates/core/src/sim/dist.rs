// SPDX-License-Identifier: MIT OR Apache-2.0

//! Inverse distribution functions used to drive QAR coefficient functions
//! from a single uniform variate.

use core::f64::consts::{PI, SQRT_2};

use rand::Rng;

use crate::error::Result;
use crate::qr::validate_tau;

// Acklam's rational approximation, refined below with one Halley step.
const A: [f64; 6] = [
    -3.969_683_028_665_376e1,
    2.209_460_984_245_205e2,
    -2.759_285_104_469_687e2,
    1.383_577_518_672_690e2,
    -3.066_479_806_614_716e1,
    2.506_628_277_459_239,
];
const B: [f64; 5] = [
    -5.447_609_879_822_406e1,
    1.615_858_368_580_409e2,
    -1.556_989_798_598_866e2,
    6.680_131_188_771_972e1,
    -1.328_068_155_288_572e1,
];
const C: [f64; 6] = [
    -7.784_894_002_430_293e-3,
    -3.223_964_580_411_365e-1,
    -2.400_758_277_161_838,
    -2.549_732_539_343_734,
    4.374_664_141_464_968,
    2.938_163_982_698_783,
];
const D: [f64; 4] = [
    7.784_695_709_041_462e-3,
    3.224_671_290_700_398e-1,
    2.445_134_137_142_996,
    3.754_408_661_907_416,
];
const P_LOW: f64 = 0.02425;

/// Standard normal quantile `Phi^{-1}(p)`. Returns `-inf`/`+inf` at 0 and 1.
pub fn normal_quantile(p: f64) -> f64 {
    if p <= 0.0 {
        return f64::NEG_INFINITY;
    }
    if p >= 1.0 {
        return f64::INFINITY;
    }
    let x = if p < P_LOW {
        let q = libm::sqrt(-2.0 * libm::log(p));
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else if p <= 1.0 - P_LOW {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        let q = libm::sqrt(-2.0 * libm::log1p(-p));
        -(((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    };
    // Halley refinement against the exact CDF; the upper tail is refined
    // through the complement to avoid cancellation.
    let (e, sign) = if p > 0.5 {
        (0.5 * libm::erfc(x / SQRT_2) - (1.0 - p), -1.0)
    } else {
        (0.5 * libm::erfc(-x / SQRT_2) - p, 1.0)
    };
    let u = sign * e * libm::sqrt(2.0 * PI) * libm::exp(x * x / 2.0);
    x - u / (1.0 + x * u / 2.0)
}

/// Standard normal CDF.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / SQRT_2)
}

/// Standard normal density.
pub fn normal_pdf(x: f64) -> f64 {
    libm::exp(-0.5 * x * x) / libm::sqrt(2.0 * PI)
}

/// Quantile function of the asymmetric Laplace law with density
/// `tau (1 - tau) exp(-rho_tau(x))`; its `tau`-quantile is 0.
pub fn asymmetric_laplace_quantile(p: f64, tau: f64) -> f64 {
    if p <= tau {
        libm::log(p / tau) / (1.0 - tau)
    } else {
        -libm::log((1.0 - p) / (1.0 - tau)) / tau
    }
}

pub fn asymmetric_laplace_cdf(x: f64, tau: f64) -> f64 {
    if x < 0.0 {
        tau * libm::exp((1.0 - tau) * x)
    } else {
        1.0 - (1.0 - tau) * libm::exp(-tau * x)
    }
}

/// `E[U] = (1 - 2 tau) / (tau (1 - tau))`.
pub fn asymmetric_laplace_mean(tau: f64) -> f64 {
    (1.0 - 2.0 * tau) / (tau * (1.0 - tau))
}

/// Quantile of the symmetric Laplace law with density `exp(-|x| / b) / 2b`.
pub fn laplace_quantile(p: f64, scale: f64) -> f64 {
    if p < 0.5 {
        scale * libm::log(2.0 * p)
    } else {
        -scale * libm::log(2.0 * (1.0 - p))
    }
}

/// Uniform variate in the open interval `(0, 1)`.
pub fn open_uniform<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    loop {
        let u: f64 = rng.gen();
        if u > 0.0 {
            return u;
        }
    }
}

/// One draw from the asymmetric Laplace law with parameter `tau`.
pub fn sample_asymmetric_laplace<R: Rng + ?Sized>(tau: f64, rng: &mut R) -> Result<f64> {
    validate_tau(tau)?;
    Ok(asymmetric_laplace_quantile(open_uniform(rng), tau))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normal_quantile_inverts_cdf() {
        for i in 1..2000 {
            let p = i as f64 / 2000.0;
            let x = normal_quantile(p);
            assert!((normal_cdf(x) - p).abs() < 1e-14, "p={p}");
        }
        assert_eq!(normal_quantile(0.5), 0.0);
        assert!((normal_quantile(0.975) - 1.959_963_984_540_054).abs() < 1e-12);
        assert!((normal_quantile(1e-10) + 6.361_340_902_404_056).abs() < 1e-9);
    }

    #[test]
    fn asymmetric_laplace_quantile_is_zero_at_tau() {
        for tau in [0.1, 0.25, 0.5, 0.9] {
            assert!(asymmetric_laplace_quantile(tau, tau).abs() < 1e-15);
            for p in [0.01, 0.3, 0.77, 0.999] {
                let x = asymmetric_laplace_quantile(p, tau);
                assert!((asymmetric_laplace_cdf(x, tau) - p).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn laplace_symmetry() {
        assert_eq!(laplace_quantile(0.5, 1.0), 0.0);
        assert!((laplace_quantile(0.25, 1.0) + laplace_quantile(0.75, 1.0)).abs() < 1e-15);
        // P(X <= -ln 2) = 1/4 for unit scale
        assert!((laplace_quantile(0.25, 1.0) + core::f64::consts::LN_2).abs() < 1e-15);
    }
}

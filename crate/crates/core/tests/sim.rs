// SPDX-License-Identifier: MIT OR Apache-2.0

use pqar_core::sim::{
    asymmetric_laplace_mean, sample_asymmetric_laplace, simulate_piecewise, simulate_preset,
    simulate_qar, CoefFn, Preset, QarSpec, Regime,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn asymmetric_laplace_mass_below_zero() {
    let draws = 100_000;
    for tau in [0.1, 0.4, 0.5, 0.6, 0.9] {
        let mut rng = ChaCha8Rng::seed_from_u64((tau * 1000.0) as u64);
        let below = (0..draws)
            .filter(|_| sample_asymmetric_laplace(tau, &mut rng).unwrap() <= 0.0)
            .count();
        let p = below as f64 / draws as f64;
        let se = (tau * (1.0 - tau) / draws as f64).sqrt();
        assert!((p - tau).abs() < 3.0 * se, "tau {tau}: {p}");
    }
}

#[test]
fn asymmetric_laplace_mean_and_quantile() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let tau = 0.25;
    let mut xs: Vec<f64> = (0..100_000)
        .map(|_| sample_asymmetric_laplace(tau, &mut rng).unwrap())
        .collect();
    let mean = xs.iter().sum::<f64>() / xs.len() as f64;
    let mu = asymmetric_laplace_mean(tau);
    // variance (1 - 2t + 2t^2) / (t^2 (1-t)^2)
    let var = (1.0 - 2.0 * tau + 2.0 * tau * tau) / (tau * tau * (1.0 - tau) * (1.0 - tau));
    assert!((mean - mu).abs() < 4.0 * (var / xs.len() as f64).sqrt());
    xs.sort_by(f64::total_cmp);
    let q = xs[(tau * xs.len() as f64) as usize];
    assert!(q.abs() < 0.02, "{q}");
    assert!(sample_asymmetric_laplace(1.0, &mut rng).is_err());
}

#[test]
fn ar1_moments() {
    // y = 0.5 y + N(0,1): mean 0, variance 4/3, lag-one correlation 0.5
    let spec = QarSpec::new(vec![
        CoefFn::Normal { mean: 0.0, sd: 1.0 },
        CoefFn::Constant(0.5),
    ]);
    let s = simulate_qar(&spec, 200_000, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
    let y = s.values();
    let n = y.len() as f64;
    let mean = y.iter().sum::<f64>() / n;
    let var = y.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    let cov = y.windows(2).map(|w| (w[0] - mean) * (w[1] - mean)).sum::<f64>() / n;
    assert!(mean.abs() < 0.02);
    assert!((var - 4.0 / 3.0).abs() < 0.03);
    assert!((cov / var - 0.5).abs() < 0.01);
}

#[test]
fn regimes_switch_at_the_stated_positions() {
    let a = QarSpec::new(vec![CoefFn::Constant(0.0)]).with_innovation(CoefFn::Constant(1.0));
    let b = QarSpec::new(vec![CoefFn::Constant(5.0)]).with_innovation(CoefFn::Constant(0.0));
    let s = simulate_piecewise(
        &[Regime { spec: a, len: 7 }, Regime { spec: b, len: 3 }],
        &mut ChaCha8Rng::seed_from_u64(0),
    )
    .unwrap();
    assert_eq!(s.values(), &[1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 5.0, 5.0, 5.0]);
}

#[test]
fn presets_are_reproducible() {
    for p in Preset::ALL {
        let a = simulate_preset(p, 600, &mut ChaCha8Rng::seed_from_u64(3)).unwrap();
        let b = simulate_preset(p, 600, &mut ChaCha8Rng::seed_from_u64(3)).unwrap();
        let c = simulate_preset(p, 600, &mut ChaCha8Rng::seed_from_u64(4)).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.series, c.series);
        assert!(a.series.values().iter().all(|v| v.is_finite()));
    }
}

#[test]
fn explosive_tail_without_overflow() {
    let s = simulate_preset(Preset::Sim2, 1024, &mut ChaCha8Rng::seed_from_u64(12))
        .unwrap()
        .series;
    let y = s.values();
    let max = |v: &[f64]| v.iter().copied().fold(f64::MIN, f64::max);
    assert!(max(y) >= max(&y[..512]));
    assert!(max(&y[..512]) >= max(&y[..128]));
}

#[test]
fn svm_scale_change() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let s = simulate_preset(Preset::SvmB, 20_000, &mut rng).unwrap().series;
    let y = s.values();
    let ms = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>() / v.len() as f64;
    // E y^2 = E exp(alpha) var(xi) with alpha ~ N(gamma, 0.5)
    let first = (-0.810_670_3f64 + 0.25).exp();
    let second = 4.0 * (-0.373_873_6f64 + 0.25).exp();
    assert!((ms(&y[..10_000]) / first - 1.0).abs() < 0.1);
    assert!((ms(&y[10_000..]) / second - 1.0).abs() < 0.1);
}

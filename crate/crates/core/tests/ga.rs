// SPDX-License-Identifier: MIT OR Apache-2.0

use pqar_core::ga::{
    crossover, decode, mutate, random_chromosome, run, validate, Chromosome, GaConfig, Rates,
    Sequential,
};
use pqar_core::mdl::{MdlObjective, NoCache};
use pqar_core::sim::{simulate_qar, CoefFn, QarSpec};
use pqar_core::{MinLengthTable, QuantileSpec, Segmentation, TimeSeries};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn rates(n: usize) -> Rates {
    GaConfig::default().rates(n)
}

/// Valid segmentation drawn independently of the GA operators.
fn random_valid_segmentation(n: usize, table: &MinLengthTable, rng: &mut impl Rng) -> Segmentation {
    loop {
        let m = rng.gen_range(0..=6);
        let mut breaks: Vec<usize> = (0..m).map(|_| rng.gen_range(1..n)).collect();
        breaks.sort_unstable();
        breaks.dedup();
        let orders: Vec<usize> = (0..=breaks.len()).map(|_| rng.gen_range(1..=20)).collect();
        if let Ok(seg) = Segmentation::new(n, breaks, orders, 20, table) {
            return seg;
        }
    }
}

#[test]
fn decode_examples() {
    let t = MinLengthTable::default();
    let mut g = vec![-1i8; 100];
    g[0] = 2;
    let seg = decode(&g, 20, &t).unwrap();
    assert_eq!(seg.num_breaks(), 0);
    assert_eq!(seg.orders(), &[2]);

    let mut g = vec![-1i8; 1000];
    g[0] = 1;
    g[500] = 3;
    let seg = decode(&g, 20, &t).unwrap();
    assert_eq!(seg.breaks(), &[500]);
    assert_eq!(seg.orders(), &[1, 3]);
    assert_eq!(seg.segment(1).start, 500);
}

#[test]
fn encode_decode_round_trip() {
    let t = MinLengthTable::default();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..1000 {
        let n = rng.gen_range(10..600);
        let seg = random_valid_segmentation(n, &t, &mut rng);
        let c = Chromosome::encode(&seg).unwrap();
        validate(c.genes(), 20, &t).unwrap();
        assert_eq!(c.decode(), seg);
        assert_eq!(decode(c.genes(), 20, &t).unwrap(), seg);
    }
}

#[test]
fn operator_products_are_valid() {
    let t = MinLengthTable::default();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for i in 0..10_000 {
        let n = [10, 11, 25, 60, 137, 512, 1024][i % 7];
        let r = rates(n);
        let a = random_chromosome(n, &r, &t, &mut rng).unwrap();
        let b = random_chromosome(n, &r, &t, &mut rng).unwrap();
        let c = crossover(&a, &b, &t, &mut rng);
        let m = mutate(&a, &r, &t, &mut rng);
        for x in [&a, &b, &c, &m] {
            validate(x.genes(), 20, &t).unwrap();
            assert_eq!(x.len(), n);
        }
    }
}

#[test]
fn mutation_extremes() {
    let t = MinLengthTable::default();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let base = rates(400);
    for _ in 0..200 {
        let p = random_chromosome(400, &base, &t, &mut rng).unwrap();
        let keep = Rates { keep_prob: 1.0, remove_prob: 0.0, ..base };
        assert_eq!(mutate(&p, &keep, &t, &mut rng), p);
        let clear = Rates { keep_prob: 0.0, remove_prob: 1.0, ..base };
        let c = mutate(&p, &clear, &t, &mut rng);
        assert_eq!(c.num_breaks(), 0);
        assert_eq!(c.genes()[0], p.genes()[0]);
    }
}

#[test]
fn initial_break_rate_matches_probability() {
    let t = MinLengthTable::default();
    let n = 1024;
    let r = rates(n);
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let (mut eligible, mut breaks) = (0u64, 0u64);
    for _ in 0..10_000 {
        let c = random_chromosome(n, &r, &t, &mut rng).unwrap();
        let g = c.genes();
        let mut next = t.min_length(g[0] as usize);
        for (pos, &gene) in g.iter().enumerate().skip(1) {
            if pos < next || n - pos < t.smallest() {
                assert_eq!(gene, -1);
                continue;
            }
            eligible += 1;
            if gene > 0 {
                breaks += 1;
                next = pos + t.min_length(gene as usize);
            }
        }
    }
    let rate = breaks as f64 / eligible as f64;
    let se = (r.break_prob * (1.0 - r.break_prob) / eligible as f64).sqrt();
    assert!((rate - r.break_prob).abs() < 3.0 * se, "rate {rate} vs {}", r.break_prob);
}

fn white_qar(n: usize, seed: u64) -> TimeSeries {
    let spec = QarSpec::new(vec![
        CoefFn::Normal { mean: 0.0, sd: 1.0 },
        CoefFn::Polynomial(vec![0.1, 0.2]),
    ]);
    simulate_qar(&spec, n, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap()
}

fn small_config(seed: u64) -> GaConfig {
    GaConfig {
        islands: 4,
        subpopulation: 12,
        max_generations: 30,
        seed,
        ..GaConfig::default()
    }
}

#[test]
fn elitism_and_determinism() {
    let s = white_qar(200, 5);
    let spec = QuantileSpec::single(0.5).unwrap();
    let a = run(&s, &spec, &small_config(9), &NoCache, &Sequential).unwrap();
    let b = run(&s, &spec, &small_config(9), &NoCache, &Sequential).unwrap();
    assert_eq!(a.log, b.log);
    assert_eq!(a.chromosome, b.chromosome);
    assert_eq!(a.score, b.score);

    assert_eq!(a.log.len(), a.generations + 1);
    for w in a.log.windows(2) {
        for (before, after) in w[0].island_best.iter().zip(&w[1].island_best) {
            // migration only brings in better members
            assert!(after <= before);
        }
        assert!(w[1].global_best <= w[0].global_best);
    }
    assert!(a.score.total <= a.log[0].global_best);
    assert_eq!(a.score.total, a.log.last().unwrap().global_best);
    let obj = MdlObjective::new(&s, &spec, &NoCache);
    assert_eq!(obj.evaluate(&a.segmentation), a.score.total);
}

#[test]
fn stall_limit_stops_early() {
    let s = white_qar(60, 6);
    let spec = QuantileSpec::single(0.5).unwrap();
    let cfg = GaConfig {
        stall_limit: 2,
        max_generations: 1000,
        ..small_config(1)
    };
    let out = run(&s, &spec, &cfg, &NoCache, &Sequential).unwrap();
    assert!(out.generations < 1000);
    assert_eq!(out.generations, out.migrations * cfg.migration_interval);
}

/// Every valid segmentation of a short series.
fn all_segmentations(n: usize, t: &MinLengthTable) -> Vec<Segmentation> {
    fn extend(
        n: usize,
        t: &MinLengthTable,
        start: usize,
        breaks: &mut Vec<usize>,
        orders: &mut Vec<usize>,
        out: &mut Vec<Segmentation>,
    ) {
        for p in 1..=20 {
            let m = t.min_length(p);
            if start + m > n {
                break;
            }
            orders.push(p);
            out.push(Segmentation::from_parts(n, breaks.clone(), orders.clone()).unwrap());
            for next in start + m..=n.saturating_sub(t.smallest()) {
                breaks.push(next);
                extend(n, t, next, breaks, orders, out);
                breaks.pop();
            }
            orders.pop();
        }
    }
    let mut out = Vec::new();
    extend(n, t, 0, &mut Vec::new(), &mut Vec::new(), &mut out);
    out.retain(|s| s.validate(20, t).is_ok());
    out
}

#[test]
fn finds_exhaustive_optimum_on_short_series() {
    let t = MinLengthTable::default();
    let n = 36;
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut y: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    for v in &mut y[18..] {
        *v += 6.0;
    }
    let s = TimeSeries::new(y).unwrap();
    let spec = QuantileSpec::single(0.5).unwrap();
    let obj = MdlObjective::new(&s, &spec, &NoCache);
    let candidates = all_segmentations(n, &t);
    assert!(candidates.len() > 100);
    let best = candidates
        .iter()
        .map(|c| obj.evaluate(c))
        .fold(f64::INFINITY, f64::min);
    let cfg = GaConfig {
        islands: 8,
        subpopulation: 20,
        ..GaConfig::default()
    };
    let out = run(&s, &spec, &cfg, &NoCache, &Sequential).unwrap();
    assert!((out.score.total - best).abs() < 1e-9, "{} vs {}", out.score.total, best);
}

// SPDX-License-Identifier: MIT OR Apache-2.0

//! Constructive variation operators. All three scan the genes left to
//! right and, once a segment of order `p` starts, force the next `m_p - 1`
//! genes to "no break"; a start is only placed where the rest of the series
//! can still host a segment of its order. Outputs are valid by construction.

use alloc::vec;
use rand::Rng;

use super::chromosome::{Chromosome, NO_BREAK};
use super::config::Rates;
use crate::error::{Error, Result};
use crate::segmentation::MinLengthTable;

/// Largest order whose minimum length fits in `room` observations.
fn max_order_for(room: usize, max_order: usize, table: &MinLengthTable) -> usize {
    (1..=max_order)
        .take_while(|&p| table.min_length(p) <= room)
        .last()
        .unwrap_or(0)
}

fn draw_order<R: Rng + ?Sized>(
    rng: &mut R,
    room: usize,
    max_order: usize,
    table: &MinLengthTable,
) -> Option<i8> {
    match max_order_for(room, max_order, table) {
        0 => None,
        top => Some(rng.gen_range(1..=top) as i8),
    }
}

/// Random valid chromosome: the first order is uniform over the admissible
/// orders, then every eligible position starts a new segment with
/// probability `rates.break_prob`.
pub fn random_chromosome<R: Rng + ?Sized>(
    n: usize,
    rates: &Rates,
    table: &MinLengthTable,
    rng: &mut R,
) -> Result<Chromosome> {
    let first = draw_order(rng, n, rates.max_order, table).ok_or_else(|| {
        Error::InvalidConfig(alloc::format!(
            "series of length {n} is shorter than the smallest segment"
        ))
    })?;
    let mut genes = vec![NO_BREAK; n];
    genes[0] = first;
    let smallest = table.smallest();
    let mut t = table.min_length(first as usize);
    while t < n {
        let room = n - t;
        if room < smallest {
            break;
        }
        if rng.gen::<f64>() < rates.break_prob {
            let p = draw_order(rng, room, rates.max_order, table)
                .expect("room admits the smallest order");
            genes[t] = p;
            t += table.min_length(p as usize);
        } else {
            t += 1;
        }
    }
    Ok(Chromosome::from_valid(genes))
}

/// Uniform crossover with constraint repair. Where both parents carry the
/// same gene no coin is tossed.
pub fn crossover<R: Rng + ?Sized>(
    a: &Chromosome,
    b: &Chromosome,
    table: &MinLengthTable,
    rng: &mut R,
) -> Chromosome {
    let (ga, gb) = (a.genes(), b.genes());
    let n = ga.len();
    debug_assert_eq!(n, gb.len());
    let mut genes = vec![NO_BREAK; n];
    let pick = |rng: &mut R, x: i8, y: i8| if x == y || rng.gen::<bool>() { x } else { y };
    genes[0] = pick(rng, ga[0], gb[0]);
    let mut t = table.min_length(genes[0] as usize);
    while t < n {
        let g = pick(rng, ga[t], gb[t]);
        if g > 0 && n - t >= table.min_length(g as usize) {
            genes[t] = g;
            t += table.min_length(g as usize);
        } else {
            t += 1;
        }
    }
    Chromosome::from_valid(genes)
}

/// Mutation: at each eligible position keep the parent's gene with
/// probability `keep_prob`, clear it with probability `remove_prob`, or
/// start a fresh segment of uniform order otherwise. The first gene can not
/// be cleared, so the "clear" branch keeps the parent's first order there.
pub fn mutate<R: Rng + ?Sized>(
    parent: &Chromosome,
    rates: &Rates,
    table: &MinLengthTable,
    rng: &mut R,
) -> Chromosome {
    let pg = parent.genes();
    let n = pg.len();
    let mut genes = vec![NO_BREAK; n];
    let u = rng.gen::<f64>();
    genes[0] = if u < rates.keep_prob + rates.remove_prob {
        pg[0]
    } else {
        draw_order(rng, n, rates.max_order, table).unwrap_or(pg[0])
    };
    let smallest = table.smallest();
    let mut t = table.min_length(genes[0] as usize);
    while t < n {
        let room = n - t;
        if room < smallest {
            break;
        }
        let u = rng.gen::<f64>();
        let g = if u < rates.keep_prob {
            pg[t]
        } else if u < rates.keep_prob + rates.remove_prob {
            NO_BREAK
        } else {
            draw_order(rng, room, rates.max_order, table).unwrap_or(NO_BREAK)
        };
        if g > 0 && room >= table.min_length(g as usize) {
            genes[t] = g;
            t += table.min_length(g as usize);
        } else {
            t += 1;
        }
    }
    Chromosome::from_valid(genes)
}

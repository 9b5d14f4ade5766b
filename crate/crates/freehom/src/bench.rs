//! Wall-clock timing of the permanent algorithms.
//!
//! Each `(algorithm, N)` pair is timed on the transfer matrix of a seeded
//! random phase configuration; the fastest of `reps` runs is reported.

use std::io::{self, Write};
use std::time::Instant;

use freehom_core::geometry::{build_transfer_matrix, NormConvention};
use freehom_core::permanent::{self, Algorithm, FAST_LIMIT, NAIVE_LIMIT};
use freehom_core::{Error, Result};
use serde::{Deserialize, Serialize};

use crate::format::fmt_f64;
use crate::parallel::par_permanent;
use crate::sampling;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BenchOptions {
    pub n_min: usize,
    pub n_max: usize,
    pub algorithms: Vec<Algorithm>,
    pub reps: usize,
    pub seed: u64,
    /// Spread Gray-code segments over the rayon pool.
    pub parallel: bool,
}

impl Default for BenchOptions {
    fn default() -> Self {
        BenchOptions {
            n_min: 6,
            n_max: 12,
            algorithms: Algorithm::ALL.to_vec(),
            reps: 3,
            seed: 0,
            parallel: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchRow {
    pub algorithm: Algorithm,
    pub n: usize,
    pub wall_time_ns: u128,
    pub abs_value: f64,
}

/// Time every requested algorithm at every `N` it supports in `n_min..=n_max`.
///
/// Naive runs stop at its own limit of 10 instead of failing the sweep.
pub fn run(opts: &BenchOptions) -> Result<Vec<BenchRow>> {
    if opts.n_min < 2 || opts.n_min > opts.n_max {
        return Err(Error::UnsupportedInput("bench needs 2 <= n-min <= n-max"));
    }
    if opts.n_max > FAST_LIMIT {
        return Err(Error::Limit {
            algorithm: Algorithm::Ryser,
            dim: opts.n_max,
            limit: FAST_LIMIT,
        });
    }
    let reps = opts.reps.max(1);
    let mut rows = Vec::new();
    for n in opts.n_min..=opts.n_max {
        let mut rng = sampling::rng(opts.seed ^ n as u64);
        let phases = sampling::random_phases(&mut rng, n);
        let m = build_transfer_matrix(&phases, NormConvention::Unit)?.into_matrix();
        for &alg in &opts.algorithms {
            if alg == Algorithm::Naive && n > NAIVE_LIMIT {
                continue;
            }
            let mut best = u128::MAX;
            let mut value = 0.0;
            for _ in 0..reps {
                let start = Instant::now();
                let r = if opts.parallel {
                    par_permanent(&m, alg)?
                } else {
                    permanent::permanent(&m, alg)?
                };
                best = best.min(start.elapsed().as_nanos());
                value = r.value.norm();
            }
            rows.push(BenchRow {
                algorithm: alg,
                n,
                wall_time_ns: best,
                abs_value: value,
            });
        }
    }
    Ok(rows)
}

pub fn write_csv<W: Write + ?Sized>(out: &mut W, rows: &[BenchRow]) -> io::Result<()> {
    writeln!(out, "algorithm,N,wall_time_ns,abs_value")?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{}",
            r.algorithm,
            r.n,
            r.wall_time_ns,
            fmt_f64(r.abs_value)
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_sweep() {
        let rows = run(&BenchOptions {
            n_min: 2,
            n_max: 11,
            reps: 1,
            ..Default::default()
        })
        .unwrap();
        // Naive stops at 10.
        assert_eq!(rows.len(), 9 * 3 + 2);
        for n in 2..=10 {
            let vals: Vec<f64> = rows
                .iter()
                .filter(|r| r.n == n)
                .map(|r| r.abs_value)
                .collect();
            assert!((vals[0] - vals[1]).abs() <= 1e-10 * vals[0].max(1.0));
            assert!((vals[0] - vals[2]).abs() <= 1e-10 * vals[0].max(1.0));
        }
        let mut buf = Vec::new();
        write_csv(&mut buf, &rows).unwrap();
        assert!(String::from_utf8(buf)
            .unwrap()
            .starts_with("algorithm,N,wall_time_ns,abs_value\nnaive,2,"));
    }

    #[test]
    fn rejects_bad_ranges() {
        let bad = |n_min, n_max| {
            run(&BenchOptions {
                n_min,
                n_max,
                ..Default::default()
            })
        };
        assert!(bad(5, 4).is_err());
        assert!(bad(1, 4).is_err());
        assert!(matches!(bad(2, 31), Err(Error::Limit { .. })));
    }
}

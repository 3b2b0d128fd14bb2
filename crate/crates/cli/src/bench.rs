//! Desk-scale benchmark sweeps: optimized vs unoptimized variants at a
//! grid of input sizes, reporting wall-clock, interactive ops, rounds
//! and the structural reduction the optimization buys.

use std::time::Instant;

use anyhow::{bail, Context};
use shardstat::engine::{EngineConfig, GateKind};
use shardstat::stats::{self, ChiSqInput, ChiSqVariant, ProgramRun, Schedule, StdDevInput};

use crate::inputs::{gen_chisq_row, gen_stddev_values};
use crate::report::{BenchRow, BenchVariant};

/// Default stddev sweep: 2^4 .. 2^12.
pub const STDDEV_SIZES: [usize; 5] = [16, 64, 256, 1024, 4096];

/// Default chi-squared sweep: the 4x4 .. 8x64 dimension grid.
pub const CHISQ_DIMS: [(usize, usize); 10] = [
    (4, 4),
    (4, 8),
    (4, 16),
    (4, 32),
    (4, 64),
    (4, 128),
    (8, 8),
    (8, 16),
    (8, 32),
    (8, 64),
];

pub fn parse_stddev_sweep(spec: &str) -> anyhow::Result<Vec<usize>> {
    spec.split(',')
        .map(|tok| {
            tok.trim()
                .parse::<usize>()
                .with_context(|| format!("invalid sweep size `{tok}`"))
        })
        .collect()
}

pub fn parse_chisq_sweep(spec: &str) -> anyhow::Result<Vec<(usize, usize)>> {
    spec.split(',')
        .map(|tok| {
            let tok = tok.trim();
            let (n, m) = tok
                .split_once(['x', 'X'])
                .with_context(|| format!("invalid dimensions `{tok}` (expected NxM)"))?;
            Ok((
                n.parse().with_context(|| format!("invalid rows in `{tok}`"))?,
                m.parse().with_context(|| format!("invalid cols in `{tok}`"))?,
            ))
        })
        .collect()
}

/// Number of input parties benchmark data is split over.
const BENCH_INPUT_PARTIES: usize = 3;

fn variant_stats(run: &ProgramRun, wall_ms: f64, phase: &str) -> BenchVariant {
    BenchVariant {
        wall_ms,
        interactive_ops: run.ledger.interactive_ops,
        rounds: run.ledger.rounds,
        fixed_divs: run.ledger.gate_ops(GateKind::FixedDiv),
        phase_rounds: run.phase_delta(phase).map_or(0, |d| d.rounds),
    }
}

/// Rejects sizes whose intermediates cannot fit the field before any
/// work is done.
fn check_stddev_capacity(cfg: &EngineConfig, size: usize, max_value: i64, prec: u32) -> anyhow::Result<()> {
    let value_bits = 64 - (max_value.max(1) as u64).leading_zeros();
    let sum_bits = value_bits + usize::BITS - size.leading_zeros();
    // squared differences, their sum, the 100^prec scaling, then k·k
    let needed = 2 * (2 * (sum_bits + 1) + 7 * prec + 2);
    if needed > cfg.field.capacity_bits() {
        bail!(
            "overflow: stddev at size {size} needs ~{needed} bits, field capacity is {}",
            cfg.field.capacity_bits()
        );
    }
    Ok(())
}

pub fn bench_stddev(
    base: &EngineConfig,
    sizes: &[usize],
    prec: u32,
    seed: u64,
) -> anyhow::Result<Vec<BenchRow>> {
    sizes
        .iter()
        .map(|&size| {
            check_stddev_capacity(base, size, 1000, prec)?;
            let per_party = split_evenly(size, BENCH_INPUT_PARTIES);
            let parties: Vec<Vec<i64>> = per_party
                .iter()
                .enumerate()
                .map(|(p, &len)| gen_stddev_values(seed, p + 1, len, 0, 1000))
                .collect();
            let input = StdDevInput::new(parties)?;

            let cfg = EngineConfig {
                seed: Some(seed),
                ..base.clone()
            };
            let t0 = Instant::now();
            let optimized = stats::run_stddev(cfg.clone(), &input, prec, Schedule::Batched, None)?;
            let opt_ms = t0.elapsed().as_secs_f64() * 1e3;
            let t0 = Instant::now();
            let unoptimized = stats::run_stddev(cfg, &input, prec, Schedule::Sequential, None)?;
            let unopt_ms = t0.elapsed().as_secs_f64() * 1e3;

            let opt = variant_stats(&optimized, opt_ms, "squared_differences");
            let unopt = variant_stats(&unoptimized, unopt_ms, "squared_differences");
            let reduction_pct = if unopt.phase_rounds > 0 {
                100.0 * (unopt.phase_rounds - opt.phase_rounds) as f64 / unopt.phase_rounds as f64
            } else {
                0.0
            };
            Ok(BenchRow {
                size: size.to_string(),
                optimized: opt,
                unoptimized: unopt,
                reduction_metric: "squared-difference phase rounds (batched vs sequential)".into(),
                reduction_pct,
            })
        })
        .collect()
}

pub fn bench_chisq(
    base: &EngineConfig,
    dims: &[(usize, usize)],
    seed: u64,
) -> anyhow::Result<Vec<BenchRow>> {
    dims.iter()
        .map(|&(n, m)| {
            if n < 2 || m < 2 {
                bail!("chi-squared needs at least a 2x2 matrix, got {n}x{m}");
            }
            let counts: Vec<Vec<u64>> = (0..n)
                .map(|p| gen_chisq_row(seed, p + 1, m, 1, 100))
                .collect();
            let input = ChiSqInput::new(counts)?;

            let cfg = EngineConfig {
                seed: Some(seed),
                ..base.clone()
            };
            let t0 = Instant::now();
            let optimized = stats::run_chisq(cfg.clone(), &input, ChiSqVariant::Optimized)?;
            let opt_ms = t0.elapsed().as_secs_f64() * 1e3;
            let t0 = Instant::now();
            let unoptimized = stats::run_chisq(cfg, &input, ChiSqVariant::Unoptimized)?;
            let unopt_ms = t0.elapsed().as_secs_f64() * 1e3;

            let opt = variant_stats(&optimized, opt_ms, "summation");
            let unopt = variant_stats(&unoptimized, unopt_ms, "summation");
            let reduction_pct = if unopt.fixed_divs > 0 {
                100.0 * (unopt.fixed_divs - opt.fixed_divs) as f64 / unopt.fixed_divs as f64
            } else {
                0.0
            };
            Ok(BenchRow {
                size: format!("{n}x{m}"),
                optimized: opt,
                unoptimized: unopt,
                reduction_metric: "fixed-point division gates (nm vs 2nm)".into(),
                reduction_pct,
            })
        })
        .collect()
}

fn split_evenly(total: usize, parts: usize) -> Vec<usize> {
    let parts = parts.min(total).max(1);
    let base = total / parts;
    let extra = total % parts;
    (0..parts)
        .map(|i| base + usize::from(i < extra))
        .collect()
}

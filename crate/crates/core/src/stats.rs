//! The two secure statistical programs, built exclusively on the
//! protocols layer: standard deviation with an integer Newton-Raphson
//! square root, and the chi-squared statistic in an optimized
//! (one-division-per-cell) and an unoptimized (textbook-formula)
//! variant.
//!
//! Each program also exists in a schedule variant that differs only in
//! batching, so the ledger can demonstrate the round-count effect of
//! parallelizing independent gates.

use num_bigint::BigInt;
use num_traits::One;

use crate::engine::{Engine, EngineConfig, LedgerReport};
use crate::error::{Error, Result};
use crate::protocols::{FixedValue, SecretFixed, SecretInt};

/// Per-input-party value lists for the standard-deviation program.
/// The list sizes are public; the values are private.
#[derive(Clone, Debug)]
pub struct StdDevInput {
    parties: Vec<Vec<i64>>,
}

impl StdDevInput {
    pub fn new(parties: Vec<Vec<i64>>) -> Result<Self> {
        let total: usize = parties.iter().map(Vec::len).sum();
        if total == 0 {
            return Err(Error::Config(
                "standard deviation needs at least one value".into(),
            ));
        }
        Ok(StdDevInput { parties })
    }

    pub fn party_values(&self) -> &[Vec<i64>] {
        &self.parties
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.parties.iter().map(Vec::len).collect()
    }

    pub fn total_len(&self) -> usize {
        self.parties.iter().map(Vec::len).sum()
    }

    pub fn flattened(&self) -> Vec<i64> {
        self.parties.iter().flatten().copied().collect()
    }
}

/// A private n×m contingency table, one row per input party.
#[derive(Clone, Debug)]
pub struct ChiSqInput {
    counts: Vec<Vec<u64>>,
}

impl ChiSqInput {
    /// Validates shape (n ≥ 2, m ≥ 2, rectangular) and that every row
    /// and column marginal is positive, naming the offending marginal.
    pub fn new(counts: Vec<Vec<u64>>) -> Result<Self> {
        if counts.len() < 2 {
            return Err(Error::Domain(format!(
                "need at least 2 rows, got {}",
                counts.len()
            )));
        }
        let m = counts[0].len();
        if m < 2 {
            return Err(Error::Domain(format!("need at least 2 columns, got {m}")));
        }
        if counts.iter().any(|row| row.len() != m) {
            return Err(Error::Domain("rows have unequal lengths".into()));
        }
        for (i, row) in counts.iter().enumerate() {
            if row.iter().all(|&c| c == 0) {
                return Err(Error::Domain(format!("row {} sum is zero", i + 1)));
            }
        }
        for j in 0..m {
            if counts.iter().all(|row| row[j] == 0) {
                return Err(Error::Domain(format!("column {} sum is zero", j + 1)));
            }
        }
        Ok(ChiSqInput { counts })
    }

    /// Skips the marginal validation; the denominator gate then surfaces
    /// the division by zero at run time.
    #[doc(hidden)]
    pub fn new_unchecked(counts: Vec<Vec<u64>>) -> Self {
        ChiSqInput { counts }
    }

    pub fn rows(&self) -> usize {
        self.counts.len()
    }

    pub fn cols(&self) -> usize {
        self.counts[0].len()
    }

    pub fn counts(&self) -> &[Vec<u64>] {
        &self.counts
    }

    pub fn degrees_of_freedom(&self) -> u64 {
        (self.rows() as u64 - 1) * (self.cols() as u64 - 1)
    }
}

/// Opened chi-squared outcome.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChiSqResult {
    pub statistic: FixedValue,
    pub degrees_of_freedom: u64,
}

/// Whether independent gates are scheduled together (one round) or one
/// by one (one round each). Only the squared-difference stage of the
/// standard-deviation program is affected.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Schedule {
    Batched,
    Sequential,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ChiSqVariant {
    /// (x·s_o − s_c·s_r)² / (s_c·s_r·s_o): all-integer cell arithmetic,
    /// exactly one fixed-point division per cell.
    Optimized,
    /// E = s_c·s_r / s_o in fixed point, then (O − E)² / E: two
    /// fixed-point divisions, one fixed multiplication, one fixed
    /// subtraction per cell.
    Unoptimized,
}

/// Integer Newton-Raphson square root of a secret non-negative integer,
/// returning a fixed-point value with prec decimal digits.
///
/// The radicand is scaled by 100^prec (free public multiplication), the
/// iteration k ← (k² + num) / (2k) runs a fixed, data-independent number
/// of times (default prec+10; a data-dependent stopping rule would leak
/// the magnitude of the result through the schedule), and the integer
/// result is converted to fixed point and divided once by 10^prec.
///
/// `iterations` overrides the default budget: the default is marginal
/// for radicands above ~10^7 because the iteration starts from k = 1
/// and only halves per step until it reaches √num.
pub fn sqrt_newton(
    engine: &mut Engine,
    a: &SecretInt,
    prec: u32,
    iterations: Option<u32>,
) -> Result<SecretFixed> {
    let scale = BigInt::from(100u32).pow(prec);
    let num = engine.mul_public(a, &scale)?;
    // The iterates satisfy 1 <= k <= num for num >= 1 (k = 0 only for
    // num = 0, which stops with a zero divisor below), so every
    // assignment fits the declared width of num plus a sign of slack.
    let k_bits = num.bits() + 1;
    if 2 * (k_bits + 1) > engine.field().capacity_bits() {
        return Err(Error::Overflow(format!(
            "100^{prec}-scaled radicand needs {k_bits} bits; its square exceeds field capacity"
        )));
    }
    let iters = iterations.unwrap_or(prec + 10);

    let one = engine.constant_int(&BigInt::one())?;
    let mut k = engine.with_bitlength(&one, k_bits)?;
    for _ in 0..iters {
        let kk = engine.mul_secret(&k, &k)?;
        let sum = engine.add_secret(&kk, &num)?;
        let two_k = engine.mul_public(&k, &BigInt::from(2))?;
        let q = engine.div_secret_int(&sum, &two_k)?;
        k = engine.with_bitlength(&q, k_bits)?;
    }

    let ten_pow = engine.constant_int(&BigInt::from(10u32).pow(prec))?;
    let mut batch = engine.batch();
    let k_fixed = batch.int_to_fixed(&k)?;
    let ten_fixed = batch.int_to_fixed(&ten_pow)?;
    batch.run()?;
    engine.div_fixed(&k_fixed, &ten_fixed)
}

fn distribute_parties(engine: &mut Engine, input: &StdDevInput) -> Result<Vec<SecretInt>> {
    let mut all = Vec::with_capacity(input.total_len());
    for (party, values) in input.party_values().iter().enumerate() {
        let as_bigint: Vec<BigInt> = values.iter().map(|&v| BigInt::from(v)).collect();
        all.extend(engine.distribute_input(party + 1, &as_bigint)?);
    }
    Ok(all)
}

/// The secure standard-deviation program over an already-running engine.
/// Returns the unopened result.
pub fn stddev_program(
    engine: &mut Engine,
    input: &StdDevInput,
    prec: u32,
    schedule: Schedule,
    iterations: Option<u32>,
) -> Result<SecretFixed> {
    let all = distribute_parties(engine, input)?;
    let variance = variance_stage(engine, &all, schedule)?;
    sqrt_newton(engine, &variance, prec, iterations)
}

fn variance_stage(
    engine: &mut Engine,
    all: &[SecretInt],
    schedule: Schedule,
) -> Result<SecretInt> {
    let total = engine.sum_secret(all)?;
    // the public total enters the division as a private copy, exactly as
    // the source program assigns it into a private variable
    let n_const = engine.constant_int(&BigInt::from(all.len()))?;
    let mean = engine.div_secret_int(&total, &n_const)?;

    let diffs: Vec<SecretInt> = all
        .iter()
        .map(|x| engine.sub_secret(x, &mean))
        .collect::<Result<_>>()?;
    let squares = match schedule {
        Schedule::Batched => {
            let pairs: Vec<(SecretInt, SecretInt)> = diffs.iter().map(|d| (*d, *d)).collect();
            engine.mul_secret_batch(&pairs)?
        }
        Schedule::Sequential => diffs
            .iter()
            .map(|d| engine.mul_secret(d, d))
            .collect::<Result<_>>()?,
    };
    let sum_squares = engine.sum_secret(&squares)?;
    engine.div_secret_int(&sum_squares, &n_const)
}

/// The secure chi-squared program over an already-running engine.
/// Returns the unopened statistic and the public degrees of freedom.
pub fn chisq_program(
    engine: &mut Engine,
    input: &ChiSqInput,
    variant: ChiSqVariant,
) -> Result<(SecretFixed, u64)> {
    let rows = distribute_matrix(engine, input)?;
    let cells = chisq_cells(engine, input, &rows, variant)?;
    let statistic = engine.tree_sum_fixed(&cells)?;
    Ok((statistic, input.degrees_of_freedom()))
}

fn distribute_matrix(engine: &mut Engine, input: &ChiSqInput) -> Result<Vec<Vec<SecretInt>>> {
    input
        .counts()
        .iter()
        .enumerate()
        .map(|(party, row)| {
            let as_bigint: Vec<BigInt> = row.iter().map(|&c| BigInt::from(c)).collect();
            engine.distribute_input(party + 1, &as_bigint)
        })
        .collect()
}

struct Marginals {
    row_sums: Vec<SecretInt>,
    col_sums: Vec<SecretInt>,
    overall: SecretInt,
}

fn chisq_marginals(engine: &mut Engine, rows: &[Vec<SecretInt>]) -> Result<Marginals> {
    let m = rows[0].len();
    let row_sums: Vec<SecretInt> = rows
        .iter()
        .map(|row| engine.sum_secret(row))
        .collect::<Result<_>>()?;
    let col_sums: Vec<SecretInt> = (0..m)
        .map(|j| {
            let column: Vec<SecretInt> = rows.iter().map(|row| row[j]).collect();
            engine.sum_secret(&column)
        })
        .collect::<Result<_>>()?;
    let overall = engine.sum_secret(&row_sums)?;
    Ok(Marginals {
        row_sums,
        col_sums,
        overall,
    })
}

fn chisq_cells(
    engine: &mut Engine,
    input: &ChiSqInput,
    rows: &[Vec<SecretInt>],
    variant: ChiSqVariant,
) -> Result<Vec<SecretFixed>> {
    let margins = chisq_marginals(engine, rows)?;
    let (n, m) = (input.rows(), input.cols());

    match variant {
        ChiSqVariant::Optimized => {
            // stage 1: t1 = s_c·s_r and t2 = x·s_o for every cell, one round
            let mut pairs = Vec::with_capacity(2 * n * m);
            for (i, row) in rows.iter().enumerate() {
                for (j, x) in row.iter().enumerate() {
                    pairs.push((margins.col_sums[j], margins.row_sums[i]));
                    pairs.push((*x, margins.overall));
                }
            }
            let stage1 = engine.mul_secret_batch(&pairs)?;

            // free subtractions: diff = x·s_o − s_c·s_r
            let mut diffs = Vec::with_capacity(n * m);
            for cell in 0..n * m {
                let t1 = stage1[2 * cell];
                let t2 = stage1[2 * cell + 1];
                diffs.push(engine.sub_secret(&t2, &t1)?);
            }

            // stage 2: diff² and denominator s_c·s_r·s_o, one round
            let mut pairs = Vec::with_capacity(2 * n * m);
            for (cell, diff) in diffs.iter().enumerate() {
                pairs.push((*diff, *diff));
                pairs.push((stage1[2 * cell], margins.overall));
            }
            let stage2 = engine.mul_secret_batch(&pairs)?;

            // conversions, then exactly one fixed division per cell
            let raws: Vec<SecretInt> = stage2.clone();
            let fixed = engine.int_to_fixed_batch(&raws)?;
            let div_pairs: Vec<(SecretFixed, SecretFixed)> = (0..n * m)
                .map(|cell| (fixed[2 * cell], fixed[2 * cell + 1]))
                .collect();
            engine.div_fixed_batch(&div_pairs)
        }
        ChiSqVariant::Unoptimized => {
            // one integer multiplication per cell: t1 = s_c·s_r
            let mut pairs = Vec::with_capacity(n * m);
            for i in 0..n {
                for j in 0..m {
                    pairs.push((margins.col_sums[j], margins.row_sums[i]));
                }
            }
            let t1 = engine.mul_secret_batch(&pairs)?;

            // conversions: every t1, every observed count, the overall sum
            let mut to_convert: Vec<SecretInt> = t1.clone();
            for row in rows {
                to_convert.extend(row.iter().copied());
            }
            to_convert.push(margins.overall);
            let converted = engine.int_to_fixed_batch(&to_convert)?;
            let t1_fixed = &converted[..n * m];
            let obs_fixed = &converted[n * m..2 * n * m];
            let overall_fixed = converted[2 * n * m];

            // division 1: E = t1 / s_o
            let e_pairs: Vec<(SecretFixed, SecretFixed)> =
                t1_fixed.iter().map(|t| (*t, overall_fixed)).collect();
            let expected = engine.div_fixed_batch(&e_pairs)?;

            // fixed subtraction: D = O − E
            let d_pairs: Vec<(SecretFixed, SecretFixed)> = obs_fixed
                .iter()
                .zip(&expected)
                .map(|(o, e)| (*o, *e))
                .collect();
            let deltas = engine.sub_fixed_batch(&d_pairs)?;

            // fixed multiplication: D·D
            let sq_pairs: Vec<(SecretFixed, SecretFixed)> =
                deltas.iter().map(|d| (*d, *d)).collect();
            let squares = engine.mul_fixed_batch(&sq_pairs)?;

            // division 2: (D·D) / E
            let c_pairs: Vec<(SecretFixed, SecretFixed)> = squares
                .iter()
                .zip(&expected)
                .map(|(s, e)| (*s, *e))
                .collect();
            engine.div_fixed_batch(&c_pairs)
        }
    }
}

/// Ledger snapshot taken right after a named program phase.
#[derive(Clone, Debug)]
pub struct PhaseMark {
    pub phase: &'static str,
    pub after: LedgerReport,
}

/// Outcome of a full program run: the opened value, the final ledger,
/// per-phase snapshots and the seed the engine resolved to.
#[derive(Clone, Debug)]
pub struct ProgramRun {
    pub value: FixedValue,
    pub degrees_of_freedom: Option<u64>,
    pub ledger: LedgerReport,
    pub phases: Vec<PhaseMark>,
    pub seed: u64,
}

impl ProgramRun {
    /// Ledger delta contributed by the named phase alone.
    pub fn phase_delta(&self, phase: &str) -> Option<LedgerReport> {
        let idx = self.phases.iter().position(|p| p.phase == phase)?;
        let after = &self.phases[idx].after;
        Some(if idx == 0 {
            after.clone()
        } else {
            after.delta_since(&self.phases[idx - 1].after)
        })
    }
}

/// Runs the standard-deviation program end to end on a fresh engine,
/// opening the result.
pub fn run_stddev(
    cfg: EngineConfig,
    input: &StdDevInput,
    prec: u32,
    schedule: Schedule,
    iterations: Option<u32>,
) -> Result<ProgramRun> {
    let mut engine = Engine::new(cfg)?;
    let mut phases = Vec::new();
    let mark = |engine: &Engine, phases: &mut Vec<PhaseMark>, phase: &'static str| {
        phases.push(PhaseMark {
            phase,
            after: engine.ledger_report(),
        });
    };

    let all = distribute_parties(&mut engine, input)?;
    mark(&engine, &mut phases, "input");

    let total = engine.sum_secret(&all)?;
    let n_const = engine.constant_int(&BigInt::from(all.len()))?;
    let mean = engine.div_secret_int(&total, &n_const)?;
    mark(&engine, &mut phases, "mean");

    let diffs: Vec<SecretInt> = all
        .iter()
        .map(|x| engine.sub_secret(x, &mean))
        .collect::<Result<_>>()?;
    let squares = match schedule {
        Schedule::Batched => {
            let pairs: Vec<(SecretInt, SecretInt)> = diffs.iter().map(|d| (*d, *d)).collect();
            engine.mul_secret_batch(&pairs)?
        }
        Schedule::Sequential => diffs
            .iter()
            .map(|d| engine.mul_secret(d, d))
            .collect::<Result<_>>()?,
    };
    mark(&engine, &mut phases, "squared_differences");

    let sum_squares = engine.sum_secret(&squares)?;
    let variance = engine.div_secret_int(&sum_squares, &n_const)?;
    mark(&engine, &mut phases, "variance");

    let root = sqrt_newton(&mut engine, &variance, prec, iterations)?;
    mark(&engine, &mut phases, "sqrt");

    let value = engine.open_fixed(&root)?;
    mark(&engine, &mut phases, "open");

    Ok(ProgramRun {
        value,
        degrees_of_freedom: None,
        ledger: engine.ledger_report(),
        phases,
        seed: engine.seed(),
    })
}

/// Runs the chi-squared program end to end on a fresh engine, opening
/// the statistic.
pub fn run_chisq(cfg: EngineConfig, input: &ChiSqInput, variant: ChiSqVariant) -> Result<ProgramRun> {
    let mut engine = Engine::new(cfg)?;
    let mut phases = Vec::new();

    let rows = distribute_matrix(&mut engine, input)?;
    phases.push(PhaseMark {
        phase: "input",
        after: engine.ledger_report(),
    });

    let cells = chisq_cells(&mut engine, input, &rows, variant)?;
    phases.push(PhaseMark {
        phase: "cells",
        after: engine.ledger_report(),
    });

    let statistic = engine.tree_sum_fixed(&cells)?;
    phases.push(PhaseMark {
        phase: "summation",
        after: engine.ledger_report(),
    });

    let value = engine.open_fixed(&statistic)?;
    phases.push(PhaseMark {
        phase: "open",
        after: engine.ledger_report(),
    });

    Ok(ProgramRun {
        value,
        degrees_of_freedom: Some(input.degrees_of_freedom()),
        ledger: engine.ledger_report(),
        phases,
        seed: engine.seed(),
    })
}

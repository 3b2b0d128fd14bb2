//! Plaintext reference implementations used by tests: an exact replay of
//! the secure programs' integer/fixed-point semantics, plus real-valued
//! (double) references for the statistics themselves.
//!
//! These functions never touch shares; the secure path reaches plaintext
//! only through the dealer.

use num_bigint::BigInt;
use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::protocols::FixedValue;

/// Integer trace of the square-root iteration k ← (k² + num) / (2k)
/// starting from k = 1, with num = a · 100^prec.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NewtonTrace {
    /// num = a · 100^prec, the scaled radicand the iteration runs on.
    pub scaled_input: BigInt,
    /// k after each completed iteration.
    pub steps: Vec<BigInt>,
    /// 1-based iteration at which the divisor 2k was zero, if any;
    /// iterations stop there.
    pub zero_divisor_step: Option<u32>,
}

impl NewtonTrace {
    pub fn final_k(&self) -> Option<&BigInt> {
        self.steps.last()
    }

    /// Absolute scaled error |num − k²| of the last completed step.
    pub fn final_error(&self) -> Option<BigInt> {
        self.steps
            .last()
            .map(|k| (&self.scaled_input - k * k).abs())
    }
}

/// Replays `iters` iterations of the integer square-root loop exactly
/// (truncating division toward zero, like the secure gate).
pub fn newton_trace(a: &BigInt, prec: u32, iters: u32) -> NewtonTrace {
    let num: BigInt = a * BigInt::from(100u32).pow(prec);
    let mut k = BigInt::from(1u32);
    let mut steps = Vec::with_capacity(iters as usize);
    for step in 1..=iters {
        let divisor: BigInt = 2 * &k;
        if divisor.is_zero() {
            return NewtonTrace {
                scaled_input: num,
                steps,
                zero_divisor_step: Some(step),
            };
        }
        k = (&k * &k + &num) / divisor;
        steps.push(k.clone());
    }
    NewtonTrace {
        scaled_input: num,
        steps,
        zero_divisor_step: None,
    }
}

/// Exact replay of the secure standard-deviation program: integer sum,
/// truncated mean, squared differences, truncated variance, the Newton
/// trace, and the final fixed-point division by 10^prec.
///
/// `iterations` overrides the default prec+10 budget (the same override
/// the secure program offers for inputs the default budget cannot
/// converge on).
pub fn stddev_exact(
    values: &[i64],
    prec: u32,
    frac_bits: u32,
    iterations: Option<u32>,
) -> Result<FixedValue> {
    if values.is_empty() {
        return Err(Error::Config("standard deviation of an empty data set".into()));
    }
    let n = BigInt::from(values.len());
    let sum: BigInt = values.iter().map(|&v| BigInt::from(v)).sum();
    let mean = &sum / &n;
    let ssq: BigInt = values
        .iter()
        .map(|&v| {
            let d = BigInt::from(v) - &mean;
            &d * &d
        })
        .sum();
    let variance = ssq / &n;

    let iters = iterations.unwrap_or(prec + 10);
    let trace = newton_trace(&variance, prec, iters);
    if let Some(step) = trace.zero_divisor_step {
        return Err(Error::DivisionByZero(Some(format!(
            "square-root iteration {step} (zero spread drives k to 0)"
        ))));
    }
    let k = trace.final_k().expect("at least one iteration");
    // div_fixed(int_to_fixed(k), int_to_fixed(10^prec)):
    // trunc((k·2^f)·2^f / (10^prec·2^f)) = trunc(k·2^f / 10^prec)
    let raw = (k << frac_bits) / BigInt::from(10u32).pow(prec);
    Ok(FixedValue::new(raw, frac_bits))
}

fn marginals(matrix: &[Vec<u64>]) -> (Vec<f64>, Vec<f64>, f64) {
    let cols = matrix[0].len();
    let row_sums: Vec<f64> = matrix
        .iter()
        .map(|row| row.iter().map(|&c| c as f64).sum())
        .collect();
    let col_sums: Vec<f64> = (0..cols)
        .map(|j| matrix.iter().map(|row| row[j] as f64).sum())
        .collect();
    let total = row_sums.iter().sum();
    (row_sums, col_sums, total)
}

/// Textbook chi-squared: Σ (O − E)² / E with E from the marginals, in
/// double arithmetic, plus df = (rows−1)(cols−1).
pub fn chisq_real(matrix: &[Vec<u64>]) -> (f64, u64) {
    let (row_sums, col_sums, total) = marginals(matrix);
    let mut stat = 0.0;
    for (i, row) in matrix.iter().enumerate() {
        for (j, &o) in row.iter().enumerate() {
            let expected = row_sums[i] * col_sums[j] / total;
            let d = o as f64 - expected;
            stat += d * d / expected;
        }
    }
    let df = (matrix.len() as u64 - 1) * (matrix[0].len() as u64 - 1);
    (stat, df)
}

/// The restructured per-cell form (x·s_o − s_c·s_r)² / (s_c·s_r·s_o),
/// algebraically identical to the textbook form.
pub fn chisq_real_restructured(matrix: &[Vec<u64>]) -> (f64, u64) {
    let (row_sums, col_sums, total) = marginals(matrix);
    let mut stat = 0.0;
    for (i, row) in matrix.iter().enumerate() {
        for (j, &o) in row.iter().enumerate() {
            let num = o as f64 * total - col_sums[j] * row_sums[i];
            stat += num * num / (col_sums[j] * row_sums[i] * total);
        }
    }
    let df = (matrix.len() as u64 - 1) * (matrix[0].len() as u64 - 1);
    (stat, df)
}

fn int_marginals(matrix: &[Vec<u64>]) -> (Vec<BigInt>, Vec<BigInt>, BigInt) {
    let cols = matrix[0].len();
    let row_sums: Vec<BigInt> = matrix
        .iter()
        .map(|row| row.iter().map(|&c| BigInt::from(c)).sum())
        .collect();
    let col_sums: Vec<BigInt> = (0..cols)
        .map(|j| matrix.iter().map(|row| BigInt::from(row[j])).sum())
        .collect();
    let total: BigInt = row_sums.iter().sum();
    (row_sums, col_sums, total)
}

/// Exact replay of the optimized secure chi-squared: integer marginals
/// and cell products, one truncating fixed division per cell, exact sum.
pub fn chisq_exact_optimized(matrix: &[Vec<u64>], frac_bits: u32) -> Result<(FixedValue, u64)> {
    let (row_sums, col_sums, total) = int_marginals(matrix);
    let mut raw_sum = BigInt::zero();
    for (i, row) in matrix.iter().enumerate() {
        for (j, &o) in row.iter().enumerate() {
            let t1 = &col_sums[j] * &row_sums[i];
            let diff = BigInt::from(o) * &total - &t1;
            let sq = &diff * &diff;
            let den = &t1 * &total;
            if den.is_zero() {
                return Err(Error::DivisionByZero(Some(format!(
                    "cell ({i},{j}) denominator"
                ))));
            }
            // div_fixed(int_to_fixed(sq), int_to_fixed(den)) = trunc(sq·2^f / den)
            raw_sum += (sq << frac_bits) / den;
        }
    }
    let df = (matrix.len() as u64 - 1) * (matrix[0].len() as u64 - 1);
    Ok((FixedValue::new(raw_sum, frac_bits), df))
}

/// Exact replay of the unoptimized secure chi-squared: fixed-point
/// expected value, subtraction, fixed multiplication and two truncating
/// divisions per cell.
pub fn chisq_exact_unoptimized(matrix: &[Vec<u64>], frac_bits: u32) -> Result<(FixedValue, u64)> {
    let (row_sums, col_sums, total) = int_marginals(matrix);
    let mut raw_sum = BigInt::zero();
    for (i, row) in matrix.iter().enumerate() {
        for (j, &o) in row.iter().enumerate() {
            let t1 = &col_sums[j] * &row_sums[i];
            if total.is_zero() {
                return Err(Error::DivisionByZero(Some("overall sum".into())));
            }
            // E = div_fixed(fixed(t1), fixed(total)) = trunc(t1·2^f / total)
            let e_raw = (&t1 << frac_bits) / &total;
            if e_raw.is_zero() {
                return Err(Error::DivisionByZero(Some(format!(
                    "cell ({i},{j}) expected value truncated to zero"
                ))));
            }
            let d_raw = (BigInt::from(o) << frac_bits) - &e_raw;
            // DD = mul_fixed(D, D) = trunc(D_raw² / 2^f)
            let dd_raw = (&d_raw * &d_raw) / (BigInt::from(1) << frac_bits);
            // contribution = div_fixed(DD, E) = trunc(DD_raw·2^f / E_raw)
            raw_sum += (dd_raw << frac_bits) / &e_raw;
        }
    }
    let df = (matrix.len() as u64 - 1) * (matrix[0].len() as u64 - 1);
    Ok((FixedValue::new(raw_sum, frac_bits), df))
}

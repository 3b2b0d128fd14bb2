//! Secret-value arithmetic on top of the engine: free linear operations,
//! one-round secret multiplication, ideal nonlinear gates, batched
//! variants and fixed-point arithmetic.
//!
//! Integer values carry a declared bitlength ℓ (a magnitude bound
//! |value| < 2^ℓ, in the spirit of declaring private variables at the
//! minimum necessary width). Operations widen ℓ conservatively:
//! add/sub → max+1, mul → ℓa+ℓb, int→fixed → ℓ+f. Widening past the
//! field capacity is an overflow error.

use std::collections::HashSet;

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};

use crate::engine::{Engine, GateInput, GateInstance, GateKind, GateOp, HandleId};
use crate::error::{Error, Result};

/// Handle to a secret-shared signed integer. The shares themselves live
/// in the simulated parties' stores; the handle is freely copyable.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SecretInt {
    pub(crate) id: HandleId,
    pub(crate) bits: u32,
}

impl SecretInt {
    /// Declared magnitude bound: the value is guaranteed in (-2^bits, 2^bits).
    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub(crate) fn input(&self) -> GateInput {
        GateInput {
            id: self.id,
            bits: self.bits,
        }
    }
}

/// Handle to a secret-shared fixed-point value: a [`SecretInt`] raw
/// value interpreted as raw · 2^-f.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SecretFixed {
    pub(crate) raw: SecretInt,
    pub(crate) frac_bits: u32,
}

impl SecretFixed {
    pub fn frac_bits(&self) -> u32 {
        self.frac_bits
    }

    /// The underlying raw integer handle.
    pub fn raw(&self) -> SecretInt {
        self.raw
    }
}

/// An opened fixed-point value: an exact integer raw together with its
/// fractional bit count, i.e. the rational raw / 2^frac_bits.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FixedValue {
    raw: BigInt,
    frac_bits: u32,
}

impl FixedValue {
    pub fn new(raw: BigInt, frac_bits: u32) -> Self {
        FixedValue { raw, frac_bits }
    }

    pub fn from_integer(v: i64, frac_bits: u32) -> Self {
        FixedValue {
            raw: BigInt::from(v) << frac_bits,
            frac_bits,
        }
    }

    pub fn raw(&self) -> &BigInt {
        &self.raw
    }

    pub fn frac_bits(&self) -> u32 {
        self.frac_bits
    }

    pub fn to_f64(&self) -> f64 {
        self.raw.to_f64().unwrap_or(f64::NAN) / (self.frac_bits as f64).exp2()
    }

    /// Exact decimal rendering; a binary fraction with f bits terminates
    /// within f decimal digits (frac/2^f = frac·5^f/10^f).
    pub fn decimal_string(&self) -> String {
        let f = self.frac_bits;
        let mag = self.raw.magnitude();
        let int_part = mag >> f;
        let frac_part = mag - (&int_part << f);
        let sign = if self.raw.is_negative() { "-" } else { "" };
        if f == 0 {
            return format!("{sign}{int_part}.0");
        }
        let five_pow = num_bigint::BigUint::from(5u32).pow(f);
        let digits = format!("{:0>width$}", (frac_part * five_pow).to_string(), width = f as usize);
        let trimmed = digits.trim_end_matches('0');
        let frac_str = if trimmed.is_empty() { "0" } else { trimmed };
        format!("{sign}{int_part}.{frac_str}")
    }
}

impl std::fmt::Display for FixedValue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.decimal_string())
    }
}

fn bits_of(v: &BigInt) -> u32 {
    v.magnitude().bits().max(1) as u32
}

/// Builder for one round-parallel batch of independent gates.
///
/// Pushing a gate hands back a placeholder handle immediately; shares are
/// materialized when [`Batch::run`] executes. Using a handle produced by
/// the same batch as an input is a scheduling error (such gates are not
/// independent and cannot share a round).
pub struct Batch<'e> {
    engine: &'e mut Engine,
    gates: Vec<GateInstance>,
    produced: HashSet<HandleId>,
}

impl<'e> Batch<'e> {
    pub(crate) fn new(engine: &'e mut Engine) -> Self {
        Batch {
            engine,
            gates: Vec::new(),
            produced: HashSet::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    fn ensure_ready(&self, id: HandleId) -> Result<()> {
        if self.produced.contains(&id) {
            return Err(Error::Scheduling(
                "gate input is an output of the same batch; split into sequential batches".into(),
            ));
        }
        if !self.engine.is_materialized(id) {
            return Err(Error::Scheduling(format!(
                "handle {id} has no shares (placeholder from a batch that never ran?)"
            )));
        }
        Ok(())
    }

    fn check_width(&self, bits: u32, what: &str) -> Result<u32> {
        let cap = self.engine.field().capacity_bits();
        if bits > cap {
            return Err(Error::Overflow(format!(
                "{what} needs {bits} bits, field capacity is {cap}"
            )));
        }
        Ok(bits)
    }

    fn push(&mut self, kind: GateKind, op: GateOp, out_bits: u32) -> SecretInt {
        let out = self.engine.alloc_handle();
        self.produced.insert(out);
        self.gates.push(GateInstance { kind, op, out });
        SecretInt {
            id: out,
            bits: out_bits,
        }
    }

    /// Secret × secret multiplication (one interactive op, batchable).
    pub fn mul(&mut self, a: &SecretInt, b: &SecretInt) -> Result<SecretInt> {
        self.ensure_ready(a.id)?;
        self.ensure_ready(b.id)?;
        let bits = self.check_width(a.bits + b.bits, "product")?;
        Ok(self.push(
            GateKind::SecretMul,
            GateOp::Mul {
                a: a.input(),
                b: b.input(),
            },
            bits,
        ))
    }

    /// Truncating integer division (ideal gate; C semantics, toward zero).
    pub fn div_int(&mut self, a: &SecretInt, b: &SecretInt) -> Result<SecretInt> {
        self.ensure_ready(a.id)?;
        self.ensure_ready(b.id)?;
        // |a/b| <= |a| whenever |b| >= 1
        let bits = a.bits;
        Ok(self.push(
            GateKind::IntDiv,
            GateOp::IntDiv {
                a: a.input(),
                b: b.input(),
            },
            bits,
        ))
    }

    /// Conversion gate: reinterprets an integer as fixed-point by scaling
    /// the shares with the public constant 2^f.
    pub fn int_to_fixed(&mut self, a: &SecretInt) -> Result<SecretFixed> {
        self.ensure_ready(a.id)?;
        let f = self.engine.frac_bits();
        let bits = self.check_width(a.bits + f, "fixed-point conversion")?;
        let raw = self.push(GateKind::IntToFixed, GateOp::IntToFixed { a: a.input() }, bits);
        Ok(SecretFixed { raw, frac_bits: f })
    }

    fn ensure_same_f(&self, a: &SecretFixed, b: &SecretFixed) -> Result<u32> {
        if a.frac_bits != b.frac_bits {
            return Err(Error::Config(format!(
                "fixed-point operands disagree on fractional bits: {} vs {}",
                a.frac_bits, b.frac_bits
            )));
        }
        Ok(a.frac_bits)
    }

    /// Fixed-point division (ideal gate): raw = trunc(a_raw·2^f / b_raw).
    pub fn div_fixed(&mut self, a: &SecretFixed, b: &SecretFixed) -> Result<SecretFixed> {
        let f = self.ensure_same_f(a, b)?;
        self.ensure_ready(a.raw.id)?;
        self.ensure_ready(b.raw.id)?;
        let bits = self.check_width(a.raw.bits + f, "fixed quotient")?;
        let raw = self.push(
            GateKind::FixedDiv,
            GateOp::FixedDiv {
                a: a.raw.input(),
                b: b.raw.input(),
            },
            bits,
        );
        Ok(SecretFixed { raw, frac_bits: f })
    }

    /// Fixed-point multiplication (ideal gate): raw = trunc(a_raw·b_raw / 2^f).
    pub fn mul_fixed(&mut self, a: &SecretFixed, b: &SecretFixed) -> Result<SecretFixed> {
        let f = self.ensure_same_f(a, b)?;
        self.ensure_ready(a.raw.id)?;
        self.ensure_ready(b.raw.id)?;
        let bits = self.check_width((a.raw.bits + b.raw.bits).saturating_sub(f).max(1), "fixed product")?;
        let raw = self.push(
            GateKind::FixedMul,
            GateOp::FixedMul {
                a: a.raw.input(),
                b: b.raw.input(),
            },
            bits,
        );
        Ok(SecretFixed { raw, frac_bits: f })
    }

    /// Fixed-point addition. Local share arithmetic; charged as a gate so
    /// the PICCO-emulation profile can expose float-addition depth.
    pub fn add_fixed(&mut self, a: &SecretFixed, b: &SecretFixed) -> Result<SecretFixed> {
        self.fixed_add_inner(a, b, false)
    }

    /// Fixed-point subtraction a − b, realized as an addition gate with a
    /// negated second operand.
    pub fn sub_fixed(&mut self, a: &SecretFixed, b: &SecretFixed) -> Result<SecretFixed> {
        self.fixed_add_inner(a, b, true)
    }

    fn fixed_add_inner(&mut self, a: &SecretFixed, b: &SecretFixed, negate_b: bool) -> Result<SecretFixed> {
        let f = self.ensure_same_f(a, b)?;
        self.ensure_ready(a.raw.id)?;
        self.ensure_ready(b.raw.id)?;
        let bits = self.check_width(a.raw.bits.max(b.raw.bits) + 1, "fixed sum")?;
        let raw = self.push(
            GateKind::FixedAdd,
            GateOp::FixedAdd {
                a: a.raw.input(),
                b: b.raw.input(),
                negate_b,
            },
            bits,
        );
        Ok(SecretFixed { raw, frac_bits: f })
    }

    /// Executes the batch: one round-parallel step; the ledger advances by
    /// the summed op costs and the maximum round cost over the gate kinds
    /// present.
    pub fn run(self) -> Result<()> {
        self.engine.run_gates(&self.gates)
    }
}

impl Engine {
    /// Starts an empty batch of independent gates.
    pub fn batch(&mut self) -> Batch<'_> {
        Batch::new(self)
    }

    /// Free share-wise addition.
    pub fn add_secret(&mut self, a: &SecretInt, b: &SecretInt) -> Result<SecretInt> {
        self.linear_combine(a, b, false)
    }

    /// Free share-wise subtraction.
    pub fn sub_secret(&mut self, a: &SecretInt, b: &SecretInt) -> Result<SecretInt> {
        self.linear_combine(a, b, true)
    }

    /// Free multiplication by a public constant.
    pub fn mul_public(&mut self, a: &SecretInt, c: &BigInt) -> Result<SecretInt> {
        let bits = if c.is_zero() { 1 } else { a.bits + bits_of(c) };
        let cap = self.field().capacity_bits();
        if bits > cap {
            return Err(Error::Overflow(format!(
                "public scaling needs {bits} bits, field capacity is {cap}"
            )));
        }
        self.scale_shares(a, c, bits)
    }

    /// Free sum of many secret integers, tree-reduced so the declared
    /// width grows by ceil(log2 k) rather than k.
    pub fn sum_secret(&mut self, xs: &[SecretInt]) -> Result<SecretInt> {
        if xs.is_empty() {
            return Err(Error::Config("sum of an empty list".into()));
        }
        let mut layer: Vec<SecretInt> = xs.to_vec();
        while layer.len() > 1 {
            let mut next = Vec::with_capacity(layer.len().div_ceil(2));
            for pair in layer.chunks(2) {
                match pair {
                    [a, b] => next.push(self.add_secret(a, b)?),
                    [a] => next.push(*a),
                    _ => unreachable!(),
                }
            }
            layer = next;
        }
        Ok(layer[0])
    }

    /// Reinterprets a handle at a caller-asserted declared width, the way
    /// an assignment into a declared-width private variable does. The
    /// caller must guarantee |value| < 2^bits; ideal gates and opens
    /// verify the declaration against the reconstructed value.
    pub fn with_bitlength(&self, a: &SecretInt, bits: u32) -> Result<SecretInt> {
        let cap = self.field().capacity_bits();
        if bits == 0 || bits > cap {
            return Err(Error::Overflow(format!(
                "declared width {bits} outside 1..={cap}"
            )));
        }
        Ok(SecretInt { id: a.id, bits })
    }

    /// Secret multiplication: local share product (degree 2t), resharing
    /// at degree t, Lagrange recombination. One interactive op, one round.
    pub fn mul_secret(&mut self, a: &SecretInt, b: &SecretInt) -> Result<SecretInt> {
        let mut batch = self.batch();
        let out = batch.mul(a, b)?;
        batch.run()?;
        Ok(out)
    }

    /// A whole batch of independent multiplications in a single round.
    pub fn mul_secret_batch(&mut self, pairs: &[(SecretInt, SecretInt)]) -> Result<Vec<SecretInt>> {
        let mut batch = self.batch();
        let outs = pairs
            .iter()
            .map(|(a, b)| batch.mul(a, b))
            .collect::<Result<Vec<_>>>()?;
        batch.run()?;
        Ok(outs)
    }

    /// Truncating secret integer division (ideal gate).
    pub fn div_secret_int(&mut self, a: &SecretInt, b: &SecretInt) -> Result<SecretInt> {
        let mut batch = self.batch();
        let out = batch.div_int(a, b)?;
        batch.run()?;
        Ok(out)
    }

    /// Conversion gate int → fixed with the engine's configured f.
    pub fn int_to_fixed(&mut self, a: &SecretInt) -> Result<SecretFixed> {
        let mut batch = self.batch();
        let out = batch.int_to_fixed(a)?;
        batch.run()?;
        Ok(out)
    }

    pub fn int_to_fixed_batch(&mut self, xs: &[SecretInt]) -> Result<Vec<SecretFixed>> {
        let mut batch = self.batch();
        let outs = xs
            .iter()
            .map(|x| batch.int_to_fixed(x))
            .collect::<Result<Vec<_>>>()?;
        batch.run()?;
        Ok(outs)
    }

    /// Fixed-point division (ideal gate).
    pub fn div_fixed(&mut self, a: &SecretFixed, b: &SecretFixed) -> Result<SecretFixed> {
        let mut batch = self.batch();
        let out = batch.div_fixed(a, b)?;
        batch.run()?;
        Ok(out)
    }

    pub fn div_fixed_batch(&mut self, pairs: &[(SecretFixed, SecretFixed)]) -> Result<Vec<SecretFixed>> {
        let mut batch = self.batch();
        let outs = pairs
            .iter()
            .map(|(a, b)| batch.div_fixed(a, b))
            .collect::<Result<Vec<_>>>()?;
        batch.run()?;
        Ok(outs)
    }

    /// Fixed-point multiplication (ideal gate).
    pub fn mul_fixed(&mut self, a: &SecretFixed, b: &SecretFixed) -> Result<SecretFixed> {
        let mut batch = self.batch();
        let out = batch.mul_fixed(a, b)?;
        batch.run()?;
        Ok(out)
    }

    pub fn mul_fixed_batch(&mut self, pairs: &[(SecretFixed, SecretFixed)]) -> Result<Vec<SecretFixed>> {
        let mut batch = self.batch();
        let outs = pairs
            .iter()
            .map(|(a, b)| batch.mul_fixed(a, b))
            .collect::<Result<Vec<_>>>()?;
        batch.run()?;
        Ok(outs)
    }

    pub fn add_fixed(&mut self, a: &SecretFixed, b: &SecretFixed) -> Result<SecretFixed> {
        let mut batch = self.batch();
        let out = batch.add_fixed(a, b)?;
        batch.run()?;
        Ok(out)
    }

    pub fn sub_fixed(&mut self, a: &SecretFixed, b: &SecretFixed) -> Result<SecretFixed> {
        let mut batch = self.batch();
        let out = batch.sub_fixed(a, b)?;
        batch.run()?;
        Ok(out)
    }

    pub fn sub_fixed_batch(&mut self, pairs: &[(SecretFixed, SecretFixed)]) -> Result<Vec<SecretFixed>> {
        let mut batch = self.batch();
        let outs = pairs
            .iter()
            .map(|(a, b)| batch.sub_fixed(a, b))
            .collect::<Result<Vec<_>>>()?;
        batch.run()?;
        Ok(outs)
    }

    /// Sums k fixed-point values pairwise in a tree: ceil(log2 k)
    /// sequential batches, element j pairing with element live−j−1 inside
    /// each batch. Non-power-of-two inputs are zero-padded.
    pub fn tree_sum_fixed(&mut self, xs: &[SecretFixed]) -> Result<SecretFixed> {
        if xs.is_empty() {
            return Err(Error::Config("tree sum of an empty list".into()));
        }
        let f = xs[0].frac_bits;
        if xs.iter().any(|x| x.frac_bits != f) {
            return Err(Error::Config(
                "tree sum operands disagree on fractional bits".into(),
            ));
        }
        let mut layer = xs.to_vec();
        let padded = layer.len().next_power_of_two();
        while layer.len() < padded {
            layer.push(self.zero_fixed()?);
        }
        while layer.len() > 1 {
            let live = layer.len();
            let mut batch = self.batch();
            let next = (0..live / 2)
                .map(|j| batch.add_fixed(&layer[j], &layer[live - 1 - j]))
                .collect::<Result<Vec<_>>>()?;
            batch.run()?;
            layer = next;
        }
        Ok(layer[0])
    }

    /// Constant zero as a fixed-point sharing (free, no randomness).
    pub fn zero_fixed(&mut self) -> Result<SecretFixed> {
        let raw = self.constant_int(&BigInt::zero())?;
        Ok(SecretFixed {
            raw,
            frac_bits: self.frac_bits(),
        })
    }
}

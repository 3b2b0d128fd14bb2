//! Simulated network of n computational parties executing protocols in
//! round lockstep, with a dealer for input distribution, output
//! collection and ideal gates, and a cost ledger.
//!
//! The simulation is synchronous: a message sent in round r is readable
//! only from round r+1. All parties execute the identical gate schedule;
//! divergence aborts the run. Nonlinear gates (integer division,
//! fixed-point division and multiplication) are *ideal*: the dealer
//! reconstructs the operands, computes in plaintext and reshares the
//! result. That is explicitly insecure and exists because the source
//! framework treats these as built-in primitives; their costs are still
//! charged from the [`GateCostTable`] so complexity claims stay testable.

use std::collections::{BTreeMap, HashMap, VecDeque};
use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Zero};
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{FieldElement, PrimeField};
use crate::protocols::{FixedValue, SecretFixed, SecretInt};
use crate::shamir::{self, Share, SharingConfig};

pub type PartyId = usize;
pub type HandleId = u64;

/// Which per-gate cost profile the ledger charges.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CostProfile {
    /// Multiplication and ideal gates cost (1 op, 1 round); integer and
    /// fixed additions are free.
    #[default]
    Default,
    /// Same, except fixed-point additions cost (1 op, 1 round), so the
    /// depth of floating-style addition trees becomes observable.
    PiccoEmulation,
}

impl fmt::Display for CostProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CostProfile::Default => write!(f, "default"),
            CostProfile::PiccoEmulation => write!(f, "picco-emulation"),
        }
    }
}

impl std::str::FromStr for CostProfile {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "default" => Ok(CostProfile::Default),
            "picco-emulation" | "picco" => Ok(CostProfile::PiccoEmulation),
            other => Err(Error::Config(format!("unknown cost profile `{other}`"))),
        }
    }
}

/// Interactive gate kinds tracked by the ledger.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GateKind {
    SecretMul,
    IntDiv,
    FixedDiv,
    IntToFixed,
    FixedAdd,
    FixedMul,
    Open,
}

impl GateKind {
    pub const ALL: [GateKind; 7] = [
        GateKind::SecretMul,
        GateKind::IntDiv,
        GateKind::FixedDiv,
        GateKind::IntToFixed,
        GateKind::FixedAdd,
        GateKind::FixedMul,
        GateKind::Open,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            GateKind::SecretMul => "secret_mul",
            GateKind::IntDiv => "int_div",
            GateKind::FixedDiv => "fixed_div",
            GateKind::IntToFixed => "int_to_fixed",
            GateKind::FixedAdd => "fixed_add",
            GateKind::FixedMul => "fixed_mul",
            GateKind::Open => "open",
        }
    }
}

impl fmt::Display for GateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Cost charged per gate: `ops` per instance, `rounds` once per batch.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GateCost {
    pub ops: u64,
    pub rounds: u64,
}

/// Configurable (ops, rounds) charge per gate kind.
#[derive(Clone, Debug)]
pub struct GateCostTable {
    costs: BTreeMap<GateKind, GateCost>,
}

impl GateCostTable {
    pub fn for_profile(profile: CostProfile) -> Self {
        let mut costs = BTreeMap::new();
        for kind in GateKind::ALL {
            let cost = match (kind, profile) {
                (GateKind::FixedAdd, CostProfile::Default) => GateCost { ops: 0, rounds: 0 },
                (GateKind::FixedAdd, CostProfile::PiccoEmulation) => GateCost { ops: 1, rounds: 1 },
                _ => GateCost { ops: 1, rounds: 1 },
            };
            costs.insert(kind, cost);
        }
        GateCostTable { costs }
    }

    pub fn cost(&self, kind: GateKind) -> GateCost {
        self.costs[&kind]
    }
}

/// Per-kind (ops, rounds) totals in the ledger.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GateTotals {
    pub ops: u64,
    pub rounds: u64,
}

/// Counters of interactive operations, communication rounds, bytes and
/// the per-gate-kind breakdown. All counters are monotone over a run.
///
/// Byte accounting (informational): each field element on the wire costs
/// ceil(log2 p / 8) bytes; multiplication sends n(n−1) elements per gate
/// (sub-shares between distinct parties), a k-input ideal gate sends
/// k·n elements to the dealer and n back, an open sends n to the dealer.
#[derive(Clone, Debug, Default)]
pub struct CostLedger {
    interactive_ops: u64,
    rounds: u64,
    bytes_sent: u64,
    per_gate: BTreeMap<GateKind, GateTotals>,
}

impl CostLedger {
    fn charge(&mut self, kind: GateKind, count: u64, cost: GateCost) {
        let entry = self.per_gate.entry(kind).or_default();
        entry.ops += count * cost.ops;
        entry.rounds += cost.rounds;
        self.interactive_ops += count * cost.ops;
    }

    pub fn snapshot(&self) -> LedgerReport {
        LedgerReport {
            interactive_ops: self.interactive_ops,
            rounds: self.rounds,
            bytes_sent: self.bytes_sent,
            per_gate: self.per_gate.clone(),
        }
    }
}

/// Immutable snapshot of the ledger counters.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LedgerReport {
    pub interactive_ops: u64,
    pub rounds: u64,
    pub bytes_sent: u64,
    pub per_gate: BTreeMap<GateKind, GateTotals>,
}

impl LedgerReport {
    /// Counter difference `self − earlier` (counters are monotone, so
    /// this is exact for snapshots of the same run).
    pub fn delta_since(&self, earlier: &LedgerReport) -> LedgerReport {
        let mut per_gate = BTreeMap::new();
        for (kind, totals) in &self.per_gate {
            let before = earlier.per_gate.get(kind).copied().unwrap_or_default();
            let d = GateTotals {
                ops: totals.ops - before.ops,
                rounds: totals.rounds - before.rounds,
            };
            if d.ops != 0 || d.rounds != 0 {
                per_gate.insert(*kind, d);
            }
        }
        LedgerReport {
            interactive_ops: self.interactive_ops - earlier.interactive_ops,
            rounds: self.rounds - earlier.rounds,
            bytes_sent: self.bytes_sent - earlier.bytes_sent,
            per_gate,
        }
    }

    pub fn gate_ops(&self, kind: GateKind) -> u64 {
        self.per_gate.get(&kind).map_or(0, |t| t.ops)
    }
}

/// Engine configuration: party network shape, field, seed, fixed-point
/// precision, input bitlength cap and cost profile.
#[derive(Clone, Debug)]
pub struct EngineConfig {
    /// Computational party count n (≥ 3).
    pub parties: usize,
    /// Threshold t; honest majority requires n ≥ 2t + 1.
    pub threshold: usize,
    pub field: PrimeField,
    /// Seed for all deterministic generators; `None` draws fresh entropy.
    pub seed: Option<u64>,
    /// Fractional bits f of fixed-point values.
    pub frac_bits: u32,
    /// Maximum declared bitlength for distributed inputs (ℓ_max).
    pub max_bits: u32,
    pub profile: CostProfile,
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig {
            parties: 3,
            threshold: 1,
            field: PrimeField::default_field(),
            seed: Some(0),
            frac_bits: 20,
            max_bits: 100,
            profile: CostProfile::Default,
        }
    }
}

struct Party {
    rng: ChaCha12Rng,
    store: HashMap<HandleId, Share>,
}

struct Message {
    sent_round: u64,
    value: FieldElement,
}

/// Reference to a gate operand: handle plus its declared bitlength, so
/// the dealer can validate declarations against reconstructed values.
#[derive(Clone, Copy, Debug)]
pub(crate) struct GateInput {
    pub(crate) id: HandleId,
    pub(crate) bits: u32,
}

#[derive(Clone, Copy, Debug)]
pub(crate) enum GateOp {
    Mul { a: GateInput, b: GateInput },
    IntDiv { a: GateInput, b: GateInput },
    FixedDiv { a: GateInput, b: GateInput },
    IntToFixed { a: GateInput },
    FixedMul { a: GateInput, b: GateInput },
    FixedAdd { a: GateInput, b: GateInput, negate_b: bool },
}

#[derive(Clone, Copy, Debug)]
pub(crate) struct GateInstance {
    pub(crate) kind: GateKind,
    pub(crate) op: GateOp,
    pub(crate) out: HandleId,
}

/// The simulated party network plus dealer.
pub struct Engine {
    cfg: EngineConfig,
    seed: u64,
    sharing: SharingConfig,
    parties: Vec<Party>,
    dealer_rng: ChaCha12Rng,
    /// In-order queue per directed party pair, indexed from·n + to.
    queues: Vec<VecDeque<Message>>,
    ledger: CostLedger,
    table: GateCostTable,
    /// Lagrange weights for points 1..n at target 0 (mul recombination).
    lagrange_all_zero: Vec<FieldElement>,
    /// Weights for points 1..t+1 at target 0 (dealer reconstruction).
    lagrange_head_zero: Vec<FieldElement>,
    /// Weights for points 1..t+1 at target j, j = t+2..n (share checks).
    lagrange_head_to: Vec<Vec<FieldElement>>,
    next_handle: HandleId,
}

fn entropy_seed() -> u64 {
    use std::time::{SystemTime, UNIX_EPOCH};
    let nanos = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_nanos() as u64)
        .unwrap_or(0);
    let mut z = nanos ^ ((std::process::id() as u64) << 32) ^ 0x9e3779b97f4a7c15;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

impl Engine {
    pub fn new(cfg: EngineConfig) -> Result<Self> {
        let seed = cfg.seed.unwrap_or_else(entropy_seed);
        let sharing = SharingConfig::new(cfg.parties, cfg.threshold, cfg.field.clone(), seed)?;

        if cfg.max_bits == 0 {
            return Err(Error::Config("max_bits must be positive".into()));
        }
        if cfg.field.bits() <= 2 * cfg.max_bits as u64 + 8 {
            return Err(Error::Config(format!(
                "modulus of {} bits is too small for max_bits={}; need more than {} bits \
                 so products of in-range values never wrap",
                cfg.field.bits(),
                cfg.max_bits,
                2 * cfg.max_bits + 8
            )));
        }
        if cfg.frac_bits == 0 || cfg.frac_bits >= cfg.max_bits {
            return Err(Error::Config(format!(
                "frac_bits must be in 1..max_bits ({} vs {})",
                cfg.frac_bits, cfg.max_bits
            )));
        }

        let n = cfg.parties;
        let t = cfg.threshold;
        let parties = (0..n)
            .map(|i| Party {
                rng: sharing.stream_rng(i as u64),
                store: HashMap::new(),
            })
            .collect();
        let dealer_rng = sharing.stream_rng(n as u64);

        let all_points: Vec<u64> = (1..=n as u64).collect();
        let head_points: Vec<u64> = (1..=t as u64 + 1).collect();
        let lagrange_all_zero = shamir::lagrange_coefficients(&cfg.field, &all_points, 0)?;
        let lagrange_head_zero = shamir::lagrange_coefficients(&cfg.field, &head_points, 0)?;
        let lagrange_head_to = (t + 2..=n)
            .map(|j| shamir::lagrange_coefficients(&cfg.field, &head_points, j as u64))
            .collect::<Result<Vec<_>>>()?;

        let table = GateCostTable::for_profile(cfg.profile);
        Ok(Engine {
            seed,
            sharing,
            parties,
            dealer_rng,
            queues: (0..n * n).map(|_| VecDeque::new()).collect(),
            ledger: CostLedger::default(),
            table,
            lagrange_all_zero,
            lagrange_head_zero,
            lagrange_head_to,
            next_handle: 0,
            cfg,
        })
    }

    pub fn config(&self) -> &EngineConfig {
        &self.cfg
    }

    /// The seed this run actually uses (resolved from entropy when the
    /// configuration left it unset).
    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn field(&self) -> &PrimeField {
        &self.cfg.field
    }

    pub fn frac_bits(&self) -> u32 {
        self.cfg.frac_bits
    }

    pub fn party_count(&self) -> usize {
        self.cfg.parties
    }

    pub fn threshold(&self) -> usize {
        self.cfg.threshold
    }

    pub fn cost_table(&self) -> &GateCostTable {
        &self.table
    }

    pub fn sharing_config(&self) -> &SharingConfig {
        &self.sharing
    }

    pub fn ledger_report(&self) -> LedgerReport {
        self.ledger.snapshot()
    }

    pub(crate) fn alloc_handle(&mut self) -> HandleId {
        let id = self.next_handle;
        self.next_handle += 1;
        id
    }

    pub(crate) fn is_materialized(&self, id: HandleId) -> bool {
        self.parties[0].store.contains_key(&id)
    }

    fn store_shares(&mut self, id: HandleId, values: Vec<FieldElement>, degree: usize) {
        debug_assert_eq!(values.len(), self.parties.len());
        for (i, (party, value)) in self.parties.iter_mut().zip(values).enumerate() {
            party.store.insert(
                id,
                Share {
                    point: i as u64 + 1,
                    value,
                    degree,
                },
            );
        }
    }

    /// Dealer-side sharing at degree t (input distribution, ideal-gate
    /// results).
    fn dealer_share_values(&mut self, value: &FieldElement) -> Result<Vec<FieldElement>> {
        let shares = shamir::share_with_degree(
            value,
            self.cfg.parties,
            self.cfg.threshold,
            &mut self.dealer_rng,
        )?;
        Ok(shares.into_iter().map(|s| s.value).collect())
    }

    /// Secret-shares one batch of input values from an input party.
    /// Input distribution is not an interactive computation round: the
    /// ledger is unchanged. The declared bitlength is the width of the
    /// largest magnitude in the batch (capped by ℓ_max).
    pub fn distribute_input(&mut self, input_party: usize, values: &[BigInt]) -> Result<Vec<SecretInt>> {
        let mut width = 1u32;
        for v in values {
            let bits = v.magnitude().bits().max(1) as u32;
            if bits > self.cfg.max_bits {
                return Err(Error::Overflow(format!(
                    "input party {input_party}: value {v} needs {bits} bits, max_bits is {}",
                    self.cfg.max_bits
                )));
            }
            width = width.max(bits);
        }
        values
            .iter()
            .map(|v| {
                let encoded = self.cfg.field.encode_signed(v)?;
                let shares = self.dealer_share_values(&encoded)?;
                let id = self.alloc_handle();
                self.store_shares(id, shares, self.cfg.threshold);
                Ok(SecretInt { id, bits: width })
            })
            .collect()
    }

    /// Single-value convenience over [`distribute_input`](Self::distribute_input).
    pub fn distribute_value(&mut self, value: &BigInt) -> Result<SecretInt> {
        Ok(self.distribute_input(0, std::slice::from_ref(value))?[0])
    }

    /// Shares of a public constant: the constant polynomial, no
    /// randomness, no cost.
    pub fn constant_int(&mut self, value: &BigInt) -> Result<SecretInt> {
        let bits = value.magnitude().bits().max(1) as u32;
        if bits > self.cfg.field.capacity_bits() {
            return Err(Error::Overflow(format!(
                "constant {value} exceeds field capacity"
            )));
        }
        let encoded = self.cfg.field.encode_signed(value)?;
        let id = self.alloc_handle();
        let values = vec![encoded; self.cfg.parties];
        self.store_shares(id, values, self.cfg.threshold);
        Ok(SecretInt { id, bits })
    }

    fn collect_shares(&self, id: HandleId) -> Result<Vec<Share>> {
        self.parties
            .iter()
            .map(|p| {
                p.store
                    .get(&id)
                    .cloned()
                    .ok_or_else(|| Error::Scheduling(format!("handle {id} is not materialized")))
            })
            .collect()
    }

    /// Reconstructs from the first t+1 shares and verifies every further
    /// share sits on the same polynomial.
    fn reconstruct_checked(&self, shares: &[Share]) -> Result<FieldElement> {
        let t = self.cfg.threshold;
        let mut value = self.cfg.field.zero();
        for (share, lambda) in shares.iter().take(t + 1).zip(&self.lagrange_head_zero) {
            value = value.add(&share.value.mul(lambda)?)?;
        }
        for (j, share) in shares.iter().enumerate().skip(t + 1) {
            let lambdas = &self.lagrange_head_to[j - (t + 1)];
            let mut expected = self.cfg.field.zero();
            for (s, lambda) in shares.iter().take(t + 1).zip(lambdas) {
                expected = expected.add(&s.value.mul(lambda)?)?;
            }
            if expected != share.value {
                return Err(Error::Integrity(format!(
                    "share of party {} does not lie on the degree-{t} polynomial",
                    j + 1
                )));
            }
        }
        Ok(value)
    }

    /// Dealer-side reconstruction and sign decode of one operand, with a
    /// declared-bitlength check.
    fn dealer_decode(&self, input: GateInput) -> Result<BigInt> {
        let shares = self.collect_shares(input.id)?;
        let value = self.reconstruct_checked(&shares)?;
        let decoded = self.cfg.field.decode_signed(&value);
        let bits = decoded.magnitude().bits() as u32;
        if bits > input.bits {
            return Err(Error::Overflow(format!(
                "reconstructed value needs {bits} bits but was declared at {}",
                input.bits
            )));
        }
        Ok(decoded)
    }

    fn send(&mut self, from: PartyId, to: PartyId, value: FieldElement) {
        let round = self.ledger.rounds;
        self.ledger.bytes_sent += self.cfg.field.element_bytes();
        self.queues[from * self.cfg.parties + to].push_back(Message {
            sent_round: round,
            value,
        });
    }

    fn recv(&mut self, from: PartyId, to: PartyId) -> FieldElement {
        let msg = self.queues[from * self.cfg.parties + to]
            .pop_front()
            .expect("synchrony bug: expected message is missing");
        assert!(
            msg.sent_round < self.ledger.rounds,
            "synchrony bug: party {to} read a message party {from} sent in the current round"
        );
        msg.value
    }

    /// Executes one batch of independent gates. Ledger: ops advance by
    /// the summed per-gate charge, rounds by the maximum round charge
    /// over the gate kinds present.
    pub(crate) fn run_gates(&mut self, gates: &[GateInstance]) -> Result<()> {
        if gates.is_empty() {
            return Ok(());
        }
        let n = self.cfg.parties;
        let t = self.cfg.threshold;

        let mut kind_counts: BTreeMap<GateKind, u64> = BTreeMap::new();
        for g in gates {
            *kind_counts.entry(g.kind).or_insert(0) += 1;
        }
        let max_rounds = kind_counts
            .keys()
            .map(|&k| self.table.cost(k).rounds)
            .max()
            .unwrap_or(0);
        for (&kind, &count) in &kind_counts {
            let cost = self.table.cost(kind);
            self.ledger.charge(kind, count, cost);
        }

        // Phase 1: local computation and message sends (tagged with the
        // pre-advance round).
        // For multiplication, party i computes the degree-2t local product
        // h_i = a_i·b_i, reshares it at degree t with its own generator and
        // sends one sub-share to every other party.
        let mut own_subshare: HashMap<(usize, PartyId), FieldElement> = HashMap::new();
        let mut deferred_stores: Vec<(HandleId, Vec<FieldElement>)> = Vec::new();
        let two_pow_f = BigUint::one() << self.cfg.frac_bits;
        let scale_f = self.cfg.field.element(two_pow_f.clone());

        if let Err(err) = self.execute_phase_one(
            gates,
            n,
            t,
            &two_pow_f,
            &scale_f,
            &mut own_subshare,
            &mut deferred_stores,
        ) {
            // A failed gate (e.g. a zero divisor) aborts the batch; drop
            // any sub-shares already queued so the network stays usable.
            for q in &mut self.queues {
                q.clear();
            }
            return Err(err);
        }

        // Round advances; messages sent above become visible.
        self.ledger.rounds += max_rounds;

        // Phase 2: receive and recombine. Each party's share of a product
        // is the Lagrange-weighted sum (points 1..n at 0) of the
        // sub-shares it received.
        for (g_idx, gate) in gates.iter().enumerate() {
            if let GateOp::Mul { .. } = gate.op {
                let mut out_values = Vec::with_capacity(n);
                for j in 0..n {
                    let mut acc = self.cfg.field.zero();
                    for i in 0..n {
                        let sub = if i == j {
                            own_subshare
                                .remove(&(g_idx, i))
                                .expect("own sub-share recorded in phase 1")
                        } else {
                            self.recv(i, j)
                        };
                        acc = acc.add(&sub.mul(&self.lagrange_all_zero[i])?)?;
                    }
                    out_values.push(acc);
                }
                self.store_shares(gate.out, out_values, t);
            }
        }
        for (out, values) in deferred_stores {
            self.store_shares(out, values, t);
        }

        debug_assert!(
            self.queues.iter().all(VecDeque::is_empty),
            "simulation bug: undelivered messages at end of batch"
        );
        Ok(())
    }

    #[allow(clippy::too_many_arguments)]
    fn execute_phase_one(
        &mut self,
        gates: &[GateInstance],
        n: usize,
        t: usize,
        two_pow_f: &BigUint,
        scale_f: &FieldElement,
        own_subshare: &mut HashMap<(usize, PartyId), FieldElement>,
        deferred_stores: &mut Vec<(HandleId, Vec<FieldElement>)>,
    ) -> Result<()> {
        for (g_idx, gate) in gates.iter().enumerate() {
            match gate.op {
                GateOp::Mul { a, b } => {
                    for i in 0..n {
                        let sa = self.parties[i].store[&a.id].value.clone();
                        let sb = self.parties[i].store[&b.id].value.clone();
                        let product = sa.mul(&sb)?; // point on a degree-2t polynomial
                        let sub = shamir::share_with_degree(&product, n, t, &mut self.parties[i].rng)?;
                        for (j, share) in sub.into_iter().enumerate() {
                            if j == i {
                                own_subshare.insert((g_idx, i), share.value);
                            } else {
                                self.send(i, j, share.value);
                            }
                        }
                    }
                }
                GateOp::IntDiv { a, b } => {
                    let (da, db) = (self.dealer_decode(a)?, self.dealer_decode(b)?);
                    if db.is_zero() {
                        return Err(Error::DivisionByZero(Some(
                            "integer division gate".into(),
                        )));
                    }
                    let q = da / db; // truncation toward zero
                    self.ledger.bytes_sent += 3 * n as u64 * self.cfg.field.element_bytes();
                    let encoded = self.cfg.field.encode_signed(&q)?;
                    let shares = self.dealer_share_values(&encoded)?;
                    deferred_stores.push((gate.out, shares));
                }
                GateOp::FixedDiv { a, b } => {
                    let (da, db) = (self.dealer_decode(a)?, self.dealer_decode(b)?);
                    if db.is_zero() {
                        return Err(Error::DivisionByZero(Some(
                            "fixed-point division gate".into(),
                        )));
                    }
                    let raw = (da << self.cfg.frac_bits) / db;
                    self.ledger.bytes_sent += 3 * n as u64 * self.cfg.field.element_bytes();
                    let encoded = self.cfg.field.encode_signed(&raw)?;
                    let shares = self.dealer_share_values(&encoded)?;
                    deferred_stores.push((gate.out, shares));
                }
                GateOp::FixedMul { a, b } => {
                    let (da, db) = (self.dealer_decode(a)?, self.dealer_decode(b)?);
                    let raw = (da * db) / BigInt::from(two_pow_f.clone());
                    self.ledger.bytes_sent += 3 * n as u64 * self.cfg.field.element_bytes();
                    let encoded = self.cfg.field.encode_signed(&raw)?;
                    let shares = self.dealer_share_values(&encoded)?;
                    deferred_stores.push((gate.out, shares));
                }
                GateOp::IntToFixed { a } => {
                    let values = (0..n)
                        .map(|i| self.parties[i].store[&a.id].value.mul(scale_f))
                        .collect::<Result<Vec<_>>>()?;
                    deferred_stores.push((gate.out, values));
                }
                GateOp::FixedAdd { a, b, negate_b } => {
                    let values = (0..n)
                        .map(|i| {
                            let sa = &self.parties[i].store[&a.id].value;
                            let sb = &self.parties[i].store[&b.id].value;
                            if negate_b {
                                sa.sub(sb)
                            } else {
                                sa.add(sb)
                            }
                        })
                        .collect::<Result<Vec<_>>>()?;
                    deferred_stores.push((gate.out, values));
                }
            }
        }
        Ok(())
    }

    /// Free share-wise addition or subtraction (no messages, no cost).
    pub(crate) fn linear_combine(
        &mut self,
        a: &SecretInt,
        b: &SecretInt,
        subtract: bool,
    ) -> Result<SecretInt> {
        for x in [a, b] {
            if !self.is_materialized(x.id) {
                return Err(Error::Scheduling(format!(
                    "handle {} is not materialized",
                    x.id
                )));
            }
        }
        let bits = a.bits.max(b.bits) + 1;
        let cap = self.cfg.field.capacity_bits();
        if bits > cap {
            return Err(Error::Overflow(format!(
                "sum needs {bits} bits, field capacity is {cap}"
            )));
        }
        let values = self
            .parties
            .iter()
            .map(|p| {
                let sa = &p.store[&a.id].value;
                let sb = &p.store[&b.id].value;
                if subtract {
                    sa.sub(sb)
                } else {
                    sa.add(sb)
                }
            })
            .collect::<Result<Vec<_>>>()?;
        let id = self.alloc_handle();
        self.store_shares(id, values, self.cfg.threshold);
        Ok(SecretInt { id, bits })
    }

    /// Free share-wise scaling by a public constant (no messages, no cost).
    pub(crate) fn scale_shares(&mut self, a: &SecretInt, c: &BigInt, bits: u32) -> Result<SecretInt> {
        if !self.is_materialized(a.id) {
            return Err(Error::Scheduling(format!(
                "handle {} is not materialized",
                a.id
            )));
        }
        let encoded = self.cfg.field.encode_signed(c)?;
        let values = self
            .parties
            .iter()
            .map(|p| p.store[&a.id].value.mul(&encoded))
            .collect::<Result<Vec<_>>>()?;
        let id = self.alloc_handle();
        self.store_shares(id, values, self.cfg.threshold);
        Ok(SecretInt { id, bits })
    }

    fn open_raw(&mut self, id: HandleId, declared_bits: u32) -> Result<BigInt> {
        let cost = self.table.cost(GateKind::Open);
        self.ledger.charge(GateKind::Open, 1, cost);
        self.ledger.rounds += cost.rounds;
        self.ledger.bytes_sent += self.cfg.parties as u64 * self.cfg.field.element_bytes();
        let shares = self.collect_shares(id)?;
        let value = self.reconstruct_checked(&shares)?;
        let decoded = self.cfg.field.decode_signed(&value);
        let bits = decoded.magnitude().bits() as u32;
        if bits > declared_bits {
            return Err(Error::Overflow(format!(
                "opened value needs {bits} bits but was declared at {declared_bits}"
            )));
        }
        Ok(decoded)
    }

    /// Opens a secret integer: reconstruction plus sign decode. Charges
    /// one open gate.
    pub fn open_int(&mut self, x: &SecretInt) -> Result<BigInt> {
        self.open_raw(x.id, x.bits)
    }

    /// Opens a fixed-point value exactly (raw integer over 2^f).
    pub fn open_fixed(&mut self, x: &SecretFixed) -> Result<FixedValue> {
        let raw = self.open_raw(x.raw.id, x.raw.bits)?;
        Ok(FixedValue::new(raw, x.frac_bits))
    }

    #[cfg(test)]
    pub(crate) fn all_shares_have_degree(&self, x: &SecretInt, degree: usize) -> bool {
        self.parties
            .iter()
            .all(|p| p.store.get(&x.id).is_some_and(|s| s.degree == degree))
    }
}

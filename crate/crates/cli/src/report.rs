//! Run reports: a flat key=value block for humans (with wall-clock) and
//! a reproducible JSON document for machines (no timing, byte-identical
//! across identically-seeded runs).

use serde::{Deserialize, Serialize};
use shardstat::engine::LedgerReport;
use shardstat::protocols::FixedValue;

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct ConfigEcho {
    pub parties: usize,
    pub threshold: usize,
    /// Decimal modulus.
    pub prime: String,
    /// The seed the run resolved to (echoed so fresh-entropy runs stay
    /// reproducible).
    pub seed: u64,
    pub frac_bits: u32,
    pub prec: u32,
    pub max_bits: u32,
    pub cost_profile: String,
    pub inputs: Vec<String>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct ResultEcho {
    /// Exact decimal rendering of the opened fixed-point result.
    pub decimal: String,
    /// Raw integer (result = raw / 2^frac_bits).
    pub raw: String,
    pub frac_bits: u32,
}

impl ResultEcho {
    pub fn from_fixed(v: &FixedValue) -> Self {
        ResultEcho {
            decimal: v.decimal_string(),
            raw: v.raw().to_string(),
            frac_bits: v.frac_bits(),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct MachineReport {
    pub program: String,
    pub config: ConfigEcho,
    pub result: ResultEcho,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub degrees_of_freedom: Option<u64>,
    pub ledger: LedgerReport,
}

impl MachineReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> anyhow::Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// The flat key=value rendering; `wall_ms` is appended only here so
    /// the machine document stays reproducible.
    pub fn human_block(&self, wall_ms: f64) -> String {
        let mut out = String::new();
        let mut kv = |k: &str, v: String| {
            out.push_str(k);
            out.push('=');
            out.push_str(&v);
            out.push('\n');
        };
        kv("program", self.program.clone());
        kv("parties", self.config.parties.to_string());
        kv("threshold", self.config.threshold.to_string());
        kv("prime", self.config.prime.clone());
        kv("seed", self.config.seed.to_string());
        kv("frac_bits", self.config.frac_bits.to_string());
        kv("prec", self.config.prec.to_string());
        kv("max_bits", self.config.max_bits.to_string());
        kv("cost_profile", self.config.cost_profile.clone());
        kv("inputs", self.config.inputs.join(","));
        kv("result", self.result.decimal.clone());
        kv("result_raw", self.result.raw.clone());
        if let Some(df) = self.degrees_of_freedom {
            kv("degrees_of_freedom", df.to_string());
        }
        kv("interactive_ops", self.ledger.interactive_ops.to_string());
        kv("rounds", self.ledger.rounds.to_string());
        kv("bytes_sent", self.ledger.bytes_sent.to_string());
        for (kind, totals) in &self.ledger.per_gate {
            kv(&format!("gate.{kind}.ops"), totals.ops.to_string());
            kv(&format!("gate.{kind}.rounds"), totals.rounds.to_string());
        }
        kv("wall_clock_ms", format!("{wall_ms:.3}"));
        out
    }
}

/// Cost and timing of one program variant at one sweep size.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BenchVariant {
    pub wall_ms: f64,
    pub interactive_ops: u64,
    pub rounds: u64,
    pub fixed_divs: u64,
    /// Rounds contributed by the phase the variant pair differs in
    /// (squared differences for stddev, cell summation for chisq).
    pub phase_rounds: u64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BenchRow {
    pub size: String,
    pub optimized: BenchVariant,
    pub unoptimized: BenchVariant,
    /// What `reduction_pct` measures: the division-gate reduction for
    /// chi-squared, the squared-difference round reduction for stddev.
    pub reduction_metric: String,
    pub reduction_pct: f64,
}

pub fn bench_table(rows: &[BenchRow]) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "{:<10} {:>10} {:>8} {:>8} {:>7} | {:>10} {:>8} {:>8} {:>7} | {:>9}\n",
        "size",
        "opt_ops",
        "rounds",
        "fdivs",
        "ms",
        "unopt_ops",
        "rounds",
        "fdivs",
        "ms",
        "reduction"
    ));
    for r in rows {
        out.push_str(&format!(
            "{:<10} {:>10} {:>8} {:>8} {:>7.1} | {:>10} {:>8} {:>8} {:>7.1} | {:>8.2}%\n",
            r.size,
            r.optimized.interactive_ops,
            r.optimized.rounds,
            r.optimized.fixed_divs,
            r.optimized.wall_ms,
            r.unoptimized.interactive_ops,
            r.unoptimized.rounds,
            r.unoptimized.fixed_divs,
            r.unoptimized.wall_ms,
            r.reduction_pct,
        ));
    }
    if let Some(first) = rows.first() {
        out.push_str(&format!("reduction metric: {}\n", first.reduction_metric));
    }
    out
}

pub fn bench_json(rows: &[BenchRow]) -> String {
    let mut s = serde_json::to_string_pretty(rows).expect("bench rows serialize");
    s.push('\n');
    s
}

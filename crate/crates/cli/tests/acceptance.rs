//! Acceptance suite: one test per acceptance criterion, each printing a
//! pass line (run with `cargo test --test acceptance -- --nocapture` to
//! see them). Every tolerance is pinned in code.

use std::process::Command;
use std::time::Instant;

use num_bigint::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use shardstat::engine::{CostProfile, Engine, EngineConfig, GateKind};
use shardstat::oracle;
use shardstat::shamir::{self, SharingConfig};
use shardstat::stats::{self, ChiSqInput, ChiSqVariant, Schedule, StdDevInput};
use shardstat::{Error, PrimeField};
use shardstat_cli::bench;

fn cfg(seed: u64) -> EngineConfig {
    EngineConfig {
        seed: Some(seed),
        ..EngineConfig::default()
    }
}

/// Criterion 1: on 500 seeded random inputs per program, opened secure
/// results equal the exact stddev oracle and match the real-valued
/// chi-squared oracle within relative 1e-3 at f = 20, in under 5 minutes.
#[test]
fn criterion_01_correctness_vs_oracle() {
    let started = Instant::now();
    let mut rng = ChaCha12Rng::seed_from_u64(0xACCE01);

    for case in 0..500u64 {
        let total = rng.gen_range(8usize..=4096);
        let n_parties = rng.gen_range(1usize..=4).min(total);
        let mut parties: Vec<Vec<i64>> = vec![Vec::new(); n_parties];
        for idx in 0..total {
            parties[idx % n_parties].push(rng.gen_range(0i64..=1000));
        }
        let input = StdDevInput::new(parties).unwrap();
        let flat = input.flattened();
        let secure = stats::run_stddev(cfg(case), &input, 1, Schedule::Batched, None);
        let expected = oracle::stddev_exact(&flat, 1, 20, None);
        match (secure, expected) {
            (Ok(run), Ok(v)) => assert_eq!(run.value, v, "stddev case {case}"),
            (Err(Error::DivisionByZero(_)), Err(Error::DivisionByZero(_))) => {}
            (s, e) => panic!("stddev case {case}: secure {s:?} vs oracle {e:?}"),
        }
    }

    for case in 0..500u64 {
        let n = *[2usize, 4, 8].get(rng.gen_range(0..3)).unwrap();
        let m = rng.gen_range(2usize..=64);
        let counts: Vec<Vec<u64>> = (0..n)
            .map(|_| (0..m).map(|_| rng.gen_range(1u64..=100)).collect())
            .collect();
        let input = ChiSqInput::new(counts.clone()).unwrap();
        let run = stats::run_chisq(cfg(1000 + case), &input, ChiSqVariant::Optimized).unwrap();
        let (reference, df) = oracle::chisq_real(&counts);
        assert_eq!(run.degrees_of_freedom, Some(df));
        let rel = (run.value.to_f64() - reference).abs() / reference.max(1e-30);
        assert!(
            rel <= 1e-3,
            "chisq case {case} ({n}x{m}): relative error {rel}"
        );
    }

    let elapsed = started.elapsed();
    assert!(
        elapsed.as_secs() < 300,
        "runtime budget exceeded: {elapsed:?}"
    );
    println!(
        "[PASS] criterion 1: 500+500 random runs match oracles (stddev exact, chisq rel<=1e-3) in {elapsed:.1?}"
    );
}

/// Criterion 2: wall-clock numbers from other hardware and frameworks
/// are not reproducible here; instead, every chi-squared bench run at
/// the reference dimension grid finishes in under 10 s and the ledger
/// shows nm vs 2nm fixed divisions (>= 50% division-gate reduction) at
/// every size.
#[test]
fn criterion_02_bench_substitute_for_wallclock_tables() {
    let rows = bench::bench_chisq(&EngineConfig::default(), &bench::CHISQ_DIMS, 7).unwrap();
    assert_eq!(rows.len(), 10);
    assert!(rows.iter().any(|r| r.size == "4x4"));
    assert!(rows.iter().any(|r| r.size == "8x64"));
    for row in &rows {
        let (n, m) = bench::parse_chisq_sweep(&row.size).unwrap()[0];
        let cells = (n * m) as u64;
        assert!(
            row.optimized.wall_ms < 10_000.0 && row.unoptimized.wall_ms < 10_000.0,
            "{}: runs must stay under 10 s, got {:.1} / {:.1} ms",
            row.size,
            row.optimized.wall_ms,
            row.unoptimized.wall_ms
        );
        assert_eq!(row.optimized.fixed_divs, cells, "{}", row.size);
        assert_eq!(row.unoptimized.fixed_divs, 2 * cells, "{}", row.size);
        assert!(row.reduction_pct >= 50.0, "{}", row.size);
    }
    println!(
        "[PASS] criterion 2: 4x4..8x64 grid runs in {:.1}-{:.1} ms, fixed divisions nm vs 2nm (50% cut) at all 10 sizes",
        rows.iter().map(|r| r.optimized.wall_ms).fold(f64::MAX, f64::min),
        rows.iter().map(|r| r.unoptimized.wall_ms).fold(0.0, f64::max),
    );
}

/// Criterion 3: the squared-difference phase takes exactly 1 round
/// batched vs N rounds sequential, at N in {16, 256, 4096}.
#[test]
fn criterion_03_batching_claim() {
    for n in [16usize, 256, 4096] {
        let values: Vec<i64> = (0..n as i64).map(|i| (i * 37 + 11) % 1000).collect();
        let input = StdDevInput::new(vec![values]).unwrap();
        let batched = stats::run_stddev(cfg(3), &input, 1, Schedule::Batched, None).unwrap();
        let sequential = stats::run_stddev(cfg(3), &input, 1, Schedule::Sequential, None).unwrap();
        assert_eq!(
            batched.phase_delta("squared_differences").unwrap().rounds,
            1,
            "N={n}"
        );
        assert_eq!(
            sequential.phase_delta("squared_differences").unwrap().rounds,
            n as u64,
            "N={n}"
        );
        assert_eq!(batched.value, sequential.value, "same arithmetic either way");
    }
    println!("[PASS] criterion 3: squared-difference phase is 1 round batched vs N rounds sequential at N in {{16, 256, 4096}}");
}

/// Criterion 4: under the PICCO-emulation profile the chi-squared
/// summation phase adds exactly ceil(log2(nm)) rounds.
#[test]
fn criterion_04_tree_sum_depth() {
    for (n, m) in [(2usize, 2usize), (4, 4), (8, 8), (8, 64)] {
        let cells = n * m;
        let counts: Vec<Vec<u64>> = (0..n)
            .map(|i| (0..m).map(|j| 1 + ((i * 31 + j * 7) % 100) as u64).collect())
            .collect();
        let input = ChiSqInput::new(counts).unwrap();
        let config = EngineConfig {
            seed: Some(4),
            profile: CostProfile::PiccoEmulation,
            ..EngineConfig::default()
        };
        let run = stats::run_chisq(config, &input, ChiSqVariant::Optimized).unwrap();
        let depth = (cells as f64).log2().ceil() as u64;
        assert_eq!(
            run.phase_delta("summation").unwrap().rounds,
            depth,
            "nm={cells}"
        );
    }
    println!("[PASS] criterion 4: summation phase adds ceil(log2(nm)) rounds for nm in {{4, 16, 64, 512}} under picco-emulation");
}

/// Criterion 5: the square root's ledger footprint is identical for all
/// inputs (prec+10 multiplications, prec+10 integer divisions, same
/// rounds), and sqrt(4) at prec 1 opens to exactly 2.0.
#[test]
fn criterion_05_sqrt_schedule_privacy() {
    let mut rng = ChaCha12Rng::seed_from_u64(0xACCE05);
    let mut reference = None;
    for _ in 0..100 {
        let a = rng.gen_range(1i64..=1_000_000_000_000);
        let mut engine = Engine::new(cfg(5)).unwrap();
        let s = engine.distribute_value(&BigInt::from(a)).unwrap();
        let before = engine.ledger_report();
        let _ = stats::sqrt_newton(&mut engine, &s, 1, None).unwrap();
        let delta = engine.ledger_report().delta_since(&before);
        assert_eq!(delta.gate_ops(GateKind::SecretMul), 11, "input {a}");
        assert_eq!(delta.gate_ops(GateKind::IntDiv), 11, "input {a}");
        match &reference {
            None => reference = Some(delta),
            Some(r) => assert_eq!(&delta, r, "ledger delta differs for input {a}"),
        }
    }

    let mut engine = Engine::new(cfg(5)).unwrap();
    let four = engine.distribute_value(&BigInt::from(4)).unwrap();
    let root = stats::sqrt_newton(&mut engine, &four, 1, None).unwrap();
    let opened = engine.open_fixed(&root).unwrap();
    assert_eq!(opened, shardstat::FixedValue::from_integer(2, 20));
    println!("[PASS] criterion 5: sqrt ledger delta identical over 100 random inputs (11 muls, 11 divs); sqrt(4, prec 1) = 2.0 exactly");
}

/// Criterion 6: sharing-layer checks. Round-trip on 1000 random secrets
/// for (3,1) and (5,2); statistical privacy of a single share over
/// p = 101 (TV < 0.02 at 1e5 samples); secure multiplication matches
/// plaintext on 1000 random signed pairs.
#[test]
fn criterion_06_sharing_layer() {
    let field = PrimeField::default_field();
    for (n, t) in [(3usize, 1usize), (5, 2)] {
        let sharing = SharingConfig::new(n, t, field.clone(), 6).unwrap();
        let mut rng = sharing.stream_rng(0);
        for _ in 0..1000 {
            let secret = field.random_element(&mut rng);
            let shares = sharing.share(&secret, &mut rng).unwrap();
            assert_eq!(shamir::reconstruct(&shares, 0).unwrap(), secret);
        }
    }

    let small = PrimeField::new(101u32.into()).unwrap();
    let sharing = SharingConfig::new(3, 1, small.clone(), 999).unwrap();
    let samples = 100_000usize;
    let observe = |secret_value: u64, stream: u64| -> Vec<f64> {
        let mut rng = sharing.stream_rng(stream);
        let secret = small.element_from_u64(secret_value);
        let mut counts = vec![0u64; 101];
        for _ in 0..samples {
            let shares = sharing.share(&secret, &mut rng).unwrap();
            let v: u64 = shares[0].value.value().try_into().unwrap();
            counts[v as usize] += 1;
        }
        counts.iter().map(|&c| c as f64 / samples as f64).collect()
    };
    let d0 = observe(5, 0);
    let d1 = observe(77, 1);
    let tv: f64 = d0.iter().zip(&d1).map(|(a, b)| (a - b).abs()).sum::<f64>() / 2.0;
    assert!(tv < 0.02, "total-variation distance {tv}");

    let mut engine = Engine::new(cfg(6)).unwrap();
    let mut rng = ChaCha12Rng::seed_from_u64(0xACCE06);
    for _ in 0..1000 {
        let (x, y) = (
            rng.gen_range(-1_000_000i64..=1_000_000),
            rng.gen_range(-1_000_000i64..=1_000_000),
        );
        let a = engine.distribute_value(&BigInt::from(x)).unwrap();
        let b = engine.distribute_value(&BigInt::from(y)).unwrap();
        let p = engine.mul_secret(&a, &b).unwrap();
        assert_eq!(
            engine.open_int(&p).unwrap(),
            BigInt::from(x as i128 * y as i128)
        );
    }
    println!("[PASS] criterion 6: share round-trips for (3,1) and (5,2); single-share TV distance {tv:.4} < 0.02; 1000 secret products match plaintext");
}

/// Criterion 7: the textbook and restructured chi-squared forms agree to
/// 1e-9 relative in the oracle on 100 random non-degenerate matrices;
/// df = (n-1)(m-1) on all tested shapes.
#[test]
fn criterion_07_chisq_algebraic_identity() {
    let mut rng = ChaCha12Rng::seed_from_u64(0xACCE07);
    for case in 0..100 {
        let n = rng.gen_range(2usize..=8);
        let m = rng.gen_range(2usize..=16);
        let matrix: Vec<Vec<u64>> = (0..n)
            .map(|_| (0..m).map(|_| rng.gen_range(1u64..=100)).collect())
            .collect();
        let (a, dfa) = oracle::chisq_real(&matrix);
        let (b, dfb) = oracle::chisq_real_restructured(&matrix);
        let rel = (a - b).abs() / a.abs().max(1e-30);
        assert!(rel <= 1e-9, "case {case}: relative gap {rel}");
        assert_eq!(dfa, dfb);
        assert_eq!(dfa, (n as u64 - 1) * (m as u64 - 1));
    }
    let (_, df) = oracle::chisq_real(&vec![vec![1u64; 4]; 4]);
    assert_eq!(df, 9, "4x4 has df 9");
    println!("[PASS] criterion 7: textbook and restructured forms agree to 1e-9 relative on 100 matrices; df = (n-1)(m-1)");
}

/// Criterion 8: two full `run` invocations with identical seeds produce
/// byte-identical machine-readable reports.
#[test]
fn criterion_08_determinism_of_machine_reports() {
    let bin = env!("CARGO_BIN_EXE_shardstat");
    let dir = tempfile::tempdir().unwrap();
    let gen = Command::new(bin)
        .args([
            "gen-inputs",
            "--program",
            "chisq",
            "--rows",
            "4",
            "--cols",
            "8",
            "--seed",
            "11",
            "--out-dir",
        ])
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(gen.status.success(), "{}", String::from_utf8_lossy(&gen.stderr));

    let run_once = || {
        let mut cmd = Command::new(bin);
        cmd.args(["run", "--program", "chisq", "--seed", "11", "--format", "machine"]);
        for party in 1..=4 {
            cmd.arg("--input").arg(dir.path().join(format!("party{party}.txt")));
        }
        let out = cmd.output().unwrap();
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        out.stdout
    };
    let first = run_once();
    let second = run_once();
    assert!(!first.is_empty());
    assert_eq!(first, second, "machine reports must be byte-identical");

    // same for stddev
    let gen = Command::new(bin)
        .args([
            "gen-inputs", "--program", "stddev", "--sizes", "16,16", "--seed", "12", "--out-dir",
        ])
        .arg(dir.path().join("sd"))
        .output()
        .unwrap();
    assert!(gen.status.success());
    let run_sd = || {
        let mut cmd = Command::new(bin);
        cmd.args(["run", "--program", "stddev", "--seed", "12", "--format", "machine"]);
        for party in 1..=2 {
            cmd.arg("--input")
                .arg(dir.path().join("sd").join(format!("party{party}.txt")));
        }
        let out = cmd.output().unwrap();
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        out.stdout
    };
    assert_eq!(run_sd(), run_sd());
    println!("[PASS] criterion 8: identical seeds give byte-identical machine reports (chisq and stddev)");
}

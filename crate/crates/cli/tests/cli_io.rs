//! End-to-end checks of the binary: file formats, report round-trips,
//! exit codes.

use std::process::Command;

use shardstat::engine::EngineConfig;
use shardstat::stats::{self, ChiSqInput, ChiSqVariant};
use shardstat_cli::report::MachineReport;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_shardstat"))
}

#[test]
fn gen_inputs_is_deterministic_and_honors_ranges() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for out in [&a, &b] {
        let output = bin()
            .args(["gen-inputs", "--program", "chisq", "--rows", "3", "--cols", "5", "--seed", "9", "--out-dir"])
            .arg(out)
            .output()
            .unwrap();
        assert!(output.status.success());
    }
    for party in 1..=3 {
        let fa = std::fs::read(a.join(format!("party{party}.txt"))).unwrap();
        let fb = std::fs::read(b.join(format!("party{party}.txt"))).unwrap();
        assert_eq!(fa, fb, "same seed must give byte-identical files");
        let text = String::from_utf8(fa).unwrap();
        assert!(text.starts_with(&format!("# seed=9 party={party}\n")));
        let row = shardstat_cli::inputs::read_chisq_file(&a.join(format!("party{party}.txt"))).unwrap();
        assert_eq!(row.len(), 5);
        assert!(row.iter().all(|&v| (1..=100).contains(&v)));
    }
}

#[test]
fn gen_inputs_stddev_matches_requested_split() {
    let dir = tempfile::tempdir().unwrap();
    let output = bin()
        .args(["gen-inputs", "--program", "stddev", "--sizes", "8,3,21", "--seed", "4", "--out-dir"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(output.status.success());
    let lens: Vec<usize> = (1..=3)
        .map(|p| {
            shardstat_cli::inputs::read_stddev_file(&dir.path().join(format!("party{p}.txt")))
                .unwrap()
                .len()
        })
        .collect();
    assert_eq!(lens, vec![8, 3, 21]);
}

#[test]
fn machine_report_roundtrips_ledger_counters() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("p1.txt"), "40 12 9\n").unwrap();
    std::fs::write(dir.path().join("p2.txt"), "7 33 20\n").unwrap();
    let out = bin()
        .args(["run", "--program", "chisq-unopt", "--seed", "5", "--format", "machine"])
        .arg("--input")
        .arg(dir.path().join("p1.txt"))
        .arg("--input")
        .arg(dir.path().join("p2.txt"))
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let report = MachineReport::from_json(&String::from_utf8(out.stdout).unwrap()).unwrap();
    assert_eq!(report.program, "chisq-unopt");
    assert_eq!(report.degrees_of_freedom, Some(2));

    // re-run through the library: parsed counters must match exactly
    let input = ChiSqInput::new(vec![vec![40, 12, 9], vec![7, 33, 20]]).unwrap();
    let cfg = EngineConfig {
        seed: Some(5),
        ..EngineConfig::default()
    };
    let run = stats::run_chisq(cfg, &input, ChiSqVariant::Unoptimized).unwrap();
    assert_eq!(report.ledger, run.ledger);
    assert_eq!(report.result.decimal, run.value.decimal_string());
}

#[test]
fn human_report_is_a_key_value_block() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("p1.txt"), "2\n4\n4\n4\n5\n5\n7\n9\n").unwrap();
    let out = bin()
        .args(["run", "--program", "stddev", "--seed", "1"])
        .arg("--input")
        .arg(dir.path().join("p1.txt"))
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    for key in [
        "program=stddev",
        "result=2.0",
        "interactive_ops=",
        "rounds=",
        "gate.secret_mul.ops=",
        "wall_clock_ms=",
    ] {
        assert!(text.contains(key), "missing `{key}` in:\n{text}");
    }
    assert!(
        text.lines().all(|l| l.contains('=')),
        "every line is key=value"
    );
}

#[test]
fn missing_input_file_fails_with_diagnostic() {
    let out = bin()
        .args(["run", "--program", "stddev", "--input", "does-not-exist.txt"])
        .output()
        .unwrap();
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("does-not-exist.txt"), "{err}");
}

#[test]
fn degenerate_chisq_input_names_the_zero_marginal() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("p1.txt"), "1 0\n").unwrap();
    std::fs::write(dir.path().join("p2.txt"), "3 0\n").unwrap();
    let out = bin()
        .args(["run", "--program", "chisq", "--seed", "1"])
        .arg("--input")
        .arg(dir.path().join("p1.txt"))
        .arg("--input")
        .arg(dir.path().join("p2.txt"))
        .output()
        .unwrap();
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("column 2"), "{err}");
}

#[test]
fn malformed_input_reports_file_and_line() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.txt");
    std::fs::write(&path, "1\n2\nxyz\n").unwrap();
    let out = bin()
        .args(["run", "--program", "stddev", "--seed", "1"])
        .arg("--input")
        .arg(&path)
        .output()
        .unwrap();
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("bad.txt") && err.contains("line 3"), "{err}");
}

#[test]
fn config_file_is_loaded_and_flags_override_it() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("p1.txt"), "1\n2\n3\n4\n").unwrap();
    let config = format!(
        "program = \"stddev\"\nseed = 21\nparties = 5\nthreshold = 2\nformat = \"machine\"\ninputs = [\"{}\"]\n",
        dir.path().join("p1.txt").display()
    );
    let cfg_path = dir.path().join("run.toml");
    std::fs::write(&cfg_path, config).unwrap();

    let out = bin().arg("run").arg("--config").arg(&cfg_path).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report = MachineReport::from_json(&String::from_utf8(out.stdout).unwrap()).unwrap();
    assert_eq!(report.config.parties, 5);
    assert_eq!(report.config.threshold, 2);
    assert_eq!(report.config.seed, 21);

    // --seed on the command line wins over the file
    let out = bin()
        .arg("run")
        .arg("--config")
        .arg(&cfg_path)
        .args(["--seed", "99"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let report = MachineReport::from_json(&String::from_utf8(out.stdout).unwrap()).unwrap();
    assert_eq!(report.config.seed, 99);
}

#[test]
fn bench_subcommand_emits_both_formats() {
    let out = bin()
        .args(["bench", "--program", "chisq", "--sweep", "2x2,2x4", "--seed", "3"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("2x2") && text.contains("50.00%"), "{text}");

    let out = bin()
        .args(["bench", "--program", "stddev", "--sweep", "16", "--seed", "3", "--format", "machine"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let rows: serde_json::Value =
        serde_json::from_str(&String::from_utf8(out.stdout).unwrap()).unwrap();
    assert_eq!(rows[0]["size"], "16");
}

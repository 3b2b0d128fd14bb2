//! Command-line front end: input ingestion per party, run configuration,
//! program execution, result and cost reporting, benchmark sweeps.

pub mod args;
pub mod bench;
pub mod inputs;
pub mod report;

use std::time::Instant;

use anyhow::{bail, Context};
use clap::Parser;

use args::{BenchArgs, Cli, Command, GenInputsArgs, OutputFormat, ProgramKind, RunArgs, RunConfig};
use report::{ConfigEcho, MachineReport, ResultEcho};
use shardstat::engine::EngineConfig;
use shardstat::stats::{self, ChiSqInput, ChiSqVariant, ProgramRun, Schedule, StdDevInput};

pub fn run_main() -> anyhow::Result<()> {
    let cli = Cli::parse();
    match cli.command {
        Command::Run(args) => {
            let out = cmd_run(&args)?;
            print!("{out}");
            Ok(())
        }
        Command::Bench(args) => {
            let out = cmd_bench(&args)?;
            print!("{out}");
            Ok(())
        }
        Command::GenInputs(args) => {
            for path in cmd_gen_inputs(&args)? {
                println!("{}", path.display());
            }
            Ok(())
        }
    }
}

/// Executes one program run and renders the report.
pub fn cmd_run(args: &RunArgs) -> anyhow::Result<String> {
    let cfg = RunConfig::resolve(args)?;
    let t0 = Instant::now();
    let run = execute_program(&cfg)?;
    let wall_ms = t0.elapsed().as_secs_f64() * 1e3;

    let report = MachineReport {
        program: cfg.program.name().to_string(),
        config: ConfigEcho {
            parties: cfg.engine.parties,
            threshold: cfg.engine.threshold,
            prime: cfg.engine.field.modulus().to_string(),
            seed: run.seed,
            frac_bits: cfg.engine.frac_bits,
            prec: cfg.prec,
            max_bits: cfg.engine.max_bits,
            cost_profile: cfg.engine.profile.to_string(),
            inputs: cfg
                .inputs
                .iter()
                .map(|p| p.display().to_string())
                .collect(),
        },
        result: ResultEcho::from_fixed(&run.value),
        degrees_of_freedom: run.degrees_of_freedom,
        ledger: run.ledger.clone(),
    };

    Ok(match cfg.format {
        OutputFormat::Machine => report.to_json(),
        OutputFormat::Human => report.human_block(wall_ms),
    })
}

fn execute_program(cfg: &RunConfig) -> anyhow::Result<ProgramRun> {
    match cfg.program {
        ProgramKind::Stddev | ProgramKind::StddevUnopt => {
            let schedule = if cfg.program == ProgramKind::Stddev {
                Schedule::Batched
            } else {
                Schedule::Sequential
            };
            let parties = cfg
                .inputs
                .iter()
                .map(|p| inputs::read_stddev_file(p))
                .collect::<anyhow::Result<Vec<_>>>()?;
            let input = StdDevInput::new(parties)?;
            Ok(stats::run_stddev(
                cfg.engine.clone(),
                &input,
                cfg.prec,
                schedule,
                cfg.sqrt_iterations,
            )?)
        }
        ProgramKind::Chisq | ProgramKind::ChisqUnopt => {
            let variant = if cfg.program == ProgramKind::Chisq {
                ChiSqVariant::Optimized
            } else {
                ChiSqVariant::Unoptimized
            };
            if cfg.inputs.len() < 2 {
                bail!("chi-squared needs at least 2 input files (one row per party)");
            }
            let rows = cfg
                .inputs
                .iter()
                .map(|p| inputs::read_chisq_file(p))
                .collect::<anyhow::Result<Vec<_>>>()?;
            let input = ChiSqInput::new(rows)?;
            Ok(stats::run_chisq(cfg.engine.clone(), &input, variant)?)
        }
    }
}

/// Runs the size sweep for one program family and renders the table.
pub fn cmd_bench(args: &BenchArgs) -> anyhow::Result<String> {
    let defaults = EngineConfig::default();
    let base = EngineConfig {
        parties: args.parties.unwrap_or(defaults.parties),
        threshold: args.threshold.unwrap_or(defaults.threshold),
        field: match &args.prime {
            Some(s) => shardstat::PrimeField::parse(s)?,
            None => defaults.field,
        },
        seed: Some(args.seed),
        frac_bits: args.frac_bits.unwrap_or(defaults.frac_bits),
        max_bits: args.max_bits.unwrap_or(defaults.max_bits),
        profile: match &args.cost_profile {
            Some(s) => s.parse()?,
            None => defaults.profile,
        },
    };
    let prec = args.prec.unwrap_or(1);

    let rows = match args.program {
        ProgramKind::Stddev | ProgramKind::StddevUnopt => {
            let sizes = match &args.sweep {
                Some(spec) => bench::parse_stddev_sweep(spec)?,
                None => bench::STDDEV_SIZES.to_vec(),
            };
            bench::bench_stddev(&base, &sizes, prec, args.seed)?
        }
        ProgramKind::Chisq | ProgramKind::ChisqUnopt => {
            let dims = match &args.sweep {
                Some(spec) => bench::parse_chisq_sweep(spec)?,
                None => bench::CHISQ_DIMS.to_vec(),
            };
            bench::bench_chisq(&base, &dims, args.seed)?
        }
    };

    Ok(match args.format {
        OutputFormat::Machine => report::bench_json(&rows),
        OutputFormat::Human => report::bench_table(&rows),
    })
}

/// Generates seeded per-party input files and returns their paths.
pub fn cmd_gen_inputs(args: &GenInputsArgs) -> anyhow::Result<Vec<std::path::PathBuf>> {
    std::fs::create_dir_all(&args.out_dir)
        .with_context(|| format!("cannot create {}", args.out_dir.display()))?;
    match args.program {
        ProgramKind::Stddev | ProgramKind::StddevUnopt => {
            if args.sizes.is_empty() {
                bail!("stddev generation needs --sizes (per-party value counts)");
            }
            let (min, max) = (args.min.unwrap_or(0), args.max.unwrap_or(1000));
            if min > max {
                bail!("--min must not exceed --max");
            }
            args.sizes
                .iter()
                .enumerate()
                .map(|(i, &len)| {
                    let party = i + 1;
                    let values = inputs::gen_stddev_values(args.seed, party, len, min, max);
                    inputs::write_stddev_file(&args.out_dir, args.seed, party, &values)
                })
                .collect()
        }
        ProgramKind::Chisq | ProgramKind::ChisqUnopt => {
            let rows = args.rows.context("chisq generation needs --rows")?;
            let cols = args.cols.context("chisq generation needs --cols")?;
            if rows < 2 || cols < 2 {
                bail!("chi-squared needs at least a 2x2 matrix");
            }
            let min = args.min.unwrap_or(1);
            let max = args.max.unwrap_or(100);
            if min < 0 || min > max {
                bail!("counts need 0 <= min <= max");
            }
            (0..rows)
                .map(|i| {
                    let party = i + 1;
                    let row =
                        inputs::gen_chisq_row(args.seed, party, cols, min as u64, max as u64);
                    inputs::write_chisq_file(&args.out_dir, args.seed, party, &row)
                })
                .collect()
        }
    }
}

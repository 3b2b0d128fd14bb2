//! Party input files: line-oriented text with a `# seed=<u64> party=<id>`
//! header, then one integer per line (stddev) or a single row of
//! space-separated counts (chisq).

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

/// Deterministic generator for one party's data stream.
fn party_rng(seed: u64, party: usize) -> ChaCha12Rng {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    rng.set_stream(party as u64);
    rng
}

pub fn gen_stddev_values(seed: u64, party: usize, len: usize, min: i64, max: i64) -> Vec<i64> {
    let mut rng = party_rng(seed, party);
    (0..len).map(|_| rng.gen_range(min..=max)).collect()
}

pub fn gen_chisq_row(seed: u64, party: usize, cols: usize, min: u64, max: u64) -> Vec<u64> {
    let mut rng = party_rng(seed, party);
    (0..cols).map(|_| rng.gen_range(min..=max)).collect()
}

pub fn write_stddev_file(dir: &Path, seed: u64, party: usize, values: &[i64]) -> anyhow::Result<PathBuf> {
    let path = dir.join(format!("party{party}.txt"));
    let mut out = String::with_capacity(values.len() * 5 + 32);
    out.push_str(&format!("# seed={seed} party={party}\n"));
    for v in values {
        out.push_str(&format!("{v}\n"));
    }
    fs::File::create(&path)
        .and_then(|mut f| f.write_all(out.as_bytes()))
        .with_context(|| format!("cannot write {}", path.display()))?;
    Ok(path)
}

pub fn write_chisq_file(dir: &Path, seed: u64, party: usize, row: &[u64]) -> anyhow::Result<PathBuf> {
    let path = dir.join(format!("party{party}.txt"));
    let cells: Vec<String> = row.iter().map(u64::to_string).collect();
    let out = format!("# seed={seed} party={party}\n{}\n", cells.join(" "));
    fs::File::create(&path)
        .and_then(|mut f| f.write_all(out.as_bytes()))
        .with_context(|| format!("cannot write {}", path.display()))?;
    Ok(path)
}

fn data_lines(path: &Path) -> anyhow::Result<Vec<(usize, String)>> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("cannot read input file {}", path.display()))?;
    Ok(text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim().to_string()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
        .collect())
}

/// One signed integer per line.
pub fn read_stddev_file(path: &Path) -> anyhow::Result<Vec<i64>> {
    data_lines(path)?
        .into_iter()
        .map(|(line_no, line)| {
            line.parse::<i64>().with_context(|| {
                format!("{} line {line_no}: invalid integer `{line}`", path.display())
            })
        })
        .collect()
}

/// Exactly one data line of space-separated non-negative counts.
pub fn read_chisq_file(path: &Path) -> anyhow::Result<Vec<u64>> {
    let lines = data_lines(path)?;
    match lines.as_slice() {
        [] => bail!("{}: no data line (expected one row of counts)", path.display()),
        [(line_no, line)] => line
            .split_whitespace()
            .map(|tok| {
                tok.parse::<u64>().with_context(|| {
                    format!("{} line {line_no}: invalid count `{tok}`", path.display())
                })
            })
            .collect(),
        _ => bail!(
            "{}: expected a single data line, found {}",
            path.display(),
            lines.len()
        ),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generation_is_deterministic() {
        let a = gen_stddev_values(7, 1, 32, 0, 1000);
        let b = gen_stddev_values(7, 1, 32, 0, 1000);
        assert_eq!(a, b);
        let c = gen_stddev_values(8, 1, 32, 0, 1000);
        assert_ne!(a, c);
        assert!(a.iter().all(|&v| (0..=1000).contains(&v)));

        let r = gen_chisq_row(7, 2, 64, 1, 100);
        assert_eq!(r, gen_chisq_row(7, 2, 64, 1, 100));
        assert!(r.iter().all(|&v| (1..=100).contains(&v)));
    }

    #[test]
    fn files_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let values = gen_stddev_values(3, 1, 10, 0, 1000);
        let path = write_stddev_file(dir.path(), 3, 1, &values).unwrap();
        assert_eq!(read_stddev_file(&path).unwrap(), values);
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("# seed=3 party=1\n"));

        let row = gen_chisq_row(3, 1, 8, 1, 100);
        let path = write_chisq_file(dir.path(), 3, 1, &row).unwrap();
        assert_eq!(read_chisq_file(&path).unwrap(), row);
    }

    #[test]
    fn parse_errors_name_file_and_line() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.txt");
        std::fs::write(&path, "# header\n12\nnope\n").unwrap();
        let err = read_stddev_file(&path).unwrap_err();
        let msg = format!("{err:#}");
        assert!(msg.contains("bad.txt"), "{msg}");
        assert!(msg.contains("line 3"), "{msg}");

        std::fs::write(&path, "1 2\n3 4\n").unwrap();
        let err = read_chisq_file(&path).unwrap_err();
        assert!(format!("{err:#}").contains("single data line"));
    }
}

use std::fs;
use std::io::Write;
use std::path::Path;

use super::LogicalErrorEstimate;
use crate::error::{Error, Result};

pub const CSV_COLUMNS: [&str; 16] = [
    "code",
    "layout",
    "basis",
    "p",
    "tau_s",
    "tau_m",
    "T",
    "shots",
    "failures",
    "p_fail_total",
    "p_L_round",
    "ci_low",
    "ci_high",
    "seed",
    "decoder",
    "timestamp",
];

fn header_line() -> String {
    CSV_COLUMNS.join(",")
}

/// Appends `estimates` to the CSV at `path`, creating it with a header if
/// needed. The new contents are written to a sibling file and renamed over
/// the target, so readers never observe a partial run.
pub fn export_results(estimates: &[LogicalErrorEstimate], path: &Path) -> Result<()> {
    let mut out = match fs::read(path) {
        Ok(existing) => {
            let first = existing.split(|&b| b == b'\n').next().unwrap_or_default();
            if String::from_utf8_lossy(first).trim_end() != header_line() {
                return Err(Error::Io(std::io::Error::other(format!(
                    "{} exists with a different header",
                    path.display()
                ))));
            }
            let mut existing = existing;
            if !existing.ends_with(b"\n") {
                existing.push(b'\n');
            }
            existing
        }
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => format!("{}\n", header_line()).into_bytes(),
        Err(e) => return Err(e.into()),
    };
    write_rows(estimates, &mut out)?;
    let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    let tmp = path.with_file_name(format!(".{name}.{}.tmp", std::process::id()));
    let mut f = fs::File::create(&tmp)?;
    f.write_all(&out)?;
    f.sync_all()?;
    fs::rename(&tmp, path)?;
    Ok(())
}

/// Writes a header and one row per estimate.
pub fn write_results(estimates: &[LogicalErrorEstimate], out: impl Write) -> Result<()> {
    let mut out = out;
    writeln!(out, "{}", header_line())?;
    write_rows(estimates, out)
}

fn write_rows(estimates: &[LogicalErrorEstimate], out: impl Write) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    for e in estimates {
        w.serialize(e)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_results(path: &Path) -> Result<Vec<LogicalErrorEstimate>> {
    let mut r = csv::Reader::from_path(path)?;
    let header: Vec<String> = r.headers()?.iter().map(str::to_owned).collect();
    if header != CSV_COLUMNS {
        return Err(Error::Io(std::io::Error::other(format!("{} has an unexpected header", path.display()))));
    }
    r.deserialize().map(|row| row.map_err(Error::from)).collect()
}

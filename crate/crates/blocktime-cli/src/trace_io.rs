//! Trace CSV reading and writing. The column set and order are a stable
//! interface: `block_index,period,position,blocktime,arrival_time,difficulty,rate`,
//! LF line endings, floats at 12 significant digits.

use std::fs;
use std::path::Path;

use blocktime::ChainTrace;

use crate::format::format_sig;

pub const CSV_HEADER: &str = "block_index,period,position,blocktime,arrival_time,difficulty,rate";

/// One parsed trace row; only the fields the plot needs are kept as numbers.
#[derive(Debug, Clone, Copy)]
pub struct TraceRow {
    pub block_index: u64,
    pub period: u32,
    pub blocktime: f64,
    pub rate: f64,
}

pub fn write_trace_csv(path: &Path, trace: &ChainTrace) -> Result<(), String> {
    let mut text = String::with_capacity(64 * (trace.blocks.len() + 1));
    text.push_str(CSV_HEADER);
    text.push('\n');
    for b in &trace.blocks {
        text.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            b.block_index,
            b.period_index,
            b.position_in_period,
            format_sig(b.blocktime),
            format_sig(b.arrival_time),
            format_sig(b.difficulty),
            format_sig(b.rate),
        ));
    }
    fs::write(path, text).map_err(|e| format!("cannot write {}: {e}", path.display()))
}

/// Parses a trace CSV, reporting the first malformed line by number.
pub fn read_trace_csv(path: &Path) -> Result<Vec<TraceRow>, String> {
    let text =
        fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, header)) if header == CSV_HEADER => {}
        Some((_, header)) => {
            return Err(format!(
                "{}:1: expected header {CSV_HEADER:?}, found {header:?}",
                path.display()
            ))
        }
        None => return Err(format!("{}:1: empty file", path.display())),
    }

    let mut rows = Vec::new();
    for (i, line) in lines {
        let lineno = i + 1;
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 7 {
            return Err(format!(
                "{}:{lineno}: expected 7 fields, found {}",
                path.display(),
                fields.len()
            ));
        }
        let field = |j: usize, name: &str| -> Result<f64, String> {
            fields[j].parse().map_err(|_| {
                format!(
                    "{}:{lineno}: {name} is not a number: {:?}",
                    path.display(),
                    fields[j]
                )
            })
        };
        let block_index: u64 = fields[0].parse().map_err(|_| {
            format!(
                "{}:{lineno}: block_index is not an integer: {:?}",
                path.display(),
                fields[0]
            )
        })?;
        let period: u32 = fields[1].parse().map_err(|_| {
            format!(
                "{}:{lineno}: period is not an integer: {:?}",
                path.display(),
                fields[1]
            )
        })?;
        let _position: u32 = fields[2].parse().map_err(|_| {
            format!(
                "{}:{lineno}: position is not an integer: {:?}",
                path.display(),
                fields[2]
            )
        })?;
        let blocktime = field(3, "blocktime")?;
        field(4, "arrival_time")?;
        field(5, "difficulty")?;
        let rate = field(6, "rate")?;
        if !(blocktime > 0.0) || !blocktime.is_finite() || !(rate > 0.0) || !rate.is_finite() {
            return Err(format!(
                "{}:{lineno}: blocktime and rate must be positive",
                path.display()
            ));
        }
        rows.push(TraceRow { block_index, period, blocktime, rate });
    }
    if rows.is_empty() {
        return Err(format!("{}: no data rows", path.display()));
    }
    Ok(rows)
}

//! CSV writers. All files are UTF-8 with LF line endings, and every
//! non-count number is printed with 6 significant digits (C `%.6g` style).

use std::fs;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::harness::{HistogramBin, PositionRecord, SweepRow};

pub const SWEEP_HEADER: &str =
    "model,n_nodes,target_duration_s,detection_mean,detection_stderr,tracking_mean,tracking_stderr,runs";
pub const SNAPSHOT_HEADER: &str = "time_s,node_index,x_m,y_m";
pub const HISTOGRAM_HEADER: &str = "bin_left_m,bin_right_m,count";

#[derive(Debug, Error)]
#[error("cannot write {}: {source}", path.display())]
pub struct OutputError {
    pub path: PathBuf,
    #[source]
    pub source: std::io::Error,
}

/// Formats `x` like C's `%.6g`: six significant digits, trailing zeros
/// removed, scientific notation when the exponent is below -4 or at least 6.
pub fn format_sig6(x: f64) -> String {
    const PRECISION: i32 = 6;
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{:.*e}", (PRECISION - 1) as usize, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -4 || exp >= PRECISION {
        let mantissa = strip_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{mantissa}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (PRECISION - 1 - exp).max(0) as usize;
        strip_zeros(&format!("{x:.decimals$}")).to_string()
    }
}

fn strip_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Sweep rows as CSV text, sorted by model name, node count and duration.
pub fn render_sweep_csv(rows: &[SweepRow]) -> String {
    let mut sorted: Vec<&SweepRow> = rows.iter().collect();
    sorted.sort_by(|a, b| {
        a.model
            .name()
            .cmp(b.model.name())
            .then(a.n_nodes.cmp(&b.n_nodes))
            .then(a.target_duration.total_cmp(&b.target_duration))
    });
    let mut out = String::from(SWEEP_HEADER);
    out.push('\n');
    for r in sorted {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            r.model,
            r.n_nodes,
            format_sig6(r.target_duration),
            format_sig6(r.detection.mean),
            format_sig6(r.detection.std_error),
            format_sig6(r.tracking.mean),
            format_sig6(r.tracking.std_error),
            r.detection.runs,
        ));
    }
    out
}

pub fn render_snapshot_csv(records: &[PositionRecord]) -> String {
    let mut out = String::from(SNAPSHOT_HEADER);
    out.push('\n');
    for r in records {
        out.push_str(&format!(
            "{},{},{},{}\n",
            format_sig6(r.time),
            r.node_index,
            format_sig6(r.pos.x),
            format_sig6(r.pos.y)
        ));
    }
    out
}

pub fn render_histogram_csv(bins: &[HistogramBin]) -> String {
    let mut out = String::from(HISTOGRAM_HEADER);
    out.push('\n');
    for b in bins {
        out.push_str(&format!("{},{},{}\n", format_sig6(b.left), format_sig6(b.right), b.count));
    }
    out
}

/// Writes the whole file in one call so a failed run leaves nothing behind.
pub fn write_text(path: &Path, text: &str) -> Result<(), OutputError> {
    fs::write(path, text).map_err(|source| OutputError { path: path.to_path_buf(), source })
}

pub fn write_sweep_csv(path: &Path, rows: &[SweepRow]) -> Result<(), OutputError> {
    write_text(path, &render_sweep_csv(rows))
}

pub fn write_snapshot_csv(path: &Path, records: &[PositionRecord]) -> Result<(), OutputError> {
    write_text(path, &render_snapshot_csv(records))
}

pub fn write_histogram_csv(path: &Path, bins: &[HistogramBin]) -> Result<(), OutputError> {
    write_text(path, &render_histogram_csv(bins))
}

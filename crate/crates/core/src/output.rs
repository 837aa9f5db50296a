//! CSV traces, summary tables, and the run manifest.

use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sim::{TableRow, Trace, TraceRow};

pub const TRACE_COLUMNS: [&str; 29] = [
    "t", "q1", "q2", "qf", "qd1", "qd2", "qdf", "x", "y", "xh_x", "xh_y", "xhat_x", "xhat_y", "xa_x", "xa_y",
    "fext_x", "fext_y", "tau1", "tau2", "tauf", "ka", "k_robot", "k_flywheel", "alpha", "p_r2h", "v1", "v2",
    "passivity_residual", "abort_flag",
];

pub const SUMMARY_COLUMNS: [&str; 5] = ["strategy", "avg_fx", "avg_fy", "avg_power", "aborted_at"];

/// Nine significant digits, positional for ordinary magnitudes and
/// scientific otherwise, with trailing zeros dropped.
pub fn format_float(v: f64) -> String {
    if v.is_nan() {
        return "NaN".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf" } else { "-inf" }.into();
    }
    if v == 0.0 {
        return "0".into();
    }
    let sci = format!("{v:.8e}");
    let (mantissa, exp) = sci.split_once('e').expect("scientific format has an exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-6..16).contains(&exp) {
        let rounded: f64 = sci.parse().expect("round trip of own output");
        let decimals = (8 - exp).max(0) as usize;
        trim(format!("{rounded:.decimals$}"))
    } else {
        format!("{}e{exp}", trim(mantissa.to_string()))
    }
}

fn trim(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

fn row_fields(r: &TraceRow) -> Vec<String> {
    let e = &r.energy;
    let mut out: Vec<String> = [
        r.t, r.q[0], r.q[1], r.qf, r.qda[0], r.qda[1], r.qda[2], r.x[0], r.x[1], r.x_h[0], r.x_h[1], r.x_hat[0],
        r.x_hat[1], r.x_a[0], r.x_a[1], r.f_ext[0], r.f_ext[1], r.tau_a[0], r.tau_a[1], r.tau_a[2], e.ka,
        e.k_robot, e.k_flywheel, e.alpha, e.p_r2h, e.v1, e.v2, e.passivity_residual,
    ]
    .iter()
    .map(|v| format_float(*v))
    .collect();
    out.push(if r.abort_flag { "1" } else { "0" }.into());
    out
}

fn csv_err(path: &Path, e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::io(path, std::io::Error::other(format!("{other:?}"))),
    }
}

fn create(path: &Path) -> Result<csv::Writer<File>> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    Ok(csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(file))
}

/// Header plus one line per output sample.
pub fn emit_csv(trace: &Trace, path: &Path) -> Result<()> {
    let mut w = create(path)?;
    w.write_record(TRACE_COLUMNS).map_err(|e| csv_err(path, e))?;
    for r in &trace.rows {
        w.write_record(row_fields(r)).map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// One line per table row; aborted rows leave the metric cells empty.
pub fn emit_summary(table: &[TableRow], path: &Path) -> Result<()> {
    let mut w = create(path)?;
    w.write_record(SUMMARY_COLUMNS).map_err(|e| csv_err(path, e))?;
    for row in table {
        let m = &row.metrics;
        let record = match m.aborted_at {
            Some(t) => [row.label.clone(), String::new(), String::new(), String::new(), format_float(t)],
            None => [
                row.label.clone(),
                format_float(m.avg_fx),
                format_float(m.avg_fy),
                format_float(m.avg_power),
                String::new(),
            ],
        };
        w.write_record(&record).map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Reads one named column of an emitted CSV back as numbers.
pub fn read_csv_column(path: &Path, column: &str) -> Result<Vec<f64>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| csv_err(path, e))?;
    let headers = r.headers().map_err(|e| csv_err(path, e))?.clone();
    let idx = headers
        .iter()
        .position(|h| h == column)
        .ok_or_else(|| Error::invalid("column", format!("`{column}` not in {}", path.display())))?;
    r.records()
        .map(|rec| {
            let rec = rec.map_err(|e| csv_err(path, e))?;
            let cell = rec.get(idx).unwrap_or("");
            cell.parse::<f64>()
                .map_err(|_| Error::invalid("column", format!("`{cell}` in `{column}` is not a number")))
        })
        .collect()
}

/// Lists everything a run produced. Written last.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunManifest {
    pub config_path: Option<PathBuf>,
    pub output_dir: PathBuf,
    pub files: Vec<String>,
    pub tool_version: String,
    pub seed: u64,
}

impl RunManifest {
    pub const FILE_NAME: &'static str = "manifest.json";

    pub fn new(config_path: Option<PathBuf>, output_dir: PathBuf, seed: u64) -> Self {
        Self {
            config_path,
            output_dir,
            files: Vec::new(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            seed,
        }
    }

    /// Records a file that was written into the output directory.
    pub fn record(&mut self, name: impl Into<String>) {
        self.files.push(name.into());
    }

    pub fn write(&self) -> Result<PathBuf> {
        let path = self.output_dir.join(Self::FILE_NAME);
        let mut text = serde_json::to_string_pretty(self).expect("manifest serializes");
        text.push('\n');
        let mut f = File::create(&path).map_err(|e| Error::io(&path, e))?;
        f.write_all(text.as_bytes()).map_err(|e| Error::io(&path, e))?;
        Ok(path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_formatting() {
        assert_eq!(format_float(0.0), "0");
        assert_eq!(format_float(-0.0), "0");
        assert_eq!(format_float(1.0), "1");
        assert_eq!(format_float(0.1), "0.1");
        assert_eq!(format_float(-0.785), "-0.785");
        assert_eq!(format_float(3000.0), "3000");
        assert_eq!(format_float(1.0 / 3.0), "0.333333333");
        assert_eq!(format_float(2.0 / 3.0 * 1e-3), "0.000666666667");
        assert_eq!(format_float(123456789.123), "123456789");
        assert_eq!(format_float(1.5e-9), "1.5e-9");
        assert_eq!(format_float(-2.0e20), "-2e20");
        assert_eq!(format_float(f64::NAN), "NaN");
    }

    #[test]
    fn nine_significant_digits_survive() {
        for v in [0.2514787907257549, -29.99971234, 1.2345678912e-5, 6.02214076e23] {
            let back: f64 = format_float(v).parse().unwrap();
            assert!(((back - v) / v).abs() <= 5e-9, "{v} -> {back}");
        }
    }
}

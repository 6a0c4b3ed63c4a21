//! CSV formats for time series and matrix dumps.
//!
//! Time-series layout: header `t,<id>,<id>,...`, one row per sample, every
//! value printed with 17 significant digits so files round-trip bit-exact.

use nalgebra::DMatrix;

use crate::dynamics::Trajectory;
use crate::error::{Error, Result};

/// 17 significant digits: enough to reproduce any f64 exactly.
pub fn format_g17(x: f64) -> String {
    format!("{x:.16e}")
}

fn table_to_csv(t0: f64, dt: f64, values: &DMatrix<f64>, headers: &[String]) -> String {
    let mut out = String::with_capacity(values.nrows() * values.ncols() * 24);
    out.push('t');
    for h in headers {
        out.push(',');
        out.push_str(h);
    }
    out.push('\n');
    for k in 0..values.nrows() {
        out.push_str(&format_g17(t0 + k as f64 * dt));
        for c in 0..values.ncols() {
            out.push(',');
            out.push_str(&format_g17(values[(k, c)]));
        }
        out.push('\n');
    }
    out
}

/// State samples as CSV (`t` column plus one column per node).
pub fn trajectory_to_csv(traj: &Trajectory) -> String {
    table_to_csv(traj.t0, traj.dt, &traj.samples, &traj.node_map)
}

/// Velocity samples in the same layout, when the trajectory recorded them.
pub fn velocities_to_csv(traj: &Trajectory) -> Option<String> {
    traj.velocities
        .as_ref()
        .map(|v| table_to_csv(traj.t0, traj.dt, v, &traj.node_map))
}

/// Any per-node series in the trajectory layout (used for psi exports).
pub fn series_to_csv(t0: f64, dt: f64, values: &DMatrix<f64>, headers: &[String]) -> String {
    table_to_csv(t0, dt, values, headers)
}

/// Parses the trajectory layout back. Sampling must be uniform.
pub fn trajectory_from_csv(text: &str) -> Result<Trajectory> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = lines.next().ok_or_else(|| Error::Parse("empty CSV".into()))?;
    let mut columns = header.split(',');
    if columns.next().map(str::trim) != Some("t") {
        return Err(Error::Parse("first CSV column must be t".into()));
    }
    let node_map: Vec<String> = columns.map(|c| c.trim().to_string()).collect();
    if node_map.is_empty() {
        return Err(Error::Parse("CSV has no node columns".into()));
    }

    let mut times = Vec::new();
    let mut rows = Vec::new();
    for (lineno, line) in lines.enumerate() {
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != node_map.len() + 1 {
            return Err(Error::Parse(format!(
                "row {} has {} fields, expected {}",
                lineno + 2,
                fields.len(),
                node_map.len() + 1
            )));
        }
        let mut parsed = Vec::with_capacity(fields.len());
        for f in &fields {
            parsed.push(f.trim().parse::<f64>().map_err(|e| {
                Error::Parse(format!("row {}: {e}", lineno + 2))
            })?);
        }
        times.push(parsed[0]);
        rows.push(parsed[1..].to_vec());
    }
    if times.len() < 2 {
        return Err(Error::Parse("need at least two samples".into()));
    }
    let t0 = times[0];
    let dt = times[1] - times[0];
    if dt <= 0.0 {
        return Err(Error::Parse("time column must increase".into()));
    }
    for (k, &t) in times.iter().enumerate() {
        let expected = t0 + k as f64 * dt;
        if (t - expected).abs() > 1e-9 * dt.max(t.abs()) {
            return Err(Error::Parse(format!(
                "non-uniform sampling at row {}: {t} vs {expected}",
                k + 2
            )));
        }
    }
    let samples = DMatrix::from_fn(rows.len(), node_map.len(), |r, c| rows[r][c]);
    Ok(Trajectory {
        t0,
        dt,
        samples,
        velocities: None,
        node_map,
    })
}

/// Debug dump: dense matrix, row-major, 17 significant digits, no header.
pub fn matrix_to_csv(m: &DMatrix<f64>) -> String {
    let mut out = String::new();
    for r in 0..m.nrows() {
        for c in 0..m.ncols() {
            if c > 0 {
                out.push(',');
            }
            out.push_str(&format_g17(m[(r, c)]));
        }
        out.push('\n');
    }
    out
}

//! CSV and key-value serialization of fields, curves, traces, surgeries and
//! certificate scans. Every float is written as `{:.16e}` (17 significant
//! digits), so a write/read round trip is exact and reruns diff cleanly.

use std::io::{BufRead, BufReader, Read, Write};
use std::sync::Arc;

use crate::ccdiag::{CurvePoint, MCCurve, ScanRow};
use crate::error::{Error, Result};
use crate::grid::{Field, Grid, GridSpec};
use crate::rearrange::SurgeryReport;
use crate::solve::TraceRow;

pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn parse_f64(s: &str, what: &str) -> Result<f64> {
    s.trim().parse().map_err(|_| Error::Parse(format!("{what}: `{s}` is not a number")))
}

fn parse_usize(s: &str, what: &str) -> Result<usize> {
    s.trim().parse().map_err(|_| Error::Parse(format!("{what}: `{s}` is not an unsigned integer")))
}

fn parse_bool(s: &str, what: &str) -> Result<bool> {
    match s.trim() {
        "true" => Ok(true),
        "false" => Ok(false),
        other => Err(Error::Parse(format!("{what}: `{other}` is not a boolean"))),
    }
}

fn writer<W: Write>(w: W, header: &[&str]) -> Result<csv::Writer<W>> {
    let mut wr = csv::WriterBuilder::new().has_headers(false).from_writer(w);
    wr.write_record(header)?;
    Ok(wr)
}

/// Reads all records after checking the header.
fn records<R: Read>(r: R, header: &[&str]) -> Result<Vec<csv::StringRecord>> {
    let mut rd = csv::ReaderBuilder::new().has_headers(true).from_reader(r);
    let got: Vec<String> = rd.headers()?.iter().map(str::to_owned).collect();
    if got != header {
        return Err(Error::Parse(format!("expected header `{}`, got `{}`", header.join(","), got.join(","))));
    }
    let mut out = Vec::new();
    for rec in rd.records() {
        let rec = rec?;
        if rec.len() != header.len() {
            return Err(Error::Parse(format!("row has {} columns, expected {}", rec.len(), header.len())));
        }
        out.push(rec);
    }
    Ok(out)
}

// ------------------------------------------------------------------- fields

fn field_header(spec: &GridSpec) -> &'static [&'static str] {
    match spec {
        GridSpec::Cylindrical { .. } => &["coord1", "coord2", "component", "value"],
        _ => &["coord1", "component", "value"],
    }
}

/// One row per node per component, component-major.
pub fn write_field<W: Write>(w: W, u: &Field) -> Result<()> {
    let grid = u.grid();
    let cyl = grid.is_cylindrical();
    let mut wr = writer(w, field_header(grid.spec()))?;
    for c in 0..u.components() {
        for (i, &v) in u.component(c).iter().enumerate() {
            let p = grid.point(i);
            let mut row = vec![fmt_f64(p[0])];
            if cyl {
                row.push(fmt_f64(p[1]));
            }
            row.push(c.to_string());
            row.push(fmt_f64(v));
            wr.write_record(&row)?;
        }
    }
    wr.flush()?;
    Ok(())
}

/// Reads a field dump back onto `grid`, checking that the coordinates match.
pub fn read_field<R: Read>(r: R, grid: Arc<Grid>) -> Result<Field> {
    let header = field_header(grid.spec());
    let cyl = grid.is_cylindrical();
    let rows = records(r, header)?;
    let n = grid.len();
    if rows.is_empty() || rows.len() % n != 0 {
        return Err(Error::Parse(format!("{} rows do not fill a field on {n} nodes", rows.len())));
    }
    let components = rows.len() / n;
    let mut values = Vec::with_capacity(rows.len());
    for (k, rec) in rows.iter().enumerate() {
        let (c, i) = (k / n, k % n);
        let p = grid.point(i);
        let mut coords = vec![parse_f64(&rec[0], "coord1")?];
        if cyl {
            coords.push(parse_f64(&rec[1], "coord2")?);
        }
        for (a, b) in coords.iter().zip(p) {
            if (a - b).abs() > 1e-12 * b.abs().max(1.0) {
                return Err(Error::Parse(format!("row {k}: coordinate {a} does not match node {b}")));
            }
        }
        let off = if cyl { 2 } else { 1 };
        if parse_usize(&rec[off], "component")? != c {
            return Err(Error::Parse(format!("row {k}: expected component {c}")));
        }
        values.push(parse_f64(&rec[off + 1], "value")?);
    }
    Field::from_values(grid, components, values)
}

// ------------------------------------------------------------- mass curves

const CURVE_HEADER: [&str; 5] = ["c", "m", "beta", "iters", "converged"];

/// An absent multiplier is written as an empty cell.
pub fn write_mass_curve<W: Write>(w: W, curve: &MCCurve) -> Result<()> {
    let mut wr = writer(w, &CURVE_HEADER)?;
    for p in &curve.points {
        wr.write_record([
            fmt_f64(p.c),
            fmt_f64(p.m),
            p.beta.map(fmt_f64).unwrap_or_default(),
            p.iterations.to_string(),
            p.converged.to_string(),
        ])?;
    }
    wr.flush()?;
    Ok(())
}

pub fn read_mass_curve<R: Read>(r: R) -> Result<MCCurve> {
    let mut points = Vec::new();
    for rec in records(r, &CURVE_HEADER)? {
        let beta = if rec[2].trim().is_empty() { None } else { Some(parse_f64(&rec[2], "beta")?) };
        points.push(CurvePoint {
            c: parse_f64(&rec[0], "c")?,
            m: parse_f64(&rec[1], "m")?,
            beta,
            iterations: parse_usize(&rec[3], "iters")?,
            converged: parse_bool(&rec[4], "converged")?,
        });
    }
    Ok(MCCurve { points, minimizers: Vec::new() })
}

// ------------------------------------------------------------------ traces

const TRACE_HEADER: [&str; 4] = ["iter", "energy", "constraint_error", "step_size"];

pub fn write_trace<W: Write>(w: W, trace: &[TraceRow]) -> Result<()> {
    let mut wr = writer(w, &TRACE_HEADER)?;
    for t in trace {
        wr.write_record([t.iter.to_string(), fmt_f64(t.energy), fmt_f64(t.constraint_error), fmt_f64(t.step_size)])?;
    }
    wr.flush()?;
    Ok(())
}

pub fn read_trace<R: Read>(r: R) -> Result<Vec<TraceRow>> {
    records(r, &TRACE_HEADER)?
        .iter()
        .map(|rec| {
            Ok(TraceRow {
                iter: parse_usize(&rec[0], "iter")?,
                energy: parse_f64(&rec[1], "energy")?,
                constraint_error: parse_f64(&rec[2], "constraint_error")?,
                step_size: parse_f64(&rec[3], "step_size")?,
            })
        })
        .collect()
}

// --------------------------------------------------------------- surgeries

const SURGERY_HEADER: [&str; 5] = ["surgery", "mass_before", "mass_after", "total_before", "total_after"];

/// The serialized part of a [`SurgeryReport`].
#[derive(Clone, Debug, PartialEq)]
pub struct SurgeryRow {
    pub surgery: String,
    pub mass_before: f64,
    pub mass_after: f64,
    pub total_before: f64,
    pub total_after: f64,
}

impl From<&SurgeryReport> for SurgeryRow {
    fn from(r: &SurgeryReport) -> Self {
        SurgeryRow {
            surgery: r.surgery.clone(),
            mass_before: r.mass_before,
            mass_after: r.mass_after,
            total_before: r.energy_before.total,
            total_after: r.energy_after.total,
        }
    }
}

pub fn write_surgeries<W: Write>(w: W, reports: &[SurgeryReport]) -> Result<()> {
    let mut wr = writer(w, &SURGERY_HEADER)?;
    for r in reports.iter().map(SurgeryRow::from) {
        wr.write_record([r.surgery, fmt_f64(r.mass_before), fmt_f64(r.mass_after), fmt_f64(r.total_before), fmt_f64(r.total_after)])?;
    }
    wr.flush()?;
    Ok(())
}

pub fn read_surgeries<R: Read>(r: R) -> Result<Vec<SurgeryRow>> {
    records(r, &SURGERY_HEADER)?
        .iter()
        .map(|rec| {
            Ok(SurgeryRow {
                surgery: rec[0].to_owned(),
                mass_before: parse_f64(&rec[1], "mass_before")?,
                mass_after: parse_f64(&rec[2], "mass_after")?,
                total_before: parse_f64(&rec[3], "total_before")?,
                total_after: parse_f64(&rec[4], "total_after")?,
            })
        })
        .collect()
}

// ------------------------------------------------------------ certificates

const SCAN_HEADER: [&str; 3] = ["param", "exact", "bound"];

pub fn write_scan<W: Write>(w: W, rows: &[ScanRow]) -> Result<()> {
    let mut wr = writer(w, &SCAN_HEADER)?;
    for r in rows {
        wr.write_record([fmt_f64(r.param), fmt_f64(r.exact), fmt_f64(r.bound)])?;
    }
    wr.flush()?;
    Ok(())
}

pub fn read_scan<R: Read>(r: R) -> Result<Vec<ScanRow>> {
    records(r, &SCAN_HEADER)?
        .iter()
        .map(|rec| {
            Ok(ScanRow {
                param: parse_f64(&rec[0], "param")?,
                exact: parse_f64(&rec[1], "exact")?,
                bound: parse_f64(&rec[2], "bound")?,
            })
        })
        .collect()
}

// -------------------------------------------------------------- key=value

/// One `key=value` line per entry.
pub fn write_key_values<W: Write>(mut w: W, entries: &[(String, String)]) -> Result<()> {
    for (k, v) in entries {
        if k.contains('=') || k.contains('\n') || v.contains('\n') {
            return Err(Error::InvalidParameter(format!("entry `{k}` cannot be written as key=value")));
        }
        writeln!(w, "{k}={v}")?;
    }
    w.flush()?;
    Ok(())
}

/// Blank lines and lines starting with `#` are skipped.
pub fn read_key_values<R: Read>(r: R) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (n, line) in BufReader::new(r).lines().enumerate() {
        let line = line?;
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        let (k, v) = t.split_once('=').ok_or_else(|| Error::Parse(format!("line {}: missing `=`", n + 1)))?;
        out.push((k.trim().to_owned(), v.trim().to_owned()));
    }
    Ok(out)
}

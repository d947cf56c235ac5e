//! CSV traces, gap series, summary tables and audit rows.
//!
//! Floats are written with 17 significant digits (`{:.16e}`); absent values
//! are empty fields.

use std::fmt::Write as _;
use std::io::{Read, Write};

use ellipcenters::diagnostics::AuditReport;
use ellipcenters::solvers::{IterateRecord, RunTrace};

use crate::error::{HarnessError, Result};

pub const TRACE_HEADER: [&str; 11] = [
    "k",
    "f",
    "gap",
    "grad_norm",
    "t_k",
    "sin2_theta",
    "li_flag",
    "ratio",
    "grad_evals_outer",
    "grad_evals_total",
    "value_evals_total",
];

/// One row of a trace file.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub k: u32,
    pub f: f64,
    pub gap: f64,
    pub grad_norm: f64,
    pub t_k: Option<f64>,
    pub sin2_theta: Option<f64>,
    pub li_flag: Option<bool>,
    pub ratio: Option<f64>,
    pub grad_evals_outer: u64,
    pub grad_evals_total: u64,
    pub value_evals_total: u64,
}

impl TraceRow {
    pub fn from_record(r: &IterateRecord, f_star: f64) -> Self {
        Self {
            k: r.k,
            f: r.f_val,
            gap: r.f_val - f_star,
            grad_norm: r.grad_norm,
            t_k: r.t_k,
            sin2_theta: r.sin2_theta,
            li_flag: r.li_flag,
            ratio: r.ratio,
            grad_evals_outer: r.grad_evals_outer,
            grad_evals_total: r.grad_evals_total,
            value_evals_total: r.value_evals_total,
        }
    }
}

pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt_f64).unwrap_or_default()
}

pub fn trace_rows(trace: &RunTrace, f_star: f64) -> Vec<TraceRow> {
    trace
        .records
        .iter()
        .map(|r| TraceRow::from_record(r, f_star))
        .collect()
}

pub fn write_trace_csv<W: Write>(w: W, trace: &RunTrace, f_star: f64) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(TRACE_HEADER)?;
    for row in trace_rows(trace, f_star) {
        wr.write_record([
            row.k.to_string(),
            fmt_f64(row.f),
            fmt_f64(row.gap),
            fmt_f64(row.grad_norm),
            fmt_opt(row.t_k),
            fmt_opt(row.sin2_theta),
            row.li_flag
                .map(|b| if b { "1" } else { "0" }.to_string())
                .unwrap_or_default(),
            fmt_opt(row.ratio),
            row.grad_evals_outer.to_string(),
            row.grad_evals_total.to_string(),
            row.value_evals_total.to_string(),
        ])?;
    }
    wr.flush().map_err(csv::Error::from)?;
    Ok(())
}

fn field<T: std::str::FromStr>(rec: &csv::StringRecord, i: usize, line: usize) -> Result<T> {
    rec.get(i)
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| HarnessError::Parse {
            line,
            msg: format!("bad `{}` field", TRACE_HEADER[i]),
        })
}

fn opt_field<T: std::str::FromStr>(
    rec: &csv::StringRecord,
    i: usize,
    line: usize,
) -> Result<Option<T>> {
    match rec.get(i) {
        Some("") => Ok(None),
        _ => field(rec, i, line).map(Some),
    }
}

pub fn read_trace_csv<R: Read>(r: R) -> Result<Vec<TraceRow>> {
    let mut rd = csv::Reader::from_reader(r);
    if rd.headers()?.iter().ne(TRACE_HEADER) {
        return Err(HarnessError::Parse {
            line: 1,
            msg: "unexpected trace header".into(),
        });
    }
    let mut rows = Vec::new();
    for (i, rec) in rd.records().enumerate() {
        let rec = rec?;
        let line = i + 2;
        let li_flag = match rec.get(6) {
            Some("") => None,
            Some("1") => Some(true),
            Some("0") => Some(false),
            _ => {
                return Err(HarnessError::Parse {
                    line,
                    msg: "bad `li_flag` field".into(),
                })
            }
        };
        rows.push(TraceRow {
            k: field(&rec, 0, line)?,
            f: field(&rec, 1, line)?,
            gap: field(&rec, 2, line)?,
            grad_norm: field(&rec, 3, line)?,
            t_k: opt_field(&rec, 4, line)?,
            sin2_theta: opt_field(&rec, 5, line)?,
            li_flag,
            ratio: opt_field(&rec, 7, line)?,
            grad_evals_outer: field(&rec, 8, line)?,
            grad_evals_total: field(&rec, 9, line)?,
            value_evals_total: field(&rec, 10, line)?,
        });
    }
    Ok(rows)
}

/// Gap against both gradient counters, for plotting.
pub fn write_gap_series<W: Write>(w: W, trace: &RunTrace, f_star: f64) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(["grad_evals_outer", "grad_evals_total", "gap"])?;
    for r in &trace.records {
        wr.write_record([
            r.grad_evals_outer.to_string(),
            r.grad_evals_total.to_string(),
            fmt_f64(r.f_val - f_star),
        ])?;
    }
    wr.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// One solver's line in the comparison table.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub solver: String,
    pub n: usize,
    pub kappa: f64,
    pub status: String,
    pub iterations: usize,
    pub wall_ms: f64,
    pub grad_evals_outer: u64,
    pub grad_evals_total: u64,
    pub terminal_gap: f64,
    pub final_grad_norm: f64,
}

pub const SUMMARY_HEADER: [&str; 10] = [
    "solver",
    "n",
    "kappa",
    "status",
    "iterations",
    "wall_ms",
    "grad_evals_outer",
    "grad_evals_total",
    "terminal_gap",
    "final_grad_norm",
];

pub fn render_summary_table(rows: &[SummaryRow]) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "{:<9} {:>6} {:>8} {:<15} {:>7} {:>10} {:>11} {:>11} {:>12} {:>12}",
        "solver",
        "n",
        "kappa",
        "status",
        "iters",
        "wall ms",
        "grads outer",
        "grads total",
        "gap",
        "|grad|"
    );
    for r in rows {
        let _ = writeln!(
            s,
            "{:<9} {:>6} {:>8} {:<15} {:>7} {:>10.1} {:>11} {:>11} {:>12.3e} {:>12.3e}",
            r.solver,
            r.n,
            r.kappa,
            r.status,
            r.iterations,
            r.wall_ms,
            r.grad_evals_outer,
            r.grad_evals_total,
            r.terminal_gap,
            r.final_grad_norm
        );
    }
    s
}

pub fn write_summary_csv<W: Write>(w: W, rows: &[SummaryRow]) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(SUMMARY_HEADER)?;
    for r in rows {
        wr.write_record([
            r.solver.clone(),
            r.n.to_string(),
            fmt_f64(r.kappa),
            r.status.clone(),
            r.iterations.to_string(),
            format!("{:.3}", r.wall_ms),
            r.grad_evals_outer.to_string(),
            r.grad_evals_total.to_string(),
            fmt_f64(r.terminal_gap),
            fmt_f64(r.final_grad_norm),
        ])?;
    }
    wr.flush().map_err(csv::Error::from)?;
    Ok(())
}

pub fn write_audit_csv<W: Write>(w: W, report: &AuditReport) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(["audit", "step", "value", "bound", "slack", "pass"])?;
    for c in &report.checks {
        wr.write_record([
            c.audit.name().to_string(),
            c.step.to_string(),
            fmt_f64(c.value),
            fmt_f64(c.bound),
            fmt_f64(c.slack()),
            u8::from(c.pass).to_string(),
        ])?;
    }
    wr.flush().map_err(csv::Error::from)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use ellipcenters::diagnostics::fill_ratios;
    use ellipcenters::objectives::generate_logreg;
    use ellipcenters::reference::compute_reference;
    use ellipcenters::solvers::{run, SolverConfig, SolverId};

    #[test]
    fn trace_round_trip() {
        let p = generate_logreg(10, 5, 20.0, 1).unwrap();
        let fs = compute_reference(&p).unwrap().f_star;
        for id in SolverId::ALL {
            let mut t = run(id, &p, &[0.0; 10], &SolverConfig::default()).unwrap();
            let fs = fs.min(t.min_value());
            fill_ratios(&mut t, fs).unwrap();
            let mut buf = Vec::new();
            write_trace_csv(&mut buf, &t, fs).unwrap();
            let rows = read_trace_csv(buf.as_slice()).unwrap();
            assert_eq!(rows, trace_rows(&t, fs), "{id}");
        }
    }

    #[test]
    fn non_me_rows_leave_me_columns_empty() {
        let p = generate_logreg(4, 2, 5.0, 1).unwrap();
        let t = run(SolverId::GdL, &p, &[0.0; 4], &SolverConfig::default()).unwrap();
        let mut buf = Vec::new();
        write_trace_csv(&mut buf, &t, 0.0).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let first = text.lines().nth(1).unwrap();
        assert_eq!(first.split(',').nth(5), Some(""));
        assert_eq!(first.split(',').nth(6), Some(""));
    }

    #[test]
    fn rejects_foreign_header() {
        assert!(read_trace_csv("a,b\n1,2\n".as_bytes()).is_err());
    }
}

//! CSV output for fields, convergence reports, traces and spectra.
//!
//! Floating values are written with 17 significant digits, so reading them
//! back yields the identical `f64`.

use std::fs::File;
use std::path::Path;

use ::csv::{ReaderBuilder, StringRecord, Writer};

use crate::error::{LabError, Result};
use crate::experiments::{ConvergenceReport, SpectrumRow};
use crate::field::ScalarField;

pub const FIELD_HEADER: [&str; 5] = ["i", "j", "x", "y", "value"];
pub const REPORT_HEADER: [&str; 13] = [
    "n",
    "dx",
    "dt",
    "steps",
    "sJ",
    "final_time",
    "l2",
    "linf",
    "l2_rel",
    "linf_rel",
    "steps_b",
    "dt_b",
    "status",
];
pub const TRACE_HEADER: [&str; 4] = ["n", "solver", "time", "gamma"];
pub const SPECTRUM_HEADER: [&str; 16] = [
    "n",
    "dt",
    "kx",
    "ky",
    "index",
    "gamma_re",
    "gamma_im",
    "ambiguous",
    "heat_rate",
    "root1_re",
    "root1_im",
    "root2_re",
    "root2_im",
    "class",
    "c0",
    "g",
];

/// Text form with 17 significant digits.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn opt(v: Option<f64>) -> String {
    v.map(fmt_f64).unwrap_or_default()
}

fn io_err(path: &Path, e: std::io::Error) -> LabError {
    LabError::Io {
        path: path.to_path_buf(),
        source: e,
    }
}

fn csv_err(path: &Path, e: ::csv::Error) -> LabError {
    let line = e.position().map(|p| p.line() as usize).unwrap_or(0);
    match e.into_kind() {
        ::csv::ErrorKind::Io(io) => io_err(path, io),
        other => LabError::Parse {
            path: path.to_path_buf(),
            line,
            reason: format!("{other:?}"),
        },
    }
}

fn writer(path: &Path) -> Result<Writer<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    }
    let file = File::create(path).map_err(|e| io_err(path, e))?;
    Ok(Writer::from_writer(file))
}

fn write_rows<I, R>(path: &Path, header: &[&str], rows: I) -> Result<()>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator<Item = String>,
{
    let mut w = writer(path)?;
    w.write_record(header).map_err(|e| csv_err(path, e))?;
    for row in rows {
        w.write_record(row).map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| io_err(path, e))
}

fn read_rows(path: &Path, header: &[&str]) -> Result<Vec<(usize, StringRecord)>> {
    let mut r = ReaderBuilder::new()
        .flexible(false)
        .from_path(path)
        .map_err(|e| csv_err(path, e))?;
    let found = r.headers().map_err(|e| csv_err(path, e))?.clone();
    if found.iter().ne(header.iter().copied()) {
        return Err(LabError::Parse {
            path: path.to_path_buf(),
            line: 1,
            reason: format!("expected header {}", header.join(",")),
        });
    }
    let mut out = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(|e| csv_err(path, e))?;
        let line = rec.position().map(|p| p.line() as usize).unwrap_or(0);
        out.push((line, rec));
    }
    Ok(out)
}

fn parse_cell<T: std::str::FromStr>(
    path: &Path,
    line: usize,
    rec: &StringRecord,
    col: usize,
) -> Result<T> {
    let text = rec.get(col).unwrap_or("");
    text.parse().map_err(|_| LabError::Parse {
        path: path.to_path_buf(),
        line,
        reason: format!("column {} holds `{text}`", col + 1),
    })
}

fn parse_opt(path: &Path, line: usize, rec: &StringRecord, col: usize) -> Result<Option<f64>> {
    match rec.get(col) {
        None | Some("") => Ok(None),
        Some(_) => parse_cell(path, line, rec, col).map(Some),
    }
}

/// One row of a field file.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldRecord {
    pub i: usize,
    pub j: usize,
    pub x: f64,
    pub y: f64,
    pub value: f64,
}

pub fn write_field_csv(field: &ScalarField, path: &Path) -> Result<()> {
    let rows = (0..field.ny).flat_map(|j| {
        (0..field.nx).map(move |i| {
            let (x, y) = field.cell_center(i, j);
            vec![
                i.to_string(),
                j.to_string(),
                fmt_f64(x),
                fmt_f64(y),
                fmt_f64(field.get(i, j)),
            ]
        })
    });
    write_rows(path, &FIELD_HEADER, rows)
}

pub fn read_field_csv(path: &Path) -> Result<Vec<FieldRecord>> {
    read_rows(path, &FIELD_HEADER)?
        .into_iter()
        .map(|(line, rec)| {
            Ok(FieldRecord {
                i: parse_cell(path, line, &rec, 0)?,
                j: parse_cell(path, line, &rec, 1)?,
                x: parse_cell(path, line, &rec, 2)?,
                y: parse_cell(path, line, &rec, 3)?,
                value: parse_cell(path, line, &rec, 4)?,
            })
        })
        .collect()
}

/// Report rows: one per mesh, then a trailer with `order` in the `n` column
/// and the fitted orders under `l2` and `linf`.
pub fn write_report_csv(report: &ConvergenceReport, path: &Path) -> Result<()> {
    let mut rows: Vec<Vec<String>> = report
        .rows
        .iter()
        .map(|row| {
            let mut r = vec![String::new(); REPORT_HEADER.len()];
            r[0] = row.n.to_string();
            if let Some(p) = &row.plan {
                r[1] = fmt_f64(p.dx);
                r[2] = fmt_f64(p.dt);
                r[3] = p.steps.to_string();
                r[4] = fmt_f64(p.s_j);
                r[5] = fmt_f64(p.final_time);
            }
            if let Some(n) = row.norms {
                r[6] = fmt_f64(n.l2);
                r[7] = fmt_f64(n.linf);
            }
            if let Some(n) = row.relative {
                r[8] = fmt_f64(n.l2);
                r[9] = fmt_f64(n.linf);
            }
            if let Some(b) = &row.b {
                r[10] = b.steps.to_string();
                r[11] = fmt_f64(b.dt);
            }
            r[12] = match &row.failure {
                Some(msg) => format!("failed: {msg}"),
                None => "ok".to_string(),
            };
            r
        })
        .collect();
    let mut trailer = vec![String::new(); REPORT_HEADER.len()];
    trailer[0] = "order".into();
    trailer[6] = opt(report.order_l2);
    trailer[7] = opt(report.order_linf);
    trailer[12] = report.order_note.clone().unwrap_or_else(|| "fit".into());
    rows.push(trailer);
    write_rows(path, &REPORT_HEADER, rows)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReportRecord {
    pub n: usize,
    pub dx: Option<f64>,
    pub dt: Option<f64>,
    pub steps: Option<usize>,
    pub s_j: Option<f64>,
    pub final_time: Option<f64>,
    pub l2: Option<f64>,
    pub linf: Option<f64>,
    pub status: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReportTable {
    pub rows: Vec<ReportRecord>,
    pub order_l2: Option<f64>,
    pub order_linf: Option<f64>,
}

pub fn read_report_csv(path: &Path) -> Result<ReportTable> {
    let mut table = ReportTable {
        rows: Vec::new(),
        order_l2: None,
        order_linf: None,
    };
    for (line, rec) in read_rows(path, &REPORT_HEADER)? {
        if rec.get(0) == Some("order") {
            table.order_l2 = parse_opt(path, line, &rec, 6)?;
            table.order_linf = parse_opt(path, line, &rec, 7)?;
            continue;
        }
        let steps = match rec.get(3) {
            None | Some("") => None,
            Some(_) => Some(parse_cell(path, line, &rec, 3)?),
        };
        table.rows.push(ReportRecord {
            n: parse_cell(path, line, &rec, 0)?,
            dx: parse_opt(path, line, &rec, 1)?,
            dt: parse_opt(path, line, &rec, 2)?,
            steps,
            s_j: parse_opt(path, line, &rec, 4)?,
            final_time: parse_opt(path, line, &rec, 5)?,
            l2: parse_opt(path, line, &rec, 6)?,
            linf: parse_opt(path, line, &rec, 7)?,
            status: rec.get(12).unwrap_or("").to_string(),
        });
    }
    Ok(table)
}

/// Autocorrelation traces of both solvers on every successful mesh.
pub fn write_trace_csv(report: &ConvergenceReport, path: &Path) -> Result<()> {
    let rows = report.rows.iter().flat_map(|row| {
        [&row.a, &row.b].into_iter().flatten().flat_map(move |run| {
            run.trace.iter().map(move |p| {
                vec![
                    row.n.to_string(),
                    run.kind.name().to_string(),
                    fmt_f64(p.time),
                    fmt_f64(p.gamma),
                ]
            })
        })
    });
    write_rows(path, &TRACE_HEADER, rows)
}

/// One row per lattice rate, with the model predictions repeated alongside.
pub fn write_spectrum_csv(rows: &[SpectrumRow], path: &Path) -> Result<()> {
    let out = rows.iter().flat_map(|row| {
        row.spectra.iter().flat_map(move |s| {
            s.lbm_rates.iter().enumerate().map(move |(idx, rate)| {
                vec![
                    row.plan.n.to_string(),
                    fmt_f64(row.plan.dt),
                    fmt_f64(s.k.kx),
                    fmt_f64(s.k.ky),
                    idx.to_string(),
                    fmt_f64(rate.gamma.re),
                    fmt_f64(rate.gamma.im),
                    rate.branch_ambiguous.to_string(),
                    fmt_f64(s.heat_rate),
                    fmt_f64(s.acoustic_roots[0].re),
                    fmt_f64(s.acoustic_roots[0].im),
                    fmt_f64(s.acoustic_roots[1].re),
                    fmt_f64(s.acoustic_roots[1].im),
                    s.mode_class.name().to_string(),
                    fmt_f64(s.c0),
                    fmt_f64(s.g),
                ]
            })
        })
    });
    write_rows(path, &SPECTRUM_HEADER, out)
}

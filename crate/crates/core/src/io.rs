//! CSV encoding of grids, densities, diagnostics and checks.
//!
//! Floats are written as `{:.16e}` (17 significant digits), which round-trips
//! every finite `f64` and makes repeated runs byte-identical.

use std::io::{Read, Write};

use crate::diagnostics::{BoundCheck, CheckKind, CheckStatus};
use crate::error::{Error, Result};
use crate::functional::PiecewiseDensity;
use crate::grid::QuantileGrid;
use crate::solver::StepDiagnostics;

/// Fixed 17-significant-digit encoding.
pub fn fmt_f64(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        }
    } else {
        format!("{v:.16e}")
    }
}

fn parse_f64(field: &str, line: usize) -> Result<f64> {
    field.trim().parse::<f64>().map_err(|_| Error::Parse {
        line,
        column: 0,
        message: format!("not a number: '{field}'"),
    })
}

fn parse_usize(field: &str, line: usize) -> Result<usize> {
    field.trim().parse::<usize>().map_err(|_| Error::Parse {
        line,
        column: 0,
        message: format!("not an integer: '{field}'"),
    })
}

fn check_header(rdr: &mut csv::Reader<impl Read>, want: &[&str]) -> Result<()> {
    let h = rdr.headers()?;
    if h.iter().map(str::trim).ne(want.iter().copied()) {
        return Err(Error::Parse {
            line: 1,
            column: 0,
            message: format!(
                "expected header '{}', found '{}'",
                want.join(","),
                h.iter().collect::<Vec<_>>().join(",")
            ),
        });
    }
    Ok(())
}

fn records<R: Read>(r: R, header: &[&str]) -> Result<Vec<(usize, csv::StringRecord)>> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(r);
    check_header(&mut rdr, header)?;
    rdr.records()
        .enumerate()
        .map(|(i, rec)| Ok((i + 2, rec?)))
        .collect()
}

pub const GRID_HEADER: [&str; 2] = ["s", "g"];

/// Writes `s,g` rows.
pub fn write_grid<W: Write>(w: W, g: &QuantileGrid) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(GRID_HEADER)?;
    for (i, &v) in g.values().iter().enumerate() {
        wtr.write_record([fmt_f64(g.midpoint(i)), fmt_f64(v)])?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn read_grid<R: Read>(r: R) -> Result<QuantileGrid> {
    let values = records(r, &GRID_HEADER)?
        .into_iter()
        .map(|(line, rec)| parse_f64(&rec[1], line))
        .collect::<Result<Vec<_>>>()?;
    QuantileGrid::new(values)
}

pub const DENSITY_HEADER: [&str; 5] = ["kind", "x_lo", "x_hi", "density", "mass"];

/// Writes `ac` rows for density pieces and `atom` rows (empty density) for
/// point masses, sorted by location.
pub fn write_density<W: Write>(w: W, d: &PiecewiseDensity) -> Result<()> {
    let mut rows: Vec<(f64, [String; 5])> = d
        .pieces
        .iter()
        .map(|p| {
            (
                p.x_lo,
                [
                    "ac".into(),
                    fmt_f64(p.x_lo),
                    fmt_f64(p.x_hi),
                    fmt_f64(p.density),
                    fmt_f64(p.mass()),
                ],
            )
        })
        .chain(d.atoms.iter().map(|&(x, m)| {
            (
                x,
                [
                    "atom".into(),
                    fmt_f64(x),
                    fmt_f64(x),
                    String::new(),
                    fmt_f64(m),
                ],
            )
        }))
        .collect();
    rows.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(DENSITY_HEADER)?;
    for (_, r) in rows {
        wtr.write_record(r)?;
    }
    wtr.flush()?;
    Ok(())
}

pub const DIAGNOSTICS_HEADER: [&str; 7] = [
    "step",
    "time",
    "F",
    "W2_to_target",
    "mono_violations",
    "supp_lo",
    "supp_hi",
];

pub fn write_diagnostics<W: Write>(w: W, diags: &[StepDiagnostics]) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(DIAGNOSTICS_HEADER)?;
    for d in diags {
        wtr.write_record([
            d.step.to_string(),
            fmt_f64(d.time),
            fmt_f64(d.f),
            fmt_f64(d.w2_to_target),
            d.mono_violations.to_string(),
            fmt_f64(d.supp_lo),
            fmt_f64(d.supp_hi),
        ])?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn read_diagnostics<R: Read>(r: R) -> Result<Vec<StepDiagnostics>> {
    records(r, &DIAGNOSTICS_HEADER)?
        .into_iter()
        .map(|(line, rec)| {
            Ok(StepDiagnostics {
                step: parse_usize(&rec[0], line)?,
                time: parse_f64(&rec[1], line)?,
                f: parse_f64(&rec[2], line)?,
                w2_to_target: parse_f64(&rec[3], line)?,
                mono_violations: parse_usize(&rec[4], line)?,
                supp_lo: parse_f64(&rec[5], line)?,
                supp_hi: parse_f64(&rec[6], line)?,
            })
        })
        .collect()
}

pub const CHECKS_HEADER: [&str; 6] = ["check", "time", "observed", "bound", "slack", "status"];

pub fn write_checks<W: Write>(w: W, checks: &[BoundCheck]) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(CHECKS_HEADER)?;
    for c in checks {
        wtr.write_record([
            c.kind.name().to_string(),
            fmt_f64(c.time),
            fmt_f64(c.observed),
            fmt_f64(c.bound),
            fmt_f64(c.slack),
            c.status.name().to_string(),
        ])?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn read_checks<R: Read>(r: R) -> Result<Vec<BoundCheck>> {
    records(r, &CHECKS_HEADER)?
        .into_iter()
        .map(|(line, rec)| {
            let bad = |what: &str| Error::Parse {
                line,
                column: 0,
                message: format!("unknown {what}"),
            };
            Ok(BoundCheck {
                kind: CheckKind::from_name(rec[0].trim()).ok_or_else(|| bad("check"))?,
                time: parse_f64(&rec[1], line)?,
                observed: parse_f64(&rec[2], line)?,
                bound: parse_f64(&rec[3], line)?,
                slack: parse_f64(&rec[4], line)?,
                status: CheckStatus::from_name(rec[5].trim()).ok_or_else(|| bad("status"))?,
            })
        })
        .collect()
}

pub const INDEX_HEADER: [&str; 3] = ["step", "time", "file"];

/// One row per stored snapshot.
#[derive(Debug, Clone, PartialEq)]
pub struct IndexEntry {
    pub step: usize,
    pub time: f64,
    pub file: String,
}

pub fn write_index<W: Write>(w: W, entries: &[IndexEntry]) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(INDEX_HEADER)?;
    for e in entries {
        wtr.write_record([e.step.to_string(), fmt_f64(e.time), e.file.clone()])?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn read_index<R: Read>(r: R) -> Result<Vec<IndexEntry>> {
    records(r, &INDEX_HEADER)?
        .into_iter()
        .map(|(line, rec)| {
            Ok(IndexEntry {
                step: parse_usize(&rec[0], line)?,
                time: parse_f64(&rec[1], line)?,
                file: rec[2].trim().to_string(),
            })
        })
        .collect()
}

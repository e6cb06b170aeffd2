//! CSV emitters and the field reader. Floats are written in their shortest
//! round-trip decimal form, so a written field reads back bit-for-bit.

use std::fs::File;
use std::path::Path;

use gpflow_core::{Complex, Field, Grid, GroundState, Record};

use crate::error::{CliError, CliResult};

pub const ENERGY_SERIES_HEADER: [&str; 9] =
    ["n", "energy", "lambda", "mass", "tilde_l2", "inf_increment", "h1_increment_sq", "krylov_iters", "tau_used"];
pub const SUMMARY_HEADER: [&str; 5] = ["E", "mu", "steps", "converged", "stationarity_residual"];
pub const FIELD_HEADER: [&str; 8] = ["x", "y", "re1", "im1", "re2", "im2", "dens1", "dens2"];
pub const SWEEP_HEADER: [&str; 8] = ["k11", "k12", "k22", "tau", "E", "steps", "converged", "monotone"];

pub fn num(v: f64) -> String {
    format!("{v:?}")
}

fn writer(path: &Path) -> CliResult<csv::Writer<File>> {
    let file = File::create(path).map_err(|e| CliError::Io(format!("cannot create {}: {e}", path.display())))?;
    Ok(csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(file))
}

pub fn write_energy_series(path: &Path, records: &[Record]) -> CliResult<()> {
    let mut w = writer(path)?;
    w.write_record(ENERGY_SERIES_HEADER)?;
    for r in records {
        w.write_record([
            r.n.to_string(),
            num(r.energy),
            num(r.lambda),
            num(r.mass),
            num(r.tilde_l2),
            num(r.inf_increment),
            r.h1_increment_sq.map(num).unwrap_or_default(),
            r.krylov_iters.to_string(),
            num(r.tau_used),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_summary(path: &Path, result: &GroundState) -> CliResult<()> {
    let mut w = writer(path)?;
    w.write_record(SUMMARY_HEADER)?;
    w.write_record([
        num(result.energy.total),
        num(result.mu),
        result.steps.to_string(),
        result.converged.to_string(),
        num(result.stationarity_residual),
    ])?;
    w.flush()?;
    Ok(())
}

pub fn write_field(path: &Path, psi: &Field) -> CliResult<()> {
    let grid = psi.grid();
    let n = grid.n_interior();
    let mut w = writer(path)?;
    w.write_record(FIELD_HEADER)?;
    for k in 0..n {
        for j in 0..n {
            let (a, b) = (psi.get(0, j, k), psi.get(1, j, k));
            w.write_record([
                num(grid.coord(j)),
                num(grid.coord(k)),
                num(a.re),
                num(a.im),
                num(b.re),
                num(b.im),
                num(a.norm_sqr()),
                num(b.norm_sqr()),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Reads a field written by [`write_field`] and checks it lives on `grid`.
pub fn read_field(path: &Path, grid: Grid) -> CliResult<Field> {
    let bad = |msg: String| CliError::Input(format!("{}: {msg}", path.display()));
    let mut reader = csv::Reader::from_path(path).map_err(|e| bad(e.to_string()))?;
    let header = reader.headers().map_err(|e| bad(e.to_string()))?.clone();
    if header.iter().collect::<Vec<_>>() != FIELD_HEADER {
        return Err(bad(format!("unexpected header `{}`", header.iter().collect::<Vec<_>>().join(","))));
    }
    let n = grid.n_interior();
    let mut field = Field::zeros(grid);
    let tol = 1e-9 * grid.half_width();
    let mut rows = 0;
    for (i, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| bad(e.to_string()))?;
        if i >= n * n {
            return Err(bad(format!("more rows than the {n}x{n} interior grid")));
        }
        let value = |c: usize| -> CliResult<f64> {
            rec.get(c)
                .ok_or_else(|| bad(format!("row {}: missing column {}", i + 2, FIELD_HEADER[c])))?
                .parse()
                .map_err(|_| bad(format!("row {}: bad number in column {}", i + 2, FIELD_HEADER[c])))
        };
        let (j, k) = (i % n, i / n);
        if (value(0)? - grid.coord(j)).abs() > tol || (value(1)? - grid.coord(k)).abs() > tol {
            return Err(bad(format!("row {} does not sit on the configured grid", i + 2)));
        }
        field.set(0, j, k, Complex::new(value(2)?, value(3)?));
        field.set(1, j, k, Complex::new(value(4)?, value(5)?));
        rows += 1;
    }
    if rows != n * n {
        return Err(bad(format!("expected {} rows, found {rows}", n * n)));
    }
    if !field.is_finite() {
        return Err(bad("non-finite values".into()));
    }
    Ok(field)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub k11: f64,
    pub k12: f64,
    pub k22: f64,
    pub tau: f64,
    /// `None` when the cell failed.
    pub outcome: Option<CellOutcome>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellOutcome {
    pub energy: f64,
    pub steps: usize,
    pub converged: bool,
    pub monotone: bool,
}

pub fn write_sweep(path: &Path, rows: &[SweepRow]) -> CliResult<()> {
    let mut w = writer(path)?;
    w.write_record(SWEEP_HEADER)?;
    for r in rows {
        let (e, steps, conv, mono) = match r.outcome {
            Some(o) => (num(o.energy), o.steps.to_string(), o.converged.to_string(), o.monotone.to_string()),
            None => (String::new(), String::new(), "false".into(), String::new()),
        };
        w.write_record([num(r.k11), num(r.k12), num(r.k22), num(r.tau), e, steps, conv, mono])?;
    }
    w.flush()?;
    Ok(())
}

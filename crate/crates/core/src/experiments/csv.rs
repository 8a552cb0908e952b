//! Tabular output of sweeps and density matrices.
//!
//! Floats carry 12 significant digits, undefined observables are empty
//! fields and `#` lines echo the parameters and the crate version.

use std::io::{self, Write};

use nalgebra::{DMatrix, Matrix4};
use num_complex::Complex64 as C64;

use crate::model::ModelParams;
use crate::observables::SimResult;
use crate::solvers::Trajectory;

use super::sweep::{SweepMode, SweepResult, SweepRow, Truncation};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Columns after the axis values, in order.
pub const OBSERVABLE_COLUMNS: [&str; 12] = [
    "p_ee",
    "p_e1",
    "p_e2",
    "xi",
    "g2_0",
    "concurrence",
    "pop_plus",
    "pop_minus",
    "n_photon",
    "n_max_used",
    "residual",
    "failed",
];

/// Magnitude below which density-matrix entries are omitted from a dump.
pub const DUMP_THRESHOLD: f64 = 1e-14;

pub fn fmt_float(v: f64) -> String {
    format!("{v:.11e}")
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt_float).unwrap_or_default()
}

pub fn write_params_echo(w: &mut impl Write, p: &ModelParams) -> io::Result<()> {
    writeln!(w, "# delta_a = {}", p.delta_a)?;
    writeln!(w, "# delta_c = {}", p.delta_c)?;
    writeln!(w, "# g0 = {}", p.g0)?;
    writeln!(w, "# phi_z = {}", p.phi_z)?;
    writeln!(w, "# eta = {}", p.eta)?;
    writeln!(w, "# kappa = {}", p.kappa)?;
    writeln!(w, "# gamma = {}", p.gamma)?;
    writeln!(w, "# n_max = {}", p.n_max)
}

fn join(values: &[f64]) -> String {
    values.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(" ")
}

fn write_header(w: &mut impl Write, result: &SweepResult) -> io::Result<()> {
    let spec = &result.spec;
    writeln!(w, "# cavity-blockade {VERSION}")?;
    write_params_echo(w, &spec.base)?;
    for (k, axis) in spec.axes().iter().enumerate() {
        writeln!(w, "# axis{} = {}: {}", k + 1, axis.param.name(), join(&axis.values))?;
    }
    if let Some(r) = spec.eta_over_gamma {
        writeln!(w, "# eta_over_gamma = {r}")?;
    }
    if let Truncation::PerAxisValue { axis, n_max } = &spec.truncation {
        let n: Vec<String> = n_max.iter().map(|n| n.to_string()).collect();
        writeln!(w, "# n_max per axis{axis} value = {}", n.join(" "))?;
    }
    match spec.mode {
        SweepMode::Steady => writeln!(w, "# mode = steady")?,
        SweepMode::Evolve { t_end, dt_out, gamma_units } => {
            let unit = if gamma_units { "1/gamma" } else { "1/kappa" };
            writeln!(w, "# mode = evolve, t_end = {t_end}, dt_out = {dt_out}, time unit = {unit}")?
        }
    }
    let obs: Vec<&str> = spec.observables.iter().map(|o| o.name()).collect();
    writeln!(w, "# observables = {}", obs.join(" "))
}

fn write_row(w: &mut impl Write, row: &SweepRow, time_scale: f64) -> io::Result<()> {
    let mut fields: Vec<String> = row.axis_values.iter().map(|v| fmt_float(*v)).collect();
    if let Some(t) = row.time {
        fields.push(fmt_float(t * time_scale));
    }
    match &row.result {
        Some(r) => fields.extend([
            fmt_float(r.p_ee),
            fmt_float(r.p_e1),
            fmt_float(r.p_e2),
            fmt_opt(r.xi),
            fmt_opt(r.g2_0),
            fmt_float(r.concurrence),
            fmt_float(r.pop_plus),
            fmt_float(r.pop_minus),
            fmt_float(r.n_photon),
        ]),
        None => fields.extend(std::iter::repeat_n(String::new(), 9)),
    }
    fields.push(row.n_max_used.to_string());
    fields.push(fmt_opt(row.residual));
    fields.push(if row.failed() { "1" } else { "0" }.to_string());
    writeln!(w, "{}", fields.join(","))
}

/// Writes a sweep table. Evolve sweeps get a `t` column after the axes,
/// multiplied by `time_scale`.
pub fn write_sweep(w: &mut impl Write, result: &SweepResult, time_scale: f64) -> io::Result<()> {
    write_header(w, result)?;
    let mut columns: Vec<&str> = result.spec.axes().iter().map(|a| a.param.name()).collect();
    if matches!(result.spec.mode, SweepMode::Evolve { .. }) {
        columns.push("t");
    }
    columns.extend(OBSERVABLE_COLUMNS);
    writeln!(w, "{}", columns.join(","))?;
    for row in &result.rows {
        write_row(w, row, time_scale)?;
    }
    for (k, row) in result.rows.iter().enumerate() {
        if let Some(msg) = &row.failure {
            writeln!(w, "# row {k} failed: {msg}")?;
        }
    }
    Ok(())
}

pub fn sweep_to_string(result: &SweepResult, time_scale: f64) -> String {
    let mut buf = Vec::new();
    write_sweep(&mut buf, result, time_scale).expect("writing to memory");
    String::from_utf8(buf).expect("ascii output")
}

/// Single steady-state record: parameter echo, header and one row.
pub fn write_record(w: &mut impl Write, params: &ModelParams, result: &SimResult, residual: f64) -> io::Result<()> {
    writeln!(w, "# cavity-blockade {VERSION}")?;
    write_params_echo(w, params)?;
    writeln!(w, "{}", OBSERVABLE_COLUMNS.join(","))?;
    let row = SweepRow {
        axis_values: Vec::new(),
        time: None,
        result: Some(result.clone()),
        n_max_used: params.n_max,
        residual: Some(residual),
        failure: None,
    };
    write_row(w, &row, 1.0)
}

/// Trajectory table with a leading `t` column multiplied by `time_scale`.
pub fn write_trajectory(
    w: &mut impl Write,
    params: &ModelParams,
    traj: &Trajectory,
    time_scale: f64,
) -> io::Result<()> {
    writeln!(w, "# cavity-blockade {VERSION}")?;
    write_params_echo(w, params)?;
    writeln!(w, "# substeps per output = {}", traj.substeps)?;
    writeln!(w, "t,{}", OBSERVABLE_COLUMNS.join(","))?;
    for (t, r) in traj.times.iter().zip(&traj.observables) {
        let row = SweepRow {
            axis_values: Vec::new(),
            time: Some(*t),
            result: Some(r.clone()),
            n_max_used: params.n_max,
            residual: None,
            failure: None,
        };
        write_row(w, &row, time_scale)?;
    }
    Ok(())
}

/// Flat `(row, col, re, im)` list of entries with magnitude above
/// [`DUMP_THRESHOLD`].
pub fn write_rho_dump(w: &mut impl Write, rho: &DMatrix<C64>) -> io::Result<()> {
    writeln!(w, "row,col,re,im")?;
    for c in 0..rho.ncols() {
        for r in 0..rho.nrows() {
            let z = rho[(r, c)];
            if z.norm() > DUMP_THRESHOLD {
                writeln!(w, "{r},{c},{},{}", fmt_float(z.re), fmt_float(z.im))?;
            }
        }
    }
    Ok(())
}

pub const ATOM_LABELS: [&str; 4] = ["gg", "ge", "eg", "ee"];

/// Real and imaginary parts of a two-qubit density matrix, one entry per line.
pub fn write_atom_matrix(w: &mut impl Write, label: &str, rho: &Matrix4<C64>) -> io::Result<()> {
    for r in 0..4 {
        for c in 0..4 {
            let z = rho[(r, c)];
            writeln!(
                w,
                "{label},{},{},{},{}",
                ATOM_LABELS[r],
                ATOM_LABELS[c],
                fmt_float(z.re),
                fmt_float(z.im)
            )?;
        }
    }
    Ok(())
}

/// `x,y` rows, for contours and other point lists.
pub fn write_points(w: &mut impl Write, names: (&str, &str), points: &[(f64, f64)]) -> io::Result<()> {
    writeln!(w, "{},{}", names.0, names.1)?;
    for (x, y) in points {
        writeln!(w, "{},{}", fmt_float(*x), fmt_float(*y))?;
    }
    Ok(())
}

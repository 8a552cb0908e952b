use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use cavity_blockade::experiments::analysis::{
    contour_points, field_2d, interval_widths, local_maxima, log10_xi, peak_period, steady_atom_state,
};
use cavity_blockade::experiments::csv::{
    fmt_float, write_atom_matrix, write_points, write_record, write_rho_dump, write_sweep, write_trajectory,
};
use cavity_blockade::experiments::dynamics::atom_state_at;
use cavity_blockade::experiments::presets::BAR_GAMMAS;
use cavity_blockade::experiments::{
    entanglement_boundary_check, ground_state, run_sweep, sentinel_check, Preset, SentinelReport, SweepMode,
    SweepResult, SweepSpec,
};
use cavity_blockade::observables::{Observable, SimResult};
use cavity_blockade::solvers::{converge_truncation, evolve as run_evolve, solve_steady, DEFAULT_SELECTION};

use crate::config::{parse_axis, parse_observables, ModelArgs};
use crate::{CliError, SweepArgs};

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| CliError::Usage(format!("cannot write {}: {e}", path.display())))
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "undefined".to_string(), |v| format!("{v:.6e}"))
}

fn summary(r: &SimResult) -> String {
    format!(
        "p_ee={:.6e} p_e1={:.6e} p_e2={:.6e} xi={} g2_0={} concurrence={:.6} pop_plus={:.6e} pop_minus={:.6e} n_photon={:.6e}",
        r.p_ee,
        r.p_e1,
        r.p_e2,
        opt(r.xi),
        opt(r.g2_0),
        r.concurrence,
        r.pop_plus,
        r.pop_minus,
        r.n_photon
    )
}

pub fn steady(model: &ModelArgs, output: Option<PathBuf>, rho: Option<PathBuf>) -> Result<(), CliError> {
    let s = model.settings()?;
    let ss = solve_steady(&s.params)?;
    let r = SimResult::from_state(&ss.rho)?;
    println!("{} residual={:.3e} n_max={}", summary(&r), ss.residual, s.params.n_max);
    if let Some(path) = output {
        let mut w = create(&path)?;
        write_record(&mut w, &s.params, &r, ss.residual)?;
        w.flush()?;
        println!("record: {}", path.display());
    }
    if let Some(path) = rho {
        let mut w = create(&path)?;
        write_rho_dump(&mut w, ss.rho.matrix())?;
        w.flush()?;
        println!("density matrix: {}", path.display());
    }
    Ok(())
}

pub fn evolve(model: &ModelArgs, t_end: Option<f64>, dt_out: Option<f64>, output: &Path) -> Result<(), CliError> {
    let s = model.settings()?;
    let t_end = t_end.or(s.file.t_end).ok_or_else(|| CliError::Usage("--t-end is required".into()))?;
    let dt_out = dt_out.or(s.file.dt_out).unwrap_or(t_end / 1000.0);
    let traj = run_evolve(&s.params, &ground_state(&s.params)?, t_end, dt_out)?;
    let mut w = create(output)?;
    write_trajectory(&mut w, &s.params, &traj, s.time_scale)?;
    w.flush()?;
    let peak = |f: fn(&SimResult) -> f64| {
        traj.times.iter().zip(&traj.observables).map(|(t, r)| (f(r), *t)).fold((f64::MIN, 0.0), |a, b| {
            if b.0 > a.0 {
                b
            } else {
                a
            }
        })
    };
    let (pee, t_pee) = peak(|r| r.p_ee);
    let (c, t_c) = peak(|r| r.concurrence);
    println!("trajectory: {}", output.display());
    println!(
        "outputs={} substeps={} max_p_ee={:.6} at t={} max_concurrence={:.6} at t={} max_trace_error={:.2e}",
        traj.times.len(),
        traj.substeps,
        pee,
        t_pee * s.time_scale,
        c,
        t_c * s.time_scale,
        traj.max_trace_error()
    );
    Ok(())
}

fn write_sentinels(w: &mut impl Write, reports: &[SentinelReport]) -> std::io::Result<()> {
    for s in reports {
        let axes: Vec<String> = s.axis_values.iter().map(|v| v.to_string()).collect();
        writeln!(
            w,
            "# sentinel point {} ({}) n_max {} vs {}: drift {} {}",
            s.grid_index,
            axes.join(" "),
            s.n_max,
            2 * s.n_max,
            fmt_float(s.drift),
            if s.flagged { "FLAGGED" } else { "ok" }
        )?;
    }
    Ok(())
}

fn report_sentinels(reports: &[SentinelReport]) {
    let worst = reports.iter().map(|s| s.drift).fold(0.0, f64::max);
    let flagged = reports.iter().filter(|s| s.flagged).count();
    if reports.is_empty() {
        return;
    }
    if flagged > 0 {
        println!("warning: {flagged} of {} sentinel points drift above tolerance (max {worst:.2e})", reports.len());
    } else {
        println!("sentinels: {} points, max drift {worst:.2e}", reports.len());
    }
}

/// Runs a sweep, its sentinels, and writes the table.
fn run_and_write(
    spec: &SweepSpec,
    workers: Option<usize>,
    sentinels: usize,
    time_scale: f64,
    path: &Path,
) -> Result<SweepResult, CliError> {
    let result = run_sweep(spec, workers)?;
    let reports = if spec.mode == SweepMode::Steady && sentinels > 0 {
        sentinel_check(&result, sentinels, workers)?
    } else {
        Vec::new()
    };
    let mut w = create(path)?;
    write_sweep(&mut w, &result, time_scale)?;
    write_sentinels(&mut w, &reports)?;
    w.flush()?;
    println!("table: {} ({} rows, {} failed)", path.display(), result.rows.len(), result.failures());
    report_sentinels(&reports);
    Ok(result)
}

pub fn sweep(model: &ModelArgs, args: &SweepArgs, output: &Path) -> Result<(), CliError> {
    let s = model.settings()?;
    let axis1 = args
        .axis1
        .as_deref()
        .or(s.file.axis1.as_deref())
        .ok_or_else(|| CliError::Usage("--axis1 is required".into()))?;
    let mut spec = SweepSpec::steady(s.params, parse_axis(axis1)?, None);
    if let Some(a2) = args.axis2.as_deref().or(s.file.axis2.as_deref()) {
        spec.axis2 = Some(parse_axis(a2)?);
    }
    spec.eta_over_gamma = args.eta_over_gamma.or(s.file.eta_over_gamma);
    if let Some(names) = args.observables.as_ref().or(s.file.observables.as_ref()) {
        spec.observables = parse_observables(names)?;
    }
    let mode = args.mode.as_deref().or(s.file.mode.as_deref()).unwrap_or("steady");
    spec.mode = match mode {
        "steady" => SweepMode::Steady,
        "evolve" => {
            let t_end = args
                .t_end
                .or(s.file.t_end)
                .ok_or_else(|| CliError::Usage("evolve sweeps need --t-end".into()))?;
            let dt_out = args.dt_out.or(s.file.dt_out).unwrap_or(t_end / 1000.0);
            SweepMode::Evolve { t_end, dt_out, gamma_units: false }
        }
        other => return Err(CliError::Usage(format!("unknown mode '{other}', expected steady or evolve"))),
    };
    run_and_write(&spec, s.workers, args.sentinels, s.time_scale, output)?;
    Ok(())
}

fn sibling(dir: &Path, name: &str) -> PathBuf {
    dir.join(name)
}

fn write_xi_map(result: &SweepResult, dir: &Path, name: &str) -> Result<(), CliError> {
    let field = field_2d(result, log10_xi);
    let spec = &result.spec;
    let a2 = spec.axis2.as_ref().expect("map presets are 2-D");
    let path = sibling(dir, &format!("{name}_log10_xi.csv"));
    let mut w = create(&path)?;
    writeln!(w, "{},{},log10_xi", spec.axis1.param.name(), a2.param.name())?;
    for (i, x) in spec.axis1.values.iter().enumerate() {
        for (j, y) in a2.values.iter().enumerate() {
            let v = field[i][j].map(fmt_float).unwrap_or_default();
            writeln!(w, "{},{},{v}", fmt_float(*x), fmt_float(*y))?;
        }
    }
    w.flush()?;
    let contour = contour_points(result, &field, 0.0);
    let cpath = sibling(dir, &format!("{name}_xi_contour.csv"));
    let mut w = create(&cpath)?;
    write_points(&mut w, (spec.axis1.param.name(), a2.param.name()), &contour)?;
    w.flush()?;
    let below = field.iter().flatten().filter(|v| v.is_some_and(|v| v < 0.0)).count();
    println!("log10(xi) map: {} ({below} of {} points below 0)", path.display(), spec.grid_len());
    println!("xi = 1 contour: {} ({} points)", cpath.display(), contour.len());
    Ok(())
}

fn figure_summary(preset: Preset, result: &SweepResult, dir: &Path) -> Result<(), CliError> {
    let spec = &result.spec;
    match preset {
        Preset::Fig2 => {
            let gammas = &spec.axis2.as_ref().expect("fig2 has series").values;
            let n1 = spec.axis1.values.len();
            for (j, g) in gammas.iter().enumerate() {
                let xi: Vec<f64> = (0..n1).filter_map(|i| result.at(i, j).value(Observable::Xi)).collect();
                let g2 = (0..n1).filter_map(|i| result.at(i, j).value(Observable::G2)).fold(f64::MIN, f64::max);
                let pee = |i| result.at(i, j).value(Observable::PEe).unwrap_or(f64::NAN);
                println!(
                    "gamma/kappa={g}: xi in [{:.4}, {:.4}], p_ee {:.3e} -> {:.3e}, max g2(0)={g2:.4}",
                    xi.iter().copied().fold(f64::MAX, f64::min),
                    xi.iter().copied().fold(f64::MIN, f64::max),
                    pee(0),
                    pee(n1 - 1),
                );
            }
        }
        Preset::Fig2Inset => write_xi_map(result, dir, preset.name())?,
        Preset::Fig3 => {
            for row in &result.rows {
                if [1e-3, 1.0].iter().any(|g| (row.axis_values[0] - g).abs() < 1e-9 * g) {
                    println!("gamma/kappa={}: concurrence={:.6}", row.axis_values[0], row.value(Observable::Concurrence).unwrap_or(f64::NAN));
                }
            }
            let path = sibling(dir, "fig3_bars.csv");
            let mut w = create(&path)?;
            writeln!(w, "gamma_over_kappa,row,col,re,im")?;
            for g in BAR_GAMMAS {
                let rho = steady_atom_state(g, spec.base.n_max)?;
                write_atom_matrix(&mut w, &g.to_string(), &rho)?;
            }
            w.flush()?;
            println!("atom density matrices: {}", path.display());
        }
        Preset::Fig3Inset => {
            let b = entanglement_boundary_check(result);
            let path = sibling(dir, "fig3-inset_boundary.csv");
            let mut w = create(&path)?;
            writeln!(w, "# concurrence level {}", b.level)?;
            writeln!(w, "side,axis_value,deviation_cells")?;
            for (side, list) in [("coupling", &b.coupling_side), ("drive", &b.drive_side)] {
                for (v, d) in list {
                    writeln!(w, "{side},{},{}", fmt_float(*v), d.map(fmt_float).unwrap_or_default())?;
                }
            }
            w.flush()?;
            println!("boundary report: {}", path.display());
            println!(
                "max deviation (cells): g0^2=2sqrt2*eta*kappa side {}, sqrt2*eta=gamma side {}; deep-inside min concurrence {}; weakest-drive max concurrence {}",
                opt(b.max_coupling_deviation()),
                opt(b.max_drive_deviation()),
                opt(b.deep_inside_min),
                opt(b.weak_drive_max)
            );
        }
        Preset::Fig4 => {
            write_xi_map(result, dir, preset.name())?;
            let field = field_2d(result, log10_xi);
            let widths = interval_widths(result, &field, 0.0, 1.0);
            let last = spec.axis1.values.len() - 1;
            println!(
                "width of xi<1 band around phi_z=pi: {} at g0/kappa={}, {} at g0/kappa={}",
                opt(widths[last / 4]),
                spec.axis1.values[last / 4],
                opt(widths[last]),
                spec.axis1.values[last]
            );
        }
        Preset::Fig5a | Preset::Fig5b => {
            for index in 0..spec.grid_len() {
                let axis = spec.axis_values(index);
                let rows: Vec<_> = result.rows.iter().filter(|r| r.axis_values == axis).collect();
                let times: Vec<f64> = rows.iter().filter_map(|r| r.time).collect();
                let series = |o: Observable| -> Vec<f64> { rows.iter().filter_map(|r| r.value(o)).collect() };
                let observable = if preset == Preset::Fig5a { Observable::PEe } else { Observable::Concurrence };
                let peaks = local_maxima(&times, &series(observable));
                let first = peaks.first().map(|p| format!("{:.6} at gamma*t={:.6}", p.1, p.0));
                println!(
                    "gamma/kappa={}: first {} peak {}, peak spacing (gamma*t) {}",
                    axis[0],
                    observable.name(),
                    first.unwrap_or_else(|| "none".into()),
                    opt(peak_period(&peaks))
                );
            }
            if preset == Preset::Fig5b {
                let params = spec.params_at(0);
                let t = std::f64::consts::PI / (2.0 * std::f64::consts::SQRT_2 * params.eta);
                let rho = atom_state_at(&params, t)?;
                let path = sibling(dir, "fig5b_snapshot.csv");
                let mut w = create(&path)?;
                writeln!(w, "# t = {t} (1/kappa), gamma*t = {}", t * params.gamma)?;
                writeln!(w, "time,row,col,re,im")?;
                write_atom_matrix(&mut w, &fmt_float(t), &rho)?;
                w.flush()?;
                println!("atom density matrix at t=pi/(2sqrt2*eta): {}", path.display());
            }
        }
    }
    Ok(())
}

pub fn figure(name: &str, out_dir: &Path, workers: Option<usize>, kappa: Option<f64>) -> Result<(), CliError> {
    let preset = Preset::parse(name).map_err(|e| CliError::Usage(e.to_string()))?;
    let kappa = kappa.unwrap_or(1.0);
    if !(kappa > 0.0 && kappa.is_finite()) {
        return Err(CliError::Usage(format!("kappa must be positive, got {kappa}")));
    }
    std::fs::create_dir_all(out_dir)
        .map_err(|e| CliError::Usage(format!("cannot create {}: {e}", out_dir.display())))?;
    let spec = preset.spec();
    let time_scale = match spec.mode {
        SweepMode::Evolve { gamma_units: true, .. } => 1.0,
        _ => 1.0 / kappa,
    };
    let path = sibling(out_dir, &format!("{}.csv", preset.name()));
    let result = run_and_write(&spec, workers, 5, time_scale, &path)?;
    figure_summary(preset, &result, out_dir)
}

pub fn converge(model: &ModelArgs, observables: Option<Vec<String>>) -> Result<(), CliError> {
    let s = model.settings()?;
    let selection = match observables.as_ref().or(s.file.observables.as_ref()) {
        Some(names) => parse_observables(names)?,
        None => DEFAULT_SELECTION.to_vec(),
    };
    let history = converge_truncation(&s.params, &selection)?;
    let names: Vec<&str> = selection.iter().map(|o| o.name()).collect();
    println!("n_max,max_change,{}", names.join(","));
    for level in &history.levels {
        let values: Vec<String> = level.values.iter().map(|v| v.map(fmt_float).unwrap_or_default()).collect();
        let change = level.change.map(fmt_float).unwrap_or_default();
        println!("{},{change},{}", level.n_max, values.join(","));
    }
    println!("converged n_max = {}", history.converged_n_max);
    Ok(())
}

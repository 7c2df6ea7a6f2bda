use std::f64::consts::PI;
use std::path::Path;

use super::config::RunConfig;
use super::output::{Cell, Dataset};
use crate::area::{
    cascade_solve, fit_gamma_tau, handoff_echo_approx, primary_echo_closed, theta1_closed, theta2_closed,
    total_echo_area, AreaTrajectory, Measurement, HANDOFF_Z1, HANDOFF_Z2,
};
use crate::error::{Error, Result};
use crate::mb::{
    compare_with_area_theorem, extract_echo_areas, propagate, CascadeSettings, EnsembleGrid, FieldGrid, GridResolution,
    PulseSpec,
};
use crate::phasing::{extract_phasing, PulseLabel, SymbolicBlochState};

fn pi(x: f64) -> Cell {
    Cell::Num(x / PI)
}

fn strided(len: usize, stride: usize) -> impl Iterator<Item = usize> {
    // always include the last sample
    (0..len).filter(move |j| j % stride == 0 || *j == len - 1)
}

/// Closed-form areas: inputs, the primary echo and the total echo area.
pub fn run_areas(cfg: &RunConfig) -> Result<Dataset> {
    let (t1, t2) = (cfg.theta1(), cfg.theta2());
    let mut d = Dataset::new(
        [
            "alpha_z",
            "theta1_pi",
            "theta2_pi",
            "theta_e1_closed_pi",
            "total_echo_pi",
            "mccall_hahn_total_pi",
        ]
        .map(String::from)
        .to_vec(),
    );
    let z_grid = cfg.medium().z_grid();
    for j in strided(z_grid.len(), cfg.stride) {
        let z = z_grid[j];
        let th2 = theta2_closed(t1, t2, z);
        d.push(vec![
            z.into(),
            pi(theta1_closed(t1, z)),
            pi(th2),
            pi(primary_echo_closed(t1, th2, cfg.gamma_tau, z)),
            pi(total_echo_area(t1, t2, z)),
            pi(theta1_closed(t1 + t2, z)),
        ]);
    }
    Ok(d)
}

fn trajectory_columns(traj: &AreaTrajectory) -> Vec<String> {
    let mut cols = vec!["alpha_z".to_string()];
    cols.extend(traj.labels.iter().map(|l| format!("theta{}_pi", suffix(*l))));
    cols.push("theta_total_pi".into());
    cols.push("mccall_hahn_total_pi".into());
    cols
}

fn suffix(l: PulseLabel) -> String {
    match l {
        PulseLabel::Input(i) => format!("{i}"),
        PulseLabel::Echo(k) => format!("_e{k}"),
    }
}

fn trajectory_row(traj: &AreaTrajectory, j: usize) -> Vec<Cell> {
    let mut row = vec![traj.z_grid[j].into()];
    row.extend(traj.theta.iter().map(|s| pi(s[j])));
    row.push(pi(traj.theta_total[j]));
    row.push(pi(traj.mccall_hahn_total[j]));
    row
}

fn summarize(d: &mut Dataset, traj: &AreaTrajectory) {
    let dev = traj
        .theta_total
        .iter()
        .zip(&traj.mccall_hahn_total)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    d.note("max_total_deviation_rad", dev);
    d.note("tracked_echoes", f64::from(traj.tracked_echoes));
}

/// Echo-train cascade.
pub fn run_cascade(cfg: &RunConfig) -> Result<Dataset> {
    let traj = cascade_solve(
        &cfg.medium(),
        cfg.theta1(),
        cfg.theta2(),
        cfg.max_echo_order,
        cfg.drop_threshold_rad,
    )?;
    let mut d = Dataset::new(trajectory_columns(&traj));
    for j in strided(traj.z_grid.len(), cfg.stride) {
        d.push(trajectory_row(&traj, j));
    }
    summarize(&mut d, &traj);
    Ok(d)
}

/// Figure-regime dataset: the cascade plus the handoff approximations of
/// the second and third echoes.
pub fn run_figure(cfg: &RunConfig) -> Result<Dataset> {
    let traj = cascade_solve(
        &cfg.medium(),
        cfg.theta1(),
        cfg.theta2(),
        cfg.max_echo_order,
        cfg.drop_threshold_rad,
    )?;
    let mut cols = trajectory_columns(&traj);
    cols.push("theta_e2_approx_pi".into());
    cols.push("theta_e3_approx_pi".into());
    let mut d = Dataset::new(cols);

    let area_at = |label: PulseLabel, z: f64| -> Option<f64> {
        let untracked = matches!(label, PulseLabel::Echo(k) if u32::from(k) > traj.tracked_echoes);
        if untracked || z > traj.z_grid[traj.z_grid.len() - 1] {
            return None;
        }
        let j = traj.index_of_z(z);
        Some(traj.series(label).map_or(0.0, |s| s[j]))
    };
    let e2_seed = area_at(PulseLabel::Input(2), HANDOFF_Z1).zip(area_at(PulseLabel::Echo(1), HANDOFF_Z1));
    let e3_seed = area_at(PulseLabel::Echo(1), HANDOFF_Z2).zip(area_at(PulseLabel::Echo(2), HANDOFF_Z2));
    let approx = |seed: Option<(f64, f64)>, z1: f64, z: f64| -> Result<Cell> {
        match seed {
            Some((a, b)) if z >= z1 => Ok(pi(handoff_echo_approx(z1, a, b, cfg.gamma_tau, z)?)),
            _ => Ok(Cell::Empty),
        }
    };

    for j in strided(traj.z_grid.len(), cfg.stride) {
        let z = traj.z_grid[j];
        let mut row = trajectory_row(&traj, j);
        row.push(approx(e2_seed, HANDOFF_Z1, z)?);
        row.push(approx(e3_seed, HANDOFF_Z2, z)?);
        d.push(row);
    }
    summarize(&mut d, &traj);
    d.note("handoff_z1", HANDOFF_Z1);
    d.note("handoff_z2", HANDOFF_Z2);
    Ok(d)
}

fn oracle_setup(cfg: &RunConfig) -> Result<(Vec<PulseSpec>, EnsembleGrid, GridResolution)> {
    let shape = cfg.mb.shape;
    let pulses: Vec<PulseSpec> = [(cfg.theta1(), 0.0), (cfg.theta2(), 1.0)]
        .into_iter()
        .map(|(area, center_time)| PulseSpec {
            area,
            center_time,
            duration: cfg.mb.pulse_width,
            shape,
        })
        .collect();
    let mut res = GridResolution::for_pulses(&pulses, cfg.max_echo_order);
    res.dt = cfg.mb.pulse_width * cfg.mb.dt_fraction;
    res.dz = cfg.mb.dz;
    let span = res.t_end - res.t_start;
    let line_width = cfg.mb.width_product / cfg.mb.pulse_width;
    let mut ensemble = EnsembleGrid::for_time_span(line_width, cfg.mb.nodes, span)?;
    // long echo trains widen the window and so narrow the band at fixed nodes
    let needed = EnsembleGrid::min_nodes(span, cfg.mb.pulse_width);
    if needed > cfg.mb.nodes {
        ensemble = EnsembleGrid::for_time_span(line_width, needed, span)?;
    }
    Ok((pulses, ensemble, res))
}

fn write_field_map(path: &Path, field: &FieldGrid, stride: usize) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_path(path)
        .map_err(|e| Error::Io(std::io::Error::other(e)))?;
    let io = |e: csv::Error| Error::Io(std::io::Error::other(e));
    w.write_record(["alpha_z", "t", "omega"]).map_err(io)?;
    for i in strided(field.z_grid.len(), stride) {
        for n in strided(field.t_grid.len(), stride) {
            w.write_record([
                field.z_grid[i].to_string(),
                field.t_grid[n].to_string(),
                field.omega[i][n].to_string(),
            ])
            .map_err(io)?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Maxwell-Bloch oracle run with windowed areas per depth.
pub fn run_mb(cfg: &RunConfig) -> Result<Dataset> {
    let (pulses, ensemble, res) = oracle_setup(cfg)?;
    let field = propagate(&pulses, &ensemble, &cfg.medium(), &res)?;
    if let Some(path) = &cfg.mb.field_map_path {
        write_field_map(path, &field, cfg.mb.field_stride)?;
    }
    let areas = extract_echo_areas(&field, 1.0, cfg.max_echo_order)?;
    let mut cols = vec!["alpha_z".to_string()];
    cols.extend(areas.labels.iter().map(|l| format!("theta{}_pi", suffix(*l))));
    cols.push("flagged".into());
    let mut d = Dataset::new(cols);
    for j in strided(areas.z_grid.len(), cfg.stride) {
        let mut row = vec![areas.z_grid[j].into()];
        row.extend(areas.areas.iter().map(|s| pi(s[j])));
        let flags: Vec<String> = areas
            .labels
            .iter()
            .zip(&areas.flagged)
            .filter(|(_, f)| f[j])
            .map(|(l, _)| l.short())
            .collect();
        row.push(Cell::Text(flags.join(";")));
        d.push(row);
    }
    let diag = field.diagnostics;
    d.note("max_norm_error", diag.max_norm_error);
    d.note("u_source_ratio", diag.u_source_ratio);
    d.note("calibration_error", diag.calibration_error);
    d.note("ensemble_nodes", ensemble.len() as f64);
    d.note("detuning_half_span", ensemble.half_span());
    Ok(d)
}

/// Oracle against cascade on the same input.
pub fn run_compare(cfg: &RunConfig) -> Result<Dataset> {
    let (pulses, ensemble, res) = oracle_setup(cfg)?;
    let settings = CascadeSettings {
        theta1: cfg.theta1(),
        theta2: cfg.theta2(),
        medium: cfg.medium(),
        max_echo_order: cfg.max_echo_order,
    };
    let report = compare_with_area_theorem(&pulses, &ensemble, &cfg.medium(), &res, &settings)?;
    let mut cols = vec!["alpha_z".to_string()];
    for l in &report.labels {
        let s = suffix(*l);
        cols.push(format!("theta{s}_oracle_pi"));
        cols.push(format!("theta{s}_cascade_pi"));
        cols.push(format!("theta{s}_diff_pi"));
    }
    cols.push("flagged".into());
    let mut d = Dataset::new(cols);
    for j in strided(report.z_grid.len(), cfg.stride) {
        let mut row = vec![report.z_grid[j].into()];
        for i in 0..report.labels.len() {
            row.push(pi(report.oracle[i][j]));
            row.push(pi(report.reference[i][j]));
            row.push(pi(report.abs_diff[i][j]));
        }
        let flags: Vec<String> = report
            .labels
            .iter()
            .zip(&report.flagged)
            .filter(|(_, f)| f[j])
            .map(|(l, _)| l.short())
            .collect();
        row.push(Cell::Text(flags.join(";")));
        d.push(row);
    }
    d.note("max_deviation_pi", report.max_deviation / PI);
    d.note("max_relative", report.max_relative);
    d.note("max_deviation_all_pi", report.max_deviation_all / PI);
    d.note("flagged_fraction", report.flagged_fraction);
    for dev in &report.per_label {
        d.note(&format!("max_deviation_pi.{}", dev.label), dev.max_abs / PI);
    }
    Ok(d)
}

/// Symbolic phasing sources of one echo after a standard sequence.
pub fn run_phasing(cfg: &RunConfig) -> Result<Dataset> {
    let limit = super::config::MAX_ECHO_ORDER_LIMIT + 1;
    if cfg.pulses == 0 || cfg.pulses > limit {
        return Err(Error::Config(format!(
            "pulses must lie in 1..={limit}, got {}",
            cfg.pulses
        )));
    }
    let labels: Vec<PulseLabel> = PulseLabel::standard_sequence(cfg.pulses.max(2) - 1)
        .into_iter()
        .take(cfg.pulses as usize)
        .collect();
    let state = SymbolicBlochState::from_sequence(&labels)?;
    let src = extract_phasing(&state, cfg.echo)?;
    let mut d = Dataset::new(vec!["quantity".into(), "expression".into()]);
    let names: Vec<String> = labels.iter().map(PulseLabel::short).collect();
    d.push(vec![Cell::Text("sequence".into()), Cell::Text(names.join(" "))]);
    d.push(vec![Cell::Text("emission_time".into()), Cell::Num(src.emission_time)]);
    for line in src.describe().lines() {
        let (k, v) = line.split_once(" = ").unwrap_or((line, ""));
        d.push(vec![Cell::Text(k.into()), Cell::Text(v.into())]);
    }
    Ok(d)
}

/// Reads `(tau, echo_area)` rows. Accepts `tau` or `tau_multiple` and
/// `echo_area` (radians) or `echo_area_pi`; `#` starts a comment line.
pub fn read_measurements(text: &str) -> Result<Vec<Measurement>> {
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let header_line = text
        .lines()
        .position(|l| !l.trim().is_empty() && !l.trim_start().starts_with('#'))
        .map_or(1, |i| i + 1);
    let headers = reader.headers().map_err(|e| Error::Parse {
        line: header_line,
        message: e.to_string(),
    })?;
    let find = |names: &[&str]| headers.iter().position(|h| names.contains(&h));
    let tau_col = find(&["tau", "tau_multiple"]).ok_or(Error::Parse {
        line: header_line,
        message: "missing a 'tau' column".into(),
    })?;
    let (area_col, scale) = match (find(&["echo_area"]), find(&["echo_area_pi"])) {
        (Some(c), _) => (c, 1.0),
        (None, Some(c)) => (c, PI),
        _ => {
            return Err(Error::Parse {
                line: header_line,
                message: "missing an 'echo_area' or 'echo_area_pi' column".into(),
            })
        }
    };
    let mut out = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| Error::Parse {
            line: e.position().map_or(0, |p| p.line() as usize),
            message: e.to_string(),
        })?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        let field = |c: usize, what: &str| -> Result<f64> {
            let raw = rec.get(c).unwrap_or("");
            raw.parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| Error::Parse {
                    line,
                    message: format!("{what} {raw:?} is not a number"),
                })
        };
        out.push(Measurement {
            tau_multiple: field(tau_col, "tau")?,
            echo_area: field(area_col, "echo area")? * scale,
        });
    }
    Ok(out)
}

/// Γτ fit from measured primary-echo areas.
pub fn run_fit(cfg: &RunConfig) -> Result<Dataset> {
    let path = cfg
        .input_path
        .as_ref()
        .ok_or_else(|| Error::Config("fit needs --input <csv>".into()))?;
    let data = read_measurements(&std::fs::read_to_string(path)?)?;
    let report = fit_gamma_tau(&data, cfg.theta1(), cfg.theta2(), cfg.alpha_z_max)?;
    let mut d = Dataset::new(
        ["tau", "echo_area_pi", "residual_pi", "pointwise_gamma_tau"]
            .map(String::from)
            .to_vec(),
    );
    for (i, m) in data.iter().enumerate() {
        d.push(vec![
            m.tau_multiple.into(),
            pi(m.echo_area),
            pi(report.residuals[i]),
            report.pointwise_gamma_tau[i].into(),
        ]);
    }
    d.note("gamma_tau", report.gamma_tau);
    d.note("gamma", report.gamma);
    d.note("beer_gamma_tau", report.beer_gamma_tau);
    d.note("degenerate", Cell::Text(report.degenerate.to_string()));
    Ok(d)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn measurement_parsing() {
        let m = read_measurements("# lab data\ntau,echo_area_pi\n1,0.5\n2, 0.25\n").unwrap();
        assert_eq!(m.len(), 2);
        assert!((m[1].echo_area - 0.25 * PI).abs() < 1e-15);
        let e = read_measurements("tau,echo_area\n1,0.5\n2,abc\n").unwrap_err();
        assert!(matches!(e, Error::Parse { line: 3, .. }), "{e:?}");
        assert!(matches!(
            read_measurements("x,y\n1,2\n"),
            Err(Error::Parse { line: 1, .. })
        ));
    }

    #[test]
    fn phasing_dataset() {
        let cfg = RunConfig {
            pulses: 2,
            echo: 1,
            ..Default::default()
        };
        let d = run_phasing(&cfg).unwrap();
        assert_eq!(d.rows[2][1], Cell::Text("G^2*s1*S2".into()));
        assert_eq!(d.rows[3][1], Cell::Text("-c1*c2".into()));
    }
}

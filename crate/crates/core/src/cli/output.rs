//! CSV and JSON artifacts. Floats are written with 17 significant digits so
//! that reruns can be compared byte for byte.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::adiabatic::AdiabaticReport;
use crate::dynamics::Trajectory;
use crate::error::Result;

pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Writes through a temporary sibling file and renames it into place.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir)?;
        }
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    fs::write(&tmp, contents)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

pub fn trajectory_csv(traj: &Trajectory) -> String {
    let dim = traj.points.first().map_or(0, |p| p.state.dim());
    let mut out = String::from("t");
    for i in 0..dim {
        let _ = write!(out, ",re_{i},im_{i}");
    }
    out.push_str(",cpt_norm,drift_rate\n");
    for p in &traj.points {
        out.push_str(&fmt_f64(p.t));
        for z in p.state.iter() {
            let _ = write!(out, ",{},{}", fmt_f64(z.re), fmt_f64(z.im));
        }
        let _ = writeln!(out, ",{},{}", fmt_f64(p.cpt_norm), fmt_f64(p.drift_rate));
    }
    out
}

pub fn adiabatic_csv(report: &AdiabaticReport) -> String {
    let mut out = String::from("t,theta,fidelity_loss,transition_residual,V\n");
    for k in 0..report.times.len() {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            fmt_f64(report.times[k]),
            fmt_f64(report.theta[k]),
            fmt_f64(report.fidelity_loss[k]),
            fmt_f64(report.transition_residual[k]),
            fmt_f64(report.running_v[k])
        );
    }
    let _ = writeln!(
        out,
        "# V(T)={},max_loss={},bound_satisfied={}",
        fmt_f64(report.v_total),
        fmt_f64(report.max_loss),
        report.bound_satisfied
    );
    out
}

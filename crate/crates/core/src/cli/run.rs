use log::info;
use serde::Serialize;

use super::config::{Scenario, ScenarioConfig};
use super::output::{adiabatic_csv, trajectory_csv, write_atomic};
use crate::adiabatic::{analyze, instantaneous_eigenframe, AdiabaticRun};
use crate::dynamics::{evolve_state, Equation, Trajectory};
use crate::error::{Error, Result};
use crate::frames::{symmetry_report, FrameResiduals};

#[derive(Clone, Debug, Serialize)]
pub struct SymmetrySummary {
    pub pt_symmetric: bool,
    pub cpt_hermitian: bool,
    pub unbroken: bool,
    pub max_pt_residual: f64,
    pub max_hermitian_residual: f64,
    pub max_eigenspace_residual: f64,
    pub max_eigen_imag: f64,
    /// first grid time where a check failed
    pub first_failure: Option<f64>,
}

impl SymmetrySummary {
    pub fn all(&self) -> bool {
        self.pt_symmetric && self.cpt_hermitian && self.unbroken
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct AdiabaticSummary {
    pub level: usize,
    pub epsilon: f64,
    pub v_total: f64,
    pub max_loss: f64,
    pub premise: bool,
    pub bound_satisfied: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub value: f64,
    pub threshold: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ValidationSummary {
    pub grid_points: usize,
    pub frame_residuals: FrameResiduals,
    pub symmetry: SymmetrySummary,
    pub passed: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct RunSummary {
    pub equation: Equation,
    pub hbar: f64,
    pub grid_points: usize,
    pub frame_residuals: FrameResiduals,
    pub symmetry: SymmetrySummary,
    pub norm_drift: f64,
    pub max_abs_drift_rate: f64,
    pub adiabatic: Option<AdiabaticSummary>,
    pub checks: Vec<CheckResult>,
    pub passed: bool,
}

fn frame_and_symmetry(cfg: &ScenarioConfig, sc: &Scenario) -> Result<(FrameResiduals, SymmetrySummary)> {
    let residuals = sc
        .grid_frames
        .iter()
        .skip(1)
        .fold(*sc.grid_frames[0].residuals(), |acc, f| acc.worst(f.residuals()));
    let mut sym = SymmetrySummary {
        pt_symmetric: true,
        cpt_hermitian: true,
        unbroken: true,
        max_pt_residual: 0.0,
        max_hermitian_residual: 0.0,
        max_eigenspace_residual: 0.0,
        max_eigen_imag: 0.0,
        first_failure: None,
    };
    for (frame, &t) in sc.grid_frames.iter().zip(&sc.problem.grid) {
        let h = sc.problem.hamiltonian.evaluate(t)?;
        let r = symmetry_report(frame, &h, cfg.tolerances.symmetry)?;
        sym.pt_symmetric &= r.pt_symmetric;
        sym.cpt_hermitian &= r.cpt_hermitian;
        sym.unbroken &= r.unbroken;
        sym.max_pt_residual = sym.max_pt_residual.max(r.pt_residual);
        sym.max_hermitian_residual = sym.max_hermitian_residual.max(r.hermitian_residual);
        sym.max_eigenspace_residual = sym.max_eigenspace_residual.max(r.eigenspace_residual);
        sym.max_eigen_imag = sym.max_eigen_imag.max(r.eigen_realness);
        if !r.all() && sym.first_failure.is_none() {
            sym.first_failure = Some(t);
        }
    }
    Ok((residuals, sym))
}

/// Frame and symmetry checks on every grid point, no evolution.
pub fn validate_scenario(cfg: &ScenarioConfig) -> Result<ValidationSummary> {
    let sc = cfg.build()?;
    let (frame_residuals, symmetry) = frame_and_symmetry(cfg, &sc)?;
    Ok(ValidationSummary {
        grid_points: sc.problem.grid.len(),
        frame_residuals,
        passed: symmetry.all(),
        symmetry,
    })
}

/// Runs the scenario and writes the trajectory CSV, the adiabatic CSV (when
/// the adiabatic check is on) and the JSON summary under `output.dir`.
pub fn run_scenario(cfg: &ScenarioConfig) -> Result<RunSummary> {
    let sc = cfg.build()?;
    let (frame_residuals, symmetry) = frame_and_symmetry(cfg, &sc)?;

    let adiabatic: Option<AdiabaticRun> = if cfg.checks.adiabatic {
        Some(analyze(&sc.problem, cfg.level, cfg.epsilon, cfg.tolerances.symmetry)?)
    } else {
        None
    };
    let reuse = cfg.equation == Equation::Corrected && cfg.initial_state.is_none() && adiabatic.is_some();
    let trajectory: Trajectory = if reuse {
        adiabatic.as_ref().unwrap().trajectory.clone()
    } else {
        let mut problem = sc.problem.clone();
        if cfg.initial_state.is_none() {
            let ef = match &adiabatic {
                Some(run) => run.eigenframe.clone(),
                None => instantaneous_eigenframe(&problem.hamiltonian, &problem.frames, &problem.grid[..2], cfg.tolerances.symmetry)?,
            };
            problem.initial_state = ef.states[0][cfg.level].clone();
        }
        evolve_state(&problem)?
    };

    let norm_drift = trajectory.max_norm_drift();
    let mut checks = Vec::new();
    if cfg.checks.symmetry {
        checks.push(CheckResult {
            name: "symmetry".into(),
            passed: symmetry.all(),
            value: symmetry.max_eigenspace_residual,
            threshold: cfg.tolerances.symmetry,
        });
    }
    if cfg.checks.norm && sc.norm_conserving {
        checks.push(CheckResult {
            name: "norm_conservation".into(),
            passed: norm_drift <= cfg.tolerances.norm_drift,
            value: norm_drift,
            threshold: cfg.tolerances.norm_drift,
        });
    }
    let adiabatic_summary = adiabatic.as_ref().map(|run| {
        let r = &run.report;
        checks.push(CheckResult {
            name: "adiabatic_bound".into(),
            passed: r.bound_satisfied,
            value: r.max_loss,
            threshold: r.epsilon,
        });
        AdiabaticSummary {
            level: r.level,
            epsilon: r.epsilon,
            v_total: r.v_total,
            max_loss: r.max_loss,
            premise: r.premise,
            bound_satisfied: r.bound_satisfied,
        }
    });
    let passed = checks.iter().all(|c| c.passed);
    let summary = RunSummary {
        equation: cfg.equation,
        hbar: cfg.hbar,
        grid_points: sc.problem.grid.len(),
        frame_residuals,
        symmetry,
        norm_drift,
        max_abs_drift_rate: trajectory.max_abs_drift_rate(),
        adiabatic: adiabatic_summary,
        checks,
        passed,
    };

    let dir = &cfg.output.dir;
    write_atomic(&dir.join(&cfg.output.trajectory), &trajectory_csv(&trajectory))?;
    if let Some(run) = &adiabatic {
        write_atomic(&dir.join(&cfg.output.adiabatic), &adiabatic_csv(&run.report))?;
    }
    let json = serde_json::to_string_pretty(&summary).map_err(|e| Error::Config(e.to_string()))?;
    write_atomic(&dir.join(&cfg.output.summary), &(json + "\n"))?;
    info!("wrote artifacts to {}", dir.display());
    Ok(summary)
}

//! Time evolution under a time-dependent CPT metric.
//!
//! Three evolution equations are supported, all of the form
//! `iħ·φ̇ = G(t)·φ` with a different generator:
//!
//! * [`Equation::Plain`]: `G = H(t)`, plain Schrödinger evolution.
//! * [`Equation::Coupled`]: `G = H(t) + i·Γ(t)` for a user supplied coupling `Γ`.
//! * [`Equation::Corrected`]: `G = H(t) − (iħ/2)·C(t)·Ċ(t)`, which conserves the
//!   instantaneous CPT norm.
//!
//! Integration is classical fixed-step RK4 between grid points, so results are
//! reproducible bit for bit.

use std::fmt;

use log::{debug, warn};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frames::{validate_frames, CPTFrame, PTFrame};
use crate::linalg::{
    default_step, family_derivative, operator_norm, AntilinearOperator, ComplexMatrix,
    ComplexVector, C64, I, ONE,
};
use crate::quad::{check_grid, derivative_stencil};

pub use crate::linalg::OperatorFamily;

/// Which evolution equation to integrate, `iħ·φ̇ = G(t)·φ` with
///
/// * `Plain`: `G = H`
/// * `Coupled`: `G = H + i·Γ` for a caller-supplied `Γ(t)`
/// * `Corrected`: `G = H − (iħ/2)·C·Ċ`, which conserves the CPT norm
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Equation {
    Plain,
    Coupled,
    Corrected,
}

impl fmt::Display for Equation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Equation::Plain => "plain",
            Equation::Coupled => "coupled",
            Equation::Corrected => "corrected",
        })
    }
}

/// `t ↦ (C(t), P, T)` with fixed `P`, `T`.
#[derive(Clone, Debug)]
pub struct FrameFamily {
    base: PTFrame,
    c: OperatorFamily,
    tol: f64,
    constant: bool,
}

impl FrameFamily {
    pub fn new(c: OperatorFamily, p: ComplexMatrix, t: AntilinearOperator, tol: f64) -> Result<Self> {
        let base = PTFrame::new(p, t, tol)?;
        if c.dim() != base.dim() {
            return Err(Error::DimensionMismatch {
                expected: base.dim(),
                found: c.dim(),
            });
        }
        Ok(FrameFamily {
            base,
            c,
            tol,
            constant: false,
        })
    }

    /// Time-independent family built from an already validated frame.
    pub fn constant(frame: &CPTFrame, start: f64, end: f64, tol: f64) -> Result<Self> {
        let c = OperatorFamily::constant(frame.c().clone(), start, end)?;
        Ok(FrameFamily {
            base: frame.base().clone(),
            c,
            tol,
            constant: true,
        })
    }

    pub fn is_constant(&self) -> bool {
        self.constant
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    pub fn p(&self) -> &ComplexMatrix {
        self.base.p()
    }

    pub fn t(&self) -> &AntilinearOperator {
        self.base.t()
    }

    pub fn c_family(&self) -> &OperatorFamily {
        &self.c
    }

    pub fn dim(&self) -> usize {
        self.base.dim()
    }

    pub fn c_at(&self, t: f64) -> Result<ComplexMatrix> {
        self.c.evaluate(t)
    }

    pub fn c_dot(&self, t: f64) -> Result<ComplexMatrix> {
        family_derivative(&self.c, t, default_step(t))
    }

    /// Validated frame at `t`.
    pub fn frame_at(&self, t: f64) -> Result<CPTFrame> {
        validate_frames(self.c.evaluate(t)?, self.p().clone(), self.t().clone(), self.tol)
    }
}

/// Everything needed to integrate one evolution equation.
#[derive(Clone, Debug)]
pub struct EvolutionProblem {
    pub hamiltonian: OperatorFamily,
    pub frames: FrameFamily,
    /// Γ(t) of the general non-Hermitian correction (coupled equation only).
    pub coupling: Option<OperatorFamily>,
    pub hbar: f64,
    pub equation: Equation,
    pub initial_state: ComplexVector,
    pub grid: Vec<f64>,
    /// RK4 substeps per grid interval; `None` picks `ceil(100·‖G‖·Δt/ħ)`.
    pub substeps: Option<usize>,
}

impl EvolutionProblem {
    pub fn validate(&self) -> Result<()> {
        let n = self.frames.dim();
        if self.hamiltonian.dim() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: self.hamiltonian.dim(),
            });
        }
        self.initial_state.check_dim(n)?;
        if !(self.hbar > 0.0 && self.hbar.is_finite()) {
            return Err(Error::InvalidProblem(format!("hbar must be positive, got {}", self.hbar)));
        }
        match (self.equation, &self.coupling) {
            (Equation::Coupled, None) => {
                return Err(Error::InvalidProblem("the coupled equation requires a coupling Γ(t)".into()))
            }
            (Equation::Plain | Equation::Corrected, Some(_)) => {
                return Err(Error::InvalidProblem(format!(
                    "{} does not take a coupling G(t)",
                    self.equation
                )))
            }
            (_, Some(g)) if g.dim() != n => {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: g.dim(),
                })
            }
            _ => {}
        }
        if self.substeps == Some(0) {
            return Err(Error::InvalidProblem("substeps must be at least 1".into()));
        }
        check_grid(&self.grid)?;
        let (g0, g1) = (self.grid[0], *self.grid.last().unwrap());
        for fam in [Some(&self.hamiltonian), Some(self.frames.c_family()), self.coupling.as_ref()]
            .into_iter()
            .flatten()
        {
            if !fam.contains(g0) || !fam.contains(g1) {
                let (start, end) = fam.domain();
                return Err(Error::OutOfDomain {
                    t: if fam.contains(g0) { g1 } else { g0 },
                    start,
                    end,
                });
            }
        }
        Ok(())
    }

    /// Copy with a different equation/coupling pair.
    pub fn with_equation(&self, equation: Equation, coupling: Option<OperatorFamily>) -> Self {
        EvolutionProblem {
            equation,
            coupling,
            ..self.clone()
        }
    }

    pub fn with_initial_state(&self, state: ComplexVector) -> Self {
        EvolutionProblem {
            initial_state: state,
            ..self.clone()
        }
    }
}

/// The coupling `−(ħ/2)·C(t)·Ċ(t)` that turns the coupled equation into the corrected one.
pub fn unitarizing_coupling(frames: &FrameFamily, hbar: f64) -> Result<OperatorFamily> {
    let fam = frames.clone();
    let (start, end) = frames.c_family().domain();
    OperatorFamily::new(start, end, move |t| {
        let c = fam.c_at(t).expect("t inside family domain");
        let cd = fam.c_dot(t).expect("t inside family domain");
        (&c * &cd).scale_real(-0.5 * hbar)
    })
}

/// The generator `G(t)` of `iħ·φ̇ = G(t)·φ` for the problem's equation.
pub fn effective_generator(problem: &EvolutionProblem, t: f64) -> Result<ComplexMatrix> {
    let h = problem.hamiltonian.evaluate(t)?;
    match problem.equation {
        Equation::Plain => Ok(h),
        Equation::Coupled => {
            let g = problem
                .coupling
                .as_ref()
                .ok_or_else(|| Error::InvalidProblem("the coupled equation requires a coupling Γ(t)".into()))?
                .evaluate(t)?;
            Ok(&h + &g.scale(I))
        }
        Equation::Corrected => {
            if problem.frames.is_constant() {
                return Ok(h);
            }
            let c = problem.frames.c_at(t)?;
            let cd = problem.frames.c_dot(t)?;
            Ok(&h - &(&c * &cd).scale(I * (0.5 * problem.hbar)))
        }
    }
}

/// `⟨φ|(PĊ + (2/ħ)·PC·Γ)φ⟩` as a complex number; the real part is the rate
/// of change of the CPT norm squared, the imaginary part is numerical noise.
fn drift_rate_complex(problem: &EvolutionProblem, phi: &ComplexVector, t: f64) -> Result<C64> {
    let p = problem.frames.p();
    let cd = problem.frames.c_dot(t)?;
    let mut op = p * &cd;
    let coupling = match problem.equation {
        Equation::Plain => None,
        Equation::Coupled => Some(
            problem
                .coupling
                .as_ref()
                .ok_or_else(|| Error::InvalidProblem("the coupled equation requires a coupling Γ(t)".into()))?
                .evaluate(t)?,
        ),
        Equation::Corrected => {
            let c = problem.frames.c_at(t)?;
            Some((&c * &cd).scale_real(-0.5 * problem.hbar))
        }
    };
    if let Some(g) = coupling {
        let c = problem.frames.c_at(t)?;
        op = &op + &(&(p * &c) * &g).scale_real(2.0 / problem.hbar);
    }
    Ok(phi.dot(&op.mul_vec(phi)))
}

/// Rate of change of `(φ|φ)_{C(t)}` along the problem's equation.
///
/// For the corrected equation the value is analytically zero and what comes back is the
/// numerical residual.
pub fn drift_rate(problem: &EvolutionProblem, phi: &ComplexVector, t: f64) -> Result<f64> {
    let z = drift_rate_complex(problem, phi, t)?;
    if z.im.abs() > 1e-8 * z.norm().max(1.0) {
        debug!("drift_rate: imaginary residual {:e} at t={t}", z.im);
    }
    Ok(z.re)
}

#[derive(Clone, Debug, Serialize)]
pub struct TrajectoryPoint {
    pub t: f64,
    pub state: ComplexVector,
    pub cpt_norm: f64,
    pub drift_rate: f64,
    /// Imaginary part of the drift integrand, a health check.
    pub drift_imag: f64,
    /// RK4 substeps used on the interval ending here (0 at the first point).
    pub substeps: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct Trajectory {
    pub equation: Equation,
    pub points: Vec<TrajectoryPoint>,
}

impl Trajectory {
    pub fn times(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.t).collect()
    }

    pub fn states(&self) -> Vec<ComplexVector> {
        self.points.iter().map(|p| p.state.clone()).collect()
    }

    /// max_t |‖φ(t)‖_t − ‖φ(0)‖_0|
    pub fn max_norm_drift(&self) -> f64 {
        let n0 = self.points[0].cpt_norm;
        self.points
            .iter()
            .map(|p| (p.cpt_norm - n0).abs())
            .fold(0.0, f64::max)
    }

    pub fn max_abs_drift_rate(&self) -> f64 {
        self.points.iter().map(|p| p.drift_rate.abs()).fold(0.0, f64::max)
    }
}

trait OdeState: Clone {
    fn apply(g: &ComplexMatrix, s: &Self) -> Self;
    fn axpy(&self, a: C64, other: &Self) -> Self;
    fn finite(&self) -> bool;
}

impl OdeState for ComplexVector {
    fn apply(g: &ComplexMatrix, s: &Self) -> Self {
        g.mul_vec(s)
    }
    fn axpy(&self, a: C64, other: &Self) -> Self {
        ComplexVector::axpy(self, a, other)
    }
    fn finite(&self) -> bool {
        self.is_finite()
    }
}

impl OdeState for ComplexMatrix {
    fn apply(g: &ComplexMatrix, s: &Self) -> Self {
        g * s
    }
    fn axpy(&self, a: C64, other: &Self) -> Self {
        self + &other.scale(a)
    }
    fn finite(&self) -> bool {
        self.is_finite()
    }
}

/// Picks the substep count for the interval `[t0, t1]`.
fn interval_substeps(problem: &EvolutionProblem, t0: f64, t1: f64) -> Result<usize> {
    let dt = t1 - t0;
    let n = match problem.substeps {
        Some(n) => n,
        None => {
            let g0 = operator_norm(&effective_generator(problem, t0)?);
            let g1 = operator_norm(&effective_generator(problem, t1)?);
            ((100.0 * g0.max(g1) * dt / problem.hbar).ceil() as usize).max(1)
        }
    };
    Ok(n)
}

/// Integrates `iħ·ds/dt = G(t)·s` across the grid with classical RK4.
/// `observe` sees every grid point including the first.
fn integrate<S: OdeState>(
    problem: &EvolutionProblem,
    initial: S,
    mut observe: impl FnMut(f64, &S, usize) -> Result<()>,
) -> Result<S> {
    let rate = -I / problem.hbar;
    let mut s = initial;
    let mut t = problem.grid[0];
    observe(t, &s, 0)?;
    let mut warned = false;
    for w in problem.grid.windows(2) {
        let (t0, t1) = (w[0], w[1]);
        let n = interval_substeps(problem, t0, t1)?;
        let h = (t1 - t0) / n as f64;
        let mut g_start = effective_generator(problem, t0)?.scale(rate);
        for j in 0..n {
            let ta = t0 + j as f64 * h;
            let tb = if j + 1 == n { t1 } else { t0 + (j + 1) as f64 * h };
            let g_mid = effective_generator(problem, 0.5 * (ta + tb))?.scale(rate);
            let g_end = effective_generator(problem, tb)?.scale(rate);
            if !warned && operator_norm(&g_mid) * h > 0.5 {
                warn!(
                    "RK4 step {h:e} with generator norm {:e} exceeds the 0.5 stability guideline",
                    operator_norm(&g_mid)
                );
                warned = true;
            }
            let hc = ONE * (tb - ta);
            let k1 = S::apply(&g_start, &s);
            let k2 = S::apply(&g_mid, &s.axpy(hc * 0.5, &k1));
            let k3 = S::apply(&g_mid, &s.axpy(hc * 0.5, &k2));
            let k4 = S::apply(&g_end, &s.axpy(hc, &k3));
            let next = s
                .axpy(hc / 6.0, &k1)
                .axpy(hc / 3.0, &k2)
                .axpy(hc / 3.0, &k3)
                .axpy(hc / 6.0, &k4);
            if !next.finite() {
                return Err(Error::NonFinite { t: tb, last_good: t });
            }
            s = next;
            t = tb;
            g_start = g_end;
        }
        observe(t1, &s, n)?;
    }
    Ok(s)
}

/// Integrates the problem's equation for its initial state and records the
/// CPT norm and norm drift rate at every grid point.
pub fn evolve_state(problem: &EvolutionProblem) -> Result<Trajectory> {
    problem.validate()?;
    let mut points = Vec::with_capacity(problem.grid.len());
    integrate(problem, problem.initial_state.clone(), |t, phi, substeps| {
        let frame = problem.frames.frame_at(t)?;
        let drift = drift_rate_complex(problem, phi, t)?;
        points.push(TrajectoryPoint {
            t,
            state: phi.clone(),
            cpt_norm: frame.norm(phi)?,
            drift_rate: drift.re,
            drift_imag: drift.im,
            substeps,
        });
        Ok(())
    })?;
    Ok(Trajectory {
        equation: problem.equation,
        points,
    })
}

/// Integrates the propagator equation `iħ·U̇ = G(t)·U`, `U(t₀) = I`, for the corrected equation.
pub fn evolve_propagator(problem: &EvolutionProblem) -> Result<Vec<(f64, ComplexMatrix)>> {
    if problem.equation != Equation::Corrected {
        return Err(Error::InvalidProblem(format!(
            "propagator evolution is defined for the corrected equation, got {}",
            problem.equation
        )));
    }
    problem.validate()?;
    let mut out = Vec::with_capacity(problem.grid.len());
    integrate(problem, ComplexMatrix::identity(problem.frames.dim()), |t, u, _| {
        out.push((t, u.clone()));
        Ok(())
    })?;
    Ok(out)
}

/// `‖iħ·ψ̇(t_k) − G(t_k)·ψ(t_k)‖` for a state series sampled on the
/// problem's grid, with ψ̇ from three-point differences.
pub fn substitution_residual(problem: &EvolutionProblem, states: &[ComplexVector]) -> Result<Vec<f64>> {
    if states.len() != problem.grid.len() {
        return Err(Error::InvalidProblem(format!(
            "{} states for {} grid points",
            states.len(),
            problem.grid.len()
        )));
    }
    check_grid(&problem.grid)?;
    let grid = &problem.grid;
    (0..grid.len())
        .map(|k| {
            let dot = derivative_stencil(grid, k)
                .into_iter()
                .fold(ComplexVector::zeros(states[k].dim()), |acc, (i, w)| {
                    acc.axpy(ONE * w, &states[i])
                });
            let g = effective_generator(problem, grid[k])?;
            let r = &dot.scale(I * problem.hbar) - &g.mul_vec(&states[k]);
            Ok(r.norm())
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frames::DEFAULT_FRAME_TOL;
    use crate::linalg::{c64, matrix_exp};
    use crate::quad::uniform_grid;

    fn swap() -> ComplexMatrix {
        ComplexMatrix::from_real([[0.0, 1.0], [1.0, 0.0]])
    }

    fn trivial_frames(end: f64) -> FrameFamily {
        let f = validate_frames(swap(), swap(), AntilinearOperator::conjugation(2), DEFAULT_FRAME_TOL).unwrap();
        FrameFamily::constant(&f, 0.0, end, DEFAULT_FRAME_TOL).unwrap()
    }

    fn hermitian() -> ComplexMatrix {
        ComplexMatrix::from_array([[c64(1.0, 0.0), c64(0.3, -0.4)], [c64(0.3, 0.4), c64(-0.5, 0.0)]])
    }

    fn problem(equation: Equation) -> EvolutionProblem {
        EvolutionProblem {
            hamiltonian: OperatorFamily::constant(hermitian(), 0.0, 2.0).unwrap(),
            frames: trivial_frames(2.0),
            coupling: None,
            hbar: 1.0,
            equation,
            initial_state: ComplexVector::new(vec![ONE, c64(0.0, 0.5)]),
            grid: uniform_grid(0.0, 2.0, 21).unwrap(),
            substeps: None,
        }
    }

    #[test]
    fn constant_hermitian_matches_exponential() {
        let pr = problem(Equation::Plain);
        let traj = evolve_state(&pr).unwrap();
        for p in &traj.points {
            let u = matrix_exp(&hermitian().scale(-I * p.t)).unwrap();
            let exact = u.mul_vec(&pr.initial_state);
            assert!((&p.state - &exact).norm() < 1e-8, "t={}", p.t);
            assert!(p.drift_rate.abs() < 1e-15);
        }
        assert!(traj.max_norm_drift() < 1e-8);
    }

    #[test]
    fn problem_validation() {
        let mut pr = problem(Equation::Coupled);
        assert!(matches!(pr.validate(), Err(Error::InvalidProblem(_))));
        pr.equation = Equation::Plain;
        pr.coupling = Some(OperatorFamily::constant(ComplexMatrix::zeros(2), 0.0, 2.0).unwrap());
        assert!(pr.validate().is_err());
        let mut pr = problem(Equation::Plain);
        pr.hbar = 0.0;
        assert!(pr.validate().is_err());
        let mut pr = problem(Equation::Plain);
        pr.grid = vec![0.0, 3.0];
        assert!(matches!(pr.validate(), Err(Error::OutOfDomain { .. })));
        let mut pr = problem(Equation::Plain);
        pr.initial_state = ComplexVector::zeros(3);
        assert!(pr.validate().is_err());
    }

    #[test]
    fn corrected_with_constant_frame_is_plain() {
        let pr = problem(Equation::Corrected);
        for t in [0.0, 0.5, 2.0] {
            assert_eq!(effective_generator(&pr, t).unwrap(), hermitian());
        }
    }

    #[test]
    fn zero_hamiltonian_propagator_is_identity() {
        let mut pr = problem(Equation::Corrected);
        pr.hamiltonian = OperatorFamily::constant(ComplexMatrix::zeros(2), 0.0, 2.0).unwrap();
        for (_, u) in evolve_propagator(&pr).unwrap() {
            assert!((&u - &ComplexMatrix::identity(2)).max_abs() < 1e-15);
        }
        assert!(evolve_propagator(&problem(Equation::Plain)).is_err());
    }

    #[test]
    fn non_finite_state_aborts_with_last_good_time() {
        let mut pr = problem(Equation::Plain);
        pr.hamiltonian = OperatorFamily::new(0.0, 2.0, |t| {
            if t > 1.0 {
                ComplexMatrix::from_real_diag(&[f64::MAX, 0.0]).scale(I)
            } else {
                ComplexMatrix::zeros(2)
            }
        })
        .unwrap();
        pr.substeps = Some(1);
        match evolve_state(&pr) {
            Err(Error::NonFinite { last_good, .. }) => assert!(last_good <= 1.0 + 1e-12),
            other => panic!("expected NonFinite, got {other:?}"),
        }
    }

    #[test]
    fn substitution_residual_of_exact_solution_is_small() {
        let pr = problem(Equation::Plain);
        let grid = uniform_grid(0.0, 2.0, 2001).unwrap();
        let pr = EvolutionProblem { grid: grid.clone(), ..pr };
        let states: Vec<_> = grid
            .iter()
            .map(|&t| matrix_exp(&hermitian().scale(-I * t)).unwrap().mul_vec(&pr.initial_state))
            .collect();
        let r = substitution_residual(&pr, &states).unwrap();
        assert!(r.iter().cloned().fold(0.0, f64::max) < 1e-5);
    }
}

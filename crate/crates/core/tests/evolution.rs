use std::f64::consts::PI;

use num_complex::Complex64;

use ptsym_core::adiabatic::{adiabatic_bound, analyze, dynamical_phase, transition_residual, instantaneous_eigenframe};
use ptsym_core::dynamics::{evolve_state, substitution_residual, unitarizing_coupling, Equation, EvolutionProblem, FrameFamily};
use ptsym_core::frames::validate_frames;
use ptsym_core::linalg::{AntilinearOperator, ComplexMatrix, ComplexVector, OperatorFamily};
use ptsym_core::models::{build_two_level, ScalarFunction};
use ptsym_core::quad::{cumulative_trapezoid, uniform_grid};

fn two_level_problem(alpha: ScalarFunction, t_end: f64, points: usize, eq: Equation) -> EvolutionProblem {
    let grid = uniform_grid(0.0, t_end, points).unwrap();
    let setup = build_two_level(&ScalarFunction::constant(1.0), &alpha, &grid).unwrap().setup;
    let init = ComplexVector::new(vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)]);
    setup.problem(eq, None, init, 1.0)
}

fn sinusoid(amplitude: f64) -> ScalarFunction {
    ScalarFunction::Sinusoid {
        offset: 0.0,
        amplitude,
        frequency: 1.0,
        phase: 0.0,
    }
}

/// `H(t) = U(t)·diag(−1, 1)·U(t)†` with `U` a real rotation by `ω·t`, on the
/// identity frame.
fn rotating_problem(omega: f64, t_end: f64, points: usize) -> EvolutionProblem {
    let id = ComplexMatrix::identity(2);
    let frame = validate_frames(id.clone(), id, AntilinearOperator::conjugation(2), 1e-10).unwrap();
    let frames = FrameFamily::constant(&frame, 0.0, t_end, 1e-10).unwrap();
    let h = OperatorFamily::new(0.0, t_end, move |t| {
        let (s, c) = (omega * t).sin_cos();
        ComplexMatrix::from_real([[-(c * c - s * s), -2.0 * s * c], [-2.0 * s * c, c * c - s * s]])
    })
    .unwrap();
    EvolutionProblem {
        hamiltonian: h,
        frames,
        coupling: None,
        hbar: 1.0,
        equation: Equation::Corrected,
        initial_state: ComplexVector::new(vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)]),
        grid: uniform_grid(0.0, t_end, points).unwrap(),
        substeps: None,
    }
}

#[test]
fn correction_coupling_reproduces_the_norm_preserving_equation() {
    let corrected = two_level_problem(sinusoid(0.5), 5.0, 51, Equation::Corrected);
    let g = unitarizing_coupling(&corrected.frames, corrected.hbar).unwrap();
    let coupled = corrected.with_equation(Equation::Coupled, Some(g));
    let a = evolve_state(&corrected).unwrap();
    let b = evolve_state(&coupled).unwrap();
    for (x, y) in a.points.iter().zip(&b.points) {
        assert!((&x.state - &y.state).norm() < 1e-12, "at t={}", x.t);
    }
    assert!(b.max_norm_drift() < 1e-8);
}

#[test]
fn plain_equation_drift_matches_the_integrated_rate() {
    let p = two_level_problem(sinusoid(0.5), 5.0, 2001, Equation::Plain);
    let traj = evolve_state(&p).unwrap();
    let sq: Vec<f64> = traj.points.iter().map(|q| q.cpt_norm * q.cpt_norm).collect();
    let rates: Vec<f64> = traj.points.iter().map(|q| q.drift_rate).collect();
    let integrated = cumulative_trapezoid(&traj.times(), &rates);
    let change = sq.iter().map(|v| v - sq[0]).collect::<Vec<_>>();
    let scale = change.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    assert!(scale > 1e-2, "a moving frame should change the CPT norm under the plain equation");
    for (c, i) in change.iter().zip(&integrated) {
        assert!((c - i).abs() < 1e-4 * scale, "{c} vs {i}");
    }
}

#[test]
fn constant_frame_makes_all_three_equations_agree() {
    let p = rotating_problem(0.3, 4.0, 41);
    let zero = OperatorFamily::constant(ComplexMatrix::zeros(2), 0.0, 4.0).unwrap();
    let a = evolve_state(&p.with_equation(Equation::Plain, None)).unwrap();
    let b = evolve_state(&p.with_equation(Equation::Coupled, Some(zero))).unwrap();
    let c = evolve_state(&p).unwrap();
    for ((x, y), z) in a.points.iter().zip(&b.points).zip(&c.points) {
        assert!((&x.state - &y.state).norm() < 1e-13);
        assert!((&x.state - &z.state).norm() < 1e-13);
    }
}

/// `e^{iθ(t)}·ψ_m(t)` solves the norm-preserving equation exactly when the
/// level coupling residual vanishes.
#[test]
fn phased_eigenvector_solves_the_equation_iff_couplings_vanish() {
    let substitute = |p: &EvolutionProblem| {
        let ef = instantaneous_eigenframe(&p.hamiltonian, &p.frames, &p.grid, 1e-9).unwrap();
        let theta = dynamical_phase(&ef, &p.frames, 0, p.hbar).unwrap();
        let states: Vec<ComplexVector> = ef
            .level_states(0)
            .iter()
            .zip(&theta)
            .map(|(s, th)| s.scale(Complex64::from_polar(1.0, *th)))
            .collect();
        let r = substitution_residual(p, &states).unwrap();
        let e = transition_residual(&ef, &p.frames, 0, 1).unwrap();
        let inner = |v: &[f64]| v[1..v.len() - 1].iter().copied().fold(0.0, f64::max);
        (inner(&r), inner(&e))
    };

    let (r_two, e_two) = substitute(&two_level_problem(sinusoid(0.5), 5.0, 2001, Equation::Corrected));
    assert!(e_two < 1e-5, "coupling residual {e_two}");
    assert!(r_two < 1e-4, "substitution residual {r_two}");

    let (rr, er) = substitute(&rotating_problem(0.3, 5.0, 2001));
    assert!((er - 0.3).abs() < 1e-4, "coupling residual {er}");
    assert!(rr > 0.25, "substitution residual {rr}");
}

#[test]
fn evolved_state_tracks_the_level_when_couplings_vanish() {
    let p = two_level_problem(sinusoid(0.5), 10.0, 201, Equation::Corrected);
    let run = analyze(&p, 0, 0.5, 1e-9).unwrap();
    assert!(run.report.max_loss < 1e-9, "loss {}", run.report.max_loss);
    assert!(run.report.transition_residual.iter().all(|r| *r < 1e-2));
}

#[test]
fn bound_converges_under_grid_refinement() {
    let v = |points| {
        let p = two_level_problem(sinusoid(0.3), 10.0, points, Equation::Corrected);
        let ef = instantaneous_eigenframe(&p.hamiltonian, &p.frames, &p.grid, 1e-9).unwrap();
        *adiabatic_bound(&ef, &p.frames, 0).unwrap().last().unwrap()
    };
    let (coarse, fine) = (v(201), v(401));
    assert!((coarse - fine).abs() <= 0.01 * fine, "{coarse} vs {fine}");
}

#[test]
fn slower_driving_loses_less_fidelity() {
    let losses: Vec<f64> = [2.0, 8.0, 32.0]
        .iter()
        .map(|&t_end| {
            let omega = 0.5 * PI / t_end;
            let points = (40.0 * t_end) as usize + 1;
            analyze(&rotating_problem(omega, t_end, points), 0, 0.9, 1e-9).unwrap().report.max_loss
        })
        .collect();
    assert!(losses.windows(2).all(|w| w[1] < w[0]), "{losses:?}");
    for w in losses.windows(2) {
        assert!(w[1] < 0.25 * w[0], "{losses:?}");
    }
}

#[test]
fn bound_holds_whenever_its_premise_does() {
    for (amp, t_end) in [(0.02, 10.0), (0.1, 5.0), (0.4, 3.0)] {
        let p = two_level_problem(sinusoid(amp), t_end, 301, Equation::Corrected);
        let r = analyze(&p, 1, 0.5, 1e-9).unwrap().report;
        assert!(r.bound_satisfied);
    }
    for t_end in [1.0, 4.0, 16.0] {
        let p = rotating_problem(0.5 * PI / t_end, t_end, 401);
        let r = analyze(&p, 0, 0.9, 1e-9).unwrap().report;
        assert!(r.bound_satisfied, "T={t_end}: V={} loss={}", r.v_total, r.max_loss);
    }
}

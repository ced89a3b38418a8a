//! Finite-dimensional PT-symmetric quantum mechanics: CPT-frame algebra,
//! evolution under a time-dependent metric, and adiabatic diagnostics.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod adiabatic;
pub mod cli;
pub mod dynamics;
pub mod error;
pub mod frames;
pub mod linalg;
pub mod models;
pub mod quad;

pub use adiabatic::{
    adiabatic_bound, analyze, dynamical_phase, transition_residual, fidelity_loss, gauge_fix,
    instantaneous_eigenframe, operator_phase, AdiabaticReport, AdiabaticRun, EigenFrame,
};
pub use dynamics::{
    drift_rate, effective_generator, evolve_propagator, evolve_state, substitution_residual,
    unitarizing_coupling, Equation, EvolutionProblem, FrameFamily, Trajectory, TrajectoryPoint,
};
pub use error::{Axiom, Error, Result};
pub use frames::{
    cpt_adjoint, cpt_inner, norm_equivalence_bounds, symmetry_report, validate_frames, CPTFrame,
    FrameResiduals, PTFrame, SymmetryReport,
};
pub use linalg::{
    eigenpairs, hermitian_sqrt, matrix_exp, operator_norm, AntilinearOperator, ComplexMatrix,
    ComplexVector, EigenPair, OperatorFamily, C64,
};

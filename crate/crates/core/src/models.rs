//! Built-in scenarios with closed-form eigenstructure.
//!
//! * [`build_two_level`]: the two-level model
//!   `H(t) = [[s·e^{iα}, s], [s, s·e^{−iα}]]` with `P` the swap, `T` plain
//!   conjugation and `C(t) = (1/cos α)·[[i·sin α, 1], [1, −i·sin α]]`.
//!   Eigenvalues are `0` and `2s·cos α`.
//! * [`build_c_linear`]: `H(t) = a(t)·I + b(t)·C` on a fixed CPT-frame.

use serde::{Deserialize, Serialize};

use crate::dynamics::{Equation, EvolutionProblem, FrameFamily, OperatorFamily};
use crate::error::{Error, Result};
use crate::frames::{symmetry_report, validate_frames, CPTFrame, DEFAULT_FRAME_TOL};
use crate::linalg::{c64, AntilinearOperator, ComplexMatrix, ComplexVector, C64, ONE};
use crate::quad::{check_grid, derivative_stencil};

/// Real-valued function of time, either a named preset or sampled data.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ScalarFunction {
    Constant {
        value: f64,
    },
    Linear {
        intercept: f64,
        slope: f64,
    },
    /// Straight line from `from` at the first grid point to `to` at the last.
    Ramp {
        from: f64,
        to: f64,
    },
    /// `offset + amplitude·sin(frequency·t + phase)`
    Sinusoid {
        #[serde(default)]
        offset: f64,
        amplitude: f64,
        frequency: f64,
        #[serde(default)]
        phase: f64,
    },
    /// Piecewise-linear interpolation of samples; the derivative is taken
    /// from three-point differences at the nodes.
    Sampled {
        times: Vec<f64>,
        values: Vec<f64>,
    },
}

impl ScalarFunction {
    pub fn constant(value: f64) -> Self {
        ScalarFunction::Constant { value }
    }

    /// Replaces grid-relative presets by absolute ones.
    pub fn resolve(&self, start: f64, end: f64) -> Result<Self> {
        match self {
            ScalarFunction::Ramp { from, to } => {
                if !(end > start) {
                    return Err(Error::Model(format!("ramp needs a non-empty interval, got [{start}, {end}]")));
                }
                let slope = (to - from) / (end - start);
                Ok(ScalarFunction::Linear {
                    intercept: from - slope * start,
                    slope,
                })
            }
            ScalarFunction::Sampled { times, values } => {
                if times.len() != values.len() || times.len() < 2 {
                    return Err(Error::Model(format!(
                        "sampled function needs matching times/values with ≥ 2 entries, got {} and {}",
                        times.len(),
                        values.len()
                    )));
                }
                check_grid(times).map_err(|e| Error::Model(format!("sampled function: {e}")))?;
                if values.iter().any(|v| !v.is_finite()) {
                    return Err(Error::Model("sampled function has non-finite values".into()));
                }
                Ok(self.clone())
            }
            _ => Ok(self.clone()),
        }
    }

    pub fn value(&self, t: f64) -> f64 {
        match self {
            ScalarFunction::Constant { value } => *value,
            ScalarFunction::Linear { intercept, slope } => intercept + slope * t,
            ScalarFunction::Ramp { from, .. } => *from,
            ScalarFunction::Sinusoid {
                offset,
                amplitude,
                frequency,
                phase,
            } => offset + amplitude * (frequency * t + phase).sin(),
            ScalarFunction::Sampled { times, values } => {
                let (k, w) = bracket(times, t);
                values[k] * (1.0 - w) + values[k + 1] * w
            }
        }
    }

    pub fn derivative(&self, t: f64) -> f64 {
        match self {
            ScalarFunction::Constant { .. } | ScalarFunction::Ramp { .. } => 0.0,
            ScalarFunction::Linear { slope, .. } => *slope,
            ScalarFunction::Sinusoid {
                amplitude,
                frequency,
                phase,
                ..
            } => amplitude * frequency * (frequency * t + phase).cos(),
            ScalarFunction::Sampled { times, values } => {
                let node = |k: usize| -> f64 {
                    derivative_stencil(times, k)
                        .into_iter()
                        .map(|(i, w)| w * values[i])
                        .sum()
                };
                let (k, w) = bracket(times, t);
                node(k) * (1.0 - w) + node(k + 1) * w
            }
        }
    }
}

/// Interval index and interpolation weight, clamped to the sample range.
fn bracket(times: &[f64], t: f64) -> (usize, f64) {
    let n = times.len();
    if t <= times[0] {
        return (0, 0.0);
    }
    if t >= times[n - 1] {
        return (n - 2, 1.0);
    }
    let k = times.partition_point(|&x| x <= t) - 1;
    let k = k.min(n - 2);
    (k, (t - times[k]) / (times[k + 1] - times[k]))
}

/// Time families plus grid for one of the built-in models.
#[derive(Clone, Debug)]
pub struct ModelSetup {
    pub hamiltonian: OperatorFamily,
    pub frames: FrameFamily,
    pub grid: Vec<f64>,
    /// Frames validated at every grid point.
    pub grid_frames: Vec<CPTFrame>,
}

impl ModelSetup {
    pub fn problem(
        &self,
        equation: Equation,
        coupling: Option<OperatorFamily>,
        initial_state: ComplexVector,
        hbar: f64,
    ) -> EvolutionProblem {
        EvolutionProblem {
            hamiltonian: self.hamiltonian.clone(),
            frames: self.frames.clone(),
            coupling,
            hbar,
            equation,
            initial_state,
            grid: self.grid.clone(),
            substeps: None,
        }
    }
}

pub fn swap_matrix() -> ComplexMatrix {
    ComplexMatrix::from_real([[0.0, 1.0], [1.0, 0.0]])
}

pub fn two_level_hamiltonian(s: f64, alpha: f64) -> ComplexMatrix {
    let e = C64::from_polar(s, alpha);
    let s = c64(s, 0.0);
    ComplexMatrix::from_array([[e, s], [s, e.conj()]])
}

pub fn two_level_c(alpha: f64) -> ComplexMatrix {
    let sn = alpha.sin();
    ComplexMatrix::from_array([[c64(0.0, sn), ONE], [ONE, c64(0.0, -sn)]]).scale_real(1.0 / alpha.cos())
}

/// dC/dα of [`two_level_c`].
pub fn two_level_c_dalpha(alpha: f64) -> ComplexMatrix {
    let (sn, cs) = alpha.sin_cos();
    let m = ComplexMatrix::from_array([[c64(0.0, sn), ONE], [ONE, c64(0.0, -sn)]]);
    &m.scale_real(sn / (cs * cs)) + &ComplexMatrix::from_diag(&[c64(0.0, 1.0), c64(0.0, -1.0)])
}

/// The validated two-level frame frozen at angle `alpha`.
pub fn two_level_frame(alpha: f64, tol: f64) -> Result<CPTFrame> {
    validate_frames(two_level_c(alpha), swap_matrix(), AntilinearOperator::conjugation(2), tol)
}

/// Closed-form eigenvectors of the model, `(e^{−iα/2}, −e^{iα/2})/√2` and
/// `(e^{iα/2}, e^{−iα/2})/√2`. Their CPT norm squared is `cos α`, not 1.
pub fn two_level_raw_states(alpha: f64) -> [ComplexVector; 2] {
    let h = 0.5f64.sqrt();
    let e = C64::from_polar(h, alpha / 2.0);
    [
        ComplexVector::new(vec![e.conj(), -e]),
        ComplexVector::new(vec![e, e.conj()]),
    ]
}

/// The closed-form eigenvectors rescaled by `1/√cos α` to unit CPT norm.
pub fn two_level_states(alpha: f64) -> [ComplexVector; 2] {
    let k = 1.0 / alpha.cos().sqrt();
    two_level_raw_states(alpha).map(|v| v.scale_real(k))
}

#[derive(Clone, Debug)]
pub struct TwoLevelSetup {
    pub setup: ModelSetup,
    pub s: ScalarFunction,
    pub alpha: ScalarFunction,
}

impl TwoLevelSetup {
    /// `(0, 2s·cos α)`
    pub fn analytic_energies(&self, t: f64) -> [f64; 2] {
        [0.0, 2.0 * self.s.value(t) * self.alpha.value(t).cos()]
    }

    /// CPT-normalized analytic eigenvectors, level order matching
    /// [`Self::analytic_energies`].
    pub fn analytic_states(&self, t: f64) -> [ComplexVector; 2] {
        two_level_states(self.alpha.value(t))
    }

    /// `∫|α̇|` over the grid, trapezoid on a 16× refined grid.
    pub fn alpha_variation(&self) -> f64 {
        let g = &self.setup.grid;
        let mut total = 0.0;
        for w in g.windows(2) {
            let h = (w[1] - w[0]) / 16.0;
            for j in 0..16 {
                let a = w[0] + j as f64 * h;
                total += 0.5 * h * (self.alpha.derivative(a).abs() + self.alpha.derivative(a + h).abs());
            }
        }
        total
    }
}

/// Builds the two-level model on `grid`. Rejects any grid point with
/// `cos α(t) < 1/2`.
pub fn build_two_level(s: &ScalarFunction, alpha: &ScalarFunction, grid: &[f64]) -> Result<TwoLevelSetup> {
    check_grid(grid)?;
    let (start, end) = (grid[0], *grid.last().unwrap());
    let s = s.resolve(start, end)?;
    let alpha = alpha.resolve(start, end)?;
    for &t in grid {
        let c = alpha.value(t).cos();
        if c < 0.5 - 1e-12 {
            return Err(Error::Model(format!(
                "cos α(t) = {c:.6} < 1/2 at t={t} (α = {})",
                alpha.value(t)
            )));
        }
        if !s.value(t).is_finite() {
            return Err(Error::Model(format!("s(t) not finite at t={t}")));
        }
    }

    let (s1, a1) = (s.clone(), alpha.clone());
    let (s2, a2) = (s.clone(), alpha.clone());
    let hamiltonian = OperatorFamily::new(start, end, move |t| two_level_hamiltonian(s1.value(t), a1.value(t)))?
        .with_derivative(move |t| {
            let (sv, sd) = (s2.value(t), s2.derivative(t));
            let (av, ad) = (a2.value(t), a2.derivative(t));
            let e = C64::from_polar(1.0, av);
            let d_s = ComplexMatrix::from_array([[e, ONE], [ONE, e.conj()]]).scale_real(sd);
            let d_a = ComplexMatrix::from_diag(&[c64(0.0, 1.0) * e, c64(0.0, -1.0) * e.conj()])
                .scale_real(sv * ad);
            &d_s + &d_a
        });
    let (a3, a4) = (alpha.clone(), alpha.clone());
    let c = OperatorFamily::new(start, end, move |t| two_level_c(a3.value(t)))?
        .with_derivative(move |t| two_level_c_dalpha(a4.value(t)).scale_real(a4.derivative(t)));
    let frames = FrameFamily::new(c, swap_matrix(), AntilinearOperator::conjugation(2), DEFAULT_FRAME_TOL)?;
    let grid_frames = grid
        .iter()
        .map(|&t| frames.frame_at(t))
        .collect::<Result<Vec<_>>>()?;

    Ok(TwoLevelSetup {
        setup: ModelSetup {
            hamiltonian,
            frames,
            grid: grid.to_vec(),
            grid_frames,
        },
        s,
        alpha,
    })
}

#[derive(Clone, Debug)]
pub struct CLinearSetup {
    pub setup: ModelSetup,
    pub a: ScalarFunction,
    pub b: ScalarFunction,
}

impl CLinearSetup {
    /// Eigenvalues `a − b` (C = −1 eigenspace) and `a + b` (C = +1).
    pub fn analytic_energies(&self, t: f64) -> [f64; 2] {
        let (a, b) = (self.a.value(t), self.b.value(t));
        [a - b, a + b]
    }
}

/// `H(t) = a(t)·I + b(t)·C` on the fixed frame. Real-valuedness of `a`, `b`
/// is carried by [`ScalarFunction`]; the symmetry of `H` is checked at every
/// grid point.
pub fn build_c_linear(
    a: &ScalarFunction,
    b: &ScalarFunction,
    frame: &CPTFrame,
    grid: &[f64],
) -> Result<CLinearSetup> {
    check_grid(grid)?;
    let (start, end) = (grid[0], *grid.last().unwrap());
    let a = a.resolve(start, end)?;
    let b = b.resolve(start, end)?;
    let n = frame.dim();
    let c = frame.c().clone();
    let c2 = c.clone();
    let (a1, b1, a2, b2) = (a.clone(), b.clone(), a.clone(), b.clone());
    let hamiltonian = OperatorFamily::new(start, end, move |t| {
        c.scale_real(b1.value(t)).add_diag(c64(a1.value(t), 0.0))
    })?
    .with_derivative(move |t| c2.scale_real(b2.derivative(t)).add_diag(c64(a2.derivative(t), 0.0)));
    if hamiltonian.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: hamiltonian.dim(),
        });
    }
    let frames = FrameFamily::constant(frame, start, end, DEFAULT_FRAME_TOL)?;
    for &t in grid {
        let r = symmetry_report(frame, &hamiltonian.evaluate(t)?, 1e-10)?;
        if !r.all() {
            return Err(Error::Model(format!("H(t) = aI + bC fails symmetry checks at t={t}: {r:?}")));
        }
    }
    let grid_frames = vec![frame.clone(); grid.len()];
    Ok(CLinearSetup {
        setup: ModelSetup {
            hamiltonian,
            frames,
            grid: grid.to_vec(),
            grid_frames,
        },
        a,
        b,
    })
}

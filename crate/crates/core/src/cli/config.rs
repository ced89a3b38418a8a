//! Scenario files (TOML).
//!
//! ```toml
//! equation = "corrected"
//! hbar = 1.0
//! level = 0
//! epsilon = 0.5
//!
//! [grid]
//! t_start = 0.0
//! t_end = 10.0
//! points = 401
//!
//! [model]
//! preset = "two_level"
//! s = { kind = "constant", value = 1.0 }
//! alpha = { kind = "ramp", from = 0.0, to = 0.08 }
//! ```
//!
//! Matrices are written as rows of `[re, im]` pairs.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::dynamics::{unitarizing_coupling, Equation, EvolutionProblem, FrameFamily, OperatorFamily};
use crate::error::{Error, Result};
use crate::frames::{validate_frames, CPTFrame, DEFAULT_FRAME_TOL};
use crate::linalg::{c64, AntilinearOperator, ComplexMatrix, ComplexVector};
use crate::models::{build_c_linear, build_two_level, two_level_frame, ModelSetup, ScalarFunction};
use crate::quad::uniform_grid;

pub type MatrixRows = Vec<Vec<[f64; 2]>>;

pub fn matrix_from_rows(field: &str, given: &MatrixRows) -> Result<ComplexMatrix> {
    let rows = given
        .iter()
        .map(|r| r.iter().map(|&[re, im]| c64(re, im)).collect())
        .collect();
    ComplexMatrix::from_rows(rows).map_err(|e| Error::Config(format!("{field}: {e}")))
}

pub fn matrix_to_rows(m: &ComplexMatrix) -> MatrixRows {
    m.rows()
        .into_iter()
        .map(|r| r.into_iter().map(|z| [z.re, z.im]).collect())
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub t_start: f64,
    pub t_end: f64,
    pub points: usize,
}

/// A constant CPT-frame, either the two-level frame frozen at an angle or
/// explicit matrices (`k` defaults to the identity, i.e. plain conjugation).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FrameConfig {
    Angle {
        alpha: f64,
    },
    Matrices {
        c: MatrixRows,
        p: MatrixRows,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        k: Option<MatrixRows>,
    },
}

impl FrameConfig {
    pub fn build(&self, tol: f64) -> Result<CPTFrame> {
        match self {
            FrameConfig::Angle { alpha } => {
                if alpha.cos() < 0.5 {
                    return Err(Error::Config(format!("model.frame.alpha: cos α = {} < 1/2", alpha.cos())));
                }
                two_level_frame(*alpha, tol)
            }
            FrameConfig::Matrices { c, p, k } => {
                let c = matrix_from_rows("model.frame.c", c)?;
                let p = matrix_from_rows("model.frame.p", p)?;
                let k = match k {
                    Some(k) => matrix_from_rows("model.frame.k", k)?,
                    None => ComplexMatrix::identity(c.dim()),
                };
                validate_frames(c, p, AntilinearOperator::new(k), tol)
            }
        }
    }
}

fn default_frame() -> FrameConfig {
    FrameConfig::Angle { alpha: PI / 3.0 }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "preset", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelConfig {
    TwoLevel {
        s: ScalarFunction,
        alpha: ScalarFunction,
    },
    CLinear {
        a: ScalarFunction,
        b: ScalarFunction,
        #[serde(default = "default_frame")]
        frame: FrameConfig,
    },
    /// Constant `h`, or a straight line from `h` at the first grid point to
    /// `h_end` at the last, on a constant frame.
    Inline {
        h: MatrixRows,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        h_end: Option<MatrixRows>,
        frame: FrameConfig,
    },
}

/// Γ(t) for the coupled equation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum CouplingConfig {
    /// `−(ħ/2)·C·Ċ`, which reproduces the corrected equation.
    Correction,
    Zero,
    Matrix { matrix: MatrixRows },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: PathBuf,
    pub trajectory: String,
    pub adiabatic: String,
    pub summary: String,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig {
            dir: PathBuf::from("."),
            trajectory: "trajectory.csv".into(),
            adiabatic: "adiabatic.csv".into(),
            summary: "summary.json".into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// frame axiom residuals
    pub frame: f64,
    /// symmetry checks and |Im E|
    pub symmetry: f64,
    /// allowed max |‖φ(t)‖_t − ‖φ(0)‖_0| where the norm should be conserved
    pub norm_drift: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            frame: DEFAULT_FRAME_TOL,
            symmetry: 1e-10,
            norm_drift: 1e-6,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Checks {
    pub symmetry: bool,
    pub norm: bool,
    pub adiabatic: bool,
}

impl Default for Checks {
    fn default() -> Self {
        Checks {
            symmetry: true,
            norm: true,
            adiabatic: true,
        }
    }
}

fn default_hbar() -> f64 {
    1.0
}

fn default_epsilon() -> f64 {
    0.5
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub equation: Equation,
    #[serde(default = "default_hbar")]
    pub hbar: f64,
    #[serde(default)]
    pub level: usize,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub substeps: Option<usize>,
    /// Defaults to the tracked eigenstate `ψ_level(t₀)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial_state: Option<Vec<[f64; 2]>>,
    pub grid: GridConfig,
    pub model: ModelConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coupling: Option<CouplingConfig>,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub checks: Checks,
}

/// A built scenario: the evolution problem plus its frames on the grid.
#[derive(Clone, Debug)]
pub struct Scenario {
    pub problem: EvolutionProblem,
    pub grid_frames: Vec<CPTFrame>,
    /// Whether the configured equation conserves the CPT norm.
    pub norm_conserving: bool,
}

impl ScenarioConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: ScenarioConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    /// Field-level checks that need no numerics.
    pub fn validate(&self) -> Result<()> {
        let bad = |field: &str, msg: String| Err(Error::Config(format!("{field}: {msg}")));
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return bad("epsilon", format!("epsilon out of (0,1): {}", self.epsilon));
        }
        if !(self.hbar > 0.0 && self.hbar.is_finite()) {
            return bad("hbar", format!("must be positive and finite, got {}", self.hbar));
        }
        let g = &self.grid;
        if g.points < 2 {
            return bad("grid.points", format!("need at least 2, got {}", g.points));
        }
        if !(g.t_start.is_finite() && g.t_end.is_finite() && g.t_end > g.t_start) {
            return bad("grid", format!("need finite t_start < t_end, got [{}, {}]", g.t_start, g.t_end));
        }
        if self.substeps == Some(0) {
            return bad("substeps", "must be ≥ 1".into());
        }
        match (&self.equation, &self.coupling) {
            (Equation::Coupled, None) => return bad("coupling", "the coupled equation needs a [coupling] table".into()),
            (Equation::Plain | Equation::Corrected, Some(_)) => {
                return bad("coupling", format!("only used with the coupled equation, equation is {}", self.equation))
            }
            _ => {}
        }
        for (name, tol) in [
            ("tolerances.frame", self.tolerances.frame),
            ("tolerances.symmetry", self.tolerances.symmetry),
            ("tolerances.norm_drift", self.tolerances.norm_drift),
        ] {
            if !(tol > 0.0) {
                return bad(name, format!("must be positive, got {tol}"));
            }
        }
        Ok(())
    }

    pub fn grid(&self) -> Result<Vec<f64>> {
        uniform_grid(self.grid.t_start, self.grid.t_end, self.grid.points)
    }

    fn model_setup(&self, grid: &[f64]) -> Result<ModelSetup> {
        let tol = self.tolerances.frame;
        let (start, end) = (grid[0], *grid.last().unwrap());
        match &self.model {
            ModelConfig::TwoLevel { s, alpha } => Ok(build_two_level(s, alpha, grid)?.setup),
            ModelConfig::CLinear { a, b, frame } => Ok(build_c_linear(a, b, &frame.build(tol)?, grid)?.setup),
            ModelConfig::Inline { h, h_end, frame } => {
                let frame = frame.build(tol)?;
                let h0 = matrix_from_rows("model.h", h)?;
                h0.check_dim(frame.dim())?;
                let hamiltonian = match h_end {
                    None => OperatorFamily::constant(h0, start, end)?,
                    Some(h1) => {
                        let h1 = matrix_from_rows("model.h_end", h1)?;
                        h1.check_dim(frame.dim())?;
                        let rate = (&h1 - &h0).scale_real(1.0 / (end - start));
                        let r2 = rate.clone();
                        OperatorFamily::new(start, end, move |t| &h0 + &rate.scale_real(t - start))?
                            .with_derivative(move |_| r2.clone())
                    }
                };
                let frames = FrameFamily::constant(&frame, start, end, tol)?;
                Ok(ModelSetup {
                    hamiltonian,
                    frames,
                    grid: grid.to_vec(),
                    grid_frames: vec![frame; grid.len()],
                })
            }
        }
    }

    /// Builds the model and the evolution problem. The initial state is left
    /// empty when it should come from the eigenframe.
    pub fn build(&self) -> Result<Scenario> {
        self.validate()?;
        let grid = self.grid()?;
        let setup = self.model_setup(&grid)?;
        let dim = setup.frames.dim();
        let coupling = match &self.coupling {
            None => None,
            Some(CouplingConfig::Correction) => Some(unitarizing_coupling(&setup.frames, self.hbar)?),
            Some(CouplingConfig::Zero) => Some(OperatorFamily::constant(ComplexMatrix::zeros(dim), grid[0], *grid.last().unwrap())?),
            Some(CouplingConfig::Matrix { matrix }) => {
                let m = matrix_from_rows("coupling.matrix", matrix)?;
                m.check_dim(dim)?;
                Some(OperatorFamily::constant(m, grid[0], *grid.last().unwrap())?)
            }
        };
        let initial_state = match &self.initial_state {
            Some(v) => {
                let v = ComplexVector::new(v.iter().map(|&[re, im]| c64(re, im)).collect());
                if v.dim() != dim {
                    return Err(Error::Config(format!("initial_state: expected {dim} entries, got {}", v.dim())));
                }
                v
            }
            None => ComplexVector::zeros(0),
        };
        let norm_conserving = match (&self.equation, &self.coupling) {
            (Equation::Corrected, _) | (Equation::Coupled, Some(CouplingConfig::Correction)) => true,
            (Equation::Plain, _) | (Equation::Coupled, Some(CouplingConfig::Zero)) => setup.frames.is_constant(),
            _ => false,
        };
        if self.level >= dim {
            return Err(Error::Config(format!("level: {} out of range for dimension {dim}", self.level)));
        }
        let mut problem = setup.problem(self.equation, coupling, initial_state, self.hbar);
        problem.substeps = self.substeps;
        Ok(Scenario {
            problem,
            grid_frames: setup.grid_frames,
            norm_conserving,
        })
    }
}

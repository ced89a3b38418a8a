use std::fmt;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// The CPT-frame axioms, each checked separately by [`crate::frames::validate_frames`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Axiom {
    /// P² = I
    PInvolution,
    /// T² = I, i.e. K·conj(K) = I
    TInvolution,
    /// PT = TP
    PtCommute,
    /// C² = I
    CInvolution,
    /// CPT = TPC
    CptCommute,
    /// PC Hermitian
    MetricHermitian,
    /// PC positive definite
    MetricPositive,
}

impl fmt::Display for Axiom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Axiom::PInvolution => "P²−I",
            Axiom::TInvolution => "T²−I",
            Axiom::PtCommute => "PT−TP",
            Axiom::CInvolution => "C²−I",
            Axiom::CptCommute => "CPT−TPC",
            Axiom::MetricHermitian => "PC−(PC)†",
            Axiom::MetricPositive => "min eigenvalue of PC",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid matrix: {0}")]
    InvalidMatrix(String),

    #[error("eigensolver did not converge on {label} after {iterations} iterations")]
    EigenConvergence { label: String, iterations: usize },

    #[error("not a valid metric: {0}")]
    NotAMetric(String),

    #[error("matrix exponential overflow: norm {norm:e}")]
    ExpOverflow { norm: f64 },

    #[error("frame axiom violated: {axiom} residual {residual:e}")]
    FrameAxiom { axiom: Axiom, residual: f64 },

    #[error("invalid problem: {0}")]
    InvalidProblem(String),

    #[error("t={t} outside domain [{start}, {end}]")]
    OutOfDomain { t: f64, start: f64, end: f64 },

    #[error("non-finite state at t={t}; last good time {last_good}")]
    NonFinite { t: f64, last_good: f64 },

    #[error("broken PT-symmetry at t={t}: max |Im E| = {imag:e}")]
    BrokenSymmetry { t: f64, imag: f64 },

    #[error("ambiguous level tracking between t={t_prev} and t={t}: levels {levels:?} (best overlap {overlap:.4})")]
    LevelTracking {
        t_prev: f64,
        t: f64,
        levels: Vec<usize>,
        overlap: f64,
    },

    #[error("model error: {0}")]
    Model(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for errors produced by a bad configuration or model definition
    /// rather than by a numerical failure mid-run.
    pub fn is_config(&self) -> bool {
        matches!(
            self,
            Error::Config(_)
                | Error::Model(_)
                | Error::InvalidProblem(_)
                | Error::FrameAxiom { .. }
                | Error::DimensionMismatch { .. }
                | Error::InvalidMatrix(_)
                | Error::NotAMetric(_)
        )
    }
}

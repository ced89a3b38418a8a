use std::fmt;
use std::sync::Arc;

use log::debug;

use super::ComplexMatrix;
use crate::error::{Error, Result};

pub type TimeMatrixFn = Arc<dyn Fn(f64) -> ComplexMatrix + Send + Sync>;

/// A matrix-valued function of time on a closed interval, with an optional
/// analytic derivative.
#[derive(Clone)]
pub struct OperatorFamily {
    start: f64,
    end: f64,
    dim: usize,
    eval: TimeMatrixFn,
    derivative: Option<TimeMatrixFn>,
}

impl fmt::Debug for OperatorFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("OperatorFamily")
            .field("domain", &(self.start, self.end))
            .field("dim", &self.dim)
            .field("analytic_derivative", &self.derivative.is_some())
            .finish()
    }
}

impl OperatorFamily {
    pub fn new<F>(start: f64, end: f64, f: F) -> Result<Self>
    where
        F: Fn(f64) -> ComplexMatrix + Send + Sync + 'static,
    {
        if !(start.is_finite() && end.is_finite() && start <= end) {
            return Err(Error::InvalidProblem(format!(
                "bad family domain [{start}, {end}]"
            )));
        }
        let probe = f(start);
        probe.check_finite()?;
        Ok(OperatorFamily {
            start,
            end,
            dim: probe.dim(),
            eval: Arc::new(f),
            derivative: None,
        })
    }

    pub fn with_derivative<F>(mut self, d: F) -> Self
    where
        F: Fn(f64) -> ComplexMatrix + Send + Sync + 'static,
    {
        self.derivative = Some(Arc::new(d));
        self
    }

    pub fn constant(m: ComplexMatrix, start: f64, end: f64) -> Result<Self> {
        let dim = m.dim();
        let zero = ComplexMatrix::zeros(dim);
        Ok(Self::new(start, end, move |_| m.clone())?.with_derivative(move |_| zero.clone()))
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.start, self.end)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn has_derivative(&self) -> bool {
        self.derivative.is_some()
    }

    fn slack(&self) -> f64 {
        1e-12 * (self.end - self.start).abs().max(self.start.abs()).max(self.end.abs()).max(1.0)
    }

    pub fn contains(&self, t: f64) -> bool {
        t >= self.start - self.slack() && t <= self.end + self.slack()
    }

    pub fn evaluate(&self, t: f64) -> Result<ComplexMatrix> {
        if !self.contains(t) {
            return Err(Error::OutOfDomain {
                t,
                start: self.start,
                end: self.end,
            });
        }
        let m = (self.eval)(t);
        if !m.is_finite() {
            return Err(Error::NonFinite { t, last_good: t });
        }
        Ok(m)
    }

    pub fn analytic_derivative(&self, t: f64) -> Option<Result<ComplexMatrix>> {
        self.derivative.as_ref().map(|d| {
            if self.contains(t) {
                Ok(d(t))
            } else {
                Err(Error::OutOfDomain {
                    t,
                    start: self.start,
                    end: self.end,
                })
            }
        })
    }

    /// Pointwise map `t ↦ f(t, M(t))`. The analytic derivative is dropped.
    pub fn map<F>(&self, f: F) -> Self
    where
        F: Fn(f64, ComplexMatrix) -> ComplexMatrix + Send + Sync + 'static,
    {
        let inner = self.eval.clone();
        OperatorFamily {
            start: self.start,
            end: self.end,
            dim: self.dim,
            eval: Arc::new(move |t| f(t, inner(t))),
            derivative: None,
        }
    }
}

/// Default finite-difference step at time `t`.
pub fn default_step(t: f64) -> f64 {
    1e-5 * t.abs().max(1.0)
}

/// dF/dt at `t`: the analytic derivative when the family carries one,
/// otherwise a central difference, falling back to a second-order one-sided
/// stencil next to a domain edge.
pub fn family_derivative(f: &OperatorFamily, t: f64, h: f64) -> Result<ComplexMatrix> {
    if !(h > 0.0) {
        return Err(Error::InvalidProblem(format!("difference step must be positive, got {h}")));
    }
    if let Some(d) = f.analytic_derivative(t) {
        return d;
    }
    let (start, end) = f.domain();
    let inv = 1.0 / (2.0 * h);
    if t - h >= start && t + h <= end {
        let fp = f.evaluate(t + h)?;
        let fm = f.evaluate(t - h)?;
        return Ok((&fp - &fm).scale_real(inv));
    }
    if t + 2.0 * h <= end {
        debug!("family_derivative: t={t} near domain start, using forward stencil");
        let f0 = f.evaluate(t)?;
        let f1 = f.evaluate(t + h)?;
        let f2 = f.evaluate(t + 2.0 * h)?;
        return Ok((&(&f1.scale_real(4.0) - &f0.scale_real(3.0)) - &f2).scale_real(inv));
    }
    if t - 2.0 * h >= start {
        debug!("family_derivative: t={t} near domain end, using backward stencil");
        let f0 = f.evaluate(t)?;
        let f1 = f.evaluate(t - h)?;
        let f2 = f.evaluate(t - 2.0 * h)?;
        return Ok((&(&f0.scale_real(3.0) - &f1.scale_real(4.0)) + &f2).scale_real(inv));
    }
    Err(Error::OutOfDomain { t: t - h, start, end })
}

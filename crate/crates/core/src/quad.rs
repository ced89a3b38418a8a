//! Grid quadrature and differencing shared by the dynamics and adiabatic code.

use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, ComplexVector, ZERO};

/// `points` equally spaced samples of `[start, end]`, endpoints included.
pub fn uniform_grid(start: f64, end: f64, points: usize) -> Result<Vec<f64>> {
    if points < 2 || !(end > start) {
        return Err(Error::InvalidProblem(format!(
            "grid needs ≥ 2 points on a non-empty interval, got {points} on [{start}, {end}]"
        )));
    }
    let h = (end - start) / (points - 1) as f64;
    Ok((0..points)
        .map(|k| if k + 1 == points { end } else { start + k as f64 * h })
        .collect())
}

pub fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.len() < 2 {
        return Err(Error::InvalidProblem(format!(
            "grid needs at least 2 points, got {}",
            grid.len()
        )));
    }
    if let Some(w) = grid.windows(2).find(|w| !(w[1] > w[0]) || !w[0].is_finite()) {
        return Err(Error::InvalidProblem(format!(
            "grid not strictly increasing at {} → {}",
            w[0], w[1]
        )));
    }
    Ok(())
}

/// Running composite trapezoid integral; the first entry is 0.
pub fn cumulative_trapezoid(grid: &[f64], values: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(grid.len());
    let mut acc = 0.0;
    out.push(0.0);
    for k in 1..grid.len() {
        acc += 0.5 * (grid[k] - grid[k - 1]) * (values[k] + values[k - 1]);
        out.push(acc);
    }
    out
}

/// Running trapezoid integral of a matrix-valued integrand.
pub fn cumulative_trapezoid_matrix(grid: &[f64], values: &[ComplexMatrix]) -> Vec<ComplexMatrix> {
    let dim = values[0].dim();
    let mut out = Vec::with_capacity(grid.len());
    let mut acc = ComplexMatrix::zeros(dim);
    out.push(acc.clone());
    for k in 1..grid.len() {
        let avg = (&values[k] + &values[k - 1]).scale_real(0.5 * (grid[k] - grid[k - 1]));
        acc = &acc + &avg;
        out.push(acc.clone());
    }
    out
}

/// Weights of the three-point (non-uniform) derivative stencil at node `k`:
/// centred in the interior, one-sided second order at the ends.
pub fn derivative_stencil(grid: &[f64], k: usize) -> Vec<(usize, f64)> {
    let n = grid.len();
    if n == 2 {
        let w = 1.0 / (grid[1] - grid[0]);
        return vec![(0, -w), (1, w)];
    }
    let (i0, i1, i2) = if k == 0 {
        (0, 1, 2)
    } else if k == n - 1 {
        (n - 3, n - 2, n - 1)
    } else {
        (k - 1, k, k + 1)
    };
    let h1 = grid[i1] - grid[i0];
    let h2 = grid[i2] - grid[i1];
    let s = h1 + h2;
    let w = if k == i0 {
        [-(2.0 * h1 + h2) / (h1 * s), s / (h1 * h2), -h1 / (h2 * s)]
    } else if k == i1 {
        [-h2 / (h1 * s), (h2 - h1) / (h1 * h2), h1 / (h2 * s)]
    } else {
        [h2 / (h1 * s), -s / (h1 * h2), (h1 + 2.0 * h2) / (h2 * s)]
    };
    vec![(i0, w[0]), (i1, w[1]), (i2, w[2])]
}

/// Grid derivative of a vector-valued series.
pub fn differentiate_vectors(grid: &[f64], series: &[ComplexVector]) -> Vec<ComplexVector> {
    (0..grid.len())
        .map(|k| {
            derivative_stencil(grid, k)
                .into_iter()
                .fold(ComplexVector::zeros(series[k].dim()), |acc, (i, w)| {
                    acc.axpy(ZERO + w, &series[i])
                })
        })
        .collect()
}

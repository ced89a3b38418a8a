use super::{c64, ComplexMatrix, ComplexVector, C64, ONE, ZERO};
use crate::error::{Error, Result};

pub const DEFAULT_EIGEN_TOL: f64 = 1e-12;

#[derive(Clone, Debug)]
pub struct EigenPair {
    pub value: C64,
    pub vector: ComplexVector,
}

/// Eigenvalues and unit eigenvectors of a general complex matrix.
///
/// Pairs come back sorted by (Re λ, Im λ) ascending. Each eigenvector has
/// unit Euclidean norm and its first largest-modulus component real positive.
/// Two-dimensional inputs use the closed-form quadratic; larger ones go
/// through a complex Schur decomposition.
pub fn eigenpairs(m: &ComplexMatrix, tol: f64) -> Result<Vec<EigenPair>> {
    if !(tol > 0.0) {
        return Err(Error::InvalidMatrix(format!("eigen tolerance must be positive, got {tol}")));
    }
    m.check_finite()?;
    let n = m.dim();
    let mut pairs = match n {
        1 => vec![EigenPair {
            value: m[(0, 0)],
            vector: ComplexVector::basis(1, 0),
        }],
        2 => eigen2(m),
        _ => {
            let (t, q) = schur(m)?;
            schur_eigenvectors(&t, &q)
        }
    };
    for p in &mut pairs {
        p.vector = p.vector.normalized().fix_phase();
    }
    pairs.sort_by(|a, b| {
        a.value
            .re
            .total_cmp(&b.value.re)
            .then(a.value.im.total_cmp(&b.value.im))
    });

    let scale = operator_norm(m);
    for p in &pairs {
        let r = (&m.mul_vec(&p.vector) - &p.vector.scale(p.value)).norm();
        if r > tol * scale {
            return Err(Error::EigenConvergence {
                label: format!("{n}x{n} matrix (residual {r:e} for λ={})", p.value),
                iterations: 10 * n * n,
            });
        }
    }
    Ok(pairs)
}

fn eigen2(m: &ComplexMatrix) -> Vec<EigenPair> {
    let (a, b, c, d) = (m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)]);
    let half_tr = (a + d) * 0.5;
    let half_diff = (a - d) * 0.5;
    let root = (half_diff * half_diff + b * c).sqrt();
    // pick the root that avoids cancellation, recover the other from det
    let l1 = if (half_tr + root).norm() >= (half_tr - root).norm() {
        half_tr + root
    } else {
        half_tr - root
    };
    let det = a * d - b * c;
    let l2 = if l1.norm() > 0.0 { det / l1 } else { half_tr - (l1 - half_tr) };

    let scale = m.max_abs().max(f64::MIN_POSITIVE);
    let vec_for = |l: C64| -> Option<ComplexVector> {
        let v1 = ComplexVector::new(vec![b, l - a]);
        let v2 = ComplexVector::new(vec![l - d, c]);
        let (n1, n2) = (v1.norm(), v2.norm());
        if n1.max(n2) <= 1e-14 * scale {
            None
        } else if n1 >= n2 {
            Some(v1)
        } else {
            Some(v2)
        }
    };
    match (vec_for(l1), vec_for(l2)) {
        (Some(v1), Some(v2)) => vec![
            EigenPair { value: l1, vector: v1 },
            EigenPair { value: l2, vector: v2 },
        ],
        // scalar matrix: every vector is an eigenvector
        _ => vec![
            EigenPair {
                value: l1,
                vector: ComplexVector::basis(2, 0),
            },
            EigenPair {
                value: l2,
                vector: ComplexVector::basis(2, 1),
            },
        ],
    }
}

/// Complex Schur decomposition `M = Q·T·Q†` with `T` upper triangular.
///
/// Householder reduction to Hessenberg form followed by single-shift QR
/// sweeps (Wilkinson shift, Givens rotations). The sweep budget is
/// `10·dim²` in total.
pub(crate) fn schur(m: &ComplexMatrix) -> Result<(ComplexMatrix, ComplexMatrix)> {
    let n = m.dim();
    let (mut h, mut q) = hessenberg(m);
    let cap = 10 * n * n;
    let mut iterations = 0usize;
    let mut since_deflation = 0usize;
    let mut hi = n - 1;
    while hi > 0 {
        // find the start of the unreduced block ending at `hi`
        let mut lo = hi;
        while lo > 0 {
            let s = h[(lo - 1, lo - 1)].norm() + h[(lo, lo)].norm();
            let s = if s == 0.0 { h.norm_fro() } else { s };
            if h[(lo, lo - 1)].norm() <= f64::EPSILON * s {
                h[(lo, lo - 1)] = ZERO;
                break;
            }
            lo -= 1;
        }
        if lo == hi {
            hi -= 1;
            since_deflation = 0;
            continue;
        }
        if iterations >= cap {
            return Err(Error::EigenConvergence {
                label: format!("{n}x{n} matrix"),
                iterations,
            });
        }
        iterations += 1;
        since_deflation += 1;

        let shift = if since_deflation.is_multiple_of(11) {
            // exceptional shift to break cycles
            h[(hi, hi)] + c64(h[(hi, hi - 1)].norm() * 0.75, 0.0)
        } else {
            wilkinson_shift(h[(hi - 1, hi - 1)], h[(hi - 1, hi)], h[(hi, hi - 1)], h[(hi, hi)])
        };

        for i in lo..=hi {
            h[(i, i)] -= shift;
        }
        let mut rots = Vec::with_capacity(hi - lo);
        for k in lo..hi {
            let (cs, sn) = givens(h[(k, k)], h[(k + 1, k)]);
            for j in k..n {
                let x = h[(k, j)];
                let y = h[(k + 1, j)];
                h[(k, j)] = cs * x + sn * y;
                h[(k + 1, j)] = -sn.conj() * x + cs * y;
            }
            h[(k + 1, k)] = ZERO;
            rots.push((k, cs, sn));
        }
        for &(k, cs, sn) in &rots {
            let top = (k + 2).min(hi) + 1;
            for i in 0..top {
                let x = h[(i, k)];
                let y = h[(i, k + 1)];
                h[(i, k)] = x * cs + y * sn.conj();
                h[(i, k + 1)] = -x * sn + y * cs;
            }
            for i in 0..n {
                let x = q[(i, k)];
                let y = q[(i, k + 1)];
                q[(i, k)] = x * cs + y * sn.conj();
                q[(i, k + 1)] = -x * sn + y * cs;
            }
        }
        for i in lo..=hi {
            h[(i, i)] += shift;
        }
    }
    // clean the strictly lower part
    for i in 1..n {
        for j in 0..i {
            h[(i, j)] = ZERO;
        }
    }
    Ok((h, q))
}

/// Rotation with real `c` and complex `s` such that
/// `[c s; -s̄ c]·[a; b] = [r; 0]`.
fn givens(a: C64, b: C64) -> (C64, C64) {
    let an = a.norm();
    let bn = b.norm();
    if bn == 0.0 {
        return (ONE, ZERO);
    }
    if an == 0.0 {
        return (ZERO, (b.conj() / bn));
    }
    let r = an.hypot(bn);
    let phase = a / an;
    let c = an / r;
    let s = phase * b.conj() / r;
    (c64(c, 0.0), s)
}

fn wilkinson_shift(a: C64, b: C64, c: C64, d: C64) -> C64 {
    let half_diff = (a - d) * 0.5;
    let root = (half_diff * half_diff + b * c).sqrt();
    let mid = (a + d) * 0.5;
    let l1 = mid + root;
    let l2 = mid - root;
    if (l1 - d).norm() <= (l2 - d).norm() {
        l1
    } else {
        l2
    }
}

fn hessenberg(m: &ComplexMatrix) -> (ComplexMatrix, ComplexMatrix) {
    let n = m.dim();
    let mut h = m.clone();
    let mut q = ComplexMatrix::identity(n);
    for k in 0..n.saturating_sub(2) {
        let x: Vec<C64> = (k + 1..n).map(|i| h[(i, k)]).collect();
        let alpha_abs = x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if alpha_abs == 0.0 {
            continue;
        }
        let x0 = x[0];
        let phase = if x0.norm() == 0.0 { ONE } else { x0 / x0.norm() };
        let mut v = x.clone();
        v[0] += phase * alpha_abs;
        let vnorm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if vnorm == 0.0 {
            continue;
        }
        for z in &mut v {
            *z /= vnorm;
        }
        // H ← (I − 2vv†) H (I − 2vv†), acting on indices k+1..n
        for j in 0..n {
            let s: C64 = v.iter().enumerate().map(|(i, vi)| vi.conj() * h[(k + 1 + i, j)]).sum();
            for (i, vi) in v.iter().enumerate() {
                h[(k + 1 + i, j)] -= *vi * s * 2.0;
            }
        }
        for i in 0..n {
            let s: C64 = v.iter().enumerate().map(|(j, vj)| h[(i, k + 1 + j)] * vj).sum();
            for (j, vj) in v.iter().enumerate() {
                h[(i, k + 1 + j)] -= s * vj.conj() * 2.0;
            }
            let s: C64 = v.iter().enumerate().map(|(j, vj)| q[(i, k + 1 + j)] * vj).sum();
            for (j, vj) in v.iter().enumerate() {
                q[(i, k + 1 + j)] -= s * vj.conj() * 2.0;
            }
        }
        for i in k + 2..n {
            h[(i, k)] = ZERO;
        }
    }
    (h, q)
}

fn schur_eigenvectors(t: &ComplexMatrix, q: &ComplexMatrix) -> Vec<EigenPair> {
    let n = t.dim();
    let small = f64::EPSILON * t.norm_fro().max(f64::MIN_POSITIVE);
    (0..n)
        .map(|k| {
            let lambda = t[(k, k)];
            let mut y = vec![ZERO; n];
            y[k] = ONE;
            for j in (0..k).rev() {
                let s: C64 = (j + 1..=k).map(|i| t[(j, i)] * y[i]).sum();
                let mut denom = t[(j, j)] - lambda;
                if denom.norm() < small {
                    denom = c64(small, 0.0);
                }
                y[j] = -s / denom;
            }
            let y = ComplexVector::new(y);
            EigenPair {
                value: lambda,
                vector: q.mul_vec(&y),
            }
        })
        .collect()
}

/// Eigen-decomposition of a Hermitian matrix: ascending real eigenvalues and
/// an orthonormal eigenbasis (Schur vectors, so degenerate spaces stay
/// orthonormal).
pub fn hermitian_eigen(m: &ComplexMatrix) -> Result<(Vec<f64>, Vec<ComplexVector>)> {
    m.check_finite()?;
    let n = m.dim();
    // symmetrize to kill roundoff asymmetry before the Schur sweep
    let sym = (m + &m.adjoint()).scale_real(0.5);
    let (t, q) = if n == 1 {
        (sym.clone(), ComplexMatrix::identity(1))
    } else {
        schur(&sym)?
    };
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| t[(a, a)].re.total_cmp(&t[(b, b)].re));
    let values = idx.iter().map(|&i| t[(i, i)].re).collect();
    let vectors = idx.iter().map(|&i| q.column(i)).collect();
    Ok((values, vectors))
}

/// Positive square root of a Hermitian positive-definite matrix.
pub fn hermitian_sqrt(m: &ComplexMatrix, tol: f64) -> Result<ComplexMatrix> {
    let scale = m.norm_fro().max(1.0);
    let defect = m.hermitian_defect();
    if defect > tol * scale {
        return Err(Error::NotAMetric(format!(
            "matrix is not Hermitian (‖M−M†‖ = {defect:e})"
        )));
    }
    let (values, vectors) = hermitian_eigen(m)?;
    if let Some(&min) = values.first() {
        if min <= tol {
            return Err(Error::NotAMetric(format!(
                "non-positive eigenvalue {min:e}"
            )));
        }
    }
    let n = m.dim();
    let mut s = ComplexMatrix::zeros(n);
    for (lambda, v) in values.iter().zip(&vectors) {
        let r = lambda.sqrt();
        for i in 0..n {
            for j in 0..n {
                s[(i, j)] += v[i] * v[j].conj() * r;
            }
        }
    }
    Ok(s)
}

/// Spectral norm (largest singular value).
pub fn operator_norm(m: &ComplexMatrix) -> f64 {
    if m.max_abs() == 0.0 {
        return 0.0;
    }
    let gram = &m.adjoint() * m;
    match hermitian_eigen(&gram) {
        Ok((values, _)) => values.last().copied().unwrap_or(0.0).max(0.0).sqrt(),
        // Frobenius norm is a valid upper bound if the sweep ever stalls
        Err(_) => m.norm_fro(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::I;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn random_matrix(rng: &mut ChaCha8Rng, n: usize) -> ComplexMatrix {
        ComplexMatrix::from_fn(n, |_, _| c64(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
    }

    #[test]
    fn identity_eigenvalues() {
        let pairs = eigenpairs(&ComplexMatrix::identity(2), 1e-12).unwrap();
        assert_eq!(pairs.len(), 2);
        for p in &pairs {
            assert!((p.value - ONE).norm() < 1e-15);
        }
        let pairs = eigenpairs(&ComplexMatrix::identity(4), 1e-12).unwrap();
        assert!(pairs.iter().all(|p| (p.value - ONE).norm() < 1e-14));
    }

    #[test]
    fn two_level_hamiltonian_spectrum() {
        let (s, a) = (1.0, PI / 3.0);
        let e = C64::from_polar(1.0, a);
        let h = ComplexMatrix::from_array([[e * s, c64(s, 0.0)], [c64(s, 0.0), e.conj() * s]]);
        let pairs = eigenpairs(&h, 1e-12).unwrap();
        assert!(pairs[0].value.norm() < 1e-14);
        assert!((pairs[1].value - ONE).norm() < 1e-14);
    }

    #[test]
    fn two_level_metric_spectrum() {
        // PC at α = π/3 equals [[1, −i sin α],[i sin α, 1]] / cos α
        let a = PI / 3.0;
        let pc = ComplexMatrix::from_array([
            [c64(1.0, 0.0), c64(0.0, -a.sin())],
            [c64(0.0, a.sin()), c64(1.0, 0.0)],
        ])
        .scale_real(1.0 / a.cos());
        let sqrt3 = 3f64.sqrt();
        let pairs = eigenpairs(&pc, 1e-12).unwrap();
        assert!((pairs[0].value.re - (2.0 - sqrt3)).abs() < 1e-14);
        assert!((pairs[1].value.re - (2.0 + sqrt3)).abs() < 1e-14);
        let (vals, _) = hermitian_eigen(&pc).unwrap();
        assert!((vals[0] - (2.0 - sqrt3)).abs() < 1e-14);
        assert!((vals[1] - (2.0 + sqrt3)).abs() < 1e-14);

        assert!((operator_norm(&pc) - (2.0 + sqrt3)).abs() < 1e-13);
        let s = hermitian_sqrt(&pc, 1e-12).unwrap();
        assert!((operator_norm(&s) - (2.0 + sqrt3).sqrt()).abs() < 1e-13);
        assert!((&(&s * &s) - &pc).norm_fro() < 1e-13);
    }

    #[test]
    fn sqrt_of_diagonal() {
        let s = hermitian_sqrt(&ComplexMatrix::from_real_diag(&[4.0, 9.0]), 1e-12).unwrap();
        assert!((&s - &ComplexMatrix::from_real_diag(&[2.0, 3.0])).norm_fro() < 1e-14);
        let s = hermitian_sqrt(&ComplexMatrix::identity(3), 1e-12).unwrap();
        assert!((&s - &ComplexMatrix::identity(3)).norm_fro() < 1e-14);
    }

    #[test]
    fn sqrt_rejects_bad_metrics() {
        let not_herm = ComplexMatrix::from_array([[ONE, I], [I, ONE]]);
        assert!(matches!(hermitian_sqrt(&not_herm, 1e-12), Err(Error::NotAMetric(_))));
        let indefinite = ComplexMatrix::from_real([[0.0, 1.0], [1.0, 0.0]]);
        let err = hermitian_sqrt(&indefinite, 1e-12).unwrap_err();
        assert!(err.to_string().contains("not a valid metric"));
    }

    #[test]
    fn operator_norm_of_diagonal() {
        assert_eq!(operator_norm(&ComplexMatrix::zeros(2)), 0.0);
        assert!((operator_norm(&ComplexMatrix::identity(2)) - 1.0).abs() < 1e-15);
        assert!((operator_norm(&ComplexMatrix::from_real_diag(&[3.0, -4.0])) - 4.0).abs() < 1e-14);
    }

    #[test]
    fn jordan_block_is_handled() {
        let j = ComplexMatrix::from_real([[1.0, 1.0], [0.0, 1.0]]);
        let pairs = eigenpairs(&j, 1e-12).unwrap();
        assert!(pairs.iter().all(|p| (p.value - ONE).norm() < 1e-12));
    }

    #[test]
    fn random_residuals_dims_2_to_8() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for n in 2..=8 {
            for _ in 0..20 {
                let m = random_matrix(&mut rng, n);
                let pairs = eigenpairs(&m, 1e-12).unwrap();
                assert_eq!(pairs.len(), n);
                for p in &pairs {
                    let r = (&m.mul_vec(&p.vector) - &p.vector.scale(p.value)).norm();
                    assert!(r <= 1e-12 * operator_norm(&m), "n={n} residual {r:e}");
                }
                let tr: C64 = pairs.iter().map(|p| p.value).sum();
                assert!((tr - m.trace()).norm() < 1e-11);
            }
        }
    }

    #[test]
    fn hermitian_random_orthonormal() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for n in 2..=8 {
            let a = random_matrix(&mut rng, n);
            let h = &a + &a.adjoint();
            let (vals, vecs) = hermitian_eigen(&h).unwrap();
            for i in 0..n {
                let r = (&h.mul_vec(&vecs[i]) - &vecs[i].scale_real(vals[i])).norm();
                assert!(r < 1e-12 * operator_norm(&h));
                for j in 0..n {
                    let g = vecs[i].dot(&vecs[j]);
                    let target = if i == j { ONE } else { ZERO };
                    assert!((g - target).norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn gauge_and_ordering() {
        let m = ComplexMatrix::from_array([[c64(1.0, 1.0), ZERO], [ZERO, c64(1.0, -1.0)]]);
        let pairs = eigenpairs(&m, 1e-12).unwrap();
        assert!(pairs[0].value.im < pairs[1].value.im);
        for p in &pairs {
            let pivot = p.vector.iter().find(|z| z.norm() > 0.5).unwrap();
            assert!(pivot.im.abs() < 1e-15 && pivot.re > 0.0);
        }
    }

    #[test]
    fn bad_tolerance_rejected() {
        assert!(eigenpairs(&ComplexMatrix::identity(2), 0.0).is_err());
    }
}

//! PT- and CPT-frames, the CPT inner product and adjoint, and symmetry tests.
//!
//! A PT-frame is a linear involution `P` and an antilinear involution `T`
//! that commute. A CPT-frame adds a linear involution `C` with `CPT = TPC`
//! and `PC` positive definite; `PC` is then the metric of the inner product
//! `(x|y) = ⟨x|PC·y⟩`.
//!
//! `T` is carried as `x ↦ K·conj(x)`, so every axiom reduces to a matrix
//! identity:
//!
//! | axiom    | matrix form                    |
//! |----------|--------------------------------|
//! | P² = I   | P·P = I                        |
//! | T² = I   | K·conj(K) = I                  |
//! | PT = TP  | P·K = K·conj(P)                |
//! | C² = I   | C·C = I                        |
//! | CPT = TPC| C·P·K = K·conj(P)·conj(C)      |

use log::debug;
use serde::Serialize;

use crate::error::{Axiom, Error, Result};
use crate::linalg::{
    eigenpairs, hermitian_eigen, hermitian_sqrt, operator_norm, AntilinearOperator, ComplexMatrix,
    ComplexVector, C64, DEFAULT_EIGEN_TOL,
};

pub const DEFAULT_FRAME_TOL: f64 = 1e-10;

fn involution_residual(m: &ComplexMatrix) -> f64 {
    (&(m * m) - &ComplexMatrix::identity(m.dim())).norm_fro()
}

fn check(axiom: Axiom, residual: f64, limit: f64) -> Result<()> {
    if residual <= limit {
        Ok(())
    } else {
        Err(Error::FrameAxiom { axiom, residual })
    }
}

#[derive(Clone, Debug)]
pub struct PTFrame {
    p: ComplexMatrix,
    t: AntilinearOperator,
}

impl PTFrame {
    pub fn new(p: ComplexMatrix, t: AntilinearOperator, tol: f64) -> Result<Self> {
        p.check_dim(t.dim())?;
        let r = PTFrame { p, t };
        let res = r.residuals();
        let scale = |m: &ComplexMatrix| tol * m.norm_fro().powi(2).max(1.0);
        check(Axiom::PInvolution, res.0, scale(&r.p))?;
        check(Axiom::TInvolution, res.1, scale(r.t.matrix()))?;
        check(Axiom::PtCommute, res.2, tol * (r.p.norm_fro() * r.t.matrix().norm_fro()).max(1.0))?;
        Ok(r)
    }

    fn residuals(&self) -> (f64, f64, f64) {
        let k = self.t.matrix();
        let p2 = involution_residual(&self.p);
        let t2 = (&self.t.squared() - &ComplexMatrix::identity(k.dim())).norm_fro();
        let pt = (&(&self.p * k) - &(k * &self.p.conj())).norm_fro();
        (p2, t2, pt)
    }

    pub fn p(&self) -> &ComplexMatrix {
        &self.p
    }

    pub fn t(&self) -> &AntilinearOperator {
        &self.t
    }

    pub fn dim(&self) -> usize {
        self.p.dim()
    }

    /// The antilinear operator PT, i.e. `x ↦ P·K·conj(x)`.
    pub fn pt(&self) -> AntilinearOperator {
        self.t.after_linear(&self.p)
    }
}

/// Raw residual norms of every axiom, kept with each validated frame.
#[derive(Clone, Copy, Debug, Default, Serialize)]
pub struct FrameResiduals {
    pub p_involution: f64,
    pub t_involution: f64,
    pub pt_commute: f64,
    pub c_involution: f64,
    pub cpt_commute: f64,
    pub metric_hermitian: f64,
    pub metric_min_eigenvalue: f64,
}

impl FrameResiduals {
    /// Entrywise max of the residuals, min of the metric eigenvalue.
    pub fn worst(&self, other: &Self) -> Self {
        FrameResiduals {
            p_involution: self.p_involution.max(other.p_involution),
            t_involution: self.t_involution.max(other.t_involution),
            pt_commute: self.pt_commute.max(other.pt_commute),
            c_involution: self.c_involution.max(other.c_involution),
            cpt_commute: self.cpt_commute.max(other.cpt_commute),
            metric_hermitian: self.metric_hermitian.max(other.metric_hermitian),
            metric_min_eigenvalue: self.metric_min_eigenvalue.min(other.metric_min_eigenvalue),
        }
    }
}

/// A validated CPT-frame with its metric `PC` and derived operators cached.
#[derive(Clone, Debug)]
pub struct CPTFrame {
    c: ComplexMatrix,
    base: PTFrame,
    pc: ComplexMatrix,
    pc_sqrt: ComplexMatrix,
    pc_inv: ComplexMatrix,
    metric_eigenvalues: Vec<f64>,
    residuals: FrameResiduals,
}

/// Checks every CPT-frame axiom and returns the frame with caches filled.
///
/// Each failed axiom yields [`Error::FrameAxiom`] naming the axiom and the
/// residual norm.
pub fn validate_frames(
    c: ComplexMatrix,
    p: ComplexMatrix,
    t: AntilinearOperator,
    tol: f64,
) -> Result<CPTFrame> {
    if !(tol > 0.0) {
        return Err(Error::InvalidProblem(format!("frame tolerance must be positive, got {tol}")));
    }
    c.check_dim(p.dim())?;
    c.check_finite()?;
    p.check_finite()?;
    t.matrix().check_finite()?;
    let base = PTFrame::new(p, t, tol)?;
    let (p2, t2, ptc) = base.residuals();

    let k = base.t.matrix();
    let c2 = involution_residual(&c);
    check(Axiom::CInvolution, c2, tol * c.norm_fro().powi(2).max(1.0))?;
    let lhs = &(&c * &base.p) * k;
    let rhs = &(k * &base.p.conj()) * &c.conj();
    let cpt = (&lhs - &rhs).norm_fro();
    check(Axiom::CptCommute, cpt, tol * lhs.norm_fro().max(rhs.norm_fro()).max(1.0))?;

    let pc = &base.p * &c;
    let pc_norm = pc.norm_fro();
    let herm = pc.hermitian_defect();
    check(Axiom::MetricHermitian, herm, tol * pc_norm.max(1.0))?;
    let sym = (&pc + &pc.adjoint()).scale_real(0.5);
    let (metric_eigenvalues, _) = hermitian_eigen(&sym)?;
    let min_eig = metric_eigenvalues[0];
    if min_eig <= tol * operator_norm(&pc) {
        return Err(Error::FrameAxiom {
            axiom: Axiom::MetricPositive,
            residual: min_eig,
        });
    }
    let pc_sqrt = hermitian_sqrt(&sym, tol)?;
    let pc_inv = sym.inverse()?;

    Ok(CPTFrame {
        c,
        base,
        pc: sym,
        pc_sqrt,
        pc_inv,
        metric_eigenvalues,
        residuals: FrameResiduals {
            p_involution: p2,
            t_involution: t2,
            pt_commute: ptc,
            c_involution: c2,
            cpt_commute: cpt,
            metric_hermitian: herm,
            metric_min_eigenvalue: min_eig,
        },
    })
}

impl CPTFrame {
    pub fn c(&self) -> &ComplexMatrix {
        &self.c
    }

    pub fn p(&self) -> &ComplexMatrix {
        &self.base.p
    }

    pub fn t(&self) -> &AntilinearOperator {
        &self.base.t
    }

    pub fn base(&self) -> &PTFrame {
        &self.base
    }

    pub fn dim(&self) -> usize {
        self.c.dim()
    }

    /// The metric operator PC.
    pub fn metric(&self) -> &ComplexMatrix {
        &self.pc
    }

    pub fn metric_sqrt(&self) -> &ComplexMatrix {
        &self.pc_sqrt
    }

    pub fn metric_inverse(&self) -> &ComplexMatrix {
        &self.pc_inv
    }

    /// Eigenvalues of PC, ascending.
    pub fn metric_eigenvalues(&self) -> &[f64] {
        &self.metric_eigenvalues
    }

    pub fn residuals(&self) -> &FrameResiduals {
        &self.residuals
    }

    pub fn inner(&self, x: &ComplexVector, y: &ComplexVector) -> Result<C64> {
        cpt_inner(self, x, y)
    }

    pub fn norm(&self, x: &ComplexVector) -> Result<f64> {
        Ok(cpt_inner(self, x, x)?.re.max(0.0).sqrt())
    }
}

/// `(x|y) = ⟨x|PC·y⟩`, conjugate-linear in `x`.
pub fn cpt_inner(frame: &CPTFrame, x: &ComplexVector, y: &ComplexVector) -> Result<C64> {
    x.check_dim(frame.dim())?;
    y.check_dim(frame.dim())?;
    Ok(x.dot(&frame.pc.mul_vec(y)))
}

/// Adjoint with respect to the CPT inner product: `(PC)⁻¹·A†·PC`.
pub fn cpt_adjoint(frame: &CPTFrame, a: &ComplexMatrix) -> Result<ComplexMatrix> {
    a.check_dim(frame.dim())?;
    Ok(&(&frame.pc_inv * &a.adjoint()) * &frame.pc)
}

/// `(‖CP‖^{-1/2}, ‖PC‖^{1/2})`: constants with
/// `lower·‖x‖ ≤ ‖x‖_CPT ≤ upper·‖x‖` for every `x`.
pub fn norm_equivalence_bounds(frame: &CPTFrame) -> (f64, f64) {
    let cp = frame.c() * frame.p();
    let lower = operator_norm(&cp).powf(-0.5);
    let upper = operator_norm(&frame.pc).sqrt();
    (lower, upper)
}

#[derive(Clone, Debug, Serialize)]
pub struct SymmetryReport {
    pub pt_symmetric: bool,
    pub cpt_hermitian: bool,
    pub unbroken: bool,
    /// max |Im λ| over the spectrum of H
    pub eigen_realness: f64,
    /// ‖H·P·K − P·K·conj(H)‖
    pub pt_residual: f64,
    /// ‖H†·PC − PC·H‖
    pub hermitian_residual: f64,
    /// Largest distance of PT(eigenspace) from the eigenspace.
    pub eigenspace_residual: f64,
}

impl SymmetryReport {
    pub fn all(&self) -> bool {
        self.pt_symmetric && self.cpt_hermitian && self.unbroken
    }
}

/// PT-symmetry, CPT-Hermiticity and unbroken-ness of `h` relative to `frame`.
///
/// Unbroken-ness is tested per eigenspace: eigenvalues closer than
/// `tol·max(1, ‖H‖)` are grouped, the group's eigenvectors orthonormalized,
/// and the space accepted if PT maps it into itself. For a simple eigenvalue
/// that is exactly "v is an eigenvector of PT".
pub fn symmetry_report(frame: &CPTFrame, h: &ComplexMatrix, tol: f64) -> Result<SymmetryReport> {
    h.check_dim(frame.dim())?;
    if !(tol > 0.0) {
        return Err(Error::InvalidProblem(format!("symmetry tolerance must be positive, got {tol}")));
    }
    let pk = frame.p() * frame.t().matrix();
    let h_norm = operator_norm(h);
    let pt_residual = (&(h * &pk) - &(&pk * &h.conj())).norm_fro();
    let pt_symmetric = pt_residual <= tol * h_norm;
    let hermitian_residual = (&(&h.adjoint() * &frame.pc) - &(&frame.pc * h)).norm_fro();
    let cpt_hermitian = hermitian_residual <= tol * h_norm * operator_norm(&frame.pc);

    let (eigen_realness, eigenspace_residual) = match eigenpairs(h, DEFAULT_EIGEN_TOL.max(tol)) {
        Ok(pairs) => {
            let realness = pairs.iter().map(|p| p.value.im.abs()).fold(0.0, f64::max);
            let residual = eigenspace_pt_residual(&pairs, &pk, tol * h_norm.max(1.0));
            (realness, residual)
        }
        Err(e) => {
            debug!("symmetry_report: eigen-decomposition failed ({e}); treating as broken");
            (f64::INFINITY, f64::INFINITY)
        }
    };
    let unbroken = pt_symmetric && eigenspace_residual <= tol.max(1e3 * f64::EPSILON);
    Ok(SymmetryReport {
        pt_symmetric,
        cpt_hermitian,
        unbroken,
        eigen_realness,
        pt_residual,
        hermitian_residual,
        eigenspace_residual,
    })
}

fn eigenspace_pt_residual(
    pairs: &[crate::linalg::EigenPair],
    pk: &ComplexMatrix,
    cluster_tol: f64,
) -> f64 {
    // group (near-)degenerate eigenvalues
    let mut clusters: Vec<Vec<usize>> = Vec::new();
    for (i, p) in pairs.iter().enumerate() {
        let home = clusters
            .iter()
            .position(|c| c.iter().any(|&j| (pairs[j].value - p.value).norm() <= cluster_tol));
        match home {
            Some(c) => clusters[c].push(i),
            None => clusters.push(vec![i]),
        }
    }
    let mut worst = 0.0f64;
    for cluster in &clusters {
        if cluster.len() > 1 {
            debug!("symmetry_report: degenerate eigenvalue cluster {cluster:?}, testing eigenspace");
        }
        let basis = orthonormalize(cluster.iter().map(|&i| pairs[i].vector.clone()));
        for q in &basis {
            let w = pk.mul_vec(&q.conj());
            let mut rem = w.clone();
            for b in &basis {
                rem = rem.axpy(-b.dot(&w), b);
            }
            worst = worst.max(rem.norm() / w.norm().max(f64::MIN_POSITIVE));
        }
    }
    worst
}

/// Modified Gram-Schmidt, dropping numerically dependent vectors.
fn orthonormalize(vs: impl Iterator<Item = ComplexVector>) -> Vec<ComplexVector> {
    let mut out: Vec<ComplexVector> = Vec::new();
    for v in vs {
        let mut w = v.clone();
        for b in &out {
            w = w.axpy(-b.dot(&w), b);
        }
        let n = w.norm();
        if n > 1e-8 * v.norm().max(f64::MIN_POSITIVE) {
            out.push(w.scale_real(1.0 / n));
        }
    }
    out
}
